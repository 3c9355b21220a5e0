"""Non-cooperative redundancy game.

Each player picks a redundancy count r_i in {0, ..., r_max} and pays its own
delay.  Players are coupled through the channel: the offered load seen by
everyone is the base load times the mean coded-load factor (1 + r_j / k).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from mdsgame.model import ModelOutputs, ModelVariant, NetworkParams, evaluate
from mdsgame.sim import SimConfig, simulate

log = logging.getLogger(__name__)

Profile = tuple[int, ...]
UtilityFn = Callable[[int, Profile], float]


class NoFeasibleResponseError(RuntimeError):
    pass


class NoOptimumError(RuntimeError):
    pass


@dataclass(frozen=True)
class GameConfig:
    """Game setup.

    ``evaluator`` is ``"analytic"`` (closed-form model, ``variant`` applies)
    or ``"simulated"`` (``sim`` is the scenario template; every deviation is
    simulated on the same seeds).  ``utility_fn`` replaces both with an
    arbitrary ``f(player, profile) -> delay``.
    """

    params: NetworkParams
    r_max: int = 16
    evaluator: str = "analytic"
    variant: ModelVariant = ModelVariant.LITERAL
    sim: SimConfig | None = None
    replications: int = 1
    max_iters: int = 50
    tolerance: float = 1e-12
    utility_fn: UtilityFn | None = None

    def __post_init__(self):
        if self.r_max < 0:
            raise ValueError("r_max must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.evaluator not in ("analytic", "simulated"):
            raise ValueError(f"unknown evaluator {self.evaluator!r}")
        if self.evaluator == "simulated" and self.sim is None:
            raise ValueError("simulated evaluator needs a SimConfig template")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")

    @property
    def players(self) -> int:
        return self.params.M_d


@dataclass
class SweepPoint:
    r: int
    P_p: float
    P_f: float
    Th: float
    D: float
    valid: bool


@dataclass
class Sweep:
    points: list[SweepPoint]
    r_star: int


@dataclass
class ProbeReport:
    unimodal: bool
    payoffs: list[float]
    violations: list[int] = field(default_factory=list)


@dataclass
class EquilibriumReport:
    profile: Profile
    converged: bool
    iterations: int
    utilities: list[float]
    deviation_margin: float
    quasiconcave: bool
    cycle: bool = False
    history: list[Profile] = field(default_factory=list)


def check_profile(profile: Sequence[int], cfg: GameConfig) -> Profile:
    profile = tuple(int(x) for x in profile)
    if len(profile) != cfg.players:
        raise ValueError(f"profile needs {cfg.players} entries, got {len(profile)}")
    if any(not 0 <= x <= cfg.r_max for x in profile):
        raise ValueError(f"profile entries must lie in [0, {cfg.r_max}]: {profile}")
    return profile


def analytic_outputs(i: int, profile: Profile, cfg: GameConfig) -> ModelOutputs:
    p = cfg.params
    load_factor = math.fsum(1 + rj / p.k for rj in profile) / len(profile)
    return evaluate(p.with_r(profile[i]), cfg.variant, G_coded=p.G * load_factor)


def _sim_runs(profile: Profile, cfg: GameConfig):
    base = replace(cfg.sim, M=cfg.players, r=profile, coding_enabled=True)
    seeds = np.random.SeedSequence(base.seed).spawn(cfg.replications)
    for child in seeds:
        yield simulate(replace(base, seed=int(child.generate_state(1, np.uint64)[0])))


def _finite_delay(D: float | None) -> float:
    if D is None or not math.isfinite(D) or D < 0:
        return math.inf
    return D


def utility(i: int, profile: Sequence[int], cfg: GameConfig) -> float:
    """Player i's delay under ``profile``; +inf marks an invalid model region."""
    profile = check_profile(profile, cfg)
    if cfg.utility_fn is not None:
        return cfg.utility_fn(i, profile)
    if cfg.evaluator == "analytic":
        out = analytic_outputs(i, profile, cfg)
        return _finite_delay(out.D) if out.X > 0 else math.inf
    delays = [run.node_delay(i) for run in _sim_runs(profile, cfg)]
    if any(d is None for d in delays):
        return math.inf
    return math.fsum(delays) / len(delays)


def utility_scan(i: int, profile: Sequence[int], cfg: GameConfig) -> list[float]:
    profile = check_profile(profile, cfg)
    return [
        utility(i, profile[:i] + (r,) + profile[i + 1 :], cfg) for r in range(cfg.r_max + 1)
    ]


def _argmin(values: Sequence[float]) -> int:
    best = 0
    for r, v in enumerate(values):
        if v < values[best]:
            best = r
    return best


def best_response(i: int, profile: Sequence[int], cfg: GameConfig) -> int:
    """Exhaustive argmin of player i's delay; ties go to the smaller r."""
    scan = utility_scan(i, profile, cfg)
    if all(math.isinf(v) for v in scan):
        raise NoFeasibleResponseError(f"player {i} has no finite-delay response to {tuple(profile)}")
    return _argmin(scan)


def _gain(stay: float, dev: float) -> float:
    if math.isinf(stay) and math.isinf(dev):
        return 0.0
    return dev - stay


def is_nash(profile: Sequence[int], cfg: GameConfig) -> tuple[bool, float]:
    """No unilateral deviation lowers delay by more than ``tolerance``.

    Returns the flag and the smallest ``D(deviate) - D(stay)``; ``inf`` when
    there are no deviations to try.
    """
    profile = check_profile(profile, cfg)
    margin = math.inf
    for i in range(cfg.players):
        scan = utility_scan(i, profile, cfg)
        stay = scan[profile[i]]
        for r, dev in enumerate(scan):
            if r != profile[i]:
                margin = min(margin, _gain(stay, dev))
    return margin >= -cfg.tolerance, margin


def quasiconcavity_probe(cfg: GameConfig, profile: Sequence[int], i: int) -> ProbeReport:
    """Check that -D along player i's own strategy rises then falls."""
    payoffs = [-d for d in utility_scan(i, profile, cfg)]
    tol = cfg.tolerance
    falling = False
    violations = []
    for r in range(1, len(payoffs)):
        a, b = payoffs[r - 1], payoffs[r]
        if b < a - tol:
            falling = True
        elif b > a + tol and falling:
            violations.append(r)
    if violations:
        log.info("payoff of player %d is not unimodal at r=%s", i, violations)
    return ProbeReport(not violations, payoffs, violations)


def best_response_dynamics(init: Sequence[int], cfg: GameConfig) -> EquilibriumReport:
    """Round-robin best responses until a full round changes nothing."""
    profile = check_profile(init, cfg)
    history = [profile]
    seen = {profile}
    converged = cycle = False
    rounds = 0
    while rounds < cfg.max_iters and not cycle:
        rounds += 1
        changed = False
        for i in range(cfg.players):
            br = best_response(i, profile, cfg)
            if br == profile[i]:
                continue
            profile = profile[:i] + (br,) + profile[i + 1 :]
            changed = True
            history.append(profile)
            if profile in seen:
                cycle = True
                break
            seen.add(profile)
        if not changed:
            converged = True
            break
    _, margin = is_nash(profile, cfg)
    probes = [quasiconcavity_probe(cfg, profile, i) for i in range(cfg.players)]
    return EquilibriumReport(
        profile=profile,
        converged=converged,
        iterations=rounds,
        utilities=[utility(i, profile, cfg) for i in range(cfg.players)],
        deviation_margin=margin,
        quasiconcave=all(p.unimodal for p in probes),
        cycle=cycle,
        history=history,
    )


def symmetric_point(r: int, cfg: GameConfig) -> SweepPoint:
    profile = (r,) * cfg.players
    if cfg.utility_fn is not None:
        D = cfg.utility_fn(0, profile)
        return SweepPoint(r, math.nan, math.nan, math.nan, D, math.isfinite(D))
    if cfg.evaluator == "analytic":
        out = analytic_outputs(0, profile, cfg)
        return SweepPoint(r, out.P_p, out.P_f, out.Th, out.D, out.valid)
    runs = list(_sim_runs(profile, cfg))
    attempts = sum(run.transmissions for run in runs)
    delays = [run.effective_delay for run in runs]
    valid = all(d is not None for d in delays)
    return SweepPoint(
        r,
        P_p=sum(run.success_slots for run in runs) / attempts if attempts else 0.0,
        P_f=math.fsum(run.recovery_rate for run in runs) / len(runs),
        Th=math.fsum(run.throughput for run in runs) / len(runs),
        D=math.fsum(delays) / len(delays) if valid else math.inf,
        valid=valid,
    )


def sweep_symmetric(cfg: GameConfig) -> Sweep:
    """Evaluate every all-r profile; r* minimises delay over valid points."""
    points = [symmetric_point(r, cfg) for r in range(cfg.r_max + 1)]
    valid = [p for p in points if p.valid]
    if not valid:
        raise NoOptimumError("no valid point on the symmetric sweep")
    best = valid[0]
    for p in valid[1:]:
        if p.D < best.D:
            best = p
    return Sweep(points, best.r)
