"""Scenario runner: sweep-r, modes, equilibrium and validate."""

from __future__ import annotations

import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from mdsgame import __version__
from mdsgame.config import ScenarioConfig, serialize
from mdsgame.game import GameConfig, best_response_dynamics, sweep_symmetric
from mdsgame.model import ModelVariant, NetworkParams, evaluate, p_at_least_k, recovery_probability
from mdsgame.oracles import enum_at_least_k, enum_recover
from mdsgame.output import PlotSpec, ResultTable, emit_svg, write_csv
from mdsgame.sim import SimConfig, estimate_p_recover, simulate

log = logging.getLogger(__name__)

ENUM_TOL = 1e-12
MC_SIGMAS = 3.0
VALIDATE_MAX_N = 10
VALIDATE_P_GRID = tuple(round(0.1 * i, 1) for i in range(11))

MODE_LABELS = ("conventional (without EC)", "random MDS EC (out of NE)", "at equilibrium (NE)")


def network_params(cfg: ScenarioConfig, load: float | None = None) -> NetworkParams:
    common = dict(M_d=cfg.m_nodes, k=cfg.k, R=cfg.probing_rate, alpha=cfg.alpha, q=cfg.q)
    if load is None:
        return NetworkParams(lam=cfg.lambda_, **common)
    return NetworkParams(G=load, **common)


def sim_template(cfg: ScenarioConfig, load: float | None = None) -> SimConfig:
    G = cfg.m_nodes * cfg.lambda_ if load is None else load
    return SimConfig(
        M=cfg.m_nodes,
        lambda_slot=G * cfg.sim_load_scale / (cfg.m_nodes * cfg.k),
        k=cfg.k,
        p_e=cfg.erasure_prob,
        backoff_window=cfg.backoff_window,
        slots=cfg.slots,
        seed=cfg.seed,
    )


def game_config(cfg: ScenarioConfig, load: float | None = None) -> GameConfig:
    return GameConfig(
        params=network_params(cfg, load),
        r_max=cfg.r_max,
        evaluator=cfg.evaluator,
        variant=ModelVariant(cfg.model_variant),
        sim=sim_template(cfg, load),
        replications=cfg.replications,
        max_iters=cfg.max_iters,
        tolerance=cfg.tolerance,
    )


def random_r(r_star: int, cfg: ScenarioConfig) -> int:
    """Fixed out-of-equilibrium redundancy: r* + offset, clamped, never r* unless r_max = 0."""
    r = min(r_star + cfg.random_r_offset, cfg.r_max)
    if r == r_star:
        r = max(r_star - cfg.random_r_offset, 0)
    return r


def _metadata(cfg: ScenarioConfig, **extra) -> dict:
    meta = {"tool": f"mdsgame {__version__}", "scenario": cfg.scenario, "seed": cfg.seed}
    for line in serialize(cfg).splitlines():
        key, value = line.split(" = ", 1)
        meta[f"param.{key}"] = value
    meta.update(extra)
    return meta


def _finite(x: float) -> float | None:
    return x if math.isfinite(x) else None


def run_sweep(cfg: ScenarioConfig) -> ResultTable:
    sweep = sweep_symmetric(game_config(cfg))
    table = ResultTable(["r", "P_p", "P_f", "Th", "D", "valid"], metadata=_metadata(cfg, r_star=sweep.r_star))
    for p in sweep.points:
        table.add(p.r, p.P_p, p.P_f, p.Th, _finite(p.D) if p.valid else None, p.valid)
    return table


def conventional_delay(cfg: ScenarioConfig, gcfg: GameConfig) -> float:
    """Delay with coding off: r = 0 analytically, head-of-line retransmission when simulated."""
    if gcfg.evaluator == "analytic":
        out = evaluate(gcfg.params.with_r(0), gcfg.variant)
        return out.D if out.valid else math.inf
    base = replace(gcfg.sim, coding_enabled=False, r=0)
    delays = []
    for child in np.random.SeedSequence(base.seed).spawn(gcfg.replications):
        res = simulate(replace(base, seed=int(child.generate_state(1, np.uint64)[0])))
        delays.append(res.effective_delay)
    if any(d is None for d in delays):
        return math.inf
    return math.fsum(delays) / len(delays)


def run_modes(cfg: ScenarioConfig) -> ResultTable:
    table = ResultTable(
        ["load", "r_star", "r_random", "D_conventional", "D_random", "D_NE"],
        metadata=_metadata(cfg, labels=" | ".join(MODE_LABELS)),
    )
    for load in cfg.load_grid:
        gcfg = game_config(cfg, load)
        sweep = sweep_symmetric(gcfg)
        rr = random_r(sweep.r_star, cfg)
        pts = sweep.points
        table.add(
            load,
            sweep.r_star,
            rr,
            _finite(conventional_delay(cfg, gcfg)),
            _finite(pts[rr].D) if pts[rr].valid else None,
            _finite(pts[sweep.r_star].D),
        )
    return table


def run_equilibrium(cfg: ScenarioConfig) -> ResultTable:
    gcfg = game_config(cfg)
    sweep = sweep_symmetric(gcfg)
    report = best_response_dynamics((0,) * gcfg.players, gcfg)
    table = ResultTable(
        ["player", "r", "D"],
        metadata=_metadata(
            cfg,
            converged=report.converged,
            iterations=report.iterations,
            deviation_margin=report.deviation_margin,
            quasiconcave=report.quasiconcave,
            cycle=report.cycle,
            r_star=sweep.r_star,
        ),
    )
    for i, (r, d) in enumerate(zip(report.profile, report.utilities)):
        table.add(i, r, _finite(d))
    return table


def mc_agrees(exact: float, est: float, se: float, trials: int, sigmas: float = MC_SIGMAS) -> bool:
    """``|exact - est| <= sigmas * se``, with se floored at the 1/trials resolution.

    The floor matters when every trial scored the same value: the sample
    stderr is then 0 even though the true one is not.
    """
    return abs(exact - est) <= sigmas * max(se, 1.0 / trials)


def run_validate(cfg: ScenarioConfig) -> ResultTable:
    """Analytic recovery model against enumeration and Monte Carlo; sweep against direct evaluation."""
    table = ResultTable(
        ["check", "N", "k", "P_p", "analytic", "oracle", "abs_diff", "stderr", "pass"],
        metadata=_metadata(cfg, enum_tol=ENUM_TOL, mc_sigmas=MC_SIGMAS, mc_trials=cfg.mc_trials),
    )
    for N in range(1, VALIDATE_MAX_N + 1):
        for k in range(1, N + 1):
            for j, P in enumerate(VALIDATE_P_GRID):
                a = p_at_least_k(P, N, k)
                o = enum_at_least_k(P, N, k)
                table.add("enum_p_at_least_k", N, k, P, a, o, abs(a - o), 0.0, abs(a - o) < ENUM_TOL)
                a = recovery_probability(P, N, k)
                o = enum_recover(P, N, k)
                table.add("enum_p_recover", N, k, P, a, o, abs(a - o), 0.0, abs(a - o) < ENUM_TOL)
                est, se = estimate_p_recover(N, k, P, cfg.mc_trials, seed=(cfg.seed, N, k, j))
                table.add("mc_p_recover", N, k, P, a, est, abs(a - est), se, mc_agrees(a, est, se, cfg.mc_trials))
    gcfg = game_config(cfg)
    if gcfg.evaluator == "analytic":
        for p in sweep_symmetric(gcfg).points:
            direct = evaluate(gcfg.params.with_r(p.r), gcfg.variant).Th
            diff = abs(direct - p.Th)
            table.add("sweep_Th_recompute", gcfg.params.k + p.r, gcfg.params.k, p.P_p, p.Th, direct, diff, 0.0,
                      diff <= ENUM_TOL * max(1.0, abs(direct)))
    failures = sum(1 for ok in table.column("pass") if not ok)
    table.metadata["failures"] = failures
    return table


RUNNERS = {
    "sweep-r": run_sweep,
    "modes": run_modes,
    "equilibrium": run_equilibrium,
    "validate": run_validate,
}

PLOTS = {
    "sweep-r": PlotSpec(x="r", series=["Th"], labels=["Th"], title="Network throughput vs r", xlabel="r"),
    "modes": PlotSpec(
        x="load",
        series=["D_conventional", "D_random", "D_NE"],
        labels=list(MODE_LABELS),
        title="Overall delay of the CSMA network",
        xlabel="offered load G",
        ylabel="delay (slots)",
        log_y=True,
    ),
}


def run_scenario(cfg: ScenarioConfig) -> ResultTable:
    log.info("running %s (seed %d)", cfg.scenario, cfg.seed)
    return RUNNERS[cfg.scenario](cfg)


def write_outputs(cfg: ScenarioConfig, table: ResultTable, out_dir: Path | None = None) -> list[Path]:
    out_dir = Path(out_dir or cfg.output_dir)
    stem = f"{cfg.scenario}-{cfg.seed}"
    paths = [write_csv(table, out_dir / f"{stem}.csv")]
    if cfg.emit_svg and cfg.scenario in PLOTS:
        path = out_dir / f"{stem}.svg"
        path.write_text(emit_svg(table, PLOTS[cfg.scenario]), encoding="utf-8")
        paths.append(path)
    return paths
