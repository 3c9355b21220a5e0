"""Closed-form delay, throughput and recovery model for coded N-p CSMA.

The chain is: coded offered load -> per-packet success probability ->
recovery probability of an original packet -> throughput -> delay.

Two corrections to the printed recovery formulas are applied (see
``p_partial`` and ``p_recover``), and the per-packet success probability is
available in two forms selected by :class:`ModelVariant`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

_LOG_BINOM_THRESHOLD = 50


class ModelVariant(str, enum.Enum):
    LITERAL = "literal"
    SWAPPED = "swapped"


@dataclass(frozen=True)
class NetworkParams:
    """All model inputs.

    ``lam`` is the per-node Poisson rate and ``G`` the network-wide offered
    load in packets per slot.  Either may be omitted; the other is derived
    with ``G = M_d * lam`` (one slot per time unit).
    """

    M_d: int = 2
    lam: float | None = None
    G: float | None = None
    k: int = 8
    r: int = 0
    R: float = 1.0
    alpha: float = 0.2
    q: float = 1.53

    def __post_init__(self):
        if self.lam is None and self.G is None:
            raise ValueError("one of lam or G is required")
        if self.lam is None:
            object.__setattr__(self, "lam", self.G / self.M_d)
        if self.G is None:
            object.__setattr__(self, "G", self.M_d * self.lam)
        checks = {
            "M_d": self.M_d >= 1,
            "R": self.R > 0,
            "alpha": self.alpha > 0,
            "q": self.q > 0,
            "lam": self.lam >= 0,
            "G": self.G >= 0,
            "k": self.k >= 1,
            "r": self.r >= 0,
        }
        bad = [name for name, ok in checks.items() if not ok]
        if bad:
            raise ValueError(f"out-of-range parameter(s): {', '.join(bad)}")

    @property
    def N(self) -> int:
        return self.k + self.r

    def with_r(self, r: int) -> "NetworkParams":
        return replace(self, r=r)


@dataclass(frozen=True)
class ModelOutputs:
    P_p: float
    Q_p: float
    P_k: float
    P_f: float
    Th: float
    X: float
    D: float
    valid: bool
    G_coded: float = field(default=0.0)


def coded_load(base_load: float, k: int, r: int) -> float:
    return base_load * (1 + r / k)


def p_success(p: NetworkParams, v: ModelVariant = ModelVariant.LITERAL, r: int | None = None) -> float:
    """Probability a single coded packet gets through.

    ``literal`` evaluates ``e^-x (1 - e^-x)^(M_d-1)`` as printed; ``swapped``
    evaluates ``(1 - e^-x) e^(-x (M_d-1))``, i.e. this node transmits and the
    others stay silent.  ``x = alpha * lam * (1 + r/k)``.
    """
    r = p.r if r is None else r
    x = p.alpha * p.lam * (1 + r / p.k)
    silent = math.exp(-x)
    busy = -math.expm1(-x)
    if ModelVariant(v) is ModelVariant.LITERAL:
        return silent * busy ** (p.M_d - 1)
    return busy * math.exp(-x * (p.M_d - 1))


def _binom(n: int, i: int) -> float:
    if n <= _LOG_BINOM_THRESHOLD:
        return float(math.comb(n, i))
    return math.exp(math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1))


def _term(coef: float, P_p: float, hits: int, misses: int) -> float:
    # 0**0 == 1 in Python, which is the convention needed at P_p in {0, 1}
    return coef * P_p**hits * (1.0 - P_p) ** misses


def p_at_least_k(P_p: float, N: int, k: int) -> float:
    """P(at least k of N independent Bernoulli(P_p) packets arrive)."""
    if not 1 <= k <= N:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={N}")
    total = math.fsum(_term(_binom(N, i), P_p, i, N - i) for i in range(k, N + 1))
    return min(1.0, max(0.0, total))


def p_partial(P_p: float, N: int, k: int, n: int, m: int) -> float:
    """P(exactly n < k packets arrive, m of them systematic).

    Uses ``P_p^n`` for the received packets; the printed ``P_p^m`` does not
    sum to one over reception patterns.
    """
    if not (0 <= n < k <= N) or not (0 <= m <= n) or n - m > N - k:
        raise ValueError(f"invalid partial-reception indices N={N}, k={k}, n={n}, m={m}")
    return _term(_binom(k, m) * _binom(N - k, n - m), P_p, n, N - n)


def recovery_probability(P_p: float, N: int, k: int) -> float:
    """Expected fraction of original packets received or rebuilt.

    Full recovery when at least k of N arrive; otherwise the m systematic
    packets that did arrive are kept, contributing m/k.
    """
    partial = math.fsum(
        (m / k) * p_partial(P_p, N, k, n, m)
        for n in range(1, k)
        for m in range(max(1, n - (N - k)), n + 1)
    )
    return min(1.0, max(0.0, p_at_least_k(P_p, N, k) + partial))


def p_recover(p: NetworkParams, v: ModelVariant = ModelVariant.LITERAL) -> float:
    return recovery_probability(p_success(p, v), p.N, p.k)


def throughput(p: NetworkParams, P_f: float, G: float | None = None) -> float:
    """Throughput factor Th; ``G`` is the coded load (defaults to ``p.G`` coded by ``p.r``)."""
    G = coded_load(p.G, p.k, p.r) if G is None else G
    aG = p.alpha * G
    busy = -math.expm1(-aG)
    return busy**p.M_d * P_f * math.exp(-aG * (p.M_d - 1)) / (1 + p.alpha - math.exp(-aG))


def delay(p: NetworkParams, Th: float) -> tuple[float, float, bool]:
    """Return ``(X, D, valid)`` for throughput ``Th``; D is in slots."""
    MR = p.M_d * p.R
    X = (1 + MR) * Th
    if p.M_d == 1:
        D = 0.0
    elif X <= 0:
        D = math.inf
    else:
        try:
            D = ((X / MR) ** (1 - p.M_d) - 1) / (p.q * p.R)
        except OverflowError:
            D = math.inf
    valid = X > 0 and math.isfinite(D) and D > 0
    return X, D, valid


def evaluate(
    p: NetworkParams, v: ModelVariant = ModelVariant.LITERAL, G_coded: float | None = None
) -> ModelOutputs:
    """Run the whole chain.  ``G_coded`` overrides the coded load seen by the channel."""
    G_coded = coded_load(p.G, p.k, p.r) if G_coded is None else G_coded
    P_p = p_success(p, v)
    P_k = p_at_least_k(P_p, p.N, p.k)
    P_f = recovery_probability(P_p, p.N, p.k)
    Th = throughput(p, P_f, G_coded)
    X, D, valid = delay(p, Th)
    return ModelOutputs(
        P_p=P_p, Q_p=1.0 - P_p, P_k=P_k, P_f=P_f, Th=Th, X=X, D=D, valid=valid, G_coded=G_coded
    )
