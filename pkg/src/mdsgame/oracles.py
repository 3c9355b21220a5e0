"""Brute-force reference values over all 2^N reception patterns.

Deliberately shares no code with :mod:`mdsgame.model`.
"""

from __future__ import annotations

import math

import numpy as np


def _patterns(N: int) -> np.ndarray:
    return ((np.arange(2**N)[:, None] >> np.arange(N)[None, :]) & 1).astype(bool)


def _weights(hits: np.ndarray, p: float, N: int) -> list[float]:
    return [p ** int(h) * (1.0 - p) ** (N - int(h)) for h in hits]


def enum_at_least_k(p: float, N: int, k: int) -> float:
    pats = _patterns(N)
    hits = pats.sum(axis=1)
    w = _weights(hits, p, N)
    return math.fsum(wi for wi, h in zip(w, hits) if h >= k)


def enum_recover(p: float, N: int, k: int) -> float:
    """Expected score: 1 if >= k arrive, else (systematic arrivals) / k."""
    pats = _patterns(N)
    hits = pats.sum(axis=1)
    systematic = pats[:, :k].sum(axis=1)
    w = _weights(hits, p, N)
    return math.fsum(wi * (1.0 if h >= k else s / k) for wi, h, s in zip(w, hits, systematic))


def enum_partial(p: float, N: int, k: int, n: int, m: int) -> float:
    """P(exactly n packets arrive and exactly m of them are systematic)."""
    pats = _patterns(N)
    hits = pats.sum(axis=1)
    systematic = pats[:, :k].sum(axis=1)
    w = _weights(hits, p, N)
    return math.fsum(wi for wi, h, s in zip(w, hits, systematic) if h == n and s == m)


def peasant_mul(a: int, b: int, poly: int = 0x11D) -> int:
    """Shift-and-add GF(2^8) product, independent of the codec's tables."""
    out = 0
    for bit in range(8):
        if (b >> bit) & 1:
            out ^= a << bit
    for bit in range(14, 7, -1):
        if (out >> bit) & 1:
            out ^= poly << (bit - 8)
    return out
