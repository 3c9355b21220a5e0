"""Systematic MDS erasure codec over GF(2^8).

Arithmetic uses the reduction polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11D).
The parity block of the generator matrix is a Cauchy matrix, so every k x k
submatrix of the stacked ``[I; C]`` generator is invertible and any k of the
N coded packets rebuild the source.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

POLY = 0x11D
FIELD_SIZE = 256


def _peasant_mul(a: int, b: int) -> int:
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        if a & 0x100:
            a ^= POLY
        b >>= 1
    return result


def _build_tables():
    exp = np.zeros(512, dtype=np.int64)
    log = np.zeros(256, dtype=np.int64)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x = _peasant_mul(x, 2)
    exp[255:510] = exp[0:255]
    mul = np.zeros((256, 256), dtype=np.uint8)
    nz = np.arange(1, 256)
    mul[1:, 1:] = exp[(log[nz][:, None] + log[nz][None, :]) % 255]
    return exp, log, mul


EXP, LOG, MUL_TABLE = _build_tables()


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    return int(MUL_TABLE[a, b])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    return int(EXP[255 - LOG[a]])


class CodingError(ValueError):
    pass


class UnsupportedParametersError(CodingError):
    pass


class InsufficientPacketsError(CodingError):
    pass


@dataclass(frozen=True)
class CodeParams:
    k: int
    r: int = 0

    def __post_init__(self):
        if self.k < 1 or self.r < 0:
            raise UnsupportedParametersError(f"need k >= 1 and r >= 0, got k={self.k}, r={self.r}")
        if self.N > FIELD_SIZE:
            raise UnsupportedParametersError(f"N={self.N} exceeds the GF(2^8) bound of {FIELD_SIZE}")

    @property
    def N(self) -> int:
        return self.k + self.r

    @property
    def rate(self) -> float:
        return self.k / self.N

    @property
    def d_min(self) -> int:
        return self.N - self.k + 1

    @property
    def e_max(self) -> int:
        return self.d_min - 1


@dataclass(frozen=True)
class Packet:
    index: int
    payload: bytes


@lru_cache(maxsize=128)
def _generator(k: int, r: int) -> np.ndarray:
    gen = np.zeros((k + r, k), dtype=np.uint8)
    gen[:k] = np.eye(k, dtype=np.uint8)
    # Cauchy rows: 1 / (x_i + y_j) with x_i = i, y_j = r + j, all distinct.
    for i in range(r):
        for j in range(k):
            gen[k + i, j] = gf_inv(i ^ (r + j))
    gen.setflags(write=False)
    return gen


def build_generator(params: CodeParams) -> np.ndarray:
    """N x k generator matrix; the top k rows are the identity."""
    return _generator(params.k, params.r)


def gf_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product over GF(2^8) for uint8 arrays."""
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for j in range(a.shape[1]):
        out ^= MUL_TABLE[a[:, j][:, None], b[j][None, :]]
    return out


def gf_solve_inverse(m: np.ndarray) -> np.ndarray:
    """Invert a square matrix over GF(2^8) by Gauss-Jordan elimination."""
    n = m.shape[0]
    aug = np.concatenate([m.astype(np.uint8), np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        pivots = np.nonzero(aug[col:, col])[0]
        if len(pivots) == 0:
            raise CodingError("singular matrix")
        p = col + pivots[0]
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        aug[col] = MUL_TABLE[gf_inv(int(aug[col, col])), aug[col]]
        for row in range(n):
            f = int(aug[row, col])
            if row != col and f:
                aug[row] ^= MUL_TABLE[f, aug[col]]
    return aug[:, n:]


def gf_det(m: np.ndarray) -> int:
    """Determinant over GF(2^8); nonzero iff invertible."""
    a = m.astype(np.uint8).copy()
    n = a.shape[0]
    det = 1
    for col in range(n):
        pivots = np.nonzero(a[col:, col])[0]
        if len(pivots) == 0:
            return 0
        p = col + pivots[0]
        if p != col:
            a[[col, p]] = a[[p, col]]  # sign is irrelevant in characteristic 2
        pivot = int(a[col, col])
        det = gf_mul(det, pivot)
        inv = gf_inv(pivot)
        for row in range(col + 1, n):
            f = int(a[row, col])
            if f:
                a[row] ^= MUL_TABLE[gf_mul(f, inv), a[col]]
    return det


def _as_matrix(payloads: Sequence[bytes]) -> np.ndarray:
    lengths = {len(p) for p in payloads}
    if len(lengths) > 1:
        raise CodingError(f"payload lengths differ: {sorted(lengths)}")
    return np.array([np.frombuffer(p, dtype=np.uint8) for p in payloads], dtype=np.uint8).reshape(
        len(payloads), -1
    )


def encode(source: Sequence[bytes], params: CodeParams) -> list[Packet]:
    """Encode k equal-length source payloads into N indexed coded packets."""
    if len(source) != params.k:
        raise CodingError(f"expected {params.k} source packets, got {len(source)}")
    data = _as_matrix(source)
    coded = list(source)
    if params.r:
        parity = gf_matmul(build_generator(params)[params.k :], data)
        coded += [row.tobytes() for row in parity]
    return [Packet(i, bytes(p)) for i, p in enumerate(coded)]


def decode(received: Iterable[Packet] | Mapping[int, bytes], params: CodeParams) -> list[bytes]:
    """Rebuild the k source payloads from any k distinct coded packets."""
    if isinstance(received, Mapping):
        items = sorted(received.items())
    else:
        items = sorted((p.index, p.payload) for p in received)
    indices = [i for i, _ in items]
    if len(set(indices)) != len(indices):
        raise CodingError("duplicate packet indices")
    if any(i < 0 or i >= params.N for i in indices):
        raise CodingError(f"packet index out of range [0, {params.N - 1}]")
    if len(items) < params.k:
        raise InsufficientPacketsError(
            f"{len(items)} packets received, {params.k} needed (tolerates {params.e_max} erasures)"
        )
    k = params.k
    chosen = items[:k]
    if [i for i, _ in chosen] == list(range(k)):
        return [bytes(p) for _, p in chosen]
    rows = [i for i, _ in chosen]
    data = _as_matrix([p for _, p in chosen])
    inv = gf_solve_inverse(build_generator(params)[rows])
    return [row.tobytes() for row in gf_matmul(inv, data)]
