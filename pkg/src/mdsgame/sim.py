"""Slotted non-persistent CSMA simulator with MDS-coded generations.

One slot is one packet transmission time.  Each slot:

1. every node draws Poisson(``lambda_slot``) new generations; a generation is
   enqueued as N = k + r coded packets (or k raw packets with coding off);
2. a node whose head-of-line packet is ready (backoff 0) transmits if the
   previous slot was idle, otherwise it defers by a uniform draw from
   [1, W] slots.  The previous transmitter defers too, so the channel is
   re-contended after every transmission;
3. a lone transmitter succeeds unless the channel erases the packet
   (probability ``p_e``); two or more transmitters collide and draw a new
   backoff from [1, W];
4. a coded generation is recovered once k of its packets arrive.  Lost coded
   packets are not resent.  With coding off, lost packets stay at the head of
   the queue and are resent after a backoff, and the generation completes
   when all k are delivered.

Randomness: one Philox stream per node plus one for the channel, all spawned
from ``numpy.random.SeedSequence(seed)``.  A run is a pure function of its
:class:`SimConfig`.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from mdsgame.coding import CodeParams, decode, encode

_BUFFER = 1024


@dataclass(frozen=True)
class SimConfig:
    M: int = 2
    lambda_slot: float = 0.01
    k: int = 8
    r: int | tuple[int, ...] = 0
    p_e: float = 0.0
    backoff_window: int = 8
    slots: int = 20_000
    seed: int = 0
    coding_enabled: bool = True
    verify_fraction: float = 0.0

    def __post_init__(self):
        if self.M < 1 or self.backoff_window < 1 or self.slots < 1 or self.k < 1:
            raise ValueError("need M >= 1, backoff_window >= 1, slots >= 1, k >= 1")
        if not 0.0 <= self.p_e <= 1.0:
            raise ValueError(f"p_e must lie in [0, 1], got {self.p_e}")
        if self.lambda_slot < 0:
            raise ValueError(f"lambda_slot must be >= 0, got {self.lambda_slot}")
        if not isinstance(self.r, int):
            object.__setattr__(self, "r", tuple(int(x) for x in self.r))
            if len(self.r) != self.M:
                raise ValueError(f"per-node r needs {self.M} entries, got {len(self.r)}")
        if min(self.redundancy) < 0:
            raise ValueError("r must be >= 0")

    @property
    def redundancy(self) -> tuple[int, ...]:
        """Per-node redundancy actually used (all zero with coding off)."""
        if not self.coding_enabled:
            return (0,) * self.M
        if isinstance(self.r, int):
            return (self.r,) * self.M
        return self.r


@dataclass
class GenerationRecord:
    id: int
    owner: int
    arrival: int
    size: int
    sent: int = 0
    received: int = 0
    recovered_at: int | None = None
    failed: bool = False
    received_indices: list[int] = field(default_factory=list)

    @property
    def delay(self) -> int | None:
        return None if self.recovered_at is None else self.recovered_at - self.arrival


@dataclass
class NodeStats:
    attempts: int = 0
    successes: int = 0
    collisions: int = 0
    erasures: int = 0


@dataclass
class SimResult:
    throughput: float
    mean_delay: float | None
    collision_rate: float
    recovery_rate: float
    slots: int
    idle_slots: int
    success_slots: int
    collision_slots: int
    erased_slots: int
    packets_enqueued: int
    packets_delivered: int
    packets_dropped: int
    packets_queued: int
    transmissions: int
    node_stats: list[NodeStats]
    records: list[GenerationRecord]
    verified_decodes: int = 0

    @property
    def recovered(self) -> int:
        return sum(1 for g in self.records if g.recovered_at is not None)

    @property
    def failed(self) -> int:
        return sum(1 for g in self.records if g.failed)

    @property
    def loss_rate(self) -> float:
        """Fraction of settled generations (recovered or exhausted) that failed."""
        settled = self.recovered + self.failed
        return self.failed / settled if settled else 0.0

    @property
    def effective_delay(self) -> float | None:
        """Mean delay inflated by 1 / (1 - loss_rate); None if nothing recovered."""
        if self.mean_delay is None:
            return None
        return self.mean_delay / (1.0 - self.loss_rate)

    def node_delay(self, node: int, effective: bool = True) -> float | None:
        mine = [g for g in self.records if g.owner == node]
        delays = [g.delay for g in mine if g.recovered_at is not None]
        if not delays:
            return None
        mean = math.fsum(delays) / len(delays)
        if not effective:
            return mean
        failed = sum(1 for g in mine if g.failed)
        return mean * (len(delays) + failed) / len(delays)


class _Stream:
    """Buffered draws from one Philox generator."""

    def __init__(self, seed_seq: np.random.SeedSequence, window: int):
        self.rng = np.random.Generator(np.random.Philox(seed_seq))
        self.window = window
        self._ints: list[int] = []
        self._unif: list[float] = []

    def backoff(self) -> int:
        if not self._ints:
            self._ints = self.rng.integers(1, self.window + 1, size=_BUFFER).tolist()[::-1]
        return self._ints.pop()

    def uniform(self) -> float:
        if not self._unif:
            self._unif = self.rng.random(_BUFFER).tolist()[::-1]
        return self._unif.pop()


def simulate(cfg: SimConfig) -> SimResult:
    M, W, k = cfg.M, cfg.backoff_window, cfg.k
    seeds = np.random.SeedSequence(cfg.seed).spawn(M + 2)
    nodes = [_Stream(s, W) for s in seeds[:M]]
    channel = _Stream(seeds[M], W)
    audit = np.random.Generator(np.random.Philox(seeds[M + 1]))
    arrivals = [node.rng.poisson(cfg.lambda_slot, size=cfg.slots) for node in nodes]
    sizes = [k + r for r in cfg.redundancy]
    coded = cfg.coding_enabled

    queues: list[deque] = [deque() for _ in range(M)]
    backoff = [0] * M
    stats = [NodeStats() for _ in range(M)]
    records: list[GenerationRecord] = []
    prev_tx: list[int] = []
    idle = success = collision = erased = 0
    enqueued = delivered = dropped = 0

    for t in range(cfg.slots):
        for i in range(M):
            for _ in range(int(arrivals[i][t])):
                g = GenerationRecord(len(records), i, t, sizes[i])
                records.append(g)
                queues[i].extend((g, j) for j in range(g.size))
                enqueued += g.size

        tx = []
        for i in range(M):
            if backoff[i] > 0:
                backoff[i] -= 1
                continue
            if not queues[i]:
                continue
            if prev_tx:
                backoff[i] = nodes[i].backoff()
                continue
            tx.append(i)

        if not tx:
            idle += 1
        elif len(tx) == 1:
            i = tx[0]
            stats[i].attempts += 1
            g, j = queues[i][0]
            lost = cfg.p_e > 0 and channel.uniform() < cfg.p_e
            if lost:
                erased += 1
                stats[i].erasures += 1
                if coded:
                    queues[i].popleft()
                    g.sent += 1
                    dropped += 1
                    _settle(g, k)
                else:
                    backoff[i] = nodes[i].backoff()
            else:
                success += 1
                stats[i].successes += 1
                queues[i].popleft()
                g.sent += 1
                g.received += 1
                g.received_indices.append(j)
                delivered += 1
                if g.recovered_at is None and g.received >= k:
                    g.recovered_at = t + 1
                _settle(g, k)
        else:
            collision += 1
            for i in tx:
                stats[i].attempts += 1
                stats[i].collisions += 1
                if coded:
                    g, _ = queues[i].popleft()
                    g.sent += 1
                    dropped += 1
                    _settle(g, k)
                backoff[i] = nodes[i].backoff()
        prev_tx = tx

    verified = _verify(records, k, cfg.verify_fraction, audit) if coded else 0
    recovered = [g for g in records if g.recovered_at is not None]
    delays = [g.delay for g in recovered]
    return SimResult(
        throughput=len(recovered) * k / cfg.slots,
        mean_delay=math.fsum(delays) / len(delays) if delays else None,
        collision_rate=collision / cfg.slots,
        recovery_rate=len(recovered) / len(records) if records else 0.0,
        slots=cfg.slots,
        idle_slots=idle,
        success_slots=success,
        collision_slots=collision,
        erased_slots=erased,
        packets_enqueued=enqueued,
        packets_delivered=delivered,
        packets_dropped=dropped,
        packets_queued=sum(len(q) for q in queues),
        transmissions=sum(s.attempts for s in stats),
        node_stats=stats,
        records=records,
        verified_decodes=verified,
    )


def _settle(g: GenerationRecord, k: int) -> None:
    if g.recovered_at is None and g.sent == g.size and g.received < k:
        g.failed = True


def _verify(records: Sequence[GenerationRecord], k: int, fraction: float, rng) -> int:
    """Decode a sample of recovered generations end to end with the real codec."""
    if fraction <= 0:
        return 0
    count = 0
    for g in records:
        if g.recovered_at is None or rng.random() >= fraction:
            continue
        params = CodeParams(k, g.size - k)
        source = [rng.bytes(16) for _ in range(k)]
        coded = encode(source, params)
        got = decode([coded[j] for j in g.received_indices[:k]], params)
        if got != source:
            raise AssertionError(f"generation {g.id} failed to decode from {g.received_indices[:k]}")
        count += 1
    return count


def estimate_p_success(cfg: SimConfig, trials: int = 1) -> tuple[float, float] | None:
    """Fraction of transmission attempts delivered intact, with binomial stderr."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    attempts = ok = 0
    for child in np.random.SeedSequence(cfg.seed).spawn(trials):
        res = simulate(replace(cfg, seed=int(child.generate_state(1, np.uint64)[0])))
        attempts += res.transmissions
        ok += res.success_slots
    if attempts == 0:
        return None
    p = ok / attempts
    return p, math.sqrt(p * (1 - p) / attempts)


def estimate_p_recover(N: int, k: int, p: float, trials: int, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo recovery score over an i.i.d. Bernoulli(p) packet channel.

    A trial scores 1 when at least k of N packets arrive, otherwise the
    number of arrived systematic packets divided by k.
    """
    if not 1 <= k <= N or not 0.0 <= p <= 1.0 or trials < 1:
        raise ValueError("need 1 <= k <= N, 0 <= p <= 1, trials >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    total = total_sq = 0.0
    done = 0
    chunk = max(1, min(trials, 2_000_000 // N))
    while done < trials:
        n = min(chunk, trials - done)
        hits = rng.random((n, N)) < p
        score = np.where(hits.sum(axis=1) >= k, 1.0, hits[:, :k].sum(axis=1) / k)
        total += float(score.sum())
        total_sq += float((score * score).sum())
        done += n
    mean = total / trials
    var = max(0.0, total_sq / trials - mean * mean)
    return mean, math.sqrt(var / trials)


def measured_delay_curve(cfg: SimConfig, loads: Sequence[float]) -> list[tuple[float, float | None]]:
    """Mean delay at each network-wide offered load (original packets per slot)."""
    if not loads:
        raise ValueError("loads must be nonempty")
    out = []
    for load in loads:
        if load < 0:
            raise ValueError(f"load must be >= 0, got {load}")
        res = simulate(replace(cfg, lambda_slot=load / (cfg.M * cfg.k)))
        out.append((load, res.mean_delay if res.recovery_rate > 0 else None))
    return out
