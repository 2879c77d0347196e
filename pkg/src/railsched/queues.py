"""Poisson packet arrivals, real per-service queues, and the two virtual queues.

The real queue of service k evolves as

    Q_k(t+1) = min(Q_k(t) - mu_k(t) + A_k(t), buffer_cap)

and two virtual accumulators turn the long-run constraints into queue
stability: X_k gains the fresh backlog Q_k(t+1) each slot and drains by the
delay budget W_k * lambda_k, Y_k gains the spent power and drains by the
average-power budget.  Keeping X and Y from growing linearly is exactly what
keeps average delay below W_k and average power below the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Rates above this are split into equal chunks and the chunk draws summed
# (Poisson additivity), keeping the sequential CDF search short and exact.
_CHUNK_RATE = 30.0

# CDF tables are extended until this much mass is covered; draws landing in
# the remaining tail fall back to continuing the term recurrence directly.
_CDF_TAIL = 1e-16


@dataclass(frozen=True)
class TrafficParams:
    """Arrival and constraint constants for the K services."""

    arrival_rates: tuple[float, ...]  # lambda_k, packets/slot
    delay_bounds: tuple[float, ...]  # W_k, slots of allowed average delay
    avg_power: float  # average-power budget, W
    buffer_cap: int = 1_000_000  # per-service backlog cap, packets

    def __post_init__(self) -> None:
        if len(self.arrival_rates) < 1:
            raise ValueError("TrafficParams needs at least one service")
        if len(self.delay_bounds) != len(self.arrival_rates):
            raise ValueError("arrival_rates and delay_bounds must have equal length")
        # Zero rates are allowed so degenerate no-traffic runs stay testable.
        if any(rate < 0 for rate in self.arrival_rates):
            raise ValueError("arrival rates must be non-negative")
        if any(bound <= 0 for bound in self.delay_bounds):
            raise ValueError("delay bounds must be positive")
        if self.avg_power <= 0:
            raise ValueError("avg_power must be positive")
        if self.buffer_cap <= 0:
            raise ValueError("buffer_cap must be positive")

    @property
    def num_services(self) -> int:
        return len(self.arrival_rates)


@dataclass
class SystemState:
    """Mutable per-slot state: real queues Q, virtual queues X and Y.

    Y is kept as one value per service even though the recursions are
    identical for every k; the simulation engine asserts the components
    stay equal.
    """

    queues: list[int]
    virtual_delay: list[float]
    virtual_power: list[float]
    slot: int = 0

    @classmethod
    def initial(cls, num_services: int) -> "SystemState":
        return cls(
            queues=[0] * num_services,
            virtual_delay=[0.0] * num_services,
            virtual_power=[0.0] * num_services,
            slot=0,
        )


@dataclass
class ArrivalBatch:
    """One slot of arrivals; `dropped` is filled in by the queue update."""

    counts: list[int]
    dropped: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.dropped:
            self.dropped = [0] * len(self.counts)


def _cdf_table(rate: float) -> list[float]:
    """Poisson CDF values F(0), F(1), ... built with the plain term recurrence."""
    term = math.exp(-rate)
    total = term
    table = [total]
    k = 0
    while total < 1.0 - _CDF_TAIL:
        k += 1
        term *= rate / k
        total += term
        table.append(total)
        if term == 0.0:
            break
    return table


class ArrivalProcess:
    """Seeded Poisson arrival streams, one independent substream per service.

    Draws use CDF inversion by sequential search (one uniform per draw), so
    sequences are bit-identical across platforms and identical whether sampled
    slot by slot or pre-generated for a whole horizon.
    """

    def __init__(self, rates: tuple[float, ...], master_seed: int):
        self.rates = tuple(float(r) for r in rates)
        self.master_seed = int(master_seed)
        self._streams = [
            np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=self.master_seed, spawn_key=(k,))))
            for k in range(len(self.rates))
        ]
        self._chunks: list[tuple[int, float, list[float]]] = []
        for rate in self.rates:
            if rate == 0.0:
                self._chunks.append((0, 0.0, []))
                continue
            n_chunks = max(1, math.ceil(rate / _CHUNK_RATE))
            chunk_rate = rate / n_chunks
            self._chunks.append((n_chunks, chunk_rate, _cdf_table(chunk_rate)))

    def _invert(self, u: float, chunk_rate: float, table: list[float]) -> int:
        # Sequential search: smallest k with u <= F(k).  Draws beyond the
        # table continue the term recurrence directly.
        for k, total in enumerate(table):
            if u <= total:
                return k
        k = len(table) - 1
        term = table[-1] - (table[-2] if len(table) > 1 else 0.0)
        total = table[-1]
        while u > total:
            k += 1
            term *= chunk_rate / k
            total += term
        return k

    def sample(self) -> ArrivalBatch:
        """Draw one slot of arrivals, consuming one uniform per chunk per service."""
        counts = []
        for (n_chunks, chunk_rate, table), stream in zip(self._chunks, self._streams):
            c = 0
            for _ in range(n_chunks):
                c += self._invert(stream.random(), chunk_rate, table)
            counts.append(c)
        return ArrivalBatch(counts=counts)

    def sample_horizon(self, num_slots: int) -> np.ndarray:
        """Arrival counts for slots 0..num_slots-1, shape (num_slots, K).

        Produces exactly the sequence `sample` would, but inverts whole
        uniform blocks at once.
        """
        out = np.zeros((num_slots, len(self.rates)), dtype=np.int64)
        for k, ((n_chunks, chunk_rate, table), stream) in enumerate(zip(self._chunks, self._streams)):
            if n_chunks == 0:
                continue
            u = stream.random(num_slots * n_chunks)
            cdf = np.asarray(table)
            idx = np.searchsorted(cdf, u, side="left")
            overflow = np.flatnonzero(idx == len(table))
            for j in overflow:
                idx[j] = self._invert(u[j], chunk_rate, table)
            out[:, k] = idx.reshape(num_slots, n_chunks).sum(axis=1)
        return out


def update_real_queue(state: SystemState, allocation: list[int], batch: ArrivalBatch, params: TrafficParams) -> SystemState:
    """Apply one slot of service and arrivals to the real queues.

    Overflow beyond `buffer_cap` is counted into `batch.dropped`, never
    silently discarded.  Serving more than the current backlog is a caller
    bug and raises.
    """
    cap = params.buffer_cap
    for k, (q, mu) in enumerate(zip(state.queues, allocation)):
        if mu < 0 or mu > q:
            raise ValueError(f"allocation[{k}]={mu} outside [0, Q_{k}={q}]")
    for k, (q, mu, a) in enumerate(zip(state.queues, allocation, batch.counts)):
        nxt = q - mu + a
        if nxt > cap:
            batch.dropped[k] = nxt - cap
            nxt = cap
        else:
            batch.dropped[k] = 0
        state.queues[k] = nxt
    return state


def update_virtual_delay(state: SystemState, params: TrafficParams) -> SystemState:
    """X_k <- max(X_k - W_k * lambda_k, 0) + Q_k, with Q_k already advanced."""
    for k in range(params.num_services):
        drain = params.delay_bounds[k] * params.arrival_rates[k]
        state.virtual_delay[k] = max(state.virtual_delay[k] - drain, 0.0) + state.queues[k]
    return state


def update_virtual_power(state: SystemState, power: float, params: TrafficParams) -> SystemState:
    """Y_k <- max(Y_k - avg_power, 0) + power, identically for every k."""
    if power < 0:
        raise ValueError("power must be non-negative")
    for k in range(params.num_services):
        state.virtual_power[k] = max(state.virtual_power[k] - params.avg_power, 0.0) + power
    return state


def lyapunov_value(state: SystemState, omega: float) -> float:
    """Quadratic queue energy 0.5 * (sum X_k^2 + omega * sum Y_k^2)."""
    if omega < 0:
        raise ValueError("omega must be non-negative")
    sx = sum(x * x for x in state.virtual_delay)
    sy = sum(y * y for y in state.virtual_power)
    return 0.5 * (sx + omega * sy)


def drift_constant(params: TrafficParams, max_power: float, omega: float) -> float:
    """Finite constant bounding the state-independent part of the one-slot drift.

    Diagnostic only; no control decision depends on it.
    """
    total = 0.0
    for k in range(params.num_services):
        lam_w = params.arrival_rates[k] * params.delay_bounds[k]
        total += params.buffer_cap**2 + lam_w**2 + omega * (max_power**2 + params.avg_power**2)
    return total


def penalty_value(
    state: SystemState,
    allocation: list[int],
    batch: ArrivalBatch,
    power: float,
    params: TrafficParams,
    omega: float,
) -> float:
    """Action-dependent part of the drift bound, evaluated at the pre-update state.

    Diagnostic: the per-slot solver maximizes the equivalent isolated form
    sum_k (X_k * mu_k - omega * Y_k * P).
    """
    total = 0.0
    for k in range(params.num_services):
        lam_w = params.arrival_rates[k] * params.delay_bounds[k]
        total += state.virtual_delay[k] * (state.queues[k] - allocation[k] + batch.counts[k] - lam_w)
        total += omega * state.virtual_power[k] * (power - params.avg_power)
    return total
