"""Exact per-slot solve of the joint power / packet-allocation problem.

Each slot asks for integers mu_k in [0, Q_k] and a transmit power P that
maximize  sum_k X_k * mu_k  -  beta_hat * P  subject to the link carrying
sum mu_k packets and P staying below the slot's cap.  Because the optimum
always transmits at the cheapest power delivering C = sum mu_k packets,
the whole problem collapses to one variable:

    maximize  M(C) = M1(C) - M2(C)   over integers 0 <= C <= min(sum Q, cap)

where M1(C) is the best weighted packet count at total capacity C (filled
greedily in descending X_k) and M2(C) = beta * (2^(eta*C) - 1) is the
weighted power cost.  M1 is piecewise linear with non-increasing slopes and
M2 is convex, so M is concave: a golden-section search over the relaxed
real C followed by comparing the two neighbouring integers is globally
optimal.  `brute_force_slot` enumerates every integer C as an independent
check of that whole chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import floor_eps, power_for_capacity

# Golden ratio phi = (sqrt(5) - 1) / 2; interior probes sit at
# a + (1-phi)*(b-a) and a + phi*(b-a).
GOLDEN_RATIO = (math.sqrt(5.0) - 1.0) / 2.0

# Brute-force enumeration refuses instances beyond this many candidates.
_BRUTE_FORCE_LIMIT = 100_000

# Tolerance for float capacities sitting exactly on the feasible boundary.
FLOAT_SLACK = 1e-9


@dataclass(frozen=True)
class SlotInstance:
    """One slot's solver input.

    `weights` are the delay-pressure virtual queues X_k, `beta` is the
    aggregated power price omega * N * sum_k Y_k, and `capacity_cap` is the
    real-valued packet cap implied by the slot's power cap.
    """

    weights: tuple[float, ...]
    backlogs: tuple[int, ...]
    beta: float
    eta: float
    noise_equiv: float
    capacity_cap: float
    tolerance: float = 1e-3

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.backlogs):
            raise ValueError("weights and backlogs must have equal length")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if any(q < 0 for q in self.backlogs):
            raise ValueError("backlogs must be non-negative")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.noise_equiv <= 0:
            raise ValueError("noise_equiv must be positive")
        if self.capacity_cap < 0:
            raise ValueError("capacity_cap must be non-negative")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")

    @property
    def total_backlog(self) -> int:
        return sum(self.backlogs)


@dataclass(frozen=True)
class SlotSolution:
    capacity: int  # C*, packets actually carried
    power: float  # P* = N * (2^(eta*C*) - 1), W
    allocation: tuple[int, ...]  # mu*, sums to C*
    objective: float  # M(C*)


def service_order(inst: SlotInstance) -> list[int]:
    """Service indices in descending weight order, ties broken by ascending index."""
    return sorted(range(len(inst.weights)), key=lambda k: (-inst.weights[k], k))


def _sorted_view(inst: SlotInstance) -> tuple[list[int], list[float], list[int]]:
    # order, weights in that order, and backlog prefix sums (prefix[i] = packets
    # claimed by the i highest-weight services).
    order = service_order(inst)
    xs = [inst.weights[k] for k in order]
    prefix = [0]
    for k in order:
        prefix.append(prefix[-1] + inst.backlogs[k])
    return order, xs, prefix


def _m1(c: float, xs: list[float], prefix: list[int]) -> float:
    total = 0.0
    for i, x in enumerate(xs):
        lo = prefix[i]
        if c <= lo:
            break
        hi = prefix[i + 1]
        if c < hi:
            total += x * (c - lo)
            break
        total += x * (hi - lo)
    return total


def greedy_allocation(capacity: int, inst: SlotInstance) -> list[int]:
    """Optimal integer split of `capacity` packets: fill services in descending X_k.

    mu for the n-th ranked service is min(max(C - backlog claimed by better
    ranks, 0), Q_n).
    """
    if capacity != int(capacity):
        raise ValueError("capacity must be an integer")
    capacity = int(capacity)
    if capacity < 0 or capacity > inst.total_backlog:
        raise ValueError(f"capacity {capacity} outside [0, {inst.total_backlog}]")
    order, _, prefix = _sorted_view(inst)
    mu = [0] * len(inst.weights)
    for i, k in enumerate(order):
        mu[k] = min(max(capacity - prefix[i], 0), inst.backlogs[k])
    return mu


def m1_value(capacity: float, inst: SlotInstance) -> float:
    """Piecewise-linear continuation of the greedy optimum to real capacity."""
    if capacity < 0 or capacity > inst.total_backlog + FLOAT_SLACK:
        raise ValueError(f"capacity {capacity} outside [0, {inst.total_backlog}]")
    _, xs, prefix = _sorted_view(inst)
    return _m1(min(capacity, float(inst.total_backlog)), xs, prefix)


def m2_value(capacity: float, inst: SlotInstance) -> float:
    """Weighted power cost beta * (2^(eta*C) - 1); convex, zero at zero."""
    if capacity < 0:
        raise ValueError("capacity must be non-negative")
    return inst.beta * (power_for_capacity(capacity, 1.0, inst.eta) if capacity > 0 else 0.0)


def objective_value(capacity: float, inst: SlotInstance) -> float:
    """M(C) = M1(C) - M2(C) on the feasible range [0, min(sum Q, capacity_cap)]."""
    hi = min(float(inst.total_backlog), inst.capacity_cap)
    if capacity < 0 or capacity > hi + FLOAT_SLACK:
        raise ValueError(f"capacity {capacity} outside [0, {hi}]")
    return m1_value(capacity, inst) - m2_value(capacity, inst)


def _search(inst: SlotInstance, xs: list[float], prefix: list[int]) -> float:
    hi = min(float(prefix[-1]), inst.capacity_cap)
    if hi <= 0.0:
        return 0.0
    beta, eta = inst.beta, inst.eta

    def m(c: float) -> float:
        return _m1(c, xs, prefix) - beta * (2.0 ** (eta * c) - 1.0)

    phi = GOLDEN_RATIO
    a, b = 0.0, hi
    c1 = a + (1.0 - phi) * (b - a)
    c2 = a + phi * (b - a)
    f1, f2 = m(c1), m(c2)
    tol = inst.tolerance
    while b - a > tol:
        if f1 >= f2:
            b, c2, f2 = c2, c1, f1
            c1 = a + (1.0 - phi) * (b - a)
            f1 = m(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + phi * (b - a)
            f2 = m(c2)
    return 0.5 * (a + b)


def _round(relaxed: float, inst: SlotInstance, xs: list[float], prefix: list[int]) -> int:
    hi = min(prefix[-1], floor_eps(inst.capacity_cap))
    if hi <= 0:
        return 0
    beta, eta = inst.beta, inst.eta
    lo_c = min(max(math.floor(relaxed), 0), hi)
    hi_c = min(max(math.ceil(relaxed), 0), hi)
    if lo_c == hi_c:
        return lo_c
    m_lo = _m1(float(lo_c), xs, prefix) - beta * (2.0 ** (eta * lo_c) - 1.0)
    m_hi = _m1(float(hi_c), xs, prefix) - beta * (2.0 ** (eta * hi_c) - 1.0)
    return lo_c if m_lo >= m_hi else hi_c


def golden_section_search(inst: SlotInstance) -> float:
    """Maximize the relaxed M(C) over [0, min(sum Q, capacity_cap)].

    Concavity of M makes the bracket update safe; the loop runs until the
    bracket is narrower than `tolerance` and returns its midpoint.
    """
    _, xs, prefix = _sorted_view(inst)
    return _search(inst, xs, prefix)


def integer_round(relaxed: float, inst: SlotInstance) -> int:
    """Best feasible integer neighbour of the relaxed maximizer, ties to smaller C."""
    _, xs, prefix = _sorted_view(inst)
    return _round(relaxed, inst, xs, prefix)


def solve_slot(inst: SlotInstance) -> SlotSolution:
    """Full slot solve: search, round, then price and split the winning capacity."""
    order, xs, prefix = _sorted_view(inst)
    c_star = _round(_search(inst, xs, prefix), inst, xs, prefix)
    return _solution_at(c_star, inst, order, xs, prefix)


def brute_force_slot(inst: SlotInstance) -> SlotSolution:
    """Independent oracle: enumerate every feasible integer capacity.

    Shares only the greedy M1 evaluation with `solve_slot`; no search, no
    rounding argument, no concavity assumption.
    """
    order, xs, prefix = _sorted_view(inst)
    hi = min(prefix[-1], floor_eps(inst.capacity_cap))
    if hi > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"instance too large for enumeration ({hi} candidates)")
    beta, eta = inst.beta, inst.eta
    best_c, best_val = 0, 0.0
    for c in range(1, hi + 1):
        val = _m1(float(c), xs, prefix) - beta * (2.0 ** (eta * c) - 1.0)
        if val > best_val:
            best_c, best_val = c, val
    return _solution_at(best_c, inst, order, xs, prefix)


def _solution_at(capacity: int, inst: SlotInstance, order: list[int], xs: list[float], prefix: list[int]) -> SlotSolution:
    mu = [0] * len(inst.weights)
    for i, k in enumerate(order):
        mu[k] = min(max(capacity - prefix[i], 0), inst.backlogs[k])
    power = power_for_capacity(float(capacity), inst.noise_equiv, inst.eta)
    objective = _m1(float(capacity), xs, prefix) - inst.beta * (2.0 ** (inst.eta * capacity) - 1.0)
    return SlotSolution(capacity=capacity, power=power, allocation=tuple(mu), objective=objective)
