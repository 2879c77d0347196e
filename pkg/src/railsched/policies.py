"""The five per-slot control policies.

Two static baselines fix the transmit power in advance (constant power, and
water-filling against the known noise trajectory) and only pick which
packets ride the resulting capacity.  Their dynamic counterparts feed the
same precomputed power as a per-slot cap into the drift solver, and the
proposed policy runs the solver against the full instantaneous power cap.
All five split packets among services with the same descending-X greedy
rule, so the policies differ only in power control.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import ChannelSample, RadioParams, floor_eps, link_capacity
from .queues import SystemState
from .solver import SlotInstance, greedy_allocation, solve_slot

# Static power profiles must land their time average on the budget this tightly.
_WFPA_BUDGET_RTOL = 1e-8

# Slack for float round-off when comparing solver power against the cap.
_POWER_CAP_RTOL = 1e-9


class PolicyKind(enum.Enum):
    PROPOSED = "proposed"
    STATIC_CPA = "cpa-static"
    STATIC_WFPA = "wfpa-static"
    DYNAMIC_CPA = "cpa-dynamic"
    DYNAMIC_WFPA = "wfpa-dynamic"

    @property
    def is_static(self) -> bool:
        return self in (PolicyKind.STATIC_CPA, PolicyKind.STATIC_WFPA)

    @property
    def uses_water_filling(self) -> bool:
        return self in (PolicyKind.STATIC_WFPA, PolicyKind.DYNAMIC_WFPA)


POLICY_NAMES = {kind.value: kind for kind in PolicyKind}


@dataclass(frozen=True)
class ControlAction:
    """One slot's decision: transmit power, per-service packets, link capacity.

    `capacity` is the packet count the link carries at `power`; the solver
    policies always fill it exactly, the static ones may leave it partly
    unused when the backlog runs out.
    """

    power: float
    allocation: list[int]
    capacity: int

    @property
    def served(self) -> int:
        return sum(self.allocation)


@dataclass(frozen=True)
class Policy:
    """A policy kind plus, for the CPA/WFPA variants, its precomputed power profile."""

    kind: PolicyKind
    static_profile: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.kind is PolicyKind.PROPOSED:
            if self.static_profile is not None:
                raise ValueError("the proposed policy takes no static profile")
        else:
            if self.static_profile is None:
                raise ValueError(f"{self.kind.value} requires a static power profile")
            if np.any(np.asarray(self.static_profile) < 0):
                raise ValueError("static profile powers must be non-negative")


def cpa_profile(avg_power: float, num_slots: int) -> np.ndarray:
    """Constant power at the average-power budget, every slot."""
    if avg_power <= 0:
        raise ValueError("avg_power must be positive")
    return np.full(num_slots, float(avg_power))


def wfpa_profile(noise_trajectory: np.ndarray, avg_power: float) -> np.ndarray:
    """Water-filling power over the whole trip: P(t) = max(level - N(t), 0).

    The level is found by bisection on [min N, max N + budget] until the
    profile's time average matches `avg_power`; this maximizes total
    throughput sum_t log2(1 + P(t)/N(t)) under the average-power budget.
    """
    if avg_power <= 0:
        raise ValueError("avg_power must be positive")
    noise = np.asarray(noise_trajectory, dtype=np.float64)
    if noise.size == 0:
        return np.zeros(0)
    if np.any(noise <= 0):
        raise ValueError("noise trajectory must be positive")
    lo = float(noise.min())
    hi = float(noise.max()) + avg_power
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(mid - noise, 0.0).mean() < avg_power:
            lo = mid
        else:
            hi = mid
    level = 0.5 * (lo + hi)
    profile = np.maximum(level - noise, 0.0)
    rel_err = abs(profile.mean() - avg_power) / avg_power
    if rel_err > _WFPA_BUDGET_RTOL:
        raise RuntimeError(f"water-filling bisection left budget error {rel_err:.3e}")
    return profile


def build_policy(kind: PolicyKind | str, avg_power: float, max_power: float, noise_trajectory: np.ndarray) -> Policy:
    """Construct a policy, precomputing and validating the static profile if any."""
    if isinstance(kind, str):
        try:
            kind = POLICY_NAMES[kind]
        except KeyError:
            raise ValueError(f"unknown policy {kind!r}; expected one of {sorted(POLICY_NAMES)}") from None
    if kind is PolicyKind.PROPOSED:
        return Policy(kind)
    if kind.uses_water_filling:
        profile = wfpa_profile(noise_trajectory, avg_power)
    else:
        profile = cpa_profile(avg_power, len(noise_trajectory))
    if profile.size and profile.max() > max_power * (1.0 + _POWER_CAP_RTOL):
        raise ValueError(f"static profile peaks at {profile.max():.6g} W, above the {max_power} W cap")
    return Policy(kind, profile)


def decide(
    policy: Policy,
    state: SystemState,
    channel: ChannelSample,
    radio: RadioParams,
    omega: float,
    epsilon: float,
) -> ControlAction:
    """Choose the slot's action from the observed queue and channel state."""
    if policy.kind is PolicyKind.PROPOSED:
        return _solve_action(state, channel.noise_equiv, channel.capacity_cap, radio.max_power, radio.eta, omega, epsilon)

    cap_power = float(policy.static_profile[channel.slot])

    if policy.kind.is_static:
        capacity = link_capacity(cap_power, channel.noise_equiv, radio.eta)
        served = min(capacity, sum(state.queues))
        inst = _instance(state, channel.noise_equiv, float(capacity), 0.0, radio.eta, epsilon)
        return ControlAction(power=cap_power, allocation=greedy_allocation(served, inst), capacity=capacity)

    # Dynamic CPA/WFPA: the precomputed power acts as this slot's cap.
    if cap_power <= 0.0:
        return ControlAction(power=0.0, allocation=[0] * len(state.queues), capacity=0)
    cap_capacity = np.log2(1.0 + cap_power / channel.noise_equiv) / radio.eta
    if floor_eps(cap_capacity) <= 0:
        return ControlAction(power=0.0, allocation=[0] * len(state.queues), capacity=0)
    return _solve_action(state, channel.noise_equiv, float(cap_capacity), cap_power, radio.eta, omega, epsilon)


def _instance(state: SystemState, noise: float, cap_capacity: float, beta: float, eta: float, epsilon: float) -> SlotInstance:
    return SlotInstance(
        weights=tuple(state.virtual_delay),
        backlogs=tuple(state.queues),
        beta=beta,
        eta=eta,
        noise_equiv=noise,
        capacity_cap=cap_capacity,
        tolerance=epsilon,
    )


def _solve_action(
    state: SystemState,
    noise: float,
    cap_capacity: float,
    cap_power: float,
    eta: float,
    omega: float,
    epsilon: float,
) -> ControlAction:
    beta = omega * noise * sum(state.virtual_power)
    solution = solve_slot(_instance(state, noise, cap_capacity, beta, eta, epsilon))
    power = solution.power
    if power > cap_power:
        if power > cap_power * (1.0 + _POWER_CAP_RTOL):
            raise RuntimeError(f"solver power {power} exceeds the {cap_power} W cap")
        power = cap_power
    return ControlAction(power=power, allocation=list(solution.allocation), capacity=solution.capacity)
