"""
Linear cluster-state construction from pairwise pulse blocks.

All N sites start with a v excitation. The first block on sites (1, 2) is the
bipartite recipe: Hadamard pulse on 1, CNOT 1 -> 2, swap on 1, Hadamard pulse
on 2. That leaves site 2 in the chain-end form (h + v)/sqrt2 rather than in v,
so the same four pulses cannot simply be replayed on (2, 3): doing so yields a
GHZ-like state with zero overlap with the cluster. From block 2 onwards the
first pulse is a swap instead of a Hadamard, which conditions the CNOT on H
and attaches site k+1 with the sign rule of the closed form. ``literal_plan``
keeps the naive replay for comparison.

The closed form, built without gates: the amplitude of a basis string
s_1..s_N over {H, V} is 2^(-N/2) times -1 for every adjacent pair with
s_i = H and s_{i+1} = V.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import TooFewSites
from .gates import GateKind, GateStep, apply_step
from .state import PauliString, SiteLevel, StateVector, basis_state, encode_levels, expectation


@dataclass(frozen=True)
class ProtocolPlan:
    n_sites: int
    steps: tuple[GateStep, ...]

    def blocks(self) -> list[tuple[GateStep, ...]]:
        """Pair-blocks in execution order (the PREPARE step excluded)."""
        gates = [s for s in self.steps if s.kind is not GateKind.PREPARE]
        return [tuple(gates[i : i + 4]) for i in range(0, len(gates), 4)]

    def __len__(self) -> int:
        return len(self.steps)


def _require_chain(n: int) -> None:
    if n < 2:
        raise TooFewSites(f"a cluster chain needs n >= 2 sites, got {n}")


def _prepare(n: int) -> GateStep:
    return GateStep(GateKind.PREPARE, tuple(range(1, n + 1)))


def first_block() -> tuple[GateStep, ...]:
    return (
        GateStep(GateKind.HADAMARD, (1,)),
        GateStep(GateKind.CNOT, (1, 2)),
        GateStep(GateKind.X, (1,)),
        GateStep(GateKind.HADAMARD, (2,)),
    )


def extension_block(k: int) -> tuple[GateStep, ...]:
    """Attach site k+1 to a chain ending at site k (k >= 2)."""
    return (
        GateStep(GateKind.X, (k,)),
        GateStep(GateKind.CNOT, (k, k + 1)),
        GateStep(GateKind.X, (k,)),
        GateStep(GateKind.HADAMARD, (k + 1,)),
    )


def build_plan(n: int) -> ProtocolPlan:
    _require_chain(n)
    steps = [_prepare(n), *first_block()]
    for k in range(2, n):
        steps.extend(extension_block(k))
    return ProtocolPlan(n, tuple(steps))


def literal_plan(n: int) -> ProtocolPlan:
    """Replay the bipartite block unchanged on every pair (not a cluster for n >= 3)."""
    _require_chain(n)
    steps = [_prepare(n)]
    for k in range(1, n):
        steps.extend(
            (
                GateStep(GateKind.HADAMARD, (k,)),
                GateStep(GateKind.CNOT, (k, k + 1)),
                GateStep(GateKind.X, (k,)),
                GateStep(GateKind.HADAMARD, (k + 1,)),
            )
        )
    return ProtocolPlan(n, tuple(steps))


def initial_state(n: int) -> StateVector:
    return basis_state([SiteLevel.V] * n)


def execute_plan(plan: ProtocolPlan, matrices=None) -> StateVector:
    state = initial_state(plan.n_sites)
    for step in plan.steps:
        state = apply_step(state, step, matrices)
    return state


def run_protocol(n: int, matrices=None) -> StateVector:
    """Run the gate pipeline from v...v; ``matrices`` is a gate-override hook for tests."""
    state = execute_plan(build_plan(n), matrices)
    if matrices is None:
        assert state.vac_population() == 0.0, "ideal pipeline populated VAC"
    return state


def reference_cluster(n: int) -> StateVector:
    _require_chain(n)
    amps = np.zeros(3**n, dtype=np.complex128)
    scale = 2.0 ** (-n / 2)
    for levels in itertools.product((SiteLevel.H, SiteLevel.V), repeat=n):
        sign = 1
        for left, right in zip(levels, levels[1:]):
            if left is SiteLevel.H and right is SiteLevel.V:
                sign = -sign
        amps[encode_levels(levels)] = sign * scale
    return StateVector(n, amps)


def stabilizer_generator(n: int, site: int) -> PauliString:
    """Unsigned Z_{a-1} X_a Z_{a+1}, with factors beyond the chain ends dropped."""
    ops = {site: "X"}
    if site > 1:
        ops[site - 1] = "Z"
    if site < n:
        ops[site + 1] = "Z"
    return PauliString.from_sites(n, ops)


def stabilizer_expectations(state: StateVector) -> list[float]:
    return [expectation(state, stabilizer_generator(state.n_sites, a)) for a in range(1, state.n_sites + 1)]


def stabilizer_signs(n: int) -> tuple[int, ...]:
    """Sign of each generator on the closed-form cluster: -1 at every site that has a left neighbour."""
    _require_chain(n)
    return tuple(1 if a == 1 else -1 for a in range(1, n + 1))
