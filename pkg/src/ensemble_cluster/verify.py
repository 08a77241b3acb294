"""
Fidelity, bipartite entropy, projective Pauli measurements and the
Bell-extraction connectivity check.

Measurements are deterministic: ``measure_pauli`` returns both outcome
branches with their Born weights. Sampling lives in the noise module.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DimensionMismatch, InvalidPartition, TooFewSites, VacPopulated
from .protocol import run_protocol
from .state import TOL, StateVector, check_site, inner_product, pauli_matrix, site_axis

SV_CUTOFF = 1e-12


@dataclass(frozen=True)
class MeasurementRecord:
    site: int
    basis: str
    outcome: int
    probability: float


@dataclass(frozen=True)
class Branch:
    record: MeasurementRecord
    state: StateVector | None  # None when the outcome has zero probability


@dataclass(frozen=True)
class BellBranch:
    outcomes: tuple[int, ...]
    probability: float
    entropy: float


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.n_sites != b.n_sites:
        raise DimensionMismatch(f"{a.n_sites} sites vs {b.n_sites} sites")
    return float(min(1.0, abs(inner_product(a, b)) ** 2))


def schmidt_values(state: StateVector, left_sites: Iterable[int]) -> np.ndarray:
    n = state.n_sites
    left = sorted(set(left_sites))
    for s in left:
        if not 1 <= s <= n:
            raise InvalidPartition(f"site {s} outside 1..{n}")
    if not left or len(left) == n:
        raise InvalidPartition("left_sites must be a proper nonempty subset")
    right = [s for s in range(1, n + 1) if s not in left]
    axes = [site_axis(n, s) for s in left] + [site_axis(n, s) for s in right]
    mat = np.transpose(state.tensor(), axes).reshape(3 ** len(left), 3 ** len(right))
    return np.linalg.svd(mat, compute_uv=False)


def entanglement_entropy(state: StateVector, left_sites: Iterable[int]) -> float:
    """Von Neumann entropy (bits) of the reduced state on ``left_sites``."""
    sv = schmidt_values(state, left_sites)
    sv = sv[sv > SV_CUTOFF]
    p = sv**2
    p = p / p.sum()
    return float(max(0.0, -np.sum(p * np.log2(p))))


def _projector(basis: str, outcome: int) -> np.ndarray:
    proj = (pauli_matrix("I") + outcome * pauli_matrix(basis)) / 2
    # no support on VAC
    proj[0, 0] = 0.0
    return proj


def measure_pauli(state: StateVector, site: int, basis: str) -> tuple[Branch, Branch]:
    """Project ``site`` onto the +1 and -1 eigenspaces of X, Y or Z.

    Returns the (+1, -1) branches. A zero-probability branch carries no state.
    """
    basis = basis.upper()
    if basis not in ("X", "Y", "Z"):
        raise ValueError(f"measurement basis must be X, Y or Z, got {basis!r}")
    check_site(state.n_sites, site)
    vac = state.vac_population(site)
    if vac > TOL:
        raise VacPopulated(f"site {site} has VAC population {vac:.3g}")
    ax = site_axis(state.n_sites, site)
    branches = []
    for outcome in (1, -1):
        projected = np.moveaxis(np.tensordot(_projector(basis, outcome), state.tensor(), axes=([1], [ax])), 0, ax)
        prob = float(np.vdot(projected, projected).real)
        post = StateVector(state.n_sites, projected / np.sqrt(prob)) if prob > TOL else None
        branches.append(Branch(MeasurementRecord(site, basis, outcome, min(prob, 1.0)), post))
    return branches[0], branches[1]


def bell_extraction_branches(n: int, state: StateVector | None = None) -> list[BellBranch]:
    """X-measure interior sites 2..n-1 over every outcome string; report the 1|n entropy."""
    if n < 3:
        raise TooFewSites(f"Bell extraction needs interior sites, n >= 3 (got {n})")
    if state is None:
        state = run_protocol(n)
    frontier: list[tuple[tuple[int, ...], float, StateVector | None]] = [((), 1.0, state)]
    for site in range(2, n):
        nxt = []
        for outcomes, prob, psi in frontier:
            if psi is None:
                nxt.extend(((*outcomes, o), 0.0, None) for o in (1, -1))
                continue
            for br in measure_pauli(psi, site, "X"):
                nxt.append(((*outcomes, br.record.outcome), prob * br.record.probability, br.state))
        frontier = nxt
    out = []
    for outcomes, prob, psi in frontier:
        # measured sites are in product eigenstates, so the 1 | rest cut equals the 1 | n cut
        ent = entanglement_entropy(psi, [1]) if psi is not None else 0.0
        out.append(BellBranch(outcomes, prob, ent))
    return out


def bell_extraction_check(n: int, state: StateVector | None = None, tol: float = 1e-9) -> bool:
    branches = bell_extraction_branches(n, state)
    return len(branches) == 2 ** (n - 2) and all(b.probability > 0 and b.entropy >= 1 - tol for b in branches)


def _fully_product(state: StateVector) -> bool:
    return all(entanglement_entropy(state, [s]) < 1e-9 for s in range(1, state.n_sites + 1))


def _disentangles(state: StateVector, measurements: tuple[tuple[int, str], ...]) -> bool:
    frontier = [state]
    for site, basis in measurements:
        frontier = [br.state for psi in frontier for br in measure_pauli(psi, site, basis) if br.state is not None]
    return all(_fully_product(psi) for psi in frontier)


def pauli_persistency(state: StateVector, max_n: int = 4) -> int:
    """Fewest single-site Pauli measurements that leave every branch fully product.

    Brute force over site subsets and X/Y/Z bases in increasing size; a
    Pauli-restricted diagnostic only, capped at ``max_n`` sites.
    """
    n = state.n_sites
    if n > max_n:
        raise ValueError(f"persistency search is brute force; n={n} exceeds {max_n}")
    if _fully_product(state):
        return 0
    for size in range(1, n + 1):
        for sites in itertools.combinations(range(1, n + 1), size):
            for bases in itertools.product("XYZ", repeat=size):
                if _disentangles(state, tuple(zip(sites, bases))):
                    return size
    return n
