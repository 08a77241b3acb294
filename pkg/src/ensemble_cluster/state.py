"""
Dense state vectors over N three-level sites.

Each site (one atomic ensemble) holds at most one collective excitation,
either in mode h or mode v, or none at all (VAC). The logical qubit lives in
the {H, V} block with |0> = H and |1> = V; VAC exists only so photon loss has
somewhere to go.

Basis ordering is little-endian base 3: digit k-1 of the index is the level
of site k (sites are numbered from 1). Reshaped to ``[3] * n`` in C order,
site k sits on axis ``n - k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidArity, NotUnitary, SiteOutOfRange

TOL = 1e-12


class SiteLevel(IntEnum):
    VAC = 0
    H = 1
    V = 2


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable amplitude vector of length ``3 ** n_sites``."""

    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_sites < 1:
            raise InvalidArity(f"n_sites must be >= 1, got {self.n_sites}")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != 3**self.n_sites:
            raise DimensionMismatch(
                f"expected {3 ** self.n_sites} amplitudes for {self.n_sites} sites, got {amps.size}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to ``[3] * n``; site k on axis ``n - k``."""
        return self.amplitudes.reshape([3] * self.n_sites)

    def amplitude(self, levels: Sequence[SiteLevel | int]) -> complex:
        return complex(self.amplitudes[encode_levels(levels)])

    def vac_population(self, site: int | None = None) -> float:
        """Total weight on basis states with VAC at ``site`` (any site if None)."""
        t = np.abs(self.tensor()) ** 2
        if site is not None:
            check_site(self.n_sites, site)
            return float(np.take(t, SiteLevel.VAC, axis=site_axis(self.n_sites, site)).sum())
        return float(t.reshape(-1)[vac_mask(self.n_sites)].sum())

    def __repr__(self) -> str:
        return f"StateVector(n_sites={self.n_sites}, nonzero={np.count_nonzero(np.abs(self.amplitudes) > TOL)})"


@lru_cache(maxsize=None)
def vac_mask(n_sites: int) -> np.ndarray:
    """Boolean mask of basis indices with VAC on at least one site."""
    idx = np.arange(3**n_sites)
    digits = (idx[:, None] // 3 ** np.arange(n_sites)) % 3
    mask = (digits == SiteLevel.VAC).any(axis=1)
    mask.setflags(write=False)
    return mask


def site_axis(n_sites: int, site: int) -> int:
    return n_sites - site


def check_site(n_sites: int, site: int) -> None:
    if not 1 <= site <= n_sites:
        raise SiteOutOfRange(f"site {site} outside 1..{n_sites}")


def encode_levels(levels: Sequence[SiteLevel | int]) -> int:
    if len(levels) == 0:
        raise InvalidArity("need at least one site level")
    index = 0
    for k, level in enumerate(levels):
        index += int(SiteLevel(level)) * 3**k
    return index


def decode_index(index: int, n_sites: int) -> tuple[SiteLevel, ...]:
    if not 0 <= index < 3**n_sites:
        raise DimensionMismatch(f"index {index} out of range for {n_sites} sites")
    levels = []
    for _ in range(n_sites):
        index, digit = divmod(index, 3)
        levels.append(SiteLevel(digit))
    return tuple(levels)


def basis_state(levels: Sequence[SiteLevel | int]) -> StateVector:
    amps = np.zeros(3 ** len(levels), dtype=np.complex128)
    amps[encode_levels(levels)] = 1.0
    return StateVector(len(levels), amps)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugating ``a``."""
    if a.n_sites != b.n_sites:
        raise DimensionMismatch(f"{a.n_sites} sites vs {b.n_sites} sites")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def is_unitary(m: np.ndarray, tol: float = TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.allclose(m.conj().T @ m, np.eye(m.shape[0]), rtol=0, atol=tol)


def apply_site_matrix(state: StateVector, site: int, m: np.ndarray, unitary: bool = True) -> StateVector:
    """Apply a 3x3 matrix to one site's tensor factor."""
    check_site(state.n_sites, site)
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (3, 3):
        raise DimensionMismatch(f"site matrix must be 3x3, got {m.shape}")
    if unitary and not is_unitary(m):
        raise NotUnitary("site matrix is not unitary within 1e-12")
    ax = site_axis(state.n_sites, site)
    out = np.tensordot(m, state.tensor(), axes=([1], [ax]))
    return StateVector(state.n_sites, np.moveaxis(out, 0, ax))


def apply_two_site_matrix(state: StateVector, first: int, second: int, m: np.ndarray, unitary: bool = True) -> StateVector:
    """Apply a 9x9 matrix indexed as ``3 * level(first) + level(second)``."""
    check_site(state.n_sites, first)
    check_site(state.n_sites, second)
    if first == second:
        raise InvalidArity("two-site matrix needs distinct sites")
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (9, 9):
        raise DimensionMismatch(f"two-site matrix must be 9x9, got {m.shape}")
    if unitary and not is_unitary(m):
        raise NotUnitary("two-site matrix is not unitary within 1e-12")
    axes = (site_axis(state.n_sites, first), site_axis(state.n_sites, second))
    out = np.tensordot(m.reshape(3, 3, 3, 3), state.tensor(), axes=([2, 3], list(axes)))
    return StateVector(state.n_sites, np.moveaxis(out, [0, 1], list(axes)))


_PAULI_2 = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    # H -> +1, V -> -1
    "Z": np.array([[1, 0], [0, -1]]),
}


def pauli_matrix(label: str) -> np.ndarray:
    """3x3 embedding of a Pauli operator: acts on {H, V}, identity on VAC."""
    m = np.zeros((3, 3), dtype=np.complex128)
    m[0, 0] = 1.0
    m[1:, 1:] = _PAULI_2[label]
    return m


@dataclass(frozen=True)
class PauliString:
    """Pauli labels for sites 1..n (``labels[0]`` is site 1) with a sign."""

    labels: str
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "labels", self.labels.upper())
        if not self.labels or set(self.labels) - set("IXYZ"):
            raise ValueError(f"bad Pauli labels {self.labels!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def from_sites(cls, n_sites: int, ops: dict[int, str], sign: int = 1) -> PauliString:
        labels = ["I"] * n_sites
        for site, op in ops.items():
            check_site(n_sites, site)
            labels[site - 1] = op
        return cls("".join(labels), sign)

    def __len__(self) -> int:
        return len(self.labels)

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + self.labels


def apply_pauli(state: StateVector, p: PauliString) -> StateVector:
    if len(p) != state.n_sites:
        raise DimensionMismatch(f"Pauli string of length {len(p)} on {state.n_sites} sites")
    out = state
    for k, label in enumerate(p.labels, start=1):
        if label != "I":
            out = apply_site_matrix(out, k, pauli_matrix(label), unitary=False)
    if p.sign < 0:
        out = StateVector(out.n_sites, -out.amplitudes)
    return out


def expectation(state: StateVector, p: PauliString) -> float:
    value = inner_product(state, apply_pauli(state, p))
    assert abs(value.imag) < TOL, f"non-real expectation {value}"
    return float(value.real)


def product_state(site_vectors: Iterable[np.ndarray]) -> StateVector:
    """Tensor product of per-site 3-vectors, site 1 first."""
    vecs = [np.asarray(v, dtype=np.complex128) for v in site_vectors]
    if not vecs:
        raise InvalidArity("need at least one site")
    amps = np.ones(1, dtype=np.complex128)
    for v in vecs:
        # later sites are more significant
        amps = np.kron(v, amps)
    return StateVector(len(vecs), amps)
