"""
Laser-pulse gates on the {H, V} block of a site, identity on VAC.

The Hadamard-type pulse maps H -> (H - V)/sqrt2 and V -> (H + V)/sqrt2. It is
a real rotation, not a reflection: applying it twice sends H -> -V and V -> H.
Its conjugation of the swap does give the sign flip, ``H X H^dagger = Z``.

The CNOT fires on a V control and swaps the target's H and V. Any branch with
VAC on either site passes through unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidArity, NotUnitary, SameSite
from .state import StateVector, apply_site_matrix, apply_two_site_matrix, check_site, is_unitary

_S = 1 / np.sqrt(2)

HADAMARD = np.array(
    [
        [1, 0, 0],
        [0, _S, _S],
        [0, -_S, _S],
    ],
    dtype=np.complex128,
)

X_SWAP = np.array(
    [
        [1, 0, 0],
        [0, 0, 1],
        [0, 1, 0],
    ],
    dtype=np.complex128,
)

Z_FLIP = np.diag([1, 1, -1]).astype(np.complex128)


def _cnot_matrix() -> np.ndarray:
    # index 3 * control + target
    perm = list(range(9))
    perm[3 * 2 + 1], perm[3 * 2 + 2] = 3 * 2 + 2, 3 * 2 + 1
    m = np.zeros((9, 9), dtype=np.complex128)
    for col, row in enumerate(perm):
        m[row, col] = 1.0
    return m


CNOT = _cnot_matrix()

for _name, _m in {"HADAMARD": HADAMARD, "X_SWAP": X_SWAP, "Z_FLIP": Z_FLIP, "CNOT": CNOT}.items():
    if not is_unitary(_m):
        raise NotUnitary(f"{_name} is not unitary")


class GateKind(Enum):
    PREPARE = "prepare"
    HADAMARD = "hadamard"
    X = "x"
    CNOT = "cnot"


@dataclass(frozen=True)
class GateStep:
    kind: GateKind
    sites: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        if self.kind is GateKind.CNOT:
            if len(self.sites) != 2:
                raise InvalidArity("CNOT takes (control, target)")
            if self.sites[0] == self.sites[1]:
                raise SameSite(f"CNOT control and target are both site {self.sites[0]}")
        elif self.kind is not GateKind.PREPARE and len(self.sites) != 1:
            raise InvalidArity(f"{self.kind.value} acts on exactly one site")

    def __str__(self) -> str:
        tag = {GateKind.HADAMARD: "H", GateKind.X: "X", GateKind.CNOT: "CNOT", GateKind.PREPARE: "PREP"}[self.kind]
        return f"{tag}({','.join(map(str, self.sites))})"


def hadamard(state: StateVector, site: int) -> StateVector:
    return apply_site_matrix(state, site, HADAMARD)


def x_swap(state: StateVector, site: int) -> StateVector:
    return apply_site_matrix(state, site, X_SWAP)


def z_flip(state: StateVector, site: int) -> StateVector:
    return apply_site_matrix(state, site, Z_FLIP)


def cnot(state: StateVector, control: int, target: int) -> StateVector:
    check_site(state.n_sites, control)
    check_site(state.n_sites, target)
    if control == target:
        raise SameSite(f"CNOT control and target are both site {control}")
    return apply_two_site_matrix(state, control, target, CNOT)


def apply_step(state: StateVector, step: GateStep, matrices: dict[GateKind, np.ndarray] | None = None) -> StateVector:
    """Dispatch one plan step.

    ``matrices`` overrides the single-site matrix used for HADAMARD or X; the
    override skips the unitarity check so a corrupted gate can be injected.
    """
    if step.kind is GateKind.PREPARE:
        return state
    if matrices and step.kind in matrices:
        return apply_site_matrix(state, step.sites[0], matrices[step.kind], unitary=False)
    if step.kind is GateKind.HADAMARD:
        return hadamard(state, step.sites[0])
    if step.kind is GateKind.X:
        return x_swap(state, step.sites[0])
    return cnot(state, *step.sites)
