"""
Monte Carlo trajectories for the chain protocol under three error sources:

* erasure: after the protocol finishes, each site independently loses its
  excitation with probability ``p_erase`` (the site ends in VAC);
* dephasing: after every pair-block, each of the two touched sites gets a
  Z kick with probability ``p_dephase``;
* heralded CNOT failure: each CNOT attempt succeeds with probability
  ``p_cnot``. RETRY_GATE repeats that gate on an undisturbed register;
  RESTART_ALL throws the register away and replays the plan from v...v.

Random streams. Trial ``t`` of an experiment seeded with ``seed`` draws from
``Generator(PCG64(SeedSequence(seed, spawn_key=(t,))))``; this is the same
stream ``SeedSequence(seed).spawn(...)[t]`` would give, so it depends only on
(seed, t). Draw order inside a trajectory: one uniform per CNOT attempt, two
per completed block (left site, then right), then one per site for erasure,
site 1 first. Kick draws of an aborted RESTART_ALL pass are consumed and
discarded along with the register.
"""
from __future__ import annotations

import math
from functools import lru_cache
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .errors import TooFewSites
from .gates import GateKind, apply_step, z_flip
from .protocol import build_plan, initial_state, reference_cluster, stabilizer_expectations
from .state import SiteLevel, StateVector, check_site, site_axis
from .verify import fidelity


class Policy(Enum):
    RETRY_GATE = "retry_gate"
    RESTART_ALL = "restart_all"

    @classmethod
    def parse(cls, value: str | Policy) -> Policy:
        if isinstance(value, Policy):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown policy {value!r}; expected retry_gate or restart_all") from None


@dataclass(frozen=True)
class NoiseParams:
    p_erase: float = 0.0
    p_dephase: float = 0.0
    p_cnot: float = 1.0
    policy: Policy = Policy.RETRY_GATE

    def __post_init__(self):
        object.__setattr__(self, "policy", Policy.parse(self.policy))
        for name in ("p_erase", "p_dephase"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not 0.0 < self.p_cnot <= 1.0:
            raise ValueError(f"p_cnot must lie in (0, 1], got {self.p_cnot}")


@dataclass(frozen=True)
class TrajectoryEvents:
    """Everything random about one trajectory."""

    attempts: int
    passes: int
    kicks: tuple[tuple[int, ...], ...]  # per block, sites that were Z-kicked
    erased: tuple[int, ...]


@dataclass(frozen=True)
class TrialReport:
    n_sites: int
    trials: int
    mean_fidelity: float
    stderr_fidelity: float
    mean_attempts: float
    stderr_attempts: float
    mean_restarts: float
    stderr_restarts: float
    stabilizer_means: tuple[float, ...]
    seed: int
    params: NoiseParams = field(default_factory=NoiseParams)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["params"]["policy"] = self.params.policy.value
        d["stabilizer_means"] = list(self.stabilizer_means)
        return d


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def erase_channel(state: StateVector, site: int, lost: bool) -> StateVector:
    """Project ``site`` onto VAC when ``lost``.

    If the site carries no VAC weight the excitation itself is removed: the
    site is set to VAC and the rest of the register keeps the conditional
    state of whichever of the H or V branches has the larger weight (H on a
    tie), i.e. the most likely which-mode record of the lost photon.
    """
    check_site(state.n_sites, site)
    if not lost:
        return state
    ax = site_axis(state.n_sites, site)
    t = np.moveaxis(state.tensor(), ax, 0)
    out = np.zeros_like(t)
    vac = t[SiteLevel.VAC]
    if np.vdot(vac, vac).real > 0:
        out[SiteLevel.VAC] = vac
    else:
        h, v = t[SiteLevel.H], t[SiteLevel.V]
        out[SiteLevel.VAC] = h if np.vdot(h, h).real >= np.vdot(v, v).real else v
    out /= np.sqrt(np.vdot(out, out).real)
    return StateVector(state.n_sites, np.moveaxis(out, 0, ax))


@lru_cache(maxsize=None)
def _block_layout(n: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """(CNOT count, touched sites) per pair-block."""
    layout = []
    for block in build_plan(n).blocks():
        n_cnots = sum(step.kind is GateKind.CNOT for step in block)
        sites = tuple(sorted({s for step in block for s in step.sites}))
        layout.append((n_cnots, sites))
    return tuple(layout)


def sample_events(n: int, params: NoiseParams, rng: np.random.Generator) -> TrajectoryEvents:
    if n < 2:
        raise TooFewSites(f"need n >= 2, got {n}")
    layout = _block_layout(n)
    attempts = 0
    passes = 0
    while True:
        passes += 1
        kicks = []
        aborted = False
        for n_cnots, sites in layout:
            for _ in range(n_cnots):
                while True:
                    attempts += 1
                    if rng.random() < params.p_cnot:
                        break
                    if params.policy is Policy.RESTART_ALL:
                        aborted = True
                        break
                if aborted:
                    break
            if aborted:
                break
            kicks.append(tuple(s for s in sites if rng.random() < params.p_dephase))
        if not aborted:
            break
    erased = tuple(s for s in range(1, n + 1) if rng.random() < params.p_erase)
    return TrajectoryEvents(attempts, passes, tuple(kicks), erased)


def realize(n: int, events: TrajectoryEvents) -> StateVector:
    """Final register state for a given event record."""
    state = initial_state(n)
    for block, kicked in zip(build_plan(n).blocks(), events.kicks):
        for step in block:
            state = apply_step(state, step)
        for s in kicked:
            state = z_flip(state, s)
    for s in events.erased:
        state = erase_channel(state, s, True)
    return state


def run_trajectory(n: int, params: NoiseParams, rng: np.random.Generator) -> tuple[StateVector, int]:
    events = sample_events(n, params, rng)
    return realize(n, events), events.attempts


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    if np.all(values == values[0]):
        return float(values[0]), 0.0
    mean = math.fsum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(len(values)))


def run_experiment(
    n: int,
    params: NoiseParams,
    trials: int,
    seed: int,
    workers: int = 1,
) -> TrialReport:
    """Average fidelity to the ideal cluster and CNOT attempts over ``trials`` trajectories.

    Each distinct event record is simulated once and cached; results are
    aggregated in trial order so ``workers`` never changes the report.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n < 2:
        raise TooFewSites(f"need n >= 2, got {n}")

    def draw(chunk: range) -> list[TrajectoryEvents]:
        return [sample_events(n, params, trial_rng(seed, t)) for t in chunk]

    if workers > 1:
        size = math.ceil(trials / workers)
        chunks = [range(i, min(i + size, trials)) for i in range(0, trials, size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            events = [e for part in pool.map(draw, chunks) for e in part]
    else:
        events = draw(range(trials))

    ref = reference_cluster(n)
    cache: dict[tuple, tuple[float, list[float]]] = {}
    fids = np.empty(trials)
    attempts = np.empty(trials)
    restarts = np.empty(trials)
    stab = np.zeros((trials, n))
    for i, ev in enumerate(events):
        key = (ev.kicks, ev.erased)
        if key not in cache:
            final = realize(n, ev)
            stabs = stabilizer_expectations(final)
            cache[key] = (fidelity(ref, final), stabs)
        fids[i], stab[i] = cache[key]
        attempts[i] = ev.attempts
        restarts[i] = ev.passes - 1

    mf, sf = _mean_stderr(fids)
    ma, sa = _mean_stderr(attempts)
    mr, sr = _mean_stderr(restarts)
    stab_means = tuple(math.fsum(stab[:, k]) / trials for k in range(n))
    return TrialReport(n, trials, mf, sf, ma, sa, mr, sr, stab_means, seed, params)
