"""
Command-line front end.

    cluster-sim --mode verify --n 4
    cluster-sim --mode sweep --n 3 --p-erase 0,0.1,0.2 --trials 50000 --seed 7 --out sweep.csv

Exit codes: 0 success, 1 verification failure, 2 config error, 3 internal
error, 4 I/O error.

A ``--config`` file holds ``key = value`` lines using the flag names without
the leading dashes (``p-erase = 0,0.05``); ``#`` starts a comment. Flags
override the file. The seed falls back to ``CLUSTER_SIM_SEED`` when neither
sets it.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ClusterSimError
from .noise import NoiseParams, Policy, TrialReport, run_experiment
from .protocol import reference_cluster, run_protocol, stabilizer_expectations, stabilizer_signs
from .state import vac_mask
from .verify import bell_extraction_branches

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3
EXIT_IO = 4

SWEEP_HEADER = "n,p_erase,p_dephase,p_cnot,policy,trials,seed,mean_fidelity,stderr_fidelity,mean_attempts"
VERIFY_HEADER = "check,detail,deviation,status"
TOL = 1e-12

DEFAULTS = {
    "mode": "verify",
    "p-erase": "0",
    "p-dephase": "0",
    "p-cnot": "1",
    "policy": "retry_gate",
    "trials": "10000",
    "seed": "42",
    "format": "csv",
    "workers": "1",
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass
class RunConfig:
    mode: str
    n_sites: int
    p_erase: list[float] = field(default_factory=lambda: [0.0])
    p_dephase: list[float] = field(default_factory=lambda: [0.0])
    p_cnot: list[float] = field(default_factory=lambda: [1.0])
    policy: Policy = Policy.RETRY_GATE
    trials: int = 10000
    seed: int = 42
    out: str | None = None
    format: str = "csv"
    svg: str | None = None
    workers: int = 1

    def grid(self) -> list[tuple[float, float, float]]:
        # p_erase outermost, p_cnot innermost
        return list(itertools.product(self.p_erase, self.p_dephase, self.p_cnot))


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def _parser() -> _Parser:
    p = _Parser(prog="cluster-sim", description="Atomic-ensemble cluster-state simulator")
    p.add_argument("--mode", choices=["verify", "sweep"])
    p.add_argument("--n", dest="n")
    p.add_argument("--p-erase", dest="p-erase")
    p.add_argument("--p-dephase", dest="p-dephase")
    p.add_argument("--p-cnot", dest="p-cnot")
    p.add_argument("--policy")
    p.add_argument("--trials")
    p.add_argument("--seed")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--svg")
    p.add_argument("--workers")
    p.add_argument("--config")
    return p


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    known = {a.dest for a in _parser()._actions} - {"help", "config"}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config: line {lineno} is not key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key not in known:
            raise ConfigError(f"config: unknown key {key!r} on line {lineno}")
        values[key] = value
    return values


def _floats(name: str, text: str, lo: float, hi: float, lo_open: bool = False) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"{name}: not a comma-separated list of numbers: {text!r}") from None
    if not vals:
        raise ConfigError(f"{name}: grid list is empty")
    for v in vals:
        if not (lo < v if lo_open else lo <= v) or v > hi or math.isnan(v):
            interval = f"{'(' if lo_open else '['}{lo:g}, {hi:g}]"
            raise ConfigError(f"{name}: probability {v:g} outside {interval}")
    return vals


def _int(name: str, text: str, minimum: int | None = None) -> int:
    try:
        v = int(text)
    except ValueError:
        raise ConfigError(f"{name}: expected an integer, got {text!r}") from None
    if minimum is not None and v < minimum:
        raise ConfigError(f"{name}: must be >= {minimum} (got {v})")
    return v


def parse_config(argv: Sequence[str] | None = None, env: dict[str, str] | None = None) -> RunConfig:
    env = os.environ if env is None else env
    args = vars(_parser().parse_args(argv))
    merged = dict(DEFAULTS)
    if "CLUSTER_SIM_SEED" in env:
        merged["seed"] = env["CLUSTER_SIM_SEED"]
    config_path = args.pop("config")
    if config_path:
        merged.update(read_config_file(config_path))
    return _build(merged, args)


def _build(merged: dict[str, str], args: dict[str, str | None]) -> RunConfig:
    merged.update({k: v for k, v in args.items() if v is not None})
    if "n" not in merged:
        raise ConfigError("n_sites: --n is required")
    mode = merged["mode"].lower()
    if mode not in ("verify", "sweep"):
        raise ConfigError(f"mode: expected verify or sweep, got {mode!r}")
    fmt_ = merged["format"].lower()
    if fmt_ not in ("csv", "json"):
        raise ConfigError(f"format: expected csv or json, got {fmt_!r}")
    try:
        policy = Policy.parse(merged["policy"])
    except ValueError as exc:
        raise ConfigError(f"policy: {exc}") from None
    return RunConfig(
        mode=mode,
        n_sites=_int("n_sites", merged["n"], minimum=2),
        p_erase=_floats("p_erase", merged["p-erase"], 0.0, 1.0),
        p_dephase=_floats("p_dephase", merged["p-dephase"], 0.0, 1.0),
        p_cnot=_floats("p_cnot", merged["p-cnot"], 0.0, 1.0, lo_open=True),
        policy=policy,
        trials=_int("trials", merged["trials"], minimum=1),
        seed=_int("seed", merged["seed"]),
        out=merged.get("out"),
        format=fmt_,
        svg=merged.get("svg"),
        workers=_int("workers", merged["workers"], minimum=1),
    )


@dataclass(frozen=True)
class CheckRow:
    check: str
    detail: str
    deviation: float
    status: str

    def csv_fields(self) -> list[str]:
        return [self.check, self.detail, fmt(self.deviation), self.status]


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def verify_rows(n: int, matrices=None) -> list[CheckRow]:
    """Protocol checks for an n-site chain; ``matrices`` injects gate overrides."""
    rows = []
    state = run_protocol(n, matrices)
    ref = reference_cluster(n)

    dev = float(np.max(np.abs(state.amplitudes - ref.amplitudes)))
    rows.append(CheckRow("oracle_equivalence", "max amplitude deviation < 1e-12", dev, _status(dev < TOL)))

    dev = abs(state.norm_squared() - 1.0)
    rows.append(CheckRow("normalization", "|norm^2 - 1| < 1e-12", dev, _status(dev < TOL)))

    dev = state.vac_population()
    rows.append(CheckRow("vac_population", "VAC weight == 0", dev, _status(dev == 0.0)))

    mags = np.abs(state.amplitudes[~vac_mask(n)])
    dev = float(np.max(np.abs(mags - 2.0 ** (-n / 2))))
    rows.append(CheckRow("amplitude_uniformity", f"all {2 ** n} magnitudes 2^(-n/2)", dev, _status(dev < TOL)))

    stabs = np.array(stabilizer_expectations(state))
    dev = float(np.max(np.abs(1.0 - np.abs(stabs))))
    rows.append(CheckRow("stabilizer_magnitudes", f"{n} generators |<K>| = 1", dev, _status(dev < TOL)))

    dev = float(np.max(np.abs(stabs - np.array(stabilizer_signs(n)))))
    rows.append(CheckRow("stabilizer_signs", "signs match +1 then -1", dev, _status(dev < TOL)))

    if n < 3:
        rows.append(CheckRow("bell_extraction", "no interior sites", 0.0, "SKIP"))
    else:
        try:
            branches = bell_extraction_branches(n, state)
            dev = max(0.0, max(1.0 - b.entropy for b in branches))
            ok = len(branches) == 2 ** (n - 2) and all(b.probability > 0 for b in branches) and dev <= 1e-9
        except ClusterSimError:
            branches, dev, ok = [], float("nan"), False
        rows.append(CheckRow("bell_extraction", f"{len(branches)} branches", dev, _status(ok)))
    return rows


def run_verify(config: RunConfig, matrices=None) -> tuple[int, list[CheckRow]]:
    rows = verify_rows(config.n_sites, matrices)
    code = EXIT_OK if all(r.status != "FAIL" for r in rows) else EXIT_VERIFY_FAILED
    return code, rows


def render_verify(rows: list[CheckRow], format: str) -> str:
    if format == "json":
        payload = [
            {"check": r.check, "detail": r.detail, "deviation": float(fmt(r.deviation)), "status": r.status}
            for r in rows
        ]
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(VERIFY_HEADER + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for r in rows:
        writer.writerow(r.csv_fields())
    return buf.getvalue()


def run_sweep(config: RunConfig) -> tuple[int, list[TrialReport]]:
    reports = []
    for pe, pd, pc in config.grid():
        params = NoiseParams(p_erase=pe, p_dephase=pd, p_cnot=pc, policy=config.policy)
        reports.append(run_experiment(config.n_sites, params, config.trials, config.seed, workers=config.workers))
    return EXIT_OK, reports


def _sweep_record(r: TrialReport) -> dict[str, str]:
    return {
        "n": str(r.n_sites),
        "p_erase": fmt(r.params.p_erase),
        "p_dephase": fmt(r.params.p_dephase),
        "p_cnot": fmt(r.params.p_cnot),
        "policy": r.params.policy.value,
        "trials": str(r.trials),
        "seed": str(r.seed),
        "mean_fidelity": fmt(r.mean_fidelity),
        "stderr_fidelity": fmt(r.stderr_fidelity),
        "mean_attempts": fmt(r.mean_attempts),
    }


def render_sweep(reports: list[TrialReport], format: str) -> str:
    if format == "json":
        payload = []
        for r in reports:
            rec = _sweep_record(r)
            for key in ("n", "trials", "seed"):
                rec[key] = int(rec[key])
            for key in ("p_erase", "p_dephase", "p_cnot", "mean_fidelity", "stderr_fidelity", "mean_attempts"):
                rec[key] = float(rec[key])
            payload.append(rec)
        return json.dumps(payload, indent=2) + "\n"
    lines = [SWEEP_HEADER]
    for r in reports:
        lines.append(",".join(_sweep_record(r).values()))
    return "\n".join(lines) + "\n"


def sweep_svg(reports: list[TrialReport], width: int = 480, height: int = 320) -> str:
    """Mean fidelity against the swept parameter as a single polyline."""
    varying = [
        name
        for name in ("p_erase", "p_dephase", "p_cnot")
        if len({getattr(r.params, name) for r in reports}) > 1
    ]
    if len(varying) == 1:
        xlabel = varying[0]
        xs = [getattr(r.params, xlabel) for r in reports]
    else:
        xlabel = "grid point"
        xs = list(range(len(reports)))
    ys = [r.mean_fidelity for r in reports]
    pad = 40
    x0, x1 = min(xs), max(xs)
    span = (x1 - x0) or 1.0

    def px(x):
        return pad + (x - x0) / span * (width - 2 * pad)

    def py(y):
        return height - pad - y * (height - 2 * pad)

    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{pts}"/>\n'
        f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" font-size="12">{xlabel}</text>\n'
        f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})">mean fidelity</text>\n'
        "</svg>\n"
    )


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"cluster-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if config.mode == "verify":
            code, rows = run_verify(config)
            text = render_verify(rows, config.format)
        else:
            code, reports = run_sweep(config)
            text = render_sweep(reports, config.format)
    except Exception as exc:  # noqa: BLE001 - mapped to the internal-error exit code
        print(f"cluster-sim: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    try:
        _emit(text, config.out)
        if config.mode == "sweep" and config.svg:
            _emit(sweep_svg(reports), config.svg)
    except OSError as exc:
        print(f"cluster-sim: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
