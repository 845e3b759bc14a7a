"""``cooltrace`` command line: figure data, oracle validation and SPAM characterization.

Exit codes: 0 success, 1 runtime or estimation failure (including a failed
validation row), 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__, analytic, montecarlo, simulator
from ._rng import derive_key
from .errors import CooltraceError, DomainError, EstimationFailureError, InconsistentEstimateError
from .noise import SpamParams
from .spam_char import DEFAULT_MAX_BIAS, SimulatedDevice, characterize
from .table import ResultTable

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("cooltrace")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2

NUPPER_NOTE = (
    "n_upper is the closed-form bound r**(ln A/ln B) with a continuous ancilla count; "
    "at delta_sp=0.1, delta_m_a=0.1, r=1000 it evaluates to 7.79; "
    "a rough estimate of about 3 for that case does not follow from the formula"
)

STATUS_OK, STATUS_ESTIMATION_FAILURE, STATUS_INCONSISTENT = 0, 1, 2


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    out: str | None = None
    fmt: str = "csv"

    @property
    def seed(self):
        return self.params.get("seed")

    def hash(self) -> str:
        """Digest of the parameters; output location and format do not enter it."""
        blob = json.dumps({"command": self.command, **self.params}, sort_keys=True)
        return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()[:16]


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(v) for v in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


def _grid(spec):
    """``start:stop:step`` inclusive of ``stop`` (up to rounding)."""
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    try:
        start, stop, step = (float(v) for v in str(spec).split(":"))
    except ValueError as exc:
        raise ConfigError(f"grid must be start:stop:step, got {spec!r}") from exc
    if step <= 0 or stop < start:
        raise ConfigError(f"empty grid {spec!r}")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(n + 1)]


# -- subcommands --------------------------------------------------------------


def cmd_compare(cfg: ExperimentConfig) -> ResultTable:
    deltas = _floats(cfg.params["delta"])
    k_max = int(cfg.params["k_max"])
    if not (1 <= k_max <= simulator.MAX_QUBITS):
        raise ConfigError(f"k-max must be in [1, {simulator.MAX_QUBITS}]")
    table = ResultTable(["delta_initial", "k", "delta_mbac", "delta_sv"])
    for d in deltas:
        for k in range(1, k_max + 1):
            try:
                table.append((d, k, analytic.mbac_k_closed(d, k), simulator.run_sv_k(d, k)))
            except DomainError as exc:
                raise ConfigError(f"row delta={d}, k={k}: {exc}") from exc
    return table


def cmd_nupper(cfg: ExperimentConfig) -> ResultTable:
    rs = _floats(cfg.params["r"])
    dms = _floats(cfg.params["delta_m"])
    grid = _grid(cfg.params["delta_sp_grid"])
    table = ResultTable(["delta_sp", "delta_m_a", "r", "n_upper"], meta={"note": NUPPER_NOTE})
    for dm in dms:
        for r in rs:
            for d in grid:
                try:
                    b = analytic.n_upper(r, d, d, dm)
                except DomainError as exc:
                    raise ConfigError(f"row delta_sp={d}, delta_m_a={dm}, r={r}: {exc}") from exc
                table.append((d, dm, r, b.n_upper))
    return table


_VALIDATE_COLUMNS = [
    "point", "quantity", "delta_1", "delta_t", "delta_m_1",
    "analytic", "exact", "mc_mean", "mc_std_err", "pass",
]
_ANCHORS = [(0.0, 0.0, 0.0), (0.1, 0.1, 0.0), (0.1, 0.1, 0.1)]


def _validate_point(d1, dt, dm):
    """Yield (quantity, analytic, exact, mc-callable) triples for one grid point."""
    yield (
        "bcs_step",
        analytic.bcs_step(d1, dt, d1),
        simulator.run_bcs_exact(d1, dt, d1),
        lambda shots, seed: montecarlo.mc_run_bcs(d1, dt, d1, shots, seed),
    )
    yield (
        "mbac2_step",
        analytic.mbac2_step(d1, dt),
        simulator.run_mbac_k_exact(dt, [d1]).delta_out,
        lambda shots, seed: montecarlo.mc_run_mbac_k(dt, [d1], shots, seed),
    )
    anc = SpamParams(d1, dm)
    noisy = simulator.run_mbac_k_exact(dt, [anc])
    yield (
        "mbac2_noisy_step",
        analytic.mbac2_noisy_step(dt, d1, dm),
        noisy.delta_out,
        lambda shots, seed: montecarlo.mc_run_mbac_k(dt, [anc], shots, seed),
    )
    yield (
        "step_acceptance_prob",
        analytic.step_acceptance_prob(dt, d1, dm),
        noisy.success_prob,
        lambda shots, seed: montecarlo.acceptance_estimate(
            montecarlo.mc_mbac_counts(dt, [anc], shots, seed)
        ),
    )
    if d1 + dt > 0:
        state = simulator.apply_cnot(simulator.product_state([dt, d1]), 0, 1)
        _, _, post1 = simulator.measure_qubit(state, 1)
        yield (
            "mbac2_failure",
            analytic.mbac2_failure(d1, dt).delta_out,
            simulator.marginal_error(post1, 0),
            lambda shots, seed: montecarlo.mc_failure_branch(dt, [d1], shots, seed),
        )
    yield (
        "mbac_k_closed_3",
        analytic.mbac_k_closed(dt, 3),
        simulator.run_mbac_k_exact(dt, [dt, dt]).delta_out,
        lambda shots, seed: montecarlo.mc_run_mbac_k(dt, [dt, dt], shots, seed),
    )


def cmd_mc_validate(cfg: ExperimentConfig) -> ResultTable:
    shots = int(cfg.params["shots"])
    seed = int(cfg.params["seed"])
    n_points = int(cfg.params["grid_points"])
    if shots < 10**4:
        raise ConfigError("mc-validate needs at least 10^4 shots")
    if n_points < 0:
        raise ConfigError("grid-points must be nonnegative")
    rng = np.random.default_rng(seed)
    points = _ANCHORS + [tuple(float(x) for x in rng.uniform(0.0, 0.45, 3)) for _ in range(n_points)]
    table = ResultTable(_VALIDATE_COLUMNS)
    for i, (d1, dt, dm) in enumerate(points):
        for j, (name, ana, exact, mc) in enumerate(_validate_point(d1, dt, dm)):
            est = mc(shots, derive_key(seed, i, j))
            ok = abs(exact - ana) < 1e-12 and est.within(exact, 4.0)
            table.append((i, name, d1, dt, dm, ana, exact, est.mean, est.std_err, int(ok)))
    table.meta["all_pass"] = int(all(table.column("pass")))
    return table


_CHAR_COLUMNS = [
    "status", "true_sp", "true_m", "true_spam", "ancilla_sp", "ancilla_m", "k",
    "delta_spam_hat", "delta_m_hat", "delta_sp_hat",
    "std_err_spam", "std_err_m", "std_err_sp",
    "residual_bias_bound", "n_accepted", "closure_gap", "closure_ok", "clipped",
]


def cmd_characterize(cfg: ExperimentConfig) -> ResultTable:
    p = cfg.params
    sp, m = float(p["sp"]), float(p["m"])
    asp, am = float(p["ancilla_sp"]), float(p["ancilla_m"])
    k = int(p["k"]) if p.get("k") else None
    shots = int(p["shots"])
    for name, v in (("sp", sp), ("m", m), ("ancilla-sp", asp), ("ancilla-m", am)):
        if not (0.0 <= v < 0.5):
            raise ConfigError(f"--{name}={v} outside [0, 1/2)")
    try:
        device = SimulatedDevice.diagonal(sp, m, asp, am, n_ancillas=int(p["n_ancillas"]))
        if k is not None and k - 1 > len(device.ancillas):
            raise ConfigError(f"k={k} needs more than the {len(device.ancillas)} pooled ancillas")
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    truth = (sp, m, sp + m - 2 * sp * m, asp, am)
    table = ResultTable(_CHAR_COLUMNS)
    try:
        est = characterize(
            device, k=k, shots_direct=shots, shots_mbac=shots,
            seed=int(p["seed"]), max_bias=float(p["max_bias"]),
        )
    except (EstimationFailureError, InconsistentEstimateError) as exc:
        status = (
            STATUS_ESTIMATION_FAILURE
            if isinstance(exc, EstimationFailureError)
            else STATUS_INCONSISTENT
        )
        nan = float("nan")
        table.append((status, *truth, k or 0, *[nan] * 7, getattr(exc, "n_accepted", 0), nan, 0, 0))
        table.meta["error"] = str(exc)
        return table
    table.append((
        STATUS_OK, *truth, est.k,
        est.delta_spam_hat, est.delta_m_hat, est.delta_sp_hat,
        est.std_err_spam, est.std_err_m, est.std_err_sp,
        est.residual_bias_bound, est.n_accepted, est.closure_gap,
        int(est.closure_ok()), int(est.clipped),
    ))
    return table


COMMANDS = {
    "compare": cmd_compare,
    "nupper": cmd_nupper,
    "mc-validate": cmd_mc_validate,
    "characterize": cmd_characterize,
}

# defaults used when neither the config file nor a flag sets a value
DEFAULTS = {
    "compare": {"delta": "0.1,0.45", "k_max": 8},
    "nupper": {"r": "100,1000", "delta_m": "0,0.1", "delta_sp_grid": "0.01:0.45:0.01"},
    "mc-validate": {"shots": 10**5, "seed": None, "grid_points": 100},
    "characterize": {
        "sp": None, "m": None, "ancilla_sp": None, "ancilla_m": None, "k": 0,
        "shots": 10**6, "seed": None, "n_ancillas": 64, "max_bias": DEFAULT_MAX_BIAS,
    },
}
STOCHASTIC = {"mc-validate", "characterize"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cooltrace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cooltrace {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="TOML file; flags override its values")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", dest="fmt", choices=["csv", "json"], default=None)
        sp.add_argument("-v", "--verbose", action="store_true")
        return sp

    c = common(sub.add_parser("compare", help="MBAC-k vs SV-k target error table"))
    c.add_argument("--delta", help="comma-separated initial errors")
    c.add_argument("--k-max", type=int, dest="k_max")

    c = common(sub.add_parser("nupper", help="bound on expected runs to reach ratio r"))
    c.add_argument("--r", help="comma-separated cooling ratios")
    c.add_argument("--delta-m", dest="delta_m", help="comma-separated ancilla readout errors")
    c.add_argument("--delta-sp-grid", dest="delta_sp_grid", help="start:stop:step")

    c = common(sub.add_parser("mc-validate", help="analytic vs exact vs Monte Carlo"))
    c.add_argument("--shots", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--grid-points", type=int, dest="grid_points")

    c = common(sub.add_parser("characterize", help="separate SP and M errors of a simulated device"))
    c.add_argument("--sp", type=float)
    c.add_argument("--m", type=float)
    c.add_argument("--ancilla-sp", type=float, dest="ancilla_sp")
    c.add_argument("--ancilla-m", type=float, dest="ancilla_m")
    c.add_argument("--k", type=int, help="total qubits in MBAC-k; 0 selects k automatically")
    c.add_argument("--shots", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--n-ancillas", type=int, dest="n_ancillas", help="size of the ancilla pool")
    c.add_argument("--max-bias", type=float, dest="max_bias", help="bias target for automatic k")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    params = dict(DEFAULTS[args.command])
    fmt, out = None, None
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                doc = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        # either flat keys or a [command] table
        section = doc.get(args.command, doc)
        for key, value in section.items():
            key = key.replace("-", "_")
            if key == "out":
                out = value
            elif key == "format":
                fmt = value
            elif key in params:
                params[key] = value
            elif not isinstance(value, dict):
                raise ConfigError(f"unknown key {key!r} for {args.command}")
    for key in params:
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    out = args.out if args.out is not None else out
    fmt = args.fmt or fmt or ("json" if out and out.endswith(".json") else "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    missing = [k for k, v in params.items() if v is None]
    if missing:
        what = "seed is required for stochastic subcommands" if missing == ["seed"] else f"missing {missing}"
        raise ConfigError(what)
    if args.command in STOCHASTIC and not (0 <= int(params["seed"]) < 1 << 64):
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return ExperimentConfig(args.command, params, out, fmt)


def run(cfg: ExperimentConfig) -> tuple[ResultTable, int]:
    table = COMMANDS[cfg.command](cfg)
    table.meta.update(
        tool=f"cooltrace {__version__}",
        command=cfg.command,
        config_hash=cfg.hash(),
        seed=cfg.seed if cfg.seed is not None else "none",
    )
    code = EXIT_OK
    if cfg.command == "mc-validate" and not table.meta["all_pass"]:
        code = EXIT_FAILURE
    if cfg.command == "characterize" and any(s != STATUS_OK for s in table.column("status")):
        code = EXIT_FAILURE
    return table, code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args)
        table, code = run(cfg)
    except ConfigError as exc:
        print(f"cooltrace: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CooltraceError, DomainError) as exc:
        print(f"cooltrace: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    text = table.dumps(cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
        log.info("wrote %d rows to %s", len(table.rows), cfg.out)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
