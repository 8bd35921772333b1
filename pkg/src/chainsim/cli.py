"""Command-line front end: ``chainsim <command> [flags]``.

Commands:

* ``transfer``  polarization of spin ``b`` from spin ``a`` (or ``--state``)
* ``mqc``       zero- and double-quantum intensities
* ``figure``    ``1``, ``inset``, ``2`` or ``longrange`` reproductions
* ``verify``    full analytic-vs-oracle comparison for one chain length
* ``baseline``  transfer under the secular dipolar Hamiltonian

A flat JSON file given with ``--config`` supplies defaults; flags override it.
Exit status: 0 ok, 2 invalid input, 3 oracle size cap, 4 engine disagreement.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import experiments, fermion, oracle
from .chain import COUPLING_MODELS, DeviationState, build_table
from .errors import ChainSimError, ConfigError, CrossCheckError, ResourceLimitError
from .series import ExperimentReport, TimeSeries

logger = logging.getLogger("chainsim")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_CROSS_CHECK = 4

COMMANDS = ("transfer", "mqc", "figure", "verify", "baseline")
FIGURES = ("1", "inset", "2", "longrange")
ENGINES = ("analytic", "oracle", "both")

# Per-command fallbacks for fields left unset by both the file and the flags.
_DEFAULTS = {
    "transfer": {"n": 21, "t_max": 40.0, "n_points": 2000},
    "mqc": {"n": 21, "t_max": 40.0, "n_points": 2000},
    "figure": {"n": 21, "t_max": 40.0, "n_points": 2000},
    "verify": {"n": 6, "t_max": 20.0, "n_points": 100},
    "baseline": {"n": 6, "t_max": 40.0, "n_points": 400},
}
_LONGRANGE_DEFAULTS = {"n": 6, "t_max": 20.0, "n_points": 400}


@dataclass
class RunConfig:
    """Everything needed to reproduce one run.

    Config-file keys are the field names; ``n_spins`` is accepted for ``n``
    so chain preset files can be reused directly.
    """

    command: str = "transfer"
    figure: str | None = None
    n: int | None = None
    model: str = "nn"
    d: float = 1.0
    exponent: float = 3.0
    a: int = 1
    b: int | None = None
    state: Any = None
    t_max: float | None = None
    n_points: int | None = None
    engine: str = "analytic"
    out: str = "out"
    mq_steps: int | None = None

    def resolved(self) -> "RunConfig":
        """Fill command-dependent defaults (chain length, grid, target spin)."""
        base = _LONGRANGE_DEFAULTS if self.figure == "longrange" else _DEFAULTS.get(self.command, {})
        cfg = replace(self, **{k: v for k, v in base.items() if getattr(self, k) is None})
        if cfg.b is None and isinstance(cfg.n, int):
            cfg = replace(cfg, b=cfg.n)
        return cfg

    def deviation_state(self) -> DeviationState:
        if self.state is None:
            return DeviationState.single(self.a)
        if isinstance(self.state, str):
            return DeviationState.parse(self.state)
        return DeviationState(dict(self.state))


_FIELDS = {f.name for f in fields(RunConfig)}
_ALIASES = {"n_spins": "n"}
_INT_FIELDS = ("n", "a", "b", "n_points", "mq_steps")
_FLOAT_FIELDS = ("d", "exponent", "t_max")
_STR_FIELDS = ("command", "figure", "model", "engine", "out")


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value) -> bool:
    return (_is_int(value) or isinstance(value, float)) and math.isfinite(value)


def _from_mapping(raw: Mapping, problems: list[str]) -> RunConfig:
    values: dict[str, Any] = {}
    for key, value in raw.items():
        name = _ALIASES.get(key, key)
        if name not in _FIELDS:
            problems.append(f"unknown key {key!r}")
            continue
        if name in values:
            problems.append(f"key {key!r} duplicates {name!r}")
            continue
        if value is None:
            continue
        if name in _INT_FIELDS and not _is_int(value):
            problems.append(f"{key} must be an integer, got {value!r}")
        elif name in _FLOAT_FIELDS and not _is_real(value):
            problems.append(f"{key} must be a finite number, got {value!r}")
        elif name in _STR_FIELDS and not isinstance(value, (str, int)):
            problems.append(f"{key} must be a string, got {value!r}")
        elif name == "state" and not isinstance(value, (str, dict)):
            problems.append(f"state must be a string like '1,21' or an object, got {value!r}")
        else:
            if name in _STR_FIELDS:
                value = str(value)
            elif name in _FLOAT_FIELDS:
                value = float(value)
            values[name] = value
    return RunConfig(**values)


def config_problems(cfg: RunConfig) -> tuple[list[str], list[str]]:
    """Return ``(usage_problems, cap_problems)`` for a resolved config."""
    problems: list[str] = []
    caps: list[str] = []
    if cfg.command not in COMMANDS:
        problems.append(f"command must be one of {', '.join(COMMANDS)}, got {cfg.command!r}")
    if cfg.command == "figure" and cfg.figure not in FIGURES:
        problems.append(f"figure must be one of {', '.join(FIGURES)}, got {cfg.figure!r}")
    if cfg.engine not in ENGINES:
        problems.append(f"engine must be one of {', '.join(ENGINES)}, got {cfg.engine!r}")
    if cfg.model not in COUPLING_MODELS:
        problems.append(f"model must be one of {', '.join(COUPLING_MODELS)}, got {cfg.model!r}")
    n = cfg.n
    if not _is_int(n) or n < 2:
        problems.append(f"n must be an integer >= 2, got {n!r}")
        n = None
    if cfg.d == 0:
        problems.append("d must be nonzero")
    if not cfg.exponent > 0:
        problems.append(f"exponent must be positive, got {cfg.exponent}")
    if cfg.t_max is not None and not cfg.t_max > 0:
        problems.append(f"t_max must be positive, got {cfg.t_max}")
    if cfg.n_points is not None and cfg.n_points < 2:
        problems.append(f"n_points must be at least 2, got {cfg.n_points}")
    if cfg.mq_steps is not None and cfg.mq_steps < 1:
        problems.append(f"mq_steps must be positive, got {cfg.mq_steps}")
    if n is not None:
        for name in ("a", "b"):
            value = getattr(cfg, name)
            if value is not None and not 1 <= value <= n:
                problems.append(f"{name}={value} outside chain of {n} spins")
        try:
            cfg.deviation_state().check(n)
        except ChainSimError as exc:
            problems.append(f"state: {exc}")

    uses_analytic = cfg.command in ("transfer", "mqc") and cfg.engine in ("analytic", "both")
    uses_analytic |= cfg.command == "verify" or (cfg.command == "figure" and cfg.figure != "longrange")
    uses_oracle = cfg.command in ("transfer", "mqc") and cfg.engine in ("oracle", "both")
    uses_oracle |= cfg.command in ("verify", "baseline") or (cfg.command == "figure" and cfg.figure == "longrange")
    if uses_analytic and cfg.model != "nn":
        problems.append(
            f"model {cfg.model!r} has long-range couplings; the analytic engine solves "
            "nearest-neighbor chains only (use engine=oracle)"
        )
    if uses_oracle and n is not None:
        try:
            cap = oracle.oracle_cap()
        except ResourceLimitError as exc:
            caps.append(str(exc))
        else:
            if n > cap:
                caps.append(f"n={n} exceeds the dense oracle cap of {cap} spins")
    return problems, caps


def _parse_json(raw: bytes | str) -> Mapping:
    text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a flat JSON object")
    return data


def validate_config(raw: bytes | str, overrides: Mapping | None = None) -> RunConfig:
    """Parse a flat JSON config, apply ``overrides`` and check every invariant.

    Raises:
        ConfigError: listing every violation found. ``problems`` holds them
            all; ``cap_only`` is true when the oracle size cap is the only one.
    """
    problems: list[str] = []
    cfg = _from_mapping(_parse_json(raw), problems)
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    cfg = cfg.resolved()
    usage, caps = config_problems(cfg)
    problems += usage
    if problems or caps:
        error = ConfigError(problems + caps)
        error.cap_only = not problems
        raise error
    return cfg


def _grid(cfg: RunConfig) -> np.ndarray:
    return experiments.time_grid(cfg.t_max, cfg.n_points)


def _meta(cfg: RunConfig, experiment: str, engine: str, state: DeviationState) -> dict:
    return {
        "experiment": experiment, "n": cfg.n, "engine": engine, "model": cfg.model,
        "d": cfg.d, "exponent": cfg.exponent, "state": state.label(), "b": cfg.b,
        "t_max": cfg.t_max, "n_points": cfg.n_points,
    }


def _compare(name: str, analytic: TimeSeries, other: TimeSeries) -> float:
    worst = 0.0
    for key, values in analytic.channels.items():
        worst = max(worst, float(np.max(np.abs(values - other[key]))))
    if worst > experiments.CROSS_CHECK_TOL:
        raise CrossCheckError(f"{name}: engines differ by {worst:.3e} (tolerance {experiments.CROSS_CHECK_TOL:g})")
    return worst


def run_transfer(cfg: RunConfig) -> ExperimentReport:
    state = cfg.deviation_state().check(cfg.n)
    t = _grid(cfg)
    series = []
    if cfg.engine in ("analytic", "both"):
        channels = {
            "P_xy": fermion.polarization_state(state, cfg.b, cfg.n, cfg.d, t, "xy"),
            "P_dq": fermion.polarization_state(state, cfg.b, cfg.n, cfg.d, t, "dq"),
        }
        series.append(TimeSeries(t, channels, _meta(cfg, "transfer", "analytic", state)))
    if cfg.engine in ("oracle", "both"):
        table = build_table(cfg.model, cfg.n, cfg.d, cfg.exponent)
        rho0 = oracle.deviation_operator(state, cfg.n)
        channels = {
            f"P_{kind}": oracle.transfer_series(oracle.build_hamiltonian(kind, table), rho0, cfg.b, t)
            for kind in ("xy", "dq")
        }
        if cfg.engine == "oracle":
            channels["P_dip"] = oracle.transfer_series(oracle.build_hamiltonian("dipolar", table), rho0, cfg.b, t)
        series.append(TimeSeries(t, channels, _meta(cfg, "transfer", "oracle", state)))
    summary = {}
    if cfg.engine == "both":
        summary["max_engine_difference"] = _compare("transfer", series[0], series[1])
    return ExperimentReport("transfer", series, summary, asdict(cfg))


def _order_name(prefix: str, q: int) -> str:
    return f"{prefix}{q}" if q >= 0 else f"{prefix}m{-q}"


def run_mqc(cfg: RunConfig) -> ExperimentReport:
    state = cfg.deviation_state().check(cfg.n)
    t = _grid(cfg)
    series = []
    if cfg.engine in ("analytic", "both"):
        j0, j2 = fermion.mqc_intensities_state(state, cfg.n, cfg.d, t)
        c0, c2 = fermion.mqc_intensities_collective_state(state, cfg.n, cfg.d, t)
        series.append(TimeSeries(t, {"J0": j0, "J2": j2, "Jc0": c0, "Jc2": c2},
                                 _meta(cfg, "mqc", "analytic", state)))
    if cfg.engine in ("oracle", "both"):
        H = oracle.build_hamiltonian("dq", build_table(cfg.model, cfg.n, cfg.d, cfg.exponent))
        rho0 = oracle.deviation_operator(state, cfg.n)
        local = oracle.mqc_protocol(rho0, H, t, n_steps=cfg.mq_steps)
        collective = oracle.mqc_protocol(rho0, H, t, n_steps=cfg.mq_steps, readout=oracle.total_z(cfg.n))
        channels = {_order_name("J", q): v for q, v in local.items()}
        channels.update({_order_name("Jc", q): v for q, v in collective.items()})
        series.append(TimeSeries(t, channels, _meta(cfg, "mqc", "oracle", state)))
    summary = {}
    if cfg.engine == "both":
        summary["max_engine_difference"] = _compare("mqc", series[0], series[1])
    return ExperimentReport("mqc", series, summary, asdict(cfg))


def run_figure(cfg: RunConfig) -> ExperimentReport:
    if cfg.figure == "1":
        return experiments.figure1_transfer(cfg.n, cfg.t_max, cfg.n_points, cfg.d)
    if cfg.figure == "inset":
        n_even, n_odd = (cfg.n, cfg.n + 1) if cfg.n % 2 == 0 else (cfg.n - 1, cfg.n)
        return experiments.figure1_inset_parity(n_even, n_odd, cfg.t_max, cfg.n_points, cfg.d)
    if cfg.figure == "2":
        return experiments.figure2_mqc(cfg.n, cfg.t_max, cfg.n_points, cfg.d)
    return experiments.longrange_comparison(cfg.n, cfg.exponent, cfg.t_max, cfg.n_points, cfg.d)


def run(cfg: RunConfig) -> tuple[ExperimentReport, list[Path]]:
    """Execute a validated config and write its artifacts under ``cfg.out``."""
    if cfg.command == "transfer":
        report = run_transfer(cfg)
    elif cfg.command == "mqc":
        report = run_mqc(cfg)
    elif cfg.command == "figure":
        report = run_figure(cfg)
    elif cfg.command == "verify":
        report = experiments.verify(cfg.n, cfg.d, cfg.t_max, cfg.n_points)
    else:
        report = experiments.dipolar_baseline(cfg.n, cfg.t_max, cfg.n_points, cfg.d, cfg.model, cfg.exponent)
    written = report.write(cfg.out)
    if cfg.command == "verify" and not report.summary["passed"]:
        failing = [k for k, v in report.summary["max_errors"].items() if v > report.summary["tolerance"]]
        raise CrossCheckError(f"verify n={cfg.n}: engines disagree on {', '.join(failing)}")
    return report, written


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat JSON file with run defaults")
    common.add_argument("--n", type=int, help="number of spins")
    common.add_argument("--model", choices=COUPLING_MODELS, help="coupling model")
    common.add_argument("--d", type=float, help="coupling strength (angular frequency)")
    common.add_argument("--exponent", type=float, help="power-law exponent for the dipolar model")
    common.add_argument("--a", type=int, help="initially polarized spin (1-based)")
    common.add_argument("--b", type=int, help="observed spin (1-based, default N)")
    common.add_argument("--state", help="weighted state, e.g. '1,21' or '1:0.5,21:1'")
    common.add_argument("--tmax", dest="t_max", type=float, help="end of the time grid (units of 1/d)")
    common.add_argument("--points", dest="n_points", type=int, help="number of grid points")
    common.add_argument("--engine", choices=ENGINES, help="engine(s) to run")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--mq-steps", dest="mq_steps", type=int, help="phase steps for oracle MQC")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="chainsim", description="Spin-chain transport simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("transfer", parents=[common], help="polarization transfer curve")
    sub.add_parser("mqc", parents=[common], help="multiple-quantum coherence intensities")
    fig = sub.add_parser("figure", parents=[common], help="reproduce a figure")
    fig.add_argument("figure", choices=FIGURES)
    sub.add_parser("verify", parents=[common], help="analytic vs oracle comparison")
    sub.add_parser("baseline", parents=[common], help="transfer under the dipolar Hamiltonian")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in vars(args).items() if k in _FIELDS}
    try:
        raw = args.config.read_bytes() if args.config else b"{}"
    except OSError as exc:
        print(f"chainsim: error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = validate_config(raw, overrides)
        report, written = run(cfg)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"chainsim: error: {problem}", file=sys.stderr)
        return EXIT_RESOURCE if getattr(exc, "cap_only", False) else EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"chainsim: error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except CrossCheckError as exc:
        print(f"chainsim: cross-check failed: {exc}", file=sys.stderr)
        return EXIT_CROSS_CHECK
    except (ChainSimError, ValueError) as exc:
        print(f"chainsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{report.name} n={report.metadata.get('n')}: wrote {len(written)} files to {cfg.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
