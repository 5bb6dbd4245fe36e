"""Command-line front end.

Subcommands wrap the library modules into reproducible runs: every report
embeds the tool version, the effective configuration, the seed, and the
wall time; identical (command, config, seed) reruns produce byte-identical
output apart from the wall-time field.  Exit codes: 0 success or verdict
pass, 1 verdict fail, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import __version__
from .extent import (
    build_m4_certificate,
    certificate_to_dict,
    decomposition_to_dict,
    extent4_via_extreme_points,
    extent_lower_via_fidelity,
    m4_overlap_bound_check,
    multiplicativity_check,
)
from .fidelity import gaussian_fidelity
from .rank import (
    RankSearchConfig,
    SYMMETRIC_COL_LABELS,
    SYMMETRIC_ROW_LABELS,
    anneal_decomposition,
    m_state,
    magic_state,
    rank3_infeasibility_certificate,
    symmetric_rank_search,
    symmetry_grid_residuals,
)
from .states import (
    GAUSSIAN_TOL,
    EvenParityState,
    FreeChart,
    all_constraints,
    complete_amplitudes,
    independent_constraints,
    lambda_residual_norm,
    random_gaussian,
    state_from_dict,
    state_to_dict,
    tensor_power,
    worst_constraint,
)
from .triples import build_triple, triple_manifold_dimension

CERTIFICATE_EIG_TOL = 1e-9

# Constraint enumeration is quadratic in the even-sector dimension; past
# this size the check falls back to an independent generating set.
FULL_CHECK_MAX_QUBITS = 10


@dataclass(frozen=True)
class RunConfig:
    """Echoed verbatim into every report for reproducibility audits."""

    command: str
    seed: int | None = None
    tolerances: Mapping[str, float] = field(default_factory=dict)
    output_path: str | None = None
    format: str = "json"
    options: Mapping[str, object] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Shared plumbing


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"object of type {type(obj).__name__} is not JSON serializable")


def _parse_tolerances(pairs: list[str] | None) -> dict[str, float]:
    out: dict[str, float] = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"tolerance override {item!r} is not KEY=VALUE")
        out[key] = float(value)
    return out


_EXCLUDED_OPTIONS = {"handler", "command_name", "output", "seed", "tol", "format"}


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    options = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in _EXCLUDED_OPTIONS and not callable(value)
    }
    return RunConfig(
        command=args.command_name,
        seed=getattr(args, "seed", None),
        tolerances=_parse_tolerances(getattr(args, "tol", None)),
        output_path=args.output,
        format=getattr(args, "format", "json"),
        options=options,
    )


def _emit_text(text: str, config: RunConfig) -> None:
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_report(report: dict, config: RunConfig, started: float) -> None:
    report["meta"] = {
        "version": __version__,
        "command": config.command,
        "seed": config.seed,
        "config": asdict(config),
        "wall_time_s": round(time.monotonic() - started, 6),
    }
    text = json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n"
    _emit_text(text, config)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc


def _load_state(path: str) -> EvenParityState:
    data = _load_json(path)
    if isinstance(data, dict) and "state" in data and "amplitudes" not in data:
        data = data["state"]
    return state_from_dict(data)


def _chart_from_dict(data: Mapping) -> FreeChart:
    try:
        n = int(data["n"])
        favored = int(data["favored"])
        entries = list(data["values"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed chart object: {exc}") from exc
    values: dict[int, complex] = {}
    for entry in entries:
        if len(entry) != 3:
            raise ValueError(f"chart entry {entry!r} is not [label, re, im]")
        values[int(entry[0])] = complex(float(entry[1]), float(entry[2]))
    return FreeChart(n, favored, values)


def _parse_target(token: str) -> EvenParityState:
    """Named magic-state targets, or a path to a state JSON file."""
    if token == "M":
        return m_state()
    if token == "M2":
        return tensor_power(m_state(), 2)
    if token == "M3":
        return tensor_power(m_state(), 3)
    if token == "Mtilde":
        return magic_state("Mtilde").state
    if token == "Mtilde2":
        return tensor_power(magic_state("Mtilde").state, 2)
    if token.startswith("Malpha:"):
        return magic_state("Malpha", alpha=float(token.split(":", 1)[1])).state
    return _load_state(token)


def _parse_free(pairs: list[str]) -> dict[int, complex]:
    """Entries LABEL=RE or LABEL=RE,IM."""
    out: dict[int, complex] = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"free amplitude {item!r} is not LABEL=RE[,IM]")
        parts = value.split(",")
        if len(parts) not in (1, 2):
            raise ValueError(f"free amplitude {item!r} has malformed value")
        re = float(parts[0])
        im = float(parts[1]) if len(parts) == 2 else 0.0
        out[int(key)] = complex(re, im)
    return out


# ---------------------------------------------------------------------------
# gaussian


def _cmd_gaussian_check(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    state = _load_state(args.state)
    tol = config.tolerances.get("gaussian", GAUSSIAN_TOL)
    residual = lambda_residual_norm(state)
    if state.n <= FULL_CHECK_MAX_QUBITS:
        ids = all_constraints(state.n)
    else:
        pivot = max(state.nonzero_items(), key=lambda kv: abs(kv[1]))[0]
        ids = independent_constraints(state.n, pivot)
    cid, value = worst_constraint(state, ids)
    verdict = residual <= tol
    report = {
        "n": state.n,
        "lambda_residual": residual,
        "max_constraint_residual": abs(value),
        "worst_constraint": {
            "u": cid.u,
            "v": cid.v,
            "re": value.real,
            "im": value.imag,
        },
        "tolerance": tol,
        "gaussian": verdict,
    }
    _emit_report(report, config, started)
    return 0 if verdict else 1


def _cmd_gaussian_complete(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    chart = _chart_from_dict(_load_json(args.chart))
    state = complete_amplitudes(chart)
    if args.normalize:
        state = state.rescaled_to_unit()
    report = {
        "state": state_to_dict(state),
        "normalized": bool(args.normalize),
        "norm": state.norm(),
    }
    _emit_report(report, config, started)
    return 0


def _cmd_gaussian_random(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    state = random_gaussian(args.n, args.seed, method=args.method)
    report = {
        "state": state_to_dict(state),
        "lambda_residual": lambda_residual_norm(state),
    }
    _emit_report(report, config, started)
    return 0


# ---------------------------------------------------------------------------
# fidelity


def _cmd_fidelity(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    target = _parse_target(args.target)
    result = gaussian_fidelity(
        target, restarts=args.restarts, seed=args.seed, threads=args.threads
    )
    report = {
        "value": result.value,
        "restarts_used": result.restarts_used,
        "converged": result.converged,
        "witness": state_to_dict(result.witness),
    }
    _emit_report(report, config, started)
    return 0


# ---------------------------------------------------------------------------
# extent


def _cmd_extent_lower(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    target = _parse_target(args.target)
    bound, result = extent_lower_via_fidelity(
        target, restarts=args.restarts, seed=args.seed, threads=args.threads
    )
    report = {
        "extent_lower": bound,
        "fidelity": result.value,
        "witness": state_to_dict(result.witness),
    }
    _emit_report(report, config, started)
    return 0


def _cmd_extent_four(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    target = _parse_target(args.target)
    value, witness = extent4_via_extreme_points(
        target, restarts=args.restarts, seed=args.seed, threads=args.threads
    )
    report = {
        "value": value,
        "witness": {
            "y": state_to_dict(witness.y),
            "objective": witness.objective,
            "fidelity_estimate": witness.fidelity_estimate,
            "feasibility_margin": witness.feasibility_margin,
            "feasible": witness.feasible,
        },
    }
    _emit_report(report, config, started)
    return 0


def _cmd_extent_mult(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    targets = [_parse_target(token) for token in args.targets]
    report = multiplicativity_check(
        targets, restarts=args.restarts, seed=args.seed, threads=args.threads
    )
    _emit_report(dict(report), config, started)
    return 0


def _cmd_extent_certificate(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    cert = build_m4_certificate(args.k)
    tol = config.tolerances.get("certificate", CERTIFICATE_EIG_TOL)
    verdict = cert.min_eigenvalue >= -tol
    report = {
        "certificate": certificate_to_dict(cert),
        "tolerance": tol,
        "psd": verdict,
    }
    _emit_report(report, config, started)
    return 0 if verdict else 1


def _cmd_extent_overlap(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    report = m4_overlap_bound_check(
        args.k, restarts=args.restarts, seed=args.seed, threads=args.threads
    )
    _emit_report(dict(report), config, started)
    return 0


# ---------------------------------------------------------------------------
# rank


def _rank_config(args: argparse.Namespace, symmetry: bool) -> RankSearchConfig:
    return RankSearchConfig(
        terms=args.terms,
        iterations=args.iterations,
        initial_temperature=args.temperature,
        cooling_rate=args.cooling,
        restarts=args.restarts,
        seed=args.seed,
        symmetry_restricted=symmetry,
        step_scale=args.step_scale,
        min_state_pivot=args.min_pivot,
        greedy_init=not args.no_greedy,
        log_path=args.log,
        threads=args.threads,
    )


def _cmd_rank_search(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    target = _parse_target(args.target)
    decomposition = anneal_decomposition(target, _rank_config(args, symmetry=False))
    report = {
        "decomposition": decomposition_to_dict(decomposition),
        "loss": decomposition.loss,
        "extent_value": decomposition.extent_value,
        "terms": len(decomposition.terms),
        "log_path": args.log,
    }
    _emit_report(report, config, started)
    return 0


def _cmd_rank_symmetric(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    decomposition = symmetric_rank_search(args.terms, _rank_config(args, symmetry=True))
    report = {
        "decomposition": decomposition_to_dict(decomposition),
        "loss": decomposition.loss,
        "extent_value": decomposition.extent_value,
        "terms": len(decomposition.terms),
        "log_path": args.log,
    }
    if args.terms == 3:
        report["certificate"] = rank3_infeasibility_certificate(decomposition)
    _emit_report(report, config, started)
    return 0


def _grid_rows(state: EvenParityState, pivot: int) -> list[dict]:
    residuals = symmetry_grid_residuals(state, pivot_choice=pivot)
    rows = []
    for cid, value in residuals.items():
        offset = cid.u ^ cid.v
        row = offset & 0x3C
        col = offset & 0xC3
        if col == 0:
            kind, row_label, col_label = "four_term", offset, None
        elif row == 0:
            kind, row_label, col_label = "four_term", None, offset
        else:
            kind, row_label, col_label = "body", row, col
        rows.append(
            {
                "kind": kind,
                "row": row_label,
                "col": col_label,
                "u": cid.u,
                "v": cid.v,
                "re": value.real,
                "im": value.imag,
                "abs": abs(value),
            }
        )
    rows.sort(key=lambda r: (r["kind"], r["row"] is None, r["row"] or 0, r["col"] or 0))
    return rows


def _cmd_rank_grid(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    state = _parse_target(args.target)
    rows = _grid_rows(state, args.pivot)
    if config.format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(["kind", "row", "col", "u", "v", "re", "im", "abs"])
        for row in rows:
            writer.writerow(
                [
                    row["kind"],
                    "" if row["row"] is None else row["row"],
                    "" if row["col"] is None else row["col"],
                    row["u"],
                    row["v"],
                    repr(row["re"]),
                    repr(row["im"]),
                    repr(row["abs"]),
                ]
            )
        _emit_text(buffer.getvalue(), config)
        return 0
    report = {
        "pivot": args.pivot,
        "row_labels": list(SYMMETRIC_ROW_LABELS),
        "col_labels": list(SYMMETRIC_COL_LABELS),
        "residuals": rows,
        "max_abs": max(row["abs"] for row in rows),
    }
    _emit_report(report, config, started)
    return 0


# ---------------------------------------------------------------------------
# triples


def _cmd_triples_build(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    free = _parse_free(args.free)
    triple = build_triple(args.n, None, free, args.anchor)
    report = {
        "alpha": triple.alpha,
        "beta": triple.beta,
        "states": [
            state_to_dict(triple.psi0),
            state_to_dict(triple.psi1),
            state_to_dict(triple.psi2),
        ],
    }
    _emit_report(report, config, started)
    return 0


def _cmd_triples_dimension(args: argparse.Namespace) -> int:
    started = time.monotonic()
    config = _config_from_args(args)
    dimension = triple_manifold_dimension(args.n, args.seed)
    report = {"n": args.n, "dimension": dimension}
    _emit_report(report, config, started)
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_common(parser: argparse.ArgumentParser, *, seed: bool, threads: bool) -> None:
    parser.add_argument("-o", "--output", default=None, help="write the report here")
    parser.add_argument(
        "--tol",
        action="append",
        metavar="KEY=VALUE",
        help="tolerance override, repeatable",
    )
    if seed:
        parser.add_argument("--seed", type=int, required=True, help="RNG seed")
    if threads:
        parser.add_argument(
            "--threads",
            type=int,
            default=None,
            help="restart pool size (default: machine parallelism)",
        )


def _add_anneal_flags(parser: argparse.ArgumentParser) -> None:
    defaults = RankSearchConfig()
    parser.add_argument("--terms", type=int, default=defaults.terms)
    parser.add_argument("--iterations", type=int, default=defaults.iterations)
    parser.add_argument(
        "--temperature", type=float, default=defaults.initial_temperature
    )
    parser.add_argument("--cooling", type=float, default=defaults.cooling_rate)
    parser.add_argument("--restarts", type=int, default=defaults.restarts)
    parser.add_argument("--step-scale", type=float, default=defaults.step_scale)
    parser.add_argument(
        "--min-pivot",
        type=float,
        default=defaults.min_state_pivot,
        help="reject terms whose favored amplitude falls below this",
    )
    parser.add_argument(
        "--no-greedy", action="store_true", help="skip the greedy first restart"
    )
    parser.add_argument("--log", default=None, help="annealing trace CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussmagic",
        description="Gaussianity checks and magic-resource measures "
        "for even-parity fermionic states.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    top = parser.add_subparsers(dest="group", required=True)

    def leaf(
        sub,
        name: str,
        command: str,
        handler: Callable[[argparse.Namespace], int],
        *,
        seed: bool = False,
        threads: bool = False,
        help: str = "",
    ) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        _add_common(p, seed=seed, threads=threads)
        p.set_defaults(handler=handler, command_name=command)
        return p

    gaussian = top.add_parser(
        "gaussian", help="check, complete, or sample Gaussian states"
    )
    gsub = gaussian.add_subparsers(dest="subcommand", required=True)
    p = leaf(gsub, "check", "gaussian check", _cmd_gaussian_check)
    p.add_argument("state", help="state JSON path")
    p = leaf(gsub, "complete", "gaussian complete", _cmd_gaussian_complete)
    p.add_argument("chart", help="free-chart JSON path")
    p.add_argument("--normalize", action="store_true")
    p = leaf(gsub, "random", "gaussian random", _cmd_gaussian_random, seed=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=("circuit", "chart"), default="circuit")

    p = leaf(
        top,
        "fidelity",
        "fidelity",
        _cmd_fidelity,
        seed=True,
        threads=True,
        help="best Gaussian overlap for a target state",
    )
    p.add_argument("target", help="M, M2, M3, Mtilde, Mtilde2, Malpha:A, or a path")
    p.add_argument("--restarts", type=int, default=50)

    extent = top.add_parser("extent", help="extent bounds and certificates")
    esub = extent.add_subparsers(dest="subcommand", required=True)
    p = leaf(esub, "lower", "extent lower", _cmd_extent_lower, seed=True, threads=True)
    p.add_argument("target")
    p.add_argument("--restarts", type=int, default=50)
    p = leaf(esub, "four", "extent four", _cmd_extent_four, seed=True, threads=True)
    p.add_argument("target")
    p.add_argument("--restarts", type=int, default=16)
    p = leaf(esub, "mult", "extent mult", _cmd_extent_mult, seed=True, threads=True)
    p.add_argument("targets", nargs="+")
    p.add_argument("--restarts", type=int, default=16)
    p = leaf(esub, "certificate", "extent certificate", _cmd_extent_certificate)
    p.add_argument("--k", type=int, required=True, choices=(1, 2, 3))
    p = leaf(
        esub, "overlap", "extent overlap", _cmd_extent_overlap, seed=True, threads=True
    )
    p.add_argument("--k", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--restarts", type=int, default=8)

    rank = top.add_parser("rank", help="annealed low-rank Gaussian decompositions")
    rsub = rank.add_subparsers(dest="subcommand", required=True)
    p = leaf(rsub, "search", "rank search", _cmd_rank_search, seed=True, threads=True)
    p.add_argument("--target", required=True)
    _add_anneal_flags(p)
    p = leaf(
        rsub, "symmetric", "rank symmetric", _cmd_rank_symmetric, seed=True, threads=True
    )
    _add_anneal_flags(p)
    p = leaf(rsub, "grid", "rank grid", _cmd_rank_grid)
    p.add_argument("--target", required=True, help="8-qubit sector state or token")
    p.add_argument("--pivot", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    triples = top.add_parser("triples", help="Gaussian linear-dependence triples")
    tsub = triples.add_subparsers(dest="subcommand", required=True)
    p = leaf(tsub, "build", "triples build", _cmd_triples_build)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--anchor", type=int, default=3, help="weight-2 anchor label")
    p.add_argument(
        "--free",
        action="append",
        default=[],
        metavar="LABEL=RE[,IM]",
        help="free amplitude, repeatable",
    )
    p = leaf(tsub, "dimension", "triples dimension", _cmd_triples_dimension, seed=True)
    p.add_argument("--n", type=int, required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if isinstance(code, int) else 2
    try:
        return args.handler(args)
    except AssertionError as exc:
        print(f"verdict failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
