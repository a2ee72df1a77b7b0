"""Command-line interface.

Four subcommands tie the library together:

``explain``
    Shapley decomposition and interaction matrix of every observation.
``detect``
    Cellwise detection/imputation with SCD or MOE.
``simulate``
    Deterministic contamination sweeps with precision/recall/F-score output.
``report``
    Re-render figures from a stored result file without recomputation.

Data files are UTF-8 CSV with a header row and '.' decimals; the model
center is a single-column CSV and the covariance a headerless square CSV.
Reports are JSON with an explicit ``schema_version``; figures are rendered
to SVG files alongside the report when ``--svg`` is given.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import plots
from .cellwise import moe, scd
from .distributions import chi2_quantile
from .errors import (
    DegenerateColumn,
    DimensionMismatch,
    DimensionTooLarge,
    EmptySubset,
    IndexOutOfRange,
    IndexOverlap,
    InsufficientRows,
    InvalidLevel,
    MissingResults,
    NegativeLambda,
    NonFinite,
    NotPositiveDefinite,
    ParseError,
    SchemaVersionMismatch,
    ShapeMismatch,
    SingularSubproblem,
)
from .estimation import (
    StandardizationPlan,
    load_model,
    robust_standardize,
    sample_covariance,
    unstandardize,
)
from .linmodel import build_model
from .shapley import interaction_matrix, shapley_value
from .simulation import COV_KINDS, DETECTORS, GridConfig, aggregate, run_grid

SCHEMA_VERSION = 1

_DATA_ERRORS = (
    ParseError,
    DimensionMismatch,
    ShapeMismatch,
    NonFinite,
    DegenerateColumn,
    InsufficientRows,
    IndexOutOfRange,
    IndexOverlap,
    EmptySubset,
    MissingResults,
    SchemaVersionMismatch,
)
_NUMERIC_ERRORS = (
    NotPositiveDefinite,
    SingularSubproblem,
    NegativeLambda,
    DimensionTooLarge,
    InvalidLevel,
    np.linalg.LinAlgError,
)


class UsageError(Exception):
    """Raised for bad flag combinations; mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we want exit(1)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# file handling

def read_data_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a headered numeric CSV into column names and an n x p matrix."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read data file {path}: {exc}") from exc
    reader = csv.reader(text.splitlines())
    rows = [row for row in reader if any(field.strip() for field in row)]
    if not rows:
        return [], np.empty((0, 0))
    header = [h.strip() for h in rows[0]]
    p = len(header)
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != p:
            raise ParseError(f"{path}:{lineno}: expected {p} fields, got {len(row)}")
        try:
            data.append([float(f) for f in row])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: not numeric") from exc
    X = np.asarray(data, dtype=float) if data else np.empty((0, p))
    return header, X


def _write_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out is None:
        sys.stdout.write(text + "\n")
    else:
        Path(out).write_text(text + "\n", encoding="utf-8")


def _jlist(arr) -> list:
    return np.asarray(arr, dtype=float).tolist()


# ---------------------------------------------------------------------------
# model resolution

def _parse_transforms(specs: list[str] | None, header: list[str]) -> dict[int, str]:
    """Map ``column:log`` flags to column indices."""
    out: dict[int, str] = {}
    for item in specs or []:
        name, sep, kind = item.partition(":")
        if not sep or kind not in ("log", "none"):
            raise UsageError(f"--transform expects COLUMN:log or COLUMN:none, got {item!r}")
        if name in header:
            j = header.index(name)
        else:
            try:
                j = int(name)
            except ValueError:
                raise UsageError(f"--transform column {name!r} not found") from None
            if not 0 <= j < len(header):
                raise UsageError(f"--transform column index {j} out of range")
        out[j] = kind
    return out


def _apply_transforms(X: np.ndarray, transforms: dict[int, str]) -> np.ndarray:
    if not transforms:
        return X
    X = X.copy()
    for j, kind in transforms.items():
        if kind == "log":
            col = X[:, j]
            if np.any(col <= 0):
                raise NonFinite(f"column {j} has non-positive values; cannot log-transform")
            X[:, j] = np.log(col)
    return X


def _resolve_model(args, X: np.ndarray):
    """Return (model, working matrix, standardization plan or None)."""
    external = args.mu is not None or args.sigma is not None
    if external and args.estimate:
        raise UsageError("give either --mu/--sigma or --estimate, not both")
    if external:
        if args.mu is None or args.sigma is None:
            raise UsageError("--mu and --sigma must be given together")
        model = load_model(args.mu, args.sigma)
        if X.shape[1] != model.p:
            raise DimensionMismatch(
                f"data has {X.shape[1]} columns but the model is {model.p}-dimensional"
            )
        return model, X, None
    if args.estimate == "sample":
        model = build_model(X.mean(axis=0), sample_covariance(X))
        return model, X, None
    if args.estimate == "standardize":
        Z, plan = robust_standardize(X)
        model = build_model(np.zeros(X.shape[1]), sample_covariance(Z))
        return model, Z, plan
    raise UsageError("a model source is required: --mu/--sigma or --estimate")


def _back_transform(row: np.ndarray, plan: StandardizationPlan | None,
                    transforms: dict[int, str]) -> np.ndarray:
    """Map a vector from the working space back to original data units."""
    out = np.asarray(row, dtype=float)
    if plan is not None:
        out = unstandardize(out, plan)
    if transforms:
        out = out.copy()
        for j, kind in transforms.items():
            if kind == "log":
                out[j] = math.exp(out[j])
    return out


def _svg_base(args) -> Path:
    if args.out is None:
        raise UsageError("--svg requires --out to name the figure files")
    base = Path(args.out)
    return base.with_suffix("") if base.suffix else base


# ---------------------------------------------------------------------------
# subcommands

def cmd_explain(args) -> int:
    header, X = read_data_csv(args.input)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "explain",
        "level": args.level,
        "columns": header,
        "transforms": args.transform or [],
        "standardized": args.estimate == "standardize",
        "rows": [],
    }
    if X.shape[0] == 0:
        _write_json(report, args.out)
        return 0

    transforms = _parse_transforms(args.transform, header)
    X = _apply_transforms(X, transforms)
    model, Z, _plan = _resolve_model(args, X)
    cut = chi2_quantile(model.p, args.level)
    report["cutoff"] = cut

    for i, row in enumerate(Z):
        try:
            expl = shapley_value(row, model)
            inter = interaction_matrix(row, model)
            report["rows"].append(
                {
                    "index": i,
                    "md2": expl.total,
                    "phi": _jlist(expl.phi),
                    "interaction": [_jlist(r) for r in inter.Phi],
                    "cutoff": cut,
                    "outlier": bool(expl.total > cut),
                }
            )
        except _DATA_ERRORS + _NUMERIC_ERRORS as exc:
            report["rows"].append({"index": i, "error": str(exc)})

    _write_json(report, args.out)
    if args.svg:
        base = _svg_base(args)
        for row in report["rows"]:
            if "error" in row:
                continue
            i = row["index"]
            plots.save_contribution_bar(
                np.asarray(row["phi"]), row["md2"], cut,
                f"{base}_row{i}_contrib.svg", labels=header,
            )
            plots.save_interaction_heatmap(
                np.asarray(row["interaction"]),
                f"{base}_row{i}_interactions.svg", labels=header,
            )
    return 0


def cmd_detect(args) -> int:
    if args.algorithm is None:
        raise UsageError("--algorithm {scd,moe} is required for detect")
    header, X = read_data_csv(args.input)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "detect",
        "algorithm": args.algorithm,
        "level": args.level,
        "delta": args.delta,
        "eta": args.eta,
        "columns": header,
        "transforms": args.transform or [],
        "standardized": args.estimate == "standardize",
        "rows": [],
        "summary": {},
    }
    if X.shape[0] == 0:
        _write_json(report, args.out)
        return 0

    transforms = _parse_transforms(args.transform, header)
    Xw = _apply_transforms(X, transforms)
    model, Z, plan = _resolve_model(args, Xw)

    n, p = Z.shape
    flag_mask = np.zeros((n, p), dtype=bool)
    phi_rows = np.zeros((n, p))
    for i, row in enumerate(Z):
        try:
            if args.algorithm == "scd":
                res = scd(row, model, delta=args.delta, level=args.level)
            else:
                res = moe(row, model, delta=args.delta, eta=args.eta, level=args.level)
        except _DATA_ERRORS + _NUMERIC_ERRORS as exc:
            report["rows"].append({"index": i, "error": str(exc)})
            continue
        if res.S:
            flag_mask[i, list(res.S)] = True
        phi_rows[i] = res.phi_final.phi
        entry = {
            "index": i,
            "S": [int(j) for j in res.S],
            "columns_flagged": [header[j] for j in res.S],
            "x_tilde": _jlist(_back_transform(res.x_tilde, plan, transforms)),
            "mu_tilde": _jlist(_back_transform(res.mu_tilde, plan, transforms)),
            "d": _jlist(res.d),
            "phi_final": _jlist(res.phi_final.phi),
            "md2_final": res.phi_final.total,
            "status": res.status,
            "cutoff": res.cutoff,
        }
        if args.history:
            entry["history"] = [
                {"iteration": s.iteration, "phi": _jlist(s.phi), "md2": s.md2}
                for s in res.history
            ]
        report["rows"].append(entry)

    report["summary"] = {
        "cells_flagged_per_column": {
            header[j]: int(flag_mask[:, j].sum()) for j in range(p)
        },
        "cells_flagged_per_row": [int(c) for c in flag_mask.sum(axis=1)],
        "rows_with_flags": int((flag_mask.any(axis=1)).sum()),
    }
    _write_json(report, args.out)

    if args.svg:
        base = _svg_base(args)
        plots.save_cell_tilemap(phi_rows, flag_mask, f"{base}_cells.svg", labels=header)
        if args.history:
            for row in report["rows"]:
                if "history" in row:
                    plots.save_history_bars(
                        [(s["iteration"], s["phi"], s["md2"]) for s in row["history"]],
                        row["cutoff"],
                        f"{base}_row{row['index']}_history.svg",
                        labels=header,
                    )
    return 0


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated number list, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from None


def cmd_simulate(args) -> int:
    config = GridConfig(
        scenario=args.scenario,
        ps=_ints(args.p),
        cov_kinds=tuple(k.strip() for k in args.cov.split(",") if k.strip()),
        gammas=_floats(args.gamma),
        eps1s=_floats(args.eps1),
        eps2s=_floats(args.eps2),
        eps3s=_floats(args.eps3),
        replications=args.reps,
        seed=args.seed,
        delta=args.delta,
        eta=args.eta,
        level=args.level,
    )
    for kind in config.cov_kinds:
        if kind not in COV_KINDS:
            raise UsageError(f"unknown covariance kind {kind!r}")
    rows = run_grid(config)
    table = [
        {
            "scenario": r.case.scenario,
            "cov_kind": r.case.cov_kind,
            "p": r.case.p,
            "n": r.case.n,
            "eps1": r.case.eps1,
            "eps2": r.case.eps2,
            "eps3": r.case.eps3,
            "gamma": r.case.gamma,
            "replication": r.case.replication,
            "detector": r.detector,
            "precision": r.precision,
            "recall": r.recall,
            "fscore": r.fscore,
            "error": r.error,
        }
        for r in rows
    ]
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "seed": args.seed,
        "config": {
            "scenario": args.scenario,
            "cov_kinds": list(config.cov_kinds),
            "ps": list(config.ps),
            "gammas": list(config.gammas),
            "eps1s": list(config.eps1s),
            "eps2s": list(config.eps2s),
            "eps3s": list(config.eps3s),
            "replications": config.replications,
            "delta": config.delta,
            "eta": config.eta,
            "level": config.level,
        },
        "table": table,
        "aggregates": aggregate(rows),
    }
    _write_json(payload, args.out)
    if args.out is not None:
        csv_path = Path(args.out).with_suffix(".csv")
        fields = list(table[0].keys()) if table else []
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            writer.writerows(table)
    if args.svg:
        base = _svg_base(args)
        plots.save_metric_bars(payload["aggregates"], f"{base}_metrics.svg")
    return 0


def _load_report(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise MissingResults(f"result file {p} does not exist")
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaVersionMismatch(f"{p} is not a readable report: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"{p}: expected schema_version {SCHEMA_VERSION}, "
            f"got {payload.get('schema_version') if isinstance(payload, dict) else 'none'}"
        )
    return payload


def cmd_report(args) -> int:
    payload = _load_report(args.input)
    outdir = Path(args.out) if args.out else Path(args.input).parent
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    command = payload.get("command")
    made = []

    if command == "explain":
        labels = payload.get("columns") or None
        for row in payload.get("rows", []):
            if "error" in row:
                continue
            i = row["index"]
            made.append(plots.save_contribution_bar(
                np.asarray(row["phi"]), row["md2"], row["cutoff"],
                str(outdir / f"{stem}_row{i}_contrib.svg"), labels=labels,
            ))
            made.append(plots.save_interaction_heatmap(
                np.asarray(row["interaction"]),
                str(outdir / f"{stem}_row{i}_interactions.svg"), labels=labels,
            ))
    elif command == "detect":
        labels = payload.get("columns") or None
        rows = [r for r in payload.get("rows", []) if "error" not in r]
        if rows:
            p = len(rows[0]["phi_final"])
            n = max(r["index"] for r in rows) + 1
            phi_rows = np.zeros((n, p))
            mask = np.zeros((n, p), dtype=bool)
            for r in rows:
                phi_rows[r["index"]] = r["phi_final"]
                mask[r["index"], r["S"]] = True
            made.append(plots.save_cell_tilemap(
                phi_rows, mask, str(outdir / f"{stem}_cells.svg"), labels=labels,
            ))
            for r in rows:
                if "history" in r:
                    made.append(plots.save_history_bars(
                        [(s["iteration"], s["phi"], s["md2"]) for s in r["history"]],
                        r["cutoff"],
                        str(outdir / f"{stem}_row{r['index']}_history.svg"),
                        labels=labels,
                    ))
    elif command == "simulate":
        made.append(plots.save_metric_bars(
            payload.get("aggregates", []), str(outdir / f"{stem}_metrics.svg"),
        ))
    else:
        raise SchemaVersionMismatch(f"unknown report command {command!r}")

    for path in made:
        sys.stdout.write(path + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser assembly

def _add_model_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--input", required=True, help="data CSV with header row")
    sub.add_argument("--mu", help="center vector, single-column CSV")
    sub.add_argument("--sigma", help="covariance matrix, headerless square CSV")
    sub.add_argument(
        "--estimate",
        choices=("sample", "standardize"),
        help="estimate the model from the data instead of --mu/--sigma",
    )
    sub.add_argument(
        "--transform",
        action="append",
        metavar="COLUMN:log",
        help="per-column transform applied before standardization (repeatable)",
    )
    sub.add_argument("--level", type=float, default=0.99, help="cutoff level")
    sub.add_argument("--out", help="report JSON path (default: stdout)")
    sub.add_argument("--svg", action="store_true", help="render figures next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdshapley", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p_explain = subs.add_parser("explain", help="Shapley explanation per observation")
    _add_model_flags(p_explain)
    p_explain.set_defaults(func=cmd_explain)

    p_detect = subs.add_parser("detect", help="cellwise outlier detection/imputation")
    _add_model_flags(p_detect)
    p_detect.add_argument("--algorithm", choices=DETECTORS, help="detector to run")
    p_detect.add_argument("--delta", type=float, default=0.1, help="shift step size")
    p_detect.add_argument("--eta", type=float, default=0.2, help="flagging threshold")
    p_detect.add_argument("--history", action="store_true",
                          help="include iteration history in the report")
    p_detect.set_defaults(func=cmd_detect)

    p_sim = subs.add_parser("simulate", help="contamination sweep with metrics")
    p_sim.add_argument("--scenario", required=True, choices=("shift", "structured"))
    p_sim.add_argument("--cov", default="mod,mix,low", help="covariance kinds")
    p_sim.add_argument("--p", default="10", help="dimensions, comma separated")
    p_sim.add_argument("--gamma", default="1", help="outlyingness magnitudes")
    p_sim.add_argument("--eps1", default="0.1", help="outlying column fractions")
    p_sim.add_argument("--eps2", default="0.1", help="outlying row fractions")
    p_sim.add_argument("--eps3", default="0.1", help="outlying cell fractions")
    p_sim.add_argument("--reps", type=int, default=10, help="replications")
    p_sim.add_argument("--seed", type=int, default=0, help="master seed")
    p_sim.add_argument("--delta", type=float, default=0.1)
    p_sim.add_argument("--eta", type=float, default=0.2)
    p_sim.add_argument("--level", type=float, default=0.99)
    p_sim.add_argument("--out", help="report JSON path; CSV table written alongside")
    p_sim.add_argument("--svg", action="store_true")
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = subs.add_parser("report", help="render figures from a stored report")
    p_rep.add_argument("--input", required=True, help="stored report JSON")
    p_rep.add_argument("--out", help="output directory (default: next to input)")
    p_rep.set_defaults(func=cmd_report)

    return parser


def _validate_ranges(args) -> None:
    if getattr(args, "svg", False) and getattr(args, "out", None) is None:
        raise UsageError("--svg requires --out to name the figure files")
    level = getattr(args, "level", None)
    if level is not None and not 0.0 < level < 1.0:
        raise UsageError(f"--level must lie in (0, 1), got {level}")
    delta = getattr(args, "delta", None)
    if delta is not None and not 0.0 < delta <= 1.0:
        raise UsageError(f"--delta must lie in (0, 1], got {delta}")
    eta = getattr(args, "eta", None)
    if eta is not None and not 0.0 <= eta <= 1.0:
        raise UsageError(f"--eta must lie in [0, 1], got {eta}")


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        _validate_ranges(args)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
