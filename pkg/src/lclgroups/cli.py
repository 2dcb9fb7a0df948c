"""Command-line batch driver.

    lcl-verify run   --cases FILE... [--out DIR] [--seed N] [--jobs N]
    lcl-verify sweep --cases FILE --param NAME --values V... [--out DIR]

Exit status: 0 when every verdict holds, 2 when some inequality is violated
beyond its error budget, 1 on configuration or evaluation errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .cases import CaseSpec, load_cases, parse_case
from .groups import DomainError
from .inequalities import CaseError, Theorem, VacuousInequality, verify
from .quadrature import IntegrationError

SCHEMA_VERSION = "1.0"
COLUMNS = ["case_id", "theorem", "test_function", "ratio", "lower_const", "upper_const",
           "functional", "pass", "lhs", "rhs", "err_budget", "notes"]
SWEEP_PARAMS = ("epsilon", "a", "b", "p", "q", "delta", "lambda")
EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 1, 2


@dataclass(frozen=True)
class RunManifest:
    case_paths: tuple[str, ...]
    seed: int = 0
    out: str = "lcl-report"
    rel_tol: float | None = None
    mc_samples: int | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.seed < 0:
            raise CaseError("seed", "must be non-negative")
        if self.jobs < 1:
            raise CaseError("jobs", "must be positive")

    @property
    def quad_overrides(self) -> dict:
        out = {}
        if self.rel_tol is not None:
            out["rel_tol"] = self.rel_tol
        if self.mc_samples is not None:
            out["mc_samples"] = self.mc_samples
        return out


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _verdict(passed) -> str:
    return {True: "true", False: "false", None: "n/a"}[passed]


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


# workers run in separate processes, so they take plain data ---------------

def _run_one(job: tuple) -> dict:
    raw, index, f_id, seed, quad, overrides = job
    spec = parse_case(raw, index)
    row = {"case_id": spec.case_id, "test_function": f_id,
           "theorem": str(raw.get("theorem"))}
    try:
        case = spec.instantiate(f_id, seed, overrides, quad)
        row["theorem"] = case.theorem.value
        rep = verify(case)
    except (IntegrationError, VacuousInequality, DomainError, ArithmeticError) as exc:
        row.update(pass_="error", notes=str(exc).splitlines()[0])
        return row
    row.update(ratio=rep.ratio, lower_const=rep.lower_const, upper_const=rep.upper_const,
               functional=rep.functional, pass_=_verdict(rep.passed), lhs=rep.lhs,
               rhs=rep.rhs, err_budget=rep.err_budget, notes=rep.notes)
    return row


def _map(jobs: list, n_jobs: int) -> list:
    if n_jobs <= 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_run_one, jobs))


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get("pass_" if c == "pass" else c)) for c in columns])
    path.write_text(buf.getvalue())


def _write_json(path: Path, payload: dict) -> None:
    def clean(o):
        if isinstance(o, dict):
            return {("pass" if k == "pass_" else k): clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return _jsonable(o)

    path.write_text(json.dumps(clean({"schema_version": SCHEMA_VERSION, **payload}),
                               indent=2, sort_keys=True) + "\n")


def _exit_status(rows: list[dict]) -> int:
    verdicts = [r.get("pass_") for r in rows]
    if "false" in verdicts:
        return EXIT_VIOLATION
    if "error" in verdicts:
        return EXIT_CONFIG
    return EXIT_OK


def _specs(m: RunManifest) -> list[CaseSpec]:
    specs = []
    for p in m.case_paths:
        specs.extend(load_cases(p))
    return specs


def _jobs_for(spec: CaseSpec, m: RunManifest, overrides=None) -> list[tuple]:
    index = 0
    return [(spec.raw, index, f_id, m.seed, m.quad_overrides, overrides or {})
            for f_id in spec.functions]


def run(m: RunManifest) -> int:
    specs = _specs(m)
    jobs = [j for s in specs for j in _jobs_for(s, m)]
    rows = _map(jobs, m.jobs)
    rows.sort(key=lambda r: r["case_id"])  # stable: function order kept within a case
    out = Path(m.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "report.csv", rows, COLUMNS)
    _write_json(out / "report.json", {"kind": "run", "seed": m.seed, "rows": rows})
    return _exit_status(rows)


def _sweep_overrides(spec: CaseSpec, param: str, value: float) -> dict:
    ov = {param: value}
    if spec.raw.get("theorem") == Theorem.KNOPP.value and param in ("epsilon", "a"):
        # Knopp is the a=0, ε=1 member of the half-line family
        ov["theorem"] = Theorem.LEVIN2_1D.value
    return ov


def sweep(m: RunManifest, param: str, values: list[float]) -> int:
    if param not in SWEEP_PARAMS:
        raise CaseError("param", f"must be one of {', '.join(SWEEP_PARAMS)}")
    if not values:
        raise CaseError("values", "need at least one value")
    specs = _specs(m)
    out = Path(m.out)
    out.mkdir(parents=True, exist_ok=True)
    if param == "delta":
        return _sweep_delta(specs, m, values, out)
    if param == "lambda":
        return _sweep_lambda(specs, m, values, out)
    jobs, tags = [], []
    for spec in specs:
        for v in values:
            ov = _sweep_overrides(spec, param, v)
            # surface bad values as configuration errors up front
            spec.instantiate(spec.functions[0] if spec.functions else "const(1)", m.seed, ov,
                             m.quad_overrides)
            for j in _jobs_for(spec, m, ov):
                jobs.append(j)
                tags.append(v)
    rows = _map(jobs, m.jobs)
    for r, v in zip(rows, tags):
        r["param"], r["value"] = param, v
    summary = []
    for spec in specs:
        mine = [r for r in rows if r["case_id"] == spec.case_id and isinstance(r.get("ratio"), float)
                and math.isfinite(r["ratio"])]
        if mine:
            best = max(mine, key=lambda r: r["ratio"])
            verdicts = {r.get("pass_") for r in rows if r["case_id"] == spec.case_id}
            summary.append({"case_id": spec.case_id, "theorem": best["theorem"],
                            "test_function": "max", "param": param, "value": best["value"],
                            "ratio": best["ratio"],
                            "pass_": "false" if "false" in verdicts else best.get("pass_"),
                            "notes": f"max ratio at {param}={best['value']:g} "
                                     f"({best['test_function']})"})
    cols = ["case_id", "param", "value"] + COLUMNS[1:]
    _write_csv(out / f"sweep_{param}.csv", rows + summary, cols)
    _write_json(out / f"sweep_{param}.json",
                {"kind": "sweep", "param": param, "values": list(values), "seed": m.seed,
                 "rows": rows, "summary": summary})
    return _exit_status(rows)


def _sweep_delta(specs, m, values, out: Path) -> int:
    from .sharpness import sharpness_sweep

    rows, summary = [], []
    for spec in specs:
        case = spec.instantiate("const(1)", m.seed, None, m.quad_overrides)
        rep = sharpness_sweep(case, values)
        for r in rep.rows():
            rows.append({"case_id": spec.case_id, **r})
        summary.append({"case_id": spec.case_id, "extrapolated_limit": rep.extrapolated_limit,
                        "target": rep.target, "rel_gap": rep.rel_gap,
                        "lower_const": rep.bracket[0], "upper_const": rep.bracket[1]})
    _write_csv(out / "sweep_delta.csv", rows, ["case_id", "delta", "lhs", "rhs", "ratio", "err"])
    _write_json(out / "sweep_delta.json", {"kind": "sweep", "param": "delta", "seed": m.seed,
                                           "rows": rows, "summary": summary})
    bad = any(r["ratio"] > s["upper_const"] * (1 + r["err"])
              for s in summary for r in rows if r["case_id"] == s["case_id"])
    return EXIT_VIOLATION if bad else EXIT_OK


def _sweep_lambda(specs, m, values, out: Path) -> int:
    from .sharpness import dilation_blowup

    rows, summary = [], []
    for spec in specs:
        for f_id in spec.functions:
            case = spec.instantiate(f_id, m.seed, None, m.quad_overrides)
            res = dilation_blowup(case, values)
            for lam, ratio in res.points:
                rows.append({"case_id": spec.case_id, "test_function": f_id,
                             "lambda": lam, "ratio": ratio})
            summary.append({"case_id": spec.case_id, "test_function": f_id,
                            "slope": res.slope, "predicted": res.predicted,
                            "dropped": res.dropped})
    _write_csv(out / "sweep_lambda.csv", rows, ["case_id", "test_function", "lambda", "ratio"])
    _write_json(out / "sweep_lambda.json", {"kind": "sweep", "param": "lambda", "seed": m.seed,
                                            "rows": rows, "summary": summary})
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lcl-verify", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--cases", nargs="*", default=[], metavar="PATH",
                       help="case files; 'bundled:NAME' picks a shipped file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="lcl-report")
        p.add_argument("--rel-tol", type=float, default=None)
        p.add_argument("--mc-samples", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1)

    common(sub.add_parser("run", help="verify every case and test function"))
    sw = sub.add_parser("sweep", help="vary one parameter of the base cases")
    common(sw)
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sw.add_argument("--values", type=float, nargs="+", required=True)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    seed = args.seed
    env = os.environ.get("LCL_SEED")
    try:
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                raise CaseError("LCL_SEED", f"not an integer: {env!r}") from None
        m = RunManifest(tuple(args.cases), seed, args.out, args.rel_tol, args.mc_samples,
                        args.jobs)
        if args.command == "run":
            return run(m)
        return sweep(m, args.param, args.values)
    except CaseError as exc:
        print(f"configuration error in {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
