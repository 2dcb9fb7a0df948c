"""Case files: JSON descriptions of inequality checks.

A file holds one case object, a list of them, or ``{"cases": [...]}``.
Fields: ``case_id``, ``theorem``, ``p``, ``q``, ``a``, ``b``, ``epsilon``,
``group``, ``norm``, ``weights`` (``{"u": ..., "v": ...}``),
``test_function`` (an id or a list of ids) and ``quadrature``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .catalog import make_test_function, parse_id
from .groups import DomainError, GroupSpec, Law, NormKind, QuasiNorm
from .inequalities import CaseError, InequalityCase, Theorem
from .operators import TestFunction
from .quadrature import QuadratureConfig
from .weights import Weight

__all__ = ["CaseSpec", "bundled_case", "build_norm", "build_weight", "load_cases"]

_KNOWN = {"case_id", "theorem", "p", "q", "a", "b", "epsilon", "group", "norm",
          "norm_exponent", "weights", "test_function", "quadrature"}
_QUAD_KEYS = {"rel_tol", "abs_tol", "max_subdivisions", "mc_samples"}


def _group(spec: str) -> GroupSpec:
    s = spec.strip().replace(" ", "")
    low = s.lower()
    if low in ("half_line", "halfline", "(0,inf)"):
        return GroupSpec.half_line()
    if low in ("h1", "h^1", "heisenberg"):
        return GroupSpec.heisenberg()
    if low == "r":
        return GroupSpec.euclidean(1)
    m = re.fullmatch(r"r\^?(\d+)", low) or re.fullmatch(r"euclidean\((\d+)\)", low)
    if m:
        return GroupSpec.euclidean(int(m.group(1)))
    name, args = parse_id(s)
    if name.lower() == "anisotropic" and args:
        return GroupSpec.abelian(*args)
    raise DomainError(f"unknown group {spec!r}")


def build_norm(group: str, norm: str | None = None, exponent: int | None = None) -> QuasiNorm:
    g = _group(group)
    if norm is None:
        norm = {Law.HALF_LINE: "half_line", Law.HEISENBERG: "koranyi"}.get(
            g.law, "euclidean" if g.isotropic else "anisotropic")
    kind = {"anisotropic": NormKind.ANISOTROPIC_LP, "anisotropic_lp": NormKind.ANISOTROPIC_LP,
            "koranyi": NormKind.KORANYI, "euclidean": NormKind.EUCLIDEAN_HOMOGENEOUS,
            "half_line": NormKind.HALF_LINE}.get(norm.lower())
    if kind is None:
        raise DomainError(f"unknown norm {norm!r}")
    return QuasiNorm(kind, g, exponent)


def build_weight(spec) -> Weight:
    if isinstance(spec, (int, float)) and spec == 1:
        return Weight.one()
    if not isinstance(spec, str):
        raise DomainError(f"weight must be an id string, got {spec!r}")
    name, args = parse_id(spec)
    if name == "one" and not args:
        return Weight.one()
    if name == "ball_power" and len(args) == 1:
        return Weight.ball_power(args[0])
    if name == "norm_power" and len(args) == 1:
        return Weight.norm_power(args[0])
    raise DomainError(f"unknown weight {spec!r}")


@dataclass
class CaseSpec:
    """A parsed case: a template plus the test functions to run it on."""

    case_id: str
    raw: dict
    norm: QuasiNorm
    functions: list[str]

    def instantiate(self, f_id: str, seed: int, overrides: dict | None = None,
                    quad: dict | None = None) -> InequalityCase:
        raw = {**self.raw, **(overrides or {})}
        norm = self.norm
        return _case_from(raw, norm, make_test_function(f_id, norm), self.case_id, seed, quad)

    def test_function(self, f_id: str) -> TestFunction:
        return make_test_function(f_id, self.norm)


def _num(raw, key, default):
    val = raw.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise CaseError(key, f"expected a finite number, got {val!r}")
    return float(val)


def _case_from(raw: dict, norm: QuasiNorm, f: TestFunction, case_id: str, seed: int,
               quad: dict | None) -> InequalityCase:
    try:
        theorem = Theorem(raw.get("theorem"))
    except ValueError:
        raise CaseError("theorem", f"unknown theorem tag {raw.get('theorem')!r}") from None
    weights = raw.get("weights") or {}
    if not isinstance(weights, dict):
        raise CaseError("weights", "expected an object with keys u and v")
    u = v = None
    for key in weights:
        if key not in ("u", "v"):
            raise CaseError(f"weights.{key}", "unknown weight key")
    try:
        if "u" in weights:
            u = build_weight(weights["u"])
        if "v" in weights:
            v = build_weight(weights["v"])
    except DomainError as exc:
        bad = "weights.u" if u is None and "u" in weights else "weights.v"
        raise CaseError(bad, str(exc)) from None
    qd = {**(raw.get("quadrature") or {}), **(quad or {})}
    for key in qd:
        if key not in _QUAD_KEYS:
            raise CaseError(f"quadrature.{key}", "unknown quadrature setting")
    try:
        cfg = QuadratureConfig(seed=seed, stream=case_id, **qd)
    except (TypeError, ValueError) as exc:
        raise CaseError("quadrature", str(exc)) from None
    return InequalityCase(
        theorem=theorem, norm=norm, f=f,
        p=_num(raw, "p", 1.0), q=_num(raw, "q", 1.0), a=_num(raw, "a", 0.0),
        b=_num(raw, "b", 0.0), eps=_num(raw, "epsilon", 1.0), u=u, v=v, cfg=cfg,
        case_id=case_id)


def parse_case(raw: dict, index: int = 0) -> CaseSpec:
    if not isinstance(raw, dict):
        raise CaseError(f"cases[{index}]", "expected an object")
    for key in raw:
        if key not in _KNOWN:
            raise CaseError(key, "unknown field")
    case_id = str(raw.get("case_id", f"case{index}"))
    if "group" not in raw:
        raise CaseError("group", "missing")
    try:
        norm = build_norm(str(raw["group"]), raw.get("norm"), raw.get("norm_exponent"))
    except DomainError as exc:
        raise CaseError("group/norm", str(exc)) from None
    fs = raw.get("test_function", [])
    fs = [fs] if isinstance(fs, str) else list(fs)
    spec = CaseSpec(case_id, {**raw, "case_id": case_id}, norm, [str(x) for x in fs])
    # validate eagerly so configuration errors surface before any work
    for f_id in spec.functions:
        try:
            spec.test_function(f_id)
        except DomainError as exc:
            raise CaseError("test_function", str(exc)) from None
    probe = spec.functions[0] if spec.functions else "const(1)"
    spec.instantiate(probe, 0)
    return spec


def load_cases(path: str | Path) -> list[CaseSpec]:
    text = _read(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseError("file", f"{path}: invalid JSON ({exc})") from None
    if isinstance(data, dict) and "cases" in data:
        data = data["cases"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise CaseError("file", f"{path}: expected a case object or a list")
    out = []
    for i, raw in enumerate(data):
        try:
            out.append(parse_case(raw, i))
        except CaseError as exc:
            cid = raw.get("case_id", f"cases[{i}]") if isinstance(raw, dict) else f"cases[{i}]"
            raise CaseError(f"{cid}.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    return out


def _read(path) -> str:
    p = str(path)
    if p.startswith("bundled:"):
        return bundled_case(p.split(":", 1)[1])
    return Path(p).read_text()


def bundled_case(name: str) -> str:
    """Text of a case file shipped with the package, e.g. ``knopp.json``."""
    return resources.files("lclgroups").joinpath("cases", name).read_text()
