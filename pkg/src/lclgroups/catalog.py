"""Test functions addressable by id, e.g. ``const(2)`` or ``power(-0.5)``."""

from __future__ import annotations

import math
import re

import numpy as np

from .groups import DomainError, QuasiNorm, ball_volume, log_ball_volume
from .operators import TestFunction

__all__ = ["CATALOG", "make_test_function", "parse_id"]

_ID = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def parse_id(spec: str) -> tuple[str, tuple[float, ...]]:
    m = _ID.match(spec)
    if not m:
        raise DomainError(f"malformed test function id {spec!r}")
    name, args = m.group(1), m.group(2)
    if args is None or not args.strip():
        return name, ()
    try:
        return name, tuple(float(a) for a in args.split(","))
    except ValueError:
        raise DomainError(f"non-numeric argument in test function id {spec!r}") from None


def _const(n, c=1.0):
    if not c > 0:
        raise DomainError("const(c) needs c > 0")
    lc = math.log(c)
    return TestFunction(f"const({c:g})", True, lambda r: lc)


def _exp_decay(n):
    return TestFunction("exp_decay", True, lambda r: -r)


def _gauss(n):
    return TestFunction("gauss", True, lambda r: -r * r)


def _power(n, gamma):
    return TestFunction(f"power({gamma:g})", True, lambda r: gamma * math.log(r))


def _ball_power(n, s):
    return TestFunction(f"ball_power({s:g})", True, lambda r: s * log_ball_volume(n, r))


def _exp_ball(n):
    # exp(-|B(0,|y|)|)
    return TestFunction("exp_ball", True, lambda r: -ball_volume(n, r))


def _shifted_norm(n):
    return TestFunction("shifted_norm", True, lambda r: math.log1p(r))


def _min_one_power(n, k):
    # min(1, |x|^{-k})
    return TestFunction(f"min_one_power({k:g})", True,
                        lambda r: -k * math.log(r) if r > 1 else 0.0, breakpoints=(1.0,))


def _love_tail(n):
    # exp(-1/|x|) / (1 + |x|^2)
    def lp(r):
        if r > 1.0:
            return -1.0 / r - 2.0 * math.log(r) - math.log1p(1.0 / (r * r))
        return -1.0 / r - math.log1p(r * r)

    return TestFunction("love_tail", True, lp)


def _tilted_exp(n, c=0.5):
    # exp(-|x|) (1 + c tanh x_1); not radial
    if not abs(c) < 1:
        raise DomainError("tilted_exp(c) needs |c| < 1")

    def pw(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.atleast_1d(n(x))) * (1.0 + c * np.tanh(x[..., 0]))

    def lpw(x):
        x = np.asarray(x, dtype=float)
        return -np.atleast_1d(n(x)) + np.log1p(c * np.tanh(x[..., 0]))

    return TestFunction(f"tilted_exp({c:g})", False, pointwise=pw, log_pointwise=lpw)


def _indicator_ball_power(n, s, R=1.0):
    # |B(0,|x|)|^s on B(0, R), zero outside
    return TestFunction(f"indicator_ball_power({s:g},{R:g})", True,
                        lambda r: s * log_ball_volume(n, r), support_radius=R)


def _sharpness_delta(n, b, eps, p, delta):
    from .sharpness import SharpnessFamily, remark_family_eval

    return remark_family_eval(n, SharpnessFamily.remark_delta(b, eps, p), delta)


CATALOG = {
    "const": _const,
    "exp_decay": _exp_decay,
    "gauss": _gauss,
    "power": _power,
    "ball_power": _ball_power,
    "exp_ball": _exp_ball,
    "shifted_norm": _shifted_norm,
    "min_one_power": _min_one_power,
    "love_tail": _love_tail,
    "tilted_exp": _tilted_exp,
    "indicator_ball_power": _indicator_ball_power,
    "sharpness_delta": _sharpness_delta,
}


def make_test_function(spec: str, n: QuasiNorm) -> TestFunction:
    name, args = parse_id(spec)
    try:
        builder = CATALOG[name]
    except KeyError:
        raise DomainError(f"unknown test function {name!r}") from None
    try:
        return builder(n, *args)
    except TypeError:
        raise DomainError(f"wrong number of arguments for {name!r}: {args}") from None
