"""Homogeneous groups, dilations and quasi-norms.

Points are numpy arrays whose last axis has length ``ambient_dim``; every
function here is vectorised over leading axes.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy import integrate

__all__ = [
    "DomainError",
    "GroupSpec",
    "Law",
    "NormKind",
    "QuasiNorm",
    "SphereMeasureError",
    "ball_volume",
    "compute_sphere_measure",
    "dilate",
    "quasi_norm",
]


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class SphereMeasureError(RuntimeError):
    """Monte Carlo budget ran out before the target accuracy.

    The best estimate so far is kept on ``value`` and ``error``.
    """

    def __init__(self, message: str, value: float, error: float):
        super().__init__(message)
        self.value = value
        self.error = error


class Law(enum.Enum):
    ABELIAN = "abelian"
    HEISENBERG = "heisenberg"
    HALF_LINE = "half_line"


@dataclass(frozen=True)
class GroupSpec:
    """R^N with a group law and dilations D_λ(x)_i = λ^{v_i} x_i.

    ``Law.HALF_LINE`` is not a group: it is the domain (0, ∞) with Lebesgue
    measure, used for the classical one-dimensional inequalities.
    """

    dilation_exponents: tuple[float, ...]
    law: Law = Law.ABELIAN

    def __post_init__(self):
        v = tuple(float(e) for e in self.dilation_exponents)
        object.__setattr__(self, "dilation_exponents", v)
        if not v:
            raise DomainError("a group needs at least one coordinate")
        if any(not math.isfinite(e) or e <= 0 for e in v):
            raise DomainError(f"dilation exponents must be positive, got {v}")
        if self.law is Law.HEISENBERG and v != (1.0, 1.0, 2.0):
            raise DomainError("the Heisenberg group H^1 has dilation exponents (1, 1, 2)")
        if self.law is Law.HALF_LINE and v != (1.0,):
            raise DomainError("half-line mode is one-dimensional with exponent 1")

    @classmethod
    def abelian(cls, *exponents: float) -> GroupSpec:
        return cls(tuple(exponents), Law.ABELIAN)

    @classmethod
    def euclidean(cls, n: int) -> GroupSpec:
        return cls((1.0,) * n, Law.ABELIAN)

    @classmethod
    def heisenberg(cls) -> GroupSpec:
        return cls((1.0, 1.0, 2.0), Law.HEISENBERG)

    @classmethod
    def half_line(cls) -> GroupSpec:
        return cls((1.0,), Law.HALF_LINE)

    @property
    def ambient_dim(self) -> int:
        return len(self.dilation_exponents)

    @property
    def homogeneous_dim(self) -> float:
        return math.fsum(self.dilation_exponents)

    @property
    def isotropic(self) -> bool:
        return len(set(self.dilation_exponents)) == 1

    def check_points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.ambient_dim:
            raise DomainError(
                f"expected points with last axis {self.ambient_dim}, got shape {x.shape}"
            )
        return x

    def multiply(self, x, y) -> np.ndarray:
        """Group product x∘y."""
        if self.law is Law.HALF_LINE:
            raise DomainError("half-line mode has no group law")
        x, y = self.check_points(x), self.check_points(y)
        out = x + y
        if self.law is Law.HEISENBERG:
            out = out.copy()
            out[..., 2] += 0.5 * (x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0])
        return out

    def inverse(self, x) -> np.ndarray:
        # both laws built here are polynomial with x^{-1} = -x
        if self.law is Law.HALF_LINE:
            raise DomainError("half-line mode has no group law")
        return -self.check_points(x)


def dilate(g: GroupSpec, lam: float, x) -> np.ndarray:
    if not lam > 0:
        raise DomainError(f"dilation parameter must be positive, got {lam}")
    x = g.check_points(x)
    return x * np.power(lam, np.asarray(g.dilation_exponents))


class NormKind(enum.Enum):
    ANISOTROPIC_LP = "anisotropic_lp"
    KORANYI = "koranyi"
    EUCLIDEAN_HOMOGENEOUS = "euclidean"
    HALF_LINE = "half_line"


def _even_common_multiple(exponents) -> int:
    fracs = [Fraction(e).limit_denominator(10**6) for e in exponents]
    if any(abs(float(f) - e) > 1e-12 for f, e in zip(fracs, exponents)):
        raise DomainError(f"dilation exponents {exponents} are not rational")
    if any(f.denominator != 1 for f in fracs):
        raise DomainError("anisotropic L^p gauge needs integer dilation exponents")
    return reduce(math.lcm, (2 * int(f) for f in fracs))


class QuasiNorm:
    """A homogeneous gauge |·| on a group.

    Kinds:

    * ``ANISOTROPIC_LP``: (Σ |x_i|^{2ν/v_i})^{1/(2ν)}, with 2ν the least
      common multiple of the 2v_i unless given.
    * ``KORANYI``: ((x_1²+x_2²)² + x_3²)^{1/4} on H^1.
    * ``EUCLIDEAN_HOMOGENEOUS``: the ρ with Σ x_i² ρ^{-2v_i} = 1, i.e. the
      gauge whose unit ball is the Euclidean unit ball. For isotropic
      dilations this is ‖x‖^{1/v}.
    * ``HALF_LINE``: |x| = x on (0, ∞).

    The unit-sphere measure |S| is computed on first access and cached.
    """

    def __init__(self, kind: NormKind, group: GroupSpec, exponent: int | None = None):
        self.kind = NormKind(kind)
        self.group = group
        self.exponent = None
        if self.kind is NormKind.ANISOTROPIC_LP:
            self.exponent = exponent if exponent is not None else _even_common_multiple(
                group.dilation_exponents)
            ratios = [self.exponent / v for v in group.dilation_exponents]
            if any(abs(r - round(r)) > 1e-12 or round(r) % 2 for r in ratios):
                raise DomainError(
                    f"2ν={self.exponent} does not make every exponent 2ν/v_i an even integer")
        elif exponent is not None:
            raise DomainError(f"{self.kind.value} norm takes no exponent")
        if self.kind is NormKind.KORANYI and group.law is not Law.HEISENBERG:
            raise DomainError("the Korányi gauge lives on the Heisenberg group")
        if (self.kind is NormKind.HALF_LINE) != (group.law is Law.HALF_LINE):
            raise DomainError("half-line norm and half-line domain go together")
        self._lock = threading.Lock()
        self._sphere: tuple[float, float] | None = None

    @classmethod
    def euclidean(cls, n: int) -> QuasiNorm:
        return cls(NormKind.EUCLIDEAN_HOMOGENEOUS, GroupSpec.euclidean(n))

    @classmethod
    def koranyi(cls) -> QuasiNorm:
        return cls(NormKind.KORANYI, GroupSpec.heisenberg())

    @classmethod
    def anisotropic(cls, *exponents: float, exponent: int | None = None) -> QuasiNorm:
        return cls(NormKind.ANISOTROPIC_LP, GroupSpec.abelian(*exponents), exponent)

    @classmethod
    def half_line(cls) -> QuasiNorm:
        return cls(NormKind.HALF_LINE, GroupSpec.half_line())

    def __repr__(self):
        extra = f", 2ν={self.exponent}" if self.exponent else ""
        return f"QuasiNorm({self.kind.value}, v={self.group.dilation_exponents}{extra})"

    @property
    def Q(self) -> float:
        return self.group.homogeneous_dim

    @property
    def closed_form(self) -> bool:
        """True when evaluation needs no iteration."""
        return self.kind is not NormKind.EUCLIDEAN_HOMOGENEOUS or self.group.isotropic

    def __call__(self, x) -> np.ndarray | float:
        x = self.group.check_points(x)
        kind = self.kind
        if kind is NormKind.HALF_LINE:
            if np.any(x < 0):
                raise DomainError("half-line points must be non-negative")
            out = x[..., 0]
        elif kind is NormKind.KORANYI:
            # rescale by a homogeneous size first so the squares cannot underflow
            m = np.maximum(np.maximum(np.abs(x[..., 0]), np.abs(x[..., 1])),
                           np.sqrt(np.abs(x[..., 2])))
            safe = np.where(m > 0, m, 1.0)
            h = np.hypot(x[..., 0] / safe, x[..., 1] / safe) ** 2
            out = np.where(m > 0, safe * np.sqrt(np.hypot(h, x[..., 2] / safe / safe)), 0.0)
        elif kind is NormKind.ANISOTROPIC_LP:
            out = self._anisotropic(x)
        else:
            out = self._euclidean_homogeneous(x)
        return float(out) if np.ndim(out) == 0 else out

    def _anisotropic(self, x: np.ndarray) -> np.ndarray:
        e = self.exponent
        v = np.asarray(self.group.dilation_exponents)
        a = np.abs(x)
        nz = np.any(a > 0, axis=-1)
        # work with log|x_i|/v_i, shifted by its maximum, so no power over/underflows
        with np.errstate(divide="ignore"):
            logs = np.where(a > 0, np.log(a) / v, -np.inf)
        top = np.where(nz, np.max(logs, axis=-1), 0.0)
        s = np.sum(np.exp(e * (logs - top[..., None])), axis=-1)
        with np.errstate(divide="ignore"):
            return np.where(nz, np.exp(top + np.log(s) / e), 0.0)

    def _euclidean_homogeneous(self, x: np.ndarray) -> np.ndarray:
        v = np.asarray(self.group.dilation_exponents)
        if self.group.isotropic:
            m = np.max(np.abs(x), axis=-1)
            safe = np.where(m > 0, m, 1.0)
            r = safe * np.linalg.norm(x / safe[..., None], axis=-1)
            return np.where(m > 0, r, 0.0) ** (1.0 / v[0])
        a = np.abs(x)
        nz = np.any(a > 0, axis=-1)
        with np.errstate(divide="ignore"):
            logs = np.where(a > 0, np.log(a) / v, -np.inf)
        # the largest log|x_i|/v_i is a lower bound for log ρ; Newton on the
        # convex decreasing h(s) = Σ x_i² e^{-2 v_i s} - 1 then increases
        # monotonically to the root
        s = np.where(nz, np.max(logs, axis=-1), 0.0)
        # x_i² e^{-2 v_i s} in log form so subnormal coordinates cannot overflow
        logs = np.where(nz[..., None], logs, 0.0)
        for _ in range(200):
            terms = np.exp(2.0 * v * (logs - s[..., None]))
            h = np.sum(terms, axis=-1) - 1.0
            dh = -2.0 * np.sum(v * terms, axis=-1)
            step = h / dh
            s = s - step
            if np.all(np.abs(step) < 1e-15 * np.maximum(1.0, np.abs(s))):
                break
        return np.where(nz, np.exp(s), 0.0)

    # sphere measure ------------------------------------------------------

    @property
    def sphere_measure(self) -> float:
        return self.sphere_measure_with_error()[0]

    def sphere_measure_with_error(self) -> tuple[float, float]:
        if self._sphere is None:
            with self._lock:
                if self._sphere is None:
                    self._sphere = compute_sphere_measure(self)
        return self._sphere

    def set_sphere_measure(self, value: float, error: float = 0.0) -> None:
        with self._lock:
            self._sphere = (float(value), float(error))

    def unit_ball_volume(self) -> float:
        return self.sphere_measure / self.Q

    def ball_volume(self, r):
        return ball_volume(self, r)


def quasi_norm(n: QuasiNorm, x):
    return n(x)


def ball_volume(n: QuasiNorm, r):
    """|B(0, r)| = r^Q |S| / Q."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError(f"radius must be non-negative, got {r}")
    out = r ** n.Q * (n.sphere_measure / n.Q)
    return float(out) if out.ndim == 0 else out


def log_ball_volume(n: QuasiNorm, r: float) -> float:
    """log |B(0, r)|, safe for radii whose volume underflows."""
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    return n.Q * math.log(r) + math.log(n.sphere_measure / n.Q)


def _unit_ball_reduction(n: QuasiNorm) -> tuple[float, float] | None:
    """Unit-ball volume by closed form or a 1D quadrature, when one exists."""
    g = n.group
    if n.kind is NormKind.HALF_LINE:
        return 1.0, 0.0
    if n.kind is NormKind.EUCLIDEAN_HOMOGENEOUS:
        d = g.ambient_dim
        if d == 1:
            return 2.0, 0.0
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1), 0.0
    if n.kind is NormKind.KORANYI:
        # slice by ρ = sqrt(x1²+x2²): height 2 sqrt(1-ρ⁴), ring area 2πρ dρ
        val, err = integrate.quad(lambda r: 4 * math.pi * r * math.sqrt(1 - r ** 4), 0, 1,
                                  epsabs=0, epsrel=1e-13, limit=200)
        return val, err
    if n.kind is NormKind.ANISOTROPIC_LP and g.ambient_dim == 2:
        k1, k2 = (n.exponent / v for v in g.dilation_exponents)
        val, err = integrate.quad(lambda t: 4 * (1 - t ** k1) ** (1 / k2), 0, 1,
                                  epsabs=0, epsrel=1e-13, limit=200)
        return val, err
    if n.kind is NormKind.ANISOTROPIC_LP and g.ambient_dim == 1:
        return 2.0, 0.0
    return None


def compute_sphere_measure(
    n: QuasiNorm,
    budget: int = 10**8,
    *,
    method: str = "auto",
    rel_target: float = 1e-4,
    seed: int = 0,
    batch: int = 10**6,
) -> tuple[float, float]:
    """Return (|S|, error) with |S| = Q·|B(0, 1)|.

    ``method="auto"`` prefers a closed form, then a 1D reduction, then Monte
    Carlo rejection over the unit box [-1, 1]^N (which contains B(0, 1) for
    every gauge built here). ``method="mc"`` forces the Monte Carlo path;
    its error is one standard error and ``budget`` caps the sample count.
    """
    Q = n.Q
    if method not in ("auto", "mc"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        reduced = _unit_ball_reduction(n)
        if reduced is not None:
            vol, err = reduced
            return Q * vol, Q * err
    if n.kind is NormKind.HALF_LINE:
        return 1.0, 0.0
    dim = n.group.ambient_dim
    box = 2.0 ** dim
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    hits = total = 0
    est = err = float("nan")
    while total < budget:
        m = min(batch, budget - total)
        pts = rng.uniform(-1.0, 1.0, size=(m, dim))
        hits += int(np.count_nonzero(n(pts) < 1.0))
        total += m
        frac = hits / total
        est = box * frac
        err = box * math.sqrt(frac * (1 - frac) / total)
        if hits and err <= rel_target * est:
            return Q * est, Q * err
    raise SphereMeasureError(
        f"Monte Carlo |S| for {n!r} did not reach relative error {rel_target} "
        f"within {budget} samples",
        Q * est,
        Q * err,
    )
