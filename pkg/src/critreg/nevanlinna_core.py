"""Nevanlinna-function expressions, spectral measures and class predicates.

Powers of ``-z`` always use the principal branch,
``(-z)**alpha = |z|**alpha * exp(1j * alpha * Arg(-z))`` with ``Arg`` in
(-pi, pi].  Expressions are immutable trees; :func:`evaluate` is pure.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from . import mobius as mb
from .errors import (
    BranchCut,
    CritRegError,
    InsufficientGrid,
    MeasureError,
    NonConvergent,
    PoleHit,
    PoleOnAxis,
    SchemaError,
)
from .mobius import MobiusMap
from .tri import Tri

# --------------------------------------------------------------------------
# branch-aware powers


def _is_integer(alpha: float) -> bool:
    return float(alpha).is_integer()


def neg_pow(z: complex, alpha: float) -> complex:
    """Principal value of (-z)**alpha."""
    z = complex(z)
    if z == 0:
        if alpha > 0:
            return 0j
        raise PoleHit("(-z)**alpha with alpha <= 0 at z = 0")
    if z.imag == 0.0 and z.real > 0 and not _is_integer(alpha):
        raise BranchCut(f"(-z)**{alpha} evaluated on the cut at z = {z.real}")
    if _is_integer(alpha):
        return (-z) ** int(alpha)
    w = -z
    # cmath.phase handles signed zeros; force the cut to be approached from
    # neither side by the check above
    return abs(w) ** alpha * cmath.exp(1j * alpha * cmath.phase(w))


def _on_positive_axis(z: complex) -> bool:
    return z.imag == 0.0 and z.real >= 0.0


# --------------------------------------------------------------------------
# spectral measures


@dataclass(frozen=True)
class DensitySegment:
    """sigma'(t) = c * t**(-a) on (t0, t1); t0 may be 0 and t1 may be inf."""

    t0: float
    t1: float
    c: float
    a: float

    def mass(self) -> float:
        t0, t1, a = self.t0, self.t1, self.a
        if self.c == 0.0:
            return 0.0
        if a == 1.0:
            if t0 == 0.0 or math.isinf(t1):
                return math.inf
            return self.c * math.log(t1 / t0)
        e = 1.0 - a
        if t0 == 0.0 and e <= 0:
            return math.inf
        if math.isinf(t1) and e >= 0:
            return math.inf
        hi = 0.0 if math.isinf(t1) else t1**e
        lo = 0.0 if t0 == 0.0 else t0**e
        return self.c * (hi - lo) / e

    def density(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        inside = (t > self.t0) & (t <= self.t1)
        out = np.zeros_like(t)
        out[inside] = self.c * t[inside] ** (-self.a)
        return out

    def to_dict(self) -> dict:
        return {"t0": self.t0, "t1": _enc_float(self.t1), "c": self.c, "a": self.a}


@dataclass(frozen=True)
class SpectralMeasure:
    """Atoms plus a piecewise power-law density on [0, inf).

    The last segment may extend to infinity; it is the power-law tail.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    segments: tuple[DensitySegment, ...] = ()

    def __post_init__(self):
        for t, w in self.atoms:
            if t < 0 or w <= 0:
                raise MeasureError(f"atom ({t}, {w}) must have t >= 0 and w > 0")
        for s in self.segments:
            if s.t0 < 0 or s.t1 <= s.t0 or s.c < 0:
                raise MeasureError(f"invalid density segment {s}")

    @property
    def tail(self) -> DensitySegment | None:
        for s in self.segments:
            if math.isinf(s.t1):
                return s
        return None

    def density(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        for s in self.segments:
            out += s.density(t)
        return out

    def cdf(self, t: float) -> float:
        """Normalized distribution function: sigma(0) = 0, midpoint at jumps."""
        total = 0.0
        for x, w in self.atoms:
            if x < t:
                total += w
            elif x == t and t > 0:
                total += 0.5 * w
        for s in self.segments:
            if t <= s.t0:
                continue
            part = DensitySegment(s.t0, min(t, s.t1), s.c, s.a)
            total += part.mass()
        return total

    def growth_ok(self, power: int = 1) -> bool:
        """Check that integral of dsigma/(1+t)**power is finite."""
        for s in self.segments:
            if s.c == 0:
                continue
            if s.t0 == 0.0 and s.a >= 1.0:
                return False
            if math.isinf(s.t1) and s.a <= 1.0 - power:
                return False
        return True

    def require_growth(self, power: int = 1) -> None:
        if not self.growth_ok(power):
            raise MeasureError(f"integral of dsigma/(1+t)^{power} diverges")

    def to_dict(self) -> dict:
        return {
            "atoms": [[t, w] for t, w in self.atoms],
            "segments": [s.to_dict() for s in self.segments],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralMeasure":
        atoms = tuple((float(t), float(w)) for t, w in data.get("atoms", []))
        segs = tuple(
            DensitySegment(float(s["t0"]), _dec_float(s["t1"]), float(s["c"]), float(s["a"]))
            for s in data.get("segments", [])
        )
        return cls(atoms, segs)

    @classmethod
    def power_density(cls, c: float, a: float) -> "SpectralMeasure":
        """sigma'(t) = c t^(-a) on (0, inf)."""
        return cls((), (DensitySegment(0.0, math.inf, c, a),))

    def __add__(self, other: "SpectralMeasure") -> "SpectralMeasure":
        return SpectralMeasure(self.atoms + other.atoms, self.segments + other.segments)


def _enc_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def _dec_float(x) -> float:
    return float(x)


# ---- integration of kernels against a measure


@dataclass(frozen=True)
class _Kernel:
    """Integrand K(t) with tail form K(t0/s) = s**order * g(s, t0).

    ``split`` is the scale at which infinite segments are cut; ``near`` is a
    complex point where K is singular (used to decide between a fixed rule
    and adaptive quadrature).
    """

    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray, float], np.ndarray]
    order: float
    split: float
    near: complex | None = None


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_QUAD_OPTS = dict(limit=200, epsabs=0.0, epsrel=1e-11)


def _quad_c(fun, lo, hi, **kw) -> complex:
    re = integrate.quad(lambda x: fun(x).real, lo, hi, **_QUAD_OPTS, **kw)[0]
    # the error target is relative to the complex value, so an imaginary part near 0 needs a floor
    opts = dict(_QUAD_OPTS, epsabs=1e-13 * abs(re))
    im = integrate.quad(lambda x: fun(x).imag, lo, hi, **opts, **kw)[0]
    return complex(re, im)


def _scalar(fn):
    return lambda x: complex(np.asarray(fn(np.asarray([x])))[0])


def _finite_piece(seg: DensitySegment, t0: float, t1: float, K: _Kernel) -> complex:
    near = K.near
    width = t1 - t0
    if near is not None:
        dist = abs(complex(min(max(near.real, t0), t1), 0.0) - near)
        if dist < 2.0 * width:
            fk = _scalar(K.f)
            pts = [near.real] if t0 < near.real < t1 else None
            return _quad_c(lambda t: seg.c * t ** (-seg.a) * fk(t), t0, t1, points=pts)
    # Gauss-Legendre in log t on subintervals of ratio <= 2
    n = max(1, int(math.ceil(math.log(t1 / t0) / math.log(2.0))))
    edges = np.exp(np.linspace(math.log(t0), math.log(t1), n + 1))
    lo, hi = np.log(edges[:-1]), np.log(edges[1:])
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    u = mid[:, None] + half[:, None] * _GL_X[None, :]
    t = np.exp(u)
    vals = seg.c * t ** (1.0 - seg.a) * K.f(t)
    return complex(np.sum(vals * _GL_W[None, :] * half[:, None]))


def _head_piece(seg: DensitySegment, t1: float, K: _Kernel) -> complex:
    if seg.a >= 1.0:
        raise MeasureError("density not integrable at 0")
    fk = _scalar(K.f)
    return seg.c * _quad_c(fk, 0.0, t1, weight="alg", wvar=(-seg.a, 0.0))


def _tail_piece(seg: DensitySegment, t0: float, K: _Kernel) -> complex:
    expo = seg.a - 2.0 + K.order
    if expo <= -1.0:
        raise MeasureError("density tail not integrable against kernel")
    g = K.g
    fun = lambda s: complex(np.asarray(g(np.asarray([s]), t0))[0])
    return seg.c * t0 ** (1.0 - seg.a) * _quad_c(fun, 0.0, 1.0, weight="alg", wvar=(expo, 0.0))


def _segment_integral(seg: DensitySegment, K: _Kernel) -> complex:
    if seg.c == 0.0:
        return 0j
    t0, t1 = seg.t0, seg.t1
    tau = max(K.split, 1e-300)
    total = 0j
    # head: (0, h]
    if t0 == 0.0:
        h = min(t1, tau)
        total += _head_piece(seg, h, K)
        t0 = h
        if t0 >= t1:
            return total
    if math.isinf(t1):
        cut = max(t0, tau)
        if cut > t0:
            total += _finite_piece(seg, t0, cut, K)
        total += _tail_piece(seg, cut, K)
        return total
    total += _finite_piece(seg, t0, t1, K)
    return total


def measure_integral(sigma: SpectralMeasure, K: _Kernel, atoms: bool = True) -> complex:
    total = 0j
    if atoms and sigma.atoms:
        ts = np.array([t for t, _ in sigma.atoms])
        ws = np.array([w for _, w in sigma.atoms])
        total += complex(np.sum(ws * K.f(ts)))
    for seg in sigma.segments:
        total += _segment_integral(seg, K)
    return total


def stieltjes_kernel(z: complex) -> _Kernel:
    """K(t) = 1/(t - z)."""
    z = complex(z)
    return _Kernel(
        f=lambda t: 1.0 / (t - z),
        g=lambda s, t0: 1.0 / (t0 - z * s),
        order=1.0,
        split=max(abs(z), 1e-12),
        near=z,
    )


def nevanlinna_kernel(z: complex) -> _Kernel:
    """K(t) = 1/(t - z) - t/(1 + t^2)."""
    z = complex(z)
    return _Kernel(
        f=lambda t: (1.0 + t * z) / ((t - z) * (1.0 + t * t)),
        g=lambda s, t0: (s + t0 * z) / ((t0 - z * s) * (s * s + t0 * t0)),
        order=2.0,
        split=max(abs(z), 1.0),
        near=z,
    )


def stieltjes_transform(sigma: SpectralMeasure, z: complex) -> complex:
    """Integral of dsigma(t)/(t - z)."""
    z = complex(z)
    if _on_positive_axis(z):
        raise BranchCut(f"Stieltjes transform evaluated on the support at {z}")
    return measure_integral(sigma, stieltjes_kernel(z))


# --------------------------------------------------------------------------
# expression tree


class NevanlinnaExpr:
    """Base class for expression nodes."""

    def __call__(self, z):
        return evaluate(self, z)

    def _ev(self, z: complex) -> complex:  # pragma: no cover - abstract
        raise NotImplementedError

    def to_dict(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError

    def contains_numeric(self) -> bool:
        return False

    def __add__(self, other: "NevanlinnaExpr") -> "Sum":
        return Sum(self, other)


@dataclass(frozen=True)
class PowerLaw(NevanlinnaExpr):
    """z -> C (-z)**alpha."""

    C: float
    alpha: float

    def _ev(self, z):
        return self.C * neg_pow(z, self.alpha)

    def to_dict(self):
        return {"type": "power_law", "C": self.C, "alpha": self.alpha}


@dataclass(frozen=True)
class AffinePlusPower(NevanlinnaExpr):
    """z -> C0 + C1 (-z)**alpha."""

    C0: float
    C1: float
    alpha: float

    def _ev(self, z):
        return self.C0 + self.C1 * neg_pow(z, self.alpha)

    def to_dict(self):
        return {"type": "affine_plus_power", "C0": self.C0, "C1": self.C1, "alpha": self.alpha}


@dataclass(frozen=True)
class FromMeasure(NevanlinnaExpr):
    """z -> a + b z + integral of (1/(t - z) - t/(1 + t^2)) dsigma(t)."""

    a: float
    b: float
    sigma: SpectralMeasure

    def __post_init__(self):
        if self.b < 0:
            raise MeasureError("linear coefficient b must be nonnegative")
        self.sigma.require_growth(2)

    def _ev(self, z):
        if _on_positive_axis(z) and (self.sigma.atoms or self.sigma.segments):
            raise BranchCut(f"measure model evaluated on the support at {z}")
        return self.a + self.b * z + measure_integral(self.sigma, nevanlinna_kernel(z))

    def to_dict(self):
        return {"type": "from_measure", "a": self.a, "b": self.b, "sigma": self.sigma.to_dict()}


@dataclass(frozen=True)
class StieltjesForm(NevanlinnaExpr):
    """z -> gamma + integral of dsigma(t)/(t - z)."""

    gamma: float
    sigma: SpectralMeasure

    def __post_init__(self):
        if self.gamma < 0:
            raise MeasureError("gamma must be nonnegative")
        self.sigma.require_growth(1)

    def _ev(self, z):
        return self.gamma + stieltjes_transform(self.sigma, z)

    def to_dict(self):
        return {"type": "stieltjes_form", "gamma": self.gamma, "sigma": self.sigma.to_dict()}


@dataclass(frozen=True)
class MobiusOf(NevanlinnaExpr):
    """z -> eps1 eps2 mu2(m(mu1(z)))."""

    mu1: MobiusMap
    mu2: MobiusMap
    inner: NevanlinnaExpr

    def _ev(self, z):
        u = mb.apply(self.mu1, z)
        if self.mu1.c != 0 and z.imag == 0.0:
            u = complex(u.real, 0.0)
        val = self.inner._ev(complex(u))
        return self.mu1.epsilon * self.mu2.epsilon * mb.apply(self.mu2, val)

    def to_dict(self):
        return {
            "type": "mobius_of",
            "mu1": self.mu1.to_dict(),
            "mu2": self.mu2.to_dict(),
            "inner": self.inner.to_dict(),
        }

    def contains_numeric(self):
        return self.inner.contains_numeric()


@dataclass(frozen=True)
class Sum(NevanlinnaExpr):
    left: NevanlinnaExpr
    right: NevanlinnaExpr

    def _ev(self, z):
        return self.left._ev(z) + self.right._ev(z)

    def to_dict(self):
        return {"type": "sum", "left": self.left.to_dict(), "right": self.right.to_dict()}

    def contains_numeric(self):
        return self.left.contains_numeric() or self.right.contains_numeric()


@dataclass(frozen=True)
class Transpose(NevanlinnaExpr):
    """z -> -1/m(z)."""

    inner: NevanlinnaExpr

    def _ev(self, z):
        v = self.inner._ev(z)
        if v == 0:
            raise PoleHit(f"transpose of a zero at z = {z}")
        return -1.0 / v

    def to_dict(self):
        return {"type": "transpose", "inner": self.inner.to_dict()}

    def contains_numeric(self):
        return self.inner.contains_numeric()


@dataclass(frozen=True)
class Flip(NevanlinnaExpr):
    """z -> m(-z).  Not a Nevanlinna function; used in the coupling denominator."""

    inner: NevanlinnaExpr

    def _ev(self, z):
        return self.inner._ev(-z)

    def to_dict(self):
        return {"type": "flip", "inner": self.inner.to_dict()}

    def contains_numeric(self):
        return self.inner.contains_numeric()


@dataclass(frozen=True, eq=False)
class SLWeyl(NevanlinnaExpr):
    """Weyl function of a half-line Sturm-Liouville problem, computed by ODE."""

    problem: object

    def _ev(self, z):
        from .sl_weyl import weyl_function

        return weyl_function(self.problem, z)

    def to_dict(self):
        return {"type": "sl_weyl", "problem": self.problem.to_dict()}

    def contains_numeric(self):
        return True


def linear() -> PowerLaw:
    """f(z) = z."""
    return PowerLaw(-1.0, 1.0)


def evaluate(f: NevanlinnaExpr, z) -> complex:
    """Evaluate ``f`` at a complex point.

    Real points are accepted; expressions with a cut or pole there raise
    BranchCut or PoleHit.
    """
    if isinstance(z, (list, tuple, np.ndarray)):
        return np.array([evaluate(f, zz) for zz in np.ravel(z)], dtype=complex).reshape(np.shape(z))
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite evaluation point {z}")
    return complex(f._ev(z))


def mobius_transform(f: NevanlinnaExpr, mu1: MobiusMap, mu2: MobiusMap) -> NevanlinnaExpr:
    """Wrap f as eps1 eps2 mu2(f(mu1(z))); trivial maps return f."""
    if mu1 == mb.IDENTITY and mu2 == mb.IDENTITY:
        return f
    return MobiusOf(mu1, mu2, f)


# --------------------------------------------------------------------------
# symbolic power forms: gamma + sum C_k (-z)^alpha_k


def power_terms(f: NevanlinnaExpr) -> tuple[float, list[tuple[float, float]]] | None:
    """Return (gamma, [(C, alpha), ...]) when f is an explicit power sum."""
    if isinstance(f, PowerLaw):
        return 0.0, [(f.C, f.alpha)]
    if isinstance(f, AffinePlusPower):
        return f.C0, [(f.C1, f.alpha)]
    if isinstance(f, Sum):
        a, b = power_terms(f.left), power_terms(f.right)
        if a is None or b is None:
            return None
        return _merge(a[0] + b[0], a[1] + b[1])
    if isinstance(f, Transpose):
        inner = power_terms(f.inner)
        if inner is None or inner[0] != 0.0 or len(inner[1]) != 1:
            return None
        C, al = inner[1][0]
        return 0.0, [(-1.0 / C, -al)]
    if isinstance(f, MobiusOf):
        inner = power_terms(f.inner)
        if inner is None:
            return None
        g, terms = inner
        m1 = f.mu1
        if mb.same_map(m1, mb.IDENTITY):
            pass
        elif mb.same_map(m1, mb.RECIPROCAL):
            terms = [(C, -al) for C, al in terms]
        elif m1.b == 0 and m1.c == 0 and m1.a / m1.d > 0:
            k = m1.a / m1.d
            terms = [(C * k**al, al) for C, al in terms]
        else:
            return None
        e = m1.epsilon * f.mu2.epsilon
        m2 = f.mu2
        if m2.c == 0:
            g2 = (m2.a * g + m2.b) / m2.d
            terms2 = [(C * m2.a / m2.d, al) for C, al in terms]
        elif m2.a == 0 and m2.d == 0 and g == 0.0 and len(terms) == 1:
            C, al = terms[0]
            g2, terms2 = 0.0, [(m2.b / (m2.c * C), -al)]
        else:
            return None
        return _merge(e * g2, [(e * C, al) for C, al in terms2])
    return None


def _merge(g: float, terms: list[tuple[float, float]]):
    acc: dict[float, float] = {}
    for C, al in terms:
        acc[al] = acc.get(al, 0.0) + C
    extra = acc.pop(0.0, 0.0)
    out = [(C, al) for al, C in sorted(acc.items()) if C != 0.0]
    return g + extra, out


def from_power_terms(g: float, terms: Sequence[tuple[float, float]]) -> NevanlinnaExpr:
    terms = list(terms)
    if not terms:
        return AffinePlusPower(g, 0.0, 1.0)
    if len(terms) == 1:
        C, al = terms[0]
        return PowerLaw(C, al) if g == 0.0 else AffinePlusPower(g, C, al)
    expr: NevanlinnaExpr = PowerLaw(*terms[0])
    for C, al in terms[1:]:
        expr = Sum(expr, PowerLaw(C, al))
    if g != 0.0:
        expr = Sum(AffinePlusPower(g, 0.0, 1.0), expr)
    return expr


def exact_stieltjes_form(f: NevanlinnaExpr) -> StieltjesForm | None:
    """Closed-form (gamma, sigma) when f is a Stieltjes power sum."""
    if isinstance(f, StieltjesForm):
        return f
    pt = power_terms(f)
    if pt is None:
        return None
    g, terms = pt
    if g < 0:
        return None
    atoms: list[tuple[float, float]] = []
    segs: list[DensitySegment] = []
    for C, al in terms:
        if al == -1.0 and C > 0:
            atoms.append((0.0, C))
        elif -1.0 < al < 0.0 and C > 0:
            a = -al
            segs.append(DensitySegment(0.0, math.inf, C * math.sin(math.pi * a) / math.pi, a))
        else:
            return None
    return StieltjesForm(g, SpectralMeasure(tuple(atoms), tuple(segs)))


# --------------------------------------------------------------------------
# serialization

_TAGS: dict[str, Callable[[dict], NevanlinnaExpr]] = {}


def expr_from_dict(data: dict, base=None) -> NevanlinnaExpr:
    """Load an expression; relative table paths resolve against ``base``."""
    try:
        tag = data["type"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"expression object without 'type': {data!r}") from exc
    if tag == "power_law":
        return PowerLaw(float(data["C"]), float(data["alpha"]))
    if tag == "affine_plus_power":
        return AffinePlusPower(float(data["C0"]), float(data["C1"]), float(data["alpha"]))
    if tag == "from_measure":
        return FromMeasure(float(data["a"]), float(data["b"]), SpectralMeasure.from_dict(data["sigma"]))
    if tag == "stieltjes_form":
        return StieltjesForm(float(data["gamma"]), SpectralMeasure.from_dict(data["sigma"]))
    if tag == "mobius_of":
        return MobiusOf(
            MobiusMap.from_dict(data["mu1"]), MobiusMap.from_dict(data["mu2"]), expr_from_dict(data["inner"], base)
        )
    if tag == "sum":
        return Sum(expr_from_dict(data["left"], base), expr_from_dict(data["right"], base))
    if tag == "transpose":
        return Transpose(expr_from_dict(data["inner"], base))
    if tag == "flip":
        return Flip(expr_from_dict(data["inner"], base))
    if tag == "sl_weyl":
        from .sl_weyl import HalfLineProblem

        return SLWeyl(HalfLineProblem.from_dict(data["problem"], base))
    if tag == "catalog":
        from .sl_weyl import closed_form

        return closed_form(data["id"]).closed_form
    raise SchemaError(f"unknown expression type {tag!r}")


# --------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class SamplingPlan:
    """Sample points for :func:`classify`.

    The negative-axis grid is geometric, ``per_decade`` nodes per decade over
    -10**hi <= x <= -10**lo.  ``rtol`` is the relative tolerance on
    monotonicity and reality checks.
    """

    per_decade: int = 64
    lo: int = -8
    hi: int = 8
    uhp: tuple[complex, ...] = tuple(
        complex(r * math.cos(th), r * math.sin(th))
        for r in (1e-3, 10**-1.5, 1.0, 10**1.5, 1e3)
        for th in (math.pi / 6, math.pi / 2, 5 * math.pi / 6)
    )
    rtol: float = 1e-9

    def neg_grid(self) -> np.ndarray:
        n = (self.hi - self.lo) * self.per_decade + 1
        return -(10.0 ** np.linspace(self.hi, self.lo, n))


NUMERIC_PLAN = SamplingPlan(per_decade=4, lo=-4, hi=4, rtol=1e-6, uhp=tuple(
    complex(r * math.cos(th), r * math.sin(th)) for r in (0.1, 1.0, 10.0) for th in (math.pi / 4, 3 * math.pi / 4)
))


def default_plan(f: NevanlinnaExpr) -> SamplingPlan:
    return NUMERIC_PLAN if f.contains_numeric() else SamplingPlan()


@dataclass
class ClassReport:
    is_nevanlinna: Tri
    is_stieltjes: Tri
    is_inverse_stieltjes: Tri
    in_SM: Tri
    m_minus_inf: float
    m_zero_minus: float
    pole_on_negative_axis: float | None = None
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "is_nevanlinna": self.is_nevanlinna.value,
            "is_stieltjes": self.is_stieltjes.value,
            "is_inverse_stieltjes": self.is_inverse_stieltjes.value,
            "in_SM": self.in_SM.value,
            "m_minus_inf": _enc_float(self.m_minus_inf),
            "m_zero_minus": _enc_float(self.m_zero_minus),
            "pole_on_negative_axis": self.pole_on_negative_axis,
            "evidence": self.evidence,
        }


def _aitken(v: Sequence[float]) -> list[float]:
    out = []
    for k in range(len(v) - 2):
        d1, d2 = v[k + 1] - v[k], v[k + 2] - v[k + 1]
        den = d2 - d1
        out.append(v[k + 2] if den == 0 else v[k + 2] - d2 * d2 / den)
    return out


def _end_limit(vals: Sequence[float], rtol: float) -> float:
    """Limit of a monotone sequence sampled at geometric nodes (last = closest to the end)."""
    v = [float(x) for x in vals]
    v1, v2, v3 = v[-3:]
    scale = 1.0 + abs(v3)
    d1, d2 = v2 - v1, v3 - v2
    if abs(d2) <= 10 * rtol * scale:
        return v3
    if d1 == 0 or d1 * d2 < 0:
        return math.nan
    q = d2 / d1
    if q >= 10**0.02:
        return math.copysign(math.inf, d2)
    if q > 10**-0.02:
        return math.nan
    while len(v) >= 3:
        v = _aitken(v)
    return float(v[-1])


def classify(f: NevanlinnaExpr, plan: SamplingPlan | None = None) -> ClassReport:
    """Sampled membership in the Nevanlinna, Stieltjes, inverse Stieltjes and SM classes."""
    from .rkhs import gram

    plan = plan or default_plan(f)
    ev: dict = {}
    tol = plan.rtol

    # upper half-plane: sign of Im, conjugate symmetry, kernel positivity
    im_bad = 0.0
    sym_bad = 0.0
    for z in plan.uhp:
        v = evaluate(f, z)
        vc = evaluate(f, z.conjugate())
        scale = 1.0 + abs(v)
        im_bad = max(im_bad, -v.imag / scale)
        sym_bad = max(sym_bad, abs(vc - v.conjugate()) / scale)
    G = gram(f, list(plan.uhp))
    eig = np.linalg.eigvalsh(G)
    tr = float(np.trace(G).real)
    min_rel = float(eig[0] / tr) if tr > 0 else -math.inf
    ev.update(min_eig_over_trace=min_rel, max_neg_im=im_bad, max_sym_defect=sym_bad)
    if im_bad <= tol and min_rel >= -1e-9 and sym_bad <= max(tol, 1e-10):
        nev = Tri.YES
    elif im_bad > 10 * tol or min_rel < -1e-8 or sym_bad > 10 * max(tol, 1e-10):
        nev = Tri.NO
    else:
        nev = Tri.INCONCLUSIVE

    # negative half-axis
    xs = plan.neg_grid()
    vals = np.empty(xs.size)
    holo = True
    pole_nodes: list[int] = []
    for k, x in enumerate(xs):
        try:
            v = evaluate(f, complex(x, 0.0))
        except PoleHit:
            vals[k] = math.nan
            pole_nodes.append(k)
            continue
        except BranchCut:
            holo = False
            break
        if not (math.isfinite(v.real) and math.isfinite(v.imag)) or abs(v.imag) > 10 * tol * (1 + abs(v.real)) + 1e-14:
            holo = False
            break
        vals[k] = v.real
    pole: float | None = None
    mono = Tri.YES
    if holo:
        finite = ~np.isnan(vals)
        drops = []
        for k in range(xs.size - 1):
            if not (finite[k] and finite[k + 1]):
                continue
            d = vals[k + 1] - vals[k]
            if d < -10 * tol * (1.0 + abs(vals[k]) + abs(vals[k + 1])):
                drops.append(k)
            elif d < 0 and mono is Tri.YES:
                mono = Tri.YES  # within tolerance
        jumps = [k for k in drops if vals[k] > 0 and vals[k + 1] < 0]
        other = [k for k in drops if k not in jumps]
        if other:
            mono = Tri.NO
        n_poles = len(jumps) + len(pole_nodes)
        if n_poles > 1:
            mono = Tri.NO
        elif jumps:
            pole = _locate_pole(f, xs[jumps[0]], xs[jumps[0] + 1])
        elif pole_nodes:
            pole = float(xs[pole_nodes[0]])
        ev.update(negative_axis_nodes=int(xs.size), monotonicity_violations=len(other))
    else:
        mono = Tri.NO
    in_sm = Tri.NO if (nev is Tri.NO or mono is Tri.NO) else (Tri.YES if nev is Tri.YES else Tri.INCONCLUSIVE)

    m_inf = m_zero = math.nan
    stj = inv = Tri.NO
    if holo and in_sm is not Tri.NO:
        step = plan.per_decade
        finite_vals = vals
        if len(finite_vals) >= 2 * step + 1:
            n_dec = min(4, (len(finite_vals) - 1) // step)
            m_inf = _end_limit([finite_vals[j * step] for j in range(n_dec, -1, -1)], tol)
            m_zero = _end_limit([finite_vals[-1 - j * step] for j in range(n_dec, -1, -1)], tol)
        else:
            raise InsufficientGrid("negative-axis grid must span at least two decades")
        # cross-check finite limits against m(iy)
        for name, val, y in (("m_minus_inf", m_inf, 10.0**plan.hi), ("m_zero_minus", m_zero, 10.0**plan.lo)):
            if math.isfinite(val):
                w = evaluate(f, complex(0.0, y))
                ev[f"{name}_vs_imag_axis"] = float(abs(w.real - val) / (1.0 + abs(val)))
        if pole is None:
            vmin, vmax = float(np.nanmin(vals)), float(np.nanmax(vals))
            margin = 10 * tol * (1.0 + max(abs(vmin), abs(vmax)))
            stj = Tri.YES if vmin >= -margin else Tri.NO
            inv = Tri.YES if vmax <= margin else Tri.NO
            if in_sm is Tri.INCONCLUSIVE:
                stj = Tri.INCONCLUSIVE if stj is Tri.YES else stj
                inv = Tri.INCONCLUSIVE if inv is Tri.YES else inv
    return ClassReport(nev, stj, inv, in_sm, float(m_inf), float(m_zero), pole, ev)


def _locate_pole(f: NevanlinnaExpr, a: float, b: float) -> float:
    """Bisect for the +inf -> -inf jump of an increasing function on (a, b)."""
    for _ in range(200):
        c = 0.5 * (a + b) if b - a < 1e-3 * abs(a) else -math.sqrt(a * b)
        if c in (a, b):
            break
        try:
            v = evaluate(f, complex(c, 0.0)).real
        except PoleHit:
            return c
        if v > 0:
            a = c
        else:
            b = c
        if abs(b - a) <= 1e-13 * abs(a):
            break
    return 0.5 * (a + b)


class ExtensionType(str, Enum):
    FRIEDRICHS = "FRIEDRICHS"
    KREIN = "KREIN"
    BOTH = "BOTH"
    NEITHER = "NEITHER"
    INDETERMINATE = "INDETERMINATE"


def extension_type(f: NevanlinnaExpr, report: ClassReport | None = None) -> ExtensionType:
    """Whether the reference extension ker Gamma_0 is the Friedrichs and/or Krein one."""
    report = report or classify(f)
    if report.pole_on_negative_axis is not None:
        raise PoleOnAxis(f"pole at {report.pole_on_negative_axis}")
    a, b = report.m_minus_inf, report.m_zero_minus
    if math.isnan(a) or math.isnan(b):
        return ExtensionType.INDETERMINATE
    fr = a == -math.inf
    kr = b == math.inf
    if fr and kr:
        return ExtensionType.BOTH
    if fr:
        return ExtensionType.FRIEDRICHS
    if kr:
        return ExtensionType.KREIN
    return ExtensionType.NEITHER


# --------------------------------------------------------------------------
# Stieltjes-Perron inversion


def _richardson(eps: Sequence[float], vals: Sequence[float]) -> tuple[float, float]:
    """Neville extrapolation to eps = 0; returns (estimate, error proxy)."""
    e = list(eps)
    T = [list(vals)]
    for j in range(1, len(e)):
        prev = T[-1]
        row = []
        for i in range(len(prev) - 1):
            row.append((e[i] * prev[i + 1] - e[i + j] * prev[i]) / (e[i] - e[i + j]))
        T.append(row)
    best = T[-1][0]
    prev = T[-2][-1] if len(T) > 1 else best
    return best, abs(best - prev)


def stieltjes_invert(
    f: NevanlinnaExpr,
    t_grid: Iterable[float] | None = None,
    epsilon_sequence: Sequence[float] = (1e-2, 5e-3, 2.5e-3, 1.25e-3),
    rtol: float = 1e-3,
) -> SpectralMeasure:
    """Recover sigma on (0, inf) from boundary values Im f(t + i eps)/pi.

    ``epsilon_sequence`` is relative to t.  An atom at 0 is detected from
    y Im f(iy) as y -> 0.  The density is stored as power-law segments
    between grid nodes with power-law head and tail extrapolation.
    """
    t = np.asarray(list(t_grid) if t_grid is not None else 10.0 ** np.linspace(-6, 6, 12 * 16 + 1), dtype=float)
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be increasing and positive")
    eps = list(epsilon_sequence)
    dens = np.empty(t.size)
    atoms: list[tuple[float, float]] = []
    for k, tk in enumerate(t):
        ims = [evaluate(f, complex(tk, e * tk)).imag for e in eps]
        ews = [e * tk * v for e, v in zip(eps, ims)]
        if ews[0] > 0 and abs(ews[-1] / ews[0] - 1.0) < 0.05 and ews[-1] > 1e-12:
            w, _ = _richardson(eps, ews)
            atoms.append((float(tk), float(w)))
            dens[k] = 0.0
            continue
        vals = [v / math.pi for v in ims]
        est, err = _richardson(eps, vals)
        # a vanishing density is resolved only to O(eps) of the sample scale
        if err > rtol * max(abs(est), eps[0] * max(map(abs, vals))) + 1e-12:
            raise NonConvergent(f"density extrapolation at t = {tk} not converged ({est}, {err})")
        dens[k] = max(est, 0.0)
    # atom at the origin
    ys = [t[0] * 1e-3 * 0.5**j for j in range(4)]
    a0 = [y * evaluate(f, complex(0.0, y)).imag for y in ys]
    if a0[-1] > 1e-10 and abs(a0[-1] / a0[-2] - 1.0) < 0.05:
        w0, _ = _richardson(ys, a0)
        atoms.insert(0, (0.0, float(w0)))
    return _measure_from_samples(t, dens, tuple(atoms))


def _measure_from_samples(t: np.ndarray, dens: np.ndarray, atoms) -> SpectralMeasure:
    segs: list[DensitySegment] = []
    pos = dens > 0
    for k in range(t.size - 1):
        if pos[k] and pos[k + 1]:
            a = -math.log(dens[k + 1] / dens[k]) / math.log(t[k + 1] / t[k])
            c = dens[k] * t[k] ** a
            segs.append(DensitySegment(float(t[k]), float(t[k + 1]), float(c), float(a)))
    if pos[0] and pos[1]:
        a = -math.log(dens[1] / dens[0]) / math.log(t[1] / t[0])
        if a < 1.0:
            segs.insert(0, DensitySegment(0.0, float(t[0]), float(dens[0] * t[0] ** a), float(a)))
    if pos[-1] and pos[-2]:
        a = -math.log(dens[-1] / dens[-2]) / math.log(t[-1] / t[-2])
        segs.append(DensitySegment(float(t[-1]), math.inf, float(dens[-1] * t[-1] ** a), float(a)))
    return SpectralMeasure(tuple(atoms), tuple(segs))


def limit_at_minus_infinity(f: NevanlinnaExpr, rtol: float = 1e-9) -> float:
    v = [evaluate(f, complex(-(10.0**k), 0.0)).real for k in (4, 5, 6, 7, 8)]
    return _end_limit(v, rtol)


def stieltjes_form_of(f: NevanlinnaExpr, t_grid=None) -> StieltjesForm:
    """Exact form when available, otherwise gamma from m(-inf) and inverted sigma."""
    exact = exact_stieltjes_form(f)
    if exact is not None:
        return exact
    gamma = limit_at_minus_infinity(f)
    if not math.isfinite(gamma) or gamma < -1e-9:
        raise MeasureError(f"not a Stieltjes function: m(-inf) = {gamma}")
    return StieltjesForm(max(gamma, 0.0), stieltjes_invert(f, t_grid))


# --------------------------------------------------------------------------
# densely defined criterion


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return float(coef[0]), resid


@dataclass
class DenselyDefinedResult:
    verdict: Tri
    slope_im_over_y: float
    slope_y_times_im: float

    def __bool__(self):
        return self.verdict is Tri.YES

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "slope_im_over_y": self.slope_im_over_y,
            "slope_y_times_im": self.slope_y_times_im,
        }


def densely_defined_check(f: NevanlinnaExpr, slope_tol: float = 0.02) -> DenselyDefinedResult:
    """Im m(iy)/y -> 0 and y Im m(iy) -> inf, judged by tail slopes on [1e2, 1e8]."""
    y = 10.0 ** np.linspace(2, 8, 6 * 16 + 1)
    im = np.array([evaluate(f, complex(0.0, yy)).imag for yy in y])
    if np.any(im <= 0):
        return DenselyDefinedResult(Tri.INCONCLUSIVE, math.nan, math.nan)
    tail = slice(-33, None)
    s1, _ = _loglog_slope(y[tail], im[tail] / y[tail])
    s2, _ = _loglog_slope(y[tail], im[tail] * y[tail])
    c1 = Tri.YES if s1 <= -slope_tol else Tri.NO
    c2 = Tri.YES if s2 >= slope_tol else Tri.NO
    if c1 is Tri.YES and c2 is Tri.YES:
        v = Tri.YES
    else:
        v = Tri.NO
    return DenselyDefinedResult(v, s1, s2)


__all__ = [
    "AffinePlusPower",
    "BranchCut",
    "ClassReport",
    "CritRegError",
    "DensitySegment",
    "ExtensionType",
    "Flip",
    "FromMeasure",
    "MobiusOf",
    "NevanlinnaExpr",
    "PowerLaw",
    "SLWeyl",
    "SamplingPlan",
    "SpectralMeasure",
    "StieltjesForm",
    "Sum",
    "Transpose",
    "classify",
    "densely_defined_check",
    "evaluate",
    "exact_stieltjes_form",
    "expr_from_dict",
    "extension_type",
    "linear",
    "mobius_transform",
    "neg_pow",
    "power_terms",
    "stieltjes_form_of",
    "stieltjes_invert",
    "stieltjes_transform",
]
