"""Couplings A of S+ and -S- described by the Weyl-function pair (m+, m-).

Covers the resolvent denominator, nonnegativity tests, resolvent solves for
Sturm-Liouville realizations, boundary-matrix classification and the rule
engine that turns certificates into regularity verdicts for 0 and infinity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate, optimize

from .asymptotics import Membership
from .errors import (
    BranchCut,
    DenominatorZero,
    MissingConstant,
    NonSelfAdjoint,
    NotNonnegative,
    PoleHit,
    PoleOnAxis,
    PreconditionViolation,
    RankDeficient,
)
from .nevanlinna_core import (
    ClassReport,
    ExtensionType,
    Flip,
    NevanlinnaExpr,
    _end_limit,
    classify,
    default_plan,
    evaluate,
    expr_from_dict,
    extension_type,
)
from .properties import Property, PropertyCertificate
from .sl_weyl import HalfLineProblem, _seed, _sqrt_decay
from .tri import Tri


class KernelCondition(str, Enum):
    """Whether ker A = ker A^2; an input, not computed from (m+, m-)."""

    TRUE = "KER_EQUAL_KER_SQ_TRUE"
    FALSE = "FALSE"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True, eq=False)
class CouplingModel:
    m_plus: NevanlinnaExpr
    m_minus: NevanlinnaExpr
    kernel_condition: KernelCondition = KernelCondition.UNKNOWN
    sl_problem_plus: HalfLineProblem | None = None
    sl_problem_minus: HalfLineProblem | None = None
    label: str = ""
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "label": self.label,
            "m_plus": self.m_plus.to_dict(),
            "m_minus": self.m_minus.to_dict(),
            "kernel_condition": self.kernel_condition.value,
            "metadata": dict(self.metadata),
        }
        if self.sl_problem_plus is not None:
            out["sl_problem_plus"] = self.sl_problem_plus.to_dict()
        if self.sl_problem_minus is not None:
            out["sl_problem_minus"] = self.sl_problem_minus.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict, base=None) -> "CouplingModel":
        probs = {}
        for key in ("sl_problem_plus", "sl_problem_minus"):
            if data.get(key) is not None:
                probs[key] = HalfLineProblem.from_dict(data[key], base)
        return cls(
            expr_from_dict(data["m_plus"], base),
            expr_from_dict(data["m_minus"], base),
            KernelCondition(data.get("kernel_condition", "UNKNOWN")),
            label=str(data.get("label", "")),
            metadata=dict(data.get("metadata", {})),
            **probs,
        )


# --------------------------------------------------------------------------
# resolvent denominator


def denominator(model: CouplingModel, z: complex) -> complex:
    """d(z) = m+(z) + m-(-z)."""
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError("denominator needs a non-real z")
    return evaluate(model.m_plus, z) + evaluate(Flip(model.m_minus), z)


def probe_grid(n: int = 10_000) -> np.ndarray:
    """Non-real probe points r e^{i th}: geometric radii in [1e-4, 1e4] and angles in (0, pi) and (-pi, 0)."""
    n_r = max(2, int(round(math.sqrt(n / 2))))
    n_th = max(1, -(-n // (2 * n_r)))
    r = np.geomspace(1e-4, 1e4, n_r)
    th = (np.arange(n_th) + 0.5) * math.pi / n_th
    th = np.concatenate([th, -th])
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()[:n]


@dataclass
class ResolventSetProbe:
    empty: bool
    min_abs: float
    n_points: int
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"empty_resolvent_set": self.empty, "min_abs_denominator": self.min_abs, "n_points": self.n_points, **self.evidence}


def probe_resolvent_set(model: CouplingModel, points: Iterable[complex] | None = None, rtol: float = 1e-12) -> ResolventSetProbe:
    """Flag d(z) = 0 at every probe point, meaning the resolvent set is empty.

    A relative test |d| <= rtol (|m+(z)| + |m-(-z)|) decides each point.
    """
    pts = list(points) if points is not None else list(probe_grid(64))
    rel = []
    for z in pts:
        a = evaluate(model.m_plus, z)
        b = evaluate(Flip(model.m_minus), z)
        rel.append(abs(a + b) / max(abs(a) + abs(b), 1e-300))
    rel_arr = np.asarray(rel)
    empty = bool(np.all(rel_arr <= rtol))
    return ResolventSetProbe(empty, float(rel_arr.min()), len(pts), {"max_relative_denominator": float(rel_arr.max())})


# --------------------------------------------------------------------------
# nonnegativity


@dataclass
class RouteResult:
    route: str
    applicable: bool
    verdict: Tri
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"route": self.route, "applicable": self.applicable, "verdict": self.verdict.value, "evidence": self.evidence}


@dataclass
class NonnegativityResult:
    verdict: Tri
    routes: list[RouteResult]

    @property
    def nonnegative(self) -> bool:
        return self.verdict is Tri.YES

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "routes": [r.to_dict() for r in self.routes]}


def _enc(x: float):
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def _real_on_axis(f: NevanlinnaExpr, xs: np.ndarray, rtol: float) -> np.ndarray | None:
    """Real values of f on the grid, or None if f is not holomorphic there."""
    out = np.empty(xs.size)
    for k, x in enumerate(xs):
        try:
            v = evaluate(f, complex(x, 0.0))
        except (PoleHit, BranchCut):
            return None
        if not (math.isfinite(v.real) and math.isfinite(v.imag)) or abs(v.imag) > 10 * rtol * (1 + abs(v.real)) + 1e-14:
            return None
        out[k] = v.real
    return out


def _sum_limits(s: np.ndarray, per_decade: int, rtol: float) -> tuple[float, float, float, float]:
    """Limits of the sampled increasing sum at -inf (first node) and 0- (last node), with error bands.

    A band is 1% of the change over the sampled decades plus the rounding
    tolerance; extrapolated limits within a band of 0 count as 0.
    """
    n_dec = min(4, (s.size - 1) // per_decade)
    left = [s[j * per_decade] for j in range(n_dec, -1, -1)]
    right = [s[-1 - j * per_decade] for j in range(n_dec, -1, -1)]
    out = []
    for seq in (left, right):
        lim = _end_limit(seq, rtol)
        band = 1e-2 * abs(seq[-1] - seq[0]) + 10 * rtol * (1.0 + (abs(lim) if math.isfinite(lim) else 0.0))
        out += [lim, band]
    return out[0], out[1], out[2], out[3]


def nonnegativity(
    model: CouplingModel,
    reports: dict[str, ClassReport] | None = None,
    near_zero_tol: float = 1e-9,
) -> NonnegativityResult:
    """Nonnegativity of the coupling by the zero-free, Krein and Friedrichs routes.

    ``reports`` may carry precomputed ClassReports keyed "m_plus"/"m_minus".
    """
    plan = default_plan(model.m_plus)
    if model.m_minus.contains_numeric():
        plan = default_plan(model.m_minus)
    xs = plan.neg_grid()
    tol = plan.rtol
    vp = _real_on_axis(model.m_plus, xs, tol)
    vm = _real_on_axis(model.m_minus, xs, tol)
    routes: list[RouteResult] = []

    s = lim_inf = lim_zero = None
    band_inf = band_zero = 0.0
    if vp is not None and vm is not None:
        s = vp + vm
        lim_inf, band_inf, lim_zero, band_zero = _sum_limits(s, plan.per_decade, tol)

    # zero-free route: both reference extensions nonnegative
    if s is None:
        routes.append(RouteResult("ZERO_FREE", False, Tri.INCONCLUSIVE, {"reason": "m+ or m- not holomorphic on the negative axis"}))
    else:
        scale = np.abs(vp) + np.abs(vm) + 1e-300
        ev: dict = {"nodes": int(xs.size), "limit_at_minus_inf": _enc(lim_inf), "limit_at_zero": _enc(lim_zero)}
        ups = [k for k in range(s.size - 1) if s[k] < 0.0 <= s[k + 1]]
        if ups:
            k = ups[0]
            g = lambda x: (evaluate(model.m_plus, complex(x, 0.0)) + evaluate(model.m_minus, complex(x, 0.0))).real
            root = float(s[k + 1] == 0.0 and xs[k + 1] or optimize.brentq(g, xs[k], xs[k + 1], xtol=1e-14, rtol=1e-13))
            ev["zero_at"] = root
            routes.append(RouteResult("ZERO_FREE", True, Tri.NO, ev))
        else:
            sign = np.sign(s)
            verdict = Tri.YES
            if sign[0] > 0 and not (lim_inf >= -band_inf):
                # positive at the left end: a zero further left needs a negative limit
                verdict = Tri.NO if lim_inf < -band_inf else Tri.INCONCLUSIVE
                ev["reason"] = "sum may cross zero left of the grid"
            if sign[-1] < 0 and not (lim_zero <= band_zero):
                verdict = Tri.NO if lim_zero > band_zero else Tri.INCONCLUSIVE
                ev["reason"] = "sum may cross zero right of the grid"
            near = float(np.min(np.abs(s) / scale))
            ev["min_relative_sum"] = near
            if verdict is Tri.YES and near < near_zero_tol:
                verdict = Tri.INCONCLUSIVE
                ev["reason"] = "near-zero not separated by the grid"
            routes.append(RouteResult("ZERO_FREE", True, verdict, ev))

    # Krein and Friedrichs routes depend on the reference extension of S+
    reports = reports or {}
    rep = reports.get("m_plus") or classify(model.m_plus, plan)
    try:
        ext = extension_type(model.m_plus, rep)
    except PoleOnAxis:
        ext = ExtensionType.INDETERMINATE
    ev = {"extension_type_m_plus": ext.value}
    if ext in (ExtensionType.KREIN, ExtensionType.BOTH):
        if vm is None:
            routes.append(RouteResult("KREIN", True, Tri.NO, {**ev, "reason": "m- not holomorphic on the negative axis"}))
        elif lim_inf is None or math.isnan(lim_inf):
            routes.append(RouteResult("KREIN", True, Tri.INCONCLUSIVE, {**ev, "limit_at_minus_inf": "nan"}))
        else:
            ok = lim_inf >= -band_inf
            routes.append(RouteResult("KREIN", True, Tri.of(ok), {**ev, "limit_at_minus_inf": _enc(lim_inf)}))
    else:
        routes.append(RouteResult("KREIN", False, Tri.INCONCLUSIVE, ev))
    if ext in (ExtensionType.FRIEDRICHS, ExtensionType.BOTH):
        if vm is None:
            routes.append(RouteResult("FRIEDRICHS", True, Tri.NO, {**ev, "reason": "m- not holomorphic on the negative axis"}))
        elif lim_zero is None or math.isnan(lim_zero):
            routes.append(RouteResult("FRIEDRICHS", True, Tri.INCONCLUSIVE, {**ev, "limit_at_zero": "nan"}))
        else:
            ok = lim_zero <= band_zero
            routes.append(RouteResult("FRIEDRICHS", True, Tri.of(ok), {**ev, "limit_at_zero": _enc(lim_zero)}))
    else:
        routes.append(RouteResult("FRIEDRICHS", False, Tri.INCONCLUSIVE, ev))

    decided = [r.verdict for r in routes if r.applicable and r.verdict is not Tri.INCONCLUSIVE]
    if Tri.YES in decided and Tri.NO in decided:
        verdict = Tri.INCONCLUSIVE
    elif decided:
        verdict = decided[0]
    else:
        verdict = Tri.INCONCLUSIVE
    return NonnegativityResult(verdict, routes)


# --------------------------------------------------------------------------
# resolvent solves


Source = Callable[[float], complex]


def tabulated_source(t: Sequence[float], values: Sequence[complex]) -> Source:
    """Piecewise-linear source through (t, values), zero outside [t0, t_end]."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=complex)
    lo, hi = float(t[0]), float(t[-1])

    def h(s: float) -> complex:
        if s < lo or s > hi:
            return 0.0
        return complex(np.interp(s, t, v.real), np.interp(s, t, v.imag))

    h.breaks = (lo, hi)  # type: ignore[attr-defined]
    return h


def indicator(a: float, b: float) -> Source:
    def h(s: float) -> complex:
        return 1.0 if a <= s <= b else 0.0

    h.breaks = (a, b)  # type: ignore[attr-defined]
    return h


def _zero_source(s: float) -> complex:
    return 0.0


_zero_source.breaks = ()  # type: ignore[attr-defined]

_IVP = dict(method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)


class _Piecewise:
    """Dense output stitched from consecutive solve_ivp segments."""

    def __init__(self):
        self.pieces: list[tuple[float, float, object]] = []

    def add(self, a: float, b: float, sol) -> None:
        self.pieces.append((min(a, b), max(a, b), sol))

    def __call__(self, s: float) -> np.ndarray:
        for a, b, sol in self.pieces:
            if a <= s <= b:
                return sol(s)
        raise ValueError(f"point {s} outside the solved range")


def _inside(h: Source, a: float, b: float) -> Source:
    """h restricted to the open segment, so a jump at an end is never sampled."""
    lo, hi = min(a, b), max(a, b)
    eps = 1e-12 * (hi - lo)
    return lambda s: h(min(max(s, lo + eps), hi - eps))


def _system(prob: HalfLineProblem, zeta: complex, h: Source, sign: float):
    """State (y, p y', I): y'' system plus I' = sign * y w h, built per segment."""

    def make(a: float, b: float):
        hs = _inside(h, a, b)

        def rhs(s, u):
            p, q, w = prob.p.at(s), prob.q.at(s), prob.w.at(s)
            return [u[1] / p, (q - zeta * w) * u[0], sign * u[0] * w * hs(s)]

        return rhs

    return make


def _segments(a: float, b: float, breaks: Iterable[float]) -> list[float]:
    pts = sorted({a, b, *[x for x in breaks if a < x < b]})
    return pts


def _solve(make_rhs, pts: list[float], u0, backward: bool) -> tuple[_Piecewise, np.ndarray]:
    dense = _Piecewise()
    u = np.asarray(u0, dtype=complex)
    order = list(reversed(pts)) if backward else pts
    for a, b in zip(order[:-1], order[1:]):
        sol = integrate.solve_ivp(make_rhs(a, b), (a, b), u, **_IVP)
        if sol.status != 0:
            raise PreconditionViolation(f"resolvent ODE integration failed on [{a}, {b}]: {sol.message}")
        dense.add(a, b, sol.sol)
        u = sol.y[:, -1]
    return dense, u


@dataclass
class _HalfSolution:
    """f = f0 + c psi on one half-line, with Gamma_0 psi = 1 and W(y1, psi) = 1."""

    prob: HalfLineProblem
    zeta: complex
    h: Source
    L: float
    y1: _Piecewise
    psi: _Piecewise
    g: complex
    m: complex
    gamma1_f0: complex
    c: complex = 0.0

    def state(self, s: float) -> tuple[complex, complex]:
        """(f(s), (p f')(s))."""
        if s > self.L:
            return 0.0, 0.0
        y = self.y1(s)
        q = self.psi(s) / self.g
        J = q[2]
        f0 = -(y[0] * J + q[0] * y[2])
        pf0 = -(y[1] * J + q[1] * y[2])
        return f0 + self.c * q[0], pf0 + self.c * q[1]

    def f(self, s: float) -> complex:
        return self.state(s)[0]

    def gammas(self) -> tuple[complex, complex]:
        (a0, b0), (a1, b1) = self.prob.functionals()
        f, pf = self.state(0.0)
        return a0 * f + b0 * pf, a1 * f + b1 * pf


def _cutoff(prob: HalfLineProblem, zeta: complex, support_end: float, window: float) -> float:
    probe = max(support_end, window, 1.0) * 2.0
    kappa = _sqrt_decay((prob.q.at(probe) - zeta * prob.w.at(probe)) / prob.p.at(probe)).real
    if kappa <= 0:
        raise PreconditionViolation("no decaying solution at this spectral parameter")
    return max(support_end, window) + 36.0 / kappa


def _half_solve(prob: HalfLineProblem, zeta: complex, h: Source, L: float | None, window: float) -> _HalfSolution:
    if prob.p.singular_at_zero or prob.w.singular_at_zero:
        raise PreconditionViolation("resolvent solves need coefficients regular at the endpoint")
    breaks = tuple(getattr(h, "breaks", ()))
    L = L or _cutoff(prob, zeta, max(breaks, default=0.0), window)
    pts = _segments(0.0, L, breaks)
    (a0, b0), (a1, b1) = prob.functionals()
    y1, _ = _solve(_system(prob, zeta, h, 1.0), pts, [b0, -a0, 0.0], backward=False)
    u_L = _seed(prob, zeta, L)
    psi, end = _solve(_system(prob, zeta, h, -1.0), pts, [1.0, u_L, 0.0], backward=True)
    g = a0 * end[0] + b0 * end[1]
    if g == 0:
        raise PreconditionViolation("decaying solution lies in ker Gamma_0")
    m = (a1 * end[0] + b1 * end[1]) / g
    gamma1_f0 = (a0 * b1 - a1 * b0) * end[2] / g
    return _HalfSolution(prob, zeta, h, L, y1, psi, g, m, gamma1_f0)


def _ode_residual(half: _HalfSolution, window: float, n: int = 201) -> float:
    """Max deviation on [0, window] from a forward inhomogeneous solve started at (f(0), p f'(0))."""
    prob, zeta, h = half.prob, half.zeta, half.h

    def make(a: float, b: float):
        hs = _inside(h, a, b)

        def rhs(s, u):
            p, q, w = prob.p.at(s), prob.q.at(s), prob.w.at(s)
            return [u[1] / p, (q - zeta * w) * u[0] - w * hs(s)]

        return rhs

    b = min(window, half.L)
    pts = _segments(0.0, b, getattr(h, "breaks", ()))
    dense, _ = _solve(make, pts, list(half.state(0.0)), backward=False)
    grid = np.linspace(0.0, b, n)
    return float(max(abs(dense(s)[0] - half.f(s)) for s in grid))


@dataclass
class ResolventSolution:
    """(A - z)^{-1} applied to (h+, h-), sampled on [0, window] in the reflected variable."""

    z: complex
    s: np.ndarray
    f_plus: np.ndarray
    f_minus: np.ndarray | None
    c: complex
    ode_residual: float
    boundary_residual: float
    coupling_residual: float
    m_plus_numeric: complex
    m_minus_numeric: complex | None
    _plus: _HalfSolution | None = field(default=None, repr=False)
    _minus: _HalfSolution | None = field(default=None, repr=False)

    def plus(self, s: float) -> complex:
        return self._plus.f(s)

    def minus(self, s: float) -> complex:
        if self._minus is None:
            raise PreconditionViolation("minus-side solution needs sl_problem_minus")
        return self._minus.f(s)

    def to_dict(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "ode_residual": self.ode_residual,
            "boundary_residual": self.boundary_residual,
            "coupling_residual": self.coupling_residual,
            "c": [self.c.real, self.c.imag],
        }


def resolvent_solve(
    model: CouplingModel,
    z: complex,
    h_plus: Source | None,
    h_minus: Source | None = None,
    window: float = 10.0,
    n_grid: int = 201,
) -> ResolventSolution:
    """Solve (A - z) f = h by variation of parameters on each half-line.

    On the plus side f+ solves (l+ - z) f+ = h+; on the minus side, where A
    acts as -l-, f- solves (l- + z) f- = -h-.  The gluing constant c makes
    Gamma_0^+ f+ = Gamma_0^- f- and Gamma_1^+ f+ + Gamma_1^- f- = 0.  With
    h- = 0 the plus component is the compression, which satisfies
    Gamma_1 f + m-(-z) Gamma_0 f = 0.
    """
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError("resolvent_solve needs a non-real z")
    if model.sl_problem_plus is None:
        raise PreconditionViolation("resolvent solves need sl_problem_plus")
    h_plus = h_plus or _zero_source
    mm_expr = evaluate(Flip(model.m_minus), z)
    plus = _half_solve(model.sl_problem_plus, z, h_plus, None, window)
    minus = None
    if model.sl_problem_minus is not None:
        neg_h = h_minus or _zero_source

        def src(s: float) -> complex:
            return -neg_h(s)

        src.breaks = tuple(getattr(neg_h, "breaks", ()))  # type: ignore[attr-defined]
        minus = _half_solve(model.sl_problem_minus, -z, src, None, window)
        d = plus.m + minus.m
        rhs = -(plus.gamma1_f0 + minus.gamma1_f0)
    else:
        if h_minus is not None:
            raise PreconditionViolation("a minus-side source needs sl_problem_minus")
        d = plus.m + mm_expr
        rhs = -plus.gamma1_f0
    if abs(d) <= 1e-12 * (abs(plus.m) + abs(d - plus.m)):
        raise DenominatorZero(f"m+(z) + m-(-z) vanishes at z = {z}")
    c = rhs / d
    plus.c = c
    if minus is not None:
        minus.c = c

    s = np.linspace(0.0, window, n_grid)
    fp = np.array([plus.f(x) for x in s])
    fm = np.array([minus.f(x) for x in s]) if minus is not None else None
    g0p, g1p = plus.gammas()
    scale = max(1.0, abs(g0p), abs(g1p))
    if minus is not None:
        g0m, g1m = minus.gammas()
        coupling = max(abs(g0p - g0m), abs(g1p + g1m)) / scale
    else:
        coupling = 0.0
    boundary = abs(g1p + mm_expr * g0p) / scale if h_minus is None else math.nan
    ode = _ode_residual(plus, window)
    if minus is not None:
        ode = max(ode, _ode_residual(minus, window))
    return ResolventSolution(
        z, s, fp, fm, complex(c), ode, float(boundary), float(coupling),
        complex(plus.m), complex(minus.m) if minus else None, plus, minus,
    )


def resolvent_identity_residual(model: CouplingModel, z1: complex, z2: complex, h_plus: Source, window: float = 10.0) -> float:
    """max |f2 - f1 - (z2 - z1) R(z2) f1| on [0, window] of both half-lines, with f_j = R(z_j) h."""
    if model.sl_problem_minus is None:
        raise PreconditionViolation("the resolvent identity needs both half-line problems")
    r1 = resolvent_solve(model, z1, h_plus, window=window)
    r2 = resolvent_solve(model, z2, h_plus, window=window)
    lp, lm = r1._plus.L, r1._minus.L

    def fp(s):
        return r1.plus(s) if s <= lp else 0.0

    def fm(s):
        return r1.minus(s) if s <= lm else 0.0

    fp.breaks = (*getattr(h_plus, "breaks", ()), lp)  # type: ignore[attr-defined]
    fm.breaks = (lm,)  # type: ignore[attr-defined]
    r21 = resolvent_solve(model, z2, fp, fm, window=window)
    dz = complex(z2) - complex(z1)
    res_p = np.abs(r2.f_plus - r1.f_plus - dz * r21.f_plus)
    res_m = np.abs(r2.f_minus - r1.f_minus - dz * r21.f_minus)
    return float(max(res_p.max(), res_m.max()))


# --------------------------------------------------------------------------
# boundary conditions M Gamma_0 f + N Gamma_1 f = 0


@dataclass(frozen=True)
class BoundaryMatrixPair:
    M: np.ndarray
    N: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        M = np.asarray(self.M, dtype=complex)
        N = np.asarray(self.N, dtype=complex)
        if M.shape != (2, 2) or N.shape != (2, 2):
            raise ValueError("M and N must be 2x2")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "N", N)
        B = np.hstack([M, N])
        sv = np.linalg.svd(B, compute_uv=False)
        if sv[-1] <= self.tol * max(sv[0], 1.0) * 10:
            raise RankDeficient(f"(M N) has rank < 2 (singular values {sv})")
        H = M @ N.conj().T
        scale = max(1.0, float(np.linalg.norm(M) * np.linalg.norm(N)))
        if np.max(np.abs(H - H.conj().T)) > self.tol * scale:
            raise NonSelfAdjoint("M N* is not Hermitian")

    @property
    def block(self) -> np.ndarray:
        return np.hstack([self.M, self.N])


@dataclass
class BoundaryClass:
    canonical_type: int
    separated: bool
    parameters: dict
    rref: np.ndarray

    def to_dict(self) -> dict:
        return {"canonical_type": self.canonical_type, "separated": self.separated, "parameters": self.parameters}


def rref(B: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with partial pivoting and a relative zero threshold."""
    R = np.array(B, dtype=complex)
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    thresh = tol * max(1.0, float(np.max(np.abs(R))))
    for c in range(cols):
        if r == rows:
            break
        k = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[k, c]) <= thresh:
            R[r:, c] = 0.0
            continue
        R[[r, k]] = R[[k, r]]
        R[r] /= R[r, c]
        for i in range(rows):
            if i != r:
                R[i] -= R[i, c] * R[r]
        pivots.append(c)
        r += 1
    R[np.abs(R) <= thresh] = 0.0
    return R, pivots


def _real(x: complex, tol: float) -> float:
    if abs(x.imag) > tol * max(1.0, abs(x)):
        raise NonSelfAdjoint(f"expected a real canonical parameter, got {x}")
    return float(x.real)


def classify_boundary(pair: BoundaryMatrixPair, tol: float = 1e-8) -> BoundaryClass:
    """Canonical form of the row space of (M N).

    type 1: (0 0 1 0; 0 0 0 1); type 2: (1 0 a 0; 0 0 0 1);
    type 3: (1 r e^{it} 0 s e^{it}; 0 0 1 -e^{it}/r); type 4: (1 0 a w; 0 1 w* b).
    The row space (0 1 0 a; 0 0 1 0) is type 2 with the two ends swapped.
    """
    R, piv = rref(pair.block)
    if len(piv) != 2:
        raise RankDeficient("(M N) has rank < 2")
    piv_t = tuple(piv)
    if piv_t == (2, 3):
        return BoundaryClass(1, True, {}, R)
    if piv_t == (0, 3):
        return BoundaryClass(2, True, {"alpha": _real(R[0, 2], tol), "end": "first"}, R)
    if piv_t == (1, 2):
        return BoundaryClass(2, True, {"alpha": _real(R[0, 3], tol), "end": "second"}, R)
    if piv_t == (0, 1):
        alpha, beta = _real(R[0, 2], tol), _real(R[1, 3], tol)
        omega = complex(R[0, 3])
        sep = abs(omega) <= tol
        return BoundaryClass(4, sep, {"alpha": alpha, "beta": beta, "omega": [omega.real, omega.imag]}, R)
    if piv_t == (0, 2):
        x = complex(R[0, 1])
        if x == 0:
            raise NonSelfAdjoint("degenerate type-3 row space")
        rho, theta = abs(x), math.atan2(x.imag, x.real)
        sigma = _real(R[0, 3] * np.exp(-1j * theta), tol)
        return BoundaryClass(3, False, {"rho": rho, "theta": theta, "sigma": sigma}, R)
    raise NonSelfAdjoint(f"row space with pivots {piv_t} is not self-adjoint")


def canonical_pair(kind: int, **p) -> BoundaryMatrixPair:
    """Representative (M, N) of each canonical type."""
    if kind == 1:
        B = [[0, 0, 1, 0], [0, 0, 0, 1]]
    elif kind == 2:
        B = [[1, 0, p.get("alpha", 0.0), 0], [0, 0, 0, 1]]
    elif kind == 3:
        rho, theta, sigma = p.get("rho", 1.0), p.get("theta", 0.0), p.get("sigma", 0.0)
        e = np.exp(1j * theta)
        B = [[1, rho * e, 0, sigma * e], [0, 0, 1, -e / rho]]
    elif kind == 4:
        w = complex(p.get("omega", 0.0))
        B = [[1, 0, p.get("alpha", 0.0), w], [0, 1, w.conjugate(), p.get("beta", 0.0)]]
    else:
        raise ValueError(f"unknown canonical type {kind}")
    B = np.asarray(B, dtype=complex)
    return BoundaryMatrixPair(B[:, :2], B[:, 2:])


# --------------------------------------------------------------------------
# verdict engine

VERDICT_THEOREMS = {
    "ALL_ASYMPTOTIC": "m+ and m- in A_inf give a regular infinity; in A_0 with ker A = ker A^2 a regular 0",
    "B_AND_D_INF": "with B_inf for both functions, infinity is regular iff the pair has D_inf",
    "B_AND_D_ZERO": "with B_0 for both functions, 0 is regular iff ker A = ker A^2 and the pair has D_0",
    "STIELTJES_D": "Stieltjes m+ and m- each with a single-function D-property give a regular point",
    "D_NECESSARY": "a regular infinity (0) forces the pair D_inf (D_0) property",
    "FUNDAMENTALLY_REDUCIBLE": "regular 0 and infinity with ker A = ker A^2 make A fundamentally reducible",
}


@dataclass
class RegularityVerdict:
    infinity_regular: Tri
    zero_regular: Tri
    fundamentally_reducible: Tri
    justification: list[dict] = field(default_factory=list)
    necessity_flags: list[dict] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "infinity_regular": self.infinity_regular.value,
            "zero_regular": self.zero_regular.value,
            "fundamentally_reducible": self.fundamentally_reducible.value,
            "justification": self.justification,
            "necessity_flags": self.necessity_flags,
            "flags": list(self.flags),
        }


_POINTS = {
    "infinity": (Property.B_INF, Property.D_INF, "in_A_inf", "B_AND_D_INF", "A_INF"),
    "zero": (Property.B_ZERO, Property.D_ZERO, "in_A_zero", "B_AND_D_ZERO", "A_ZERO"),
}
_SIDES = ("m_plus", "m_minus")


def _find(certs: Sequence[PropertyCertificate], prop: Property, subject: str, verdict: str) -> list[PropertyCertificate]:
    return [c for c in certs if c.property is prop and c.subject == subject and c.verdict.value == verdict]


def verdict(
    model: CouplingModel,
    certs: Sequence[PropertyCertificate],
    nonneg: NonnegativityResult | None = None,
    memberships: dict[str, Membership] | None = None,
    stieltjes: dict[str, Tri] | None = None,
) -> RegularityVerdict:
    """Regularity of 0 and infinity from certificates, by rules in priority order.

    ``memberships`` and ``stieltjes`` are keyed "m_plus"/"m_minus".  Pair
    D-certificates have subject "pair"; single-function ones carry the side.
    """
    nonneg = nonneg or nonnegativity(model)
    if not nonneg.nonnegative:
        raise NotNonnegative(f"coupling nonnegativity is {nonneg.verdict.value}; the regularity theorems do not apply")
    memberships = memberships or {}
    stieltjes = stieltjes or {}
    kernel = model.kernel_condition
    just: list[dict] = []
    nec: list[dict] = []
    flags: list[str] = []
    result: dict[str, Tri] = {}

    for point, (bprop, dprop, attr, main_id, a_tag) in _POINTS.items():
        at_zero = point == "zero"
        yes: list[dict] = []
        no: list[dict] = []

        # (1) both functions asymptotically of power type
        mem = [memberships.get(s) for s in _SIDES]
        if all(m is not None and getattr(m, attr) is Tri.YES for m in mem):
            ids = [f"{a_tag}[{s}]/POWER_FIT" for s in _SIDES]
            if not at_zero or kernel is KernelCondition.TRUE:
                yes.append({"theorem": "ALL_ASYMPTOTIC", "certificates": ids + (["KERNEL_CONDITION"] if at_zero else [])})

        # (2), (3) B-property for both functions with the pair D-property
        b_certs = [_find(certs, bprop, s, "BOUNDED") for s in _SIDES]
        d_ok = _find(certs, dprop, "pair", "BOUNDED")
        d_bad = _find(certs, dprop, "pair", "DIVERGENT")
        if all(b_certs):
            b_ids = [b[0].cert_id for b in b_certs]
            if d_ok and (not at_zero or kernel is KernelCondition.TRUE):
                yes.append({"theorem": main_id, "certificates": b_ids + [d_ok[0].cert_id] + (["KERNEL_CONDITION"] if at_zero else [])})
            if d_bad:
                no.append({"theorem": main_id, "certificates": b_ids + [d_bad[0].cert_id]})
            if at_zero and kernel is KernelCondition.FALSE:
                no.append({"theorem": main_id, "certificates": b_ids + ["KERNEL_CONDITION"]})

        # (4) Stieltjes functions with single-function D-properties
        single = [_find(certs, dprop, s, "BOUNDED") for s in _SIDES]
        if all(stieltjes.get(s) is Tri.YES for s in _SIDES) and all(single):
            if not at_zero or kernel is KernelCondition.TRUE:
                yes.append({
                    "theorem": "STIELTJES_D",
                    "certificates": [f"STIELTJES[{s}]" for s in _SIDES] + [c[0].cert_id for c in single]
                    + (["KERNEL_CONDITION"] if at_zero else []),
                })

        # (5) necessity of the pair D-property
        if d_bad:
            entry = {"theorem": "D_NECESSARY", "certificates": [d_bad[0].cert_id]}
            no.append(entry)
            nec.append({"point": point, **entry})

        if no:
            val = Tri.NO
            if yes:
                flags.append(f"CONFLICT_{point.upper()}")
            chain = no
        elif yes:
            val, chain = Tri.YES, yes
        else:
            val, chain = Tri.INCONCLUSIVE, []
        result[point] = val
        for entry in chain:
            just.append({"point": point, "conclusion": "REGULAR" if val is Tri.YES else "SINGULAR", **entry})

    inf_r, zero_r = result["infinity"], result["zero"]
    if inf_r is Tri.YES and zero_r is Tri.YES and kernel is KernelCondition.TRUE:
        fr = Tri.YES
        all_pos = [e for e in just if e["theorem"] == "ALL_ASYMPTOTIC"]
        route = "ALL_ASYMPTOTIC" if len(all_pos) == 2 else "FUNDAMENTALLY_REDUCIBLE"
        just.append({
            "point": "both", "conclusion": "FUNDAMENTALLY_REDUCIBLE", "theorem": route,
            "certificates": sorted({c for e in just for c in e["certificates"]}),
        })
    elif Tri.NO in (inf_r, zero_r):
        fr = Tri.NO
    else:
        fr = Tri.INCONCLUSIVE
    return RegularityVerdict(inf_r, zero_r, fr, just, nec, flags)


def veselic_bound(d_cert: PropertyCertificate, b_cert_plus: PropertyCertificate, b_cert_minus: PropertyCertificate) -> float:
    """2 C1 C2^2 with C1 the pair D-constant and C2 the larger B-constant."""
    for c in (d_cert, b_cert_plus, b_cert_minus):
        if not c.bounded:
            raise MissingConstant(f"certificate {c.cert_id} is {c.verdict.value}")
    C1 = d_cert.constants.get("C1")
    C2s = [c.constants.get("C2") for c in (b_cert_plus, b_cert_minus)]
    if C1 is None or any(c is None for c in C2s) or not all(math.isfinite(x) for x in (C1, *C2s)):
        raise MissingConstant("a bounded certificate lacks its constant")
    return 2.0 * float(C1) * max(C2s) ** 2


__all__ = [
    "BoundaryClass",
    "BoundaryMatrixPair",
    "CouplingModel",
    "KernelCondition",
    "NonnegativityResult",
    "RegularityVerdict",
    "ResolventSolution",
    "VERDICT_THEOREMS",
    "canonical_pair",
    "classify_boundary",
    "denominator",
    "indicator",
    "nonnegativity",
    "probe_grid",
    "probe_resolvent_set",
    "resolvent_identity_residual",
    "resolvent_solve",
    "tabulated_source",
    "verdict",
    "veselic_bound",
]
