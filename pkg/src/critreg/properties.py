"""Certificates for the D-properties (ratio bounds) and B-properties (integral operator bounds)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import mobius as mb
from .asymptotics import (
    EDGE_BAND,
    Membership,
    PowerFit,
    Regime,
    d_limit_predict,
    fit_power_law,
)
from .errors import (
    CritRegError,
    DegenerateDenominator,
    DenominatorVanishes,
    FitFailed,
    MeasureError,
    MeasureUnavailable,
    NonConvergent,
    PreconditionViolation,
)
from .nevanlinna_core import (
    ClassReport,
    FromMeasure,
    MobiusOf,
    NevanlinnaExpr,
    SpectralMeasure,
    Transpose,
    _loglog_slope,
    classify,
    evaluate,
    exact_stieltjes_form,
    stieltjes_invert,
)
from .tri import Tri

SLOPE_TOL = 0.02
MAX_SLOPE_RESIDUAL = 0.1
PLATEAU_TOL = 0.05
GROWTH_RATIO = 0.9
DECAY_RATIO = 0.75


class Property(str, Enum):
    D_INF = "D_INF"
    D_ZERO = "D_ZERO"
    B_INF = "B_INF"
    B_ZERO = "B_ZERO"


class Verdict(str, Enum):
    BOUNDED = "BOUNDED"
    DIVERGENT = "DIVERGENT"
    INCONCLUSIVE = "INCONCLUSIVE"


# Identifiers of the implications used by the rule engines, with one-line statements.
THEOREMS = {
    "ASYMP_INF_GIVES_B_INF": "every function of class A_inf has the B_inf-property",
    "ASYMP_ZERO_GIVES_B_ZERO": "every function of class A_0 has the B_0-property",
    "STIELTJES_D_TRANSFER": "a Stieltjes m+ with the single-function D-property gives the pair D-property for every Stieltjes m-",
    "ASYMP_PAIR_D": "m+ and m- in A_inf (A_0) give the pair D_inf (D_0) property",
    "STIELTJES_D_GIVES_B": "for a Stieltjes function the single-function D-property implies the B-property",
    "MOBIUS_B_INVARIANCE": "B-properties are invariant under post-composition with a Moebius map",
    "RECIPROCAL_B_SWAP": "m has B_0 iff -m(1/z) has B_inf",
    "SCHUR_TEST": "Schur test for integral operators with a positive kernel",
}


def implied(theorem: str) -> str:
    return f"IMPLIED_BY({theorem})"


def _enc(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
    return x


@dataclass
class PropertyCertificate:
    property: Property
    verdict: Verdict
    subject: str
    method: str
    sup_value: float = math.nan
    tail_slope: float = math.nan
    fit_residual: float = math.nan
    grid: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)

    @property
    def cert_id(self) -> str:
        return f"{self.property.value}[{self.subject}]/{self.method}"

    @property
    def bounded(self) -> bool:
        return self.verdict is Verdict.BOUNDED

    @property
    def divergent(self) -> bool:
        return self.verdict is Verdict.DIVERGENT

    def to_dict(self) -> dict:
        return {
            "id": self.cert_id,
            "property": self.property.value,
            "verdict": self.verdict.value,
            "subject": self.subject,
            "method": self.method,
            "sup_value": _enc(self.sup_value),
            "tail_slope": _enc(self.tail_slope),
            "fit_residual": _enc(self.fit_residual),
            "grid": {k: _enc(v) for k, v in self.grid.items()},
            "constants": {k: _enc(v) for k, v in self.constants.items()},
            "evidence": {k: _enc(v) for k, v in self.evidence.items()},
        }


def _regime(regime) -> Regime:
    if isinstance(regime, Property):
        return Regime.AT_INF if regime in (Property.D_INF, Property.B_INF) else Regime.AT_ZERO
    return Regime(regime)


# --------------------------------------------------------------------------
# D-property


def d_ratio(m_plus: NevanlinnaExpr, m_minus: NevanlinnaExpr, y, conjugate: bool = False):
    """Numerator and denominator of (Im m+(iy) + Im m-(iy)) / |m+(iy) + m-(-iy)|.

    With ``conjugate`` the values are taken at -iy and mapped back by
    conjugate symmetry.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    num = np.empty(y.size)
    den = np.empty(y.size)
    s = -1.0 if conjugate else 1.0
    for k, yy in enumerate(y):
        a = evaluate(m_plus, complex(0.0, s * yy))
        b = evaluate(m_minus, complex(0.0, s * yy))
        c = evaluate(m_minus, complex(0.0, -s * yy))
        num[k] = s * (a.imag + b.imag)
        den[k] = abs(a + c)
    return num, den


def d_grid(regime: Regime, per_decade: int = 64) -> np.ndarray:
    lo, hi = (0, 8) if regime is Regime.AT_INF else (-8, 0)
    return 10.0 ** np.linspace(lo, hi, (hi - lo) * per_decade + 1)


def d_certify(
    m_plus: NevanlinnaExpr,
    m_minus: NevanlinnaExpr,
    regime,
    per_decade: int = 64,
    conjugate: bool = False,
    slope_tol: float = SLOPE_TOL,
    subject: str = "pair",
) -> PropertyCertificate:
    """Grid certificate for the D-ratio on (1, 1e8) or (1e-8, 1)."""
    regime = _regime(regime)
    prop = Property.D_INF if regime is Regime.AT_INF else Property.D_ZERO
    y = d_grid(regime, per_decade)
    num, den = d_ratio(m_plus, m_minus, y, conjugate)
    bad = np.flatnonzero(den < 1e-14 * np.abs(num)) if np.any(num != 0) else np.flatnonzero(den == 0)
    if bad.size:
        raise DenominatorVanishes(f"|m+(iy) + m-(-iy)| vanishes at y = {y[bad[0]]:g}")
    R = num / den
    grid = {"y_min": float(y[0]), "y_max": float(y[-1]), "per_decade": per_decade, "conjugate": conjugate}
    # last decade toward the regime endpoint
    tail = slice(-(per_decade + 1), None) if regime is Regime.AT_INF else slice(0, per_decade + 1)
    ev = {"endpoint_value": float(R[-1] if regime is Regime.AT_INF else R[0])}
    if np.any(R <= 0) or not np.all(np.isfinite(R)):
        return PropertyCertificate(prop, Verdict.INCONCLUSIVE, subject, "GRID_RATIO", float(np.nanmax(R)), math.nan, math.nan, grid, {}, ev)
    slope, resid = _loglog_slope(y[tail], R[tail])
    growth = slope if regime is Regime.AT_INF else -slope
    sup = float(np.max(R))
    if growth <= slope_tol:
        verdict = Verdict.BOUNDED
    elif resid <= MAX_SLOPE_RESIDUAL:
        verdict = Verdict.DIVERGENT
    else:
        verdict = Verdict.INCONCLUSIVE
    consts = {"C1": sup} if verdict is Verdict.BOUNDED else {}
    ev["growth_exponent"] = float(growth)
    return PropertyCertificate(prop, verdict, subject, "GRID_RATIO", sup, float(slope), resid, grid, consts, ev)


def d_certify_single(m: NevanlinnaExpr, regime, subject: str = "m", **kw) -> PropertyCertificate:
    """Single-function D-property, the pair (m, m): Im m(iy)/Re m(iy)."""
    return d_certify(m, m, regime, subject=subject, **kw)


# --------------------------------------------------------------------------
# reduction to Stieltjes functions


@dataclass
class Reduction:
    """A Stieltjes function whose B-properties coincide with those of the input."""

    expr: NevanlinnaExpr
    steps: list[str]


def stieltjesize(m: NevanlinnaExpr, report: ClassReport | None = None) -> Reduction | None:
    """Post-compose with a Moebius map to reach a Stieltjes function, or None."""
    report = report or classify(m)
    if report.is_stieltjes is Tri.YES:
        return Reduction(m, [])
    if report.pole_on_negative_axis is not None or report.in_SM is not Tri.YES:
        return None
    if report.is_inverse_stieltjes is Tri.YES:
        return Reduction(Transpose(m), ["transpose"])
    a, b = report.m_minus_inf, report.m_zero_minus
    if math.isfinite(a):
        return Reduction(MobiusOf(mb.IDENTITY, mb.shift(-a), m), [f"shift({-a:.6g})"])
    if math.isfinite(b):
        return Reduction(MobiusOf(mb.IDENTITY, mb.normalize(0, -1, 1, -b), m), [f"-1/(m - {b:.6g})"])
    return None


def reciprocal_flip(m: NevanlinnaExpr) -> NevanlinnaExpr:
    """-m(1/z); its B_inf-property is the B_0-property of m."""
    return MobiusOf(mb.RECIPROCAL, mb.IDENTITY, m)


def reduce_b0(m: NevanlinnaExpr) -> Reduction | None:
    flipped = reciprocal_flip(m)
    red = stieltjesize(flipped)
    if red is None:
        return None
    return Reduction(red.expr, ["-m(1/z)"] + red.steps)


# --------------------------------------------------------------------------
# quadrature against sigma


_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)
_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


@dataclass
class SigmaNodes:
    """Quadrature nodes x and masses for a measure on [0, inf)."""

    x: np.ndarray
    mass: np.ndarray
    atoms: int  # number of leading entries that are true atoms


def _log_panels(lo: float, hi: float, breaks: Sequence[float]):
    pts = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    dec = np.arange(math.ceil(math.log10(lo)), math.floor(math.log10(hi)) + 1)
    pts = sorted(set(pts) | {float(10.0**d) for d in dec if lo < 10.0**d < hi})
    return list(zip(pts[:-1], pts[1:]))


def _panel_nodes(panels, density, gx, gw):
    xs, ms = [], []
    for a, b in panels:
        la, lb = math.log(a), math.log(b)
        u = 0.5 * (lb - la) * gx + 0.5 * (la + lb)
        t = np.exp(u)
        xs.append(t)
        ms.append(0.5 * (lb - la) * gw * t * density(t))
    return np.concatenate(xs), np.concatenate(ms)


def sigma_nodes(sigma: SpectralMeasure, lo: float = 1e-12, hi: float = 1e16) -> SigmaNodes:
    """Discretize sigma: atoms, Gauss-Legendre panels in log t, lumped end masses."""
    breaks = [s.t0 for s in sigma.segments] + [s.t1 for s in sigma.segments if math.isfinite(s.t1)]
    x, m = _panel_nodes(_log_panels(lo, hi, breaks), sigma.density, _GL4_X, _GL4_W)
    head = sum(s.mass() for s in _clip(sigma, 0.0, lo))
    ax = [t for t, _ in sigma.atoms]
    aw = [w for _, w in sigma.atoms]
    if head > 0 and math.isfinite(head):
        ax.append(0.5 * lo)
        aw.append(head)
    keep = m > 0
    return SigmaNodes(
        np.concatenate([np.asarray(ax, float), x[keep]]),
        np.concatenate([np.asarray(aw, float), m[keep]]),
        len(sigma.atoms),
    )


def _clip(sigma: SpectralMeasure, a: float, b: float):
    from .nevanlinna_core import DensitySegment

    out = []
    for s in sigma.segments:
        lo, hi = max(a, s.t0), min(b, s.t1)
        if hi > lo:
            out.append(DensitySegment(lo, hi, s.c, s.a))
    return out


def _measure_of(m: NevanlinnaExpr) -> tuple[float, SpectralMeasure]:
    """(gamma, sigma) of a Stieltjes expression."""
    exact = exact_stieltjes_form(m)
    if exact is not None:
        return exact.gamma, exact.sigma
    if isinstance(m, FromMeasure):
        return m.a, m.sigma
    try:
        inv = stieltjes_invert(m)
    except (NonConvergent, MeasureError, CritRegError) as exc:
        raise MeasureUnavailable(f"spectral measure not obtainable: {exc}") from exc
    return 0.0, inv


def _weight(m: NevanlinnaExpr, y: np.ndarray) -> np.ndarray:
    im = np.array([evaluate(m, complex(0.0, yy)).imag for yy in y])
    if np.any(im < 1e-300):
        raise PreconditionViolation("Im m(iy) vanishes on the weight grid")
    return 1.0 / im


def _y_panels(lo: float, hi: float, per_decade: int):
    n = max(1, round(math.log10(hi / lo) * per_decade / 8))
    edges = np.geomspace(lo, hi, n + 1)
    return list(zip(edges[:-1], edges[1:]))


def y_nodes(lo: float, hi: float, per_decade: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes in log y and dy-weights on [lo, hi]."""
    return _panel_nodes(_y_panels(lo, hi, per_decade), lambda t: np.ones_like(t), _GL8_X, _GL8_W)


# --------------------------------------------------------------------------
# Schur test


def _decay_exponent(m: NevanlinnaExpr) -> tuple[float, PowerFit]:
    fit = fit_power_law(m, Regime.AT_INF)
    alpha = -fit.alpha1 if fit.two_term else -fit.alpha0
    return alpha, fit


def b_certify_schur(
    m: NevanlinnaExpr,
    regime,
    beta: float | None = None,
    y_max: float = 1e14,
    x_max: float = 1e12,
    slope_tol: float = SLOPE_TOL,
) -> PropertyCertificate:
    """Schur-test certificate with q1 = (1+x)^(-beta), q2 = H q1.

    The Schur test is only sufficient, so failure yields INCONCLUSIVE.
    B_0 is reduced to B_inf of -m(1/z).
    """
    regime = _regime(regime)
    prop = Property.B_INF if regime is Regime.AT_INF else Property.B_ZERO
    red = stieltjesize(m) if regime is Regime.AT_INF else reduce_b0(m)
    if red is None:
        return PropertyCertificate(prop, Verdict.INCONCLUSIVE, "m", "SCHUR_TEST", evidence={"reason": "no Stieltjes reduction"})
    ms = red.expr
    ev: dict = {"reduction": " ; ".join(red.steps) or "none"}
    try:
        alpha, fit = _decay_exponent(ms)
    except FitFailed as exc:
        if beta is None:
            ev["reason"] = f"decay exponent unavailable: {exc}"
            return PropertyCertificate(prop, Verdict.INCONCLUSIVE, "m", "SCHUR_TEST", evidence=ev)
        alpha = math.nan
    ev["alpha"] = alpha
    if beta is None:
        if not (alpha < 1.0 - EDGE_BAND):
            ev["reason"] = f"decay exponent {alpha:.4g} leaves no admissible beta"
            return PropertyCertificate(prop, Verdict.INCONCLUSIVE, "m", "SCHUR_TEST", evidence=ev)
        beta = (1.0 - max(alpha, 0.0)) / 2.0
    elif beta <= 0 or (math.isfinite(alpha) and alpha + beta >= 1.0):
        raise PreconditionViolation(f"need beta > 0 and alpha + beta < 1 (alpha = {alpha:.4g}, beta = {beta})")
    _, sigma = _measure_of(ms)
    nodes = sigma_nodes(sigma)
    y, dy = y_nodes(1.0, y_max)
    w = _weight(ms, y)
    q1 = (1.0 + nodes.x) ** (-beta)
    K = 1.0 / (nodes.x[None, :] + y[:, None])
    q2 = K @ (q1 * nodes.mass)
    # for y >> x the second Schur integrand is q2 w in d(log y); extrapolate its power tail
    yy, g = y[-16:], (q2 * w)[-16:]
    p, _ = _loglog_slope(yy, g)
    if p >= -slope_tol:
        ev["reason"] = f"second Schur integral does not converge (slope {p:.3g})"
        return PropertyCertificate(prop, Verdict.INCONCLUSIVE, "m", "SCHUR_TEST", evidence=ev)
    sel = nodes.x <= x_max
    xs = nodes.x[sel]
    S = ((K[:, sel] * (q2 * w * dy)[:, None]).sum(axis=0) + g[-1] / (-p)) / q1[sel]
    sup = float(np.max(S))
    order = np.argsort(xs)
    xo, So = xs[order], S[order]
    big = xo >= xo[-1] / 1e2
    slope, resid = _loglog_slope(xo[big], So[big])
    grid = {"x_nodes": int(xs.size), "x_max": x_max, "y_nodes": int(y.size), "y_max": y_max, "beta": beta}
    ev.update(first_schur_sup=1.0, tail_exponent=p)
    if math.isfinite(sup) and slope <= slope_tol:
        return PropertyCertificate(prop, Verdict.BOUNDED, "m", "SCHUR_TEST", sup, slope, resid, grid, {"C2": math.sqrt(sup)}, ev)
    return PropertyCertificate(prop, Verdict.INCONCLUSIVE, "m", "SCHUR_TEST", sup, slope, resid, grid, {}, ev)


# --------------------------------------------------------------------------
# discretized operator norm


def _power_norm(A: np.ndarray, iters: int = 500, tol: float = 1e-12) -> float:
    """Largest singular value by power iteration on A^T A."""
    v = np.ones(A.shape[1]) / math.sqrt(A.shape[1])
    s = 0.0
    for _ in range(iters):
        u = A @ v
        v2 = A.T @ u
        n = np.linalg.norm(v2)
        if n == 0:
            return 0.0
        v2 /= n
        s_new = math.sqrt(n)
        if abs(s_new - s) <= tol * s_new:
            return s_new
        v, s = v2, s_new
    return s


def h_matrix(nodes: SigmaNodes, y: np.ndarray, dy: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Matrix of H f(y) = int f dsigma/(x+y) between the weighted l^2 spaces."""
    return np.sqrt(w * dy)[:, None] / (nodes.x[None, :] + y[:, None]) * np.sqrt(nodes.mass)[None, :]


DEFAULT_LADDER = (1e2, 1e4, 1e6, 1e8)


def b_certify_discretized(
    m: NevanlinnaExpr,
    regime,
    N: int = 256,
    ladder: Sequence[float] = DEFAULT_LADDER,
    sigma: SpectralMeasure | None = None,
    weight_expr: NevanlinnaExpr | None = None,
) -> PropertyCertificate:
    """Operator-norm estimates of H on the windows [1, L] (or [1/L, 1]) of the ladder.

    ``N`` is the number of y nodes in the largest window.  The measure comes
    from a Stieltjes reduction (B is invariant under post-composition) unless
    ``sigma`` is given, in which case ``m`` supplies the weight directly.
    """
    regime = _regime(regime)
    prop = Property.B_INF if regime is Regime.AT_INF else Property.B_ZERO
    ev: dict = {}
    if sigma is None:
        red = stieltjesize(m)
        if red is None:
            return PropertyCertificate(prop, Verdict.INCONCLUSIVE, "m", "DISCRETIZED_NORM", evidence={"reason": "no Stieltjes reduction"})
        ms = red.expr
        ev["reduction"] = " ; ".join(red.steps) or "none"
        _, sigma = _measure_of(ms)
    else:
        ms = weight_expr or m
    nodes = sigma_nodes(sigma)
    per_decade = max(8, int(round(N / math.log10(max(ladder)))))
    norms = []
    for L in ladder:
        lo, hi = (1.0, L) if regime is Regime.AT_INF else (1.0 / L, 1.0)
        y, dy = y_nodes(lo, hi, per_decade)
        A = h_matrix(nodes, y, dy, _weight(ms, y))
        norms.append(_power_norm(A))
    inc = [norms[k + 1] / norms[k] - 1.0 for k in range(len(norms) - 1)]
    slope = math.log(norms[-1] / norms[-2]) / math.log(ladder[-1] / ladder[-2])
    # increments of the squared norm per ladder step: constant for logarithmic
    # growth, geometrically decaying when the norm converges
    d2 = [norms[k + 1] ** 2 - norms[k] ** 2 for k in range(len(norms) - 1)]
    ratio = d2[-1] / d2[-2] if len(d2) >= 2 and d2[-2] > 0 else math.nan
    limit = norms[-1]
    if inc[-1] <= PLATEAU_TOL and not ratio >= GROWTH_RATIO:
        verdict = Verdict.BOUNDED
    elif ratio >= GROWTH_RATIO and slope >= SLOPE_TOL:
        verdict = Verdict.DIVERGENT
    elif ratio <= DECAY_RATIO:
        verdict = Verdict.BOUNDED
        limit = math.sqrt(norms[-1] ** 2 + max(d2[-1], 0.0) * ratio / (1.0 - ratio))
    else:
        verdict = Verdict.INCONCLUSIVE
    ev["increment_ratio"] = ratio
    grid = {"ladder": ",".join(f"{L:g}" for L in ladder), "y_per_decade": per_decade, "x_nodes": int(nodes.x.size)}
    ev.update({f"norm_{L:g}": n for L, n in zip(ladder, norms)})
    ev["last_increment"] = inc[-1]
    consts = {"C2": limit} if verdict is Verdict.BOUNDED else {}
    return PropertyCertificate(prop, verdict, "m", "DISCRETIZED_NORM", limit, slope, math.nan, grid, consts, ev)


def rank_one_norm(w_expr: NevanlinnaExpr, t: float, mass: float, y_max: float) -> float:
    """Closed form for sigma = mass * delta_t: sqrt(mass * int_1^ymax w/(t+y)^2 dy)."""
    from scipy import integrate

    f = lambda u: math.exp(u) / evaluate(w_expr, complex(0.0, math.exp(u))).imag / (t + math.exp(u)) ** 2
    val, _ = integrate.quad(f, 0.0, math.log(y_max), limit=400, epsabs=0.0, epsrel=1e-12)
    return math.sqrt(mass * val)


# --------------------------------------------------------------------------
# implication rules


def _tag(prop: Property, subject: str, theorem: str, **constants) -> PropertyCertificate:
    return PropertyCertificate(prop, Verdict.BOUNDED, subject, implied(theorem), constants=dict(constants))


def derive_properties(
    m_plus: NevanlinnaExpr | None,
    m_minus: NevanlinnaExpr | None,
    class_reports: dict,
    fits: dict,
    single_d: dict | None = None,
) -> list[PropertyCertificate]:
    """Certificates that follow from resolved class memberships.

    ``class_reports`` maps "m_plus"/"m_minus" to ClassReport, ``fits`` maps
    them to Membership, ``single_d`` maps (side, Property) to a grid
    certificate of the single-function D-property.
    """
    single_d = single_d or {}
    out: list[PropertyCertificate] = []
    mem: dict[str, Membership | None] = {s: fits.get(s) for s in ("m_plus", "m_minus")}
    rep: dict[str, ClassReport | None] = {s: class_reports.get(s) for s in ("m_plus", "m_minus")}

    for side in ("m_plus", "m_minus"):
        ms = mem[side]
        if ms is None:
            continue
        if ms.in_A_inf is Tri.YES:
            out.append(_tag(Property.B_INF, side, "ASYMP_INF_GIVES_B_INF"))
        if ms.in_A_zero is Tri.YES:
            out.append(_tag(Property.B_ZERO, side, "ASYMP_ZERO_GIVES_B_ZERO"))

    for prop, attr, regime in (
        (Property.D_INF, "in_A_inf", Regime.AT_INF),
        (Property.D_ZERO, "in_A_zero", Regime.AT_ZERO),
    ):
        mp, mm = mem["m_plus"], mem["m_minus"]
        if mp and mm and getattr(mp, attr) is Tri.YES and getattr(mm, attr) is Tri.YES:
            fp = mp.fit_inf if regime is Regime.AT_INF else mp.fit_zero
            fm = mm.fit_inf if regime is Regime.AT_INF else mm.fit_zero
            consts = {}
            try:
                consts["predicted_limit"] = d_limit_predict(fp, fm)
            except (DegenerateDenominator, ValueError, TypeError):
                pass
            out.append(_tag(prop, "pair", "ASYMP_PAIR_D", **consts))

    stj = {s: (rep[s] is not None and rep[s].is_stieltjes is Tri.YES) for s in ("m_plus", "m_minus")}
    for prop in (Property.D_INF, Property.D_ZERO):
        bprop = Property.B_INF if prop is Property.D_INF else Property.B_ZERO
        for side in ("m_plus", "m_minus"):
            cert = single_d.get((side, prop))
            if cert is None or not cert.bounded or not stj[side]:
                continue
            out.append(_tag(bprop, side, "STIELTJES_D_GIVES_B"))
            other = "m_minus" if side == "m_plus" else "m_plus"
            if stj[other] and not any(c.property is prop and c.subject == "pair" and "STIELTJES_D_TRANSFER" in c.method for c in out):
                out.append(_tag(prop, "pair", "STIELTJES_D_TRANSFER", C1_bound=cert.sup_value + 1.0))
    return out


def consistent(a: PropertyCertificate, b: PropertyCertificate) -> bool:
    """No BOUNDED/DIVERGENT contradiction between two certificates."""
    return {a.verdict, b.verdict} != {Verdict.BOUNDED, Verdict.DIVERGENT}


__all__ = [
    "DEFAULT_LADDER",
    "Property",
    "PropertyCertificate",
    "Reduction",
    "SLOPE_TOL",
    "THEOREMS",
    "Verdict",
    "b_certify_discretized",
    "b_certify_schur",
    "consistent",
    "d_certify",
    "d_certify_single",
    "d_ratio",
    "derive_properties",
    "h_matrix",
    "rank_one_norm",
    "reduce_b0",
    "sigma_nodes",
    "stieltjesize",
    "y_nodes",
]
