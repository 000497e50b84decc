"""Power-law asymptotics at 0 and infinity, Tauberian checks and the D-limit formula."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DegenerateDenominator, FitFailed, MismatchedPair
from .nevanlinna_core import (
    ClassReport,
    NevanlinnaExpr,
    SpectralMeasure,
    _loglog_slope,
    classify,
    evaluate,
    neg_pow,
    stieltjes_transform,
)
from .tri import Tri


class Regime(str, Enum):
    AT_INF = "AT_INF"
    AT_ZERO = "AT_ZERO"


DEFAULT_WINDOWS = {Regime.AT_INF: (1e3, 1e7), Regime.AT_ZERO: (1e-7, 1e-3)}
PROBES: tuple[complex, ...] = (1j, -1 + 1j, 1 + 2j)
ZERO_BAND = 0.01
EDGE_BAND = 0.01
MAX_FIT_RESIDUAL = 0.05


@dataclass
class PowerFit:
    """m(rz) ~ C0 (-rz)^alpha0, or m(rz) - C0 ~ C1 (-rz)^alpha1 when alpha0 = 0.

    ``C1`` is the signed coefficient of the second term.
    """

    regime: Regime
    alpha0: float
    C0: float
    alpha1: float | None = None
    C1: float | None = None
    residual: float = math.nan
    window: tuple[float, float] = (math.nan, math.nan)
    evidence: dict = field(default_factory=dict)

    @property
    def two_term(self) -> bool:
        return self.alpha1 is not None

    def model(self, w: complex) -> complex:
        """Model value at the point w = r z."""
        if self.two_term:
            return self.C0 + self.C1 * neg_pow(w, self.alpha1)
        return self.C0 * neg_pow(w, self.alpha0)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "alpha0": self.alpha0,
            "C0": self.C0,
            "alpha1": self.alpha1,
            "C1": self.C1,
            "residual": self.residual,
            "window": list(self.window),
            "evidence": self.evidence,
        }


def _window_nodes(regime: Regime, window, nodes: int) -> np.ndarray:
    lo, hi = window or DEFAULT_WINDOWS[regime]
    if not (0 < lo < hi):
        raise ValueError(f"invalid fit window {window}")
    return 10.0 ** np.linspace(math.log10(lo), math.log10(hi), nodes)


def fit_power_law(
    f: NevanlinnaExpr,
    regime: Regime | str,
    window: tuple[float, float] | None = None,
    nodes: int = 16,
    probes: Sequence[complex] = PROBES,
) -> PowerFit:
    """Fit the leading power law (and the second term when alpha0 is near 0).

    Exponents come from log-log slopes on the half of the window nearest
    the regime endpoint; coefficients from phase-consistent averaging.
    """
    regime = Regime(regime)
    r = _window_nodes(regime, window, nodes)
    vals = np.array([[evaluate(f, rr * z) for rr in r] for z in probes])
    half = nodes // 2
    end = slice(half, None) if regime is Regime.AT_INF else slice(0, nodes - half)
    mag = np.abs(vals[0])
    if np.any(mag == 0):
        raise FitFailed("function vanishes on the probe ray")
    alpha0, _ = _loglog_slope(r[end], mag[end])
    ev: dict = {"alpha0_raw": alpha0}
    w = r[None, :] * np.asarray(probes)[:, None]
    if abs(alpha0) <= ZERO_BAND:
        im = np.abs(vals[0].imag)
        if np.all(im > 0):
            # the third term biases the slope, so use the quarter nearest the endpoint
            q = nodes // 4
            tip = slice(nodes - q, None) if regime is Regime.AT_INF else slice(0, q)
            alpha1, _ = _loglog_slope(r[tip], im[tip])
            basis = np.array([[neg_pow(x, alpha1) for x in row] for row in w])
            C1 = float(np.mean(vals[0].imag[end] / basis[0].imag[end]))
            C0 = float(np.mean((vals - C1 * basis)[:, end].real))
            model = C0 + C1 * basis
            second = np.max(np.abs((vals - C0) / (C1 * basis) - 1.0))
            ev["second_term_residual"] = float(second)
            fit = PowerFit(regime, 0.0, C0, float(alpha1), C1)
        else:
            C0 = float(np.mean(vals.real))
            model = np.full_like(vals, C0)
            fit = PowerFit(regime, 0.0, C0)
    else:
        basis = np.array([[neg_pow(x, alpha0) for x in row] for row in w])
        C0 = float(np.mean((vals / basis)[:, end].real))
        model = C0 * basis
        fit = PowerFit(regime, float(alpha0), C0)
    fit.residual = float(np.max(np.abs(vals / model - 1.0)))
    fit.window = (float(r[0]), float(r[-1]))
    fit.evidence = ev
    if not math.isfinite(fit.residual) or fit.residual > MAX_FIT_RESIDUAL:
        raise FitFailed(f"power-law fit residual {fit.residual:.3g} exceeds {MAX_FIT_RESIDUAL}")
    return fit


def fit_admissible(fit: PowerFit) -> Tri:
    """Whether fitted parameters lie in the alternatives defining A_inf / A_0."""
    a0, C0 = fit.alpha0, fit.C0
    if fit.two_term:
        a1, C1 = fit.alpha1, fit.C1
        if C0 == 0.0:
            return Tri.NO
        if fit.regime is Regime.AT_INF:
            ok = -1.0 + EDGE_BAND < a1 < -ZERO_BAND and C1 > 0
        else:
            ok = ZERO_BAND < a1 < 1.0 - EDGE_BAND and C1 < 0
        return Tri.of(ok)
    if a0 == 0.0:
        return Tri.NO  # constant without a second term
    if abs(a0) >= 1.0 - EDGE_BAND:
        return Tri.NO
    ok = (a0 < 0 and C0 > 0) or (a0 > 0 and C0 < 0)
    return Tri.of(ok)


@dataclass
class Membership:
    in_A_inf: Tri
    in_A_zero: Tri
    fit_inf: PowerFit | None
    fit_zero: PowerFit | None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "in_A_inf": self.in_A_inf.value,
            "in_A_zero": self.in_A_zero.value,
            "fit_inf": self.fit_inf.to_dict() if self.fit_inf else None,
            "fit_zero": self.fit_zero.to_dict() if self.fit_zero else None,
            "notes": self.notes,
        }


def class_membership(
    f: NevanlinnaExpr,
    report: ClassReport | None = None,
    windows: dict | None = None,
) -> Membership:
    """Sampled membership of f in A_inf and A_0."""
    report = report or classify(f)
    windows = windows or {}
    fits: dict[Regime, PowerFit | None] = {}
    flags: dict[Regime, Tri] = {}
    notes: dict = {}
    for regime in Regime:
        try:
            fit = fit_power_law(f, regime, window=windows.get(regime))
        except FitFailed as exc:
            fits[regime] = None
            notes[regime.value] = str(exc)
            flags[regime] = Tri.NO if report.in_SM is Tri.NO else Tri.INCONCLUSIVE
            continue
        fits[regime] = fit
        adm = fit_admissible(fit)
        if report.in_SM is Tri.NO or adm is Tri.NO:
            flags[regime] = Tri.NO
        elif report.in_SM is Tri.YES and adm is Tri.YES:
            flags[regime] = Tri.YES
        else:
            flags[regime] = Tri.INCONCLUSIVE
    return Membership(flags[Regime.AT_INF], flags[Regime.AT_ZERO], fits[Regime.AT_INF], fits[Regime.AT_ZERO], notes)


# --------------------------------------------------------------------------
# Tauberian pair


def tauberian_sigma_model(alpha: float, C: float, t: float) -> float:
    """C sin(pi alpha)/pi * t^(1-alpha)/(1-alpha)."""
    return C * math.sin(math.pi * alpha) / math.pi * t ** (1.0 - alpha) / (1.0 - alpha)


def forward_residual(sigma: SpectralMeasure, alpha: float, C: float, z: complex) -> float:
    """Relative defect of the Stieltjes transform of sigma against C (-z)^(-alpha)."""
    model = C * neg_pow(z, -alpha)
    return abs(stieltjes_transform(sigma, z) / model - 1.0)


@dataclass
class TauberianReport:
    alpha: float
    C: float
    forward: dict
    inverse: dict

    @property
    def forward_max(self) -> float:
        return max(self.forward.values())

    @property
    def inverse_max(self) -> float:
        return max(abs(v - 1.0) for v in self.inverse.values())

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "C": self.C, "forward": self.forward, "inverse_ratio": self.inverse}


def tauberian_check(
    sigma: SpectralMeasure,
    alpha: float,
    C: float,
    radii: Sequence[float] = (1e2, 1e3, 1e4),
    times: Sequence[float] = (1e2, 1e3, 1e4),
    tol: float = 0.05,
) -> TauberianReport:
    """Check both directions of the pair m(rz) ~ C/(-rz)^alpha <-> sigma(t) ~ C sin(pi alpha) t^(1-alpha)/(pi(1-alpha))."""
    if not (0.0 < alpha < 1.0) or C <= 0:
        raise ValueError("need alpha in (0, 1) and C > 0")
    inverse = {f"{t:g}": sigma.cdf(t) / tauberian_sigma_model(alpha, C, t) for t in times}
    if sigma.growth_ok(1):
        forward = {f"{r:g}i": forward_residual(sigma, alpha, C, complex(0.0, r)) for r in radii}
    else:
        forward = {f"{r:g}i": math.inf for r in radii}
    rep = TauberianReport(alpha, C, forward, inverse)
    if rep.forward_max > tol or rep.inverse_max > tol:
        raise MismatchedPair(
            f"Tauberian pair mismatch: forward {rep.forward_max:.3g}, inverse {rep.inverse_max:.3g}"
        )
    return rep


# --------------------------------------------------------------------------
# limit of the D-ratio


def _limit_terms(ap: float, Cp: float, am: float, Cm: float, regime: Regime) -> float:
    dom = max(ap, am) if regime is Regime.AT_INF else min(ap, am)
    ep = 1.0 if abs(ap - dom) <= ZERO_BAND else 0.0
    em = 1.0 if abs(am - dom) <= ZERO_BAND else 0.0
    # m(iy) ~ C y^a (-i)^a, so Im m(iy) ~ -C sin(pi a/2) y^a; m(-iy) ~ C y^a i^a
    num = -(ep * Cp * math.sin(math.pi * ap / 2) + em * Cm * math.sin(math.pi * am / 2))
    den = abs(ep * Cp * (-1j) ** ap + em * Cm * (1j) ** am)
    if den < 1e-14 * (abs(Cp) + abs(Cm)):
        raise DegenerateDenominator("leading terms cancel in the denominator")
    return num / den


def d_limit_predict(fit_plus: PowerFit, fit_minus: PowerFit) -> float:
    """Closed-form limit of the D-ratio from the asymptotic fits of m_+ and m_-."""
    if fit_plus.regime is not fit_minus.regime:
        raise ValueError("fits must come from the same regime")
    regime = fit_plus.regime
    ap, am = fit_plus.alpha0, fit_minus.alpha0
    Cp, Cm = fit_plus.C0, fit_minus.C0
    if ap == 0.0 and am == 0.0:
        if abs(Cp + Cm) <= 1e-9 * (abs(Cp) + abs(Cm)):
            if not (fit_plus.two_term and fit_minus.two_term):
                raise DegenerateDenominator("second terms needed when C0+ + C0- = 0")
            return _limit_terms(fit_plus.alpha1, fit_plus.C1, fit_minus.alpha1, fit_minus.C1, regime)
        return 0.0
    return _limit_terms(ap, Cp, am, Cm, regime)


__all__ = [
    "DEFAULT_WINDOWS",
    "Membership",
    "PROBES",
    "PowerFit",
    "Regime",
    "TauberianReport",
    "class_membership",
    "d_limit_predict",
    "fit_admissible",
    "fit_power_law",
    "forward_residual",
    "tauberian_check",
    "tauberian_sigma_model",
]
