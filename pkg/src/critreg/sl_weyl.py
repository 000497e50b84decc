"""Titchmarsh-Weyl coefficients of half-line Sturm-Liouville problems and a closed-form catalog.

The problem on one half-line is -(p f')' + q f = z w f for s = |t| > 0,
always written in the reflected variable s >= 0.  Boundary functionals act
on (f(0), (p f')(0)) in that variable.
"""
from __future__ import annotations

import cmath
import csv
import functools
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, interpolate, special

from .errors import NoConvergence, RiccatiBlowup, SchemaError, UnknownId
from .mobius import IDENTITY, normalize
from .nevanlinna_core import MobiusOf, NevanlinnaExpr, PowerLaw, SLWeyl, Sum, Transpose


class Side(str, Enum):
    PLUS = "PLUS"
    MINUS = "MINUS"


class TripleStyle(str, Enum):
    NEUMANN_STYLE = "NEUMANN_STYLE"
    DIRICHLET_STYLE = "DIRICHLET_STYLE"


# --------------------------------------------------------------------------
# coefficients


@dataclass(frozen=True, eq=False)
class Coefficient:
    """A positive or real coefficient of s = |t|.

    kinds: "constant" (value), "power-law" (scale * (s + shift)**exponent),
    "tabulated" (pchip through (s, v), constant outside), "callable".
    """

    kind: str
    params: dict = field(default_factory=dict)
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind == "tabulated":
            s = np.asarray(self.params["t"], dtype=float)
            v = np.asarray(self.params["values"], dtype=float)
            if s.ndim != 1 or s.size < 2 or np.any(np.diff(s) <= 0):
                raise SchemaError("tabulated coefficient needs increasing nodes")
            object.__setattr__(self, "_interp", interpolate.PchipInterpolator(s, v, extrapolate=False))
            object.__setattr__(self, "_ends", (s[0], s[-1], v[0], v[-1]))
        elif self.kind not in ("constant", "power-law", "callable"):
            raise SchemaError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "callable" and self.fn is None:
            raise SchemaError("callable coefficient without a function")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return np.full_like(s, float(self.params["value"]))
        if self.kind == "power-law":
            sh = float(self.params.get("shift", 0.0))
            return float(self.params.get("scale", 1.0)) * (s + sh) ** float(self.params["exponent"])
        if self.kind == "tabulated":
            lo, hi, vlo, vhi = self._ends
            out = np.asarray(self._interp(np.clip(s, lo, hi)), dtype=float)
            return np.where(s < lo, vlo, np.where(s > hi, vhi, out))
        return np.asarray(self.fn(s), dtype=float)

    def at(self, s: float) -> float:
        return float(self(np.asarray([s]))[0])

    @property
    def singular_at_zero(self) -> bool:
        return self.kind == "power-law" and float(self.params.get("shift", 0.0)) == 0.0 and float(self.params["exponent"]) != 0.0

    def to_dict(self) -> dict:
        if self.kind == "callable":
            return {"kind": "callable", "name": self.params.get("name", "anonymous")}
        if self.kind == "tabulated":
            return {"kind": "tabulated", "t": list(map(float, self.params["t"])), "values": list(map(float, self.params["values"]))}
        return {"kind": self.kind, **{k: float(v) for k, v in self.params.items()}}

    @classmethod
    def from_dict(cls, data) -> "Coefficient":
        if isinstance(data, (int, float)):
            return constant(float(data))
        kind = data.get("kind")
        if kind == "constant":
            return constant(float(data["value"]))
        if kind == "power-law":
            return power_law(float(data.get("scale", 1.0)), float(data["exponent"]), float(data.get("shift", 0.0)))
        if kind == "tabulated":
            return cls("tabulated", {"t": data["t"], "values": data["values"]})
        raise SchemaError(f"coefficient kind {kind!r} cannot be loaded from a config")


def constant(value: float) -> Coefficient:
    return Coefficient("constant", {"value": value})


def power_law(scale: float, exponent: float, shift: float = 0.0) -> Coefficient:
    return Coefficient("power-law", {"scale": scale, "exponent": exponent, "shift": shift})


def from_callable(fn, name: str) -> Coefficient:
    return Coefficient("callable", {"name": name}, fn)


def read_table(path: str | Path) -> tuple[Coefficient, Coefficient, Coefficient]:
    """Load tabulated p, q, w from a CSV file with columns t, p, q, w."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        t = [float(r["t"]) for r in rows]
        cols = {k: [float(r[k]) for r in rows] for k in ("p", "q", "w")}
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"coefficient table {path} needs numeric columns t, p, q, w") from exc
    return tuple(Coefficient("tabulated", {"t": t, "values": cols[k]}) for k in ("p", "q", "w"))  # type: ignore[return-value]


# --------------------------------------------------------------------------
# problem


@dataclass(frozen=True, eq=False)
class HalfLineProblem:
    side: Side
    p: Coefficient
    q: Coefficient
    w: Coefficient
    triple: TripleStyle = TripleStyle.NEUMANN_STYLE
    T0: float | None = None
    T_max: float = 1e7
    rtol: float = 1e-8
    eps: float = 1e-14
    label: str = ""

    def functionals(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """(a0, b0), (a1, b1) with Gamma_j f = a_j f(0) + b_j (p f')(0) in reflected coordinates."""
        plus = self.side is Side.PLUS
        if self.triple is TripleStyle.NEUMANN_STYLE:
            return ((0.0, 1.0), (-1.0, 0.0)) if plus else ((0.0, -1.0), (1.0, 0.0))
        return (1.0, 0.0), (0.0, 1.0 / self.p.at(self.eps if self.p.singular_at_zero else 0.0))

    def to_dict(self) -> dict:
        return {
            "side": self.side.value,
            "triple": self.triple.value,
            "p": self.p.to_dict(),
            "q": self.q.to_dict(),
            "w": self.w.to_dict(),
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> "HalfLineProblem":
        try:
            side = Side(data.get("side", "PLUS"))
            triple = TripleStyle(data.get("triple", "NEUMANN_STYLE"))
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc
        if "csv" in data:
            path = Path(data["csv"])
            if base is not None and not path.is_absolute():
                path = Path(base) / path
            p, q, w = read_table(path)
        else:
            try:
                p, q, w = (Coefficient.from_dict(data[k]) for k in ("p", "q", "w"))
            except KeyError as exc:
                raise SchemaError(f"problem is missing coefficient {exc}") from exc
        return cls(side, p, q, w, triple, label=str(data.get("label", "")))


# --------------------------------------------------------------------------
# Riccati integration


def _sqrt_decay(x: complex) -> complex:
    r = cmath.sqrt(x)
    return r if r.real > 0 else -r


def _seed(prob: HalfLineProblem, z: complex, T: float) -> complex:
    """WKB value of u = p psi'/psi for the decaying solution at s = T."""
    pT, qT, wT = prob.p.at(T), prob.q.at(T), prob.w.at(T)
    return -_sqrt_decay(pT * (qT - z * wT))


def _riccati_rhs(prob: HalfLineProblem, z: complex, dual: bool):
    def rhs(x, y):
        s = math.exp(x)
        p, q, w = prob.p.at(s), prob.q.at(s), prob.w.at(s)
        if dual:  # v = -1/u
            return s * ((q - z * w) * y * y - 1.0 / p)
        return s * ((q - z * w) - y * y / p)

    return rhs


def _integrate(prob: HalfLineProblem, z: complex, T: float, dual: bool) -> complex:
    u_T = _seed(prob, z, T)
    y0 = -1.0 / u_T if dual else u_T
    with np.errstate(over="ignore", invalid="ignore"):
        sol = integrate.solve_ivp(
            _riccati_rhs(prob, z, dual),
            (math.log(T), math.log(prob.eps)),
            [complex(y0)],
            method="DOP853",
            rtol=1e-10,
            atol=1e-14,
        )
    y = complex(sol.y[0, -1]) if sol.y.size else complex("nan")
    if sol.status != 0 or not (math.isfinite(y.real) and math.isfinite(y.imag)):
        raise RiccatiBlowup(f"Riccati integration failed at z = {z} ({sol.message})")
    return y


def _m_from(prob: HalfLineProblem, y: complex, dual: bool) -> complex:
    (a0, b0), (a1, b1) = prob.functionals()
    if dual:  # y = v = -1/u: (a1 + b1 u)/(a0 + b0 u) = (a1 v - b1)/(a0 v - b0)
        return (a1 * y - b1) / (a0 * y - b0)
    return (a1 + b1 * y) / (a0 + b0 * y)


def _m_at_T(prob: HalfLineProblem, z: complex, T: float) -> complex:
    dual = prob.triple is TripleStyle.NEUMANN_STYLE
    try:
        return _m_from(prob, _integrate(prob, z, T, dual), dual)
    except RiccatiBlowup:
        return _m_from(prob, _integrate(prob, z, T, not dual), not dual)


def initial_cutoff(prob: HalfLineProblem, z: complex) -> float:
    if prob.T0 is not None:
        return prob.T0
    decay = _sqrt_decay(-z).real
    # the seed error is damped by exp(-2 decay T) during the backward sweep
    return max(1e-8, 10.0 / decay) if decay > 0 else 10.0


@functools.lru_cache(maxsize=65536)
def _weyl_cached(prob: HalfLineProblem, z: complex) -> complex:
    T = initial_cutoff(prob, z)
    m_prev = _m_at_T(prob, z, T)
    while True:
        T *= 2.0
        if T > prob.T_max:
            raise NoConvergence(f"Weyl coefficient at z = {z} not converged before T = {prob.T_max:g}")
        m = _m_at_T(prob, z, T)
        if abs(m - m_prev) <= prob.rtol * abs(m):
            return m
        m_prev = m


def weyl_function(prob: HalfLineProblem, z: complex) -> complex:
    """Titchmarsh-Weyl coefficient by backward Riccati integration with cutoff doubling."""
    z = complex(z)
    if z.imag == 0.0 and z.real >= 0.0:
        raise ValueError("weyl_function needs z off [0, inf)")
    return _weyl_cached(prob, z)


def weyl_solution(prob: HalfLineProblem, z: complex, L: float) -> complex:
    """Seed value u(L) = (p psi'/psi)(L) of the decaying solution, from the WKB form."""
    return _seed(prob, complex(z), L)


# --------------------------------------------------------------------------
# catalog


def ex53_constants(alpha: float, beta: float) -> tuple[float, float]:
    """(nu, C) for p = s^beta, w = s^alpha, q = 0 and the Neumann-style triple."""
    if not (alpha > -1.0 and beta < 1.0):
        raise ValueError("need alpha > -1 and beta < 1")
    k = (alpha - beta + 2.0) / 2.0
    nu = (1.0 - beta) / (alpha - beta + 2.0)
    C = (2.0 * k) ** (2.0 * nu) * special.gamma(1.0 + nu) / ((1.0 - beta) * special.gamma(1.0 - nu))
    return nu, float(C)


def free_problem(triple: TripleStyle = TripleStyle.NEUMANN_STYLE, side: Side = Side.PLUS) -> HalfLineProblem:
    return HalfLineProblem(side, constant(1.0), constant(0.0), constant(1.0), triple, label="free")


def ex53_problem(alpha: float, beta: float, side: Side = Side.PLUS) -> HalfLineProblem:
    return HalfLineProblem(
        side, power_law(1.0, beta), constant(0.0), power_law(1.0, alpha), TripleStyle.NEUMANN_STYLE,
        label=f"power-law({alpha:g},{beta:g})",
    )


def smooth_p_problem(side: Side = Side.PLUS) -> HalfLineProblem:
    """p(s) = 2 - exp(-s), q = 0, w = 1; p(0) = 1."""
    p = from_callable(lambda s: 2.0 - np.exp(-s), "2-exp(-s)")
    return HalfLineProblem(side, p, constant(0.0), constant(1.0), TripleStyle.NEUMANN_STYLE, label="smooth-p")


@dataclass(frozen=True)
class SLCatalogEntry:
    id: str
    closed_form: NevanlinnaExpr
    provenance: str
    problem: HalfLineProblem | None = None
    asymptotic_standin: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "closed_form": self.closed_form.to_dict(),
            "provenance": self.provenance,
            "problem": self.problem.to_dict() if self.problem else None,
            "asymptotic_standin": self.asymptotic_standin,
        }


_PARAM = re.compile(r"^([a-z0-9-]+?)(?:\(([^)]*)\))?$")


def _params(text: str | None, n: int, default: Sequence[float]) -> list[float]:
    if not text:
        return list(default)
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UnknownId(f"bad catalog parameters {text!r}") from exc
    if len(vals) != n:
        raise UnknownId(f"expected {n} catalog parameters, got {text!r}")
    return vals


def short_range(a: float, b: float) -> NevanlinnaExpr:
    """a/(b + sqrt(-z)) as a Moebius image of -sqrt(-z)."""
    return MobiusOf(IDENTITY, normalize(0.0, a, -1.0, b), PowerLaw(-1.0, 0.5))


CATALOG_IDS = (
    "free-neumann",
    "free-dirichlet",
    "ex53-powerlaw(alpha,beta)",
    "kakost-singular",
    "fourth-order-quarter",
    "ex52-short-range(a,b)",
)


def closed_form(id: str) -> SLCatalogEntry:
    m = _PARAM.match(id.strip())
    if not m:
        raise UnknownId(id)
    name, args = m.group(1), m.group(2)
    if name == "free-neumann" and not args:
        return SLCatalogEntry(id, PowerLaw(1.0, -0.5), "p = w = 1, q = 0, Neumann-style triple",
                              free_problem(TripleStyle.NEUMANN_STYLE))
    if name == "free-dirichlet" and not args:
        return SLCatalogEntry(id, PowerLaw(-1.0, 0.5), "p = w = 1, q = 0, Dirichlet-style triple",
                              free_problem(TripleStyle.DIRICHLET_STYLE))
    if name == "ex53-powerlaw":
        alpha, beta = _params(args, 2, (0.0, 0.0))
        nu, C = ex53_constants(alpha, beta)
        return SLCatalogEntry(id, PowerLaw(C, -nu), f"p = s^{beta:g}, w = s^{alpha:g}, q = 0, Neumann-style triple",
                              ex53_problem(alpha, beta))
    if name == "kakost-singular" and not args:
        return SLCatalogEntry(id, Sum(PowerLaw(1.0, -0.5), PowerLaw(1.0, -1.0)),
                              "coupling with a one-dimensional extra component; 0 is a singular critical point")
    if name == "fourth-order-quarter" and not args:
        return SLCatalogEntry(id, PowerLaw(-math.sqrt(2.0), 0.25), "fourth-order half-line problem, closed form only")
    if name == "ex52-short-range":
        a, b = _params(args, 2, (1.0, 1.0))
        if a <= 0:
            raise UnknownId(f"ex52-short-range needs a > 0, got {a}")
        return SLCatalogEntry(id, short_range(a, b), "exact model behind the short-range small-z asymptotics",
                              asymptotic_standin=True)
    raise UnknownId(id)


def triple_convert(m: NevanlinnaExpr, from_triple, to_triple) -> NevanlinnaExpr:
    """Switch between the Neumann-style and Dirichlet-style triples: m -> -1/m."""
    a, b = TripleStyle(from_triple), TripleStyle(to_triple)
    return m if a is b else Transpose(m)


def sl_expr(prob: HalfLineProblem) -> SLWeyl:
    return SLWeyl(prob)


__all__ = [
    "CATALOG_IDS",
    "Coefficient",
    "HalfLineProblem",
    "SLCatalogEntry",
    "Side",
    "TripleStyle",
    "closed_form",
    "constant",
    "ex53_constants",
    "ex53_problem",
    "free_problem",
    "from_callable",
    "power_law",
    "read_table",
    "short_range",
    "sl_expr",
    "smooth_p_problem",
    "triple_convert",
    "weyl_function",
]
