"""Reproducing kernels of Nevanlinna functions and the Moebius isomorphism V."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import mobius as mb
from .errors import DegeneratePair
from .mobius import MobiusMap
from .nevanlinna_core import (
    MobiusOf,
    NevanlinnaExpr,
    SpectralMeasure,
    _Kernel,
    evaluate,
    measure_integral,
)


@dataclass(frozen=True)
class SamplePlan:
    points: tuple[complex, ...]

    def __post_init__(self):
        pts = [complex(p) for p in self.points]
        for p in pts:
            if p.imag == 0.0:
                raise ValueError(f"sample point {p} is real")
        for i, p in enumerate(pts):
            for q in pts[i:]:
                if p == q.conjugate():
                    raise ValueError(f"plan contains the conjugate pair {p}, {q}")
        if len(set(pts)) != len(pts):
            raise ValueError("plan points must be distinct")
        object.__setattr__(self, "points", tuple(pts))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, both_half_planes: bool = False) -> "SamplePlan":
        r = 10.0 ** rng.uniform(-1.0, 1.0, n)
        th = rng.uniform(0.1, math.pi - 0.1, n)
        z = r * np.exp(1j * th)
        if both_half_planes:
            flip = rng.random(n) < 0.5
            z = np.where(flip, z.conj(), z)
        return cls(tuple(complex(v) for v in z))


def _plan_points(plan) -> list[complex]:
    return list(plan.points) if isinstance(plan, SamplePlan) else [complex(p) for p in plan]


def kernel(f: NevanlinnaExpr, z: complex, w: complex, fz: complex | None = None, fw: complex | None = None) -> complex:
    """K_m(z, w) = (m(z) - m(w)*)/(z - w*); the diagonal gives Im m(z)/Im z."""
    z, w = complex(z), complex(w)
    if z.imag == 0.0 or w.imag == 0.0:
        raise DegeneratePair("kernel needs non-real points")
    fz = evaluate(f, z) if fz is None else fz
    if z == w:
        return complex(fz.imag / z.imag, 0.0)
    if z == w.conjugate():
        raise DegeneratePair(f"kernel requested at z = w* = {z}")
    fw = evaluate(f, w) if fw is None else fw
    return (fz - fw.conjugate()) / (z - w.conjugate())


def gram(f: NevanlinnaExpr, plan) -> np.ndarray:
    """Hermitian matrix G[j, k] = K_m(z_j, z_k)."""
    pts = _plan_points(plan)
    vals = [evaluate(f, p) for p in pts]
    n = len(pts)
    G = np.empty((n, n), dtype=complex)
    for j in range(n):
        for k in range(j, n):
            G[j, k] = kernel(f, pts[j], pts[k], vals[j], vals[k])
            G[k, j] = G[j, k].conjugate()
    return G


def gram_min_eig_ratio(G: np.ndarray) -> float:
    """Smallest eigenvalue divided by the absolute trace."""
    eig = np.linalg.eigvalsh(G)
    scale = abs(np.trace(G).real)
    return float(eig[0] / scale) if scale > 0 else float(np.sign(eig[0]))


def psi_inner(sigma: SpectralMeasure, z: complex, w: complex) -> complex:
    """<psi(z), psi(w)> in L^2_sigma with psi(z)(x) = 1/(x - z)."""
    z, w = complex(z), complex(w)
    wc = w.conjugate()
    K = _Kernel(
        f=lambda t: 1.0 / ((t - z) * (t - wc)),
        g=lambda s, t0: 1.0 / ((t0 - z * s) * (t0 - wc * s)),
        order=2.0,
        split=max(abs(z), abs(w), 1e-12),
        near=z if abs(z.imag) <= abs(w.imag) else w,
    )
    return measure_integral(sigma, K)


def q_identity_residual(f: NevanlinnaExpr, sigma_model: SpectralMeasure, z: complex, w: complex) -> float:
    """|m(z) - m(w)* - (z - w*) <psi(z), psi(w)>_sigma| for the measure model."""
    z, w = complex(z), complex(w)
    mz, mw = evaluate(f, z), evaluate(f, w)
    return abs(mz - mw.conjugate() - (z - w.conjugate()) * psi_inner(sigma_model, z, w))


def measure_model_transform(sigma: SpectralMeasure, values: np.ndarray, x: np.ndarray, weights: np.ndarray, z: complex) -> complex:
    """Discrete version of f -> integral f(x) dsigma(x)/(x - z) on quadrature nodes."""
    return complex(np.sum(values * weights / (x - z)))


@dataclass
class VTransformResiduals:
    eqUl_residual: float
    eqUlu_residual: float


def v_transform_check(f: NevanlinnaExpr, mu1: MobiusMap, mu2: MobiusMap, plan) -> VTransformResiduals:
    """Pointwise residuals of the kernel-section identities of the isomorphism V."""
    pts = _plan_points(plan)
    mhat = MobiusOf(mu1, mu2, f)
    inv1 = mb.inverse(mu1)
    a1, c1 = mu1.a, mu1.c
    c2, d2 = mu2.c, mu2.d

    def rel(a: complex, b: complex) -> float:
        return abs(a - b) / max(abs(a), abs(b), 1e-300)

    ul = 0.0
    for w in pts:
        wc = w.conjugate()
        coef = (c2 * evaluate(f, wc) + d2) / (c1 * wc - a1)
        w_pre = complex(mb.apply(inv1, w))
        for z in pts:
            z1 = complex(mb.apply(mu1, z))
            if z1 == wc or z == w_pre.conjugate():
                continue
            lhs = (c1 * z1 - a1) / (c2 * evaluate(f, z1) + d2) * kernel(f, z1, w)
            rhs = coef * kernel(mhat, z, w_pre)
            ul = max(ul, rel(lhs, rhs))

    ulu = 0.0
    for v in pts:
        av = (c2 * evaluate(f, v.conjugate()) + d2) / (c1 * v.conjugate() - a1)
        v_pre = complex(mb.apply(inv1, v))
        for w in pts:
            aw_conj = (c2 * evaluate(f, w) + d2) / (c1 * w - a1)
            w_pre = complex(mb.apply(inv1, w))
            if w_pre == v_pre.conjugate() or w == v.conjugate():
                continue
            lhs = av * aw_conj * kernel(mhat, w_pre, v_pre)
            rhs = kernel(f, w, v)
            ulu = max(ulu, rel(lhs, rhs))
    return VTransformResiduals(ul, ulu)


def is_psd(G: np.ndarray, rel_tol: float = 1e-9) -> bool:
    return gram_min_eig_ratio(G) >= -rel_tol


__all__: Sequence[str] = [
    "SamplePlan",
    "VTransformResiduals",
    "gram",
    "gram_min_eig_ratio",
    "is_psd",
    "kernel",
    "psi_inner",
    "q_identity_residual",
    "v_transform_check",
]
