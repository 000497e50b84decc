"""Real Moebius maps z -> (az + b)/(cz + d) with determinant +-1."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PoleHit, ZeroDeterminant


@dataclass(frozen=True)
class MobiusMap:
    """Normalized real 2x2 matrix; ``epsilon`` is its determinant (+1 or -1).

    Build instances with :func:`normalize`; the constructor does not rescale.
    """

    a: float
    b: float
    c: float
    d: float
    epsilon: int

    def __call__(self, z):
        return apply(self, z)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    @classmethod
    def from_dict(cls, data: dict) -> "MobiusMap":
        return normalize(data["a"], data["b"], data["c"], data["d"])


def normalize(a: float, b: float, c: float, d: float) -> MobiusMap:
    """Scale (a, b, c, d) by 1/sqrt|ad - bc| and record the sign."""
    a, b, c, d = float(a), float(b), float(c), float(d)
    det = a * d - b * c
    if det == 0.0 or not math.isfinite(det):
        raise ZeroDeterminant(f"determinant of ({a}, {b}, {c}, {d}) is {det}")
    s = math.sqrt(abs(det))
    eps = 1 if det > 0 else -1
    # +0.0 removes negative zeros so that serialized forms are stable
    return MobiusMap(a / s + 0.0, b / s + 0.0, c / s + 0.0, d / s + 0.0, eps)


def apply(M: MobiusMap, z):
    """Evaluate M at a scalar or array ``z``; raises PoleHit at c z + d = 0."""
    z = np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)
    den = M.c * z + M.d
    if np.any(den == 0):
        raise PoleHit(f"Moebius pole hit at z = {-M.d / M.c if M.c else 'inf'}")
    return (M.a * z + M.b) / den


def compose(M1: MobiusMap, M2: MobiusMap) -> MobiusMap:
    """Return the map z -> M1(M2(z))."""
    m = M1.matrix @ M2.matrix
    return normalize(m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def inverse(M: MobiusMap) -> MobiusMap:
    return normalize(M.d, -M.b, -M.c, M.a)


def same_map(M1: MobiusMap, M2: MobiusMap, tol: float = 1e-12) -> bool:
    """True when the matrices agree up to an overall sign."""
    m1, m2 = M1.matrix, M2.matrix
    return bool(np.allclose(m1, m2, atol=tol, rtol=0) or np.allclose(m1, -m2, atol=tol, rtol=0))


def im_ratio(M: MobiusMap, z: complex) -> float:
    """Im M(z) / Im z computed as det / |cz + d|^2."""
    return M.det() / abs(M.c * z + M.d) ** 2


def mobid_residual(M: MobiusMap, z: complex, w: complex) -> float:
    """Relative defect of M(z) - M(w*) = det/((cz+d)(cw*+d)) (z - w*)."""
    wc = complex(w).conjugate()
    lhs = apply(M, z) - apply(M, wc)
    rhs = M.det() / ((M.c * z + M.d) * (M.c * wc + M.d)) * (z - wc)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


IDENTITY = normalize(1, 0, 0, 1)
TRANSPOSE = normalize(0, -1, 1, 0)  # z -> -1/z
RECIPROCAL = normalize(0, 1, 1, 0)  # z -> 1/z, det -1
NEGATE = normalize(-1, 0, 0, 1)  # z -> -z, det -1


def shift(c: float) -> MobiusMap:
    """z -> z + c."""
    return normalize(1, c, 0, 1)


def scale(k: float) -> MobiusMap:
    """z -> k z for k != 0."""
    return normalize(k, 0, 0, 1)
