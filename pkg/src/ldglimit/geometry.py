"""Geometry of the uniaxial limit manifold inside the traceless symmetric
matrices: membership, nearest-point projection, tangent/normal splitting,
second fundamental form, and the equivalent harmonic-map right-hand sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrum, NotTangent
from .tensor_algebra import (
    I3,
    anticomm,
    comm,
    eig3,
    eigh_descending,
    frobenius,
    norm,
    poly_min,
)

# Preconditions on tangency/normality are looser than algebraic identities
# because inputs often come from finite-difference fields.
TANGENT_TOL = 1e-8


@dataclass(frozen=True)
class MaterialParams:
    """Material constants a^2, b^2, c^2 and the elastic constant L.

    The preferred order parameter s_plus is derived on access and never
    stored, so it cannot go stale.
    """

    a2: float
    b2: float
    c2: float
    L: float = 1.0

    def __post_init__(self):
        for name in ("a2", "b2", "c2", "L"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def s_plus(self) -> float:
        return (self.b2 + np.sqrt(self.b2**2 + 24.0 * self.a2 * self.c2)) / (
            4.0 * self.c2
        )


@dataclass
class ManifoldPoint:
    """A certified point of the limit manifold with its unit director."""

    q: np.ndarray
    director: np.ndarray


@dataclass
class TangentNormalSplit:
    """Unique decomposition of a symmetric matrix at a base point."""

    tangential: np.ndarray
    normal: np.ndarray
    base: ManifoldPoint = field(repr=False)


def uniaxial(director: np.ndarray, s_plus: float) -> np.ndarray:
    """s_+ (n (x) n - I/3) for unit director(s) n of shape (..., 3)."""
    n = np.asarray(director, dtype=float)
    return s_plus * (n[..., :, None] * n[..., None, :] - I3 / 3.0)


def default_gap_tol(p: MaterialParams) -> float:
    """Eigen-gap proxy for the tubular neighborhood where the nearest-point
    projection is single-valued."""
    return 0.1 * p.s_plus


def project_to_manifold(
    q: np.ndarray, p: MaterialParams, gap_tol: float | None = None
) -> ManifoldPoint:
    """Nearest point of the limit manifold, realized via the top eigenvector.

    Raises DegenerateSpectrum when the top eigenvalue gap is below gap_tol.
    """
    if gap_tol is None:
        gap_tol = default_gap_tol(p)
    dec = eig3(np.asarray(q, dtype=float))
    gap = dec.eigenvalues[0] - dec.eigenvalues[1]
    if gap < gap_tol:
        raise DegenerateSpectrum(
            f"top eigenvalue gap {gap:.3e} below tolerance {gap_tol:.3e}"
        )
    n = dec.eigenvectors[:, 0]
    return ManifoldPoint(q=uniaxial(n, p.s_plus), director=n)


def project_array(
    q: np.ndarray, p: MaterialParams, gap_tol: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Batched nearest-point projection.

    Returns (projected tensors, directors).  Raises DegenerateSpectrum if any
    entry fails the eigen-gap precondition.
    """
    if gap_tol is None:
        gap_tol = default_gap_tol(p)
    w, v = eigh_descending(q)
    gap = w[..., 0] - w[..., 1]
    if np.any(gap < gap_tol):
        worst = float(np.min(gap))
        raise DegenerateSpectrum(
            f"top eigenvalue gap {worst:.3e} below tolerance {gap_tol:.3e}"
        )
    n = v[..., :, 0]
    return uniaxial(n, p.s_plus), n


def normal_component(a: np.ndarray, q: np.ndarray, s_plus: float) -> np.ndarray:
    """Normal part of a symmetric matrix a at a manifold point q.

    Closed form: -(2/s_+^2) ((s_+/3) a - q a - a q)(q - (s_+/6) I).
    """
    lhs = (s_plus / 3.0) * a - anticomm(q, a)
    return -(2.0 / s_plus**2) * (lhs @ (q - (s_plus / 6.0) * I3))


def tangency_residual(x: np.ndarray, q: np.ndarray, s_plus: float) -> np.ndarray:
    """Relative residual of the tangency characterization
    (s_+/3) x = x q + q x."""
    r = (s_plus / 3.0) * x - anticomm(x, q)
    return norm(r) / np.maximum(1.0, norm(x))


def normality_residual(z: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Relative commutator residual ||[z, q]|| / max(1, ||z||)."""
    return norm(comm(z, q)) / np.maximum(1.0, norm(z))


def split_tangent_normal(
    a: np.ndarray, base: ManifoldPoint, p: MaterialParams
) -> TangentNormalSplit:
    """Unique tangential + normal decomposition at a base point."""
    n = normal_component(np.asarray(a, dtype=float), base.q, p.s_plus)
    return TangentNormalSplit(tangential=a - n, normal=n, base=base)


def second_fundamental_form(
    x: np.ndarray, y: np.ndarray, base: ManifoldPoint, p: MaterialParams
) -> np.ndarray:
    """II(X, Y) = -(1/s_+^2) (XY + YX)(2Q - (s_+/3) I) at the base point."""
    s = p.s_plus
    for name, v in (("x", x), ("y", y)):
        res = float(tangency_residual(v, base.q, s))
        if res > TANGENT_TOL:
            raise NotTangent(f"{name} is not tangent (residual {res:.3e})")
    return -(1.0 / s**2) * (anticomm(x, y) @ (2.0 * base.q - (s / 3.0) * I3))


def grad_squared(grads) -> np.ndarray:
    """Sum over directions of (grad_alpha Q)^2."""
    g = np.asarray(grads)
    return np.einsum("a...ij,a...jk->...ik", g, g)


def grad_norm2(grads) -> np.ndarray:
    """|grad Q|^2 = sum over directions of tr((grad_alpha Q)^2)."""
    g = np.asarray(grads)
    return np.einsum("a...ij,a...ij->...", g, g)


def harmonic_rhs_array(
    q: np.ndarray, grads: np.ndarray, s_plus: float, form: str = "iv"
) -> np.ndarray:
    """Right-hand side of the harmonic-map equation, batched, no tangency
    checks.  `grads` stacks the three directional derivatives on axis 0."""
    gsq = grad_squared(grads)
    if form == "ii":
        gn2 = grad_norm2(grads)[..., None, None]
        return (
            -(2.0 / s_plus**2) * gn2 * q
            + (2.0 / s_plus) * (gsq - gn2 / 3.0 * I3)
        )
    if form == "iii":
        return -(4.0 / s_plus**2) * (gsq @ (q - (s_plus / 6.0) * I3))
    if form == "iv":
        return -(4.0 / s_plus**2) * ((q - (s_plus / 6.0) * I3) @ gsq)
    raise ValueError(f"unknown form {form!r}")


def harmonic_rhs(
    base: ManifoldPoint, grads, p: MaterialParams, form: str = "iv"
) -> np.ndarray:
    """Explicit harmonic-map right-hand side at a certified base point.

    `grads` is the triple of directional derivatives, each tangential at the
    base within TANGENT_TOL.
    """
    s = p.s_plus
    for alpha, g in enumerate(grads):
        res = float(tangency_residual(g, base.q, s))
        if res > TANGENT_TOL:
            raise NotTangent(
                f"gradient component {alpha} is not tangent (residual {res:.3e})"
            )
    return harmonic_rhs_array(base.q, np.asarray(grads), s, form=form)


def check_identities(
    x: np.ndarray,
    y: np.ndarray,
    z: np.ndarray,
    base: ManifoldPoint,
    p: MaterialParams,
) -> dict[str, float]:
    """Residuals of the algebraic tangent/normal identities at a base point.

    Diagnostic only: invalid inputs simply produce large residuals.
    """
    s = p.s_plus
    q = base.q
    xy = anticomm(x, y)
    trxy = frobenius(x, y)
    p1 = q / s + I3 / 3.0
    k = frobenius(q, z) / s + np.trace(z, axis1=-2, axis2=-1) / 3.0
    return {
        "trace_product": float(
            np.abs(np.trace(xy @ q, axis1=-2, axis2=-1) - (s / 3.0) * trxy)
        ),
        "anticomm_product": float(
            norm(xy @ q + (s / 3.0) * xy - trxy * q - (s / 3.0) * trxy * I3)
        ),
        "rank_one_projector": float(norm(p1 @ z - k * p1)),
        "tangent_pair_is_normal": float(norm(comm(xy, q))),
        "normal_pair_is_normal": float(norm(comm(anticomm(z, z), q))),
        "mixed_pair_is_tangent": float(
            norm((s / 3.0) * anticomm(x, z) - anticomm(anticomm(x, z), q))
        ),
    }


def tangent_basis(base: ManifoldPoint) -> tuple[np.ndarray, np.ndarray]:
    """Two Frobenius-orthogonal tangent directions at the base point."""
    n = base.director
    u, v = _orthonormal_complement(n)
    t1 = np.outer(n, u) + np.outer(u, n)
    t2 = np.outer(n, v) + np.outer(v, n)
    return t1, t2


def normal_basis_s0(base: ManifoldPoint) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Three traceless normal directions at the base point, mutually
    Frobenius-orthogonal."""
    n = base.director
    u, v = _orthonormal_complement(n)
    z1 = 2.0 * np.outer(n, n) - np.outer(u, u) - np.outer(v, v)
    z2 = np.outer(u, u) - np.outer(v, v)
    z3 = np.outer(u, v) + np.outer(v, u)
    return z1, z2, z3


def _orthonormal_complement(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pick = np.zeros(3)
    pick[int(np.argmin(np.abs(n)))] = 1.0
    u = np.cross(n, pick)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v


def manifold_residual(q: np.ndarray, p: MaterialParams) -> np.ndarray:
    """Frobenius norm of the minimal-polynomial residual (0 on the manifold)."""
    return norm(poly_min(q, p.s_plus))
