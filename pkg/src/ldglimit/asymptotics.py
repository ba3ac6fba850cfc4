"""Diagnostics for the small-elastic-constant family of minimizers: the
rescaled minimal-polynomial residual and its derived combinations, the
rewritten equation's remainder, the first-order corrector split, the
linearized operator, the manifold-projection equation residual, and log-log
rate fitting.

Field-valued results are arrays over interior nodes (one stencil layer off
each result that needs second differences of derived quantities).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit, GridMismatch, IllConditionedT, NotOnManifold
from .fields import (
    GridSpec,
    TensorField,
    edge_grad_squared,
    gradient_array,
    laplacian_array,
)
from .geometry import (
    MaterialParams,
    grad_norm2,
    grad_squared,
    harmonic_rhs_array,
    normal_component,
    project_array,
)
from .tensor_algebra import I3, norm, poly_min

_IN = np.s_[1:-1]


@dataclass
class DiagnosticFields:
    """Pointwise diagnostics at interior nodes: the rescaled
    minimal-polynomial residual x, its trace defect y, the tensorial defect
    z, and the rewritten-equation remainder r."""

    grid: GridSpec
    x_field: np.ndarray
    y_field: np.ndarray
    z_field: np.ndarray
    r_field: np.ndarray


@dataclass
class CorrectorFields:
    """Empirical first-order corrector data at interior nodes."""

    grid: GridSpec
    a_field: np.ndarray
    b_field: np.ndarray
    qdot_field: np.ndarray


@dataclass
class RateFit:
    ls: np.ndarray
    errs: np.ndarray
    slope: float
    intercept: float
    r_squared: float


def _coupling(p: MaterialParams) -> float:
    """The recurring constant 6 / (6 a2 + b2 s_+)."""
    return 6.0 / (6.0 * p.a2 + p.b2 * p.s_plus)


def compute_xyz(q_l: TensorField, p: MaterialParams) -> DiagnosticFields:
    """All pointwise diagnostics of a solved field at the interior nodes.

    The squared gradients use the edge-based (stencil-compatible) discrete
    square, so the diagnostics inherit the stencil's exact product rule and
    carry no O(h^2) floor of their own.
    """
    s = p.s_plus
    q = q_l.interior
    gsq = edge_grad_squared(q_l.values, q_l.grid.h)
    gn2 = np.trace(gsq, axis1=-2, axis2=-1)
    k = _coupling(p)

    x = poly_min(q, s) / p.L
    y = np.trace(x, axis1=-2, axis2=-1) + k * gn2
    z = x - (1.0 / (p.b2 * s**2)) * (
        -(s**2) * k * gn2[..., None, None] * (p.c2 * q + (p.b2 / 3.0) * I3)
        + 4.0 * ((q - (s / 6.0) * I3) @ gsq)
    )
    r = p.c2 * y[..., None, None] * q + (p.b2 / 3.0) * y[..., None, None] * I3 \
        - p.b2 * z
    return DiagnosticFields(
        grid=q_l.grid, x_field=x, y_field=y, z_field=z, r_field=r
    )


def remainder_field(q_l: TensorField, p: MaterialParams) -> np.ndarray:
    """Remainder r such that lap(Q) = harmonic right-hand side + r holds up
    to the solver residual, nodewise on the interior."""
    return compute_xyz(q_l, p).r_field


def rewritten_identity_residual(q_l: TensorField, p: MaterialParams) -> np.ndarray:
    """Nodewise norm of lap(Q) - harmonic RHS - remainder with both sides
    built from the same edge-based squared gradient.

    Algebraically this collapses to the discrete Euler-Lagrange residual, so
    it is bounded by the solver's reported el_residual up to rounding.
    """
    s = p.s_plus
    lap = laplacian_array(q_l.values, q_l.grid.h)
    gsq = edge_grad_squared(q_l.values, q_l.grid.h)
    rhs = -(4.0 / s**2) * ((q_l.interior - (s / 6.0) * I3) @ gsq)
    r = compute_xyz(q_l, p).r_field
    return norm(lap - rhs - r)


def corrector_a(q_star: TensorField, p: MaterialParams) -> np.ndarray:
    """Closed-form normal part of the first-order corrector, from the limit
    field alone (finite-difference gradients), at interior nodes."""
    s = p.s_plus
    res = float(np.max(norm(poly_min(q_star.values, s))))
    if res > 1e-8 * max(1.0, s**2):
        raise NotOnManifold(f"limit field leaves the manifold (residual {res:.3e})")
    q = q_star.interior
    grads = gradient_array(q_star.values, q_star.grid.h)
    gn2 = grad_norm2(grads)[..., None, None]
    gsq = grad_squared(grads)
    k = _coupling(p)
    bracket = k * gn2 * ((p.c2 * q + (p.b2 / 3.0) * I3) @ (q - (s / 6.0) * I3)) - gsq
    return -(2.0 / (p.b2 * s**2)) * bracket


def empirical_corrector(
    q_l: TensorField, q_star: TensorField, p: MaterialParams
) -> CorrectorFields:
    """Split the empirical (Q_L - Q_*)/L into normal and tangential parts at
    the limit field, nodewise."""
    if q_l.grid != q_star.grid:
        raise GridMismatch("fields live on different grids")
    qdot = (q_l.interior - q_star.interior) / p.L
    normal = normal_component(qdot, q_star.interior, p.s_plus)
    return CorrectorFields(
        grid=q_l.grid, a_field=normal, b_field=qdot - normal, qdot_field=qdot
    )


def _inner_lap(arr: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Stencil Laplacian of an interior-node array at its inner nodes."""
    c = arr[_IN, _IN, _IN]
    out = (arr[2:, _IN, _IN] - 2.0 * c + arr[:-2, _IN, _IN]) / h[0] ** 2
    out += (arr[_IN, 2:, _IN] - 2.0 * c + arr[_IN, :-2, _IN]) / h[1] ** 2
    out += (arr[_IN, _IN, 2:] - 2.0 * c + arr[_IN, _IN, :-2]) / h[2] ** 2
    return out


def _inner_grad(arr: np.ndarray, h: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            (arr[2:, _IN, _IN] - arr[:-2, _IN, _IN]) / (2.0 * h[0]),
            (arr[_IN, 2:, _IN] - arr[_IN, :-2, _IN]) / (2.0 * h[1]),
            (arr[_IN, _IN, 2:] - arr[_IN, _IN, :-2]) / (2.0 * h[2]),
        ]
    )


def corrector_b_residual(
    q_star: TensorField,
    a: np.ndarray,
    b: np.ndarray,
    p: MaterialParams,
) -> np.ndarray:
    """Residual of the linear equation satisfied by the tangential corrector,
    per node two stencil layers inside the boundary.

    a and b are interior-node arrays (the closed-form normal part and a
    candidate tangential part).
    """
    grid = q_star.grid
    if a.shape != q_star.interior.shape or b.shape != q_star.interior.shape:
        raise GridMismatch("corrector arrays do not match the grid interior")
    s = p.s_plus
    h = grid.h
    q_in = q_star.interior[_IN, _IN, _IN]

    lap_b = _inner_lap(b, h)
    lap_a = _inner_lap(a, h)
    grads_b = _inner_grad(b, h)
    grads_q = gradient_array(q_star.values, h)[:, _IN, _IN, _IN]
    gn2 = grad_norm2(gradient_array(q_star.values, h))[_IN, _IN, _IN]

    # tangential projections at the local limit point
    grads_b_tan = grads_b - normal_component(grads_b, q_in, s)
    lap_a_tan = lap_a - normal_component(lap_a, q_in, s)

    b_in = b[_IN, _IN, _IN]
    a_in = a[_IN, _IN, _IN]
    cross = np.einsum("axyzij,axyzjk->xyzik", grads_b_tan, grads_q)
    cross += np.einsum("axyzij,axyzjk->xyzik", grads_q, grads_b_tan)

    rhs = (
        -p.b2 * (b_in @ a_in + a_in @ b_in)
        - p.c2 * _coupling(p) * gn2[..., None, None] * b_in
        - (4.0 / s**2) * (cross @ (q_in - (s / 6.0) * I3))
        - lap_a_tan
    )
    return norm(lap_b - rhs)


def linearized_apply(
    q_star: TensorField, psi: TensorField, p: MaterialParams
) -> np.ndarray:
    """Apply the linearization of the harmonic-map residual map at the limit
    field to a perturbation vanishing on the boundary."""
    if q_star.grid != psi.grid:
        raise GridMismatch("fields live on different grids")
    bmask = psi.boundary_mask()
    bmax = float(np.max(norm(psi.values[bmask])))
    if bmax > 1e-10 * max(1.0, float(np.max(norm(psi.values)))):
        raise ValueError("perturbation must vanish on the boundary")
    s = p.s_plus
    h = q_star.grid.h
    q = q_star.interior
    grads_q = gradient_array(q_star.values, h)
    grads_psi = gradient_array(psi.values, h)
    lap_psi = laplacian_array(psi.values, h)
    mixed = np.einsum("axyzij,axyzjk->xyzik", grads_q, grads_psi)
    mixed += np.einsum("axyzij,axyzjk->xyzik", grads_psi, grads_q)
    return (
        lap_psi
        + (4.0 / s**2) * ((q - (s / 6.0) * I3) @ mixed)
        + (4.0 / s**2) * (psi.interior @ grad_squared(grads_q))
    )


def projection_residual(
    q_l: TensorField,
    p: MaterialParams,
    beta: float | None = None,
    gap_tol: float | None = None,
    cond_limit: float = 1e8,
) -> np.ndarray:
    """Residual of the manifold-projection equation per interior node.

    Projects the solved field nodewise, forms the commutator source and the
    shifted inversion matrix (beta fixes its top eigendirection; the result
    is beta-independent), and evaluates the stated equation.
    """
    s = p.s_plus
    if beta is None:
        beta = s
    if beta == 0.0:
        raise ValueError("beta must be nonzero")
    h = q_l.grid.h

    q_sharp, n = project_array(q_l.values, p, gap_tol=gap_tol)
    # explicit inverse on the known spectrum (2s/3, -s/3, -s/3)
    nn = n[..., :, None] * n[..., None, :]
    q_sharp_inv = -(3.0 / s) * I3 + (9.0 / (2.0 * s)) * nn
    k_field = q_sharp_inv @ q_l.values

    lap_qs = laplacian_array(q_sharp, h)
    grads_qs = gradient_array(q_sharp, h)
    grads_k = gradient_array(k_field, h)

    qs_in = q_sharp[_IN, _IN, _IN]
    q_in = q_l.interior
    k_in = k_field[_IN, _IN, _IN]

    gsq = grad_squared(grads_qs)
    w = (
        2.0 * (np.einsum("axyzij,axyzjk->xyzik", grads_qs, grads_k) @ qs_in)
        - 2.0 * (qs_in @ np.einsum("axyzij,axyzjk->xyzik", grads_k, grads_qs))
        - (1.0 / s) * (q_in @ gsq)
        + (1.0 / s) * (gsq @ q_in)
    )

    tr_k = np.trace(k_in, axis1=-2, axis2=-1)[..., None, None]
    t = q_in - (2.0 / 9.0) * s * tr_k * I3 + beta * (qs_in / s + I3 / 3.0)
    cond = np.linalg.cond(t)
    if np.any(cond > cond_limit):
        idx = np.unravel_index(int(np.argmax(cond)), cond.shape)
        raise IllConditionedT(
            f"inversion matrix at interior node {idx} has condition estimate "
            f"{float(cond[idx]):.3e}"
        )

    proj = qs_in / s - (2.0 / 3.0) * I3
    pw = proj @ w
    left = np.linalg.solve(t, pw)  # T^{-1} P W
    wp = w @ proj
    right = np.swapaxes(
        np.linalg.solve(np.swapaxes(t, -1, -2), np.swapaxes(wp, -1, -2)), -1, -2
    )  # W P T^{-1}
    correction = left - right

    rhs = harmonic_rhs_array(qs_in, grads_qs, s, form="ii") - correction
    return norm(lap_qs - rhs)


def fit_rate(ls, errs) -> RateFit:
    """Least-squares slope of log(err) against log(L) over a ladder."""
    ls = np.asarray(ls, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if ls.shape != errs.shape:
        raise DegenerateFit("ladder and error arrays differ in length")
    valid = (ls > 0) & (errs > 0) & np.isfinite(errs)
    ls, errs = ls[valid], errs[valid]
    if len(ls) < 3:
        raise DegenerateFit("need at least 3 valid ladder points")
    x = np.log(ls)
    y = np.log(errs)
    if np.ptp(x) == 0.0:
        raise DegenerateFit("ladder has zero variance")
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        raise DegenerateFit("errors have zero variance")
    return RateFit(
        ls=ls,
        errs=errs,
        slope=float(slope),
        intercept=float(intercept),
        r_squared=1.0 - ss_res / ss_tot,
    )
