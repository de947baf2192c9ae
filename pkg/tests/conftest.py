"""Shared oracles for the test suite.

These helpers recompute the package's quantities through independent
routes (adaptive quadrature, nested cumulative integration) and must not
import the closed-form evaluation paths they are used to check.
"""

import numpy as np
import scipy.integrate

from isdtest import Direction, DoubleParetoParams, dp_quantile


def rel_err(got, want, floor=1e-300):
    return abs(got - want) / max(abs(want), floor)


def random_dp_values(rng, n, alpha=3.0, beta=2.0):
    return dp_quantile(DoubleParetoParams(alpha, beta), rng.random(n))


def step_quantile(values, cumprobs):
    """Left-inf step quantile lookup: smallest value with cumulative mass >= t."""
    values = np.asarray(values, dtype=float)
    cum = np.asarray(cumprobs, dtype=float)

    def q(t):
        idx = np.searchsorted(cum, t, side="left")
        return values[np.minimum(idx, len(values) - 1)]

    return q


def _interior_points(breaks, lo, hi):
    pts = [b for b in np.asarray(breaks, dtype=float) if lo < b < hi]
    return pts or None


def quad_lambda(values, cumprobs, m, direction, p):
    """Adaptive-quadrature oracle for one curve value at one point."""
    q = step_quantile(values, cumprobs)
    breaks = np.concatenate(([0.0], np.asarray(cumprobs, dtype=float)))
    fac = 1.0
    for i in range(1, m - 1):
        fac *= i
    if direction is Direction.UP:
        if p == 0.0:
            return 0.0
        val, _ = scipy.integrate.quad(
            lambda t: (p - t) ** (m - 2) * q(t), 0.0, p,
            points=_interior_points(breaks, 0.0, p), limit=200,
            epsabs=1e-14, epsrel=1e-12)
        return val / fac
    mu, _ = scipy.integrate.quad(q, 0.0, 1.0, points=_interior_points(breaks, 0.0, 1.0),
                                 limit=200, epsabs=1e-14, epsrel=1e-12)
    if p == 1.0:
        tail = 0.0
    else:
        tail, _ = scipy.integrate.quad(
            lambda t: (t - p) ** (m - 2) * q(t), p, 1.0,
            points=_interior_points(breaks, p, 1.0), limit=200,
            epsabs=1e-14, epsrel=1e-12)
    return ((1.0 - p) ** (m - 2) * mu - tail) / fac


def quad_lambda_grid(values, cumprobs, m, direction, grid_points):
    """Vectorized adaptive-quadrature oracle over a whole grid.

    Every grid point and step breakpoint is a subdivision point, so the
    integrand is polynomial on each panel and the rule is exact there.
    """
    q = step_quantile(values, cumprobs)
    grid_points = np.asarray(grid_points, dtype=float)
    breaks = np.concatenate(([0.0], np.asarray(cumprobs, dtype=float), grid_points))
    pts = _interior_points(np.unique(breaks), 0.0, 1.0)
    fac = 1.0
    for i in range(1, m - 1):
        fac *= i

    if direction is Direction.UP:
        def f(t):
            w = np.where(grid_points >= t, (grid_points - t) ** (m - 2), 0.0)
            return w * q(t)
    else:
        def f(t):
            w = np.where(grid_points <= t, (t - grid_points) ** (m - 2), 0.0)
            return w * q(t)

    val, _ = scipy.integrate.quad_vec(f, 0.0, 1.0, points=pts, limit=400,
                                      epsabs=1e-13, epsrel=1e-12)
    if direction is Direction.UP:
        return val / fac
    mu, _ = scipy.integrate.quad(q, 0.0, 1.0, points=_interior_points(breaks, 0.0, 1.0),
                                 limit=400, epsabs=1e-14, epsrel=1e-12)
    return ((1.0 - grid_points) ** (m - 2) * mu - val) / fac


def centered_clips(column, ts):
    """Centered clipped series min(Q(t), x_i) for every t, rows in input order."""
    x = np.asarray(column, dtype=float)
    xs = np.sort(x)
    idx = np.clip(np.ceil(np.asarray(ts) * len(xs)).astype(int), 1, len(xs)) - 1
    a = np.minimum(x[:, None], xs[idx][None, :])
    return a - a.mean(axis=0)


def fine_kernel(x1, x2, ts, matched=False):
    """Kernel oracle at abscissae ts from clip-matrix covariances."""
    n1, n2 = len(x1), len(x2)
    lam = n1 / (n1 + n2)
    a1 = centered_clips(x1, ts)
    a2 = centered_clips(x2, ts)
    c11 = a1.T @ a1 / (n1 - 1)
    c22 = a2.T @ a2 / (n2 - 1)
    if not matched:
        return (1 - lam) * c11 + lam * c22
    c12 = a1.T @ a2 / (n1 - 1)
    root = np.sqrt(lam * (1 - lam))
    return (1 - lam) * c11 - root * (c12 + c12.T) + lam * c22


def nested_sigma_oracle(kernel_mid, cells, m, direction, p):
    """Direct numerical integration of the raw nested variance definition.

    ``kernel_mid`` holds kernel values at the midpoints of ``cells`` equal
    fine cells on [0, 1]; cumulative midpoint sums integrate the piecewise
    constant kernel exactly when the sample breakpoints align with cell
    boundaries, and the outer integrals of the resulting piecewise linear
    functions use the trapezoid rule on the node values.
    """
    step = 1.0 / cells
    k_cells = int(round(p * cells))
    if direction is Direction.DOWN:
        kernel_mid = kernel_mid[::-1, ::-1]
        k_cells = cells - k_cells
    if k_cells == 0:
        return 0.0
    block = kernel_mid[:k_cells, :k_cells]
    if m == 3:
        return float(np.sum(block)) * step * step
    if m != 4:
        raise ValueError("nested oracle implemented for m in {3, 4}")
    # C[k, j] = integral_0^{node k} K(t, mid_j) dt, exact for aligned steps
    c = np.vstack([np.zeros((1, k_cells)), np.cumsum(block, axis=0)]) * step
    # A[j] = integral_0^p C(t3, mid_j) dt3 (trapezoid over nodes, C piecewise linear)
    a = step * (c[0] / 2 + c[1:-1].sum(axis=0) + c[-1] / 2)
    b = np.concatenate(([0.0], np.cumsum(a))) * step
    return float(step * (b[0] / 2 + b[1:-1].sum() + b[-1] / 2))
