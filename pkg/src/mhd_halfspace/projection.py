"""Helmholtz (Leray) projection on the truncated half plane.

Per horizontal mode xi1 the potential solves

    (D1*_x2 D1_x2 - xi1^2) phi = div v,

the discrete counterpart of (d2^2 - xi1^2) phi = div v with Neumann data at
the wall and decay at the top; the adjoint-consistent operators make the
natural boundary conditions weak ones.  Because div is exactly minus the
W-adjoint of the gradient, the projected field has machine-zero discrete
divergence, the projection is idempotent and W-orthogonal.

The xi1 = 0 operator is singular (constants); that mode is pinned and the
potential de-meaned, which is the pressure gauge convention.
"""
import numpy as np
import scipy.linalg as sla

from .grid import GridSpec, ScalarField, VectorField, divergence, dx1, fft_x1, ifft_x1, ModeStack


class HelmholtzProjector:
    """Precomputed per-mode banded Cholesky factors for one grid."""

    def __init__(self, grid: GridSpec):
        self.grid = grid
        n = grid.N2
        D1 = grid.D1.toarray()
        W = grid.w2
        A = D1.T @ (W[:, None] * D1)  # symmetric >= 0, pentadiagonal
        self._A = A
        self._bw = 2
        # banded storage (upper) for solveh_banded, per mode built on demand
        self._chol = {}
        self._xi1 = grid.xi1

    def _factor(self, xi1: float):
        key = round(float(abs(xi1)), 14)
        if key in self._chol:
            return self._chol[key]
        n = self.grid.N2
        bw = self._bw
        W = self.grid.w2
        if key == 0.0:
            # pin the last value: rank deficiency is exactly the constants
            M = self._A.copy()
            M[-1, :] = 0.0
            M[-1, -1] = 1.0
            ab = np.zeros((2 * bw + 1, n))
            for i in range(-bw, bw + 1):
                ab[bw - i, max(i, 0):n + min(i, 0)] = np.diagonal(M, i)
            fac = ("general", sla.lu_factor(M))
        else:
            ab = np.zeros((bw + 1, n))
            M = self._A + (key ** 2) * np.diag(W)
            for i in range(bw + 1):
                ab[bw - i, i:] = np.diagonal(M, i)
            fac = ("posdef", sla.cholesky_banded(ab, lower=False))
        self._chol[key] = fac
        return fac

    def solve_mode(self, xi1: float, div_hat: np.ndarray) -> np.ndarray:
        """Potential profile for one mode; rhs is the mode divergence."""
        W = self.grid.w2
        rhs = -(W * div_hat)
        kind, fac = self._factor(xi1)
        if kind == "general":
            rhs = rhs.copy()
            rhs[-1] = 0.0
            phi = sla.lu_solve(fac, rhs)
            phi = phi - np.sum(W * phi) / np.sum(W)  # zero-mean gauge
        else:
            phi = sla.cho_solve_banded((fac, False), rhs)
        return phi

    def project_stack(self, u1h: np.ndarray, u2h: np.ndarray):
        """Project all modes at once; returns (u1h, u2h, phih)."""
        g = self.grid
        div = 1j * g.xi1_d[:, None] * u1h + (g.D1_adj @ u2h.T).T
        phih = np.empty_like(u1h)
        for k in range(g.N1):
            phih[k] = self.solve_mode(g.xi1_d[k], div[k])
        p1 = u1h - 1j * g.xi1_d[:, None] * phih
        p2 = u2h - (g.D1 @ phih.T).T
        return p1, p2, phih


_projectors = {}


def _projector_for(grid: GridSpec) -> HelmholtzProjector:
    key = (grid.L1, grid.N1, grid.L2, grid.N2, grid.stretch)
    if key not in _projectors:
        _projectors[key] = HelmholtzProjector(grid)
    return _projectors[key]


def helmholtz_project(v: VectorField, return_potential=False):
    """Leray projection of a vector field.

    Output is discretely divergence free to machine precision, idempotent,
    and W-orthogonal to the removed gradient.
    """
    g = v.grid
    proj = _projector_for(g)
    u1h = fft_x1(v.c1).coeffs
    u2h = fft_x1(v.c2).coeffs
    p1, p2, phih = proj.project_stack(u1h, u2h)
    out = VectorField(ifft_x1(ModeStack(g, p1)), ifft_x1(ModeStack(g, p2)))
    if return_potential:
        return out, ifft_x1(ModeStack(g, phih))
    return out
