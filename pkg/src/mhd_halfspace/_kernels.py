"""Hot numeric kernels: half-line exponential-kernel scans and banded solves.

Each kernel has a jitted loop implementation and a vectorized numpy fallback;
`_compat.USE_NUMBA` (env flag MHD_HALFSPACE_NUMBA) selects the path at import.

The exponential kernel E_k[f](x) = (1/2k) int_0^inf exp(-k|x-y|) f(y) dy is
evaluated by exact integration of piecewise-polynomial f (degree <= 2 per
cell).  The two one-sided pieces obey first-order recurrences whose growth
factors exp(-k*dx) have modulus <= 1 for Re k >= 0, so the scan stays stable
for arbitrarily large |k| (generic quadrature would need O(|k|) nodes per
cell to resolve the kernel).
"""
import numpy as np

from ._compat import USE_NUMBA, njit

# Below this |kappa*dx| the closed-form cell moments lose digits to
# cancellation; switch to the Taylor series of int_0^dx exp(-k*t) t^p dt.
_SERIES_Z = 1e-2


@njit(cache=True)
def _cell_moments(kappa, dx):
    """Moments (E, N0, N1, N2): E=exp(-k dx), Np = int_0^dx exp(-k t) t^p dt."""
    z = kappa * dx
    E = np.exp(-z)
    if abs(z) < _SERIES_Z:
        # Np = dx^(p+1) * sum_j (-z)^j / (j! (p+j+1))
        n0 = 0.0 + 0.0j
        n1 = 0.0 + 0.0j
        n2 = 0.0 + 0.0j
        term = 1.0 + 0.0j
        fact = 1.0
        for j in range(10):
            if j > 0:
                fact *= j
                term = (-z) ** j / fact
            n0 += term / (j + 1)
            n1 += term / (j + 2)
            n2 += term / (j + 3)
        return E, dx * n0, dx * dx * n1, dx * dx * dx * n2
    N0 = (1.0 - E) / kappa
    N1 = (N0 - dx * E) / kappa
    N2 = (2.0 * N1 - dx * dx * E) / kappa
    return E, N0, N1, N2


@njit(cache=True)
def _scan_single(kappa, c0, c1, c2, dx, L, R, tail_const):
    n = dx.shape[0] + 1
    L[0] = 0.0 + 0.0j
    for i in range(1, n):
        E, N0, N1, N2 = _cell_moments(kappa, dx[i - 1])
        # left moments of the cell polynomial against exp(-k(dx - t))
        m0 = N0
        m1 = dx[i - 1] * N0 - N1
        m2 = dx[i - 1] * dx[i - 1] * N0 - 2.0 * dx[i - 1] * N1 + N2
        L[i] = E * L[i - 1] + c0[i - 1] * m0 + c1[i - 1] * m1 + c2[i - 1] * m2
    if tail_const:
        # constant extension beyond the last node: exact for antiderivatives
        # of compactly supported data (they freeze past the support)
        h = dx[n - 2]
        f_end = c0[n - 2] + c1[n - 2] * h + c2[n - 2] * h * h
        R[n - 1] = f_end / kappa
    else:
        R[n - 1] = 0.0 + 0.0j
    for i in range(n - 2, -1, -1):
        E, N0, N1, N2 = _cell_moments(kappa, dx[i])
        R[i] = E * R[i + 1] + c0[i] * N0 + c1[i] * N1 + c2[i] * N2


@njit(cache=True)
def _scan_batch_numba(kappas, c0, c1, c2, dx, tail_const):
    k = kappas.shape[0]
    n = dx.shape[0] + 1
    L = np.empty((k, n), dtype=np.complex128)
    R = np.empty((k, n), dtype=np.complex128)
    for j in range(k):
        _scan_single(kappas[j], c0, c1, c2, dx, L[j], R[j], tail_const)
    return L, R


def _moments_vec(z, dx):
    """Vectorized cell moments for an array of z = kappa*dx (shared dx)."""
    E = np.exp(-z)
    with np.errstate(invalid="ignore", divide="ignore"):
        N0 = (1.0 - E) / (z / dx)
        N1 = (N0 - dx * E) / (z / dx)
        N2 = (2.0 * N1 - dx * dx * E) / (z / dx)
    small = np.abs(z) < _SERIES_Z
    if np.any(small):
        zs = z[small]
        n0 = np.zeros_like(zs)
        n1 = np.zeros_like(zs)
        n2 = np.zeros_like(zs)
        term = np.ones_like(zs)
        fact = 1.0
        for j in range(10):
            if j > 0:
                fact *= j
                term = (-zs) ** j / fact
            n0 += term / (j + 1)
            n1 += term / (j + 2)
            n2 += term / (j + 3)
        N0[small] = dx * n0
        N1[small] = dx * dx * n1
        N2[small] = dx * dx * dx * n2
    return E, N0, N1, N2


def _scan_batch_numpy(kappas, c0, c1, c2, dx, tail_const):
    k = kappas.shape[0]
    n = dx.shape[0] + 1
    L = np.zeros((k, n), dtype=np.complex128)
    R = np.zeros((k, n), dtype=np.complex128)
    for i in range(1, n):
        d = dx[i - 1]
        E, N0, N1, N2 = _moments_vec(kappas * d, d)
        m0 = N0
        m1 = d * N0 - N1
        m2 = d * d * N0 - 2.0 * d * N1 + N2
        L[:, i] = E * L[:, i - 1] + c0[i - 1] * m0 + c1[i - 1] * m1 + c2[i - 1] * m2
    if tail_const:
        h = dx[n - 2]
        f_end = c0[n - 2] + c1[n - 2] * h + c2[n - 2] * h * h
        R[:, n - 1] = f_end / kappas
    for i in range(n - 2, -1, -1):
        d = dx[i]
        E, N0, N1, N2 = _moments_vec(kappas * d, d)
        R[:, i] = E * R[:, i + 1] + c0[i] * N0 + c1[i] * N1 + c2[i] * N2
    return L, R


def scan_batch(kappas, c0, c1, c2, dx, tail_const=False):
    """One-sided kernel integrals of a piecewise-quadratic f for many kappas.

    Returns (L, R) with L[j,i] = int_0^{x_i} exp(-kappa_j (x_i-y)) f(y) dy and
    R[j,i] the mirror integral over [x_i, infinity); the interpolant is
    extended past the last node by zero (tail_const=False, sampled data) or
    by its end value (tail_const=True, antiderivative profiles).  From these:
    E_k[f] = (L+R)/(2k),  d/dx E_k[f] = (R-L)/2,  E_k[f](0) = R[...,0]/(2k).
    """
    kappas = np.ascontiguousarray(kappas, dtype=np.complex128)
    c0 = np.ascontiguousarray(c0, dtype=np.complex128)
    c1 = np.ascontiguousarray(c1, dtype=np.complex128)
    c2 = np.ascontiguousarray(c2, dtype=np.complex128)
    dx = np.ascontiguousarray(dx, dtype=np.float64)
    if USE_NUMBA:
        return _scan_batch_numba(kappas, c0, c1, c2, dx, tail_const)
    return _scan_batch_numpy(kappas, c0, c1, c2, dx, tail_const)


def pl_coeffs(f, dx):
    """Per-cell polynomial coefficients of the linear interpolant of nodal f."""
    f = np.asarray(f, dtype=np.complex128)
    c0 = f[:-1].copy()
    c1 = (f[1:] - f[:-1]) / dx
    c2 = np.zeros_like(c0)
    return c0, c1, c2


def antiderivative_coeffs(f, dx):
    """Cells of H(x) = int_0^x PL(f), the exact antiderivative (quadratic).

    Returns (c0, c1, c2, H_nodes).  Used to rebuild a wall-normal component
    from its div-free partner so the interpolated pair is solenoidal as a
    function, not just at the nodes.
    """
    f = np.asarray(f, dtype=np.complex128)
    s = (f[1:] - f[:-1]) / dx
    cell = f[:-1] * dx + 0.5 * s * dx * dx
    H = np.concatenate(([0.0 + 0.0j], np.cumsum(cell)))
    return H[:-1].copy(), f[:-1].copy(), 0.5 * s, H


@njit(cache=True)
def _thomas_batch_numba(dl, d, du, rhs):
    k, n = rhs.shape
    x = np.empty_like(rhs)
    cp = np.empty(n, dtype=np.complex128)
    dp = np.empty(n, dtype=np.complex128)
    for j in range(k):
        cp[0] = du[j, 0] / d[j, 0]
        dp[0] = rhs[j, 0] / d[j, 0]
        for i in range(1, n):
            denom = d[j, i] - dl[j, i] * cp[i - 1]
            cp[i] = du[j, i] / denom
            dp[i] = (rhs[j, i] - dl[j, i] * dp[i - 1]) / denom
        x[j, n - 1] = dp[n - 1]
        for i in range(n - 2, -1, -1):
            x[j, i] = dp[i] - cp[i] * x[j, i + 1]
    return x


def _thomas_batch_numpy(dl, d, du, rhs):
    k, n = rhs.shape
    cp = np.empty((k, n), dtype=np.complex128)
    dp = np.empty((k, n), dtype=np.complex128)
    cp[:, 0] = du[:, 0] / d[:, 0]
    dp[:, 0] = rhs[:, 0] / d[:, 0]
    for i in range(1, n):
        denom = d[:, i] - dl[:, i] * cp[:, i - 1]
        cp[:, i] = du[:, i] / denom
        dp[:, i] = (rhs[:, i] - dl[:, i] * dp[:, i - 1]) / denom
    x = np.empty_like(dp)
    x[:, n - 1] = dp[:, n - 1]
    for i in range(n - 2, -1, -1):
        x[:, i] = dp[:, i] - cp[:, i] * x[:, i + 1]
    return x


def thomas_batch(dl, d, du, rhs):
    """Solve K independent tridiagonal systems (no pivoting; rows are
    diagonally dominant for the CN matrices this is used on).

    dl[j,i] multiplies x[i-1], du[j,i] multiplies x[i+1]; dl[:,0]=du[:,-1]=0.
    """
    dl = np.ascontiguousarray(dl, dtype=np.complex128)
    d = np.ascontiguousarray(d, dtype=np.complex128)
    du = np.ascontiguousarray(du, dtype=np.complex128)
    rhs = np.ascontiguousarray(rhs, dtype=np.complex128)
    if USE_NUMBA:
        return _thomas_batch_numba(dl, d, du, rhs)
    return _thomas_batch_numpy(dl, d, du, rhs)
