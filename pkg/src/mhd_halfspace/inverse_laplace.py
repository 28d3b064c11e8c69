"""Time-domain linear semigroup via numerical inversion of the transform.

Per mode the evolved state is the contour integral of the explicit resolvent
formulas; both the wedge ("sector") contour and the branch-cut-hugging
("deformed") family evaluate the same transform, which is the contour
invariance exercised by the verification suite.  The whole-space 2x2 closed
form for odd extensions is provided as an independent comparator.
"""
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from . import _kernels as hk
from .dispersion import (Contour, build_deformed_contours, build_sector_contour,
                         lambda_pm)
from .grid import (GridSpec, ModeStack, ScalarField, VectorField, fft_x1,
                   ifft_x1, mode_divergence, norm, NormSpec)
from .resolvent import _difference_quotient

_CHUNK = 256
_TWO_PI_I = 2j * np.pi


def contour_integrate(contour: Contour, integrand, t, with_indicator=True):
    """(1/2pi i) sum_k w_k e^{lam_k t} integrand(lam_k, omega_k).

    integrand is vectorized over nodes and may return per-node scalars (K,)
    or profiles (K, N).  Returns (value, indicator); the indicator is the
    difference against a half-density rebuild of the contour.
    """
    def evaluate(ctr):
        lam, om, w = ctr.nodes, ctr.omegas, ctr.weights
        vals = np.asarray(integrand(lam, om))
        if not np.all(np.isfinite(vals)):
            k = int(np.argwhere(~np.isfinite(np.atleast_2d(vals)))[0][0])
            raise FloatingPointError(
                f"non-finite integrand at contour node lambda={lam[k]}")
        phase = w * np.exp(lam * t)
        return np.tensordot(phase, vals, axes=(0, 0)) / _TWO_PI_I

    val = evaluate(contour)
    if not with_indicator:
        return val, None
    coarse = evaluate(contour.refined(0.5))
    err = np.max(np.abs(val - coarse))
    return val, float(err)


@dataclass
class ModeData:
    """Per-mode transformed initial data with precomputed cell coefficients."""
    xi1: float
    x2: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        dx = np.diff(self.x2)
        self._dx = dx
        self._cells = [hk.pl_coeffs(np.asarray(p, np.complex128), dx)
                       for p in (self.u1, self.u2, self.b1, self.b2)]


def _mode_contributions(data: ModeData, lams, oms, wts, times):
    """Accumulated contour contributions: out[T, 4, N2] for (u1,u2,b1,b2)."""
    xi1 = data.xi1
    a = abs(xi1)
    sgn = 1.0 if xi1 > 0 else -1.0
    x2 = data.x2
    nt = len(times)
    n = len(x2)
    out = np.zeros((nt, 4, n), dtype=np.complex128)
    times = np.asarray(times, dtype=np.float64)

    for s in range(0, len(lams), _CHUNK):
        lam = lams[s:s + _CHUNK]
        om = oms[s:s + _CHUNK]
        w = wts[s:s + _CHUNK]
        k = len(lam)
        il = 1j * xi1 / lam

        prof = []
        tr = []
        for c0, c1, c2 in data._cells:
            L, R = hk.scan_batch(om, c0, c1, c2, data._dx)
            prof.append((L + R) / (2.0 * om[:, None]))
            tr.append(R[:, 0] / (2.0 * om))
        Eh1 = prof[0] + il[:, None] * prof[2]
        Eh2 = prof[1] + il[:, None] * prof[3]
        th1 = tr[0] + il * tr[2]
        th2 = tr[1] + il * tr[3]

        emx = np.exp(-np.outer(om, x2))
        # 2 om (e^{-a x} - e^{-om x})/(om - a), stable through om ~ a
        dq = np.empty((k, n), dtype=np.complex128)
        for j in range(k):
            dq[j] = _difference_quotient(a, om[j], x2)
        Q2 = 2.0 * om[:, None] * dq

        I1h1 = Eh1 - emx * th1[:, None]
        I1h2 = Eh2 - emx * th2[:, None]
        b10 = np.asarray(data.b1, np.complex128)
        b20 = np.asarray(data.b2, np.complex128)
        contrib = np.empty((k, 4, n), dtype=np.complex128)
        contrib[:, 0] = I1h1 + 1j * sgn * th2[:, None] * Q2
        contrib[:, 1] = I1h2 - th2[:, None] * Q2
        # the magnetic rows carry the full transform including the b0/lam
        # term, whose pole at 0 the contours enclose (it reproduces the
        # initial field); near lambda = 0 the terms cancel to O(1) values
        contrib[:, 2] = (il[:, None] * I1h1
                         - (a / lam)[:, None] * th2[:, None] * Q2
                         + b10[None, :] / lam[:, None])
        contrib[:, 3] = (il[:, None] * (I1h2 - th2[:, None] * Q2)
                         + b20[None, :] / lam[:, None])

        phase = w[None, :] * np.exp(np.outer(times, lam))  # (T, k)
        out += np.tensordot(phase, contrib, axes=(1, 0)) / _TWO_PI_I
    return out


def _contour_for(xi1, times, kind, n_per_unit, eps=None, x2_extent=20.0):
    t_min = float(np.min(times))
    t_max = float(np.max(times))
    if kind == "sector":
        return build_sector_contour(xi1, t_min=t_min,
                                    R=max(0.5 / t_max,
                                          0.75 * abs(xi1) * np.sqrt(
                                              max(0.0, 1.0 - xi1 * xi1))),
                                    n_per_unit=n_per_unit)
    if kind == "deformed":
        return build_deformed_contours(xi1, eps=eps, n_per_unit=n_per_unit,
                                       t_min=t_min, t_max=t_max,
                                       phase_scale=2.0 * x2_extent)
    raise ValueError(f"unknown contour kind {kind!r}")


def linear_evolve_mode(xi1, u0_hat, b0_hat, times, x2,
                       contour_choice="sector", n_per_unit=12.0, eps=None,
                       adapt_tol=1e-7, max_nodes=2 ** 14):
    """Evolve one mode (xi1 != 0) of the source-free linear system.

    Returns out[T, 4, N2] holding (u1, u2, b1, b2) profiles at each time.
    The node budget doubles until two budgets agree to adapt_tol (relative),
    capped at max_nodes.
    """
    if xi1 == 0:
        raise ValueError("linear_evolve_mode requires xi1 != 0; the zero mode "
                         "is handled directly by linear_evolve")
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    if np.any(times <= 0):
        raise ValueError("evolution times must be positive")
    data = ModeData(float(xi1), np.asarray(x2, np.float64),
                    u0_hat[0], u0_hat[1], b0_hat[0], b0_hat[1])

    prev = None
    npu = n_per_unit
    extent = float(np.max(x2))
    while True:
        ctr = _contour_for(xi1, times, contour_choice, npu, eps, extent)
        out = _mode_contributions(data, ctr.nodes, ctr.omegas, ctr.weights,
                                  times)
        if prev is not None:
            scale = np.max(np.abs(out)) + 1e-300
            if np.max(np.abs(out - prev)) / scale < adapt_tol:
                break
            if len(ctr.nodes) >= max_nodes:
                break
        prev = out
        npu *= 2.0
        if len(ctr.nodes) >= max_nodes:
            break
    return out


def mode_piece_magnitudes(xi1, u0_hat, b0_hat, t, x2, eps,
                          n_per_unit=12.0):
    """Max-norm contribution of each deformed-contour piece at time t
    (the small-circle entries exhibit the eps -> 0 vanishing)."""
    data = ModeData(float(xi1), np.asarray(x2, np.float64),
                    u0_hat[0], u0_hat[1], b0_hat[0], b0_hat[1])
    ctr = build_deformed_contours(xi1, eps=eps, n_per_unit=n_per_unit,
                                  t_min=float(t), t_max=float(t),
                                  phase_scale=2.0 * float(np.max(x2)))
    mags = {}
    for piece in ctr.pieces:
        out = _mode_contributions(data, piece.nodes, piece.omega,
                                  piece.weights, [t])
        mags[piece.label] = mags.get(piece.label, 0.0) + float(np.max(np.abs(out)))
    return mags


def whole_space_mode_exp(xi1, xi2, u0_hat, b0_hat, t):
    """Exact 2x2 evolution of one full-plane frequency (xi1, xi2):
    u' = -|xi|^2 u + i xi1 b,  b' = i xi1 u.  Vectorized over arrays."""
    xi1 = np.asarray(xi1, dtype=np.float64)
    xi2 = np.asarray(xi2, dtype=np.float64)
    q = xi1 * xi1 + xi2 * xi2
    disc = q * q - 4.0 * xi1 * xi1
    sq = np.sqrt(disc.astype(np.complex128))
    lp = 0.5 * (-q + sq)
    lm = 0.5 * (-q - sq)
    diff = lp - lm
    small = np.abs(diff) < 1e-8
    safe = np.where(small, 1.0, diff)
    ep, em = np.exp(lp * t), np.exp(lm * t)
    phi_u = np.where(small, np.exp(lp * t) * (1.0 + lp * t),
                     (lp * ep - lm * em) / safe)
    phi_c = 1j * xi1 * np.where(small, t * np.exp(lp * t), (ep - em) / safe)
    phi_b = np.where(small, np.exp(lp * t) * (1.0 - lp * t),
                     (lp * em - lm * ep) / safe)
    u0 = np.asarray(u0_hat, dtype=np.complex128)
    b0 = np.asarray(b0_hat, dtype=np.complex128)
    return phi_u * u0 + phi_c * b0, phi_c * u0 + phi_b * b0


def _heat_dirichlet(grid: GridSpec, prof, t):
    """exp(t * d2^2) with homogeneous Dirichlet walls for the xi1=0 mode."""
    n = grid.N2
    A = grid.D2.toarray()[1:-1, 1:-1]
    out = np.zeros_like(np.asarray(prof, np.complex128))
    E = sla.expm(t * A)
    out[1:-1] = E @ np.asarray(prof, np.complex128)[1:-1]
    return out


def check_boundary_compatibility(u0: VectorField, b0: VectorField,
                                 div_tol=1e-6):
    """Raise with the violated conditions of the linear-evolution data."""
    problems = []
    scale = max(norm(u0, NormSpec("Linf")), norm(b0, NormSpec("Linf")), 1e-300)
    for name, f in (("u1", u0.c1), ("u2", u0.c2), ("b1", b0.c1), ("b2", b0.c2)):
        tr = float(np.max(np.abs(f.values[:, 0])))
        if tr > 1e-10 * scale:
            problems.append(f"wall trace of {name} = {tr:.3e}")
    from .grid import divergence
    for name, v in (("u0", u0), ("b0", b0)):
        d = norm(divergence(v), NormSpec("L2"))
        if d > div_tol * max(norm(v, NormSpec("L2")), 1e-300):
            problems.append(f"divergence of {name} = {d:.3e}")
    if problems:
        raise ValueError("incompatible initial data: " + "; ".join(problems))


def linear_evolve(u0: VectorField, b0: VectorField, times: Sequence[float],
                  contour_choice="sector", n_per_unit=12.0, adapt_tol=1e-7,
                  div_tol=1e-6, max_nodes=2 ** 14, progress=None):
    """Evolve fields under the linear system; returns a list of
    (t, u VectorField, b VectorField), including t=0 entries verbatim.

    Modes evolve independently; the xi1=0 mode is heat flow for u and the
    identity for b, and the (unresolvable) Nyquist mode is dropped.
    """
    g = u0.grid
    check_boundary_compatibility(u0, b0, div_tol)
    times = list(times)
    pos_times = np.array([t for t in times if t > 0.0])
    u1h = fft_x1(u0.c1).coeffs
    u2h = fft_x1(u0.c2).coeffs
    b1h = fft_x1(b0.c1).coeffs
    b2h = fft_x1(b0.c2).coeffs
    nt = len(pos_times)
    out_h = np.zeros((nt, 4, g.N1, g.N2), dtype=np.complex128)

    half = g.N1 // 2
    for k in range(1, half):
        xi1 = g.xi1[k]
        res = linear_evolve_mode(xi1, (u1h[k], u2h[k]), (b1h[k], b2h[k]),
                                 pos_times, g.x2, contour_choice=contour_choice,
                                 n_per_unit=n_per_unit, adapt_tol=adapt_tol,
                                 max_nodes=max_nodes)
        out_h[:, :, k, :] = res
        out_h[:, :, g.N1 - k, :] = np.conj(res)
        if progress is not None:
            progress(k, half)
    # xi1 = 0: heat for u (Dirichlet), identity for b
    for t_idx, t in enumerate(pos_times):
        out_h[t_idx, 0, 0] = _heat_dirichlet(g, u1h[0], t)
        out_h[t_idx, 1, 0] = _heat_dirichlet(g, u2h[0], t)
        out_h[t_idx, 2, 0] = b1h[0]
        out_h[t_idx, 3, 0] = b2h[0]

    traj = []
    pos_iter = 0
    for t in times:
        if t == 0.0:
            traj.append((0.0, u0.copy(), b0.copy()))
            continue
        arr = out_h[pos_iter]
        pos_iter += 1
        u = VectorField(ifft_x1(ModeStack(g, arr[0])),
                        ifft_x1(ModeStack(g, arr[1])))
        b = VectorField(ifft_x1(ModeStack(g, arr[2])),
                        ifft_x1(ModeStack(g, arr[3])))
        traj.append((float(t), u, b))
    return traj
