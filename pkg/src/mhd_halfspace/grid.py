"""Grids, fields, horizontal FFT, vertical derivatives, norms.

Domain: x1 periodic on [0, L1), x2 on [0, L2] (truncated half line).  Fields
are stored as real (N1, N2) arrays; per-frequency complex profiles live in
ModeStack / ModeProfile.

Operator conventions (used consistently by the projection and the steppers):
  - d/dx1 is spectral (exact for the stored modes),
  - D1 = derivative_x2 matrix: 3-point stencils, one-sided at the walls,
  - the discrete divergence uses the adjoint derivative
        D1* = -W^{-1} D1^T W
    so that div is minus the W-adjoint of the gradient (iξ1, D1).  Fields
    built as (D1* ψ, -∂1 ψ) are then divergence free to machine precision,
    and the Poisson solve of the Helmholtz projection annihilates div exactly.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp


def _fornberg(x, x0, m):
    """Finite-difference weights of order-m derivative at x0 from nodes x."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


class GridSpec:
    """Truncated half-plane grid: periodic x1, wall-bounded x2.

    stretch >= 0 clusters x2 nodes at the wall through the algebraic map
    x2(s) = L2 * s / (1 + stretch*(1 - s)); stretch = 0 is uniform.
    """

    def __init__(self, L1=400.0, N1=1024, L2=40.0, N2=256, stretch=0.0):
        if N1 < 4 or N1 % 2:
            raise ValueError(f"N1 must be even and >= 4, got {N1}")
        if N2 < 4:
            raise ValueError(f"N2 must be >= 4, got {N2}")
        if L1 <= 0 or L2 <= 0:
            raise ValueError("L1 and L2 must be positive")
        if stretch < 0:
            raise ValueError("stretch must be >= 0")
        self.L1 = float(L1)
        self.N1 = int(N1)
        self.L2 = float(L2)
        self.N2 = int(N2)
        self.stretch = float(stretch)

        self.x1 = np.arange(self.N1) * (self.L1 / self.N1)
        s = np.linspace(0.0, 1.0, self.N2)
        self.x2 = self.L2 * s / (1.0 + self.stretch * (1.0 - s))
        self.dx2 = np.diff(self.x2)
        # trapezoid weights in x2 (the stretched metric)
        w = np.zeros(self.N2)
        w[:-1] += 0.5 * self.dx2
        w[1:] += 0.5 * self.dx2
        self.w2 = w
        self.dx1 = self.L1 / self.N1
        # frequencies 2*pi*k/L1 in fftfreq order, k = 0..N1/2-1, -N1/2..-1
        self.xi1 = 2.0 * np.pi * np.fft.fftfreq(self.N1, d=self.dx1)
        # derivative convention: the Nyquist mode of i*xi1*(real field) has no
        # real grid representation, so odd derivatives zero it; the projection
        # and the steppers use the same convention to stay exact on real data
        self.xi1_d = self.xi1.copy()
        self.xi1_d[self.N1 // 2] = 0.0

        self._build_matrices()

    def _build_matrices(self):
        n, x = self.N2, self.x2
        rows, cols, v1 = [], [], []
        for i in range(n):
            if i == 0:
                idx = [0, 1, 2]
            elif i == n - 1:
                idx = [n - 3, n - 2, n - 1]
            else:
                idx = [i - 1, i, i + 1]
            w = _fornberg(x[idx], x[i], 1)
            rows += [i] * 3
            cols += idx
            v1 += list(w)
        self.D1 = sp.csr_matrix((v1, (rows, cols)), shape=(n, n))

        rows, cols, v2 = [], [], []
        for i in range(n):
            if i == 0:
                idx = [0, 1, 2, 3]
            elif i == n - 1:
                idx = [n - 4, n - 3, n - 2, n - 1]
            else:
                idx = [i - 1, i, i + 1]
            w = _fornberg(x[idx], x[i], 2)
            rows += [i] * len(idx)
            cols += idx
            v2 += list(w)
        self.D2 = sp.csr_matrix((v2, (rows, cols)), shape=(n, n))

        W = self.w2
        adj = self.D1.T.multiply(W[None, :]).multiply(1.0 / W[:, None])
        self.D1_adj = sp.csr_matrix(-adj)
        self.D3 = sp.csr_matrix(self.D1 @ self.D2)

    def __eq__(self, other):
        if not isinstance(other, GridSpec):
            return NotImplemented
        return (self.L1, self.N1, self.L2, self.N2, self.stretch) == (
            other.L1, other.N1, other.L2, other.N2, other.stretch)

    def __repr__(self):
        return (f"GridSpec(L1={self.L1}, N1={self.N1}, L2={self.L2}, "
                f"N2={self.N2}, stretch={self.stretch})")

    def to_dict(self):
        return {"L1": self.L1, "N1": self.N1, "L2": self.L2, "N2": self.N2,
                "stretch": self.stretch}


def _check_finite(a, name):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")


@dataclass
class ScalarField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.N1, self.grid.N2):
            raise ValueError(
                f"field shape {self.values.shape} does not match grid "
                f"({self.grid.N1}, {self.grid.N2})")
        _check_finite(self.values, "ScalarField")

    def copy(self):
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VectorField:
    c1: ScalarField
    c2: ScalarField

    def __post_init__(self):
        if self.c1.grid is not self.c2.grid and self.c1.grid != self.c2.grid:
            raise ValueError("vector components must share one grid")

    @property
    def grid(self):
        return self.c1.grid

    def copy(self):
        return VectorField(self.c1.copy(), self.c2.copy())

    @staticmethod
    def zeros(grid):
        z = np.zeros((grid.N1, grid.N2))
        return VectorField(ScalarField(grid, z.copy()), ScalarField(grid, z.copy()))


@dataclass
class ModeProfile:
    xi1: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)


@dataclass
class ModeStack:
    """All horizontal-frequency profiles of a scalar field (fftfreq layout).

    coeffs[k, :] is the complex x2-profile at frequency xi1[k]; normalization
    is 1/N1 so a constant field has coefficient 1 in the k=0 slot.
    """
    grid: GridSpec
    coeffs: np.ndarray

    @property
    def xi1(self):
        return self.grid.xi1

    def profile(self, k):
        return ModeProfile(self.grid.xi1[k], self.coeffs[k])


def fft_x1(f: ScalarField) -> ModeStack:
    """Horizontal Fourier transform; frequencies 2*pi*k/L1, fftfreq order."""
    _check_finite(f.values, "fft_x1 input")
    return ModeStack(f.grid, np.fft.fft(f.values, axis=0) / f.grid.N1)


def ifft_x1(m: ModeStack) -> ScalarField:
    vals = np.fft.ifft(m.coeffs * m.grid.N1, axis=0)
    return ScalarField(m.grid, vals.real.copy())


def ifft_x1_imag_norm(m: ModeStack) -> float:
    """Max imaginary leak of the reconstruction (real-valuedness check)."""
    vals = np.fft.ifft(m.coeffs * m.grid.N1, axis=0)
    return float(np.max(np.abs(vals.imag)))


def dx1(f: ScalarField, order=1) -> ScalarField:
    """Spectral x1 derivative of given order (odd orders zero the Nyquist)."""
    g = f.grid
    fh = np.fft.fft(f.values, axis=0)
    xi = g.xi1_d if order % 2 else g.xi1
    fh *= (1j * xi[:, None]) ** order
    return ScalarField(g, np.fft.ifft(fh, axis=0).real.copy())


def derivative_x2(obj, order=1):
    """Second-order finite-difference d/dx2 (order 1 or 2), one-sided at the
    boundary rows.  Accepts ScalarField, ModeProfile or a bare array whose
    last axis runs along x2 (then a grid must be supplied via obj=(grid,arr))."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if isinstance(obj, ScalarField):
        M = obj.grid.D1 if order == 1 else obj.grid.D2
        return ScalarField(obj.grid, (M @ obj.values.T).T)
    if isinstance(obj, tuple):
        grid, arr = obj
        M = grid.D1 if order == 1 else grid.D2
        return (M @ np.asarray(arr).T).T
    raise TypeError("derivative_x2 expects ScalarField or (grid, array)")


def d2_adjoint(grid: GridSpec, arr):
    """Adjoint x2 derivative -W^{-1} D1^T W (the divergence-side derivative)."""
    return (grid.D1_adj @ np.asarray(arr).T).T


def divergence(v: VectorField) -> ScalarField:
    """Discrete divergence: spectral d/dx1 + adjoint d/dx2."""
    g = v.grid
    d1 = dx1(v.c1).values
    d2 = d2_adjoint(g, v.c2.values)
    return ScalarField(g, d1 + d2)


def mode_divergence(grid: GridSpec, xi1: float, u1, u2):
    """Per-mode divergence i*xi1*u1 + D1*_x2 u2 for complex profiles."""
    return 1j * xi1 * np.asarray(u1) + grid.D1_adj @ np.asarray(u2)


# ---------------------------------------------------------------------------
# norms

_KINDS = ("L2", "Linf", "L1", "L1x1_L2x2", "Hs",
          "D1_L2", "D1_H1", "Grad_H1", "D1_Linf")


@dataclass(frozen=True)
class NormSpec:
    kind: str
    s: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "Hs":
            if self.s not in (1, 2, 3):
                raise ValueError("Hs order s must be 1, 2 or 3")
        elif self.s is not None:
            raise ValueError(f"norm kind {self.kind!r} takes no order")

    @staticmethod
    def parse(text: str) -> "NormSpec":
        t = text.strip()
        if t in ("H1", "H2", "H3"):
            return NormSpec("Hs", int(t[1]))
        return NormSpec(t)

    def __str__(self):
        return f"H{self.s}" if self.kind == "Hs" else self.kind


def _fields_of(obj):
    if isinstance(obj, ScalarField):
        return [obj]
    if isinstance(obj, VectorField):
        return [obj.c1, obj.c2]
    if isinstance(obj, (list, tuple)):
        out = []
        for o in obj:
            out.extend(_fields_of(o))
        return out
    raise TypeError(f"cannot take norms of {type(obj)}")


def _l2sq(f: ScalarField) -> float:
    g = f.grid
    return float(g.dx1 * np.sum((f.values ** 2) @ g.w2))


def _dalpha(f: ScalarField, a1: int, a2: int) -> ScalarField:
    out = f
    if a1:
        out = dx1(out, a1)
    if a2 == 1:
        out = derivative_x2(out, 1)
    elif a2 == 2:
        out = derivative_x2(out, 2)
    elif a2 == 3:
        out = ScalarField(f.grid, (f.grid.D3 @ out.values.T).T)
    return out


def _hs_sq(f: ScalarField, s: int) -> float:
    total = 0.0
    for a1 in range(s + 1):
        for a2 in range(s + 1 - a1):
            total += _l2sq(_dalpha(f, a1, a2))
    return total


def norm(obj, spec: NormSpec) -> float:
    """Quadrature-consistent norms of fields (vector: summed in quadrature,
    max for sup norms)."""
    fields = _fields_of(obj)
    kind = spec.kind
    if kind == "L2":
        return float(np.sqrt(sum(_l2sq(f) for f in fields)))
    if kind == "Linf":
        return float(max(np.max(np.abs(f.values)) for f in fields))
    if kind == "L1":
        return float(sum(f.grid.dx1 * np.sum(np.abs(f.values) @ f.grid.w2)
                         for f in fields))
    if kind == "L1x1_L2x2":
        tot = 0.0
        for f in fields:
            per_x1 = np.sqrt((f.values ** 2) @ f.grid.w2)
            tot += f.grid.dx1 * np.sum(per_x1)
        return float(tot)
    if kind == "Hs":
        return float(np.sqrt(sum(_hs_sq(f, spec.s) for f in fields)))
    if kind == "D1_L2":
        return float(np.sqrt(sum(_l2sq(dx1(f)) for f in fields)))
    if kind == "D1_H1":
        return float(np.sqrt(sum(_hs_sq(dx1(f), 1) for f in fields)))
    if kind == "Grad_H1":
        tot = 0.0
        for f in fields:
            tot += _hs_sq(dx1(f), 1) + _hs_sq(derivative_x2(f, 1), 1)
        return float(np.sqrt(tot))
    if kind == "D1_Linf":
        return float(max(np.max(np.abs(dx1(f).values)) for f in fields))
    raise AssertionError(kind)


def parseval_l2(f: ScalarField) -> float:
    """L2 norm evaluated mode-wise (Parseval cross-check)."""
    m = fft_x1(f)
    g = f.grid
    per_mode = (np.abs(m.coeffs) ** 2) @ g.w2
    return float(np.sqrt(g.L1 * np.sum(per_mode)))
