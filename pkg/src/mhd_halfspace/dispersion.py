"""Closed-form spectral objects and the contour families in the lambda plane.

The symbol omega(lambda; xi1) = sqrt(lambda + xi1^2 + xi1^2/lambda) is taken
on the principal branch, so Re omega >= 0 everywhere and the discontinuity
set is exactly

    {Re l <= 0, Im l = 0}  union  {l on the circle |l| = |xi1|, Re l <= -xi1^2/2}

for |xi1| <= 2, and two real segments for |xi1| > 2.  Deformed contours wrap
this set; on each bank omega has the explicit value +-i|omega| recorded per
piece, so no pointwise branch decisions are ever made on a cut.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

_TWO_THIRDS_PI = 2.0 * np.pi / 3.0


def omega(lam, xi1):
    """Symbol sqrt(lam + xi1^2 + xi1^2/lam), principal branch (Re >= 0)."""
    lam = np.asarray(lam, dtype=np.complex128)
    if np.any(lam == 0):
        raise ValueError("omega undefined at lambda = 0 (essential singularity)")
    x2 = xi1 * xi1
    out = np.sqrt(lam + x2 + x2 / lam)
    return out if out.ndim else complex(out)


def lambda_pm(xi1, xi2):
    """Roots of l^2 + |xi|^2 l + xi1^2 = 0; l+ has the larger real part
    (ties broken toward positive imaginary part)."""
    q = xi1 * xi1 + xi2 * xi2
    disc = q * q - 4.0 * xi1 * xi1
    if disc >= 0.0:
        lm = 0.5 * (-q - np.sqrt(disc))
        lp = (xi1 * xi1) / lm if lm != 0.0 else 0.0 + 0.0j
        return complex(lp), complex(lm)
    s = 0.5 * np.sqrt(-disc)
    return complex(-0.5 * q, s), complex(-0.5 * q, -s)


def lambda_prime_pm(xi1):
    """Branch points: the xi2 = 0 specialization of lambda_pm."""
    a = abs(xi1)
    if a <= 2.0:
        s = 0.5 * np.sqrt(max(4.0 * a * a - a ** 4, 0.0))
        return complex(-0.5 * a * a, s), complex(-0.5 * a * a, -s)
    disc = a ** 4 - 4.0 * a * a
    lm = 0.5 * (-a * a - np.sqrt(disc))
    lp = (a * a) / lm
    return complex(lp), complex(lm)


def eta_pm(xi1, xi2):
    """Real roots eta+- = |xi|^2/2 +- sqrt(|xi|^4 - 4 xi1^2)/2; requires
    |xi|^4 >= 4 xi1^2.  Satisfies eta+ + eta- = |xi|^2, eta+ eta- = xi1^2,
    and eta_pm = -lambda_mp."""
    q = xi1 * xi1 + xi2 * xi2
    disc = q * q - 4.0 * xi1 * xi1
    if disc < 0.0:
        raise ValueError("eta_pm undefined: |xi|^4 < 4 xi1^2 (complex regime)")
    ep = 0.5 * (q + np.sqrt(disc))
    em = (xi1 * xi1) / ep if ep > 0.0 else 0.0
    return float(ep), float(em)


def jacobian_eta_minus(xi1, xi2):
    """d(eta-)/d(xi2) = 2 xi2 lambda+ / (lambda+ - lambda-)."""
    q = xi1 * xi1 + xi2 * xi2
    disc = q * q - 4.0 * xi1 * xi1
    if disc <= 0.0:
        raise ValueError("jacobian_eta_minus undefined at degenerate discriminant")
    lp, lm = lambda_pm(xi1, xi2)
    return complex(2.0 * xi2 * lp / (lp - lm))


# ---------------------------------------------------------------------------
# contours


@dataclass
class Piece:
    label: str
    nodes: np.ndarray    # complex quadrature points lambda_k
    weights: np.ndarray  # complex weights, including dlambda/ds and direction
    omega: np.ndarray    # branch-resolved omega at the nodes


@dataclass
class Contour:
    xi1: float
    kind: str            # "sector" or "deformed"
    pieces: List[Piece]
    params: dict = field(default_factory=dict)

    @property
    def nodes(self):
        return np.concatenate([p.nodes for p in self.pieces])

    @property
    def weights(self):
        return np.concatenate([p.weights for p in self.pieces])

    @property
    def omegas(self):
        return np.concatenate([p.omega for p in self.pieces])

    @property
    def labels(self):
        return [p.label for p in self.pieces]

    def weight_sum_check(self):
        """sum w_k should telescope to lambda_end - lambda_start; returns
        (computed, expected)."""
        return (complex(np.sum(self.weights)),
                self.params["lam_end"] - self.params["lam_start"])

    def refined(self, factor=2):
        """Rebuild with a denser node budget (adaptive doubling)."""
        p = dict(self.params)
        p["n_per_unit"] = p["n_per_unit"] * factor
        if self.kind == "sector":
            return build_sector_contour(self.xi1, **{k: p[k] for k in
                ("t_min", "R", "theta0", "lambda_max", "n_per_unit")})
        return build_deformed_contours(self.xi1, **{k: p[k] for k in
            ("eps", "lambda_max", "n_per_unit", "t_min", "phase_scale",
             "t_max")})


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _panel_nodes(edges):
    """Composite 10-point Gauss-Legendre nodes/weights on consecutive edges."""
    a = edges[:-1]
    b = edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    s = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return s, w


def _edges(a, b, n_nodes, refine_a=False, refine_b=False, floor=1e-8):
    """Panel edges on [a, b]: geometric cascades (ratio 2) toward refined
    endpoints down to floor*(b-a), then global bisection until the panel
    count supports roughly n_nodes; raising n_nodes refines everywhere."""
    if b <= a:
        raise ValueError("empty panel interval")
    L = b - a
    edges = set(np.linspace(a, b, 9))

    def cascade(end):
        h = L * floor
        while h < L / 8.0:
            edges.add(a + h if end == "a" else b - h)
            h *= 2.0

    if refine_a:
        cascade("a")
    if refine_b:
        cascade("b")
    e = np.unique(np.fromiter(edges, dtype=np.float64))
    target = max(2, int(np.ceil(n_nodes / len(_GL_X))))
    while len(e) - 1 < target:
        e = np.unique(np.concatenate([e, 0.5 * (e[:-1] + e[1:])]))
    return e


def _piece_from_map(label, s, w, lam_of, dlam_of, omega_of):
    lam = lam_of(s)
    wts = w * dlam_of(s)
    om = omega_of(s, lam)
    return Piece(label, lam, wts, om)


def build_sector_contour(xi1, t_min, R=None, theta0=_TWO_THIRDS_PI,
                         lambda_max=None, n_per_unit=12.0):
    """Wedge contour {R + eta e^{+-i theta0}} truncated where exp(lam*t_min)
    is below 1e-16.  Checks Re omega > 0 at every node."""
    a = abs(xi1)
    if R is None:
        # stay clear of the circle-arc part of the cut (only binds for a < 1)
        R = max(0.05, 0.75 * a * np.sqrt(max(0.0, 1.0 - a * a)))
    if R <= 0:
        raise ValueError("sector vertex R must be positive")
    c = np.cos(theta0)
    if c >= 0:
        raise ValueError("theta0 must open into the left half plane")
    eta_max = (R + 37.0 / t_min) / (-c)
    if lambda_max is not None:
        eta_max = min(eta_max, lambda_max)
    n_nodes = max(40.0, n_per_unit * min(eta_max, 400.0))
    edges = _edges(0.0, eta_max, n_nodes, refine_a=True, floor=1e-10)
    s, w = _panel_nodes(edges)

    pieces = []
    for sign, lab in ((-1.0, "SectorLower"), (+1.0, "SectorUpper")):
        e = np.exp(1j * sign * theta0)
        if sign < 0:
            ss, ww = s[::-1], -w[::-1]  # traversed from far end toward vertex
        else:
            ss, ww = s, w
        lam = R + ss * e
        om = omega(lam, xi1)
        pieces.append(Piece(lab, lam, ww * e, om))
    ctr = Contour(xi1, "sector", pieces,
                  {"t_min": t_min, "R": R, "theta0": theta0,
                   "lambda_max": lambda_max, "n_per_unit": n_per_unit,
                   "lam_start": R + eta_max * np.exp(-1j * theta0),
                   "lam_end": R + eta_max * np.exp(1j * theta0)})
    bad = np.where(ctr.omegas.real <= 0)[0]
    if bad.size:
        k = bad[0]
        raise ValueError(f"Re omega <= 0 at sector node {k}: lambda={ctr.nodes[k]}")
    return ctr


def _abs_omega_axis(eta, xi1):
    """|omega| on the negative real axis lambda = -eta (where omega^2 < 0)."""
    val = eta - xi1 * xi1 + xi1 * xi1 / eta
    return np.sqrt(np.maximum(val, 0.0))


def build_deformed_contours(xi1, eps=None, lambda_max=None, n_per_unit=12.0,
                            t_min=0.5, phase_scale=40.0, t_max=None):
    """Contour hugging the branch-cut set (case |xi1| <= 2: Gamma1..Gamma7;
    case |xi1| > 2: GammaTilde1, GammaTilde2 plus the Gamma5 circle).

    Cut banks and circle arcs are parametrized by xi2 = |omega| (the change
    of variables eta = eta_-+(xi2) of the whole-space reduction), which makes
    the e^{-omega x2}-type oscillation linear in the parameter; panels are
    sized for phases up to phase_scale (about twice the vertical extent of
    the data).  The small circles are kept at finite radius and the banks
    start exactly where the circles end, so the total is eps-independent up
    to quadrature error; the eps -> 0 vanishing of the circle pieces is
    observable via mode_piece_magnitudes.
    """
    if xi1 == 0:
        raise ValueError("deformed contour requires xi1 != 0")
    a = abs(xi1)
    if eps is None:
        eps = min(1e-4, a / 100.0)
    lp, lm = lambda_prime_pm(xi1)
    tip = a if a <= 2.0 else -lp.real
    if eps >= 0.5 * tip:
        raise ValueError(f"eps={eps} collides with the cut endpoint")
    if t_max is None:
        t_max = t_min
    eta_max = a + 2.0 * 37.0 / t_min
    if lambda_max is not None:
        eta_max = min(eta_max, lambda_max)
    npu = n_per_unit
    # GL panel width from the phase budget: integrand factors oscillate like
    # exp(i*xi2*(x2+y2)) with x2+y2 <= phase_scale
    width = 50.0 / (max(npu, 1e-3) * max(phase_scale, 1.0))
    # bank start at |omega| on the eps circle: |omega(-eps)|
    Xi = np.sqrt(eps - a * a + a * a / eps)
    S4 = np.sqrt(max(eta_max + a * a / eta_max - a * a, 0.0))

    pieces: List[Piece] = []

    def piece(label, lam, dlam, om, s_w, direction):
        w = s_w
        if direction < 0:
            lam, dlam, om, w = lam[::-1], dlam[::-1], om[::-1], -w[::-1]
        pieces.append(Piece(label, np.ascontiguousarray(lam),
                            np.ascontiguousarray(w * dlam),
                            np.ascontiguousarray(om)))

    def bank_xi2(label, lo, hi, branch, sign_omega, direction,
                 refine=(False, False), floor=1e-10):
        """Real-axis bank lambda = -eta_branch(xi2), xi2 in [lo, hi]."""
        n_nodes = 10.0 * (hi - lo) / width
        edges = _edges(lo, hi, n_nodes, refine[0], refine[1], floor=floor)
        s, w = _panel_nodes(edges)
        q = a * a + s * s
        disc = np.sqrt(np.maximum(q * q - 4.0 * a * a, 1e-300))
        eta_plus = 0.5 * (q + disc)
        eta_minus = (a * a) / eta_plus
        if branch == "minus":
            lam = -eta_minus.astype(np.complex128)
            dlam = (2.0 * s * eta_minus / disc).astype(np.complex128)
        else:
            lam = -eta_plus.astype(np.complex128)
            dlam = (-2.0 * s * eta_plus / disc).astype(np.complex128)
        om = 1j * sign_omega * s
        piece(label, lam, dlam, om, w, direction)

    def arc_xi2(label, which, lo, hi, sign_omega, direction):
        """Pi-circle arc lambda = lambda_+- (xi1, xi2), xi2 in [lo, hi]."""
        t_width = min(width, 4.0 / (2.0 * max(hi, 1e-9) * max(t_max, 1e-9)))
        n_nodes = 10.0 * (hi - lo) / t_width
        edges = _edges(lo, hi, n_nodes, True, True, floor=1e-10)
        s, w = _panel_nodes(edges)
        q = a * a + s * s
        Dh = np.sqrt(np.maximum(a * a - 0.25 * q * q, 1e-300))
        sgn = 1.0 if which == "upper" else -1.0
        lam = -0.5 * q + 1j * sgn * Dh
        dlam = -2.0 * s * lam / (2j * sgn * Dh)
        om = 1j * sign_omega * s
        piece(label, lam, dlam, om, w, direction)

    def circle(label, center, radius, g0, g1, om_scale):
        gw = min(0.5, 2.0 * width / max(om_scale, 1e-9),
                 4.0 / (max(radius, 1e-12) * max(t_max, 1e-9)))
        n_nodes = 10.0 * abs(g1 - g0) / gw
        edges = _edges(min(g0, g1), max(g0, g1), n_nodes)
        s, w = _panel_nodes(edges)
        if g1 < g0:
            s, w = s[::-1], -w[::-1]
        lam = center + radius * np.exp(1j * s)
        dl = 1j * radius * np.exp(1j * s)
        pieces.append(Piece(label, lam, w * dl, omega(lam, xi1)))

    if a <= 2.0:
        d_tilde = np.sqrt(max(2.0 * a - a * a, 0.0))
        # exact junction parameters with the eps circles
        s_arc = np.sqrt(max(d_tilde ** 2 - eps * eps / a, 0.0))
        s1_lo = np.sqrt(d_tilde ** 2 + eps * eps / (a - eps))
        s4_lo = np.sqrt(d_tilde ** 2 + eps * eps / (a + eps))
        th_star = np.arccos(min(1.0, eps / (2.0 * a)))
        have_arcs = s_arc > 4.0 * eps

        circle("Gamma7", 0.0, eta_max, -_TWO_THIRDS_PI, -np.pi, np.sqrt(eta_max))
        bank_xi2("Gamma4", s4_lo, S4, "plus", -1.0, -1, (True, False))
        circle("Gamma6", -a, eps, -np.pi, -th_star, d_tilde)
        if have_arcs:
            arc_xi2("Gamma3", "lower", 1e-8 * d_tilde, s_arc, -1.0, -1)
            arc_xi2("Gamma3", "lower", 1e-8 * d_tilde, s_arc, +1.0, +1)
        circle("Gamma6", -a, eps, -th_star, 0.0, d_tilde)
        bank_xi2("Gamma1", s1_lo, Xi, "minus", +1.0, +1, (True, False))
        circle("Gamma5", 0.0, eps, -np.pi, np.pi, Xi)
        bank_xi2("Gamma1", s1_lo, Xi, "minus", -1.0, -1, (True, False))
        circle("Gamma6", -a, eps, 0.0, th_star, d_tilde)
        if have_arcs:
            arc_xi2("Gamma2", "upper", 1e-8 * d_tilde, s_arc, -1.0, -1)
            arc_xi2("Gamma2", "upper", 1e-8 * d_tilde, s_arc, +1.0, +1)
        circle("Gamma6", -a, eps, th_star, np.pi, d_tilde)
        bank_xi2("Gamma4", s4_lo, S4, "plus", +1.0, +1, (True, False))
        circle("Gamma7", 0.0, eta_max, np.pi, _TWO_THIRDS_PI, np.sqrt(eta_max))
        lam_start = eta_max * np.exp(-1j * _TWO_THIRDS_PI)
        lam_end = eta_max * np.exp(1j * _TWO_THIRDS_PI)
    else:
        floor_s = 1e-8 * a
        bank_xi2("GammaTilde2", floor_s, S4, "plus", -1.0, -1, (True, False))
        bank_xi2("GammaTilde2", floor_s, S4, "plus", +1.0, +1, (True, False))
        bank_xi2("GammaTilde1", floor_s, Xi, "minus", +1.0, +1, (True, False))
        circle("Gamma5", 0.0, eps, -np.pi, np.pi, Xi)
        bank_xi2("GammaTilde1", floor_s, Xi, "minus", -1.0, -1, (True, False))
        lam_start = -eta_max + 0j
        lam_end = -eta_max + 0j
    return Contour(xi1, "deformed", pieces,
                   {"eps": eps, "lambda_max": lambda_max, "n_per_unit": npu,
                    "t_min": t_min, "phase_scale": phase_scale, "t_max": t_max,
                    "lam_start": lam_start, "lam_end": lam_end})
