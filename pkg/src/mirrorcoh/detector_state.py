"""
Two-qubit detector state to second order in the coupling.

Two independent evaluation routes are provided:

* ``saddle_components`` -- Gaussian saddle-point closed forms, one Wightman
  evaluation per component at complex-shifted times.
* ``quadrature_components`` -- direct tensor-product Gauss-Legendre quadrature
  of the double time integrals.

X_4 is always assembled from the Wick identity
X_4 = E_A E_B + |E_AB|^2 + |X|^2.
"""

import enum
import math
from collections import namedtuple
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import (
    ConsistencyError,
    ConvergenceError,
    PerturbativeRegimeError,
    PreconditionError,
)
from .wightman import NO_CUTOFF, EpsilonPolicy, wightman_full

POSITIVITY_TOL = 1e-9
REALITY_TOL = 1e-9
CONVERGENCE_TOL = 1e-2

# Contour depths as fractions of the pole spacing pi/kappa.
_E_SHIFT_FRACTION = 0.5
_X_SHIFT_FRACTION = 0.4
_X_DIP_FRACTION = 0.3


class Method(str, enum.Enum):
    SADDLE = "saddle"
    QUADRATURE = "quadrature"
    LATE_TIME = "late_time"


class Contour(str, enum.Enum):
    SHIFTED = "shifted"
    REAL = "real"


@dataclass(frozen=True)
class DetectorPairConfig:
    """Gap, switching and placement of the detector pair.

    Detector B sits at x_A + d. Both supported mirrors stay in x <= 0, so
    x_A > 0 puts the pair on the observer side.
    """

    omega: float
    sigma: float
    lam: float
    t0: float
    xA: float
    d: float

    def __post_init__(self):
        for name in ("omega", "sigma", "lam", "t0", "xA", "d"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise PreconditionError(f"{name} must be finite, got {v}")
        if self.omega <= 0:
            raise PreconditionError(f"omega must be > 0 (energy gap), got {self.omega}")
        if self.sigma <= 0:
            raise PreconditionError(f"sigma must be > 0, got {self.sigma}")
        if self.lam <= 0:
            raise PreconditionError(f"lambda must be > 0, got {self.lam}")
        if self.d < 0:
            raise PreconditionError(f"d must be >= 0, got {self.d}")
        if self.xA <= 0:
            raise PreconditionError(
                f"xA must be > 0 (observer side of the mirror), got {self.xA}"
            )

    @property
    def xB(self):
        return self.xA + self.d

    def replace(self, **changes):
        vals = {k: getattr(self, k) for k in ("omega", "sigma", "lam", "t0", "xA", "d")}
        vals.update(changes)
        return DetectorPairConfig(**vals)


@dataclass(frozen=True)
class QuadratureSettings:
    """Node count per axis, integration box (units of sigma), cutoff policy.

    ``epsilon`` is in units of sigma and only enters on the real contour.
    """

    nodes: int = 160
    box: float = 6.0
    eps: EpsilonPolicy = field(default_factory=lambda: EpsilonPolicy(0.01, True))
    contour: Contour = Contour.SHIFTED
    check_convergence: bool = True

    def __post_init__(self):
        object.__setattr__(self, "contour", Contour(self.contour))
        if int(self.nodes) != self.nodes or self.nodes < 16:
            raise PreconditionError(f"nodes must be an integer >= 16, got {self.nodes}")
        if not self.box >= 4.0:
            raise PreconditionError(f"box must be >= 4 sigma, got {self.box}")
        if self.contour is Contour.REAL and self.eps.epsilon <= 0:
            raise PreconditionError("real-axis quadrature needs epsilon > 0")


@dataclass(frozen=True)
class TwoQubitComponents:
    eA: float
    eB: float
    eAB: complex
    x: complex
    x4: float
    method: Method
    validity_warning: str = None

    @classmethod
    def from_parts(cls, eA, eB, eAB, x, method, validity_warning=None):
        eA, eB, eAB, x = float(eA), float(eB), complex(eAB), complex(x)
        return cls(eA, eB, eAB, x, wick_x4(eA, eB, eAB, x), Method(method),
                   validity_warning)

    def scaled(self, factor):
        """Components for coupling lambda * sqrt(factor)."""
        return TwoQubitComponents.from_parts(
            self.eA * factor, self.eB * factor, self.eAB * factor, self.x * factor,
            self.method, self.validity_warning)


def wick_x4(eA, eB, eAB, x):
    return eA * eB + abs(eAB) ** 2 + abs(x) ** 2


def check_positivity(c, tol=POSITIVITY_TOL):
    if c.eA < -tol or c.eB < -tol:
        raise ConsistencyError(f"negative excitation probability ({c.eA}, {c.eB})")
    if c.eA * c.eB - abs(c.eAB) ** 2 < -tol:
        raise ConsistencyError(
            f"E_A E_B = {c.eA * c.eB:.6g} < |E_AB|^2 = {abs(c.eAB) ** 2:.6g}")
    if c.x4 - abs(c.x) ** 2 < -tol:
        raise ConsistencyError("X_4 < |X|^2")


def _real_part(val, name):
    if abs(val.imag) > REALITY_TOL * max(abs(val.real), 1e-300):
        raise ConsistencyError(f"{name} has imaginary part {val.imag:.3g}")
    return val.real


def saddle_valid(cfg, traj):
    """True when the complex shift Omega sigma^2 is below the pole spacing."""
    if traj.is_static:
        return True
    return traj.kappa * cfg.omega * cfg.sigma ** 2 < math.pi


def _validity_warning(cfg, traj):
    if saddle_valid(cfg, traj):
        return None
    val = traj.kappa * cfg.omega * cfg.sigma ** 2
    return f"kappa*Omega*sigma^2 = {val:.6g} >= pi: saddle-point approximation unreliable"


# ---------------------------------------------------------------------------
# saddle point
# ---------------------------------------------------------------------------

def saddle_prefactor(cfg):
    return 2.0 * math.pi * cfg.lam ** 2 * cfg.sigma ** 2 * math.exp(-(cfg.omega * cfg.sigma) ** 2)

def saddle_components(cfg, traj):
    """Components from the Gaussian saddle point.

    E_AB = P D(t0, -i Omega sigma^2; x_A, x_B) and
    X = -P D(t0 + i Omega sigma^2, 0; x_A, x_B), with
    P = 2 pi lambda^2 sigma^2 exp(-(Omega sigma)^2). E_A, E_B use coincident
    positions. Beyond kappa Omega sigma^2 >= pi the result carries a warning.
    """
    if cfg.omega <= 0:
        raise PreconditionError("saddle E_A diverges for Omega <= 0")
    P = saddle_prefactor(cfg)
    shift = 1j * cfg.omega * cfg.sigma ** 2
    eAB = P * wightman_full(traj, cfg.t0, -shift, cfg.xA, cfg.xB)
    eA = P * wightman_full(traj, cfg.t0, -shift, cfg.xA, cfg.xA)
    eB = P * wightman_full(traj, cfg.t0, -shift, cfg.xB, cfg.xB)
    x = -P * wightman_full(traj, cfg.t0 + shift, 0.0, cfg.xA, cfg.xB)
    eA = _real_part(eA, "E_A")
    eB = _real_part(eB, "E_B")
    c = TwoQubitComponents.from_parts(eA, eB, eAB, x, Method.SADDLE,
                                      _validity_warning(cfg, traj))
    check_positivity(c)
    return c


# ---------------------------------------------------------------------------
# direct quadrature
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(int(n))


def _nodes(n, a, b):
    x, w = _gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _shift_depth(cfg, traj, fraction):
    s2 = cfg.omega * cfg.sigma ** 2
    if traj.is_static:
        return s2
    return min(s2, fraction * math.pi / traj.kappa)


def _sum2(w1, w2, f):
    # fixed order; np.sum is pairwise and independent of process layout
    return np.sum(np.sum(f * w2[None, :], axis=1) * w1)


def _e_integral(cfg, traj, xa, xb, n, q, mask):
    """2 lambda^2 int dx int dy e^{-x^2/s^2} e^{-y^2/s^2 - 2i Omega y} D(t0+x, y)."""
    sig, om = cfg.sigma, cfg.omega
    L = q.box * sig
    x, wx = _nodes(n, -L, L)
    s, ws = _nodes(n, -L, L)
    if q.contour is Contour.SHIFTED:
        # y -> s - i delta stays inside the strip; every denominator keeps Im < 0
        y = s - 1j * _shift_depth(cfg, traj, _E_SHIFT_FRACTION)
        eps = NO_CUTOFF
    else:
        y = s.astype(complex)
        eps = _scaled_eps(q, sig)
    X, Y = np.meshgrid(x, y, indexing="ij")
    g = np.exp(-X ** 2 / sig ** 2 - Y ** 2 / sig ** 2 - 2j * om * Y)
    D = wightman_full(traj, cfg.t0 + X, Y, xa, xb, eps, mask)
    return 2.0 * cfg.lam ** 2 * _sum2(wx, ws, g * D)


def _x_integral(cfg, traj, n, q, mask):
    """-4 lambda^2 int dx int_0^inf dy e^{-x^2/s^2 + 2i Omega x} e^{-y^2/s^2} D(t0+x, y)."""
    sig, om = cfg.sigma, cfg.omega
    L = q.box * sig
    x, wx = _nodes(n, -L, L)
    s, ws = _nodes(n, 0.0, L)
    if q.contour is Contour.SHIFTED:
        z = x + 1j * _shift_depth(cfg, traj, _X_SHIFT_FRACTION)
        # y dips below the real axis (away from light-cone poles at y = d/2 and
        # the reflected-ray pole) with bounded depth, starting from y = 0.
        if traj.is_static:
            dip = 0.5 * sig
        else:
            dip = min(0.5 * sig, _X_DIP_FRACTION * math.pi / traj.kappa)
        ell = 0.25 * sig
        th = np.tanh(s / ell)
        y = s - 1j * dip * th
        jac = 1.0 - 1j * (dip / ell) * (1.0 - th * th)
        eps = NO_CUTOFF
    else:
        z = x.astype(complex)
        y = s.astype(complex)
        jac = np.ones_like(y)
        eps = _scaled_eps(q, sig)
    Z, Y = np.meshgrid(z, y, indexing="ij")
    g = np.exp(-Z ** 2 / sig ** 2 + 2j * om * Z - Y ** 2 / sig ** 2)
    D = wightman_full(traj, cfg.t0 + Z, Y, cfg.xA, cfg.xB, eps, mask)
    return -4.0 * cfg.lam ** 2 * _sum2(wx, ws * jac, g * D)


def _scaled_eps(q, sigma):
    return EpsilonPolicy(q.eps.epsilon * sigma, q.eps.extrapolate)


def _raw_quadrature(cfg, traj, n, q, mask):
    eA = _e_integral(cfg, traj, cfg.xA, cfg.xA, n, q, mask)
    eB = _e_integral(cfg, traj, cfg.xB, cfg.xB, n, q, mask)
    eAB = _e_integral(cfg, traj, cfg.xA, cfg.xB, n, q, mask)
    x = _x_integral(cfg, traj, n, q, mask)
    return eA, eB, eAB, x


def quadrature_components(cfg, traj, q=None, mask=None):
    """Components by direct Gauss-Legendre quadrature.

    With ``q.contour == "shifted"`` (default) the integration lines are moved
    into the analyticity strip of the Wightman function, which leaves the
    integrals unchanged but removes the near-axis poles; no cutoff is needed.
    ``"real"`` integrates on the real axis with the epsilon policy.

    When ``q.check_convergence`` is set the rule is re-run with twice the
    nodes and the finer result is returned.

    Raises
    ------
    ConvergenceError
        If doubling the nodes moves E_A, E_B, |E_AB| or |X| by more than 1%.
    """
    q = q or QuadratureSettings()
    fine = _raw_quadrature(cfg, traj, q.nodes, q, mask)
    if q.check_convergence:
        coarse = fine
        fine = _raw_quadrature(cfg, traj, 2 * q.nodes, q, mask)
        scale = math.sqrt(abs(fine[0] * fine[1]))
        for name, a, b in zip(("E_A", "E_B", "E_AB", "X"), coarse, fine):
            ref = max(abs(b), 1e-3 * scale)
            if abs(a - b) > CONVERGENCE_TOL * ref:
                raise ConvergenceError(name, a, b)
    eA, eB, eAB, x = fine
    eA = _real_part(complex(eA), "E_A")
    eB = _real_part(complex(eB), "E_B")
    c = TwoQubitComponents.from_parts(eA, eB, eAB, x, Method.QUADRATURE)
    check_positivity(c)
    return c


# ---------------------------------------------------------------------------
# late-time thermal response
# ---------------------------------------------------------------------------

PlanckExcitation = namedtuple("PlanckExcitation", ["exact", "approx"])


def _bose_weight(k, beta):
    # k / (e^{beta k} - 1) with the removable point at k = 0
    if k == 0.0:
        return 1.0 / beta
    bk = beta * k
    if bk > 700.0:
        return k * math.exp(-bk)
    return k / math.expm1(bk)


def planck_excitation(omega, sigma, kappa, lam):
    """Excitation of one detector by the late-time (thermal) outgoing flux.

    exact  = (lambda^2/2) int dk exp(-(k - Omega sigma)^2) k / (e^{2 pi k/(kappa sigma)} - 1)
    approx = (sqrt(pi) lambda^2 / 2) Omega sigma / (e^{2 pi Omega/kappa} - 1)

    The approximation replaces the Gaussian by a delta function and holds for
    kappa sigma >> 1.
    """
    for name, v in (("omega", omega), ("sigma", sigma), ("kappa", kappa), ("lambda", lam)):
        if not v > 0:
            raise PreconditionError(f"{name} must be > 0, got {v}")
    a = omega * sigma
    beta = 2.0 * math.pi / (kappa * sigma)
    width = 12.0
    val, _ = quad(lambda k: math.exp(-(k - a) ** 2) * _bose_weight(k, beta),
                  a - width, a + width, points=[0.0] if abs(a) < width else None,
                  epsabs=0.0, epsrel=1e-12, limit=200)
    exact = 0.5 * lam ** 2 * val
    approx = 0.5 * math.sqrt(math.pi) * lam ** 2 * a / math.expm1(beta * a)
    return PlanckExcitation(exact, approx)


# ---------------------------------------------------------------------------
# density matrix
# ---------------------------------------------------------------------------

def density_matrix(c):
    """rho_AB in the basis (dd, ud, du, uu) with d = down, u = up."""
    vals = (c.eA, c.eB, c.eAB, c.x, c.x4)
    if not all(np.isfinite(v) for v in vals):
        raise PreconditionError("components must be finite")
    ground = 1.0 - c.eA - c.eB - c.x4
    if ground < 0:
        raise PerturbativeRegimeError(
            f"1 - E_A - E_B - X_4 = {ground:.6g} < 0: coupling too large")
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = ground
    rho[1, 1] = c.eA
    rho[2, 2] = c.eB
    rho[3, 3] = c.x4
    rho[1, 2] = c.eAB
    rho[2, 1] = np.conj(c.eAB)
    rho[0, 3] = c.x
    rho[3, 0] = np.conj(c.x)
    return rho
