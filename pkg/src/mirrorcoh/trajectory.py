"""
Mirror trajectories and the ray-tracing function p(u).

The accelerating mirror uses

    p(u) = -(1/kappa) * ln(1 + exp(-kappa*u)),

which starts at rest (p -> u as u -> -inf) and approaches the null ray v = 0.
The static mirror p(u) = u sits at x = 0 and is kept as a degenerate case
with trivially known answers for every downstream quantity.

All evaluation routines accept scalars or numpy arrays. Complex arguments are
supported (principal branch) so the Wightman function can be continued into
the strip |Im u| < pi/kappa.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import DomainError, UnsupportedError, UsageError


class TrajectoryKind(str, enum.Enum):
    ACCELERATING = "accelerating"
    STATIC = "static"


@dataclass(frozen=True)
class MirrorTrajectory:
    """A mirror worldline v = p(u).

    Parameters
    ----------
    kind : TrajectoryKind
    kappa : float
        Acceleration parameter (inverse length). Ignored for the static mirror.
    """

    kind: TrajectoryKind = TrajectoryKind.ACCELERATING
    kappa: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", TrajectoryKind(self.kind))
        if self.kind is TrajectoryKind.ACCELERATING:
            if not (math.isfinite(self.kappa) and self.kappa > 0):
                raise DomainError(f"kappa must be finite and > 0, got {self.kappa}")

    @classmethod
    def accelerating(cls, kappa):
        return cls(TrajectoryKind.ACCELERATING, float(kappa))

    @classmethod
    def static(cls):
        return cls(TrajectoryKind.STATIC, 1.0)

    @property
    def is_static(self):
        return self.kind is TrajectoryKind.STATIC


@dataclass(frozen=True)
class HawkingTemperature:
    value: float


# ---------------------------------------------------------------------------
# numerically stable building blocks (real or complex)
# ---------------------------------------------------------------------------

def log1p_complex(z):
    """log(1 + z), accurate for small |z| and valid for complex input.

    numpy's complex log1p loses the real part for |z| << 1, so this uses
    the w = 1 + z correction trick.
    """
    z = np.asarray(z)
    if not np.iscomplexobj(z):
        return np.log1p(z)
    w = 1.0 + z
    dw = w - 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.log(w) * (z / dw)
    return np.where(dw == 0, z, out)


def _positive_branch(ku):
    # Re(kappa*u) >= 0 uses exp(-kappa*u), the other branch exp(+kappa*u)
    return np.real(ku) >= 0


def _logistic_pair(ku):
    """Return (s, 1 - s) with s = 1/(1 + exp(ku)), both without cancellation."""
    ku = np.asarray(ku)
    pos = _positive_branch(ku)
    e = np.exp(np.where(pos, -ku, ku))  # |e| <= 1
    inv = 1.0 / (1.0 + e)
    s = np.where(pos, e * inv, inv)
    one_minus_s = np.where(pos, inv, e * inv)
    return s, one_minus_s


def _check_finite(u):
    if not np.all(np.isfinite(u)):
        raise DomainError("ray-tracing argument must be finite")


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def ray_trace(traj, u):
    """Evaluate p(u).

    Uses p(u) = u - ln(1 + exp(kappa*u))/kappa on the Re(kappa*u) < 0 branch so
    that |kappa*u| up to ~700 never overflows.
    """
    u_arr = np.asarray(u)
    _check_finite(u_arr)
    if traj.is_static:
        out = u_arr * 1.0
    else:
        k = traj.kappa
        ku = k * u_arr
        pos = _positive_branch(ku)
        arg = np.exp(np.where(pos, -ku, ku))
        lg = log1p_complex(arg)
        out = np.where(pos, -lg / k, u_arr - lg / k)
    return out[()] if out.ndim == 0 else out


def ray_trace_deriv(traj, u, order):
    """Closed-form derivative of p of the given order (1, 2 or 3).

    With s = p'(u) = 1/(1 + exp(kappa*u)):
    p'' = -kappa*s*(1-s) and p''' = kappa**2 * s*(1-s)*(1-2s).
    """
    if order not in (1, 2, 3):
        raise UsageError(f"derivative order must be 1, 2 or 3, got {order!r}")
    u_arr = np.asarray(u)
    _check_finite(u_arr)
    if traj.is_static:
        val = 1.0 if order == 1 else 0.0
        out = np.full(u_arr.shape, val, dtype=np.result_type(u_arr, float))
        return out[()] if out.ndim == 0 else out
    k = traj.kappa
    s, t = _logistic_pair(k * u_arr)
    if order == 1:
        out = s
    elif order == 2:
        out = -k * s * t
    else:
        out = k * k * s * t * (t - s)
    return out[()] if out.ndim == 0 else out


def energy_flux(traj, u):
    """<T_uu> from the Schwarzian of p.

    -(1/24 pi) * [p'''/p' - (3/2) (p''/p')**2]
    """
    d1 = ray_trace_deriv(traj, u, 1)
    d2 = ray_trace_deriv(traj, u, 2)
    d3 = ray_trace_deriv(traj, u, 3)
    r2 = d2 / d1
    return -(d3 / d1 - 1.5 * r2 * r2) / (24.0 * np.pi)


def energy_flux_closed(traj, u):
    """Closed form (kappa^2/48 pi) e^{ku}(e^{ku}+2)/(e^{ku}+1)^2, overflow-safe."""
    u_arr = np.asarray(u, dtype=float)
    _check_finite(u_arr)
    if traj.is_static:
        out = np.zeros_like(u_arr)
        return out[()] if out.ndim == 0 else out
    k = traj.kappa
    ku = k * u_arr
    pos = ku >= 0
    with np.errstate(over="ignore"):
        e_neg = np.exp(-np.abs(ku))
    # ku >= 0: divide numerator and denominator by e^{2ku}
    ratio_pos = (1.0 + 2.0 * e_neg) / (1.0 + e_neg) ** 2
    ratio_neg = e_neg * (e_neg + 2.0) / (e_neg + 1.0) ** 2
    out = k * k / (48.0 * np.pi) * np.where(pos, ratio_pos, ratio_neg)
    return out[()] if out.ndim == 0 else out


def hawking_temperature(traj):
    if traj.is_static:
        raise UnsupportedError("a static mirror has no Hawking temperature")
    return HawkingTemperature(traj.kappa / (2.0 * np.pi))


def thermal_flux_limit(traj):
    """Late-time flux kappa^2 / 48 pi = (pi/12) T_H^2."""
    return np.pi / 12.0 * hawking_temperature(traj).value ** 2


def mirror_position(traj, t, tol=1e-10):
    """Mirror coordinate x_m(t) solving t + x = p(t - x), found by bisection.

    The residual is strictly increasing in x and positive at x = 0 (p(u) < u),
    so the root is bracketed by expanding to the left.
    """
    if traj.is_static:
        return 0.0
    t = float(t)

    def resid(x):
        return t + x - float(ray_trace(traj, t - x))

    hi = 0.0
    if resid(hi) <= 0.0:
        return hi
    step = 1.0 / traj.kappa
    lo = -step
    while resid(lo) > 0.0:
        step *= 2.0
        lo = -step
    return bisect(resid, lo, hi, xtol=tol, maxiter=500)


def mirror_worldline(traj, times, tol=1e-10):
    """Polyline (t, x_m(t)) as an (n, 2) array."""
    times = np.asarray(times, dtype=float)
    xs = np.array([mirror_position(traj, t, tol) for t in times])
    return np.column_stack([times, xs])
