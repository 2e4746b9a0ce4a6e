"""
Two-point function of the field momentum pi = d_t phi in the mirror background.

Points are addressed in centre/half-difference form: t1 = T + y, t2 = T - y,
with detector A at x_A (time t1) and detector B at x_B (time t2). Callers pass
the full centre time T (switching centre already included).

The UV regulator is applied by point splitting in complex time,
t1 -> t1 - i eps/2 and t2 -> t2 + i eps/2. For the static mirror this is
identical to putting -i eps in every denominator. For the accelerating mirror
it keeps the cutoff meaningful at late times, where p(u_A) - p(u_B) is
exponentially small and a literal -i eps would swamp the outgoing term.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, SingularityError
from .trajectory import _logistic_pair, ray_trace

SINGULAR_THRESHOLD = 1e-12

TERM_NAMES = ("outgoing", "ingoing", "reflected_a", "reflected_b")


class Regime(str, enum.Enum):
    EARLY = "early"
    LATE = "late"


@dataclass(frozen=True)
class EpsilonPolicy:
    """UV cutoff.

    ``epsilon`` is an absolute time; detector-level code converts from units
    of sigma. With ``extrapolate`` the value is 2 D(eps/2) - D(eps), which
    cancels the linear-in-eps error.
    """

    epsilon: float = 0.0
    extrapolate: bool = False

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise PreconditionError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.extrapolate and self.epsilon == 0:
            raise PreconditionError("extrapolation needs epsilon > 0")


NO_CUTOFF = EpsilonPolicy()


def _p_and_dp(traj, u):
    if traj.is_static:
        return u, np.ones_like(u)
    s, _ = _logistic_pair(traj.kappa * u)
    return ray_trace(traj, u), s


def _check(name, den):
    m = np.min(np.abs(den))
    if m < SINGULAR_THRESHOLD:
        raise SingularityError(name, m)


def wightman_terms(traj, T, y, xA, xB, eps=NO_CUTOFF):
    """The four bracketed terms of D (before the -1/4pi prefactor and signs).

    Returns a tuple (outgoing, ingoing, reflected_a, reflected_b) such that
    D = -(outgoing + ingoing - reflected_a - reflected_b) / (4 pi).
    Extrapolation is not applied here.
    """
    T = np.asarray(T, dtype=complex)
    y = np.asarray(y, dtype=complex) - 0.5j * eps.epsilon
    t1 = T + y
    t2 = T - y
    uA, vA = t1 - xA, t1 + xA
    uB, vB = t2 - xB, t2 + xB
    pA, dA = _p_and_dp(traj, uA)
    pB, dB = _p_and_dp(traj, uB)

    den1 = pA - pB
    den2 = vA - vB
    den3 = pA - vB
    den4 = vA - pB
    # p(u_A) - p(u_B) is exponentially small at late times; compare it with
    # sqrt(p'_A p'_B), which makes the test a statement about u_A - u_B
    _check(TERM_NAMES[0], den1 / np.sqrt(dA * dB))
    for name, den in zip(TERM_NAMES[1:], (den2, den3, den4)):
        _check(name, den)

    # (p'_A/dp)(p'_B/dp) avoids underflow of p'_A p'_B at late times
    outgoing = (dA / den1) * (dB / den1)
    ingoing = 1.0 / (den2 * den2)
    refl_a = dA / (den3 * den3)
    refl_b = dB / (den4 * den4)
    return outgoing, ingoing, refl_a, refl_b


def _combine(terms, mask=None):
    t1, t2, t3, t4 = terms
    if mask is not None:
        m1, m2, m3, m4 = (float(bool(m)) for m in mask)
        t1, t2, t3, t4 = m1 * t1, m2 * t2, m3 * t3, m4 * t4
    return -(t1 + t2 - t3 - t4) / (4.0 * np.pi)


def _scalar(out):
    out = np.asarray(out)
    return complex(out) if out.ndim == 0 else out


def wightman_full(traj, T, y, xA, xB, eps=NO_CUTOFF, mask=None):
    """D(T, y; x_A, x_B) = <pi(T + y, x_A) pi(T - y, x_B)>.

    Parameters
    ----------
    traj : MirrorTrajectory
    T, y : complex or array_like
        Centre time and half time difference; complex values continue D into
        the analyticity strip.
    xA, xB : float
    eps : EpsilonPolicy
    mask : sequence of 4 bools, optional
        Drop individual terms (diagnostics only), ordered as ``TERM_NAMES``.

    Raises
    ------
    SingularityError
        If any denominator has modulus below 1e-12.
    """
    if eps.extrapolate:
        half = EpsilonPolicy(eps.epsilon / 2.0)
        full = EpsilonPolicy(eps.epsilon)
        d_half = _combine(wightman_terms(traj, T, y, xA, xB, half), mask)
        d_full = _combine(wightman_terms(traj, T, y, xA, xB, full), mask)
        return _scalar(2.0 * d_half - d_full)
    return _scalar(_combine(wightman_terms(traj, T, y, xA, xB, eps), mask))


def wightman_d1(traj, uA, uB, regime, eps=NO_CUTOFF):
    """Asymptotic forms of the outgoing term.

    Early (u -> -inf): -1/(4 pi (du - i eps)^2).
    Late (u -> +inf):  -(kappa^2/16 pi) / (sinh(kappa du / 2) - i eps)^2.
    """
    regime = Regime(regime)
    du = np.asarray(uA, dtype=complex) - np.asarray(uB, dtype=complex)
    if regime is Regime.EARLY:
        den = du - 1j * eps.epsilon
        _check("early outgoing", den)
        out = -1.0 / (4.0 * np.pi * den * den)
    else:
        if traj.is_static:
            raise PreconditionError("late-time form needs an accelerating mirror")
        k = traj.kappa
        den = np.sinh(0.5 * k * du) - 1j * eps.epsilon
        _check("late outgoing", den)
        out = -(k * k) / (16.0 * np.pi * den * den)
    return _scalar(out)
