"""
Entanglement and coherence diagnostics of the two-qubit state.

g2 = X_4 / (E_A E_B) and g1 = E_AB / sqrt(E_A E_B); with the Wick form of X_4
they obey g2 - |g1|^2 = Ntilde + 2, where Ntilde = |X|^2/(E_A E_B) - 1 has the
sign of the negativity.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .detector_state import Method, TwoQubitComponents, saddle_prefactor, DetectorPairConfig
from .errors import ConsistencyError, DegenerateError, PreconditionError
from .trajectory import MirrorTrajectory
from .wightman import Regime, wightman_d1

BELL_G2_THRESHOLD = 9.0 + 4.0 * math.sqrt(5.0)
CLOSED_FORM_RTOL = 1e-10


class Band(str, enum.Enum):
    SEPARABLE_CERTIFIED = "SeparableCertified"
    INDETERMINATE = "Indeterminate"
    ENTANGLED_CERTIFIED = "EntangledCertified"


@dataclass(frozen=True)
class CoherenceReport:
    g1: complex
    g2: float
    ntilde: float
    negativity: float
    bell_sufficient: bool
    band: Band

    def as_dict(self):
        return {
            "g1_re": self.g1.real,
            "g1_im": self.g1.imag,
            "g1_abs": abs(self.g1),
            "g2": self.g2,
            "ntilde": self.ntilde,
            "negativity": self.negativity,
            "bell_sufficient": self.bell_sufficient,
            "band": self.band.value,
        }


def negativity(c):
    """max(sqrt(|X|^2 + ((E_A - E_B)/2)^2) - (E_A + E_B)/2, 0)."""
    half_diff = 0.5 * (c.eA - c.eB)
    val = math.sqrt(abs(c.x) ** 2 + half_diff * half_diff) - 0.5 * (c.eA + c.eB)
    return max(val, 0.0)


def _noise(c):
    noise = c.eA * c.eB
    if not (c.eA > 0 and c.eB > 0):
        raise DegenerateError(f"E_A E_B = {noise} must be positive")
    return noise


def negativity_ratio(c):
    """|X|^2 / (E_A E_B) - 1; independent of the coupling strength."""
    return abs(c.x) ** 2 / _noise(c) - 1.0


def classify_from_g2(g2):
    """Certificate available to an observer who only measures g2."""
    if g2 < 0:
        raise PreconditionError(f"g2 must be >= 0, got {g2}")
    if g2 < 2.0:
        return Band.SEPARABLE_CERTIFIED
    if g2 > 3.0:
        return Band.ENTANGLED_CERTIFIED
    return Band.INDETERMINATE


def bell_chsh_sufficient(c):
    """Exact sufficient condition for CHSH violation: |X|^4 > 16 X_4 E_A E_B."""
    return abs(c.x) ** 4 > 16.0 * c.x4 * c.eA * c.eB


def bell_g2_predicate(g2):
    """g2-only form of the Bell condition, valid when |g1| << 1.

    Follows from (g2)^2 - 18 g2 + 1 > 0 on the g2 >= 1 branch.
    """
    return g2 > BELL_G2_THRESHOLD


def coherences(c):
    noise = _noise(c)
    g1 = c.eAB / math.sqrt(noise)
    g2 = c.x4 / noise
    return CoherenceReport(
        g1=complex(g1),
        g2=float(g2),
        ntilde=abs(c.x) ** 2 / noise - 1.0,
        negativity=negativity(c),
        bell_sufficient=bell_chsh_sufficient(c),
        band=classify_from_g2(g2),
    )


def _closed_ratios(omega, sigma, kappa, d):
    s = math.sin(kappa * omega * sigma ** 2)
    r_local = s / math.sinh(0.5 * kappa * d)
    r_cross = s / np.sinh(kappa * complex(0.5 * d, -omega * sigma ** 2))
    return r_local, r_cross


def closed_form_late_time(omega, sigma, kappa, d, lam):
    """Saddle components for the late-time outgoing term alone, and their report.

    Returns ``(components, report)``. The report built from the components is
    checked against the sin/sinh closed forms to 1e-10 relative.
    """
    for name, v in (("omega", omega), ("sigma", sigma), ("kappa", kappa),
                    ("d", d), ("lambda", lam)):
        if not v > 0:
            raise PreconditionError(f"{name} must be > 0, got {v}")
    traj = MirrorTrajectory.accelerating(kappa)
    P = saddle_prefactor(DetectorPairConfig(omega, sigma, lam, 0.0, 1.0, d))
    shift = 2j * omega * sigma ** 2
    local = P * wightman_d1(traj, -shift, 0.0, Regime.LATE)
    eAB = P * wightman_d1(traj, d - shift, 0.0, Regime.LATE)
    x = -P * wightman_d1(traj, d, 0.0, Regime.LATE)
    warning = None
    if kappa * omega * sigma ** 2 >= math.pi:
        warning = (f"kappa*Omega*sigma^2 = {kappa * omega * sigma ** 2:.6g} >= pi: "
                   "saddle-point approximation unreliable")
    comps = TwoQubitComponents.from_parts(local.real, local.real, eAB, x,
                                          Method.LATE_TIME, warning)
    report = coherences(comps)

    r_local, r_cross = _closed_ratios(omega, sigma, kappa, d)
    expected = {
        "ntilde": r_local ** 4 - 1.0,
        "g1": -(r_cross ** 2),
        "g2": 1.0 + abs(r_cross) ** 4 + r_local ** 4,
    }
    got = {"ntilde": report.ntilde, "g1": report.g1, "g2": report.g2}
    for key, want in expected.items():
        have = got[key]
        if abs(have - want) > CLOSED_FORM_RTOL * max(abs(want), 1.0):
            raise ConsistencyError(f"closed-form {key} mismatch: {have} vs {want}")
    return comps, report
