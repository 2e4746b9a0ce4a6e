"""
mirrorcoh -- entanglement and second-order coherence of two Unruh-DeWitt
detectors in the field of an accelerating (analog Hawking) mirror.
"""

from .detector_state import (
    DetectorPairConfig,
    Method,
    QuadratureSettings,
    TwoQubitComponents,
    density_matrix,
    planck_excitation,
    quadrature_components,
    saddle_components,
)
from .errors import *  # noqa: F401,F403
from .observables import (
    BELL_G2_THRESHOLD,
    Band,
    CoherenceReport,
    bell_chsh_sufficient,
    bell_g2_predicate,
    classify_from_g2,
    closed_form_late_time,
    coherences,
    negativity,
    negativity_ratio,
)
from .scan import Axis, FieldMap, GridSpec, scan_plane, sweep_omega
from .trajectory import (
    MirrorTrajectory,
    energy_flux,
    hawking_temperature,
    mirror_position,
    ray_trace,
    ray_trace_deriv,
)
from .wightman import EpsilonPolicy, Regime, wightman_d1, wightman_full

__version__ = "0.1.0"
