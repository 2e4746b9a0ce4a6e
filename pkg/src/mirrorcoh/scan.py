"""
Parameter scans: Omega sweeps and (t0, x_A) planes.

Every grid point is independent. Points are evaluated row by row (axis1-major)
and, when ``workers > 1``, rows are split into contiguous blocks handed to a
process pool. Each point is computed by exactly the same code whatever the
partition, so the output is bit-identical for any worker count.

Per-point failures (singular Wightman term, non-convergent quadrature,
positivity violation, ...) become NaN entries and are counted in
``metadata["missing"]`` instead of aborting the scan.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .detector_state import (
    DetectorPairConfig,
    Method,
    QuadratureSettings,
    quadrature_components,
    saddle_components,
)
from .errors import MirrorCohError, UsageError
from .observables import closed_form_late_time, coherences
from .trajectory import mirror_worldline

log = logging.getLogger(__name__)

FIELD_NAMES = ("eAeB", "ntilde", "g1_abs", "g2", "noise", "first_order", "quantum")
AXIS_NAMES = ("t0", "omega", "xA")
KAPPA_SIGMA_INTERPRETATION = "kappa*sigma"


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    points: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise UsageError(f"unknown axis {self.name!r}; expected one of {AXIS_NAMES}")
        if not (math.isfinite(self.min) and math.isfinite(self.max) and self.min < self.max):
            raise UsageError(f"axis {self.name}: need finite min < max, got {self.min}, {self.max}")
        if int(self.points) != self.points or self.points < 2:
            raise UsageError(f"axis {self.name}: points must be an integer >= 2")
        object.__setattr__(self, "points", int(self.points))

    @property
    def values(self):
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class GridSpec:
    axis1: Axis
    axis2: Optional[Axis] = None

    def __post_init__(self):
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise UsageError("axis names must be distinct")

    @property
    def shape(self):
        if self.axis2 is None:
            return (self.axis1.points,)
        return (self.axis1.points, self.axis2.points)

    @property
    def ndim(self):
        return 1 if self.axis2 is None else 2


@dataclass
class FieldMap:
    """Named real arrays over a grid, plus provenance metadata.

    ``metadata["worldline"]`` (planes only) is an (n, 2) array of (t, x_m(t)).
    """

    grid: GridSpec
    fields: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, arr in self.fields.items():
            if np.shape(arr) != self.grid.shape:
                raise UsageError(
                    f"field {name} has shape {np.shape(arr)}, grid is {self.grid.shape}")

    @property
    def worldline(self):
        return self.metadata.get("worldline")


# ---------------------------------------------------------------------------
# per-point evaluation
# ---------------------------------------------------------------------------

def _components(cfg, traj, method, q):
    if method is Method.SADDLE:
        return saddle_components(cfg, traj)
    if method is Method.QUADRATURE:
        return quadrature_components(cfg, traj, q)
    if traj.is_static:
        raise UsageError("late_time method needs an accelerating mirror")
    comps, _ = closed_form_late_time(cfg.omega, cfg.sigma, traj.kappa, cfg.d, cfg.lam)
    return comps


def point_fields(cfg, traj, method, q=None):
    """Fields at one point as a tuple ordered like FIELD_NAMES, plus a warning flag."""
    method = Method(method)
    c = _components(cfg, traj, method, q)
    rep = coherences(c)
    noise = c.eA * c.eB
    vals = (noise, rep.ntilde, abs(rep.g1), rep.g2,
            noise, abs(c.eAB) ** 2, abs(c.x) ** 2)
    return vals, c.validity_warning is not None


def _eval_block(args):
    cfgs, traj, method, q = args
    out = []
    for cfg in cfgs:
        try:
            vals, warned = point_fields(cfg, traj, method, q)
            out.append((vals, warned, None))
        except MirrorCohError as exc:
            out.append((None, False, f"{type(exc).__name__}: {exc}"))
    return out


def _split(items, parts):
    n = len(items)
    bounds = [round(i * n / parts) for i in range(parts + 1)]
    return [items[a:b] for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _evaluate(rows, traj, method, q, workers):
    """rows: list of lists of DetectorPairConfig; returns per-point results."""
    if workers <= 1 or len(rows) <= 1:
        return [_eval_block((row, traj, method, q)) for row in rows]
    blocks = _split(rows, min(workers, len(rows)))
    flat_blocks = [[cfg for row in blk for cfg in row] for blk in blocks]
    with ProcessPoolExecutor(max_workers=len(blocks)) as ex:
        results = list(ex.map(_eval_block, [(b, traj, method, q) for b in flat_blocks]))
    # undo the block flattening
    out = []
    for blk, res in zip(blocks, results):
        pos = 0
        for row in blk:
            out.append(res[pos:pos + len(row)])
            pos += len(row)
    return out


def _assemble(grid, results):
    arrays = {name: np.full(grid.shape, np.nan) for name in FIELD_NAMES}
    missing = 0
    warnings = 0
    first_error = None
    for i, row in enumerate(results):
        for j, (vals, warned, err) in enumerate(row):
            idx = (i,) if grid.ndim == 1 else (i, j)
            if vals is None:
                missing += 1
                first_error = first_error or err
                continue
            warnings += int(warned)
            for name, v in zip(FIELD_NAMES, vals):
                arrays[name][idx] = v
    if missing:
        log.warning("%d grid point(s) missing; first error: %s", missing, first_error)
    return arrays, missing, warnings


def _metadata(cfg, traj, method, q, missing, warnings):
    md = {
        "trajectory": traj.kind.value,
        "kappa": traj.kappa,
        "omega": cfg.omega,
        "sigma": cfg.sigma,
        "lambda": cfg.lam,
        "t0": cfg.t0,
        "xA": cfg.xA,
        "d": cfg.d,
        "method": method.value,
    }
    if method is Method.QUADRATURE:
        md.update(epsilon=q.eps.epsilon, nodes=q.nodes, box=q.box,
                  contour=q.contour.value)
    md.update(warnings=warnings, missing=missing,
              kappa_sigma_interpretation=KAPPA_SIGMA_INTERPRETATION)
    return md


# ---------------------------------------------------------------------------
# public scans
# ---------------------------------------------------------------------------

def sweep_omega(cfg_template, grid, traj, method=Method.SADDLE, q=None, workers=1):
    """Evaluate all fields along an Omega axis.

    Parameters
    ----------
    cfg_template : DetectorPairConfig
        Supplies every parameter except omega.
    grid : GridSpec
        One-dimensional, with ``axis1.name == "omega"``.
    workers : int
        Process count; the result does not depend on it.
    """
    method = Method(method)
    if grid.ndim != 1 or grid.axis1.name != "omega":
        raise UsageError("sweep_omega needs a 1-D grid over omega")
    if grid.axis1.min <= 0:
        raise UsageError("omega grid must be > 0")
    q = q or QuadratureSettings()
    rows = [[cfg_template.replace(omega=float(om))] for om in grid.axis1.values]
    arrays, missing, warnings = _assemble(grid, _evaluate(rows, traj, method, q, workers))
    md = _metadata(cfg_template, traj, method, q, missing, warnings)
    md["axis1"] = "omega"
    return FieldMap(grid, arrays, md)


def scan_plane(cfg_template, grid, traj, method=Method.SADDLE, q=None, workers=1):
    """Evaluate all fields over a (t0, x_A) plane.

    ``fields[name][i, j]`` belongs to t0 = axis1.values[i], xA = axis2.values[j].
    The mirror worldline sampled at the t0 grid is stored in the metadata.
    """
    method = Method(method)
    if grid.ndim != 2 or grid.axis1.name != "t0" or grid.axis2.name != "xA":
        raise UsageError("scan_plane needs axis1 = t0 and axis2 = xA")
    if grid.axis2.min <= 0:
        raise UsageError("all xA grid values must be > 0 (observer side)")
    q = q or QuadratureSettings()
    xs = grid.axis2.values
    rows = [[cfg_template.replace(t0=float(t), xA=float(x)) for x in xs]
            for t in grid.axis1.values]
    arrays, missing, warnings = _assemble(grid, _evaluate(rows, traj, method, q, workers))
    md = _metadata(cfg_template, traj, method, q, missing, warnings)
    md["axis1"] = "t0"
    md["axis2"] = "xA"
    md["worldline"] = mirror_worldline(traj, grid.axis1.values)
    return FieldMap(grid, arrays, md)


# ---------------------------------------------------------------------------
# analysis helpers
# ---------------------------------------------------------------------------

def noise_share(fmap):
    """Fraction of E_A E_B g2 carried by the noise term, i.e. 1/g2."""
    f = fmap.fields
    return f["noise"] / (f["noise"] + f["first_order"] + f["quantum"])


def local_minima(values):
    """Indices of strict interior local minima of a 1-D array (NaNs skipped)."""
    v = np.asarray(values, dtype=float)
    return [i for i in range(1, len(v) - 1)
            if np.isfinite(v[i - 1:i + 2]).all() and v[i] < v[i - 1] and v[i] < v[i + 1]]


def radiation_front(fmap, field_name="eAeB", threshold=None):
    """Largest x_A at which the field exceeds ``threshold``, per t0 slice.

    The default threshold is the log-midpoint between the median value on the
    earliest t0 slice (vacuum) and the plane maximum (inside the flux).
    Slices where nothing, or the outermost x_A, exceeds the threshold give NaN.
    """
    if fmap.grid.ndim != 2:
        raise UsageError("radiation_front needs a 2-D map")
    arr = fmap.fields[field_name]
    if threshold is None:
        vac = np.nanmedian(arr[0])
        threshold = math.sqrt(vac * np.nanmax(arr))
    xs = fmap.grid.axis2.values
    front = np.full(fmap.grid.axis1.points, np.nan)
    for i, row in enumerate(arr):
        above = np.nonzero(row > threshold)[0]
        if len(above) and above[-1] < len(row) - 1:
            front[i] = xs[above[-1]]
    return front, threshold
