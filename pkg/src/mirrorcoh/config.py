"""
Run configuration files.

Flat ``key = value`` text; several ``key=value`` tokens may share a line and
``#`` starts a comment. Recognised keys::

    kappa omega sigma lambda t0 xA d       physical parameters
    epsilon nodes box contour              quadrature (epsilon, box in sigma)
    trajectory method                      accelerating|static, saddle|quadrature|late_time

Defaults: epsilon = 0.01, nodes = 160, box = 6, contour = shifted,
trajectory = accelerating, method = saddle.
"""

import math
import re
from dataclasses import dataclass, field

from .detector_state import (
    Contour,
    DetectorPairConfig,
    Method,
    QuadratureSettings,
    saddle_valid,
)
from .errors import ConfigError, MirrorCohError
from .trajectory import MirrorTrajectory, TrajectoryKind
from .wightman import EpsilonPolicy

_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^\s=]+)")

REQUIRED = ("omega", "sigma", "lambda", "t0", "xA", "d")
DEFAULTS = {
    "epsilon": "0.01",
    "nodes": "160",
    "box": "6",
    "contour": "shifted",
    "trajectory": "accelerating",
    "method": "saddle",
}
NUMERIC = ("kappa", "omega", "sigma", "lambda", "t0", "xA", "d", "epsilon", "box")
KNOWN = set(NUMERIC) | {"nodes", "contour", "trajectory", "method"}

# key -> (predicate, description of the precondition)
_RULES = {
    "kappa": (lambda v: v > 0, "kappa > 0"),
    "omega": (lambda v: v > 0, "Omega > 0"),
    "sigma": (lambda v: v > 0, "sigma > 0"),
    "lambda": (lambda v: v > 0, "lambda > 0"),
    "xA": (lambda v: v > 0, "xA > 0 (observer side of the mirror)"),
    "d": (lambda v: v >= 0, "d >= 0"),
    "epsilon": (lambda v: v >= 0, "epsilon >= 0"),
    "box": (lambda v: v >= 4, "box >= 4 (units of sigma)"),
    "nodes": (lambda v: v >= 16, "nodes >= 16"),
}


@dataclass(frozen=True)
class RunConfig:
    trajectory: MirrorTrajectory
    detector: DetectorPairConfig
    quadrature: QuadratureSettings
    method: Method
    warnings: tuple = field(default=())


def _tokens(text):
    """Yield (key, raw value, line number) triples."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        pos = 0
        for m in _TOKEN.finditer(body):
            if body[pos:m.start()].strip():
                raise ConfigError(f"cannot parse {body[pos:m.start()].strip()!r}",
                                  line=lineno)
            pos = m.end()
            yield m.group(1), m.group(2), lineno
        if body[pos:].strip():
            raise ConfigError(f"cannot parse {body[pos:].strip()!r}", line=lineno)


def _number(key, raw, line):
    try:
        if key == "nodes":
            val = int(raw)
        else:
            val = float(raw)
    except ValueError:
        raise ConfigError(f"not a number: {raw!r}", key=key, line=line) from None
    if not math.isfinite(val):
        raise ConfigError(f"must be finite, got {raw!r}", key=key, line=line)
    rule = _RULES.get(key)
    if rule is not None and not rule[0](val):
        raise ConfigError(f"precondition {rule[1]} violated (got {raw})", key=key, line=line)
    return val


def _choice(key, raw, line, enum_cls):
    try:
        return enum_cls(raw)
    except ValueError:
        options = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"expected one of {options}, got {raw!r}",
                          key=key, line=line) from None


def parse_config(text):
    """Parse and validate configuration text into a RunConfig.

    Raises
    ------
    ConfigError
        On unknown or duplicate keys, unparsable values or violated
        preconditions; the message names the key and line.
    """
    raw = {}
    lines = {}
    for key, val, line in _tokens(text):
        if key not in KNOWN:
            raise ConfigError("unknown key", key=key, line=line)
        if key in raw:
            raise ConfigError(f"duplicate key (first on line {lines[key]})",
                              key=key, line=line)
        raw[key] = val
        lines[key] = line
    for key, val in DEFAULTS.items():
        raw.setdefault(key, val)

    kind = _choice("trajectory", raw["trajectory"], lines.get("trajectory"), TrajectoryKind)
    required = REQUIRED + (("kappa",) if kind is TrajectoryKind.ACCELERATING else ())
    for key in required:
        if key not in raw:
            raise ConfigError("missing required key", key=key)

    num = {}
    for key in NUMERIC + ("nodes",):
        if key in raw:
            num[key] = _number(key, raw[key], lines.get(key))
    method = _choice("method", raw["method"], lines.get("method"), Method)
    contour = _choice("contour", raw["contour"], lines.get("contour"), Contour)

    try:
        if kind is TrajectoryKind.ACCELERATING:
            traj = MirrorTrajectory.accelerating(num["kappa"])
        else:
            traj = MirrorTrajectory.static()
        det = DetectorPairConfig(num["omega"], num["sigma"], num["lambda"],
                                 num["t0"], num["xA"], num["d"])
        eps = EpsilonPolicy(num["epsilon"], extrapolate=num["epsilon"] > 0)
        quad = QuadratureSettings(num["nodes"], num["box"], eps, contour)
    except MirrorCohError as exc:
        raise ConfigError(str(exc)) from exc

    warnings = []
    if method is not Method.QUADRATURE and not saddle_valid(det, traj):
        val = traj.kappa * det.omega * det.sigma ** 2
        warnings.append(f"kappa*Omega*sigma^2 = {val:.6g} >= pi: "
                        "saddle-point approximation unreliable")
    return RunConfig(traj, det, quad, method, tuple(warnings))


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text)
