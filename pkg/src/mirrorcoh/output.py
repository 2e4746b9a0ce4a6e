"""
CSV and PPM serialization of FieldMaps.

CSV layout: ``# key=value`` metadata lines, then a header row, then one row
per grid point in axis1-major order. Numbers use 12 significant digits;
missing values are empty fields.
"""

import math

import numpy as np

from .errors import UsageError
from .scan import FIELD_NAMES, Axis, FieldMap, GridSpec

DIGITS = 12
WORLDLINE_RGB = (0, 255, 0)
MISSING_RGB = (0, 0, 0)
PPM_MAXVAL = 255


def fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return format(float(value), f".{DIGITS}g")


def _meta_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _grid_metadata(grid):
    md = {}
    for tag, ax in (("axis1", grid.axis1), ("axis2", grid.axis2)):
        if ax is None:
            continue
        md.update({tag: ax.name, f"{tag}_min": ax.min, f"{tag}_max": ax.max,
                   f"{tag}_points": ax.points})
    return md


def csv_lines(fmap):
    """The CSV document as a list of lines (without newlines)."""
    grid_md = _grid_metadata(fmap.grid)
    worldline = fmap.metadata.get("worldline")
    # grid keys always come last, in a fixed order, so a re-parsed map re-serializes identically
    md = {k: v for k, v in fmap.metadata.items()
          if k != "worldline" and k not in ("axis1", "axis2")}
    md.update(grid_md)
    lines = [f"# {k}={_meta_value(v)}" for k, v in md.items()]
    if worldline is not None:
        pts = ";".join(f"{fmt(t)}:{fmt(x)}" for t, x in worldline)
        lines.append(f"# worldline={pts}")
    two_d = fmap.grid.ndim == 2
    header = ["axis1"] + (["axis2"] if two_d else []) + list(FIELD_NAMES)
    lines.append(",".join(header))
    a1 = fmap.grid.axis1.values
    if two_d:
        a2 = fmap.grid.axis2.values
        for i, t in enumerate(a1):
            for j, x in enumerate(a2):
                vals = [fmap.fields[n][i, j] for n in FIELD_NAMES]
                lines.append(",".join([fmt(t), fmt(x)] + [fmt(v) for v in vals]))
    else:
        for i, t in enumerate(a1):
            vals = [fmap.fields[n][i] for n in FIELD_NAMES]
            lines.append(",".join([fmt(t)] + [fmt(v) for v in vals]))
    return lines


def write_csv(fmap, path):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(csv_lines(fmap)) + "\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write CSV: {exc.strerror}", str(path)) from exc


def _parse_meta(val):
    for conv in (int, float):
        try:
            return conv(val)
        except ValueError:
            pass
    if val in ("true", "false"):
        return val == "true"
    return val


def read_csv(path):
    """Parse a CSV written by ``write_csv`` back into a FieldMap."""
    md = {}
    rows = []
    header = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, val = line[2:].partition("=")
                md[key] = val if key == "worldline" else _parse_meta(val)
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append(line.split(","))
    if header is None:
        raise UsageError(f"{path}: no header row")
    ax1 = Axis(md.pop("axis1"), md.pop("axis1_min"), md.pop("axis1_max"),
               md.pop("axis1_points"))
    ax2 = None
    if "axis2" in md:
        ax2 = Axis(md.pop("axis2"), md.pop("axis2_min"), md.pop("axis2_max"),
                   md.pop("axis2_points"))
    grid = GridSpec(ax1, ax2)
    if "worldline" in md:
        pairs = [p.split(":") for p in md["worldline"].split(";") if p]
        md["worldline"] = np.array([[float(a), float(b)] for a, b in pairs])
    offset = 2 if ax2 is not None else 1
    fields = {}
    for k, name in enumerate(header[offset:]):
        col = np.array([float(r[offset + k]) if r[offset + k] else np.nan for r in rows])
        fields[name] = col.reshape(grid.shape)
    # the axis columns are implied by the grid; check them rather than store them
    if grid.ndim == 2:
        expect = [(fmt(a), fmt(b)) for a in ax1.values for b in ax2.values]
    else:
        expect = [(fmt(a),) for a in ax1.values]
    if [tuple(r[:offset]) for r in rows] != expect:
        raise UsageError(f"{path}: axis columns do not match the declared grid")
    return FieldMap(grid, fields, md)


def _colour(t):
    # blue (low) -> red (high); green is reserved for the worldline
    r = int(round(PPM_MAXVAL * t))
    return (r, 0, PPM_MAXVAL - r)


def heatmap_pixels(fmap, field_name):
    """RGB array of shape (height, width, 3) and the (min, max) used.

    Width follows axis1 (t0), height follows axis2 (xA) with the largest x_A
    in the top row.
    """
    if fmap.grid.ndim != 2:
        raise UsageError("heatmap needs a 2-D FieldMap")
    if field_name not in fmap.fields:
        raise UsageError(f"unknown field {field_name!r}; available: {', '.join(fmap.fields)}")
    arr = np.asarray(fmap.fields[field_name], dtype=float)
    finite = np.isfinite(arr)
    lo = float(np.min(arr[finite])) if finite.any() else float("nan")
    hi = float(np.max(arr[finite])) if finite.any() else float("nan")
    width, height = fmap.grid.axis1.points, fmap.grid.axis2.points
    img = np.zeros((height, width, 3), dtype=int)
    span = hi - lo
    for i in range(width):
        for j in range(height):
            v = arr[i, j]
            row = height - 1 - j
            if not np.isfinite(v):
                img[row, i] = MISSING_RGB
                continue
            t = (v - lo) / span if span > 0 else 0.0
            img[row, i] = _colour(t)
    wl = fmap.worldline
    if wl is not None:
        xs = fmap.grid.axis2.values
        half = 0.5 * (xs[1] - xs[0])
        for i, (_, xm) in enumerate(wl[:width]):
            j = int(np.argmin(np.abs(xs - xm)))
            if abs(xs[j] - xm) <= half:
                img[height - 1 - j, i] = WORLDLINE_RGB
    return img, (lo, hi)


def write_heatmap(fmap, field_name, path):
    """Plain-text P3 PPM, one pixel per grid cell."""
    img, (lo, hi) = heatmap_pixels(fmap, field_name)
    height, width, _ = img.shape
    lines = ["P3", f"# field={field_name} min={fmt(lo)} max={fmt(hi)}",
             f"{width} {height}", str(PPM_MAXVAL)]
    for row in img:
        lines.append(" ".join(f"{r} {g} {b}" for r, g, b in row))
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write PPM: {exc.strerror}", str(path)) from exc


def read_ppm(path):
    """Parse a P3 file into (comments, (width, height), pixels[h, w, 3])."""
    comments = []
    tokens = []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            else:
                tokens.extend(line.split())
    if tokens[0] != "P3":
        raise UsageError(f"{path}: not a P3 image")
    w, h, _maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    px = np.array([int(t) for t in tokens[4:]]).reshape(h, w, 3)
    return comments, (w, h), px
