"""Serialization of discs and filling results (JSON + CSV, 17 significant digits).

The JSON writer formats every float with '%.17g' so output is deterministic
and round-trips exactly; the standard library encoder uses shortest
round-trip repr, which is why a small recursive formatter is used instead.
"""

from __future__ import annotations

import json

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt_float(x):
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"non-finite value {x} in serialized output")
    return FLOAT_FMT % x


def dumps(obj, indent=0):
    """JSON text with all floats printed to 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}"
            for k, v in obj.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(np.asarray(obj).tolist()) if isinstance(obj, np.ndarray) \
            else list(obj)
        if not seq:
            return "[]"
        items = ",\n".join(f"{inner}{dumps(v, indent + 1)}" for v in seq)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps({"re": float(obj.real), "im": float(obj.imag)}, indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj) + "\n")


def write_csv(path, header, rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_float(x) for x in row) + "\n")


def disc_to_dict(disc):
    """JSON-ready dict of a Bishop disc (Taylor data + diagnostics)."""
    c1, c2 = disc.h_coeffs
    return {
        "t": float(disc.t),
        "h_coeffs": {
            "z1": {"re": np.real(c1), "im": np.imag(c1)},
            "z2": {"re": np.real(c2), "im": np.imag(c2)},
        },
        "diagnostics": {k: (int(v) if isinstance(v, (int, np.integer)) else float(v))
                        for k, v in disc.diagnostics.items()},
    }


def family_to_dict(result, scenario_name, resolution, extra=None):
    d = {
        "scenario": scenario_name,
        "resolution": {"n_theta": int(resolution[0]),
                       "n_rho": int(resolution[1])},
        "junction_t": (float(result.junction_t)
                       if np.isfinite(result.junction_t) else None),
        "glue_distance": float(result.glue_distance),
        "n_discs": len(result.discs),
        "t_values": np.asarray(result.t_values, dtype=float),
        "discs": [disc_to_dict(d) for d in result.discs],
    }
    if extra:
        d.update(extra)
    return d


def write_family(path, result, scenario_name, resolution, extra=None):
    write_json(path, family_to_dict(result, scenario_name, resolution, extra))


def write_cloud(path, result):
    """Full point cloud: columns (t, rho, theta, x1, y1, x2, y2)."""
    write_csv(path, ["t", "rho", "theta", "x1", "y1", "x2", "y2"],
              result.cloud())


def write_boundary_cloud(path, result):
    write_csv(path, ["t", "rho", "theta", "x1", "y1", "x2", "y2"],
              result.boundary_cloud())


def write_leaf(path, leaf):
    rows = np.column_stack([leaf.t, leaf.u, leaf.v, leaf.points])
    write_csv(path, ["t", "u", "v", "x1", "y1", "x2", "y2"], rows)
