"""key=value text rendering for report objects."""
import dataclasses
import math

import numpy as np


def _fmt(value):
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, dict):
        return ",".join(f"{k}:{_fmt(v)}" for k, v in value.items())
    return str(value)


def to_text(obj, skip=()) -> str:
    """One ``key=value`` line per field of a dataclass instance or mapping."""
    items = obj.items() if isinstance(obj, dict) else (
        (f.name, getattr(obj, f.name)) for f in dataclasses.fields(obj))
    return "".join(f"{k}={_fmt(v)}\n" for k, v in items if k not in skip)
