# -*- coding: utf-8 -*-
from __future__ import annotations

import json
import math
import sys
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from .model import Solution


def _clean(obj: Any) -> Any:
    # numpy scalars to Python, non-finite floats to null
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def to_json(obj: Any) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def solutions_frame(sols: Sequence[Solution]) -> pd.DataFrame:
    rows = []
    for k, s in enumerate(sols):
        row = {"index": k}
        row.update({f"u[{v}]": float(x) for v, x in zip(s.u.graph.vertices, s.values)})
        row.update({
            "residual_linf": s.residual_linf,
            "jac_det_sign": s.jac_det_sign,
            "stability": s.stability.value,
            "min_eigenvalue": s.min_eigenvalue,
        })
        rows.append(row)
    return pd.DataFrame(rows)


def frame_to_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, float_format="%.17g", na_rep="", lineterminator="\n")


def emit(text: str, output: Optional[str] = None) -> None:
    """Write ``text`` to ``output`` or stdout."""
    if output in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(output, "w", encoding="utf-8", newline="") as f:
        f.write(text)
