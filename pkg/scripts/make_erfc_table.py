"""Regenerate tests/data/erfc_oracle.json with 40-digit erfc values from mpmath.

The table is committed; rerun only if the sample points change.
"""
import json
from pathlib import Path

import mpmath
import numpy as np

mpmath.mp.dps = 40

points = np.linspace(-6.0, 6.0, 50)
rows = [{"z": float(z), "erfc": mpmath.nstr(mpmath.erfc(mpmath.mpf(float(z))), 30)} for z in points]
out = Path(__file__).resolve().parent.parent / "tests" / "data" / "erfc_oracle.json"
out.write_text(json.dumps({"dps": 40, "points": rows}, indent=1) + "\n")
print(f"wrote {len(rows)} points to {out}")
