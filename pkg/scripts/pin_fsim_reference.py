"""Compute the reference FSIM value of the fixture pair with piq.

piq's ``fsim`` is a line-by-line port of the reference MATLAB FSIM
code. Run once; the printed value is frozen into the test suite. piq is
not a runtime dependency.
"""
import sys

import numpy as np
import piq
import torch
from PIL import Image

root = sys.argv[1] if len(sys.argv) > 1 else "tests/data"
ref = np.asarray(Image.open(f"{root}/fsim_ref.png"), dtype=np.float64)
dist = np.asarray(Image.open(f"{root}/fsim_dist.png"), dtype=np.float64)
x = torch.from_numpy(dist)[None, None]
y = torch.from_numpy(ref)[None, None]
print(f"{float(piq.fsim(x, y, data_range=255.0, chromatic=False)):.10f}")
