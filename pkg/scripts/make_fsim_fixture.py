"""Write the 128x128 FSIM fixture pair used by the test suite."""
import sys
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage
from skimage import data

out = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
out.mkdir(parents=True, exist_ok=True)

cam = data.camera().astype(np.float64)
ref = cam.reshape(128, 4, 128, 4).mean(axis=(1, 3))
rng = np.random.default_rng(0)
dist = ndimage.gaussian_filter(ref, 1.2) + rng.normal(0.0, 5.0, ref.shape)

for name, arr in (("fsim_ref.png", ref), ("fsim_dist.png", dist)):
    Image.fromarray(np.clip(np.rint(arr), 0, 255).astype(np.uint8)).save(out / name)
