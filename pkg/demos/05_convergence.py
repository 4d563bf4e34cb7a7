"""Fourth-order convergence of the truncated-box curl on the Gaussian vortex."""

import math

import numpy as np

from nsverify import Grid, gallery, sample
from nsverify.gridops import curl

field = gallery("gaussian-vortex-3d")
previous = None
for n in (16, 32, 64, 128):
    grid = Grid.truncated(6.0, n)
    err = curl(sample(field, grid)).data - np.asarray(field.vorticity(grid.mesh, 0.0))
    rms = math.sqrt(np.mean(err ** 2))
    rate = "" if previous is None else f"  rate {math.log2(previous / rms):.3f}"
    print(f"N={n:<4} rms error {rms:.3e}{rate}")
    previous = rms
