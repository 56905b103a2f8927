# %% [markdown]
# # The elevation map for a rendered animation
#
# A cheap direct-light estimate of the box scene is enough to find where the
# image is busy, what moves, and what draws the eye.  Those combine into a
# per-pixel contrast elevation: 1 where every error shows, up to 250 where
# almost none does.

# %%
import sys
from pathlib import Path

import numpy as np

from alephmap.aleph import Compensation, compute_aleph
from alephmap.harness import fixtures
from alephmap.imgio import save_map, save_ppm
from alephmap.pipeline import aleph_for_scene, estimate_frames

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)
size = 128

box = fixtures.box_scene()
est = estimate_frames(box, [0], size, size, spp=16)[0]
save_ppm(out / "estimate.ppm", est.data)

# %% Model motion comes straight from the scene description.
res = aleph_for_scene(box, 0, size, size, estimate=est)
print("max image speed (deg/s):", round(float(res.velocity.speed.max()), 2))

# %% Dominant band per pixel: 0 = 16 cpd (fine detail) ... 6 = 0.25 cpd (flat).
dominant = res.bands.R.argmax(axis=0)
print("pixels per dominant band:", np.bincount(dominant.ravel(), minlength=7))

# %% The three compensation modes.
for mode in Compensation:
    a = compute_aleph(res.bands, res.velocity.speed, res.saliency.S, mode).values
    print(f"{mode.value:>9}: mean {a.mean():6.2f}  max {a.max():6.1f}")
    save_map(out / f"aleph_{mode.value}", a)
save_map(out / "saliency_box", res.saliency.S)
print("wrote", out)
