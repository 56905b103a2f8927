# %% [markdown]
# # How much error can a moving eye tolerate?
#
# The travelling-wave CSF gives sensitivity as a function of spatial
# frequency and retinal velocity.  Dividing the peak sensitivity by the
# sensitivity at a band's frequency gives that band's threshold elevation.

# %%
import numpy as np

from alephmap.aleph import compensate_velocity, csf_peak, csf_value, elevation_factor
from alephmap.pyramid import BAND_FREQUENCIES

# %% The peak slides to lower frequencies as the retina moves faster.
print(f"{'v_R deg/s':>10} {'rho_peak cpd':>13} {'csf_max':>9}")
for v in (0.15, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0, 80.0):
    rho, cmax = csf_peak(v)
    print(f"{v:>10.2f} {rho:>13.3f} {cmax:>9.1f}")

# %% A coarse spectrum at the drift velocity: flat past ~4.8 cpd it falls off fast.
rho = np.array([0.25, 0.5, 1, 2, 4, 8, 16, 32])
print("\nCSF at 0.15 deg/s:", np.round(csf_value(rho, 0.15), 2))

# %% Per-band elevation factors: rows are image-plane speeds, columns the seven bands.
print("\nelevation f_i, saliency 0 (untracked)")
print(f"{'v_I':>6} " + " ".join(f"{r:>7g}" for r in BAND_FREQUENCIES))
for v_img in (0.0, 1.0, 5.0, 10.0, 30.0):
    v_r = compensate_velocity(v_img, 0.0)
    f = [elevation_factor(r, v_r) for r in BAND_FREQUENCIES]
    print(f"{v_img:>6g} " + " ".join(f"{x:>7.2f}" for x in f))

# %% Attention cancels the gain: a fully tracked object gets static sensitivity back.
for s in (0.0, 0.5, 1.0):
    print(f"S={s:.1f}: v_R at 10 deg/s = {compensate_velocity(10.0, s):.3f}")
