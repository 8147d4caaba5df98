"""
Pair coherent field: full recovery and a strictly nonnegative g2
----------------------------------------------------------------
A pair coherent state with charge q = 0 locks the two photon numbers
together (n1 = n2 exactly). Two consequences show up below:

  * the excited population recovers essentially all the way to 1 in each
    revival, and a stronger Kerr medium makes the recovery cleaner;
  * g2_12 can never go negative, because <n1 n2> >= <n1><n2> holds
    rigorously when n1 - n2 is fixed. What the Kerr medium attenuates is
    the dip of g2 below its initial value.

Revival detection here uses the collapse-time smoothing window
2 / (|gamma| sqrt(mean)), which merges the fractional revivals that
appear between the main peaks at finite chi.

Writes pair_coherent_recovery.png next to the script.
"""
import math
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tpjcm import (
    ModelParams,
    PairCoherent,
    detect_revivals,
    pair_xi_for_mean,
    series_observables,
)

MEAN = 10.0
field = PairCoherent(pair_xi_for_mean(MEAN), 0)
t = np.linspace(0.0, 25.0, 8001)
window = 2.0 / math.sqrt(MEAN)

fig, (ax_pop, ax_g2) = plt.subplots(2, 1, figsize=(9, 6), sharex=True)

for chi in (0.0, 0.5, 1.0):
    params = ModelParams.resonant(chi1=chi, chi2=chi)
    obs = series_observables(field, params, t)
    peaks = detect_revivals(t, obs["pop_e"], window=window, prominence=0.02)
    heights = [h for _, h in peaks]
    g2 = obs["g2_12"]
    ax_pop.plot(t, obs["pop_e"], lw=0.7, label=f"chi = {chi:g}")
    ax_g2.plot(t, g2, lw=0.7, label=f"chi = {chi:g}")
    print(f"chi = {chi:g}: {len(peaks)} revivals, min height {min(heights):.4f}, "
          f"min g2 = {g2.min():+.2e}, dip below g2(0) = {np.min(g2 - g2[0]):+.2e}")

ax_pop.set_ylabel("excited population")
ax_g2.axhline(0.0, color="k", lw=0.5)
ax_g2.set_ylabel("$g^{(2)}_{12}$ offset")
ax_g2.set_xlabel(r"$t$ in units of $1/|\gamma|$")
ax_g2.legend(loc="upper right", fontsize=8)

out = pathlib.Path(__file__).with_name("pair_coherent_recovery.png")
fig.tight_layout()
fig.savefig(out, dpi=150)
print(f"wrote {out}")
