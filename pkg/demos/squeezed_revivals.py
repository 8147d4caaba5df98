"""
Two-mode squeezed vacuum: regular revivals and coherence recovery
-----------------------------------------------------------------
With the field in a two-mode squeezed vacuum (sinh^2 r = 10 photons per
mode) the photon numbers of the modes are perfectly correlated and the
Rabi spectrum is effectively one-dimensional. At chi = 1 the revivals
become strikingly regular; this script marks each detected revival and
checks the revival-spacing statistics.

It also samples g2_12 at every population peak: the field recovers its
initial intermode coherence (g2 = 1 + 1/mean = 1.1) whenever the atom
returns to the excited level.

Writes squeezed_revivals.png next to the script.
"""
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tpjcm import (
    ModelParams,
    SqueezedVacuum,
    detect_revivals,
    series_observables,
    squeezed_r_for_mean,
)

MEAN = 10.0
field = SqueezedVacuum(squeezed_r_for_mean(MEAN))
t = np.linspace(0.0, 25.0, 8001)

fig, axes = plt.subplots(3, 1, figsize=(9, 7), sharex=True)

for ax, chi in zip(axes, (0.0, 0.5, 1.0)):
    params = ModelParams.resonant(chi1=chi, chi2=chi)
    obs = series_observables(field, params, t)
    peaks = detect_revivals(t, obs["pop_e"], prominence=0.05)
    g2 = obs["g2_12"]
    recov = [abs(g2[int(np.argmin(np.abs(t - tp)))] - g2[0]) for tp, _ in peaks]

    ax.plot(t, obs["pop_e"], lw=0.7)
    for tp, h in peaks:
        ax.plot(tp, h, "rv", ms=4)
    ax.set_ylabel(f"chi = {chi:g}")

    if len(peaks) > 1:
        spacing = np.diff([p[0] for p in peaks])
        cv = np.std(spacing) / np.mean(spacing)
        print(f"chi = {chi:g}: {len(peaks)} revivals, mean spacing "
              f"{np.mean(spacing):.3f}, CV {cv:.3f}, "
              f"worst |g2(peak) - g2(0)| = {max(recov):.4f}")
    else:
        print(f"chi = {chi:g}: {len(peaks)} revivals")

axes[-1].set_xlabel(r"$t$ in units of $1/|\gamma|$")
fig.suptitle("excited population, detected revivals marked")

out = pathlib.Path(__file__).with_name("squeezed_revivals.png")
fig.tight_layout()
fig.savefig(out, dpi=150)
print(f"wrote {out}")
