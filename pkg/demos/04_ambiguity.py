# %% [markdown]
# # Ambiguity surfaces
#
# Ten bits per carrier. Carriers 2 and 3 carry a Chu sequence and its
# conjugate; the remaining four are reserved. We compare the three designs
# against filling the reserved tones with random phases.

# %%
import numpy as np

from ofdmtr import SymbolMatrix, WaveformParams, ambiguity_function, pmepr, synthesize
from ofdmtr.harness import preset
from ofdmtr.harness.experiments import build_detection_waveforms

cfg = preset("detect")
waves = build_detection_waveforms(cfg)

for name, w in waves.items():
    grid = ambiguity_function(w, n_delays=301, n_dopplers=121)
    side = grid.peak_sidelobe(guard_delay=cfg.oversampling, guard_doppler=1.0)
    zero_doppler = grid.magnitudes[:, np.argmin(np.abs(grid.dopplers))]
    print(
        f"{name:8s} PMEPR {pmepr(w):.3f}  "
        f"peak sidelobe {20 * np.log10(side):6.1f} dB  "
        f"mean zero-Doppler cut {zero_doppler.mean():.3f}"
    )

# %% [markdown]
# Integrated over one full period of Doppler and every lag, the squared
# surface always has unit volume once the grid spacing is accounted for.
# Using an odd-length pulse keeps the integer Doppler grid symmetric.

# %%
p = WaveformParams(5, 3, 3)
rng = np.random.default_rng(0)
x = synthesize(p, SymbolMatrix(rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))))
L = p.n_samples
full = ambiguity_function(x, n_dopplers=L, max_doppler=(L - 1) / 2)
print(f"L = {L}, volume = {np.sum(full.magnitudes**2) / L:.12f}")

# %%
grid = ambiguity_function(waves["tr-cve"], n_delays=201, n_dopplers=201)
grid.to_binary("af-tr-cve.bin")
grid.to_csv("af-tr-cve.csv")
