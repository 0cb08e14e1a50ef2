# %% [markdown]
# # Detection does not care about the envelope
#
# A point target at known delay, white complex noise, matched filter,
# square-law detector. Pd depends only on the echo energy, so every
# unit-power waveform should give the same curve no matter how peaky it is.

# %%
import numpy as np

from ofdmtr import pmepr
from ofdmtr.harness import preset, run_detection_experiment

cfg = preset("detect", pfa=1e-3, detect_trials=20_000)
res = run_detection_experiment(cfg, ambiguity=False)

names = list(res.pd)
print("PMEPR: " + ", ".join(f"{k} {pmepr(w):.2f}" for k, w in res.waveforms.items()))
print("\n SNR dB  analytic  " + "  ".join(f"{n:>8s}" for n in names))
for i, snr in enumerate(cfg.snr_grid_db):
    row = "  ".join(f"{res.pd[n].pd_mc[i]:8.4f}" for n in names)
    print(f" {snr:6.1f}  {res.pd[names[0]].pd_analytic[i]:8.4f}  {row}")

# %%
sigma = res.pd[names[0]].std_error
spread = np.max([res.pd[n].pd_mc for n in names], axis=0) - np.min([res.pd[n].pd_mc for n in names], axis=0)
with np.errstate(divide="ignore", invalid="ignore"):
    z = np.where(sigma > 0, spread / (np.sqrt(2) * sigma), 0.0)
print(f"\nlargest spread between waveforms: {z.max():.2f} standard errors")
