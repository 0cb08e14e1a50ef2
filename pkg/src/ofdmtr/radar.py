"""Radar-side evaluation: Chu codes, ambiguity surfaces, matched-filter detection."""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DimensionError, UndefinedMetricError
from .model import BasebandSignal

__all__ = [
    "chu_code",
    "AmbiguityGrid",
    "ambiguity_function",
    "matched_filter",
    "DetectionConfig",
    "PdCurve",
    "detection_threshold",
    "detection_probability",
    "analytic_pd",
]


def chu_code(M: int, gamma: int = 1) -> np.ndarray:
    """Quadratic-phase code ``exp(j*gamma*pi*m^2/M)``, ``m = 0..M-1``.

    ``gamma = -1`` gives the complex conjugate of the ``gamma = +1`` code.
    """
    if int(M) != M or M < 1:
        raise ValueError("M must be a positive integer")
    if gamma not in (1, -1):
        raise ValueError("gamma must be +1 or -1")
    m = np.arange(M)
    # m^2 mod 2M keeps the phase argument small for long codes.
    return np.exp(1j * gamma * np.pi * ((m * m) % (2 * M)) / M)


@dataclass(frozen=True)
class AmbiguityGrid:
    """Normalized ambiguity magnitudes on a delay/Doppler grid.

    Rows follow ``delays`` (integer sample lags), columns follow
    ``dopplers`` (cycles per pulse).
    """

    delays: np.ndarray
    dopplers: np.ndarray
    magnitudes: np.ndarray

    def at(self, delay, doppler) -> float:
        i = int(np.flatnonzero(self.delays == delay)[0])
        j = int(np.argmin(np.abs(self.dopplers - doppler)))
        return float(self.magnitudes[i, j])

    def peak_sidelobe(self, guard_delay=0, guard_doppler=0.0) -> float:
        """Largest magnitude outside the mainlobe box ``|tau| <= guard_delay, |nu| <= guard_doppler``."""
        inside = (np.abs(self.delays)[:, None] <= guard_delay) & (
            np.abs(self.dopplers)[None, :] <= guard_doppler
        )
        return float(np.max(np.where(inside, 0.0, self.magnitudes)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("# delay: samples; doppler: cycles per pulse; magnitude: |chi|/|chi(0,0)|\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["delay", "doppler", "magnitude"])
            for i, tau in enumerate(self.delays):
                for j, nu in enumerate(self.dopplers):
                    w.writerow([int(tau), repr(float(nu)), repr(float(self.magnitudes[i, j]))])

    def to_binary(self, path) -> None:
        """Little-endian ``uint32`` rows, ``uint32`` cols, then row-major ``float64`` magnitudes."""
        rows, cols = self.magnitudes.shape
        with open(path, "wb") as fh:
            fh.write(struct.pack("<II", rows, cols))
            fh.write(np.ascontiguousarray(self.magnitudes, dtype="<f8").tobytes())

    @staticmethod
    def read_binary(path) -> np.ndarray:
        with open(path, "rb") as fh:
            rows, cols = struct.unpack("<II", fh.read(8))
            data = np.frombuffer(fh.read(), dtype="<f8")
        return data.reshape(rows, cols)


def ambiguity_function(
    signal: BasebandSignal,
    n_delays: int = None,
    n_dopplers: int = 201,
    max_delay: int = None,
    max_doppler: float = None,
) -> AmbiguityGrid:
    """Discrete ambiguity function ``sum_l x_l conj(x_{l+tau}) exp(j 2 pi nu l / L)``.

    Samples outside the pulse are zero.  The default grid spans every lag
    within one pulse width and Dopplers up to ``N*M`` cycles per pulse
    (the full baseband bandwidth), both symmetric about zero.
    """
    x = signal.samples
    L = x.size
    energy = float(np.vdot(x, x).real)
    if energy == 0:
        raise UndefinedMetricError("ambiguity function undefined for an all-zero signal")
    if max_delay is None:
        max_delay = L - 1
    if n_delays is None:
        n_delays = 2 * int(max_delay) + 1
    if max_doppler is None:
        max_doppler = float(signal.params.n_codes)
    delays = np.unique(np.round(np.linspace(-max_delay, max_delay, n_delays)).astype(int))
    dopplers = np.linspace(-max_doppler, max_doppler, n_dopplers)

    padded = np.concatenate([np.zeros(L, complex), x, np.zeros(L, complex)])
    lag_idx = np.arange(L)[None, :] + delays[:, None] + L
    lag_idx = np.clip(lag_idx, 0, 3 * L - 1)
    products = x[None, :] * np.conj(padded[lag_idx])
    phase = np.exp(2j * np.pi * np.outer(np.arange(L), dopplers) / L)
    chi = products @ phase
    return AmbiguityGrid(delays, dopplers, np.abs(chi) / energy)


def matched_filter(echo, template: BasebandSignal) -> complex:
    """Correlate ``echo`` with the unit-energy template: ``<echo, x> / ||x||``."""
    x = template.samples if isinstance(template, BasebandSignal) else np.asarray(template)
    echo = np.asarray(echo)
    if echo.shape[-1] != x.size:
        raise DimensionError(f"echo length {echo.shape[-1]} != template length {x.size}")
    norm = np.sqrt(np.vdot(x, x).real)
    if norm == 0:
        raise UndefinedMetricError("matched filter template is all zero")
    out = echo @ np.conj(x) / norm
    return complex(out) if np.ndim(out) == 0 else out


def _default_snr_grid():
    return tuple(np.arange(-32.0, -15.9, 2.0))


@dataclass(frozen=True)
class DetectionConfig:
    """Detection scenario; SNR is the per-sample echo-to-noise power ratio."""

    noise_power: float = 1.0
    pfa: float = 1e-5
    snr_grid_db: tuple = field(default_factory=_default_snr_grid)
    n_trials: int = 100_000

    def __post_init__(self):
        if not 0 < self.pfa < 1:
            raise ValueError("pfa must lie in (0, 1)")
        if not self.noise_power > 0:
            raise ValueError("noise_power must be positive")
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ValueError("n_trials must be a positive integer")
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))


def detection_threshold(config: DetectionConfig) -> float:
    """Threshold on ``|matched_filter|^2`` giving the requested false-alarm rate.

    Under noise alone the statistic is exponential with mean ``sigma^2``.
    """
    return config.noise_power * np.log(1.0 / config.pfa)


@dataclass(frozen=True)
class PdCurve:
    snr_db: np.ndarray
    pd_mc: np.ndarray
    pd_analytic: np.ndarray
    n_trials: int

    @property
    def std_error(self) -> np.ndarray:
        """Binomial standard error of ``pd_mc`` evaluated at the analytic Pd."""
        p = self.pd_analytic
        return np.sqrt(p * (1 - p) / self.n_trials)

    def to_dict(self) -> dict:
        return {
            "snr_db": [float(v) for v in self.snr_db],
            "pd_mc": [float(v) for v in self.pd_mc],
            "pd_analytic": [float(v) for v in self.pd_analytic],
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["snr_db", "pd_mc", "pd_analytic"])
            for row in zip(self.snr_db, self.pd_mc, self.pd_analytic):
                w.writerow([repr(float(v)) for v in row])


def analytic_pd(energy: float, snr_db, config: DetectionConfig) -> np.ndarray:
    """Pd for a nonfluctuating target: Marcum-Q via the noncentral chi-square tail.

    ``2|z|^2/sigma^2`` has two degrees of freedom and noncentrality
    ``2*snr*energy`` when the template has total energy ``energy``.
    """
    snr = 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    t = detection_threshold(config)
    nc = 2.0 * snr * energy
    x = 2.0 * t / config.noise_power
    central = stats.chi2.sf(x, 2)
    return np.where(nc > 0, stats.ncx2.sf(x, 2, np.where(nc > 0, nc, 1.0)), central)


def detection_probability(
    waveform: BasebandSignal, config: DetectionConfig, rng: np.random.Generator, chunk: int = 4096
) -> PdCurve:
    """Monte-Carlo Pd of a known-delay point target, with the analytic value alongside.

    Every trial draws a full complex white-noise vector and passes it through
    :func:`matched_filter`.  The same noise trials are reused at every SNR so
    one pass over the noise serves the whole grid.
    """
    x = waveform.samples
    L = x.size
    power = float(np.vdot(x, x).real) / L
    if abs(power - 1.0) > 1e-9:
        raise ValueError(f"waveform must have unit average power, got {power!r}")
    sigma = np.sqrt(config.noise_power / 2.0)
    t = detection_threshold(config)
    snr = 10.0 ** (np.asarray(config.snr_grid_db) / 10.0)
    # Target amplitude scales the unit-power template to the requested SNR.
    signal_out = np.sqrt(snr * config.noise_power) * np.sqrt(L)

    hits = np.zeros(snr.size, dtype=np.int64)
    done = 0
    while done < config.n_trials:
        n = min(chunk, config.n_trials - done)
        noise = sigma * (rng.standard_normal((n, L)) + 1j * rng.standard_normal((n, L)))
        z_noise = matched_filter(noise, waveform)
        z = signal_out[None, :] + z_noise[:, None]
        hits += np.count_nonzero(np.abs(z) ** 2 > t, axis=0)
        done += n
    pd_mc = hits / config.n_trials
    pd_an = analytic_pd(L * power, config.snr_grid_db, config)
    return PdCurve(np.asarray(config.snr_grid_db), pd_mc, pd_an, config.n_trials)
