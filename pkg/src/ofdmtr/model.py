"""OFDM code grid, sampled baseband signal and envelope metrics.

Samples are ordered bit-major: sample ``l = k + m*K`` with ``K = O_s*N``
belongs to bit ``m`` at offset ``k``.  Codes are ordered the same way when
flattened, ``a[m*N + n] = a_{n,m}``.  Internally every batched routine works
on arrays shaped ``(..., M, N)`` for codes and ``(..., M, K)`` for samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np

from .errors import DimensionError, UndefinedMetricError

__all__ = [
    "WaveformParams",
    "SymbolMatrix",
    "BasebandSignal",
    "FourierOperator",
    "synthesize",
    "pmepr",
    "papr_real",
    "cve",
    "pmepr_cve_bound",
    "Bound",
    "write_signal_csv",
    "read_signal_csv",
    "write_symbols_csv",
    "read_symbols_csv",
]

# Default setup: 50 MHz baseband sampled at 500 MHz.
DEFAULT_OVERSAMPLING = 10
DEFAULT_BANDWIDTH_HZ = 50e6


def _frozen(arr):
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class WaveformParams:
    """Grid dimensions of an OFDM pulse.

    Parameters
    ----------
    n_carriers : int
        Number of subcarriers ``N``.
    n_bits : int
        Number of bits (symbols) per carrier ``M``.
    oversampling : int
        Oversampling factor ``O_s``; the sample rate is ``O_s * N * freq_step_hz``.
    freq_step_hz : float, optional
        Carrier spacing. Defaults to a 50 MHz total bandwidth.
    """

    n_carriers: int
    n_bits: int
    oversampling: int = DEFAULT_OVERSAMPLING
    freq_step_hz: float = None

    def __post_init__(self):
        for name in ("n_carriers", "n_bits", "oversampling"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DimensionError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.freq_step_hz is None:
            object.__setattr__(self, "freq_step_hz", DEFAULT_BANDWIDTH_HZ / self.n_carriers)
        if not self.freq_step_hz > 0:
            raise DimensionError("freq_step_hz must be positive")
        object.__setattr__(self, "freq_step_hz", float(self.freq_step_hz))

    @property
    def bit_duration_s(self) -> float:
        return 1.0 / self.freq_step_hz

    @property
    def pulse_width_s(self) -> float:
        return self.n_bits * self.bit_duration_s

    @property
    def sample_rate_hz(self) -> float:
        return self.oversampling * self.n_carriers * self.freq_step_hz

    @property
    def samples_per_bit(self) -> int:
        return self.oversampling * self.n_carriers

    @property
    def n_samples(self) -> int:
        return self.oversampling * self.n_carriers * self.n_bits

    @property
    def n_codes(self) -> int:
        return self.n_carriers * self.n_bits

    @property
    def is_coarse(self) -> bool:
        """True when ``O_s < 4``; discrete PMEPR may then underestimate the continuous peak."""
        return self.oversampling < 4


@dataclass(frozen=True)
class SymbolMatrix:
    """Modulation codes ``a_{n,m}`` stored as an ``N x M`` complex matrix."""

    codes: np.ndarray

    def __post_init__(self):
        codes = _frozen(self.codes)
        if codes.ndim != 2:
            raise DimensionError(f"codes must be 2-D (N, M), got shape {codes.shape}")
        object.__setattr__(self, "codes", codes)

    @property
    def shape(self):
        return self.codes.shape

    @classmethod
    def from_vector(cls, vector, params: WaveformParams) -> "SymbolMatrix":
        vector = np.asarray(vector, dtype=np.complex128)
        if vector.shape != (params.n_codes,):
            raise DimensionError(
                f"code vector must have length {params.n_codes}, got shape {vector.shape}"
            )
        return cls(vector.reshape(params.n_bits, params.n_carriers).T)

    @classmethod
    def zeros(cls, params: WaveformParams) -> "SymbolMatrix":
        return cls(np.zeros((params.n_carriers, params.n_bits), dtype=np.complex128))

    def to_vector(self) -> np.ndarray:
        """Bit-major flattening ``[a_0; a_1; ...; a_{M-1}]``."""
        return self.codes.T.reshape(-1).copy()

    def check(self, params: WaveformParams) -> None:
        if self.codes.shape != (params.n_carriers, params.n_bits):
            raise DimensionError(
                f"codes shape {self.codes.shape} does not match "
                f"(N, M) = ({params.n_carriers}, {params.n_bits})"
            )


@dataclass(frozen=True)
class BasebandSignal:
    """Sampled complex envelope ``x`` of length ``O_s*N*M``."""

    samples: np.ndarray
    params: WaveformParams = field(repr=False)

    def __post_init__(self):
        samples = _frozen(self.samples)
        if samples.shape != (self.params.n_samples,):
            raise DimensionError(
                f"expected {self.params.n_samples} samples, got shape {samples.shape}"
            )
        object.__setattr__(self, "samples", samples)

    @property
    def envelope(self) -> np.ndarray:
        return np.abs(self.samples)

    @property
    def blocks(self) -> np.ndarray:
        """Samples reshaped to ``(M, O_s*N)``, one row per bit."""
        return self.samples.reshape(self.params.n_bits, self.params.samples_per_bit)

    @property
    def energy(self) -> float:
        return float(np.vdot(self.samples, self.samples).real)

    def scaled(self, factor) -> "BasebandSignal":
        return BasebandSignal(self.samples * factor, self.params)

    def normalized(self) -> "BasebandSignal":
        """Copy scaled to unit average power."""
        power = self.energy / self.params.n_samples
        if power == 0:
            raise UndefinedMetricError("cannot normalize an all-zero signal")
        return self.scaled(1.0 / np.sqrt(power))


class FourierOperator:
    """Block-diagonal oversampled DFT ``A = diag(F, ..., F)``.

    ``F`` has entries ``exp(j*2*pi*n*k/(O_s*N))``.  Only the small per-bit
    matrix is ever built explicitly (and only on request); products with
    ``A`` and ``A^H`` go through length-``O_s*N`` FFTs.
    """

    def __init__(self, params: WaveformParams):
        self.params = params
        self.n_carriers = params.n_carriers
        self.block_len = params.samples_per_bit

    @property
    def matrix(self) -> np.ndarray:
        k = np.arange(self.block_len)[:, None]
        n = np.arange(self.n_carriers)[None, :]
        return np.exp(2j * np.pi * n * k / self.block_len)

    def forward(self, grid: np.ndarray) -> np.ndarray:
        """Map codes shaped ``(..., M, N)`` to samples shaped ``(..., M, O_s*N)``."""
        return np.fft.ifft(grid, n=self.block_len, axis=-1) * self.block_len

    def adjoint(self, blocks: np.ndarray) -> np.ndarray:
        """Map samples shaped ``(..., M, O_s*N)`` to ``F^H`` coefficients ``(..., M, N)``."""
        return np.fft.fft(blocks, axis=-1)[..., : self.n_carriers]

    def apply(self, a: np.ndarray) -> np.ndarray:
        """``A @ a`` for a flat bit-major code vector."""
        p = self.params
        grid = np.asarray(a, dtype=np.complex128).reshape(p.n_bits, p.n_carriers)
        return self.forward(grid).reshape(-1)

    def apply_adjoint(self, x: np.ndarray) -> np.ndarray:
        """``A^H @ x`` for a flat sample vector."""
        p = self.params
        blocks = np.asarray(x, dtype=np.complex128).reshape(p.n_bits, self.block_len)
        return self.adjoint(blocks).reshape(-1)


def synthesize(params: WaveformParams, symbols: SymbolMatrix) -> BasebandSignal:
    """Sample the OFDM pulse produced by ``symbols``.

    Examples
    --------
    >>> p = WaveformParams(2, 1, oversampling=4)
    >>> x = synthesize(p, SymbolMatrix([[1], [1]]))
    >>> complex(x.samples[0])
    (2+0j)
    """
    if not isinstance(symbols, SymbolMatrix):
        symbols = SymbolMatrix(symbols)
    symbols.check(params)
    return BasebandSignal(FourierOperator(params).apply(symbols.to_vector()), params)


SignalLike = Union[BasebandSignal, np.ndarray]


def _samples(signal: SignalLike) -> np.ndarray:
    if isinstance(signal, BasebandSignal):
        return signal.samples
    return np.asarray(signal)


def _power_ratio(power: np.ndarray) -> float:
    mean = power.mean()
    if not mean > 0:
        raise UndefinedMetricError("metric undefined for an all-zero signal")
    # Rounding can put the mean a hair above the peak for flat envelopes.
    return max(1.0, float(power.max() / mean))


def pmepr(signal: SignalLike) -> float:
    """Peak-to-mean envelope power ratio ``max|x|^2 / mean|x|^2``."""
    return _power_ratio(np.abs(_samples(signal)) ** 2)


def papr_real(samples) -> float:
    """Peak-to-average power ratio of a real passband sample vector."""
    samples = np.asarray(samples, dtype=float)
    return _power_ratio(samples**2)


def cve(signal: SignalLike) -> float:
    """Coefficient of variation of the envelope.

    Variance of ``|x|`` divided by the squared mean of ``|x|``; zero exactly
    for constant-envelope signals and invariant to complex scaling.
    """
    env = np.abs(_samples(signal))
    mean = env.mean()
    if not mean > 0:
        raise UndefinedMetricError("CVE undefined for an all-zero signal")
    return float(np.mean((env - mean) ** 2) / mean**2)


class Bound(NamedTuple):
    lower: float
    upper: float
    holds: bool


def pmepr_cve_bound(signal: SignalLike) -> Bound:
    """Sandwich ``1 <= sqrt(PMEPR) <= sqrt(L*CVE) + 1``.

    ``upper`` is the CVE-based ceiling on ``sqrt(PMEPR)``.  ``holds`` compares
    with a relative slack of 1e-12 to absorb rounding at equality.
    """
    x = _samples(signal)
    root = np.sqrt(pmepr(x))
    upper = float(np.sqrt(x.size * cve(x)) + 1.0)
    slack = 1e-12 * upper
    return Bound(1.0, upper, bool(1.0 - slack <= root <= upper + slack))


def _fmt(value: float) -> str:
    return repr(float(value))


def write_signal_csv(signal: BasebandSignal, path) -> None:
    """Write ``index,re,im,abs`` rows; floats use shortest round-trip repr."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "re", "im", "abs"])
        for i, v in enumerate(signal.samples):
            w.writerow([i, _fmt(v.real), _fmt(v.imag), _fmt(abs(v))])


def read_signal_csv(path, params: WaveformParams) -> BasebandSignal:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    samples = np.empty(len(rows), dtype=np.complex128)
    for row in rows:
        samples[int(row["index"])] = complex(float(row["re"]), float(row["im"]))
    return BasebandSignal(samples, params)


def write_symbols_csv(symbols: SymbolMatrix, path) -> None:
    """Write ``carrier,bit,re,im`` rows in bit-major order."""
    n_car, n_bits = symbols.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["carrier", "bit", "re", "im"])
        for m in range(n_bits):
            for n in range(n_car):
                v = symbols.codes[n, m]
                w.writerow([n, m, _fmt(v.real), _fmt(v.imag)])


def read_symbols_csv(path: Union[str, Path]) -> SymbolMatrix:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n_car = 1 + max(int(r["carrier"]) for r in rows)
    n_bits = 1 + max(int(r["bit"]) for r in rows)
    codes = np.zeros((n_car, n_bits), dtype=np.complex128)
    for r in rows:
        codes[int(r["carrier"]), int(r["bit"])] = complex(float(r["re"]), float(r["im"]))
    return SymbolMatrix(codes)
