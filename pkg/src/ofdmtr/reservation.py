"""Informative/reserved split of the code vector and its structured operators.

``B`` is the column subset of the block Fourier operator picked by the
reserved indices.  Because ``F^H F = O_s*N*I``, the pseudo-inverse of ``B``
is just ``B^H / (O_s*N)``; nothing here factorizes a matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .model import FourierOperator, SymbolMatrix, WaveformParams, synthesize

__all__ = [
    "ReservationPlan",
    "FixedPart",
    "build_fixed_part",
    "apply_reserved",
    "pinv_apply",
    "update_beta_theta",
]


def _index_tuple(values, upper):
    out = tuple(sorted(int(v) for v in values))
    if len(set(out)) != len(out):
        raise DimensionError("duplicate indices in reservation plan")
    if out and (out[0] < 0 or out[-1] >= upper):
        raise DimensionError(f"indices must lie in [0, {upper})")
    return out


@dataclass(frozen=True)
class ReservationPlan:
    """Disjoint informative and reserved index sets over the ``N*M`` code slots.

    Indices are bit-major: slot ``m*N + n`` holds ``a_{n,m}``.
    """

    params: WaveformParams
    informative: tuple
    reserved: tuple = field(default=None)

    def __post_init__(self):
        total = self.params.n_codes
        info = _index_tuple(self.informative, total)
        if self.reserved is None:
            res = tuple(sorted(set(range(total)) - set(info)))
        else:
            res = _index_tuple(self.reserved, total)
        if set(info) & set(res):
            raise DimensionError("informative and reserved sets overlap")
        if len(info) + len(res) != total:
            raise DimensionError("informative and reserved sets must cover every code slot")
        object.__setattr__(self, "informative", info)
        object.__setattr__(self, "reserved", res)

    @classmethod
    def from_carriers(cls, params: WaveformParams, carriers) -> "ReservationPlan":
        """Make every bit of ``carriers`` informative, reserve the rest."""
        carriers = sorted(set(int(n) for n in carriers))
        if carriers and (carriers[0] < 0 or carriers[-1] >= params.n_carriers):
            raise DimensionError("carrier index out of range")
        info = [m * params.n_carriers + n for m in range(params.n_bits) for n in carriers]
        return cls(params, info)

    @property
    def n_reserved(self) -> int:
        return len(self.reserved)

    @property
    def n_informative(self) -> int:
        return len(self.informative)

    @property
    def reserved_mask(self) -> np.ndarray:
        """Boolean grid shaped ``(M, N)``, True on reserved slots."""
        mask = np.zeros(self.params.n_codes, dtype=bool)
        mask[list(self.reserved)] = True
        return mask.reshape(self.params.n_bits, self.params.n_carriers)

    def scatter(self, informative_symbols=None, reserved_symbols=None) -> np.ndarray:
        """Assemble a full bit-major code vector from its two parts."""
        a = np.zeros(self.params.n_codes, dtype=np.complex128)
        if informative_symbols is not None:
            a[list(self.informative)] = _checked(informative_symbols, self.n_informative, "informative")
        if reserved_symbols is not None:
            a[list(self.reserved)] = _checked(reserved_symbols, self.n_reserved, "reserved")
        return a

    def symbols(self, informative_symbols, reserved_symbols=None) -> SymbolMatrix:
        return SymbolMatrix.from_vector(
            self.scatter(informative_symbols, reserved_symbols), self.params
        )


def _checked(vec, size, what):
    vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
    if vec.size != size:
        raise DimensionError(f"{what} vector has length {vec.size}, expected {size}")
    return vec


@dataclass(frozen=True)
class FixedPart:
    """Contribution ``c = A_I a_I`` of the informative symbols to the samples."""

    c: np.ndarray
    a_SI: np.ndarray


def build_fixed_part(plan: ReservationPlan, informative_symbols) -> FixedPart:
    a_si = _checked(informative_symbols, plan.n_informative, "informative")
    c = synthesize(plan.params, plan.symbols(a_si)).samples
    return FixedPart(c=c, a_SI=a_si.copy())


def apply_reserved(plan: ReservationPlan, b) -> np.ndarray:
    """``B @ b``: samples produced by the reserved symbols alone."""
    a = plan.scatter(reserved_symbols=b)
    return FourierOperator(plan.params).apply(a)


def pinv_apply(plan: ReservationPlan, r) -> np.ndarray:
    """``B^+ @ r`` computed as ``B^H r / (O_s*N)``."""
    r = np.asarray(r, dtype=np.complex128)
    if r.shape != (plan.params.n_samples,):
        raise DimensionError(
            f"residual must have length {plan.params.n_samples}, got shape {r.shape}"
        )
    full = FourierOperator(plan.params).apply_adjoint(r) / plan.params.samples_per_bit
    return full[list(plan.reserved)]


def update_beta_theta(x):
    """Mean envelope ``beta = ||x||_1 / L`` and phases ``theta = angle(x)``.

    Zero samples get phase 0.  ``np.angle`` returns ``+pi`` on the negative
    real axis; those are folded to ``-pi`` so phases lie in ``[-pi, pi)``.
    """
    x = np.asarray(x, dtype=np.complex128)
    beta = float(np.abs(x).mean()) if x.size else 0.0
    theta = np.where(x == 0, 0.0, np.angle(x))
    theta = np.where(theta >= np.pi, -np.pi, theta)
    return beta, theta
