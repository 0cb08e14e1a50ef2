"""Seeded, splittable random streams and the symbol alphabets drawn from them."""

import numpy as np

QPSK = np.array([1, 1j, -1, -1j], dtype=np.complex128)


def seeded_rng(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, stream_id)``.

    Streams are children of one ``SeedSequence``, so distinct ids give
    statistically independent sequences and a trial's draws never depend on
    how trials are scheduled.
    """
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.PCG64(seq))


def qpsk(rng: np.random.Generator, size) -> np.ndarray:
    """Equiprobable symbols from ``{1, j, -1, -j}``; two uniform bits per symbol."""
    return QPSK[rng.integers(0, 4, size=size)]


def uniform_phase(rng: np.random.Generator, size) -> np.ndarray:
    """Unit-modulus symbols with phase uniform on ``[0, 2*pi)``."""
    return np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=size))
