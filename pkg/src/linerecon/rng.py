"""Seeded random streams.

Every random draw in the package goes through :func:`derive_rng`, which
builds a NumPy ``Generator`` backed by PCG64 from a ``SeedSequence`` over
``(master seed, crc32(purpose tag), index)``. PCG64 and SeedSequence are
specified bit-for-bit by NumPy, so results are identical across platforms.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def tag_hash(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def derive_rng(seed: int, tag: str = "", index: int = 0) -> np.random.Generator:
    """Return an independent generator for ``(seed, tag, index)``.

    Distinct tags or indices give statistically independent streams; the
    same triple always gives the same stream.
    """
    entropy = [int(seed) & _MASK64, tag_hash(tag), int(index) & _MASK64]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, tag: str, index: int = 0) -> int:
    """A 64-bit child seed, for handing to code that wants a plain integer."""
    return int(derive_rng(seed, tag, index).integers(0, 2**63 - 1, dtype=np.int64))


def random_big_ints(rng: np.random.Generator, bound: int, size: int) -> list[int]:
    """``size`` uniform integers in ``[0, bound)`` for arbitrarily large ``bound``."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    if bound <= 2**63:
        return [int(x) for x in rng.integers(0, bound, size=size, dtype=np.uint64)]
    bits = (bound - 1).bit_length()
    words = -(-bits // 64)
    excess = words * 64 - bits
    out: list[int] = []
    while len(out) < size:
        need = size - len(out)
        # acceptance rate is above 1/2, so draw double and reject
        raw = rng.integers(0, 2**64, size=(2 * need + 4, words), dtype=np.uint64)
        for row in raw:
            value = 0
            for w in row:
                value = (value << 64) | int(w)
            value >>= excess
            if value < bound:
                out.append(value)
                if len(out) == size:
                    break
    return out
