"""Deterministic, seedable random streams.

All randomness in the package flows through :class:`RngStream`.  A stream
is defined by a 64-bit master seed plus a derivation path of labels, and
two streams with the same (seed, path) produce bit-identical output on any
platform with IEEE-754 doubles and the same numpy/scipy versions.

Implementation, frozen for reproducibility:

* the uniform source is the Philox counter-based bit generator keyed by
  ``SeedSequence(seed, spawn_key=path)``;
* uniforms are ``(m + 0.5) / 2**53`` with ``m`` a 53-bit integer draw, so
  they lie strictly inside (0, 1);
* standard normals are the inverse normal CDF applied to those uniforms.

String labels are folded to integers with CRC-32, so paths may mix ints
and short role names like ``"signal"``.
"""

from __future__ import annotations

import zlib

import numpy as np
from scipy.special import ndtri

_U53 = 1 << 53


def _fold_label(label) -> int:
    if isinstance(label, str):
        return zlib.crc32(label.encode("utf-8"))
    value = int(label)
    if value != label or value < 0:
        raise ValueError(f"stream labels must be nonnegative integers or strings, got {label!r}")
    return value


class RngStream:
    """A single-owner random stream; fork independent substreams with ``derive``.

    The stream advances as values are drawn, so it must not be shared
    between concurrent consumers.  Substreams returned by :meth:`derive`
    are statistically independent of the parent and of each other and may
    be consumed concurrently.
    """

    __slots__ = ("seed", "path", "_gen")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed < 1 << 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.path = tuple(_fold_label(p) for p in path)
        self._gen = None

    def derive(self, *labels) -> "RngStream":
        """Child stream fully determined by (seed, path + labels)."""
        if not labels:
            raise ValueError("derive requires at least one label")
        return RngStream(self.seed, self.path + tuple(labels))

    @property
    def _generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
            self._gen = np.random.Generator(np.random.Philox(seq))
        return self._gen

    def uniform(self, size=None) -> np.ndarray | float:
        """Uniform draws strictly inside (0, 1), advancing the stream."""
        m = self._generator.integers(0, _U53, size=size, dtype=np.uint64)
        return (m.astype(np.float64) + 0.5) / _U53 if size is not None else (float(m) + 0.5) / _U53

    def normal(self, size=None) -> np.ndarray | float:
        """Standard normal draws via the inverse CDF, advancing the stream."""
        return ndtri(self.uniform(size=size))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path})"


def gaussian_vector(stream: RngStream, n: int) -> np.ndarray:
    """n iid standard normal entries drawn from ``stream``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return stream.normal(size=n)
