"""Counter-based random streams keyed by (base seed, replication index)."""

import zlib

import numpy as np

__all__ = ["RngStream"]

_MASK64 = (1 << 64) - 1


def _tag_to_int(tag):
    if isinstance(tag, (int, np.integer)):
        return int(tag) & _MASK64
    return zlib.crc32(str(tag).encode("utf-8"))


class RngStream:
    """Deterministic random stream for one replication.

    The underlying bit generator is Philox, a counter-based generator, keyed
    by a seed sequence built from ``(base_seed, stream_id, *path)``.  Two
    streams with the same key reproduce identical draws; distinct keys give
    independent streams, so replications can be evaluated in any order.

    Parameters
    ----------
    base_seed : int
        Experiment-level seed (64-bit unsigned).
    stream_id : int
        Replication index (64-bit unsigned).
    path : tuple, optional
        Sub-stream labels; use :meth:`substream` rather than passing this.
    """

    def __init__(self, base_seed, stream_id=0, path=()):
        if base_seed < 0 or stream_id < 0:
            raise ValueError("seeds must be nonnegative 64-bit integers")
        self.base_seed = int(base_seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        self.path = tuple(path)
        seq = np.random.SeedSequence(
            entropy=self.base_seed,
            spawn_key=(self.stream_id,) + tuple(_tag_to_int(t) for t in self.path),
        )
        self._gen = np.random.Generator(np.random.Philox(seq))

    def __repr__(self):
        return f"RngStream(base_seed={self.base_seed}, stream_id={self.stream_id}, path={self.path!r})"

    @property
    def generator(self):
        return self._gen

    def substream(self, tag):
        """Independent child stream; does not advance this stream."""
        return RngStream(self.base_seed, self.stream_id, self.path + (tag,))

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def choice(self, a, size=None, replace=True):
        return self._gen.choice(a, size=size, replace=replace)

    def permutation(self, x):
        return self._gen.permutation(x)
