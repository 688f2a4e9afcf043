"""Reproducible random streams keyed by ``(master_seed, stream_index)``.

Every stream is a numpy ``Generator`` over the Philox 4x64 counter-based bit
generator. The two 64-bit key words are the master seed and the stream index
and the counter starts at zero, so a replication's draws depend only on its
key and never on execution order or worker layout.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RngStream", "stream"]

_U64 = 1 << 64


class RngStream:
    """Single-owner random stream; thin wrapper that records its key."""

    __slots__ = ("master_seed", "stream_index", "gen")

    def __init__(self, master_seed: int, stream_index: int):
        if not (0 <= master_seed < _U64 and 0 <= stream_index < _U64):
            raise ValueError("master_seed and stream_index must fit in uint64")
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        key = np.array([self.master_seed, self.stream_index], dtype=np.uint64)
        self.gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"

    def uniform_open_closed(self, size=None):
        """Uniform draws on (0, 1]."""
        return 1.0 - self.gen.random(size)

    def child(self, offset: int) -> "RngStream":
        """Stream with the same seed and ``stream_index + offset``."""
        return RngStream(self.master_seed, (self.stream_index + offset) % _U64)


def stream(master_seed: int, stream_index: int = 0) -> RngStream:
    return RngStream(master_seed, stream_index)
