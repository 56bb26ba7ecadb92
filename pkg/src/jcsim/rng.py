"""Counter-based random streams keyed by (seed, trajectory index, purpose).

Each trajectory owns independent Philox streams for Wiener increments, jump
draws and initial-state sampling.  Draws are taken in fixed-size chunks per
stream, so a trajectory's noise sequence is the same whatever batch it runs
in and however long it runs (a shorter run sees a prefix of a longer one).
"""

from __future__ import annotations

import numpy as np

NOISE, JUMPS, INIT = 0, 1, 2
CHUNK = 4096


def stream(base_seed: int, index: int, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(index), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))


class BatchDraws:
    """Per-step draws for a batch of trajectories, one column per step."""

    def __init__(self, base_seed: int, indices, purpose: int, kind: str, chunk: int = CHUNK):
        self.gens = [stream(base_seed, i, purpose) for i in indices]
        self.kind = kind
        self.chunk = chunk
        self.buf = np.empty((len(self.gens), chunk))
        self.pos = chunk

    def _refill(self):
        for k, gen in enumerate(self.gens):
            self.buf[k] = gen.standard_normal(self.chunk) if self.kind == "normal" else gen.random(self.chunk)
        self.pos = 0

    def next(self) -> np.ndarray:
        if self.pos == self.chunk:
            self._refill()
        col = self.buf[:, self.pos]
        self.pos += 1
        return col


__all__ = ["stream", "BatchDraws", "NOISE", "JUMPS", "INIT", "CHUNK"]
