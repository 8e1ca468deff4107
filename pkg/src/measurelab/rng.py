"""Deterministic random-stream management.

Every stochastic routine takes an :class:`RngState` rather than a bare
generator.  Sub-streams are derived with :meth:`RngState.child`, which maps
onto ``numpy.random.SeedSequence`` spawn keys.  The derivation is pure, so
replica k always sees the same bytes no matter in which order (or on how
many workers) the replicas actually run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngState:
    """Master seed plus a stream path identifying one derived stream."""

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ValueError(f"seed must be a 64-bit nonnegative integer, got {self.seed}")

    def child(self, index: int) -> "RngState":
        """Derive the ``index``-th sub-stream (e.g. one per replica)."""
        return RngState(self.seed, self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        """Fresh PCG64 generator for this stream; identical state every call."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(ss))
