"""Shared primitives: bit strings, frequency vectors, seeded streams, evaluation accounting.

Bit strings are plain contiguous ``uint8`` arrays holding 0/1 values; numpy's
``count_nonzero`` gives a SIMD popcount on that layout, which is what the
fitness-heavy benchmarks need.  Frequency vectors are ``float64`` arrays; the
per-generation updates of the kernels (steps of size 1/mu, mu at desk scale
well below 2**30) sit far above rounding noise, so no rational arithmetic is
used.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "BudgetExhausted",
    "MarginPolicy",
    "RngStream",
    "EvaluationCounter",
    "uniform_frequencies",
    "clamp_to_margins",
    "sample_bitstring",
    "as_generator",
]


class BudgetExhausted(RuntimeError):
    """An evaluation was requested after the budget cap was already reached."""


class MarginPolicy(Enum):
    """Clamping rule for frequency vectors.

    STANDARD restricts every entry to [1/n, 1 - 1/n] so that no frequency can
    absorb at 0 or 1; NONE only keeps entries inside [0, 1].
    """

    NONE = "none"
    STANDARD = "standard"

    def bounds(self, n: int) -> tuple[float, float]:
        if self is MarginPolicy.STANDARD:
            return 1.0 / n, 1.0 - 1.0 / n
        return 0.0, 1.0


@dataclass(frozen=True)
class RngStream:
    """A reproducible, independently addressable random stream.

    Equal (seed, path) pairs always yield identical draw sequences; distinct
    paths are statistically independent (Philox keyed through a SeedSequence
    spawn key).  This makes repetition sweeps reproducible regardless of the
    order in which repetitions execute.
    """

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if isinstance(self.path, int):
            object.__setattr__(self, "path", (self.path,))
        else:
            object.__setattr__(self, "path", tuple(int(i) for i in self.path))

    def child(self, index: int) -> "RngStream":
        """Derive an independent sub-stream (e.g. one per repetition or process)."""
        return RngStream(self.seed, self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the origin of this stream."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


def as_generator(rng: "RngStream | np.random.Generator") -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


@dataclass
class EvaluationCounter:
    """Counts fitness evaluations, optionally against a hard cap.

    Every objective evaluation, including noisy re-evaluations of the same
    point, charges exactly one unit.  Once ``count`` has reached the cap no
    further evaluation may be charged; a single multi-evaluation charge that
    starts below the cap may legitimately cross it (a cGA generation is atomic).
    """

    count: int = 0
    cap: int | None = None

    def can_spend(self, k: int = 1) -> bool:
        return self.cap is None or self.count + k <= self.cap

    def charge(self, k: int = 1) -> None:
        if self.cap is not None and self.count >= self.cap:
            raise BudgetExhausted(f"evaluation budget of {self.cap} exhausted")
        self.count += k


def uniform_frequencies(n: int) -> np.ndarray:
    """The initial model (1/2, ..., 1/2)."""
    return np.full(n, 0.5, dtype=np.float64)


def clamp_to_margins(p_raw, policy: MarginPolicy, n: int) -> np.ndarray:
    """Clamp raw frequencies entry-wise into the interval allowed by ``policy``.

    Values may lie outside [0, 1] transiently after a model update; the clamp
    is idempotent and maps crossings exactly onto the boundary constants.
    """
    arr = np.asarray(p_raw, dtype=np.float64)
    if arr.shape != (n,):
        raise ValueError(f"expected {n} frequencies, got shape {arr.shape}")
    lo, hi = policy.bounds(n)
    return np.clip(arr, lo, hi)


def sample_bitstring(p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one individual: bit j is an independent Bernoulli(p_j).

    Consumes exactly n uniform doubles from ``rng``, entry-wise compared
    against p, so batched sampling via ``rng.random((k, n))`` consumes the
    stream identically to k successive calls.
    """
    return (rng.random(p.shape[0]) < p).view(np.uint8)
