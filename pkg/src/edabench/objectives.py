"""Pseudo-Boolean benchmarks and the additive centered Gaussian noise wrapper.

Four classic maximization benchmarks on {0,1}^n:

* ``onemax``        -- number of ones.
* ``leadingones``   -- length of the leading all-ones prefix.
* ``jump``          -- OneMax shifted by k, with a fitness valley of width k
                       just below the optimum.
* ``dlb``           -- deceptive leading blocks of length two (n even).

All four have the all-ones string as unique optimum.  Noise is posterior and
additive: the observed value is f(x) + N(0, sigma^2), drawn fresh on every
evaluation (no caching of noisy values, ever).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import EvaluationCounter

__all__ = [
    "NoiseModel",
    "Objective",
    "onemax",
    "leadingones",
    "jump",
    "dlb",
    "onemax_objective",
    "leadingones_objective",
    "jump_objective",
    "dlb_objective",
    "constant_objective",
    "noisy_evaluate",
]

# Codes used by the compiled cGA fast path to recognise the built-in benchmarks.
FAST_ONEMAX = 1
FAST_LEADINGONES = 2
FAST_JUMP = 3
FAST_DLB = 4


@dataclass(frozen=True)
class NoiseModel:
    """Additive centered Gaussian posterior noise with variance sigma^2 >= 0.

    Variance 0 reproduces noiseless evaluation exactly and consumes no draws.
    """

    variance: float = 0.0

    def __post_init__(self) -> None:
        if self.variance < 0:
            raise ValueError("noise variance must be >= 0")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def perturb(self, value: float, rng: np.random.Generator) -> float:
        if self.variance == 0.0:
            return float(value)
        return float(value) + self.sigma * rng.standard_normal()

    def perturb_batch(self, values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.variance == 0.0:
            return np.asarray(values, dtype=np.float64)
        return np.asarray(values, dtype=np.float64) + self.sigma * rng.standard_normal(len(values))


NOISELESS = NoiseModel(0.0)


def onemax(x) -> int:
    """Number of ones; optimum 1^n with value n."""
    return int(np.count_nonzero(x))


def leadingones(x) -> int:
    """Ones counted from the left until the first zero; optimum 1^n with value n."""
    x = np.asarray(x)
    zeros = np.flatnonzero(x == 0)
    return int(zeros[0]) if zeros.size else x.shape[0]


def jump(x, k: int) -> int:
    """OneMax plus k outside the valley; n - s inside it.  Optimum value n + k."""
    x = np.asarray(x)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"jump size k={k} outside [1..{n}]")
    s = int(np.count_nonzero(x))
    if s <= n - k or s == n:
        return k + s
    return n - s


def dlb(x) -> int:
    """Deceptive leading blocks of length two; requires n even, optimum value n."""
    x = np.asarray(x)
    n = x.shape[0]
    if n % 2:
        raise ValueError("dlb requires an even dimension")
    if np.count_nonzero(x) == n:
        return n
    m = 0
    while x[2 * m] and x[2 * m + 1]:
        m += 1
    pair = int(x[2 * m]) + int(x[2 * m + 1])
    return 2 * m + 1 if pair == 0 else 2 * m


@dataclass(frozen=True)
class Objective:
    """A deterministic maximization objective over {0,1}^n.

    ``evaluate_true`` maps a single bit string to its exact value;
    ``evaluate_batch`` does the same for the rows of a (k, n) matrix.
    ``is_optimum`` holds iff the true value reaches ``optimum_value``
    (``optimum_gap`` absorbs float summation-order noise for objectives with a
    provable structural gap; it is 0 for the integer-valued benchmarks).
    """

    name: str
    dimension: int
    optimum_value: float
    evaluate_true: Callable[[np.ndarray], float]
    evaluate_batch: Callable[[np.ndarray], np.ndarray]
    optimum_gap: float = 0.0
    fast_code: int | None = None
    fast_k: int = 0
    sampler: Callable[[np.ndarray, np.random.Generator], np.ndarray] | None = None

    def is_optimum(self, x) -> bool:
        return self.is_optimal_value(self.evaluate_true(x))

    def is_optimal_value(self, value: float) -> bool:
        return value >= self.optimum_value - self.optimum_gap


def onemax_objective(n: int) -> Objective:
    return Objective(
        name="onemax",
        dimension=n,
        optimum_value=float(n),
        evaluate_true=lambda x: float(onemax(x)),
        evaluate_batch=lambda X: X.sum(axis=1, dtype=np.int64).astype(np.float64),
        fast_code=FAST_ONEMAX,
    )


def leadingones_objective(n: int) -> Objective:
    def batch(X: np.ndarray) -> np.ndarray:
        # cumulative product along each row is 1 exactly on the leading prefix
        return np.cumprod(X != 0, axis=1).sum(axis=1, dtype=np.int64).astype(np.float64)

    return Objective(
        name="leadingones",
        dimension=n,
        optimum_value=float(n),
        evaluate_true=lambda x: float(leadingones(x)),
        evaluate_batch=batch,
        fast_code=FAST_LEADINGONES,
    )


def jump_objective(n: int, k: int) -> Objective:
    if not 1 <= k <= n:
        raise ValueError(f"jump size k={k} outside [1..{n}]")

    def batch(X: np.ndarray) -> np.ndarray:
        s = X.sum(axis=1, dtype=np.int64)
        return np.where((s <= n - k) | (s == n), k + s, n - s).astype(np.float64)

    return Objective(
        name="jump",
        dimension=n,
        optimum_value=float(n + k),
        evaluate_true=lambda x: float(jump(x, k)),
        evaluate_batch=batch,
        fast_code=FAST_JUMP,
        fast_k=k,
    )


def dlb_objective(n: int) -> Objective:
    if n % 2:
        raise ValueError("dlb requires an even dimension")
    half = n // 2

    def batch(X: np.ndarray) -> np.ndarray:
        blocks = (X != 0).reshape(X.shape[0], half, 2)
        pair_sum = blocks.sum(axis=2, dtype=np.int64)
        full = pair_sum == 2
        m = np.cumprod(full, axis=1).sum(axis=1, dtype=np.int64)
        next_sum = pair_sum[np.arange(X.shape[0]), np.minimum(m, half - 1)]
        return np.where(m == half, n, 2 * m + (next_sum == 0)).astype(np.float64)

    return Objective(
        name="dlb",
        dimension=n,
        optimum_value=float(n),
        evaluate_true=lambda x: float(dlb(x)),
        evaluate_batch=batch,
        fast_code=FAST_DLB,
    )


def constant_objective(n: int, value: float = 0.0) -> Objective:
    """A flat landscape: every point has the same value (and is thus optimal).

    Useful to study pure genetic drift; note that run loops that stop on
    optimality stop immediately on this objective, so drift experiments drive
    kernel steps directly.
    """
    return Objective(
        name="constant",
        dimension=n,
        optimum_value=float(value),
        evaluate_true=lambda x: float(value),
        evaluate_batch=lambda X: np.full(X.shape[0], float(value)),
    )


def noisy_evaluate(
    objective: Objective,
    noise: NoiseModel,
    x,
    rng: np.random.Generator,
    counter: EvaluationCounter,
) -> float:
    """One noisy fitness evaluation: f(x) + N(0, sigma^2), freshly drawn.

    Charges the counter exactly once; raises :class:`BudgetExhausted` when the
    counter is already at its cap (the caller treats that as run termination).
    """
    counter.charge(1)
    return noise.perturb(objective.evaluate_true(x), rng)
