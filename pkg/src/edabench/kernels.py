"""One-generation update rules for cGA, UMDA and PBIL, plus the anytime run loop.

All three kernels share the same skeleton: sample individuals from the current
frequency vector, evaluate them (noisily, when a noise model is attached),
and move the model toward the better samples.  A run ends the first time a
sampled individual is optimal on its TRUE fitness -- the referee check is
noiseless and free -- or when the evaluation budget blocks the next
generation.  Success is accounted at the evaluation index of the optimal
sample itself, not at its generation boundary.

Randomness protocol (identical for the numpy steps and the compiled cGA
loop): per generation all individuals are sampled first (n uniforms each, in
sample order), then evaluated in order (one normal draw each iff the noise
variance is positive).  A generation in which an optimum appears consumes no
draws past the batch in which it was found.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import (
    EvaluationCounter,
    MarginPolicy,
    RngStream,
    as_generator,
    clamp_to_margins,
    sample_bitstring,
    uniform_frequencies,
)
from .objectives import NOISELESS, NoiseModel, Objective

try:
    from . import _fast

    HAVE_FAST = True
except ImportError:  # pragma: no cover - numba missing: numpy steps only
    HAVE_FAST = False

__all__ = [
    "CgaConfig",
    "UmdaConfig",
    "PbilConfig",
    "KernelConfig",
    "RunState",
    "RunOutcome",
    "new_run_state",
    "evals_per_generation",
    "cga_update",
    "pbil_update",
    "cga_step",
    "umda_step",
    "pbil_step",
    "kernel_step",
    "drive_run",
    "run_kernel",
    "neutral_absorption_generations",
]


@dataclass(frozen=True)
class CgaConfig:
    """Compact GA: hypothetical population size mu >= 2, frequency step 1/mu."""

    mu: int
    margins: MarginPolicy = MarginPolicy.STANDARD

    def __post_init__(self) -> None:
        if self.mu < 2:
            raise ValueError("cGA requires mu >= 2")


@dataclass(frozen=True)
class UmdaConfig:
    """UMDA: sample size lam, selection size mu with 1 <= mu <= lam."""

    lam: int
    mu: int
    margins: MarginPolicy = MarginPolicy.STANDARD

    def __post_init__(self) -> None:
        if self.lam < 2:
            raise ValueError("UMDA requires a sample size lam >= 2")
        if not 1 <= self.mu <= self.lam:
            raise ValueError("UMDA requires 1 <= mu <= lam")


@dataclass(frozen=True)
class PbilConfig:
    """PBIL / cross-entropy: sample size lam, selection pressure eta, learning rate rho.

    The selection size is mu = ceil(eta * lam).  rho = 1 reduces the update to
    the UMDA rule on the same sample set.
    """

    lam: int
    eta: float
    rho: float
    margins: MarginPolicy = MarginPolicy.STANDARD

    def __post_init__(self) -> None:
        if self.lam < 2:
            raise ValueError("PBIL requires a sample size lam >= 2")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("PBIL requires selection pressure eta in (0, 1]")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("PBIL requires learning rate rho in (0, 1]")
        if not 1 <= self.mu <= self.lam:
            raise ValueError("PBIL requires 1 <= ceil(eta * lam) <= lam")

    @property
    def mu(self) -> int:
        return math.ceil(self.eta * self.lam)


KernelConfig = Union[CgaConfig, UmdaConfig, PbilConfig]


def evals_per_generation(config: KernelConfig) -> int:
    if isinstance(config, CgaConfig):
        return 2
    return config.lam


@dataclass
class RunState:
    """Mutable state of one run; confined to a single thread."""

    p: np.ndarray
    counter: EvaluationCounter
    rng: np.random.Generator
    generation: int = 0
    best_true_fitness: float = -math.inf
    success: bool = False
    success_evaluation: int | None = None
    # observed (possibly noisy) fitness values of the most recent generation,
    # kept for fitness-based restart triggers
    last_observed_fitness: np.ndarray | None = None


@dataclass(frozen=True)
class RunOutcome:
    success: bool
    evaluations: int
    generations: int
    best_true_fitness: float
    final_p: np.ndarray


def new_run_state(
    config: KernelConfig,
    objective: Objective,
    rng: "RngStream | np.random.Generator",
    eval_cap: int | None = None,
) -> RunState:
    """A fresh run: uniform model (1/2, ..., 1/2), zeroed counters."""
    return RunState(
        p=uniform_frequencies(objective.dimension),
        counter=EvaluationCounter(0, eval_cap),
        rng=as_generator(rng),
    )


def _record_sample(state: RunState, objective: Objective, true_value: float) -> bool:
    """Track the referee's view of one evaluated sample; True on first optimum."""
    if true_value > state.best_true_fitness:
        state.best_true_fitness = true_value
    if not state.success and objective.is_optimal_value(true_value):
        state.success = True
        state.success_evaluation = state.counter.count
        return True
    return False


def cga_update(p: np.ndarray, winner, loser, mu: int, margins: MarginPolicy) -> np.ndarray:
    """The cGA model update: p + (1/mu) * (winner - loser), then clamp."""
    step = 1.0 / mu
    diff = np.asarray(winner, dtype=np.float64) - np.asarray(loser, dtype=np.float64)
    return clamp_to_margins(p + step * diff, margins, p.shape[0])


def pbil_update(
    p: np.ndarray, elite_mean: np.ndarray, rho: float, margins: MarginPolicy
) -> np.ndarray:
    """The PBIL model update: rho * elite_mean + (1 - rho) * p, then clamp.

    rho = 1 reproduces the UMDA update bit-for-bit; rho = 0 leaves a valid
    model unchanged.
    """
    raw = rho * np.asarray(elite_mean, dtype=np.float64) + (1.0 - rho) * p
    return clamp_to_margins(raw, margins, p.shape[0])


def cga_step(
    state: RunState,
    config: CgaConfig,
    objective: Objective,
    noise: NoiseModel | None = None,
) -> RunState:
    """One cGA generation: sample X1, X2, keep the noisy winner (X1 wins ties).

    The literal comparison f(X1) >= f(X2) makes X1 the winner on ties; since
    X1 and X2 are exchangeable this is still an unbiased step on a neutral
    landscape.  Charges 2 evaluations unless the run ends at the first one.
    """
    noise = NOISELESS if noise is None else noise
    rng = state.rng
    draw = objective.sampler if objective.sampler is not None else sample_bitstring
    x1 = draw(state.p, rng)
    x2 = draw(state.p, rng)
    state.generation += 1

    ft1 = objective.evaluate_true(x1)
    state.counter.charge(1)
    f1 = noise.perturb(ft1, rng)
    if _record_sample(state, objective, ft1):
        state.last_observed_fitness = np.array([f1])
        return state

    ft2 = objective.evaluate_true(x2)
    state.counter.charge(1)
    f2 = noise.perturb(ft2, rng)
    if _record_sample(state, objective, ft2):
        state.last_observed_fitness = np.array([f1, f2])
        return state

    state.last_observed_fitness = np.array([f1, f2])
    if f1 >= f2:
        state.p = cga_update(state.p, x1, x2, config.mu, config.margins)
    else:
        state.p = cga_update(state.p, x2, x1, config.mu, config.margins)
    return state


def _sampled_generation(
    state: RunState,
    lam: int,
    mu: int,
    objective: Objective,
    noise: NoiseModel,
) -> np.ndarray | None:
    """Sample and evaluate one lambda-generation; select the mu best.

    Returns the selected rows, or None when the run ended at an optimal sample
    (in which case only the evaluations up to and including that sample are
    charged and no selection takes place).  Ties are broken uniformly via a
    random shuffle followed by a stable sort on descending observed fitness.
    """
    rng = state.rng
    n = objective.dimension
    if objective.sampler is not None:
        X = np.empty((lam, n), dtype=np.uint8)
        for i in range(lam):
            X[i] = objective.sampler(state.p, rng)
    else:
        X = (rng.random((lam, n)) < state.p).view(np.uint8)
    true_vals = objective.evaluate_batch(X)
    observed = noise.perturb_batch(true_vals, rng)
    state.generation += 1

    if not state.success:
        optimal = np.flatnonzero(true_vals >= objective.optimum_value - objective.optimum_gap)
        if optimal.size:
            stop = int(optimal[0])
            state.counter.charge(stop + 1)
            best_prefix = float(true_vals[: stop + 1].max())
            if best_prefix > state.best_true_fitness:
                state.best_true_fitness = best_prefix
            state.success = True
            state.success_evaluation = state.counter.count
            state.last_observed_fitness = observed[: stop + 1]
            return None

    state.counter.charge(lam)
    gen_best = float(true_vals.max())
    if gen_best > state.best_true_fitness:
        state.best_true_fitness = gen_best
    state.last_observed_fitness = observed

    perm = rng.permutation(lam)
    order = np.argsort(-observed[perm], kind="stable")
    return X[perm[order[:mu]]]


def umda_step(
    state: RunState,
    config: UmdaConfig,
    objective: Objective,
    noise: NoiseModel | None = None,
) -> RunState:
    """One UMDA generation: frequency vector becomes the mean of the mu best."""
    noise = NOISELESS if noise is None else noise
    selected = _sampled_generation(state, config.lam, config.mu, objective, noise)
    if selected is None:
        return state
    state.p = clamp_to_margins(selected.mean(axis=0), config.margins, objective.dimension)
    return state


def pbil_step(
    state: RunState,
    config: PbilConfig,
    objective: Objective,
    noise: NoiseModel | None = None,
) -> RunState:
    """One PBIL generation: convex combination of the old model and the elite mean."""
    noise = NOISELESS if noise is None else noise
    selected = _sampled_generation(state, config.lam, config.mu, objective, noise)
    if selected is None:
        return state
    state.p = pbil_update(state.p, selected.mean(axis=0), config.rho, config.margins)
    return state


def kernel_step(
    state: RunState,
    config: KernelConfig,
    objective: Objective,
    noise: NoiseModel | None = None,
) -> RunState:
    if isinstance(config, CgaConfig):
        return cga_step(state, config, objective, noise)
    if isinstance(config, UmdaConfig):
        return umda_step(state, config, objective, noise)
    if isinstance(config, PbilConfig):
        return pbil_step(state, config, objective, noise)
    raise TypeError(f"unknown kernel config {type(config).__name__}")


def _effective_limit(
    state: RunState, max_evals: int | None, lenient: bool
) -> tuple[int | None, bool]:
    """Combine an explicit budget with the counter cap; the cap is never overshot."""
    cap = state.counter.cap
    if max_evals is None:
        return cap, False
    if cap is None:
        return max_evals, lenient
    if cap <= max_evals:
        return cap, False
    return max_evals, lenient


def drive_run(
    state: RunState,
    config: KernelConfig,
    objective: Objective,
    noise: NoiseModel | None = None,
    *,
    max_evals: int | None = None,
    max_generations: int | None = None,
    lenient: bool = False,
) -> RunState:
    """Advance a run until success or until the budgets block the next generation.

    ``max_evals`` and ``max_generations`` are absolute values compared against
    the state's counters, so a run can be resumed in chunks.  With ``lenient``
    (cGA only) a generation starts whenever any budget remains and its two
    evaluations are charged atomically, possibly overshooting ``max_evals`` by
    one; otherwise a generation only starts if it fits completely.
    """
    noise = NOISELESS if noise is None else noise
    limit, limit_lenient = _effective_limit(state, max_evals, lenient)
    cost = evals_per_generation(config)

    if (
        HAVE_FAST
        and isinstance(config, CgaConfig)
        and objective.fast_code is not None
        and objective.sampler is None
        and not state.success
    ):
        lo, hi = config.margins.bounds(objective.dimension)
        success, count, gens, best, succ_eval = _fast.cga_drive(
            state.rng,
            state.p,
            1.0 / config.mu,
            lo,
            hi,
            noise.sigma if noise.variance > 0.0 else 0.0,
            objective.fast_code,
            objective.fast_k,
            objective.optimum_value - objective.optimum_gap,
            state.best_true_fitness,
            state.counter.count,
            -1 if limit is None else int(limit),
            bool(limit_lenient),
            state.generation,
            -1 if max_generations is None else int(max_generations),
        )
        state.counter.count = int(count)
        state.generation = int(gens)
        state.best_true_fitness = float(best)
        if success:
            state.success = True
            state.success_evaluation = int(succ_eval)
        return state

    while not state.success:
        if max_generations is not None and state.generation >= max_generations:
            break
        if limit is not None:
            if limit_lenient:
                if state.counter.count >= limit:
                    break
            elif state.counter.count + cost > limit:
                break
        kernel_step(state, config, objective, noise)
    return state


def run_kernel(
    config: KernelConfig,
    objective: Objective,
    noise: NoiseModel | None = None,
    *,
    eval_cap: int | None = None,
    rng: "RngStream | np.random.Generator",
    max_generations: int | None = None,
) -> RunOutcome:
    """Run a kernel from a fresh uniform model until the true optimum is sampled
    or the evaluation cap blocks the next generation.

    The reported evaluation count is exact: when the optimum appears
    mid-generation the count is the evaluation index of the optimal sample.
    """
    state = new_run_state(config, objective, rng, eval_cap=eval_cap)
    drive_run(state, config, objective, noise, max_evals=eval_cap, max_generations=max_generations)
    return RunOutcome(
        success=state.success,
        evaluations=state.counter.count,
        generations=state.generation,
        best_true_fitness=state.best_true_fitness,
        final_p=state.p,
    )


def neutral_absorption_generations(
    mu: int,
    rng: "RngStream | np.random.Generator",
    max_generations: int = 10**9,
) -> int:
    """Generations until a single neutral cGA frequency (no margins) leaves (0, 1).

    Runs the cGA on a one-bit flat landscape; pure genetic drift.  Returns -1
    when not absorbed within ``max_generations``.  Detection uses a half-grid
    tolerance of 1/(2 mu) around the boundaries because valid unabsorbed
    states are at least 1/mu away from them.
    """
    gen = as_generator(rng)
    if HAVE_FAST:
        return int(_fast.neutral_absorption(gen, mu, max_generations))
    p = 0.5
    step = 1.0 / mu
    tol = 0.5 / mu
    g = 0
    while g < max_generations:
        x1 = gen.random() < p
        x2 = gen.random() < p
        g += 1
        if x1 != x2:
            v = p + (step if x1 else -step)
            p = min(max(0.0, v), 1.0)
            if p < tol or p > 1.0 - tol:
                return g
    return -1
