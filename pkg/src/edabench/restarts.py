"""Restart scheduling for EDA kernels.

Four ways to run a kernel without committing to a population size up front:

* ``smart_restart_run``    -- legs with geometrically growing parameter
  mu_l = 2 U^(l-1), each aborted after a drift-motivated budget of
  ceil(b * mu_l^2) fitness evaluations, each from a fresh uniform model.
* ``parallel_run``         -- the parameter-doubling parallel scheme: process l
  uses population size 2^(l-1) and the processes share the evaluation stream
  round-robin with exponentially growing allotments.
* ``triggered_restart_run`` -- legs that run until a restart trigger fires:
  either all frequencies sitting at the margins (``hl``) or a flat window of
  best fitness values (``ah``).

Also here: the closed-form expected-runtime bound for the budgeted restart
scheme under a linear-runtime assumption, and the recommended budget factors.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import MarginPolicy, RngStream, as_generator, uniform_frequencies
from .kernels import (
    CgaConfig,
    KernelConfig,
    RunOutcome,
    drive_run,
    evals_per_generation,
    kernel_step,
    new_run_state,
)
from .objectives import NOISELESS, NoiseModel, Objective

__all__ = [
    "SmartRestartConfig",
    "RestartLeg",
    "SchedulerOutcome",
    "AhConfig",
    "restart_parameter",
    "leg_budget",
    "smart_restart_run",
    "parallel_run",
    "hl_trigger",
    "ah_trigger",
    "triggered_restart_run",
    "restart_runtime_bound",
    "recommended_budget_factor",
]


@dataclass(frozen=True)
class SmartRestartConfig:
    """Hyperparameters of the budgeted restart scheme.

    ``update_factor`` U > 1 multiplies the kernel parameter between legs;
    ``budget_factor`` b > 0 gives each leg with parameter mu a budget of
    ceil(b * mu^2) fitness evaluations.
    """

    update_factor: float = 2.0
    budget_factor: float = 16.0
    initial_parameter: int = 2
    global_eval_cap: int | None = None

    def __post_init__(self) -> None:
        if self.update_factor <= 1.0:
            raise ValueError("update factor must be > 1")
        if self.budget_factor <= 0.0:
            raise ValueError("budget factor must be > 0")
        if self.initial_parameter < 2:
            raise ValueError("initial parameter must be >= 2")


def restart_parameter(config: SmartRestartConfig, leg_index: int) -> int:
    """Parameter of leg l: nearest integer to 2 U^(l-1), never below 2.

    Strict growth is enforced so that legs make progress even for update
    factors close to 1, where nearest-integer rounding alone would repeat a
    value.  For U >= sqrt(2) the rounding is already strictly increasing.
    """
    parameter = config.initial_parameter
    for leg in range(2, leg_index + 1):
        raw = config.initial_parameter * config.update_factor ** (leg - 1)
        parameter = max(parameter + 1, round(raw))
    return parameter


def leg_budget(config: SmartRestartConfig, parameter: int) -> int:
    """Evaluation budget of a leg: ceil(b * mu^2)."""
    return math.ceil(config.budget_factor * parameter * parameter)


@dataclass
class RestartLeg:
    """One scheduler leg (or one parallel process): what ran and what it spent."""

    index: int
    parameter: int
    budget: int | None
    evaluations: int
    generations: int
    success: bool


@dataclass(frozen=True)
class SchedulerOutcome:
    run: RunOutcome
    legs: list[RestartLeg]


def _assemble(
    success: bool,
    total_evals: int,
    total_gens: int,
    best: float,
    final_p: np.ndarray,
    legs: list[RestartLeg],
) -> SchedulerOutcome:
    return SchedulerOutcome(
        RunOutcome(success, total_evals, total_gens, best, final_p), legs
    )


def smart_restart_run(
    kernel_factory: Callable[[int], KernelConfig],
    objective: Objective,
    noise: NoiseModel | None = None,
    config: SmartRestartConfig | None = None,
    *,
    rng: "RngStream | np.random.Generator",
) -> SchedulerOutcome:
    """Budgeted restarts: leg l runs the kernel with parameter mu_l = 2 U^(l-1)
    from a fresh uniform model for at most ceil(b mu_l^2) evaluations.

    Stops at the first true-optimum sample, or (failure) when the global cap
    blocks every further generation.  Without a global cap the loop only ends
    on success.  cGA legs start a generation whenever leg budget remains (the
    two evaluations are atomic); sample-population legs only start generations
    that fit their remaining budget.
    """
    config = SmartRestartConfig() if config is None else config
    noise = NOISELESS if noise is None else noise
    gen = as_generator(rng)
    cap = config.global_eval_cap
    legs: list[RestartLeg] = []
    total_evals = 0
    total_gens = 0
    best = -math.inf
    last_p = uniform_frequencies(objective.dimension)
    leg_index = 0
    while True:
        leg_index += 1
        parameter = restart_parameter(config, leg_index)
        budget = leg_budget(config, parameter)
        kconfig = kernel_factory(parameter)
        cost = evals_per_generation(kconfig)
        lenient = isinstance(kconfig, CgaConfig)

        if cap is not None and cap - total_evals < cost:
            # the global cap blocks this and (parameters only grow) every later leg
            return _assemble(False, total_evals, total_gens, best, last_p, legs)

        remaining = None if cap is None else cap - total_evals
        if remaining is None:
            local_cap, local_lenient = budget, lenient
        elif budget < remaining:
            local_cap, local_lenient = budget, lenient
        else:
            local_cap, local_lenient = remaining, False

        state = new_run_state(kconfig, objective, gen)
        drive_run(
            state,
            kconfig,
            objective,
            noise,
            max_evals=local_cap,
            lenient=local_lenient,
        )
        legs.append(
            RestartLeg(
                leg_index, parameter, budget, state.counter.count, state.generation, state.success
            )
        )
        total_evals += state.counter.count
        total_gens += state.generation
        best = max(best, state.best_true_fitness)
        last_p = state.p
        if state.success:
            return _assemble(True, total_evals, total_gens, best, state.p, legs)


def parallel_run(
    objective: Objective,
    noise: NoiseModel | None = None,
    *,
    rng: RngStream,
    global_eval_cap: int | None = None,
    margins: MarginPolicy = MarginPolicy.STANDARD,
) -> SchedulerOutcome:
    """The parameter-doubling parallel cGA scheme, executed in its canonical
    sequential interleaving.

    Round 1 starts process 1 for one generation; in round l >= 2 the running
    processes 1 .. l-1 each advance another 2^(l-1) generations (one process
    after the other), then process l starts with population size 2^(l-1) and
    runs 2^l - 1 generations.  The first true-optimum sample stops everything;
    total evaluations are counted at exactly that point in the interleaving.

    Process 1's nominal population size of 1 would make the cGA jump straight
    to the margins, so it runs with the smallest meaningful size mu = 2.  Each
    process owns an independent child stream of ``rng``.
    """
    noise = NOISELESS if noise is None else noise
    if not isinstance(rng, RngStream):
        raise TypeError("parallel_run needs an RngStream so each process gets its own child stream")
    cap = global_eval_cap
    processes: list[dict] = []
    total_evals = 0
    total_gens = 0
    best = -math.inf

    def spent() -> int:
        return sum(proc["state"].counter.count for proc in processes)

    def run_chunk(proc: dict, generations: int) -> bool:
        """Advance one process; True when the run (whole scheme) must stop."""
        nonlocal best
        state = proc["state"]
        remaining = None if cap is None else cap - spent()
        if remaining is not None and remaining < 2:
            return True
        limit = None if remaining is None else state.counter.count + remaining
        drive_run(
            state,
            proc["config"],
            objective,
            noise,
            max_evals=limit,
            max_generations=state.generation + generations,
        )
        best = max(best, state.best_true_fitness)
        if state.success:
            return True
        return cap is not None and cap - spent() < 2

    def start_process(index: int) -> dict:
        mu = max(2, 2 ** (index - 1))
        proc = {
            "index": index,
            "mu": mu,
            "config": CgaConfig(mu, margins),
            "state": new_run_state(CgaConfig(mu, margins), objective, rng.child(index)),
        }
        processes.append(proc)
        return proc

    stopped = False
    round_index = 1
    proc = start_process(1)
    stopped = run_chunk(proc, 1)
    while not stopped:
        round_index += 1
        for proc in list(processes):
            if run_chunk(proc, 2 ** (round_index - 1)):
                stopped = True
                break
        if stopped:
            break
        new_proc = start_process(round_index)
        stopped = run_chunk(new_proc, 2**round_index - 1)

    legs = [
        RestartLeg(
            proc["index"],
            proc["mu"],
            None,
            proc["state"].counter.count,
            proc["state"].generation,
            proc["state"].success,
        )
        for proc in processes
    ]
    total_evals = spent()
    total_gens = sum(proc["state"].generation for proc in processes)
    winner = next((proc for proc in processes if proc["state"].success), None)
    success = winner is not None
    final_p = winner["state"].p if success else processes[-1]["state"].p
    return _assemble(success, total_evals, total_gens, best, final_p, legs)


def hl_trigger(p: np.ndarray, margins: MarginPolicy, n: int) -> bool:
    """Restart signal: the whole model has converged to the boundary region.

    With margins: every frequency sits exactly at 1/n or 1 - 1/n (clamping
    writes those constants, so float equality is exact).  Without margins the
    frequencies never reach 0/1, so the criterion is that every entry lies in
    (0, 1/n^2) or (1 - 1/n^2, 1).
    """
    if margins is MarginPolicy.STANDARD:
        lo, hi = margins.bounds(n)
        return bool(np.all((p == lo) | (p == hi)))
    edge = 1.0 / (n * n)
    return bool(np.all(((p > 0.0) & (p < edge)) | ((p > 1.0 - edge) & (p < 1.0))))


@dataclass(frozen=True)
class AhConfig:
    """Window length and threshold for the fitness-stagnation trigger."""

    memory: int
    threshold: float = 1e-12

    def __post_init__(self) -> None:
        if self.memory < 11:
            raise ValueError("window memory is 10 + ceil(30 n / lam) >= 11")
        if self.threshold <= 0.0:
            raise ValueError("threshold must be positive")

    @classmethod
    def for_problem(cls, n: int, lam: int, threshold: float = 1e-12) -> "AhConfig":
        return cls(memory=10 + (-(-30 * n) // lam), threshold=threshold)


def ah_trigger(best_history: Sequence[float], current_fitnesses, config: AhConfig) -> bool:
    """Restart signal: the best-fitness window is flat.

    False during warm-up (fewer than ``memory`` recorded generations).  Fires
    when the window of per-generation best values has range zero, or when the
    window united with the current generation's fitness values has range below
    the threshold.
    """
    if len(best_history) < config.memory:
        return False
    hist = np.asarray(best_history, dtype=np.float64)
    if hist.max() - hist.min() == 0.0:
        return True
    current = np.asarray(current_fitnesses, dtype=np.float64)
    lo = min(hist.min(), current.min())
    hi = max(hist.max(), current.max())
    return bool(hi - lo < config.threshold)


def triggered_restart_run(
    kernel_factory: Callable[[int], KernelConfig],
    trigger: str,
    objective: Objective,
    noise: NoiseModel | None = None,
    *,
    update_factor: float = 2.0,
    rng: "RngStream | np.random.Generator",
    global_eval_cap: int | None = None,
    ah_threshold: float = 1e-12,
) -> SchedulerOutcome:
    """Restarts driven by a convergence trigger instead of a fixed budget.

    Leg l runs the kernel with parameter 2 U^(l-1) for as long as it takes
    until the chosen trigger fires, then restarts from a fresh model with the
    parameter multiplied by U.  ``trigger`` is "hl" (model at the margins) or
    "ah" (flat best-fitness window, memory 10 + ceil(30 n / lam) where lam is
    the per-generation sample count).  Stops at the first true optimum or when
    the global cap blocks the next generation.
    """
    if trigger not in ("hl", "ah"):
        raise ValueError("trigger must be 'hl' or 'ah'")
    noise = NOISELESS if noise is None else noise
    gen = as_generator(rng)
    schedule = SmartRestartConfig(update_factor=update_factor, budget_factor=1.0)
    cap = global_eval_cap
    n = objective.dimension
    legs: list[RestartLeg] = []
    total_evals = 0
    total_gens = 0
    best = -math.inf
    leg_index = 0
    while True:
        leg_index += 1
        parameter = restart_parameter(schedule, leg_index)
        kconfig = kernel_factory(parameter)
        cost = evals_per_generation(kconfig)
        ah_config = AhConfig.for_problem(n, cost, ah_threshold)
        history: deque[float] = deque(maxlen=ah_config.memory)
        state = new_run_state(kconfig, objective, gen)

        fired = False
        while True:
            if cap is not None and total_evals + state.counter.count + cost > cap:
                legs.append(
                    RestartLeg(leg_index, parameter, None, state.counter.count,
                               state.generation, False)
                )
                total_evals += state.counter.count
                total_gens += state.generation
                best = max(best, state.best_true_fitness)
                return _assemble(False, total_evals, total_gens, best, state.p, legs)
            kernel_step(state, kconfig, objective, noise)
            if state.success:
                legs.append(
                    RestartLeg(leg_index, parameter, None, state.counter.count,
                               state.generation, True)
                )
                total_evals += state.counter.count
                total_gens += state.generation
                best = max(best, state.best_true_fitness)
                return _assemble(True, total_evals, total_gens, best, state.p, legs)
            observed = state.last_observed_fitness
            if trigger == "hl":
                fired = hl_trigger(state.p, kconfig.margins, n)
            else:
                history.append(float(observed.max()))
                fired = ah_trigger(history, observed, ah_config)
            if fired:
                break

        legs.append(
            RestartLeg(leg_index, parameter, None, state.counter.count, state.generation, False)
        )
        total_evals += state.counter.count
        total_gens += state.generation
        best = max(best, state.best_true_fitness)


def restart_runtime_bound(
    p: float,
    update_factor: float,
    budget_factor: float,
    mu_tilde: float,
    time_factor: float,
) -> float:
    """Expected-evaluations upper bound for the budgeted restart scheme.

    Assumes the kernel solves the problem within mu * T evaluations with
    probability at least p for every parameter mu >= mu_tilde.  Requires
    p > 1 - 1/U^2 (otherwise the geometric series behind the bound diverges).
    """
    U = update_factor
    b = budget_factor
    if U <= 1.0:
        raise ValueError("update factor must be > 1")
    if b <= 0.0:
        raise ValueError("budget factor must be > 0")
    if mu_tilde <= 0.0 or time_factor < 0.0:
        raise ValueError("mu_tilde must be positive and time_factor non-negative")
    U2 = U * U
    if not (1.0 - 1.0 / U2) < p <= 1.0:
        raise ValueError("requires success probability p in (1 - 1/U^2, 1]")
    q = 1.0 - p
    coefficient = U2 / (U2 - 1.0) + q * U2 / (1.0 - q * U2)
    tail = p * U / (1.0 - q * U)
    peak = max(b * mu_tilde * mu_tilde, time_factor * time_factor / b)
    return coefficient * peak + tail * mu_tilde * time_factor


def recommended_budget_factor(
    kernel: str,
    n: int,
    eta: float | None = None,
    rho: float | None = None,
    variant: str = "aggressive",
) -> float:
    """Budget factors matched to each kernel's drift time scale.

    cGA: 16 (aggressive, detects drift with probability >= 1/2) or 1/ln n
    (conservative, small enough for a union bound over all n frequencies).
    PBIL: 96 eta / rho^2 and 6 eta / (rho^2 ln n); the UMDA is the rho = 1
    special case.
    """
    kernel = kernel.lower()
    if variant not in ("aggressive", "conservative"):
        raise ValueError("variant must be 'aggressive' or 'conservative'")
    if kernel == "cga":
        return 16.0 if variant == "aggressive" else 1.0 / math.log(n)
    if kernel == "umda":
        rho = 1.0
    elif kernel != "pbil":
        raise ValueError(f"unknown kernel '{kernel}'")
    if eta is None or rho is None:
        raise ValueError("PBIL budget factors need eta and rho")
    if variant == "aggressive":
        return 96.0 * eta / (rho * rho)
    return 6.0 * eta / (rho * rho * math.log(n))
