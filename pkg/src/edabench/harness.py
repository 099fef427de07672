"""Experiment configuration, seeded repetition sweeps, statistics, CSV output.

An experiment is (objective, algorithm, repetitions, base seed, evaluation
cap).  Repetition i draws all of its randomness from the stream
(base_seed, i), so results are reproducible regardless of how many worker
threads execute the repetitions; records are assembled in seed order before
writing.  Runs that hit the cap are censored and recorded at the cap value.

Per-run CSV columns:   axis,seed,success,evaluations,generations
Summary CSV columns:   axis,median,q1,q3,successes,censored
(medians and quartiles by the nearest-rank method, censored values included)
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .core import MarginPolicy, RngStream
from .graphs import BipartitionConstraint, bipartition_objective, load_instance, maxcut_objective
from .kernels import (
    CgaConfig,
    PbilConfig,
    UmdaConfig,
    evals_per_generation,
    run_kernel,
)
from .objectives import (
    NoiseModel,
    Objective,
    dlb_objective,
    jump_objective,
    leadingones_objective,
    onemax_objective,
)
from .restarts import (
    SmartRestartConfig,
    parallel_run,
    recommended_budget_factor,
    smart_restart_run,
    triggered_restart_run,
)

__all__ = [
    "ConfigError",
    "ObjectiveSpec",
    "AlgorithmSpec",
    "ExperimentSpec",
    "SweepSpec",
    "RunRecord",
    "SummaryRow",
    "build_objective",
    "default_generation_cap",
    "default_eval_cap",
    "run_experiment",
    "run_sweep",
    "summarize",
    "nearest_rank",
    "write_runs_csv",
    "write_summary_csv",
    "RUNS_HEADER",
    "SUMMARY_HEADER",
]

RUNS_HEADER = ["axis", "seed", "success", "evaluations", "generations"]
SUMMARY_HEADER = ["axis", "median", "q1", "q3", "successes", "censored"]

KERNEL_KINDS = ("cga", "umda", "pbil")
SCHEDULER_KINDS = ("smart-restart", "parallel-run", "hl-restart", "ah-restart")


class ConfigError(ValueError):
    """A malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ObjectiveSpec:
    name: str
    n: int = 0
    k: int | None = None
    sigma2: float = 0.0
    instance: str | None = None
    ones_count: int | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ObjectiveSpec":
        if not isinstance(data, dict) or "name" not in data:
            raise ConfigError("objective section needs at least a 'name'")
        name = str(data["name"]).lower()
        if name in ("onemax", "leadingones", "jump", "dlb"):
            if "n" not in data:
                raise ConfigError(f"objective '{name}' needs a dimension 'n'")
        elif name in ("maxcut", "bipartition"):
            if "instance" not in data:
                raise ConfigError(f"objective '{name}' needs an 'instance' file path")
        else:
            raise ConfigError(f"unknown objective '{name}'")
        if name == "jump" and "k" not in data:
            raise ConfigError("objective 'jump' needs a jump size 'k'")
        if name == "bipartition" and "ones_count" not in data:
            raise ConfigError("objective 'bipartition' needs 'ones_count'")
        return cls(
            name=name,
            n=int(data.get("n", 0)),
            k=int(data["k"]) if "k" in data else None,
            sigma2=float(data.get("sigma2", 0.0)),
            instance=data.get("instance"),
            ones_count=int(data["ones_count"]) if "ones_count" in data else None,
        )


@dataclass(frozen=True)
class AlgorithmSpec:
    kind: str
    mu: int | None = None
    lam: int | None = None
    eta: float | None = None
    rho: float | None = None
    margins: str = "standard"
    kernel: str | None = None
    update_factor: float = 2.0
    budget_factor: "float | str" = 16.0
    trigger_threshold: float = 1e-12

    @classmethod
    def from_dict(cls, data: dict) -> "AlgorithmSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise ConfigError("algorithm section needs a 'kind'")
        kind = str(data["kind"]).lower()
        if kind not in KERNEL_KINDS + SCHEDULER_KINDS:
            raise ConfigError(f"unknown algorithm kind '{kind}'")
        spec = cls(
            kind=kind,
            mu=int(data["mu"]) if "mu" in data else None,
            lam=int(data["lambda"]) if "lambda" in data else None,
            eta=float(data["eta"]) if "eta" in data else None,
            rho=float(data["rho"]) if "rho" in data else None,
            margins=str(data.get("margins", "standard")).lower(),
            kernel=str(data["kernel"]).lower() if "kernel" in data else None,
            update_factor=float(data.get("update_factor", 2.0)),
            budget_factor=data.get("budget_factor", 16.0),
            trigger_threshold=float(data.get("trigger_threshold", 1e-12)),
        )
        spec.validate()
        return spec

    def validate(self) -> None:
        if self.margins not in ("standard", "none"):
            raise ConfigError(f"unknown margins policy '{self.margins}'")
        if self.kind == "cga" and self.mu is None:
            raise ConfigError("cga needs 'mu'")
        if self.kind == "umda" and (self.lam is None or (self.mu is None and self.eta is None)):
            raise ConfigError("umda needs 'lambda' and 'mu' (or 'eta')")
        if self.kind == "pbil" and (self.lam is None or self.eta is None or self.rho is None):
            raise ConfigError("pbil needs 'lambda', 'eta' and 'rho'")
        if self.kind in SCHEDULER_KINDS and self.kind != "parallel-run":
            if self.kernel not in KERNEL_KINDS:
                raise ConfigError(f"'{self.kind}' needs a 'kernel' of {KERNEL_KINDS}")
            if self.kernel == "pbil" and (self.eta is None or self.rho is None):
                raise ConfigError("pbil kernel needs 'eta' and 'rho'")
            if self.kernel == "umda" and self.eta is None:
                raise ConfigError("umda kernel needs 'eta' to derive mu from lambda")
        if isinstance(self.budget_factor, str) and self.budget_factor not in (
            "aggressive",
            "conservative",
        ):
            raise ConfigError("budget_factor must be a number, 'aggressive' or 'conservative'")

    @property
    def margin_policy(self) -> MarginPolicy:
        return MarginPolicy.STANDARD if self.margins == "standard" else MarginPolicy.NONE

    def axis_value(self):
        if self.kind == "cga":
            return self.mu
        if self.kind in ("umda", "pbil"):
            return self.lam
        return self.kind


@dataclass(frozen=True)
class ExperimentSpec:
    objective: ObjectiveSpec
    algorithm: AlgorithmSpec
    repetitions: int = 20
    base_seed: int = 1
    eval_cap: "int | None | str" = "auto"
    workers: int = 1
    axis: "str | float | int | None" = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        if not isinstance(data, dict):
            raise ConfigError("experiment config must be a JSON object")
        for key in ("objective", "algorithm"):
            if key not in data:
                raise ConfigError(f"experiment config needs an '{key}' section")
        spec = cls(
            objective=ObjectiveSpec.from_dict(data["objective"]),
            algorithm=AlgorithmSpec.from_dict(data["algorithm"]),
            repetitions=int(data.get("repetitions", 20)),
            base_seed=int(data.get("base_seed", 1)),
            eval_cap=data.get("eval_cap", "auto"),
            workers=int(data.get("workers", 1)),
            axis=data.get("axis"),
        )
        if spec.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if spec.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not (spec.eval_cap is None or spec.eval_cap == "auto" or isinstance(spec.eval_cap, int)):
            raise ConfigError("eval_cap must be an integer, null, or 'auto'")
        return spec

    def axis_label(self):
        return self.axis if self.axis is not None else self.algorithm.axis_value()


@dataclass(frozen=True)
class SweepSpec:
    template: ExperimentSpec
    parameter: str
    values: tuple

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        if not isinstance(data, dict) or "sweep" not in data:
            raise ConfigError("sweep config needs a 'sweep' section")
        sweep = data["sweep"]
        if "parameter" not in sweep or "values" not in sweep:
            raise ConfigError("sweep section needs 'parameter' and 'values'")
        values = tuple(sweep["values"])
        if not values:
            raise ConfigError("sweep values must be non-empty")
        if len(set(values)) != len(values):
            raise ConfigError("sweep values must be distinct")
        if any(not math.isfinite(float(v)) for v in values):
            raise ConfigError("sweep values must be finite")
        if list(values) != sorted(values):
            raise ConfigError("sweep values must be sorted")
        template = {k: v for k, v in data.items() if k != "sweep"}
        return cls(
            template=ExperimentSpec.from_dict(template),
            parameter=str(sweep["parameter"]),
            values=values,
        )

    def points(self) -> list[ExperimentSpec]:
        field_map = {"lambda": "lam"}
        name = field_map.get(self.parameter, self.parameter)
        specs = []
        for value in self.values:
            try:
                algo = replace(self.template.algorithm, **{name: value})
            except TypeError as exc:
                raise ConfigError(f"unknown sweep parameter '{self.parameter}'") from exc
            algo.validate()
            specs.append(replace(self.template, algorithm=algo, axis=value))
        return specs


@dataclass(frozen=True)
class RunRecord:
    axis: "str | float | int"
    seed: int
    success: bool
    evaluations: int
    generations: int
    wall_time: float


@dataclass(frozen=True)
class SummaryRow:
    axis: "str | float | int"
    median: float
    q1: float
    q3: float
    successes: int
    censored: int


def build_objective(spec: ObjectiveSpec) -> tuple[Objective, NoiseModel]:
    noise = NoiseModel(spec.sigma2)
    if spec.name == "onemax":
        return onemax_objective(spec.n), noise
    if spec.name == "leadingones":
        return leadingones_objective(spec.n), noise
    if spec.name == "jump":
        return jump_objective(spec.n, spec.k), noise
    if spec.name == "dlb":
        return dlb_objective(spec.n), noise
    instance = load_instance(spec.instance)
    if spec.name == "maxcut":
        return maxcut_objective(instance), noise
    return bipartition_objective(instance, BipartitionConstraint(spec.ones_count)), noise


def default_generation_cap(name: str, n: int, k: int | None = None) -> int:
    """Generation caps used for the capped single-kernel experiments."""
    if name == "onemax":
        return math.ceil(n**4 * math.log(n))
    if name == "leadingones":
        return n**5
    if name == "jump":
        return n ** (k // 2) if k % 2 == 0 else math.ceil(n ** (k / 2))
    if name == "dlb":
        return 10 * n**5
    raise ConfigError(f"no generation-cap formula for objective '{name}'")


def default_eval_cap(objective: ObjectiveSpec, per_generation_evals: int) -> int:
    """Evaluation caps: generation formulas times per-generation cost for the
    benchmarks; fixed evaluation counts for the combinatorial problems."""
    if objective.name == "maxcut":
        return 15_000_000
    if objective.name == "bipartition":
        return 3_000_000
    return default_generation_cap(objective.name, objective.n, objective.k) * per_generation_evals


def _static_config(algo: AlgorithmSpec):
    margins = algo.margin_policy
    if algo.kind == "cga":
        return CgaConfig(algo.mu, margins)
    if algo.kind == "umda":
        mu = algo.mu if algo.mu is not None else max(1, math.ceil(algo.eta * algo.lam))
        return UmdaConfig(algo.lam, mu, margins)
    return PbilConfig(algo.lam, algo.eta, algo.rho, margins)


def _kernel_factory(algo: AlgorithmSpec):
    margins = algo.margin_policy
    if algo.kernel == "cga":
        return lambda mu: CgaConfig(mu, margins)
    if algo.kernel == "umda":
        eta = algo.eta
        return lambda lam: UmdaConfig(lam, max(1, math.ceil(eta * lam)), margins)
    eta, rho = algo.eta, algo.rho
    return lambda lam: PbilConfig(lam, eta, rho, margins)


def _resolve_budget_factor(spec: ExperimentSpec) -> float:
    b = spec.algorithm.budget_factor
    if isinstance(b, str):
        return recommended_budget_factor(
            spec.algorithm.kernel,
            spec.objective.n or build_objective(spec.objective)[0].dimension,
            eta=spec.algorithm.eta,
            rho=spec.algorithm.rho,
            variant=b,
        )
    return float(b)


def resolve_eval_cap(spec: ExperimentSpec) -> int | None:
    if spec.eval_cap is None:
        return None
    if spec.eval_cap != "auto":
        return int(spec.eval_cap)
    algo = spec.algorithm
    if algo.kind in KERNEL_KINDS:
        cost = evals_per_generation(_static_config(algo))
    else:
        cost = 2  # schedulers vary their population size; per-generation base cost
    return default_eval_cap(spec.objective, cost)


def execute_run(
    spec: ExperimentSpec,
    objective: Objective,
    noise: NoiseModel,
    eval_cap: int | None,
    rep: int,
):
    stream = RngStream(spec.base_seed, (rep,))
    algo = spec.algorithm
    start = time.perf_counter()
    if algo.kind in KERNEL_KINDS:
        outcome = run_kernel(
            _static_config(algo), objective, noise, eval_cap=eval_cap, rng=stream
        )
    elif algo.kind == "smart-restart":
        config = SmartRestartConfig(
            update_factor=algo.update_factor,
            budget_factor=_resolve_budget_factor(spec),
            global_eval_cap=eval_cap,
        )
        outcome = smart_restart_run(
            _kernel_factory(algo), objective, noise, config, rng=stream
        ).run
    elif algo.kind == "parallel-run":
        outcome = parallel_run(
            objective, noise, rng=stream, global_eval_cap=eval_cap, margins=algo.margin_policy
        ).run
    else:
        trigger = "hl" if algo.kind == "hl-restart" else "ah"
        outcome = triggered_restart_run(
            _kernel_factory(algo),
            trigger,
            objective,
            noise,
            update_factor=algo.update_factor,
            rng=stream,
            global_eval_cap=eval_cap,
            ah_threshold=algo.trigger_threshold,
        ).run
    wall = time.perf_counter() - start
    evaluations = outcome.evaluations
    if not outcome.success and eval_cap is not None:
        evaluations = eval_cap  # censored runs are counted at the cap
    return RunRecord(
        axis=spec.axis_label(),
        seed=rep,
        success=outcome.success,
        evaluations=evaluations,
        generations=outcome.generations,
        wall_time=wall,
    )


def run_experiment(spec: ExperimentSpec) -> list[RunRecord]:
    """Execute all repetitions of one experiment; records come back seed-sorted.

    Repetition i uses stream (base_seed, i), so output is identical whether the
    repetitions run serially or on a worker pool.
    """
    objective, noise = build_objective(spec.objective)
    eval_cap = resolve_eval_cap(spec)
    reps = range(1, spec.repetitions + 1)
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            records = list(
                pool.map(lambda r: execute_run(spec, objective, noise, eval_cap, r), reps)
            )
    else:
        records = [execute_run(spec, objective, noise, eval_cap, r) for r in reps]
    return sorted(records, key=lambda rec: rec.seed)


def run_sweep(sweep: SweepSpec) -> tuple[list[RunRecord], list[SummaryRow]]:
    records: list[RunRecord] = []
    for point in sweep.points():
        records.extend(run_experiment(point))
    return records, summarize(records)


def nearest_rank(sorted_values, q: float) -> float:
    """Nearest-rank quantile: the ceil(q*N)-th smallest value."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("cannot take a quantile of an empty group")
    rank = math.ceil(q * n)
    return sorted_values[max(rank, 1) - 1]


def summarize(records: list[RunRecord]) -> list[SummaryRow]:
    """Median and quartiles of the evaluation counts per axis value.

    Censored runs enter at their recorded (cap) value.  Axis groups keep their
    order of first appearance.
    """
    groups: dict = {}
    for rec in records:
        groups.setdefault(rec.axis, []).append(rec)
    rows = []
    for axis, recs in groups.items():
        values = sorted(rec.evaluations for rec in recs)
        successes = sum(rec.success for rec in recs)
        rows.append(
            SummaryRow(
                axis=axis,
                median=nearest_rank(values, 0.5),
                q1=nearest_rank(values, 0.25),
                q3=nearest_rank(values, 0.75),
                successes=successes,
                censored=len(recs) - successes,
            )
        )
    return rows


def _format_axis(axis) -> str:
    if isinstance(axis, float) and axis.is_integer():
        return str(int(axis))
    return str(axis)


def write_runs_csv(records: list[RunRecord], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(RUNS_HEADER)
        for rec in records:
            writer.writerow(
                [
                    _format_axis(rec.axis),
                    rec.seed,
                    int(rec.success),
                    rec.evaluations,
                    rec.generations,
                ]
            )


def write_summary_csv(rows: list[SummaryRow], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            writer.writerow(
                [
                    _format_axis(row.axis),
                    row.median,
                    row.q1,
                    row.q3,
                    row.successes,
                    row.censored,
                ]
            )
