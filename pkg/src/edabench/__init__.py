"""Univariate EDAs (cGA, UMDA, PBIL), drift-aware restart schedulers, and a
reproducible pseudo-Boolean / max-cut benchmark harness."""

from .core import (
    BudgetExhausted,
    EvaluationCounter,
    MarginPolicy,
    RngStream,
    clamp_to_margins,
    sample_bitstring,
    uniform_frequencies,
)
from .graphs import (
    BipartitionConstraint,
    PlantedInstance,
    WeightedGraph,
    bipartition_objective,
    constrained_partition_sample,
    cut_value,
    exhaustive_max_cut,
    load_instance,
    maxcut_objective,
    planted_maxcut,
    save_instance,
)
from .harness import (
    AlgorithmSpec,
    ConfigError,
    ExperimentSpec,
    ObjectiveSpec,
    RunRecord,
    SummaryRow,
    SweepSpec,
    run_experiment,
    run_sweep,
    summarize,
    write_runs_csv,
    write_summary_csv,
)
from .kernels import (
    CgaConfig,
    PbilConfig,
    RunOutcome,
    RunState,
    UmdaConfig,
    cga_step,
    cga_update,
    drive_run,
    kernel_step,
    neutral_absorption_generations,
    new_run_state,
    pbil_step,
    pbil_update,
    run_kernel,
    umda_step,
)
from .objectives import (
    NoiseModel,
    Objective,
    constant_objective,
    dlb,
    dlb_objective,
    jump,
    jump_objective,
    leadingones,
    leadingones_objective,
    noisy_evaluate,
    onemax,
    onemax_objective,
)
from .restarts import (
    AhConfig,
    RestartLeg,
    SchedulerOutcome,
    SmartRestartConfig,
    ah_trigger,
    hl_trigger,
    leg_budget,
    parallel_run,
    recommended_budget_factor,
    restart_parameter,
    restart_runtime_bound,
    smart_restart_run,
    triggered_restart_run,
)

__version__ = "0.1.0"
