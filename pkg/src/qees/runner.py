"""The ES / E-ES / QE-ES generation loop, run bookkeeping and outputs.

Seeds: every random draw of a run derives from ``run_seed`` through
``derive_seed``, a numpy SeedSequence hash of integer keys:

* generation g samples its offsets with ``derive_seed(run_seed, 1, g)``;
* sample i of generation g uses episode seed ``derive_seed(run_seed, 2, g, i)``;
* the initial center uses ``init_seed`` or, if unset, ``derive_seed(run_seed, 3)``.

Nothing else carries RNG state, so resuming from a checkpoint only needs the
generation index.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from . import checkpoint as ckpt_io
from .checkpoint import Checkpoint
from .config import RunConfig, dump_config
from .core import RECORD_COLUMNS, GenerationRecord, ParameterVector, SearchDistribution
from .environment import (
    N_DIRECTIONS,
    EnvironmentSpec,
    Variant,
    goal_index_for_seed,
    run_batch,
    run_episode,
    write_trajectory_csv,
)
from .errors import ConfigError, DimensionMismatch, QEESError, RunFailure
from .estimator import estimate_gradient, evolvability_scores, weights_from_objectives
from .optimizer import AdamState, adam_step
from .policy import PolicySpec, init_params, param_count
from .sampling import NoiseTable, build_noise_table, realize_population, sample_generation

log = logging.getLogger(__name__)

SAMPLE_TAG = 1
EPISODE_TAG = 2
INIT_TAG = 3

BEHAVIOR_COLUMNS = ("sample_index", "fitness", "final_x", "final_y")


def derive_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


def episode_seed(run_seed: int, generation: int, sample_index: int) -> int:
    return derive_seed(run_seed, EPISODE_TAG, generation, sample_index)


class Task(Protocol):
    dim: int
    bc_dim: int

    def initial_center(self, seed: int) -> np.ndarray: ...

    def evaluate(self, thetas: np.ndarray, episode_seeds, workers: int = 1) -> tuple[np.ndarray, np.ndarray]: ...

    def evaluate_center(self, theta: np.ndarray) -> tuple[float, np.ndarray]: ...


class LocomotionTask:
    """Adapts the point-mass environment and MLP policy to the runner."""

    def __init__(self, env: EnvironmentSpec, policy: PolicySpec):
        if policy.obs_dim != env.obs_dim or policy.action_dim != env.action_dim:
            raise DimensionMismatch("policy does not match environment observation/action sizes")
        self.env = env
        self.policy = policy
        self.dim = param_count(policy)
        self.bc_dim = env.bc_dim

    def initial_center(self, seed: int) -> np.ndarray:
        return init_params(self.policy, seed).values.copy()

    def _goals(self, episode_seeds) -> np.ndarray | None:
        if self.env.variant is not Variant.DIRECTIONAL:
            return None
        return np.array([goal_index_for_seed(s) for s in episode_seeds], dtype=np.int64)

    def evaluate(self, thetas: np.ndarray, episode_seeds, workers: int = 1):
        goals = self._goals(episode_seeds)
        n = thetas.shape[0]
        if workers <= 1 or n < 2 * workers:
            return run_batch(thetas, self.env, self.policy, goals)
        # Each row is independent; chunk boundaries cannot change any result.
        bounds = np.linspace(0, n, workers + 1).astype(int)
        chunks = [(bounds[k], bounds[k + 1]) for k in range(workers) if bounds[k + 1] > bounds[k]]
        fitness = np.empty(n)
        behaviors = np.empty((n, self.bc_dim))

        def work(span):
            lo, hi = span
            g = None if goals is None else goals[lo:hi]
            return lo, hi, run_batch(thetas[lo:hi], self.env, self.policy, g)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for lo, hi, (f, b) in pool.map(work, chunks):
                fitness[lo:hi] = f
                behaviors[lo:hi] = b
        return fitness, behaviors

    def evaluate_center(self, theta: np.ndarray):
        """Center fitness; Directional averages all 8 goals and reports goal 0's behavior."""
        if self.env.variant is Variant.DIRECTIONAL:
            thetas = np.repeat(theta[None, :], N_DIRECTIONS, axis=0)
            f, b = run_batch(thetas, self.env, self.policy, np.arange(N_DIRECTIONS))
            return float(np.mean(f)), b[0]
        res = run_episode(theta, self.env, self.policy)
        return res.fitness, res.behavior.coords.copy()


@dataclass
class RunContext:
    config: RunConfig
    task: Task
    table: NoiseTable
    center: np.ndarray
    adam: AdamState
    generation: int = 0
    last_fitness: np.ndarray | None = None
    last_behaviors: np.ndarray | None = None
    episodes_evaluated: int = 0
    # when False the center is not evaluated; updates are unaffected
    evaluate_center: bool = True

    @property
    def run_seed(self) -> int:
        return self.config.run_seed

    def checkpoint(self) -> Checkpoint:
        cfg = self.config
        return Checkpoint(
            generation=self.generation,
            center=ParameterVector(self.center),
            adam=self.adam,
            config_digest=cfg.digest(),
            counters={
                "run_seed": cfg.run_seed,
                "table_seed": cfg.table_seed,
                "init_seed": resolved_init_seed(cfg),
                "generations_sampled": self.generation,
                "episodes_evaluated": self.episodes_evaluated,
            },
        )


@dataclass
class GenerationOutput:
    """Everything one generation computed, for inspection and tests."""

    record: GenerationRecord
    fitness: np.ndarray
    behaviors: np.ndarray
    evolvability: np.ndarray
    weights: np.ndarray
    gradient: np.ndarray


def resolved_init_seed(cfg: RunConfig) -> int:
    return cfg.init_seed if cfg.init_seed is not None else derive_seed(cfg.run_seed, INIT_TAG)


def build_task(cfg: RunConfig) -> LocomotionTask:
    return LocomotionTask(cfg.environment, cfg.policy)


def make_context(cfg: RunConfig, task: Task | None = None, table: NoiseTable | None = None) -> RunContext:
    task = task or build_task(cfg)
    if cfg.table_length < task.dim + cfg.population:
        raise ConfigError(
            f"noise table length {cfg.table_length} < dim {task.dim} + population {cfg.population}",
            field="noise.length",
        )
    if table is None:
        table = build_noise_table(cfg.table_seed, cfg.table_length)
    elif table.seed != cfg.table_seed or table.length != cfg.table_length:
        raise ConfigError("supplied noise table does not match the config", field="noise")
    center = np.asarray(task.initial_center(resolved_init_seed(cfg)), dtype=np.float64)
    a = cfg.adam
    adam = AdamState.zeros(task.dim, alpha=a.alpha, beta1=a.beta1, beta2=a.beta2, eps=a.eps, l2_coeff=a.l2_coeff)
    return RunContext(config=cfg, task=task, table=table, center=center, adam=adam)


def restore_context(ctx: RunContext, ckpt: Checkpoint) -> RunContext:
    if ckpt.config_digest != ctx.config.digest():
        raise ConfigError("checkpoint was written by a run with different settings", field="resume")
    if ckpt.center.dim != ctx.task.dim:
        raise DimensionMismatch("checkpoint dimension does not match the task")
    ctx.center = ckpt.center.values.copy()
    ctx.adam = ckpt.adam
    ctx.generation = ckpt.generation
    ctx.episodes_evaluated = int(ckpt.counters.get("episodes_evaluated", 0))
    return ctx


def _generation_step(ctx: RunContext) -> GenerationOutput:
    cfg = ctx.config
    g = ctx.generation
    n = cfg.population
    t0 = time.perf_counter()

    refs = sample_generation(ctx.table, n, ctx.task.dim, derive_seed(cfg.run_seed, SAMPLE_TAG, g))
    dist = SearchDistribution(ParameterVector(ctx.center), cfg.sigma)
    thetas = realize_population(dist, refs, ctx.table)
    seeds = [episode_seed(cfg.run_seed, g, i) for i in range(n)]
    fitness, behaviors = ctx.task.evaluate(thetas, seeds, cfg.workers)
    if not (np.all(np.isfinite(fitness)) and np.all(np.isfinite(behaviors))):
        raise QEESError("non-finite fitness or behavior from evaluation")
    if behaviors.shape[1] != ctx.task.bc_dim:
        raise DimensionMismatch(f"behavior dimension {behaviors.shape[1]} != declared {ctx.task.bc_dim}")

    # EVO is always computed for reporting; only E-ES and QE-ES feed it to shaping.
    evo, bc_mean = evolvability_scores(behaviors)
    weights = weights_from_objectives(cfg.mode, fitness, evo if cfg.mode.uses_evolvability else None)
    grad = estimate_gradient(weights, refs, ctx.table, dist)
    new_center, new_adam = adam_step(ctx.adam, ctx.center, grad)

    center_fitness = float("nan")
    if ctx.evaluate_center:
        center_fitness, _ = ctx.task.evaluate_center(ctx.center)
        center_fitness = float(center_fitness)
    elapsed = time.perf_counter() - t0

    record = GenerationRecord(
        generation=g,
        mean_fitness=float(np.mean(fitness)),
        max_fitness=float(np.max(fitness)),
        center_fitness=center_fitness,
        mean_evolvability=float(np.mean(evo)),
        bc_mean=bc_mean,
        wall_clock_seconds=elapsed if cfg.record_wall_clock else 0.0,
    )
    ctx.center = new_center.values.copy()
    ctx.adam = new_adam
    ctx.generation = g + 1
    ctx.last_fitness = fitness
    ctx.last_behaviors = behaviors
    ctx.episodes_evaluated += n
    return GenerationOutput(record, fitness, behaviors, evo, weights, grad.vector)


def run_generation(ctx: RunContext) -> GenerationRecord:
    """Sample, evaluate, score, shape, estimate, step. Advances ``ctx`` by one generation."""
    g = ctx.generation
    try:
        return _generation_step(ctx).record
    except QEESError as exc:
        raise RunFailure(g, exc) from exc


@dataclass
class RunResult:
    records: list[GenerationRecord]
    center: np.ndarray
    adam: AdamState
    final_center_fitness: float
    final_center_behavior: np.ndarray
    final_fitness: np.ndarray | None
    final_behaviors: np.ndarray | None
    output_dir: Path | None = None
    checkpoints: list[Path] = field(default_factory=list)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def read_records_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _prepare_records_file(path: Path, start_generation: int):
    """Open records.csv for appending, keeping only rows before ``start_generation``."""
    kept = []
    if start_generation > 0 and path.exists():
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        kept = [r for r in rows[1:] if r and int(r[0]) < start_generation]
    fh = open(path, "w", newline="")
    w = csv.writer(fh)
    w.writerow(RECORD_COLUMNS)
    for r in kept:
        w.writerow(r)
    fh.flush()
    return fh, w


def write_behaviors_csv(path, fitness, behaviors) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BEHAVIOR_COLUMNS)
        if fitness is not None:
            for i, (f, (x, y)) in enumerate(zip(fitness, behaviors[:, :2])):
                w.writerow([i, _fmt(f), _fmt(x), _fmt(y)])


def run_experiment(
    config: RunConfig,
    task: Task | None = None,
    resume: str | Path | Checkpoint | None = None,
    progress: Callable[[GenerationRecord], None] | None = None,
    table: NoiseTable | None = None,
) -> RunResult:
    """Run one seed of ``config`` to ``config.generations`` completed generations.

    Writes records.csv, behaviors.csv, periodic and final checkpoints, the
    effective config and a summary to ``config.output_dir`` when it is set.
    """
    ctx = make_context(config, task, table)
    if resume is not None:
        ck = resume if isinstance(resume, Checkpoint) else ckpt_io.load(resume)
        restore_context(ctx, ck)
        if ctx.generation > config.generations:
            raise ConfigError(
                f"checkpoint is at generation {ctx.generation}, beyond the requested {config.generations}",
                field="run.generations",
            )

    out = Path(config.output_dir) if config.output_dir else None
    rec_fh = rec_w = None
    checkpoints: list[Path] = []
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.cfg").write_text(dump_config(config))
        rec_fh, rec_w = _prepare_records_file(out / "records.csv", ctx.generation)

    records: list[GenerationRecord] = []
    try:
        while ctx.generation < config.generations:
            rec = run_generation(ctx)
            records.append(rec)
            if rec_w is not None:
                rec_w.writerow([_fmt(v) for v in rec.row()])
                rec_fh.flush()
            if progress is not None:
                progress(rec)
            k = config.checkpoint_interval
            if out is not None and k and ctx.generation % k == 0 and ctx.generation < config.generations:
                checkpoints.append(ckpt_io.save(ctx.checkpoint(), out / f"checkpoint_{ctx.generation:06d}.qees"))
    finally:
        if rec_fh is not None:
            rec_fh.close()

    final_f, final_b = ctx.task.evaluate_center(ctx.center)
    if out is not None:
        write_behaviors_csv(out / "behaviors.csv", ctx.last_fitness, ctx.last_behaviors)
        checkpoints.append(ckpt_io.save(ctx.checkpoint(), out / "checkpoint_final.qees"))
        summary = {
            "generations": ctx.generation,
            "config_digest": config.digest(),
            "final_center_fitness": float(final_f),
            "final_center_behavior": [float(v) for v in final_b],
        }
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
        if config.dump_trajectory and isinstance(ctx.task, LocomotionTask):
            ep = run_episode(ctx.center, ctx.task.env, ctx.task.policy, record_trajectory=True, goal_index=0)
            write_trajectory_csv(ep, out / "center_trajectory.csv")

    return RunResult(
        records=records,
        center=ctx.center,
        adam=ctx.adam,
        final_center_fitness=float(final_f),
        final_center_behavior=np.asarray(final_b),
        final_fitness=ctx.last_fitness,
        final_behaviors=ctx.last_behaviors,
        output_dir=out,
        checkpoints=checkpoints,
    )
