"""Seeded fan-out of independent runs over initializations and circuit architectures."""

from __future__ import annotations

import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..algorithms import RunRecord, run_escape, run_guide, run_standard
from ..ansatz import HardwareEfficient, QAOA, random_init
from ..problems import MaxCutInstance
from ..simulator import derive_seed, make_rng
from .config import ExperimentConfig, HeaSpec

# stream tags keep the per-run random streams disjoint
_SIM_STREAM = 1
_ARCH_STREAM = 0xA2C4


def init_seed(base_seed: int, run_index: int) -> int:
    return derive_seed(base_seed, run_index)


def sim_seed(base_seed: int, run_index: int) -> int:
    return derive_seed(base_seed, run_index, _SIM_STREAM)


def build_ansatze(config: ExperimentConfig, n: int) -> list:
    spec = config.ansatz
    if not isinstance(spec, HeaSpec):
        return [QAOA(p) for p in spec.depths]
    if spec.axes == "random":
        return [HardwareEfficient.random(n, make_rng(derive_seed(config.base_seed, _ARCH_STREAM, i)))
                for i in range(spec.architectures)]
    axes = [spec.axes] if isinstance(spec.axes, str) else spec.axes
    return [HardwareEfficient(a) for a in axes]


def algorithms_for(config: ExperimentConfig) -> list[str]:
    if config.algorithm == "guide" and config.guide.compare_standard:
        return ["standard", "guide"]
    return [config.algorithm]


@dataclass(frozen=True)
class Job:
    config: ExperimentConfig
    instance: MaxCutInstance
    ansatz: object
    algorithm: str
    run_index: int


def run_job(job: Job) -> RunRecord:
    cfg = job.config
    seed = init_seed(cfg.base_seed, job.run_index)
    n = job.instance.num_nodes
    theta0 = random_init(job.ansatz, n, make_rng(seed))
    rng = make_rng(sim_seed(cfg.base_seed, job.run_index))
    try:
        if job.algorithm == "standard":
            return run_standard(job.ansatz, job.instance, theta0, cfg.optimizer.build(), cfg.convergence.build(),
                                cfg.grad_mode, rng, cfg.noise_model(), job.run_index, seed)
        if job.algorithm == "escape":
            return run_escape(job.ansatz, job.instance, theta0, cfg.escape_config(), rng, job.run_index, seed)
        return run_guide(job.ansatz, job.instance, theta0, cfg.guide_config(), rng, job.run_index, seed)
    except Exception as exc:  # recorded per run; the batch carries on
        return RunRecord(algorithm=job.algorithm, instance_id=job.instance.instance_id,
                         ansatz=job.ansatz.to_dict(), run_index=job.run_index, init_seed=seed,
                         theta0=[float(x) for x in theta0], traces={}, c_pre=None, c_post=None,
                         theta_final=[], improved=False, hyperparameters={},
                         error="".join(traceback.format_exception_only(type(exc), exc)).strip())


def make_jobs(config: ExperimentConfig, instance: MaxCutInstance) -> list[Job]:
    return [Job(config, instance, ansatz, algorithm, r)
            for ansatz in build_ansatze(config, instance.num_nodes)
            for r in range(config.inits)
            for algorithm in algorithms_for(config)]


def run_batch(config: ExperimentConfig, instance: MaxCutInstance | None = None, jobs: int = 1,
              progress=None) -> list[RunRecord]:
    """Every (architecture, init, algorithm) run, in that fixed order regardless of ``jobs``."""
    instance = instance if instance is not None else config.instance.build()
    work = make_jobs(config, instance)
    if jobs <= 1:
        records = []
        for job in work:
            records.append(run_job(job))
            if progress:
                progress(len(records), len(work))
        return records
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        records = []
        for rec in pool.map(run_job, work, chunksize=max(1, len(work) // (4 * jobs))):
            records.append(rec)
            if progress:
                progress(len(records), len(work))
        return records
