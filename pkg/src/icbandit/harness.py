"""Experiment orchestration: config, repetitions, CSV records, summaries.

A run builds the ground-truth oracle once, then executes independent
repetitions seeded base_seed+rep (each repetition derives separate streams
for the environment and the policy). Every (repetition, timestep) yields
one CSV row; rows are deterministic given the config on a fixed platform,
except for the wall-clock column.
"""

from __future__ import annotations

import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .accounting import (
    GroundTruth,
    RegretLedger,
    estimate_ground_truth,
    instantaneous_gap,
    oracle_seed_sequence,
)
from .auction import BidGrid
from .estimator import UcbContext
from .gsp import GspConfig, GspEnvironment, SecondPriceEnvironment
from .policies import (
    EpsilonGreedy,
    Policy,
    RandomBids,
    RegretUcbDsp,
    RegretUcbKnownValue,
    RegretUcbSwitching,
    execute_round,
    init_probe,
)

CSV_HEADER = "policy,rep,t,inst_gap,cum_pseudo_regret,cum_empirical_regret,wall_ms"
SUMMARY_HEADER = "policy,t,mean_cum_pseudo_regret,ci95_half_width_normal,reps"
OUT_DIR_ENV_VAR = "ICBANDIT_OUT_DIR"

POLICY_NAMES = (
    "regret_ucb_known_v",
    "regret_ucb_dsp",
    "regret_ucb_switching",
    "random_bids",
    "epsilon_greedy",
)

ADVERTISER_ONLY = {"regret_ucb_known_v"}
DSP_ONLY = {"regret_ucb_dsp", "regret_ucb_switching"}


@dataclass
class RunRecord:
    """One CSV row: the state of one repetition after timestep t."""

    policy: str
    rep: int
    t: int
    inst_gap: float
    cum_pseudo_regret: float
    cum_empirical_regret: float
    wall_ms: float

    def to_csv_row(self) -> str:
        return ",".join(
            [
                self.policy,
                str(self.rep),
                str(self.t),
                format(self.inst_gap, ".12g"),
                format(self.cum_pseudo_regret, ".12g"),
                format(self.cum_empirical_regret, ".12g"),
                format(self.wall_ms, ".12g"),
            ]
        )


@dataclass
class ExperimentConfig:
    """Every experiment knob; defaults mirror the standard GSP study setup."""

    environment: str = "gsp"
    num_slots: int = 5
    num_competitors: int = 20
    competitor_low: float = 0.0
    competitor_high: float = 10.0
    ctr_alpha: float = 2.0
    ctr_beta: float = 5.0
    grid_min: float = 0.01
    grid_max: float = 10.0
    grid_step: float = 0.01
    policy: str = "regret_ucb_known_v"
    v_known: float | None = 9.5
    epsilon: float = 0.1
    dsp_probe_index: str = "regret"
    update_anchor: bool = False
    m: int = 15
    n: int = 1024
    T: int = 2000
    repetitions: int = 10
    base_seed: int = 0
    oracle_samples: int = 1_000_000
    workers: int = 1
    out_dir: str = ""

    def grid(self) -> BidGrid:
        return BidGrid.from_range(self.grid_min, self.grid_max, self.grid_step)

    def gsp_config(self) -> GspConfig:
        return GspConfig(
            num_slots=self.num_slots,
            num_competitors=self.num_competitors,
            competitor_low=self.competitor_low,
            competitor_high=self.competitor_high,
            ctr_alpha=self.ctr_alpha,
            ctr_beta=self.ctr_beta,
        )

    def validate(self) -> None:
        if self.environment not in ("gsp", "second_price"):
            raise ValueError("environment must be 'gsp' or 'second_price'")
        if self.policy not in POLICY_NAMES:
            raise ValueError(f"policy must be one of {', '.join(POLICY_NAMES)}")
        self.gsp_config().validate()
        grid = self.grid()
        if self.m < 1 or self.m >= len(grid):
            raise ValueError(f"m must satisfy 1 <= m < |B| = {len(grid)}")
        if self.n < 1 or self.n % (self.m + 1) != 0:
            raise ValueError(f"n={self.n} must be a positive multiple of m+1={self.m + 1}")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.oracle_samples < 1:
            raise ValueError("oracle_samples must be >= 1")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.dsp_probe_index not in ("regret", "utility"):
            raise ValueError("dsp_probe_index must be 'regret' or 'utility'")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.policy in ADVERTISER_ONLY and self.v_known is None:
            raise ValueError(f"policy {self.policy} needs v_known")
        if self.policy in DSP_ONLY and self.v_known is not None:
            raise ValueError(f"policy {self.policy} takes no v_known (set v_known = none)")
        if self.v_known is not None:
            grid.require_member(self.v_known, name="v_known")

    def resolved_out_dir(self) -> Path:
        if self.out_dir:
            return Path(self.out_dir)
        return Path(os.environ.get(OUT_DIR_ENV_VAR, "."))


_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _parse_value(name: str, text: str):
    kinds = {f.name: f.type for f in fields(ExperimentConfig)}
    if name not in kinds:
        raise ValueError(f"unknown config key {name!r}; valid keys: {', '.join(sorted(kinds))}")
    text = text.strip()
    kind = kinds[name]
    if name == "v_known":
        return None if text.lower() == "none" else float(text)
    if kind == "bool":
        try:
            return _BOOL_VALUES[text.lower()]
        except KeyError:
            raise ValueError(f"{name} expects true/false, got {text!r}") from None
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def parse_config_file(path) -> dict:
    """Parse a flat key = value config file ('#' starts a comment)."""
    values = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        values[key] = _parse_value(key, value)
    return values


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a validated config from an optional file plus overrides (overrides win)."""
    values = parse_config_file(path) if path else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _parse_value(key, str(value)) if isinstance(value, str) else value
    config = ExperimentConfig(**values)
    config.validate()
    return config


def build_environment(config: ExperimentConfig, seed):
    if config.environment == "gsp":
        return GspEnvironment(config.gsp_config(), seed=seed)
    return SecondPriceEnvironment(config.gsp_config(), seed=seed)


def build_policy(config: ExperimentConfig, rng: np.random.Generator) -> Policy:
    if config.policy == "regret_ucb_known_v":
        return RegretUcbKnownValue(config.v_known, update_anchor=config.update_anchor)
    if config.policy == "regret_ucb_dsp":
        return RegretUcbDsp(probe_index=config.dsp_probe_index)
    if config.policy == "regret_ucb_switching":
        return RegretUcbSwitching(rng)
    if config.policy == "random_bids":
        return RandomBids(rng, known_v=config.v_known)
    if config.policy == "epsilon_greedy":
        return EpsilonGreedy(rng, epsilon=config.epsilon, known_v=config.v_known)
    raise ValueError(f"unknown policy {config.policy!r}")


def build_ground_truth(config: ExperimentConfig) -> GroundTruth:
    """Oracle for this config, on its dedicated seed stream."""
    env = build_environment(config, seed=0)
    return estimate_ground_truth(
        env, config.grid(), config.oracle_samples, seed=oracle_seed_sequence(config.base_seed)
    )


def run_single(config: ExperimentConfig, rep: int, gt: GroundTruth) -> list[RunRecord]:
    """One independent repetition; returns its T records."""
    env_seed, policy_seed = np.random.SeedSequence(config.base_seed + rep).spawn(2)
    env = build_environment(config, env_seed)
    policy = build_policy(config, np.random.default_rng(policy_seed))
    grid = config.grid()
    bound = env.utility_bound(grid)
    stats = init_probe(env, grid, config.m, config.n)
    ledger = RegretLedger()
    cum_empirical = 0.0
    records = []
    for t in range(1, config.T + 1):
        start = time.perf_counter()
        ctx = UcbContext(t=t, m=config.m, n=config.n, U=bound)
        plan = policy.plan(stats, ctx)
        gap = instantaneous_gap(gt, plan, policy.gap_kind)
        _, empirical = execute_round(
            env, plan, stats, ctx, absorb_anchor=policy.absorbs_anchor, switching=policy.switching
        )
        ledger.add(gap)
        cum_empirical += empirical
        records.append(
            RunRecord(
                policy=policy.label,
                rep=rep,
                t=t,
                inst_gap=gap,
                cum_pseudo_regret=ledger.total,
                cum_empirical_regret=cum_empirical,
                wall_ms=(time.perf_counter() - start) * 1e3,
            )
        )
    return records


def _run_single_args(args):
    return run_single(*args)


def run_repetitions(config: ExperimentConfig, gt: GroundTruth | None = None) -> list[RunRecord]:
    """All repetitions of one config, rows ordered by (rep, t)."""
    config.validate()
    if gt is None:
        gt = build_ground_truth(config)
    reps = range(config.repetitions)
    if config.workers == 1 or config.repetitions == 1:
        batches = [run_single(config, rep, gt) for rep in reps]
    else:
        with ProcessPoolExecutor(max_workers=min(config.workers, config.repetitions)) as pool:
            batches = list(pool.map(_run_single_args, [(config, rep, gt) for rep in reps]))
    return [record for batch in batches for record in batch]


def write_records_csv(records: list[RunRecord], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        handle.write(CSV_HEADER + "\n")
        for record in records:
            handle.write(record.to_csv_row() + "\n")
    return path


def load_records(path) -> list[RunRecord]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: expected header {CSV_HEADER!r}")
    records = []
    for line in lines[1:]:
        policy, rep, t, gap, pseudo, empirical, wall = line.split(",")
        records.append(
            RunRecord(policy, int(rep), int(t), float(gap), float(pseudo), float(empirical), float(wall))
        )
    return records


def run_experiment(config: ExperimentConfig, out_path=None, gt: GroundTruth | None = None) -> Path:
    """Run a config end to end and write its CSV; returns the written path."""
    records = run_repetitions(config, gt=gt)
    if out_path is None:
        out_path = config.resolved_out_dir() / f"{config.policy}.csv"
    return write_records_csv(records, out_path)


def sweep(config: ExperimentConfig, param: str, values, out_dir=None, gt_per_value=None) -> list[Path]:
    """Run one experiment per swept value; filenames encode the parameter.

    The oracle is rebuilt per point only when the sweep changes it
    (grid/environment parameters); sweeps over n, m, T, epsilon reuse one
    oracle. gt_per_value overrides that with an explicit list.
    """
    if param not in {f.name for f in fields(ExperimentConfig)}:
        raise ValueError(f"unknown sweep parameter {param!r}")
    out_dir = Path(out_dir) if out_dir is not None else config.resolved_out_dir()
    reuses_oracle = param in {"m", "n", "T", "epsilon", "repetitions", "update_anchor", "dsp_probe_index"}
    shared_gt = None
    if gt_per_value is None and reuses_oracle:
        shared_gt = build_ground_truth(config)
    paths = []
    for i, value in enumerate(values):
        point = replace(config, **{param: value})
        point.validate()
        gt = gt_per_value[i] if gt_per_value is not None else shared_gt
        paths.append(
            run_experiment(point, out_path=out_dir / f"{point.policy}_{param}{value}.csv", gt=gt)
        )
    return paths


@dataclass
class SummaryRow:
    """Mean cumulative pseudo-regret across repetitions at one timestep."""

    policy: str
    t: int
    mean_cum_pseudo_regret: float
    ci95_half_width: float
    reps: int


def summarize(paths) -> list[SummaryRow]:
    """Per (policy, t): mean cumulative pseudo-regret and normal 95% CI half-width."""
    paths = [paths] if isinstance(paths, (str, Path)) else list(paths)
    if not paths:
        raise ValueError("summarize needs at least one CSV path")
    groups: dict[tuple[str, int], list[float]] = {}
    for path in paths:
        for record in load_records(path):
            groups.setdefault((record.policy, record.t), []).append(record.cum_pseudo_regret)
    rows = []
    warned = False
    for (policy, t), values in sorted(groups.items()):
        data = np.asarray(values)
        if data.size == 1:
            if not warned:
                warnings.warn("single repetition: confidence half-widths reported as 0", stacklevel=2)
                warned = True
            half = 0.0
        else:
            half = 1.96 * data.std(ddof=1) / np.sqrt(data.size)
        rows.append(SummaryRow(policy, t, float(data.mean()), float(half), int(data.size)))
    return rows


def write_summary_csv(rows: list[SummaryRow], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        handle.write(SUMMARY_HEADER + "\n")
        for row in rows:
            handle.write(
                f"{row.policy},{row.t},{row.mean_cum_pseudo_regret:.12g},"
                f"{row.ci95_half_width:.12g},{row.reps}\n"
            )
    return path


def load_summary(path) -> list[SummaryRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != SUMMARY_HEADER:
        raise ValueError(f"{path}: expected header {SUMMARY_HEADER!r}")
    rows = []
    for line in lines[1:]:
        policy, t, mean, half, reps = line.split(",")
        rows.append(SummaryRow(policy, int(t), float(mean), float(half), int(reps)))
    return rows
