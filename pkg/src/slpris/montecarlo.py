"""Trial and sweep engine.

Randomness is split by counter: the channel of realisation ``r`` comes from
``SeedSequence(seed, spawn_key=(r,))`` and the symbols of block ``b`` from
``SeedSequence(seed, spawn_key=(1, r, b))``. A trial therefore depends only on
``(seed, r, b)`` and sweeps are reproducible for any worker count. Channel
seeds do not depend on the sweep value, so every sweep point sees the same
user drops (common random numbers).
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .benchmarks import run_scheme
from .channel import build_geometry, draw_scene_channels
from .config import AlternationOptions, SweepConfig
from .errors import SlpRisError
from .slp import QosTargets, SymbolBlock

log = logging.getLogger(__name__)

# symbol streams live in their own branch of the seed tree
_SYMBOL_BRANCH = 1


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    sweep_value: int
    avg_power_dbm: float
    trials: int
    std_dev_db: float


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    realization: int
    block: int
    sweep_value: int
    powers: dict  # scheme -> linear power, NaN on failure
    errors: dict  # scheme -> message


def to_dbm(power_watts):
    return 10.0 * np.log10(np.asarray(power_watts) / 1e-3)


def realization_rng(seed, realization):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(realization,)))


def block_rng(seed, realization, block):
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(_SYMBOL_BRANCH, realization, block)))


def draw_trial_inputs(cfg: SweepConfig, realization, block_index):
    rng = realization_rng(cfg.seed, realization)
    geometry = build_geometry(cfg, rng)
    ch = draw_scene_channels(geometry, cfg, rng)
    block = SymbolBlock.random(cfg.block_length, cfg.num_users,
                               block_rng(cfg.seed, realization, block_index))
    return ch, block.data


def run_trial(cfg: SweepConfig, realization, block_index,
              opts: AlternationOptions = AlternationOptions(), with_errors=False):
    """Block power of every configured scheme on one (channel, block) draw.

    A failing scheme yields NaN and does not abort the others.
    """
    ch, data = draw_trial_inputs(cfg, realization, block_index)
    qos = QosTargets.uniform(cfg.num_users, cfg.qos_scale)
    powers, errors = {}, {}
    for scheme in cfg.schemes:
        try:
            powers[scheme] = float(run_scheme(scheme, ch, data, qos, opts))
        except SlpRisError as exc:
            powers[scheme] = math.nan
            errors[scheme] = f"{type(exc).__name__}: {exc}"
            log.warning("scheme %s failed (seed=%d, realization=%d, block=%d): %s",
                        scheme, cfg.seed, realization, block_index, exc)
    return (powers, errors) if with_errors else powers


def _trial_task(args):
    cfg, value, r, b, opts = args
    powers, errors = run_trial(cfg.at(value), r, b, opts, with_errors=True)
    return TrialRecord(cfg.seed, r, b, value, powers, errors)


def run_trials(cfg: SweepConfig, opts=AlternationOptions(), workers=1):
    """All trial records of a sweep, ordered by (sweep value, realization, block)."""
    tasks = [(cfg, v, r, b, opts)
             for v in cfg.sweep_values
             for r in range(cfg.realizations)
             for b in range(cfg.blocks_per_realization)]
    if workers <= 1:
        return [_trial_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_task, tasks, chunksize=1))


def aggregate(cfg: SweepConfig, records):
    """Average linear power per (scheme, sweep value), then convert to dBm.

    Records are put in trial order first, so the result does not depend on
    the order in which workers delivered them.
    """
    records = sorted(records, key=lambda rec: (rec.sweep_value, rec.realization, rec.block))
    rows = []
    for scheme in cfg.schemes:
        for value in cfg.sweep_values:
            p = np.array([rec.powers[scheme] for rec in records if rec.sweep_value == value])
            ok = p[np.isfinite(p)]
            if ok.size:
                avg = to_dbm(math.fsum(ok) / ok.size)
                std = float(np.std(to_dbm(ok)))
            else:
                avg = std = math.nan
            rows.append(SweepRow(scheme, int(value), float(avg), int(ok.size), std))
    return rows


def run_sweep(cfg: SweepConfig, opts=AlternationOptions(), workers=1, return_records=False):
    cfg.validate()
    records = run_trials(cfg, opts, workers)
    rows = aggregate(cfg, records)
    return (rows, records) if return_records else rows
