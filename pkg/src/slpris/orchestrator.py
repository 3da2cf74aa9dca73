"""Joint precoder / RIS-phase alternation and the exhaustive rotation search.

For a fixed rotation combination the block alternates between

1. solving every slot's minimum-power precoder under the current phases, and
2. re-designing the phases to widen the QoS margins of those precoders.

A phase candidate is only kept if re-solving the precoders under it does not
raise the block power, so the recorded power sequence is non-increasing.
The outer search runs this alternation for every one of the ``psi**K``
per-user rotation combinations and keeps the cheapest.
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, PhaseConfig, effective_channel
from .config import MAX_ROTATION_USERS, AlternationOptions
from .errors import BudgetExceeded, SlpRisError
from .ris import optimize_phases
from .slp import PrecoderBlock, QosTargets, SymbolBlock, rotate_symbols, rotation_grid, solve_block

log = logging.getLogger(__name__)


@dataclass
class AlternationResult:
    X: PrecoderBlock
    theta: PhaseConfig
    power_trace: list
    iterations: int
    converged: bool
    # summed-margin sequence of every phase-design call, in call order
    ascent_traces: list = field(default_factory=list)

    @property
    def power(self):
        return self.X.total_power


@dataclass
class RotationSearchResult:
    best_phi: np.ndarray
    best: AlternationResult
    per_combo_power: np.ndarray
    combos: list
    # every evaluated alternation, in combination order (only with keep_all)
    all_results: list = None

    @property
    def power(self):
        return self.best.power

    @property
    def best_index(self):
        return int(np.argmin(self.per_combo_power))


def alternate_block(ch: ChannelSet, block: SymbolBlock, theta0: PhaseConfig, qos: QosTargets,
                    opts: AlternationOptions = AlternationOptions()) -> AlternationResult:
    targets = rotate_symbols(block)
    theta = theta0
    try:
        X = solve_block(effective_channel(ch, theta), targets, qos)
    except SlpRisError as exc:
        raise type(exc)(f"{exc} [rotation {np.round(block.rotations, 6).tolist()}]") from exc
    trace = [X.total_power]
    if ch.N == 0 or theta.beta == 0:
        return AlternationResult(X, theta, trace, 0, True)

    ascent_traces = []
    iterations = 0
    converged = False
    while iterations < opts.max_iter:
        iterations += 1
        cand_theta, ztrace = optimize_phases(ch, X, targets, theta, opts.ascent, return_trace=True)
        ascent_traces.append(ztrace)
        cand_X = solve_block(effective_channel(ch, cand_theta), targets, qos)
        incumbent = X.total_power
        if cand_X.total_power > incumbent:
            converged = True
            break
        X, theta = cand_X, cand_theta
        trace.append(X.total_power)
        if incumbent - X.total_power < opts.eps_conv * incumbent:
            converged = True
            break
    return AlternationResult(X, theta, trace, iterations, converged, ascent_traces)


def rotation_combinations(K, psi=4):
    """All per-user rotation vectors in lexicographic order of grid indices."""
    grid = rotation_grid(psi)
    return [grid[list(idx)] for idx in itertools.product(range(psi), repeat=K)]


def rotation_search(ch: ChannelSet, data, qos: QosTargets,
                    opts: AlternationOptions = AlternationOptions(),
                    theta0: PhaseConfig = None, psi=4, share_common_rotation=True,
                    keep_all=False) -> RotationSearchResult:
    """Run the alternation for every rotation combination; ties go to the
    lexicographically first combination.

    Adding the same quarter-turn to every user's rotation multiplies all
    targets by one unit phasor, which maps the precoders to ``X e^{-jc}`` and
    leaves every margin, phase update and power unchanged. With
    ``share_common_rotation`` only the combinations with ``phi_1 = 0`` are run
    and the other ``psi - 1`` members of each class copy their power. The
    argmin is unaffected because the representative has the lowest index.
    """
    data = np.atleast_2d(np.asarray(data, dtype=complex))
    K = data.shape[1]
    if K > MAX_ROTATION_USERS:
        raise BudgetExceeded(
            f"rotation search over {psi}**{K} combinations exceeds the budget; "
            f"use at most K = {MAX_ROTATION_USERS} users")
    if theta0 is None:
        theta0 = PhaseConfig.identity(ch.N)
    combos = rotation_combinations(K, psi)
    # common rotations are symmetries only when they map QPSK onto itself
    share = share_common_rotation and psi % 4 == 0
    n_run = len(combos) // psi if share else len(combos)
    powers = np.empty(len(combos))
    best = None
    best_i = -1
    kept = [] if keep_all else None
    for i in range(n_run):
        res = alternate_block(ch, SymbolBlock(data, combos[i], psi), theta0, qos, opts)
        powers[i] = res.power
        if keep_all:
            kept.append(res)
        if best is None or res.power < best.power:
            best, best_i = res, i
    if share:
        idx = np.array(list(itertools.product(range(psi), repeat=K)))
        rep = (idx - idx[:, :1]) % psi
        rep_index = rep @ (psi ** np.arange(K - 1, -1, -1))
        powers = powers[rep_index]
    log.debug("rotation search: best combo %d of %d, power %.3e", best_i, len(combos), best.power)
    return RotationSearchResult(combos[best_i], best, powers, combos, kept)
