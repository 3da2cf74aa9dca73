"""Joint symbol-level precoding, RIS phase design and constellation rotation
for transmit-power minimisation over finite blocks."""

from .benchmarks import run_scheme, zf_block, zf_with_ris
from .channel import (
    ChannelSet,
    PhaseConfig,
    ScenarioGeometry,
    build_geometry,
    draw_scene_channels,
    effective_channel,
    path_loss_db,
)
from .config import SCHEMES, AlternationOptions, AscentOptions, SweepConfig
from .montecarlo import SweepRow, run_sweep, run_trial
from .orchestrator import AlternationResult, RotationSearchResult, alternate_block, rotation_search
from .ris import margins, optimize_phases
from .slp import PrecoderBlock, QosTargets, SymbolBlock, solve_block, solve_symbol_precoder

__version__ = "0.1.0"
