"""Local algebraic-combinatorial completion of positive low-rank matrices."""

from ._backend import name as backend
from .baselines import SvtConfig, riegel_complete, riegel_predict, svt_complete
from .core import (
    Completion,
    CompletionError,
    DegenerateColumnError,
    DegenerateMinorError,
    EntryEstimate,
    ExperimentRecord,
    InvalidInputError,
    MaskedMatrix,
    UnestimableError,
    bootstrap_ci,
    combine_min_variance,
    masked_mse,
)
from .methods import MethodOptions, parse_method, run_method
from .rank1 import faccro_all, faccro_entry
from .rankr import ClosureConfig, find_minors, minor_weight, solve_minor, vmclosure_all, vmclosure_entry
from .simgen import SimConfig, SimDraw, delete_entries, draw
from .spectral import (
    RefineConfig,
    estimate_rank,
    refine,
    refine_trace,
    singular_vector_alignment,
    smcb,
    spectral_gaps,
)

__version__ = "0.1.0"
