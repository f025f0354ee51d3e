"""Linear sketches for l2/l2 sparse recovery and sparse Fourier set query."""
from .errors import ConfigurationError, DomainError, OracleSizeError, SketchError
from .fourier import build_filter, dft, fourier_set_query, hash_to_bins, idft, SpectrumPermutation
from .identification import forest_decode, forest_geometry, forest_sketch_build
from .pipeline import PipelineConfig, recover
from .profiles import DESK, PAPER, ConstantProfile, get_profile
from .pruning import prune, prune_sketch_build
from .set_query import LayeredCountSketch
from .signal import SparseApprox, fourier_err, head_set, lp_norm, tail_norm
from .tail_estimation import tail_estimate, tail_sketch_build

__all__ = [
    "ConfigurationError", "DomainError", "OracleSizeError", "SketchError",
    "build_filter", "dft", "fourier_set_query", "hash_to_bins", "idft", "SpectrumPermutation",
    "forest_decode", "forest_geometry", "forest_sketch_build",
    "PipelineConfig", "recover",
    "DESK", "PAPER", "ConstantProfile", "get_profile",
    "prune", "prune_sketch_build",
    "LayeredCountSketch",
    "SparseApprox", "fourier_err", "head_set", "lp_norm", "tail_norm",
    "tail_estimate", "tail_sketch_build",
]
__version__ = "0.1.0"
