"""Moments of patterned random matrices and their combinatorial limits."""

__version__ = "0.1.0"

from .ensemble import (EntryDist, empirical_moment, exact_moment_oracle,
                       sample_matrix, spectrum, word_trace)
from .errors import (BudgetExceededError, NumericalError, PatternSyntaxError,
                     ValidationError)
from .freeness import AlternatingSpec, Factor, centered_moment, freeness_sweep
from .integrator import MomentEstimate, theory_moment_grid, theory_moment_mc
from .paths import (PathClass, Shape, classify_path, enumerate_shapes, f_eval,
                    f_naive, find_strict_wedge, naive_paths)
from .pattern import (Pattern, area_mc, cell_active, contains, load_pattern,
                      parse_pattern, preset, to_index_space)
from .words import Word, is_even_balanced, parse_word, star_balance

__all__ = [
    "AlternatingSpec", "BudgetExceededError", "EntryDist", "Factor",
    "MomentEstimate", "NumericalError", "PathClass", "Pattern",
    "PatternSyntaxError", "Shape", "ValidationError", "Word", "area_mc",
    "cell_active", "centered_moment", "classify_path", "contains",
    "empirical_moment", "enumerate_shapes", "exact_moment_oracle", "f_eval",
    "f_naive", "find_strict_wedge", "freeness_sweep", "is_even_balanced",
    "load_pattern", "naive_paths", "parse_pattern", "parse_word", "preset",
    "sample_matrix", "spectrum", "star_balance", "theory_moment_grid",
    "theory_moment_mc", "to_index_space", "word_trace",
]
