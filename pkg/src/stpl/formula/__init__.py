"""Formula syntax, parsing, printing and structural transforms."""

from .parser import ParseError, parse, parse_file, parse_term  # noqa: F401
from .printer import pretty_print  # noqa: F401
from .syntax import *  # noqa: F401,F403
from .transform import (  # noqa: F401
    AanViolation, FormulaStats, closed, desugar, expand_intervals, free_ids, free_times, is_aan, is_core,
    rename_apart, stats, subformulas, validate_aan,
)
