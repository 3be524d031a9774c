"""Config-driven experiment runner and figure tables."""

from .config import ExperimentConfig, load, parse_text, resolve
from .figures import FIGURES, emit_figure_data
from .runner import execute, run
