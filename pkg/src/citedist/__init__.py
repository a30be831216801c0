"""Heavy-tailed model fitting and journal-normalised citation analysis."""
from .distributions import ModelFamily, ModelSpec
from .fitting import FitResult, SelectionResult, fit_mle, select_best

__version__ = "0.1.0"

__all__ = [
    "FitResult",
    "ModelFamily",
    "ModelSpec",
    "SelectionResult",
    "__version__",
    "fit_mle",
    "select_best",
]
