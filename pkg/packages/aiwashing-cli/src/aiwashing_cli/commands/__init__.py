"""CLI commands package."""

from .fit import app as fit_app
from .generate import app as generate_app
from .index import app as index_app
from .iv import app as iv_app
from .mediate import app as mediate_app
from .moderate import app as moderate_app
from .run import app as run_app
from .simulate import app as simulate_app
from .validate import app as validate_app

__all__ = [
    "fit_app",
    "generate_app",
    "index_app",
    "iv_app",
    "mediate_app",
    "moderate_app",
    "run_app",
    "simulate_app",
    "validate_app",
]
