"""
Config Module
Numerical defaults, settings file and logging setup
"""

import json
import logging
import os
from pathlib import Path
from typing import Dict, Optional

from rich.console import Console
from rich.logging import RichHandler

logger = logging.getLogger(__name__)

# Settings file picked up from the working directory
CONFIG_FILE = "transversal.json"

PRECISION_ENV = "TRANSVERSAL_PRECISION"
SUPPORTED_PRECISIONS = ('binary64', 'double', 'float64')


class Settings:
    """Default tolerances, horizons and step sizes"""

    # Root finding
    ROOT_TOL = 1e-6
    ROOT_MAX_ITER = 500

    # Orbit scanning
    COLLISION_TOL = 1e-9
    SEPARATION = 1e-3
    CONFIRM_STEPS = 3
    SYMBOLIC_HORIZON = 64
    NUMERIC_HORIZON = 200

    # Rank decisions
    GAP_THRESHOLD = 1e4
    RANK_CUTOFF = 1e-8
    KERNEL_TOL = 1e-6

    # Differentiation and Newton
    FD_STEP = 1e-6
    CHART_STEP = 1e-5
    NEWTON_TOL = 1e-13
    NEWTON_MAX_ITER = 60

    # Sampling
    SAMPLE_RADII = (3.0, 7.0)
    SAMPLES = 24
    SEED = 0

    @classmethod
    def as_dict(cls) -> Dict:
        """Current settings as a plain dict with lower-case keys"""
        return {
            name.lower(): getattr(cls, name)
            for name in dir(cls)
            if name.isupper()
        }

    @classmethod
    def apply(cls, overrides: Dict):
        """
        Install overrides read from a settings file

        Args:
            overrides: Mapping of lower-case setting names to values
        """
        for key, value in overrides.items():
            name = key.upper()
            if not name.isidentifier() or not hasattr(cls, name):
                logger.warning(f"Unknown setting ignored: {key}")
                continue
            if isinstance(getattr(cls, name), tuple):
                value = tuple(value)
            setattr(cls, name, value)


def load_config(path: Optional[str] = None) -> dict:
    """Load saved settings, empty dict when missing or unreadable"""
    config_path = Path(path or CONFIG_FILE)
    if config_path.exists():
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"Could not read {config_path}: {e}")
    return {}


def check_precision() -> str:
    """Read the reserved precision variable; only binary64 is implemented"""
    requested = os.environ.get(PRECISION_ENV, 'binary64').strip().lower()
    if requested not in SUPPORTED_PRECISIONS:
        logger.warning(f"{PRECISION_ENV}={requested} is not supported, computing in binary64")
    return 'binary64'


def configure_logging(verbose: bool = False):
    """Route library logging through rich"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=verbose)],
        force=True,
    )
