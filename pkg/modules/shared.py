#!/usr/bin/env python3
"""
Shared constants, defaults and exceptions for the BoATS toolkit.
"""

import os
import re
from pathlib import Path

# Paths
CONFIG_DIR = Path('config')
LOG_FILE = 'boats.log'

# Method tags
METHOD_OLS = 'ols'
METHOD_RIDGE = 'ridge'
METHOD_LASSO = 'lasso'
METHOD_ELASTIC_NET = 'elastic_net'
METHOD_BOATS = 'boats'
METHODS = (METHOD_OLS, METHOD_RIDGE, METHOD_LASSO, METHOD_ELASTIC_NET, METHOD_BOATS)
BENCHMARK_METHODS = (METHOD_RIDGE, METHOD_LASSO, METHOD_ELASTIC_NET, METHOD_BOATS)

# Coordinate descent
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 10_000

# BoATS
DEFAULT_PERMUTATIONS = 100
DEFAULT_THRESHOLD_POINTS = 40
DEFAULT_THRESHOLD_LOW = 0.25
DEFAULT_THRESHOLD_HIGH = 32.0
# select losses at or below this fraction of Σy_sel² count as perfect fits
PERFECT_FIT_RTOL = 1e-20
NULL_PERMUTATION = 'permutation'
NULL_MOMENT = 'moment'

# Evaluation protocol
DEFAULT_FRACTIONS = (0.8, 0.1, 0.1)
DEFAULT_ITERATIONS = 100
DEFAULT_COARSE_LOW = 1e-4
DEFAULT_COARSE_HIGH = 1e2
DEFAULT_COARSE_POINTS = 13
DEFAULT_FINE_POINTS = 15
MAX_FAILED_FRACTION = 0.10
RSS_FLOOR = 1e-300

# Synthetic models
DEFAULT_K = 100
DEFAULT_NOISE_FACTOR = 0.2

RESULTS_SCHEMA_VERSION = 1


class BoatsError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(BoatsError, ValueError):
    """Array shapes do not agree."""


class InvalidParameterError(BoatsError, ValueError):
    """A numeric parameter is outside its valid range."""


class UndefinedMetricError(BoatsError, ValueError):
    """A metric is undefined for the given data."""


class ConfigError(BoatsError):
    """Configuration file is missing, malformed or has unknown fields."""


class DatasetFormatError(BoatsError):
    """Dataset CSV cannot be parsed into a design matrix and response."""


class BootstrapAbortedError(BoatsError, RuntimeError):
    """Too many bootstrap iterations failed."""


class SimpleConsole:
    """Console output with basic [color]markup[/color] support."""

    COLORS = {
        'red': '\033[91m',
        'green': '\033[92m',
        'yellow': '\033[93m',
        'blue': '\033[94m',
        'cyan': '\033[96m',
        'bold': '\033[1m',
        'reset': '\033[0m'
    }
    _pattern = re.compile(r'\[(\w+)\](.*?)\[/\1\]')

    def __init__(self, color: bool = None):
        if color is None:
            color = os.environ.get('NO_COLOR') is None
        self.color = color

    def print(self, *args, **kwargs):
        """Print with markup converted to ANSI codes (or stripped)."""
        message = ' '.join(str(arg) for arg in args)
        print(self._parse_markup(message), **kwargs)

    def _parse_markup(self, text: str) -> str:
        def replace_tag(match):
            tag, content = match.group(1), match.group(2)
            if tag in self.COLORS and self.color:
                return f"{self.COLORS[tag]}{content}{self.COLORS['reset']}"
            return content

        # nested tags
        for _ in range(5):
            new_text = self._pattern.sub(replace_tag, text)
            if new_text == text:
                break
            text = new_text
        return text


console = SimpleConsole()
