"""Fractal tilings from iterated function systems and infinite words."""
from .errors import (BudgetExceeded, ConfigError, FractalError, InvalidMask, InvalidWord,
                     InvariantViolation, NotNonOverlapping, OutsideAttractor, OutsideExpansion,
                     SingularMap)
from .maps import Ifs, MapSpec
from .presets import PRESETS, get_preset
from .symbols import parse_word

__version__ = "0.1.0"

__all__ = ["BudgetExceeded", "ConfigError", "FractalError", "InvalidMask", "InvalidWord",
           "InvariantViolation", "NotNonOverlapping", "OutsideAttractor", "OutsideExpansion",
           "SingularMap", "Ifs", "MapSpec", "PRESETS", "get_preset", "parse_word"]
