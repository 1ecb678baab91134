"""Exact verification tools for random assignment rules.

All probabilities are :class:`fractions.Fraction`; nothing is rounded.
"""

from .core import Rule, format_profile, parse_profile
from .mechanisms import rsd, serial_dictatorship
from .rank_verifier import verify_characterization

__version__ = "0.1.0"

__all__ = ["Rule", "format_profile", "parse_profile", "rsd", "serial_dictatorship",
           "verify_characterization", "__version__"]
