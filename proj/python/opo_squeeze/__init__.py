"""Squeezed light from a doubly resonant degenerate OPO below threshold.

Thin bindings over the C++ core: model evaluation, synthetic homodyne data,
estimators (threshold, squeezing-vs-pump, trace extrema) and coupling-rate
design. Rates are angular half-rates in rad/s; sideband frequencies in Hz.
"""

from ._opo_squeeze import *  # noqa: F401,F403
from ._opo_squeeze import (
    AnalysisError,
    InfeasibleError,
    PoleError,
    SchemaError,
    run_cli,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
