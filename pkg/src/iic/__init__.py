"""Iterative identification closure for linear structural equation models.

Seeds from side information (instruments, interventions, priors) are
propagated through the half-trek criterion and its reduced form until a
fixed point; every identified edge carries a replayable witness that the
``estimate`` module turns into plug-in estimates.
"""
__version__ = '0.1.0'

from .closure import ClosureRequest, ClosureResult, iic_close, iic_close_unseeded  # noqa: E402
from .graph import EdgeStatus, MixedGraph, build_graph  # noqa: E402
from .seeds import SeedSpec, resolve_seeds  # noqa: E402

__all__ = [
    '__version__',
    'ClosureRequest',
    'ClosureResult',
    'EdgeStatus',
    'MixedGraph',
    'SeedSpec',
    'build_graph',
    'iic_close',
    'iic_close_unseeded',
    'resolve_seeds',
]
