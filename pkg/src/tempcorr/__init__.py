"""Temporal GHZ correlations on a single qumit versus bounded classical communication.

Submodules: ``games`` (the sequential modulo-(m, d) problem), ``quantum``
(exact spatial and temporal simulation), ``classical`` (table protocols,
one-bit protocols, Toner-Bacon, search), ``adversary`` (refutation
certificates), ``bounds`` (capacity and lower-bound calculators) and ``cli``.
"""
from .errors import (
    CapExceeded,
    InternalContradiction,
    NormalizationError,
    NotApplicable,
    PromiseViolation,
    ProtocolInvalid,
    TempcorrError,
    UnsupportedParameters,
    ValidationError,
)
from .games import GameSpec, check_promise, check_win, enumerate_promise_inputs, sample_promise_inputs
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
