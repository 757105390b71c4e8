"""Spectral-modeling piano synthesis: sines + transient + noise."""

from ._core import *  # noqa: F401,F403
from ._core import MODEL_RATE, TRANSIENT_LENGTH  # noqa: F401

__version__ = "0.1.0"
