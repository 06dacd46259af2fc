"""Simulator of supervised W-state entanglement sharing and the
teleportation-based direct communication scheme built on it."""

from wuhan_qsdc.statevec import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
