"""AoI-minimising sensing, transmission and task scheduling for a cellular-connected UAV."""
from .kernels import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
