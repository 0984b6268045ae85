"""Core module for ChabautyLab."""

__version__ = "26.10.0"

from .config import ConfigManager, RunConfig
from .errors import ChabautyError

__all__ = ["ConfigManager", "RunConfig", "ChabautyError", "__version__"]
