"""Non-interactive figure regeneration from persisted run artifacts."""

from .artifacts import MissingArtifact, RunArtifacts
from .figures import FIGURE_KINDS, render

__all__ = ["MissingArtifact", "RunArtifacts", "FIGURE_KINDS", "render"]

__version__ = "0.1.0"
