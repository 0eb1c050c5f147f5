"""HTTP service exposing the solver."""
from .app import app

__all__ = ["app"]
