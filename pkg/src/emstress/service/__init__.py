"""HTTP service wrapping the analysis engines."""

from .app import app, create_app

__all__ = ["app", "create_app"]
