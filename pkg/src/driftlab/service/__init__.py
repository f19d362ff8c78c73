"""FastAPI service wrapping the core package."""
from .app import app

__all__ = ["app"]
