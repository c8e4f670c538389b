"""Service subpackage: FastAPI app and schemas."""

from .app import app, create_app

__all__ = ["app", "create_app"]
