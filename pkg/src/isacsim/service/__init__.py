"""HTTP service wrapping the experiment harness."""

from .app import app, create_app
from .jobs import RunManager, RunRecord

__all__ = ["app", "create_app", "RunManager", "RunRecord"]
