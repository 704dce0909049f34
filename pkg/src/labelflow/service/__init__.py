"""HTTP service exposing running sessions to annotator clients."""
from .app import SessionHost, create_app

__all__ = ["SessionHost", "create_app"]
