"""HTTP service exposing submission, moderation, query and release APIs."""

from .app import create_app

__all__ = ["create_app"]
