"""Shared helpers: logging, thread pool and seed derivation, output formatting."""

from .logging import get_logger
