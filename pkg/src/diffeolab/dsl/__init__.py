"""Declarative documents: parse, run, emit."""

from .emit import emit, emit_definitions
from .parser import Document, parse
from .runner import Config, Report, run

__all__ = ["Config", "Document", "Report", "emit", "emit_definitions", "parse", "run"]
