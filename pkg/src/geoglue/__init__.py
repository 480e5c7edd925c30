"""Symbolic compiler and finite-model workbench for geometric theories."""
from . import syntax, extensions, library  # noqa: F401  (library registers schema families)
