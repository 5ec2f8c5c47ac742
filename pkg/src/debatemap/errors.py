"""Shared exception base for the toolkit.

Concrete error types live next to the code that raises them; everything
derives from DebatemapError so callers (and the CLI exit-code mapping) can
catch per-module families or the whole lot.
"""


class DebatemapError(Exception):
    """Base class for all toolkit errors."""


class IoFailure(DebatemapError):
    """Reading or writing an artifact failed."""
