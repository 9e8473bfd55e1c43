"""Exception hierarchy shared across the package.

Three broad families map onto the process exit codes used by the CLI:
configuration problems (1), data problems (2), and transport problems
when talking to a live model endpoint (3).
"""

from __future__ import annotations


class EsgbenchError(Exception):
    """Base class for every error raised deliberately by this package."""

    exit_code = 1


class ConfigError(EsgbenchError):
    """Invalid configuration, registry, template, or CLI arguments."""

    exit_code = 1


class DataError(EsgbenchError):
    """Input data that cannot be processed (malformed, missing, degenerate)."""

    exit_code = 2


class IngestError(DataError):
    """Sheet-level failure during ingestion; message names the offending file."""


class TransportError(EsgbenchError):
    """Failure while talking to a live LLM endpoint after retries ran out."""

    exit_code = 3
