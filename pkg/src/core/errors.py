"""Exception hierarchy shared by the services, the prover and the CLI."""

from __future__ import annotations


class StanleyError(Exception):
    """Base class for every error raised by this package."""


class InputError(StanleyError, ValueError):
    """Malformed input: bad generators, residues, term syntax, flags."""


class BudgetExceededError(StanleyError, RuntimeError):
    """A configured resource budget would be exceeded."""


class PreconditionError(StanleyError, RuntimeError):
    """An operation was handed a state it does not accept."""


class InvariantViolation(StanleyError, AssertionError):
    """A theorem-backed check failed; this is a bug, not bad input."""
