"""Exception types shared across the package."""


class CogiaError(Exception):
    """Base class for all cogia-specific errors."""


class ScenarioError(CogiaError, ValueError):
    """Invalid scenario configuration (bad dimensions, unknown keys, bad JSON)."""


class NoComplement(CogiaError):
    """No orthogonal direction is left: the avoid space fills the receive space."""


class RankDeficient(CogiaError):
    """A matrix that must have full row rank does not; no right inverse exists."""


class InfeasibleAlloc(CogiaError):
    """Stream allocation violates a structural dimension bound."""


class DegenerateChannel(CogiaError):
    """A measure-zero channel draw broke a genericity assumption; redraw."""


class TooManyDegenerateDraws(CogiaError):
    """Retry budget for degenerate channel draws exhausted."""


class GridTooLarge(CogiaError):
    """DoF tuple grid exceeds the configured cap."""
