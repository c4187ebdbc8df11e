"""Logarithm base used when reporting information quantities.

All solvers work in nats internally and convert on the way out.  The
default unit is bits; ``set_log_base("e")`` switches every public
capacity to nats.
"""

import math
from contextlib import contextmanager

_BASE = 2.0


def _parse_base(base):
    if base in (2, 2.0, "2", "bits"):
        return 2.0
    if base in ("e", "nats") or base == math.e:
        return math.e
    raise ValueError(f"log base must be 2 or 'e', got {base!r}")


def set_log_base(base):
    """Set the global log base (2 or ``"e"``)."""
    global _BASE
    _BASE = _parse_base(base)


def get_log_base():
    """Return the current log base as a float (2.0 or e)."""
    return _BASE


def unit_name():
    return "bits" if _BASE == 2.0 else "nats"


@contextmanager
def log_base(base):
    """Temporarily switch the log base.

    Examples
    --------
    >>> with log_base("e"):
    ...     pass
    """
    global _BASE
    old = _BASE
    _BASE = _parse_base(base)
    try:
        yield
    finally:
        _BASE = old


def from_nats(x):
    """Convert a value in nats to the current unit."""
    if _BASE == math.e:
        return x
    return x / math.log(_BASE)


def to_nats(x):
    """Convert a value in the current unit to nats."""
    if _BASE == math.e:
        return x
    return x * math.log(_BASE)
