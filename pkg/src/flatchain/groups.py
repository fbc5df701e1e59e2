"""Normed abelian coefficient groups.

Group elements are plain Python values (``float`` for the reals, ``int`` for
the integers and ``Z/m``, tuples of floats for Euclidean vectors).  The group
object carries the algebra and the norm, so chains can store raw values.
"""

from __future__ import annotations

import math
import re
from typing import Any

#: relative tolerance used to decide that a real coefficient vanished
REAL_TOL = 1e-9


class ConfigError(ValueError):
    """Operands or configuration do not fit together (group, degree, spacing)."""


class CoefficientGroup:
    """Base class; subclasses implement the group law and the norm."""

    tag: str = ""
    #: True when equality of elements is decided exactly (no float tolerance)
    exact: bool = True

    def zero(self) -> Any:
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def norm(self, a) -> float:
        raise NotImplementedError

    def coerce(self, value):
        """Convert a JSON-ish value to a canonical element."""
        raise NotImplementedError

    def to_json(self, a):
        return a

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def scale(self, a, sign: int):
        """Multiply by an integer (used with incidence signs +-1)."""
        if sign == 1:
            return a
        if sign == -1:
            return self.neg(a)
        out = self.zero()
        step = a if sign > 0 else self.neg(a)
        for _ in range(abs(sign)):
            out = self.add(out, step)
        return out

    def is_zero(self, a, scale: float = 0.0) -> bool:
        """Whether ``a`` is zero; ``scale`` is the operand size for float noise."""
        nrm = self.norm(a)
        if self.exact or scale <= 0:
            return nrm == 0
        return nrm <= REAL_TOL * scale

    def __eq__(self, other):
        return isinstance(other, CoefficientGroup) and self.tag == other.tag

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return f"{type(self).__name__}({self.tag!r})"


class RealGroup(CoefficientGroup):
    tag = "R"
    exact = False

    def zero(self):
        return 0.0

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def norm(self, a):
        return abs(a)

    def coerce(self, value):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"real coefficient expected, got {value!r}")
        return float(value)


class IntegerGroup(CoefficientGroup):
    tag = "Z"

    def zero(self):
        return 0

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def norm(self, a):
        return abs(a)

    def coerce(self, value):
        if isinstance(value, bool):
            raise ConfigError(f"integer coefficient expected, got {value!r}")
        if isinstance(value, float):
            if not value.is_integer():
                raise ConfigError(f"integer coefficient expected, got {value!r}")
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"integer coefficient expected, got {value!r}")
        return value

    def is_zero(self, a, scale: float = 0.0) -> bool:
        return a == 0


class ModGroup(CoefficientGroup):
    """``Z/m`` with the quotient norm ``min(g mod m, m - g mod m)``."""

    def __init__(self, m: int):
        if m < 2:
            raise ConfigError("Z/m needs m >= 2")
        self.m = int(m)
        self.tag = f"Z/{self.m}"

    def zero(self):
        return 0

    def add(self, a, b):
        return (a + b) % self.m

    def neg(self, a):
        return (-a) % self.m

    def norm(self, a):
        r = a % self.m
        return min(r, self.m - r)

    def coerce(self, value):
        return IntegerGroup().coerce(value) % self.m

    def is_zero(self, a, scale: float = 0.0) -> bool:
        return a % self.m == 0


class VectorGroup(CoefficientGroup):
    """``R^d`` with the Euclidean norm."""

    exact = False

    def __init__(self, d: int):
        if d < 1:
            raise ConfigError("R^d needs d >= 1")
        self.d = int(d)
        self.tag = f"R^{self.d}"

    def zero(self):
        return (0.0,) * self.d

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def norm(self, a):
        return math.hypot(*a)

    def coerce(self, value):
        if not isinstance(value, (list, tuple)) or len(value) != self.d:
            raise ConfigError(f"vector of length {self.d} expected, got {value!r}")
        return tuple(RealGroup().coerce(x) for x in value)

    def to_json(self, a):
        return list(a)


REAL = RealGroup()
INTEGER = IntegerGroup()


def get_group(tag: str) -> CoefficientGroup:
    """Parse a group tag: ``R``, ``Z``, ``Z/m`` or ``R^d``."""
    tag = tag.strip()
    if tag == "R":
        return REAL
    if tag == "Z":
        return INTEGER
    m = re.fullmatch(r"Z/(\d+)", tag)
    if m:
        return ModGroup(int(m.group(1)))
    m = re.fullmatch(r"R\^(\d+)", tag)
    if m:
        return VectorGroup(int(m.group(1)))
    raise ConfigError(f"unknown coefficient group {tag!r}")
