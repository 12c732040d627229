"""Forward-mode automatic differentiation and classic differentiation kernels.

Two jet classes carry first- and second-order Taylor data through ordinary
arithmetic.  Values and partials may be python scalars, complex numbers, or
numpy arrays (broadcasting applies elementwise), so a single closed-form
expression evaluated on seeded jets yields exact derivatives on a whole grid
at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

_EPS = float(np.finfo(float).eps)


class SchemeError(RuntimeError):
    """A differentiation scheme failed (non-finite output, step underflow,
    or the scheme does not apply to the supplied map)."""


class Jet:
    """First-order jet: value plus partials w.r.t. the seeded variables."""

    __slots__ = ("val", "d")
    __array_ufunc__ = None  # make ndarray <op> Jet defer to the r-methods

    def __init__(self, val, d):
        self.val = val
        self.d = tuple(d)

    @classmethod
    def seed(cls, values):
        """Turn a list of independent variables into jets with unit partials."""
        n = len(values)
        return [cls(v, tuple(1.0 if j == i else 0.0 for j in range(n)))
                for i, v in enumerate(values)]

    def _nvars(self):
        return len(self.d)

    def __add__(self, o):
        if isinstance(o, Jet):
            return Jet(self.val + o.val, tuple(a + b for a, b in zip(self.d, o.d)))
        return Jet(self.val + o, self.d)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, tuple(-a for a in self.d))

    def __sub__(self, o):
        if isinstance(o, Jet):
            return Jet(self.val - o.val, tuple(a - b for a, b in zip(self.d, o.d)))
        return Jet(self.val - o, self.d)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, Jet):
            return Jet(self.val * o.val,
                       tuple(a * o.val + self.val * b for a, b in zip(self.d, o.d)))
        return Jet(self.val * o, tuple(a * o for a in self.d))

    __rmul__ = __mul__

    def reciprocal(self):
        iv = 1.0 / self.val
        m = -iv * iv
        return Jet(iv, tuple(a * m for a in self.d))

    def __truediv__(self, o):
        if isinstance(o, Jet):
            return self * o.reciprocal()
        return self * (1.0 / o)

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def __pow__(self, p):
        if not isinstance(p, (int, np.integer)):
            raise TypeError("jets support integer powers only")
        if p == 0:
            return Jet(self.val**0, tuple(0.0 * a for a in self.d))
        if p < 0:
            return self.reciprocal() ** (-p)
        m = p * self.val ** (p - 1)
        return Jet(self.val**p, tuple(m * a for a in self.d))


class Jet2:
    """Second-order jet: value, partials, and a full symmetric Hessian block."""

    __slots__ = ("val", "d", "h")
    __array_ufunc__ = None

    def __init__(self, val, d, h):
        self.val = val
        self.d = tuple(d)
        self.h = tuple(tuple(row) for row in h)

    @classmethod
    def seed(cls, values):
        n = len(values)
        zero_h = tuple(tuple(0.0 for _ in range(n)) for _ in range(n))
        return [cls(v, tuple(1.0 if j == i else 0.0 for j in range(n)), zero_h)
                for i, v in enumerate(values)]

    def _nvars(self):
        return len(self.d)

    def __add__(self, o):
        if isinstance(o, Jet2):
            return Jet2(self.val + o.val,
                        tuple(a + b for a, b in zip(self.d, o.d)),
                        tuple(tuple(a + b for a, b in zip(r1, r2))
                              for r1, r2 in zip(self.h, o.h)))
        return Jet2(self.val + o, self.d, self.h)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.val, tuple(-a for a in self.d),
                    tuple(tuple(-a for a in row) for row in self.h))

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        n = self._nvars()
        if not isinstance(o, Jet2):
            return Jet2(self.val * o, tuple(a * o for a in self.d),
                        tuple(tuple(a * o for a in row) for row in self.h))
        d = tuple(self.d[i] * o.val + self.val * o.d[i] for i in range(n))
        h = tuple(tuple(self.h[i][j] * o.val + self.d[i] * o.d[j]
                        + self.d[j] * o.d[i] + self.val * o.h[i][j]
                        for j in range(n)) for i in range(n))
        return Jet2(self.val * o.val, d, h)

    __rmul__ = __mul__

    def reciprocal(self):
        n = self._nvars()
        iv = 1.0 / self.val
        iv2 = iv * iv
        iv3 = iv2 * iv
        d = tuple(-self.d[i] * iv2 for i in range(n))
        h = tuple(tuple(2.0 * self.d[i] * self.d[j] * iv3 - self.h[i][j] * iv2
                        for j in range(n)) for i in range(n))
        return Jet2(iv, d, h)

    def __truediv__(self, o):
        if isinstance(o, Jet2):
            return self * o.reciprocal()
        return self * (1.0 / o)

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def __pow__(self, p):
        if not isinstance(p, (int, np.integer)):
            raise TypeError("jets support integer powers only")
        n = self._nvars()
        if p == 0:
            zero = tuple(0.0 * a for a in self.d)
            return Jet2(self.val**0, zero, tuple(zero for _ in range(n)))
        if p < 0:
            return self.reciprocal() ** (-p)
        vp1 = self.val ** (p - 1)
        vp2 = self.val ** (p - 2) if p >= 2 else 0.0 * self.val
        d = tuple(p * vp1 * self.d[i] for i in range(n))
        h = tuple(tuple(p * vp1 * self.h[i][j]
                        + p * (p - 1) * vp2 * self.d[i] * self.d[j]
                        for j in range(n)) for i in range(n))
        return Jet2(self.val**p, d, h)


def sqrt(x):
    """Square root for plain values and jets."""
    if isinstance(x, Jet):
        s = np.sqrt(x.val)
        m = 0.5 / s
        return Jet(s, tuple(m * a for a in x.d))
    if isinstance(x, Jet2):
        n = x._nvars()
        s = np.sqrt(x.val)
        m = 0.5 / s
        q = -0.25 / (s * x.val)
        d = tuple(m * a for a in x.d)
        h = tuple(tuple(m * x.h[i][j] + q * x.d[i] * x.d[j] for j in range(n))
                  for i in range(n))
        return Jet2(s, d, h)
    return np.sqrt(x)


def exp(x):
    """Exponential for plain values and jets."""
    if isinstance(x, Jet):
        e = np.exp(x.val)
        return Jet(e, tuple(e * a for a in x.d))
    if isinstance(x, Jet2):
        n = x._nvars()
        e = np.exp(x.val)
        d = tuple(e * a for a in x.d)
        h = tuple(tuple(e * (x.h[i][j] + x.d[i] * x.d[j]) for j in range(n))
                  for i in range(n))
        return Jet2(e, d, h)
    return np.exp(x)


class SchemeKind(Enum):
    DUAL_NUMBER = "dual"
    COMPLEX_STEP = "complex_step"
    CENTRAL_DIFFERENCE = "central"


@dataclass(frozen=True)
class DifferentiationScheme:
    """Differentiation scheme selector.

    `step` is ignored by the dual-number scheme.  The complex-step scheme
    applies only to real-analytic real-valued scalar maps.
    """

    kind: SchemeKind = SchemeKind.DUAL_NUMBER
    step: float | None = None

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise ValueError("differentiation step must be positive")

    def resolved_step(self, x=0.0):
        if self.step is not None:
            return self.step
        if self.kind is SchemeKind.COMPLEX_STEP:
            return 1e-20
        scale = float(np.max(np.abs(x))) if np.ndim(x) else abs(float(np.real(x)))
        return _EPS ** (1.0 / 3.0) * (1.0 + scale)


DUAL = DifferentiationScheme(SchemeKind.DUAL_NUMBER)
COMPLEX_STEP = DifferentiationScheme(SchemeKind.COMPLEX_STEP)
CENTRAL = DifferentiationScheme(SchemeKind.CENTRAL_DIFFERENCE)


def _require_finite(value, what):
    if not np.all(np.isfinite(value)):
        raise SchemeError(f"non-finite output in {what}")
    return value


def derivative(f, x, scheme=DUAL):
    """First derivative of the scalar map `f` at `x` under the chosen scheme.

    DualNumber requires `f` to accept `Jet` inputs and is exact to roundoff.
    ComplexStep requires a real-analytic, real-valued `f` (no subtractive
    cancellation); CentralDifference has O(step^2) truncation error.
    """
    if scheme.kind is SchemeKind.DUAL_NUMBER:
        (xj,) = Jet.seed([x])
        y = f(xj)
        if not isinstance(y, Jet):
            return 0.0 * x
        return _require_finite(y.d[0], "dual-number derivative")
    if scheme.kind is SchemeKind.COMPLEX_STEP:
        h = scheme.resolved_step(x)
        y = f(x + 1j * h)
        return _require_finite(np.imag(y) / h, "complex-step derivative")
    h = scheme.resolved_step(x)
    if np.any(x + h == x) or np.any(x - h == x):
        raise SchemeError(f"central-difference step {h} underflows at x={x}")
    out = (f(x + h) - f(x - h)) / (2.0 * h)
    return _require_finite(out, "central-difference derivative")
