"""Smooth compactly supported test functions with analytic derivatives.

The building block is the standard bump b(x) = A exp(-1/(1 - |x-c|^2/R^2)) on
|x-c| < R.  Real test functions satisfying the disjoint-support decomposition
f = d g + dbar h (g, h supported where f is) are exactly the combinations
f = c0 d0(u) + c1 d1(v) of bump partials: take g = c1 v + i c0 u, h = conj(g),
then f = 2 Re(d g).  All derivative rules are analytic; no numerical
differentiation enters the field pairings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Bump:
    centre: tuple[float, float]
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.radius <= 0.0:
            raise DomainError("bump radius must be positive")

    def _u(self, x0, x1):
        d0 = np.asarray(x0, dtype=float) - self.centre[0]
        d1 = np.asarray(x1, dtype=float) - self.centre[1]
        return d0, d1, (d0 * d0 + d1 * d1) / self.radius**2

    def value(self, x0, x1):
        d0, d1, u = self._u(x0, x1)
        out = np.zeros_like(u)
        inside = u < 1.0 - 1e-14
        out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - u[inside]))
        return out

    def _grad_common(self, x0, x1):
        d0, d1, u = self._u(x0, x1)
        inside = u < 1.0 - 1e-14
        b = np.zeros_like(u)
        s = np.zeros_like(u)
        b[inside] = self.amplitude * np.exp(-1.0 / (1.0 - u[inside]))
        s[inside] = 1.0 / (1.0 - u[inside]) ** 2
        return d0, d1, u, b, s, inside

    def d0(self, x0, x1):
        d0, _, _, b, s, _ = self._grad_common(x0, x1)
        return -2.0 * b * s * d0 / self.radius**2

    def d1(self, x0, x1):
        _, d1, _, b, s, _ = self._grad_common(x0, x1)
        return -2.0 * b * s * d1 / self.radius**2

    def second(self, i, j, x0, x1):
        """Analytic second partial d_i d_j of the bump."""
        d0, d1, u, b, s, inside = self._grad_common(x0, x1)
        di = d0 if i == 0 else d1
        dj = d0 if j == 0 else d1
        r2 = self.radius**2
        out = np.zeros_like(u)
        one_mu = np.where(inside, 1.0 - u, 1.0)
        coef = (1.0 / one_mu**4 - 2.0 / one_mu**3)
        out = b * (coef * (2.0 * di / r2) * (2.0 * dj / r2)
                   - (2.0 / r2) * s * (1.0 if i == j else 0.0))
        return np.where(inside, out, 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Linear combination of bumps and first partials of bumps.

    terms: tuples (coeff, direction, bump) with direction in {None, 0, 1};
    None means the bump itself, 0/1 a partial derivative.
    """

    terms: tuple

    def value(self, x0, x1):
        out = 0.0
        for coeff, direction, bump in self.terms:
            if direction is None:
                out = out + coeff * bump.value(x0, x1)
            elif direction == 0:
                out = out + coeff * bump.d0(x0, x1)
            else:
                out = out + coeff * bump.d1(x0, x1)
        return out

    def d(self, i, x0, x1):
        """Analytic partial d_i of the whole combination."""
        out = 0.0
        for coeff, direction, bump in self.terms:
            if direction is None:
                out = out + coeff * (bump.d0(x0, x1) if i == 0 else bump.d1(x0, x1))
            else:
                out = out + coeff * bump.second(direction, i, x0, x1)
        return out

    def dbar_d(self, x0, x1):
        """(d f, dbar f) with d = (-i d0 + d1)/2, dbar = (i d0 + d1)/2."""
        g0, g1 = self.d(0, x0, x1), self.d(1, x0, x1)
        return 0.5 * (-1j * g0 + g1), 0.5 * (1j * g0 + g1)

    @property
    def support_centre(self):
        cs = [b.centre for _, _, b in self.terms]
        return (sum(c[0] for c in cs) / len(cs), sum(c[1] for c in cs) / len(cs))

    @property
    def support_radius(self):
        c = self.support_centre
        return max(math.hypot(b.centre[0] - c[0], b.centre[1] - c[1]) + b.radius
                   for _, _, b in self.terms)

    def is_mean_zero(self):
        return all(direction is not None for _, direction, _ in self.terms)


def bump_function(centre, radius, amplitude=1.0) -> TestFunction:
    return TestFunction(((amplitude, None, Bump(tuple(centre), radius, 1.0)),))


def deriv_bump(centre, radius, direction=1, amplitude=1.0) -> TestFunction:
    """f = amplitude * d_direction(bump): the canonical mean-zero test function."""
    return TestFunction(((amplitude, direction, Bump(tuple(centre), radius, 1.0)),))


def supports_disjoint(f1: TestFunction, f2: TestFunction) -> bool:
    c1, c2 = f1.support_centre, f2.support_centre
    return math.hypot(c1[0] - c2[0], c1[1] - c2[1]) > f1.support_radius + f2.support_radius


def condition1_pair(centre1, centre2, radius1, radius2, direction=1,
                    amplitudes=(1.0, 1.0)):
    """Disjoint-support pair f_i = d_direction(bump_i); raises if supports touch."""
    f1 = deriv_bump(centre1, radius1, direction, amplitudes[0])
    f2 = deriv_bump(centre2, radius2, direction, amplitudes[1])
    if not supports_disjoint(f1, f2):
        raise DomainError("condition-1 pair needs disjoint supports")
    return f1, f2
