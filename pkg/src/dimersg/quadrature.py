"""Quadrature building blocks.

Two regimes are needed:

* smooth decaying integrands on finite intervals -> adaptive Simpson with an
  embedded (Richardson) error estimate,
* smooth integrands on [0, inf) whose modulus is controlled by an explicit
  exponential envelope -> truncate where the envelope drops below ``tail_tol``
  and integrate the finite piece adaptively.

Periodic integrands (contour integrals over the unit circle) do not live
here; they use plain uniform trapezoid sums in :mod:`dimersg.kernel`, which
converge exponentially for analytic integrands.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AccuracyError


def adaptive_simpson(f, a, b, tol=1e-12, max_depth=48):
    """Integrate ``f`` over [a, b] by adaptive Simpson subdivision.

    ``f`` may return complex values.  The local acceptance test is the
    standard |S2 - S1| <= 15 * tol with the Richardson correction added on
    acceptance.
    """
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if abs(err) <= 15.0 * tol or depth <= 0:
        if depth <= 0 and abs(err) > 1e3 * tol:
            raise AccuracyError(
                f"adaptive Simpson failed on [{a:g},{b:g}]: local error {abs(err):.2e}"
            )
        return left + right + err / 15.0
    return (_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + _simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1))


def tail_truncated_quad(f, envelope_rate, tol=1e-11, tail_tol=1e-15, t_min_cap=1e6):
    """Integrate f over [0, inf) where |f(t)| <= C * exp(-envelope_rate*sqrt(t)).

    The truncation point T solves exp(-rate*sqrt(T)) = tail_tol; the finite
    part is split geometrically so the adaptive rule is not handed one huge
    interval.  Raises AccuracyError when the required T is absurd (envelope
    too weak for the requested tail tolerance).
    """
    if envelope_rate <= 0.0:
        raise AccuracyError("tail truncation needs a positive decay rate")
    T = (math.log(1.0 / tail_tol) / envelope_rate) ** 2
    if T > t_min_cap:
        raise AccuracyError(
            f"tail truncation point T={T:.3g} exceeds cap; decay rate {envelope_rate:.3g} too small"
        )
    total = 0.0 + 0.0j
    lo = 0.0
    hi = min(1.0, T)
    while lo < T:
        total += adaptive_simpson(f, lo, hi, tol=tol * max(hi - lo, 1.0) / max(T, 1.0))
        lo, hi = hi, min(hi * 4.0, T)
    return total


def doubling_trapezoid(f_vec, a, b, tol=1e-13, n0=64, n_max=1 << 22, open_rule=False):
    """Uniform trapezoid/midpoint sums with node doubling until stable.

    ``f_vec`` maps a node array to values.  With ``open_rule`` the midpoint
    rule is used (no endpoint evaluations), appropriate when endpoints are
    removable or the integrand is periodic-smooth.
    """
    n = n0
    prev = None
    while n <= n_max:
        if open_rule:
            x = a + (b - a) * (np.arange(n) + 0.5) / n
            val = (b - a) * f_vec(x).sum() / n
        else:
            x = np.linspace(a, b, n + 1)
            y = f_vec(x)
            val = (b - a) * (0.5 * y[0] + y[1:-1].sum() + 0.5 * y[-1]) / n
        if prev is not None and abs(val - prev) <= tol * (1.0 + abs(val)):
            return val
        prev = val
        n *= 2
    raise AccuracyError(f"trapezoid failed to converge at n={n_max}")
