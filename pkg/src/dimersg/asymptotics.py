"""The eps -> 0 limit machinery for the inverse Kasteleyn matrix.

Under a = 1 - lambda*eps with lattice separations (alpha/eps, beta/eps), the
rescaled kernel (+-1/eps) K_a^{-1} converges to Bessel closed forms in
K0(lambda z / sqrt 2), K1(lambda z / sqrt 2), z = sqrt(alpha^2 + beta^2).
This module holds every ingredient of that chain:

* the sign data sigma_1, sigma_2 (with the alpha = -+beta tie conventions),
* the two-term weight g and its pointwise limit g~,
* the saddle function f_{r1,r2}(t) whose real part decreases on (0, pi/2),
* the limiting half-line integral (2 int_0^inf ... g~) and its K0/K1 closed
  form via the root-exponent identities,
* the four closed-form kernel limits and the exact rescaled kernel they are
  checked against in convergence sweeps.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import bessel
from .errors import DomainError
from .kernel import IaCache, WeightParams, g_map, kinv
from .lattice import VertexG
from .quadrature import tail_truncated_quad

# a = 1 - C |z| eps ties the lattice weight to the continuum coupling
SG_COUPLING_C = 4.0 * math.sqrt(2.0) * math.pi * math.exp(-bessel.EULER_GAMMA / 2.0)


def sigmas(alpha: float, beta: float, eps1: int, eps2: int):
    """Tie-broken signs of alpha+beta and alpha-beta."""
    if alpha == 0.0 and beta == 0.0:
        raise DomainError("zero displacement")
    if alpha != -beta:
        s1 = 1 if alpha + beta > 0 else -1
    else:
        s1 = -1 if eps1 == 0 else 1
    if alpha != beta:
        s2 = 1 if alpha - beta > 0 else -1
    else:
        s2 = 1 if eps2 == 0 else -1
    return s1, s2


@dataclass(frozen=True)
class DisplacementParams:
    """Scaled separation data (alpha, beta) with parity and derived signs/radii."""

    alpha: float
    beta: float
    eps1: int
    eps2: int
    sigma1: int = field(init=False)
    sigma2: int = field(init=False)
    r1: float = field(init=False)
    r2: float = field(init=False)
    z: float = field(init=False)

    def __post_init__(self):
        s1, s2 = sigmas(self.alpha, self.beta, self.eps1, self.eps2)
        object.__setattr__(self, "sigma1", s1)
        object.__setattr__(self, "sigma2", s2)
        object.__setattr__(self, "r1", abs(self.alpha - self.beta) / 2.0)
        object.__setattr__(self, "r2", abs(self.alpha + self.beta) / 2.0)
        object.__setattr__(self, "z", math.hypot(self.alpha, self.beta))


@dataclass(frozen=True)
class ScalingParams:
    """eps, lambda and the derived weight a = 1 - lambda*eps and SG coupling."""

    eps: float
    lam: float

    def __post_init__(self):
        if self.eps <= 0.0 or self.lam <= 0.0 or self.lam * self.eps >= 1.0:
            raise DomainError(f"need 0 < lambda*eps < 1, got eps={self.eps}, lambda={self.lam}")

    @property
    def a(self) -> float:
        return 1.0 - self.lam * self.eps

    @property
    def weight(self) -> WeightParams:
        return WeightParams(self.a)

    @property
    def z_sg(self) -> float:
        return self.lam * math.exp(bessel.EULER_GAMMA / 2.0) / (4.0 * math.sqrt(2.0) * math.pi)


def g_fn(w, eps1, eps2, sigma1, sigma2, p: WeightParams):
    """Two-term kernel weight combining powers of i^{-1}G(w), i^{-1}G(1/w)."""
    gw = g_map(w, p) / 1j
    gwi = g_map(1.0 / w, p) / 1j
    t1 = p.a**eps2 * gw ** (sigma2 * (1 - eps2)) * gwi ** (sigma1 * (2 * eps1 - 1) * (1 - eps2))
    t2 = p.a ** (1 - eps2) * gw ** (-sigma2 * eps2) * gwi ** (sigma1 * eps2 * (2 * eps1 - 1))
    return t1 + t2


def g_tilde(t, eps1, eps2, sigma1, sigma2):
    """Pointwise limit of g(i e^{i t eps^2})/eps as eps -> 0, t > 0."""
    t = np.asarray(t, dtype=float)
    out = (-1.0
           - (-1.0) ** eps1 * sigma1 / math.sqrt(2.0) * np.sqrt(1.0 - 4.0j * t)
           + (-1.0) ** eps2 * sigma2 / math.sqrt(2.0) * np.sqrt(1.0 + 4.0j * t))
    return out if out.shape else complex(out)


def saddle_f(t: float, d: DisplacementParams, p: WeightParams) -> complex:
    """f_{r1,r2}(t) = r1 log(i^{-1}G(ie^{it})) + r2 log(i^{-1}G(-ie^{-it})), t in (0, pi/2)."""
    if not 0.0 < t < math.pi / 2.0:
        raise DomainError("saddle_f wants t in (0, pi/2)")
    w1 = 1j * cmath.exp(1j * t)
    w2 = -1j * cmath.exp(-1j * t)
    return d.r1 * cmath.log(g_map(w1, p) / 1j) + d.r2 * cmath.log(g_map(w2, p) / 1j)


def limit_integral(eps1, eps2, sigma1, sigma2, r1, r2) -> complex:
    """2 int_0^inf dt (1+16t^2)^{-1/2} e^{-(r1 sqrt(1+4it)+r2 sqrt(1-4it))/sqrt2} g~(t).

    Complex value; its real part carries the Bessel content (see
    :func:`limit_integral_bessel`).
    """
    if r1 == 0.0 and r2 == 0.0:
        raise DomainError("limit_integral needs (r1, r2) != (0, 0)")

    def f(t):
        return bessel.root_exp_kernel(t, r1, r2) * g_tilde(t, eps1, eps2, sigma1, sigma2)

    return 2.0 * tail_truncated_quad(f, envelope_rate=r1 + r2, tol=1e-12, tail_tol=1e-16)


def limit_integral_bessel(eps1, eps2, sigma1, sigma2, r1, r2) -> float:
    """Closed form of Re(limit_integral) through the root-exponent identities:
    -K0(rho) - (s1 r2 - s2 r1)/rho * K1(rho), s_i = (-1)^{eps_i} sigma_i."""
    rho = math.hypot(r1, r2)
    s1 = (-1.0) ** eps1 * sigma1
    s2 = (-1.0) ** eps2 * sigma2
    return -bessel.k0(rho) - (s1 * r2 - s2 * r1) / rho * bessel.k1(rho)


def kinv_limit(eps1: int, eps2: int, alpha: float, beta: float, lam: float) -> complex:
    """Closed-form limit of the rescaled inverse Kasteleyn matrix, by parity case."""
    if alpha == 0.0 and beta == 0.0:
        raise DomainError("kinv_limit needs a nonzero displacement")
    if lam <= 0.0:
        raise DomainError("lambda must be positive")
    z = math.hypot(alpha, beta)
    arg = lam * z / math.sqrt(2.0)
    K0, K1 = bessel.k0(arg), bessel.k1(arg)
    c0 = lam / (2.0 * math.pi)
    c1 = lam / (math.sqrt(2.0) * math.pi * z)
    if (eps1, eps2) == (0, 0):
        return 1j * (c0 * K0 + c1 * beta * K1)
    if (eps1, eps2) == (0, 1):
        return -(c0 * K0 + c1 * alpha * K1)
    if (eps1, eps2) == (1, 0):
        return -(c0 * K0 - c1 * alpha * K1)
    if (eps1, eps2) == (1, 1):
        return 1j * (c0 * K0 - c1 * beta * K1)
    raise DomainError(f"bad parity case ({eps1}, {eps2})")


def scaled_pair(alpha: float, beta: float, eps1: int, eps2: int,
                s: ScalingParams) -> tuple[VertexG, VertexG]:
    """Vertex pair (x white, y black) at scaled separation (alpha, beta)/eps.

    Requires (alpha/eps, beta/eps) in (2Z)^2; violations raise a scheduling
    error (pick eps from the admissible grid, e.g. alpha/(4m)).
    """
    am, bm = alpha / s.eps, beta / s.eps
    for name, v in (("alpha", am), ("beta", bm)):
        if abs(v - 2.0 * round(v / 2.0)) > 1e-9:
            raise DomainError(
                f"{name}/eps = {v:g} is not an even integer; choose eps on the admissible grid")
    am, bm = round(am), round(bm)
    x = VertexG(1 + am - bm, 1 + am + bm + (2 * eps1 - 1))
    y = VertexG(1 + (2 * eps2 - 1), 1)
    return x, y


def scaled_kinv(x: VertexG, y: VertexG, s: ScalingParams,
                cache: IaCache | None = None) -> complex:
    """((-1)^{(alpha+beta)/(2 eps)} / eps) K_a^{-1}(x, y) at a = 1 - lambda*eps."""
    eps1 = x.cls.index
    half = (x.y - y.y - (2 * eps1 - 1)) / 2.0   # (alpha+beta)/(2 eps), an integer
    if abs(half - round(half)) > 1e-9:
        raise DomainError("vertex pair is not on the scaled-coordinate lattice")
    sign = -1.0 if round(half) % 2 else 1.0
    return sign / s.eps * kinv(x, y, s.weight, cache)


def convergence_sweep(eps1, eps2, alpha, beta, lam, ms=(2, 4, 8, 16),
                      cache: IaCache | None = None):
    """Rescaled-kernel error against the closed-form limit over eps = base/(4m).

    Returns rows (eps, re_exact, im_exact, re_limit, im_limit, abs_err).
    """
    base = alpha if alpha != 0.0 else beta
    if base == 0.0:
        raise DomainError("sweep needs a nonzero displacement")
    lim = kinv_limit(eps1, eps2, alpha, beta, lam)
    rows = []
    for m in ms:
        eps = abs(base) / (4.0 * m)
        s = ScalingParams(eps, lam)
        x, y = scaled_pair(alpha, beta, eps1, eps2, s)
        val = scaled_kinv(x, y, s, cache)
        rows.append({"eps": eps, "re_exact": val.real, "im_exact": val.imag,
                     "re_limit": lim.real, "im_limit": lim.imag,
                     "abs_err": abs(val - lim)})
    return rows


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DomainError("log-log slope needs positive data")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
