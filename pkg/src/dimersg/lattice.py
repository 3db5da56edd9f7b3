"""Rotated-lattice bookkeeping: parity classes, the 45-degree change of
coordinates, Kasteleyn entries and the (k, l) index pairs that feed the
kernel integrals.

Two pictures are used throughout.  The axis-aligned picture ("tilde") has
vertices on Z^2 and a-faces centred at (2Z+1/2) x (2Z+1/2).  The rotated
picture G has vertices on {x+y odd} with

    B_i = {x even, y odd, x+y = 2i+1 mod 4},
    W_i = {x odd, y even, x+y = 2i+1 mod 4},

edges b-w = +-(1,1), +-(-1,1), and the two pictures related by the affine map
tilde = M (g - (1,0)) + (1,0), M = [[1,-1],[1,1]]/2.  All lattice coordinates
stay exact integers; scaled embeddings happen in the analysis layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

E1 = (1, 1)
E2 = (-1, 1)


class ParityClass(Enum):
    W0 = ("W", 0)
    W1 = ("W", 1)
    B0 = ("B", 0)
    B1 = ("B", 1)

    @property
    def kind(self):
        return self.value[0]

    @property
    def index(self):
        return self.value[1]


def classify_vertex(x: int, y: int) -> ParityClass:
    """Parity class of a rotated-picture vertex; x+y must be odd."""
    if (x + y) % 2 == 0:
        raise DomainError(f"({x},{y}) is not a vertex of the rotated lattice")
    i = ((x + y) % 4 - 1) // 2
    if x % 2 == 0:
        return ParityClass.B1 if i else ParityClass.B0
    return ParityClass.W1 if i else ParityClass.W0


@dataclass(frozen=True)
class VertexG:
    x: int
    y: int

    @property
    def cls(self) -> ParityClass:
        return classify_vertex(self.x, self.y)

    def shifted(self, dx, dy):
        return VertexG(self.x + dx, self.y + dy)


def map_tilde_to_g(p):
    """Axis-aligned point -> rotated point (works on half-integer face centres)."""
    return (p[0] + p[1], p[1] - p[0] + 1)


def map_g_to_tilde(p):
    """Rotated point -> axis-aligned point (inverse of map_tilde_to_g)."""
    return ((p[0] - p[1] + 1) / 2, (p[0] + p[1] - 1) / 2)


def _is_a_edge(b, w):
    # every edge borders exactly one (odd,odd) face; weight a iff its
    # coordinate sum is 2 mod 4
    d = (w[0] - b[0], w[1] - b[1])
    m2 = (b[0] + w[0], b[1] + w[1])              # 2 * midpoint
    for s in (1, -1):
        fx, fy = (m2[0] - s * d[1]) // 2, (m2[1] + s * d[0]) // 2
        if fx % 2 != 0 and fy % 2 != 0:
            return (fx + fy) % 4 == 2
    raise DomainError(f"edge {b}-{w} has no odd-odd face")


@dataclass(frozen=True)
class EdgeDimer:
    """Dimer as an ordered (black, white) pair, matching the K(b, w) convention."""

    black: VertexG
    white: VertexG

    def __post_init__(self):
        if self.black.cls.kind != "B" or self.white.cls.kind != "W":
            raise DomainError(f"edge {self} is not (black, white)")
        d = (self.white.x - self.black.x, self.white.y - self.black.y)
        if d not in (E1, E2, (-1, -1), (1, -1)):
            raise DomainError(f"{self.black} and {self.white} are not adjacent")

    @property
    def weight_class(self) -> str:
        b, w = (self.black.x, self.black.y), (self.white.x, self.white.y)
        return "a-edge" if _is_a_edge(b, w) else "1-edge"


def kasteleyn_entry(b: VertexG, w: VertexG, a: float) -> complex:
    """Kasteleyn matrix element K_a(b, w); 0 for non-adjacent pairs."""
    cb = b.cls
    if cb.kind != "B" or w.cls.kind != "W":
        raise DomainError("kasteleyn_entry wants (black, white)")
    j = cb.index
    d = (w.x - b.x, w.y - b.y)
    if d == (1, 1):
        return complex(a * (1 - j) + j)
    if d == (-1, 1):
        return 1j * (a * j + (1 - j))
    if d == (-1, -1):
        return complex(a * j + (1 - j))
    if d == (1, -1):
        return 1j * (a * (1 - j) + j)
    return 0j


def h_parity(eps1: int, eps2: int) -> int:
    """h(e1, e2) = e1(1-e2) + e2(1-e1) (0 on the diagonal cases, 1 mixed)."""
    return eps1 * (1 - eps2) + eps2 * (1 - eps1)


@dataclass(frozen=True)
class IndexQuad:
    k1: int
    l1: int
    k2: int
    l2: int
    h: int

    def __post_init__(self):
        if self.k2 != self.k1 + 1 - 2 * self.h or self.l2 != self.l1 + 1:
            raise DomainError(f"inconsistent index quad {self}")


def kl_indices(x: VertexG, y: VertexG) -> IndexQuad:
    """Index pairs entering the single-integral kernel, for x white, y black."""
    cx, cy = x.cls, y.cls
    if cx.kind != "W" or cy.kind != "B":
        raise DomainError("kl_indices wants (white, black)")
    h = h_parity(cx.index, cy.index)
    num_k = x.y - y.y - 1
    num_l = y.x - x.x - 1
    if num_k % 2 != 0 or num_l % 2 != 0:
        raise DomainError(f"coordinate/parity mismatch for {x}, {y}")
    k1 = num_k // 2 + h
    l1 = num_l // 2
    return IndexQuad(k1, l1, k1 + 1 - 2 * h, l1 + 1, h)


def fundamental_domain_center(v: VertexG):
    """Centre of the 2x2-periodicity cell containing v (an a-face centre)."""
    c = v.cls
    if c.kind == "W":
        return (v.x - (2 * c.index - 1), v.y)
    return (v.x, v.y - (2 * c.index - 1))
