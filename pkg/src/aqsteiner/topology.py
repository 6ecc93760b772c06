"""Bit-level model of the augmented cube.

Conventions used everywhere in this package:

- A vertex of the n-dimensional augmented cube is an n-bit label
  x1 x2 ... xn, with x1 the leading (split) bit.  The integer encoding
  keeps x1 as the most significant of the n stored bits, so the label
  "0110" is the integer 6 at dimension 4.
- Two labels are adjacent iff they differ in exactly one bit position,
  or in a full trailing block (positions i..n all flipped).  This is
  equivalent to the recursive picture: two (n-1)-dimensional copies
  (leading bit 0 / leading bit 1) joined by the "hypercube" perfect
  matching (flip the leading bit only) and the "complement" perfect
  matching (flip every bit).
- The graph is never materialised.  Adjacency is O(1) on labels and
  neighbour enumeration is O(n); ``GraphView`` restricts the vertex set
  (and optionally deletes edges) without copying anything.

The xor structure of the adjacency rule makes every label translation
v -> v ^ a an automorphism, as is the map that complements the trailing
bits of the upper copy only (which exchanges the two cross matchings).
Both are exposed here; the constructor uses them to normalise instances
and the base-case cache uses them for canonical forms.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

MAX_DIM = 62


class ContractViolation(ValueError):
    """An argument broke a documented precondition."""


class Vertex(NamedTuple):
    """An n-bit vertex label: ``bits`` below ``2**dim``, leading bit first."""

    bits: int
    dim: int

    def label(self) -> str:
        return format(self.bits, f"0{self.dim}b")

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.label()


def parse_vertex(text: str) -> Vertex:
    """Parse a binary string such as "0101" into a Vertex."""
    if not text or any(ch not in "01" for ch in text):
        raise ContractViolation(f"not a binary vertex label: {text!r}")
    if len(text) > MAX_DIM:
        raise ContractViolation(f"label longer than {MAX_DIM} bits: {text!r}")
    return Vertex(int(text, 2), len(text))


class Side(Enum):
    ZERO = 0
    ONE = 1


@functools.lru_cache(maxsize=None)
def adjacency_deltas(dim: int) -> tuple[int, ...]:
    """The xor set D of AQ_dim: u ~ v iff (u ^ v) in D.

    D holds the n single-bit masks plus the n-1 proper trailing blocks,
    2*dim - 1 values in total.
    """
    singles = [1 << (dim - i) for i in range(1, dim + 1)]
    trailing = [(1 << (dim - i + 1)) - 1 for i in range(1, dim)]
    return tuple(sorted(set(singles + trailing)))


@functools.lru_cache(maxsize=None)
def _delta_set(dim: int) -> frozenset[int]:
    return frozenset(adjacency_deltas(dim))


@dataclass(frozen=True)
class AugmentedCube:
    """The implicit augmented cube of a given dimension (1 <= dim <= 62)."""

    dim: int

    def __post_init__(self) -> None:
        if not 1 <= self.dim <= MAX_DIM:
            raise ContractViolation(f"dimension must be in 1..{MAX_DIM}, got {self.dim}")

    @property
    def order(self) -> int:
        return 1 << self.dim

    @property
    def degree(self) -> int:
        return 2 * self.dim - 1

    def check_label(self, v: int) -> None:
        if not 0 <= v < (1 << self.dim):
            raise ContractViolation(f"label {v} out of range for dimension {self.dim}")

    def check_vertex(self, v: Vertex) -> None:
        if v.dim != self.dim:
            raise ContractViolation(f"vertex dimension {v.dim} does not match cube dimension {self.dim}")
        self.check_label(v.bits)

    def adjacent_labels(self, u: int, v: int) -> bool:
        return (u ^ v) in _delta_set(self.dim)

    def neighbor_labels(self, v: int) -> list[int]:
        return sorted(v ^ d for d in adjacency_deltas(self.dim))

    def vertex(self, bits: int) -> Vertex:
        self.check_label(bits)
        return Vertex(bits, self.dim)

    def view(self) -> "GraphView":
        return GraphView(self)


# ---------------------------------------------------------------------------
# label-level maps (hot paths work on plain ints)
# ---------------------------------------------------------------------------

def h_label(v: int, dim: int) -> int:
    """Cross-matching partner that keeps the trailing bits (flip bit 1)."""
    return v ^ (1 << (dim - 1))


def c_label(v: int, dim: int) -> int:
    """Cross-matching partner that complements every bit."""
    return v ^ ((1 << dim) - 1)


def complement_label(v: int, dim: int) -> int:
    return v ^ ((1 << dim) - 1)


def hc_swap_label(v: int, dim: int) -> int:
    """Complement the trailing bits of upper-copy labels, fix the lower copy.

    Linear over GF(2), hence adjacency preserving; exchanges the two cross
    matchings: for every lower-copy x it swaps h_label(x) and c_label(x).
    """
    half = 1 << (dim - 1)
    return v ^ (half - 1) if v & half else v


def xor_label(v: int, mask: int) -> int:
    """Label translation; adjacency depends only on u ^ v, so any xor shift
    is an automorphism."""
    return v ^ mask


# ---------------------------------------------------------------------------
# operations on Vertex values
# ---------------------------------------------------------------------------

def neighbors(g: AugmentedCube, v: Vertex) -> set[Vertex]:
    """All 2*dim - 1 neighbours of v."""
    g.check_vertex(v)
    return {Vertex(w, g.dim) for w in g.neighbor_labels(v.bits)}


def is_adjacent(g: AugmentedCube, u: Vertex, v: Vertex) -> bool:
    g.check_vertex(u)
    g.check_vertex(v)
    return u.bits != v.bits and g.adjacent_labels(u.bits, v.bits)


def split_side(v: Vertex) -> Side:
    """Which half-copy holds v (the leading bit); undefined at dimension 1."""
    if v.dim < 2:
        raise ContractViolation("no split below dimension 2")
    return Side.ONE if v.bits & (1 << (v.dim - 1)) else Side.ZERO


def h_image(v: Vertex) -> Vertex:
    if v.dim < 2:
        raise ContractViolation("no cross matching below dimension 2")
    return Vertex(h_label(v.bits, v.dim), v.dim)


def c_image(v: Vertex) -> Vertex:
    if v.dim < 2:
        raise ContractViolation("no cross matching below dimension 2")
    return Vertex(c_label(v.bits, v.dim), v.dim)


def complement_automorphism(v: Vertex) -> Vertex:
    """Full bitwise complement; an involutive automorphism that swaps the
    two half-copies."""
    return Vertex(complement_label(v.bits, v.dim), v.dim)


def hc_swap_automorphism(v: Vertex) -> Vertex:
    """Involutive automorphism fixing the lower copy pointwise and swapping
    each lower-copy vertex's two cross-matching partners."""
    if v.dim < 2:
        raise ContractViolation("no split below dimension 2")
    return Vertex(hc_swap_label(v.bits, v.dim), v.dim)


def side_isomorphism(kind: str, v: Vertex) -> Vertex:
    """Edge-preserving bijection from the lower copy onto the upper copy.

    kind "H" prepends 1 keeping the trailing bits; kind "C" prepends 1 and
    complements the trailing bits.  Input must lie on side ZERO.
    """
    if kind not in ("H", "C"):
        raise ContractViolation(f"isomorphism kind must be 'H' or 'C', got {kind!r}")
    if split_side(v) is not Side.ZERO:
        raise ContractViolation("side isomorphism expects a side-ZERO vertex")
    return h_image(v) if kind == "H" else c_image(v)


def sub_cube_vertices(g: AugmentedCube, fixed_prefix: str) -> set[Vertex]:
    """Vertices whose label extends the given prefix.

    The induced subgraph on them is a copy of the augmented cube of
    dimension dim - len(prefix).
    """
    if any(ch not in "01" for ch in fixed_prefix):
        raise ContractViolation(f"prefix must be binary, got {fixed_prefix!r}")
    if len(fixed_prefix) >= g.dim:
        raise ContractViolation("prefix must be shorter than the dimension")
    rest = g.dim - len(fixed_prefix)
    base = int(fixed_prefix, 2) << rest if fixed_prefix else 0
    return {Vertex(base | t, g.dim) for t in range(1 << rest)}


# ---------------------------------------------------------------------------
# restricted views
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphView:
    """A vertex-filtered (and optionally edge-deleted) slice of a cube.

    allowed=None means the full vertex set.  removed_edges holds sorted
    label pairs.  Everything stays implicit; neighbour queries filter on
    the fly and always return labels in ascending order.
    """

    cube: AugmentedCube
    allowed: frozenset[int] | None = None
    removed_edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    @property
    def dim(self) -> int:
        return self.cube.dim

    def contains_label(self, v: int) -> bool:
        if not 0 <= v < self.cube.order:
            return False
        return self.allowed is None or v in self.allowed

    def vertex_labels(self) -> list[int]:
        if self.allowed is None:
            return list(range(self.cube.order))
        return sorted(self.allowed)

    def has_edge_labels(self, u: int, v: int) -> bool:
        if u == v or not (self.contains_label(u) and self.contains_label(v)):
            return False
        if (min(u, v), max(u, v)) in self.removed_edges:
            return False
        return self.cube.adjacent_labels(u, v)

    def neighbor_labels(self, v: int) -> list[int]:
        out = []
        for w in self.cube.neighbor_labels(v):
            if self.contains_label(w) and (min(v, w), max(v, w)) not in self.removed_edges:
                out.append(w)
        return out

    def degree_label(self, v: int) -> int:
        return len(self.neighbor_labels(v))

    def without_edge(self, u: int, v: int) -> "GraphView":
        pair = (min(u, v), max(u, v))
        return GraphView(self.cube, self.allowed, self.removed_edges | {pair})


def side_view(g: AugmentedCube, side: Side) -> GraphView:
    """The induced half-copy (isomorphic to the cube one dimension down)."""
    if g.dim < 2:
        raise ContractViolation("no split below dimension 2")
    half = 1 << (g.dim - 1)
    labels = range(half, 2 * half) if side is Side.ONE else range(half)
    return GraphView(g, frozenset(labels))
