"""Constructor for maximal families of internally disjoint pendant
Steiner trees on three targets in an augmented cube.

For dimension n >= 3 and any three distinct targets S the constructor
returns 2n - 3 trees in which every target is a leaf, pairwise sharing
no edge and no vertex beyond S.  Dimensions 3 and 4 are solved by
exhaustive search (cached under the label-translation and
matching-swap automorphisms); higher dimensions run a recursive case
analysis on how S straddles the two half-copies:

- all three targets in one half: recurse inside that half, then route
  two extra trees through the quarter-cubes of the other half, using the
  fact that each target has exactly one cross-partner in each quarter;
- two targets x, y below and one target z above: take a full fan of
  2n - 3 disjoint x-y paths below (their endpoint neighbours exhaust the
  whole neighbourhood, so any required neighbour can be pinned by
  reordering), a matching fan above ending at a chosen cross-partner of
  x or y, and splice each below-path to an above-path through one
  cross-matching edge.  Which partner anchors the upper fan, and which
  special trees are carved out, depends on whether x and y are
  cross-twins, whether they are adjacent, and which partners z touches.

Every family is re-verified before being returned; if a case recipe
produces a rejected family (possible only where the case analysis is
ambiguous), a verified fallback takes over and the provenance records
that, so fidelity regressions stay visible.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

from . import paths as _paths
from . import verify as _verify
from .topology import (
    AugmentedCube,
    ContractViolation,
    GraphView,
    Side,
    Vertex,
    c_label,
    h_label,
    hc_swap_label,
    side_view,
)

BASE_SEARCH_BUDGET = 2_000_000
FALLBACK_BUDGET = 200_000


class Case(Enum):
    BASE3 = "Base3"
    BASE4 = "Base4"
    CASE1 = "Case1"
    CASE2_1_1 = "Case2_1_1"
    CASE2_1_2 = "Case2_1_2"
    CASE2_1_3 = "Case2_1_3"
    CASE2_2_1A = "Case2_2_1a"
    CASE2_2_1B = "Case2_2_1b"
    CASE2_2_2A = "Case2_2_2a"
    CASE2_2_2B = "Case2_2_2b"
    CASE2_2_2C = "Case2_2_2c"
    CASE2_2_3A = "Case2_2_3a"
    CASE2_2_3B = "Case2_2_3b"
    CASE2_2_3C = "Case2_2_3c"
    FALLBACK = "FallbackSearch"


@dataclass(frozen=True)
class CaseTag:
    """Which branch built a tree batch, under which normalisation.

    ``normalization`` names the automorphism applied before the roles
    were assigned ("identity", "complement", "hc_swap" or
    "complement+hc_swap"); ``roles`` gives (x, y, z) in normalised
    coordinates for the two-one split branches; ``variant`` records the
    concrete matching/endpoint choice where a branch has symmetric
    mirrors.
    """

    case: Case
    normalization: str = "identity"
    roles: tuple[Vertex, Vertex, Vertex] | None = None
    variant: str = ""


@dataclass(frozen=True)
class SteinerTree:
    terminals: frozenset[Vertex]
    edges: frozenset[tuple[Vertex, Vertex]]


@dataclass(frozen=True)
class TreeFamily:
    dim: int
    terminals: frozenset[Vertex]
    trees: tuple[SteinerTree, ...]
    provenance: tuple[CaseTag, ...]
    fallback_used: bool


class InternalError(RuntimeError):
    """A construction that must succeed did not; carries the case tag."""


class FallbackDisabled(RuntimeError):
    """A case recipe failed verification and fallback was switched off."""


class _BuilderFailure(Exception):
    """Internal: a recipe could not complete (triggers fallback)."""


def target_family_size(dim: int) -> int:
    return 2 * dim - 3


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Instance:
    """A normalised problem: labels after automorphisms, plus the maps."""

    n: int
    names: str
    fwd: Callable[[int], int]
    inv: Callable[[int], int]
    x: int | None  # side-zero roles (two-one split only)
    y: int | None
    z: int | None  # the side-one target


def _validate_terminals(g: AugmentedCube, terminals: Iterable[Vertex]) -> tuple[int, ...]:
    terms = list(terminals)
    if len(terms) != 3:
        raise ContractViolation(f"exactly 3 targets required, got {len(terms)}")
    for t in terms:
        g.check_vertex(t)
    labels = tuple(sorted(t.bits for t in terms))
    if len(set(labels)) != 3:
        raise ContractViolation("targets must be distinct")
    if g.dim < 3:
        raise ContractViolation("construction needs dimension at least 3")
    return labels


def _dispatch(n: int, labels: Sequence[int]) -> tuple[CaseTag, _Instance, tuple[str, str] | None]:
    """Classify a target triple; returns (tag, normalised instance, recipe).

    recipe is the (matching, anchor-role) pair for the branches that have
    symmetric mirrors, None elsewhere.
    """
    g = AugmentedCube(n)
    half = 1 << (n - 1)
    full = (1 << n) - 1
    trail = half - 1
    adj = g.adjacent_labels

    names: list[str] = []
    cur = tuple(labels)
    if sum(1 for v in cur if v & half) >= 2:
        cur = tuple(v ^ full for v in cur)
        names.append("complement")

    apply_swap = False

    def fwd(v: int) -> int:
        if "complement" in names:
            v ^= full
        if apply_swap:
            v = hc_swap_label(v, n)
        return v

    def inv(v: int) -> int:
        if apply_swap:
            v = hc_swap_label(v, n)
        if "complement" in names:
            v ^= full
        return v

    ones = [v for v in cur if v & half]
    if not ones:
        tag = CaseTag(Case.CASE1, "+".join(names) or "identity")
        return tag, _Instance(n, tag.normalization, fwd, inv, None, None, None), None

    z = ones[0]
    u, v = sorted(set(cur) - {z})

    def h(a: int) -> int:
        return a | half

    def c(a: int) -> int:
        return (a ^ trail) | half

    x = y = None
    for cx, cy in ((u, v), (v, u)):
        if z == h(cx):
            x, y = cx, cy
            break
    else:
        for cx, cy in ((u, v), (v, u)):
            if z == c(cx):
                x, y = cx, cy
                apply_swap = True
                names.append("hc_swap")
                z = h(cx)
                break

    norm = "+".join(names) or "identity"

    def mk(case: Case, xx: int, yy: int, variant: str = "") -> tuple[CaseTag, _Instance, tuple[str, str] | None]:
        roles = (Vertex(xx, n), Vertex(yy, n), Vertex(z, n))
        tag = CaseTag(case, norm, roles, variant)
        recipe = None
        if variant and "@" in variant:
            m, w = variant.split("@")
            recipe = (m, w)
        return tag, _Instance(n, norm, fwd, inv, xx, yy, z), recipe

    if x is not None:
        # z is a cross-partner of x (after normalisation, the bit-keeping one)
        if {h(x), c(x)} == {h(y), c(y)}:
            return mk(Case.CASE2_1_1, x, y)
        if adj(z, h(y)):
            return mk(Case.CASE2_1_3, x, y)
        return mk(Case.CASE2_1_2, x, y)

    x, y = u, v
    if {h(x), c(x)} == {h(y), c(y)}:
        zxh, zxc = adj(z, h(x)), adj(z, c(x))
        if zxh and zxc:
            return mk(Case.CASE2_2_1B, x, y)
        if zxh and not zxc:
            # mirror roles so z touches the all-bits partner of x
            return mk(Case.CASE2_2_1A, y, x)
        return mk(Case.CASE2_2_1A, x, y)

    pattern = (adj(z, h(x)), adj(z, c(x)), adj(z, h(y)), adj(z, c(y)))
    xh, xc, yh, yc = pattern
    xside, yside = xh or xc, yh or yc
    suffix = "3" if adj(x, y) else "2"
    cases = {
        "2": (Case.CASE2_2_2A, Case.CASE2_2_2B, Case.CASE2_2_2C),
        "3": (Case.CASE2_2_3A, Case.CASE2_2_3B, Case.CASE2_2_3C),
    }[suffix]
    ca, cb, cc = cases
    if not (xside or yside):
        return mk(ca, x, y, "h@y")
    if yside and not xside:
        return mk(cb, x, y, "h@x")
    if xside and not yside:
        return mk(cb, x, y, "h@y")
    if yh and not yc:
        return mk(cc, x, y, "c@y")
    if xh and not xc:
        return mk(cc, x, y, "c@x")
    if yc and not yh:
        return mk(cc, x, y, "h@y")
    if xc and not xh:
        return mk(cc, x, y, "h@x")
    # z touches all four cross-partners; no splice anchor is clean.  Not
    # observed for dim <= 8; the verified fallback owns this corner.
    return mk(cc, x, y, "c@y")


def classify(g: AugmentedCube, terminals: Iterable[Vertex]) -> CaseTag:
    """Structural classification of a target triple (any dim >= 3)."""
    labels = _validate_terminals(g, terminals)
    tag, _, _ = _dispatch(g.dim, labels)
    return tag


# ---------------------------------------------------------------------------
# recipe building blocks
# ---------------------------------------------------------------------------

def _edge(a: int, b: int, n: int) -> tuple[Vertex, Vertex]:
    return _paths.undirected(Vertex(a, n), Vertex(b, n))


def _path_edges(path: _paths.Path) -> set[tuple[Vertex, Vertex]]:
    return set(path.edges())


def _trunc_edges(path: _paths.Path) -> set[tuple[Vertex, Vertex]]:
    vs = path.vertices[:-1]
    return {_paths.undirected(vs[i], vs[i + 1]) for i in range(len(vs) - 1)}


def _system(g: AugmentedCube, side: Side, src: int, dst: int, k: int) -> _paths.PathSystem:
    res = _paths.disjoint_paths(side_view(g, side), Vertex(src, g.dim), Vertex(dst, g.dim), k)
    if isinstance(res, _paths.MinCut):
        raise _BuilderFailure(
            f"half-copy admits only {res.size} disjoint paths between "
            f"{src:0{g.dim}b} and {dst:0{g.dim}b}, need {k}"
        )
    return res


def _pin_all(ps: _paths.PathSystem, wanted: Sequence[int], n: int) -> _paths.PathSystem:
    try:
        return _paths.reorder_paths(ps, [(i, Vertex(w, n)) for i, w in enumerate(wanted)])
    except _paths.PinUnsatisfiable as exc:
        raise _BuilderFailure(str(exc)) from exc


def _sink_nbrs(ps: _paths.PathSystem) -> list[int]:
    return [_paths.neighbor_along(ps, ps.sink, i).bits for i in range(len(ps.paths))]


_Edges = set[tuple[Vertex, Vertex]]


def _recipe_2_1_1(g: AugmentedCube, x: int, y: int, z: int) -> list[_Edges]:
    n, k = g.dim, target_family_size(g.dim)
    P = _pin_all_partial(_system(g, Side.ZERO, x, y, k), {0: x}, n)
    xc = c_label(x, n)  # equals the bit-keeping partner of y; the star centre
    trees: list[_Edges] = [{_edge(x, xc, n), _edge(y, xc, n), _edge(z, xc, n)}]
    for i in range(1, k):
        yi = _paths.neighbor_along(P, P.sink, i).bits
        yic = c_label(yi, n)
        trees.append(_path_edges(P.paths[i]) | {_edge(yi, yic, n), _edge(yic, z, n)})
    return trees


def _recipe_2_1_2(g: AugmentedCube, x: int, y: int, z: int) -> list[_Edges]:
    n, k = g.dim, target_family_size(g.dim)
    P = _system(g, Side.ZERO, x, y, k)
    Q = _paths.map_path_system(lambda v: Vertex(h_label(v.bits, n), n), P)
    trees: list[_Edges] = []
    for p, q in zip(P.paths, Q.paths):
        if len(p) < 3:
            raise _BuilderFailure("unexpected direct edge between non-adjacent anchors")
        join = p.vertices[-2].bits
        trees.append(_path_edges(p) | _trunc_edges(q) | {_edge(join, h_label(join, n), n)})
    return trees


def _recipe_2_1_3(g: AugmentedCube, x: int, y: int, z: int) -> list[_Edges]:
    n, k = g.dim, target_family_size(g.dim)
    trail = (1 << (n - 1)) - 1
    xch = x ^ trail  # the all-bits partner of z pulled below; adjacent to x
    P = _pin_all_partial(_system(g, Side.ZERO, y, x, k), {0: y, 1: xch}, n)
    x_nb = _sink_nbrs(P)
    xc = c_label(x, n)
    Q = _pin_all(_system(g, Side.ONE, z, xc, k), [c_label(w, n) for w in x_nb], n)
    trees: list[_Edges] = [
        _path_edges(P.paths[1]) | {_edge(xch, z, n)},
        _path_edges(Q.paths[0]) | {_edge(x, xc, n), _edge(y, c_label(y, n), n)},
    ]
    for i in range(2, k):
        trees.append(
            _path_edges(P.paths[i])
            | _trunc_edges(Q.paths[i])
            | {_edge(x_nb[i], c_label(x_nb[i], n), n)}
        )
    return trees


def _recipe_2_2_1a(g: AugmentedCube, x: int, y: int, z: int) -> list[_Edges]:
    n, k = g.dim, target_family_size(g.dim)
    P = _pin_all_partial(_system(g, Side.ZERO, x, y, k), {0: x}, n)
    y_nb = _sink_nbrs(P)
    yc = c_label(y, n)  # bit-keeping partner of x
    Q = _pin_all(_system(g, Side.ONE, z, yc, k), [c_label(w, n) for w in y_nb], n)
    trees: list[_Edges] = [
        _trunc_edges(Q.paths[0]) | {_edge(x, c_label(x, n), n), _edge(y, h_label(y, n), n)}
    ]
    for i in range(1, k):
        trees.append(
            _path_edges(P.paths[i])
            | _trunc_edges(Q.paths[i])
            | {_edge(y_nb[i], c_label(y_nb[i], n), n)}
        )
    return trees


def _recipe_2_2_1b(g: AugmentedCube, x: int, y: int, z: int) -> list[_Edges]:
    n, k = g.dim, target_family_size(g.dim)
    zc = c_label(z, n)  # below, adjacent to y because z touches y's all-bits partner
    P = _pin_all_partial(_system(g, Side.ZERO, x, y, k), {0: zc, 1: x}, n)
    y_nb = _sink_nbrs(P)
    yc = c_label(y, n)
    Q = _pin_all(_system(g, Side.ONE, z, yc, k), [c_label(w, n) for w in y_nb], n)
    trees: list[_Edges] = [
        _path_edges(P.paths[0]) | {_edge(zc, z, n)},
        _path_edges(Q.paths[1]) | {_edge(x, h_label(x, n), n), _edge(y, h_label(y, n), n)},
    ]
    for i in range(2, k):
        trees.append(
            _path_edges(P.paths[i])
            | _trunc_edges(Q.paths[i])
            | {_edge(y_nb[i], c_label(y_nb[i], n), n)}
        )
    return trees


def _recipe_grid(
    g: AugmentedCube, x: int, y: int, z: int, matching: str, anchor: str, adjacent: bool
) -> list[_Edges]:
    """Shared recipe for the non-partner branches: fan below between x and
    y, fan above between z and the chosen cross-partner of the anchor,
    spliced by one matching edge per tree."""
    n, k = g.dim, target_family_size(g.dim)
    img = h_label if matching == "h" else c_label
    w = x if anchor == "x" else y
    w_other = y if anchor == "x" else x
    if z == img(w, n):
        raise _BuilderFailure("upper fan would collapse onto z")
    P = _system(g, Side.ZERO, w_other, w, k)
    if adjacent:
        P = _pin_all_partial(P, {0: w_other}, n)
    w_nb = _sink_nbrs(P)
    Q = _pin_all(_system(g, Side.ONE, z, img(w, n), k), [img(v, n) for v in w_nb], n)
    trees: list[_Edges] = []
    start = 0
    if adjacent:
        trees.append(
            _path_edges(Q.paths[0])
            | {_edge(w_other, img(w_other, n), n), _edge(w, img(w, n), n)}
        )
        start = 1
    for i in range(start, k):
        trees.append(
            _path_edges(P.paths[i])
            | _trunc_edges(Q.paths[i])
            | {_edge(w_nb[i], img(w_nb[i], n), n)}
        )
    return trees


def _pin_all_partial(ps: _paths.PathSystem, pins: dict[int, int], n: int) -> _paths.PathSystem:
    try:
        return _paths.reorder_paths(ps, [(i, Vertex(w, n)) for i, w in sorted(pins.items())])
    except _paths.PinUnsatisfiable as exc:
        raise _BuilderFailure(str(exc)) from exc


_RECIPES: dict[Case, Callable[..., list[_Edges]]] = {
    Case.CASE2_1_1: _recipe_2_1_1,
    Case.CASE2_1_2: _recipe_2_1_2,
    Case.CASE2_1_3: _recipe_2_1_3,
    Case.CASE2_2_1A: _recipe_2_2_1a,
    Case.CASE2_2_1B: _recipe_2_2_1b,
}


def construct_case2_image(g: AugmentedCube, terminals: Iterable[Vertex], tag: CaseTag) -> TreeFamily:
    """Build a family for the branches where z is a cross-partner of x."""
    if tag.case not in (Case.CASE2_1_1, Case.CASE2_1_2, Case.CASE2_1_3):
        raise ContractViolation(f"not a cross-partner branch: {tag.case.value}")
    return _build_case2(g, terminals, tag)


def construct_case2_nonimage(g: AugmentedCube, terminals: Iterable[Vertex], tag: CaseTag) -> TreeFamily:
    """Build a family for the branches where z is not a cross-partner."""
    allowed = (
        Case.CASE2_2_1A,
        Case.CASE2_2_1B,
        Case.CASE2_2_2A,
        Case.CASE2_2_2B,
        Case.CASE2_2_2C,
        Case.CASE2_2_3A,
        Case.CASE2_2_3B,
        Case.CASE2_2_3C,
    )
    if tag.case not in allowed:
        raise ContractViolation(f"not a non-partner branch: {tag.case.value}")
    return _build_case2(g, terminals, tag)


def _build_case2(g: AugmentedCube, terminals: Iterable[Vertex], tag: CaseTag) -> TreeFamily:
    labels = _validate_terminals(g, terminals)
    fresh, inst, recipe = _dispatch(g.dim, labels)
    if fresh.case is not tag.case:
        raise ContractViolation(f"targets classify as {fresh.case.value}, not {tag.case.value}")
    trees = _run_recipe(g, fresh, inst, recipe)
    family = _assemble(g, labels, inst, trees, (fresh,))
    report = _verify.verify_family(g, family)
    if not report.accepted:
        raise _BuilderFailure(f"recipe for {fresh.case.value} produced a rejected family: {report.violations[0].detail}")
    return family


def _run_recipe(g: AugmentedCube, tag: CaseTag, inst: _Instance, recipe: tuple[str, str] | None) -> list[_Edges]:
    x, y, z = inst.x, inst.y, inst.z
    if tag.case in _RECIPES:
        return _RECIPES[tag.case](g, x, y, z)
    if recipe is None:
        raise _BuilderFailure(f"no recipe for {tag.case.value}")
    matching, anchor = recipe
    adjacent = g.adjacent_labels(x, y)
    return _recipe_grid(g, x, y, z, matching, anchor, adjacent)


def _assemble(
    g: AugmentedCube,
    labels: Sequence[int],
    inst: _Instance,
    trees: list[_Edges],
    provenance: tuple[CaseTag, ...],
    fallback: bool = False,
) -> TreeFamily:
    n = g.dim
    terminals = frozenset(Vertex(a, n) for a in labels)
    mapped: list[SteinerTree] = []
    for edges in trees:
        back = frozenset(
            _edge(inst.inv(u.bits), inst.inv(v.bits), n) for (u, v) in edges
        )
        mapped.append(SteinerTree(terminals, back))
    return TreeFamily(
        dim=n,
        terminals=terminals,
        trees=tuple(mapped),
        provenance=provenance,
        fallback_used=fallback,
    )


# ---------------------------------------------------------------------------
# all targets on one side
# ---------------------------------------------------------------------------

def construct_case1(
    g: AugmentedCube,
    terminals: Iterable[Vertex],
    *,
    fidelity: bool = False,
    allow_fallback: bool = True,
) -> TreeFamily:
    """All three targets in one half: recurse, then add one tree through
    each quarter of the other half."""
    labels = _validate_terminals(g, terminals)
    tag, inst, _ = _dispatch(g.dim, labels)
    if tag.case is not Case.CASE1:
        raise ContractViolation(f"targets classify as {tag.case.value}, not Case1")
    n = g.dim
    norm_labels = sorted(inst.fwd(a) for a in labels)

    sub = construct(
        AugmentedCube(n - 1),
        [Vertex(a, n - 1) for a in norm_labels],
        fidelity=fidelity,
        allow_fallback=allow_fallback,
    )
    lifted = embed(sub, 0)

    quarter_trees: list[_Edges] = []
    shift = n - 2
    for quarter in (0b10, 0b11):
        q_labels = frozenset(v for v in range(1 << n) if v >> shift == quarter)
        view = GraphView(g, q_labels)

        def attach(s: int) -> int:
            hs = h_label(s, n)
            return hs if hs >> shift == quarter else c_label(s, n)

        anchors = sorted({attach(s) for s in norm_labels})
        if fidelity:
            span = _paths.hamiltonian_path(
                view, Vertex(min(q_labels), n), Vertex(max(q_labels), n)
            )
            conn: Iterable[tuple[Vertex, Vertex]] = span.edges()
        else:
            conn = _paths.connector_tree(view, [Vertex(a, n) for a in anchors])
        edges = set(conn) | {_edge(s, attach(s), n) for s in norm_labels}
        quarter_trees.append(edges)

    terminals_set = frozenset(Vertex(a, n) for a in labels)
    mapped_quarters = [
        SteinerTree(
            terminals_set,
            frozenset(_edge(inst.inv(u.bits), inst.inv(v.bits), n) for (u, v) in t),
        )
        for t in quarter_trees
    ]
    lifted_back = [
        SteinerTree(
            terminals_set,
            frozenset(_edge(inst.inv(u.bits), inst.inv(v.bits), n) for (u, v) in t.edges),
        )
        for t in lifted.trees
    ]
    family = TreeFamily(
        dim=n,
        terminals=terminals_set,
        trees=tuple(lifted_back + mapped_quarters),
        provenance=(tag,) + sub.provenance,
        fallback_used=sub.fallback_used,
    )
    report = _verify.verify_family(g, family)
    if not report.accepted:
        raise _BuilderFailure(f"one-side recipe rejected: {report.violations[0].detail}")
    return family


def embed(family: TreeFamily, prefix_bit: int) -> TreeFamily:
    """Lift a family one dimension up into the chosen half-copy by
    prepending a bit to every label; validity is preserved because the
    copy is an induced subgraph."""
    if prefix_bit not in (0, 1):
        raise ContractViolation("prefix bit must be 0 or 1")
    d = family.dim + 1
    off = prefix_bit << family.dim

    def lift(v: Vertex) -> Vertex:
        return Vertex(off | v.bits, d)

    return TreeFamily(
        dim=d,
        terminals=frozenset(lift(t) for t in family.terminals),
        trees=tuple(
            SteinerTree(
                frozenset(lift(t) for t in tree.terminals),
                frozenset(_paths.undirected(lift(u), lift(v)) for (u, v) in tree.edges),
            )
            for tree in family.trees
        ),
        provenance=family.provenance,
        fallback_used=family.fallback_used,
    )


# ---------------------------------------------------------------------------
# exhaustive base search with canonical-form caching
# ---------------------------------------------------------------------------

_base_cache: dict[tuple[int, int, tuple[int, ...]], tuple[tuple[tuple[int, int], ...], ...]] = {}
_base_lock = threading.Lock()


def _transforms(n: int):
    """The label-translation group extended by the matching swap."""
    for swap in (0, 1):
        for mask in range(1 << n):
            yield swap, mask


def _apply_transform(v: int, swap: int, mask: int, n: int) -> int:
    if swap:
        v = hc_swap_label(v, n)
    return v ^ mask


def _invert_transform(v: int, swap: int, mask: int, n: int) -> int:
    v ^= mask
    if swap:
        v = hc_swap_label(v, n)
    return v


def _canonical_triple(n: int, labels: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, int]]:
    best: tuple[int, ...] | None = None
    best_t = (0, 0)
    for swap, mask in _transforms(n):
        cand = tuple(sorted(_apply_transform(v, swap, mask, n) for v in labels))
        if best is None or cand < best:
            best = cand
            best_t = (swap, mask)
    assert best is not None
    return best, best_t


def base_case_search(g: AugmentedCube, terminals: Iterable[Vertex], target: int) -> TreeFamily:
    """Exhaustive family search for dimensions 3 and 4.

    Candidate trees are enumerated through their internal vertex sets,
    smallest first: a set is usable iff it induces a connected subgraph
    touching the neighbourhood of every target, and keeping only the
    inclusion-minimal such sets loses nothing.  Backtracking then packs
    ``target`` pairwise disjoint sets.  Results are cached per canonical
    form of the targets under the automorphisms of the topology module.
    """
    labels = _validate_terminals(g, terminals)
    n = g.dim
    if n not in (3, 4):
        raise ContractViolation("exhaustive base search is for dimensions 3 and 4")
    if target < 1:
        raise ContractViolation("target must be positive")

    canon, (swap, mask) = _canonical_triple(n, labels)
    key = (n, target, canon)
    with _base_lock:
        cached = _base_cache.get(key)
    if cached is None:
        edge_sets = _search_family(n, canon, target)
        cached = tuple(tuple(sorted(t)) for t in edge_sets)
        with _base_lock:
            _base_cache.setdefault(key, cached)

    terminals_set = frozenset(Vertex(a, n) for a in labels)
    trees = []
    for t in cached:
        edges = frozenset(
            _edge(_invert_transform(a, swap, mask, n), _invert_transform(b, swap, mask, n), n)
            for (a, b) in t
        )
        trees.append(SteinerTree(terminals_set, edges))
    tag = CaseTag(Case.BASE3 if n == 3 else Case.BASE4, "identity")
    return TreeFamily(n, terminals_set, tuple(trees), (tag,), False)


def _search_family(n: int, term_labels: Sequence[int], target: int) -> list[set[tuple[int, int]]]:
    g = AugmentedCube(n)
    terms = list(term_labels)
    ground = [v for v in range(1 << n) if v not in terms]
    index = {v: i for i, v in enumerate(ground)}
    m = len(ground)
    adj_mask = [0] * m
    for v in ground:
        for w in g.neighbor_labels(v):
            if w in index:
                adj_mask[index[v]] |= 1 << index[w]
    attach_mask = []
    for t in terms:
        mask = 0
        for w in g.neighbor_labels(t):
            if w in index:
                mask |= 1 << index[w]
        attach_mask.append(mask)

    def feasible(mask: int) -> bool:
        rest = mask
        while rest:
            low = rest & -rest
            comp = low
            frontier = low
            while frontier:
                grow = 0
                f = frontier
                while f:
                    b = f & -f
                    f ^= b
                    grow |= adj_mask[b.bit_length() - 1]
                frontier = grow & mask & ~comp
                comp |= frontier
            if all(am & comp for am in attach_mask):
                return True
            rest &= ~comp
        return False

    minimal: list[int] = []
    for size in range(1, m + 1):
        for combo in itertools.combinations(range(m), size):
            mask = 0
            for i in combo:
                mask |= 1 << i
            if any(prev & mask == prev for prev in minimal):
                continue
            if feasible(mask):
                minimal.append(mask)
    minimal.sort(key=lambda msk: (msk.bit_count(), msk))

    budget = BASE_SEARCH_BUDGET
    chosen: list[int] = []

    def slots(used: int) -> int:
        return min((am & ~used).bit_count() for am in attach_mask)

    def dfs(start: int, used: int) -> bool:
        nonlocal budget
        if len(chosen) == target:
            return True
        budget -= 1
        if budget <= 0:
            raise InternalError(f"base search budget exhausted for targets {terms} at dim {n}")
        if len(chosen) + slots(used) < target:
            return False
        for j in range(start, len(minimal)):
            if minimal[j] & used:
                continue
            chosen.append(minimal[j])
            if dfs(j + 1, used | minimal[j]):
                return True
            chosen.pop()
        return False

    if not dfs(0, 0):
        raise InternalError(
            f"no {target}-family found for targets {terms} at dim {n}; search was exhaustive"
        )

    out: list[set[tuple[int, int]]] = []
    for mask in chosen:
        members = [ground[i] for i in range(m) if mask >> i & 1]
        edges: set[tuple[int, int]] = set()
        # spanning tree of the internal set, smallest labels first
        seen = {members[0]}
        frontier = [members[0]]
        while frontier:
            a = frontier.pop(0)
            for b in g.neighbor_labels(a):
                if b in members and b not in seen:
                    seen.add(b)
                    edges.add((min(a, b), max(a, b)))
                    frontier.append(b)
        for t in terms:
            hook = min(w for w in g.neighbor_labels(t) if w in seen)
            edges.add((min(t, hook), max(t, hook)))
        out.append(edges)
    return out


# ---------------------------------------------------------------------------
# verified fallback
# ---------------------------------------------------------------------------

def _fallback_family(
    g: AugmentedCube, labels: Sequence[int], failed: CaseTag
) -> TreeFamily | None:
    """Recover from a rejected recipe: try the mirror recipes first, then a
    bounded backtracking search over spider trees."""
    n = g.dim
    tagged = CaseTag(
        Case.FALLBACK,
        failed.normalization,
        failed.roles,
        variant=f"after {failed.case.value}",
    )
    _, inst, _ = _dispatch(n, labels)
    if inst.z is not None:
        x, y, z = inst.x, inst.y, inst.z
        adjacent = g.adjacent_labels(x, y)
        for matching in ("h", "c"):
            for anchor in ("y", "x"):
                img = h_label if matching == "h" else c_label
                w = x if anchor == "x" else y
                if z == img(w, n):
                    continue
                try:
                    trees = _recipe_grid(g, x, y, z, matching, anchor, adjacent)
                    family = _assemble(g, labels, inst, trees, (tagged,), fallback=True)
                except _BuilderFailure:
                    continue
                if _verify.verify_family(g, family).accepted:
                    return family
    trees = _spider_pack(g, labels, target_family_size(n))
    if trees is None:
        return None
    terminals_set = frozenset(Vertex(a, n) for a in labels)
    family = TreeFamily(
        dim=n,
        terminals=terminals_set,
        trees=tuple(SteinerTree(terminals_set, frozenset(t)) for t in trees),
        provenance=(tagged,),
        fallback_used=True,
    )
    if _verify.verify_family(g, family).accepted:
        return family
    return None


def _spider_pack(
    g: AugmentedCube, labels: Sequence[int], target: int, budget: int = FALLBACK_BUDGET
) -> list[set[tuple[Vertex, Vertex]]] | None:
    """Backtracking packing of spider trees: pick an unused centre, fan
    three disjoint paths from it to the targets through unused vertices,
    repeat.  Deterministic; bounded by a node budget."""
    n = g.dim
    terms = list(labels)
    spent = 0

    def spider(center: int, blocked: set[int]) -> list[list[int]] | None:
        # tiny three-target fan by unit-capacity flow
        cap: dict[tuple[int, int], int] = {}
        adj: dict[int, list[int]] = {}

        def add(a: int, b: int, c: int) -> None:
            if (a, b) not in cap:
                cap[(a, b)] = 0
                cap.setdefault((b, a), 0)
                adj.setdefault(a, []).append(b)
                adj.setdefault(b, []).append(a)
            cap[(a, b)] += c

        avail = [v for v in range(1 << n) if v not in blocked and v not in terms and v != center]
        nodes = set(avail) | set(terms) | {center}
        SINK = -1
        for v in avail:
            add(2 * v, 2 * v + 1, 1)
        for u in nodes:
            if u in terms:
                continue  # no arcs out of targets
            a = 2 * u + 1
            for w in g.neighbor_labels(u):
                if w not in nodes or w == center:
                    continue
                add(a, 2 * w, 1)
        for t in terms:
            add(2 * t, SINK, 1)
        for a in adj:
            adj[a] = sorted(set(adj[a]), key=lambda q: (q == SINK, q))
        src = 2 * center + 1
        if src not in adj:
            return None
        flow = 0
        pushed: dict[tuple[int, int], int] = {}
        from collections import deque as _dq

        while flow < 3:
            parent: dict[int, int | None] = {src: None}
            queue = _dq([src])
            while queue and SINK not in parent:
                a = queue.popleft()
                for b in adj[a]:
                    if b not in parent and cap.get((a, b), 0) > 0:
                        parent[b] = a
                        queue.append(b)
            if SINK not in parent:
                return None
            b = SINK
            while parent[b] is not None:
                a = parent[b]
                cap[(a, b)] -= 1
                cap[(b, a)] += 1
                if pushed.get((b, a), 0) > 0:
                    pushed[(b, a)] -= 1
                else:
                    pushed[(a, b)] = pushed.get((a, b), 0) + 1
                b = a
            flow += 1
        walks = []
        for _ in range(3):
            node = src
            verts = [center]
            while node != SINK:
                for b in adj[node]:
                    if pushed.get((node, b), 0) > 0:
                        pushed[(node, b)] -= 1
                        node = b
                        break
                else:
                    raise AssertionError("fan decomposition failed")
                if node != SINK and node % 2 == 0:
                    verts.append(node // 2)
            walks.append(verts)
        return walks

    chosen: list[set[tuple[Vertex, Vertex]]] = []
    used: set[int] = set()

    def recurse() -> bool:
        nonlocal spent
        if len(chosen) == target:
            return True
        for center in range(1 << n):
            if center in used or center in terms:
                continue
            spent += 1
            if spent > budget:
                return False
            walks = spider(center, used)
            if walks is None:
                continue
            internal = {v for walk in walks for v in walk if v not in terms}
            edges = set()
            for walk in walks:
                for a, b in zip(walk, walk[1:]):
                    edges.add(_edge(a, b, n))
            chosen.append(edges)
            used.update(internal)
            if recurse():
                return True
            chosen.pop()
            used.difference_update(internal)
        return False

    return chosen if recurse() else None


# ---------------------------------------------------------------------------
# top-level constructor
# ---------------------------------------------------------------------------

def construct(
    g: AugmentedCube,
    terminals: Iterable[Vertex],
    *,
    fidelity: bool = False,
    allow_fallback: bool = True,
) -> TreeFamily:
    """Build and verify a family of 2*dim - 3 internally disjoint pendant
    Steiner trees for the target triple.

    Dimensions 3 and 4 are searched exhaustively; higher dimensions go
    through the case dispatch, with a verified fallback replacing any
    rejected recipe output (raise instead when allow_fallback is off).
    The returned family always passed the independent verifier.
    """
    labels = _validate_terminals(g, terminals)
    n = g.dim
    if n <= 4:
        family = base_case_search(g, terminals, target_family_size(n))
    else:
        tag, inst, recipe = _dispatch(n, labels)
        family = None
        failure = ""
        if tag.case is Case.CASE1:
            try:
                family = construct_case1(g, terminals, fidelity=fidelity, allow_fallback=allow_fallback)
            except _BuilderFailure as exc:
                failure = str(exc)
        else:
            try:
                trees = _run_recipe(g, tag, inst, recipe)
                candidate = _assemble(g, labels, inst, trees, (tag,))
                if _verify.verify_family(g, candidate).accepted:
                    family = candidate
                else:
                    failure = "recipe output rejected by the verifier"
            except _BuilderFailure as exc:
                failure = str(exc)
        if family is None:
            if not allow_fallback:
                raise FallbackDisabled(
                    f"{tag.case.value} recipe failed ({failure}) and fallback is disabled"
                )
            family = _fallback_family(g, labels, tag)
            if family is None:
                raise InternalError(
                    f"all builders failed for targets {[f'{a:0{n}b}' for a in labels]} "
                    f"(dispatched {tag.case.value}: {failure})"
                )
    report = _verify.verify_family(g, family)
    if not report.accepted:
        raise InternalError(
            f"constructed family rejected: {[v.detail for v in report.violations]}"
        )
    if len(family.trees) != target_family_size(n):
        raise InternalError(
            f"expected {target_family_size(n)} trees, built {len(family.trees)}"
        )
    return family
