"""Independent certificate checking, exact small-scale oracles, bounds.

Nothing here shares traversal or assembly code with the constructor; the
checks go straight to label-level adjacency so a constructor bug cannot
hide behind shared helpers.  Certificates are duck-typed: anything with
``terminals`` and ``edges`` verifies as a tree, anything with ``dim``,
``terminals`` and ``trees`` verifies as a family, so parsed files check
exactly like freshly built objects.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .topology import AugmentedCube, ContractViolation, GraphView, Vertex

NON_EDGE = "NonEdge"
CYCLE = "Cycle"
DISCONNECTED = "Disconnected"
TERMINAL_DEGREE = "TerminalDegree"
SHARED_VERTEX = "SharedVertex"
SHARED_EDGE = "SharedEdge"
WRONG_TERMINALS = "WrongTerminals"

VIOLATION_KINDS = (
    NON_EDGE,
    CYCLE,
    DISCONNECTED,
    TERMINAL_DEGREE,
    SHARED_VERTEX,
    SHARED_EDGE,
    WRONG_TERMINALS,
)

DEFAULT_ORACLE_BUDGET = 5_000_000


@dataclass(frozen=True)
class Violation:
    kind: str
    trees: tuple[int, ...]
    detail: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "trees": list(self.trees), "detail": self.detail}


@dataclass(frozen=True)
class VerificationReport:
    accepted: bool
    violations: tuple[Violation, ...]

    def to_json(self) -> dict:
        return {
            "accepted": self.accepted,
            "violations": [v.to_json() for v in self.violations],
        }


def _as_view(g: AugmentedCube | GraphView) -> GraphView:
    return g if isinstance(g, GraphView) else g.view()


def _report(violations: list[Violation]) -> VerificationReport:
    return VerificationReport(accepted=not violations, violations=tuple(violations))


# ---------------------------------------------------------------------------
# certificate checking
# ---------------------------------------------------------------------------

def _tree_violations(view: GraphView, tree, index: int) -> list[Violation]:
    out: list[Violation] = []
    terminals = set(tree.terminals)
    edges = set(tree.edges)
    for t in terminals:
        view.cube.check_vertex(t)

    degree: dict[Vertex, int] = {}
    ok_edges = []
    for e in edges:
        u, v = e
        view.cube.check_vertex(u)
        view.cube.check_vertex(v)
        if u == v or not view.has_edge_labels(u.bits, v.bits):
            out.append(Violation(NON_EDGE, (index,), f"{u.label()}-{v.label()} is not an edge"))
            continue
        ok_edges.append((u, v))
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1

    vertices = set(degree)
    if ok_edges:
        adj: dict[Vertex, list[Vertex]] = {}
        for u, v in ok_edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        start = next(iter(vertices))
        seen = {start}
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    queue.append(b)
        if len(seen) != len(vertices):
            out.append(Violation(DISCONNECTED, (index,), "edge set is not connected"))
        if len(ok_edges) > len(vertices) - len(_components(adj, vertices)):
            out.append(Violation(CYCLE, (index,), "edge set contains a cycle"))

    for t in sorted(terminals):
        d = degree.get(t, 0)
        if d != 1:
            out.append(Violation(TERMINAL_DEGREE, (index,), f"terminal {t.label()} has degree {d}"))
    return out


def _components(adj: dict[Vertex, list[Vertex]], vertices: set[Vertex]) -> list[set[Vertex]]:
    comps = []
    left = set(vertices)
    while left:
        start = left.pop()
        comp = {start}
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for b in adj.get(a, ()):
                if b not in comp:
                    comp.add(b)
                    queue.append(b)
        left -= comp
        comps.append(comp)
    return comps


def verify_tree(g: AugmentedCube | GraphView, tree) -> VerificationReport:
    """Check one tree: real edges, connected, acyclic, terminals pendant."""
    return _report(_tree_violations(_as_view(g), tree, 0))


def verify_family(g: AugmentedCube | GraphView, family) -> VerificationReport:
    """Check every member tree plus pairwise internal disjointness.

    Runs in time linear in the total certificate size: ownership of
    vertices and edges is tracked in hash maps, never by pairwise scans.
    """
    view = _as_view(g)
    violations: list[Violation] = []
    terminals = frozenset(family.terminals)
    if len(terminals) != 3:
        violations.append(Violation(WRONG_TERMINALS, (), f"expected 3 terminals, got {len(terminals)}"))

    vertex_owner: dict[Vertex, int] = {}
    edge_owner: dict[tuple[Vertex, Vertex], int] = {}
    for i, tree in enumerate(family.trees):
        if frozenset(tree.terminals) != terminals:
            violations.append(Violation(WRONG_TERMINALS, (i,), "tree terminals differ from family terminals"))
        violations.extend(_tree_violations(view, tree, i))
        tree_vertices = set()
        for e in set(tree.edges):
            u, v = e
            key = (u, v) if u <= v else (v, u)
            if key in edge_owner:
                violations.append(
                    Violation(SHARED_EDGE, (edge_owner[key], i), f"edge {u.label()}-{v.label()} reused")
                )
            else:
                edge_owner[key] = i
            tree_vertices.add(u)
            tree_vertices.add(v)
        for w in sorted(tree_vertices - terminals):
            if w in vertex_owner:
                violations.append(
                    Violation(SHARED_VERTEX, (vertex_owner[w], i), f"internal vertex {w.label()} reused")
                )
            else:
                vertex_owner[w] = i
    return _report(violations)


def check_path_system(view: GraphView, ps) -> list[str]:
    """Invariant check for path systems; returns human-readable problems."""
    problems: list[str] = []
    if ps.source == ps.sink:
        problems.append("source equals sink")
    seen_inner: dict[Vertex, int] = {}
    seen_edges: dict[tuple[Vertex, Vertex], int] = {}
    for i, path in enumerate(ps.paths):
        vs = path.vertices
        if len(vs) < 2:
            problems.append(f"path {i} has fewer than two vertices")
            continue
        if vs[0] != ps.source or vs[-1] != ps.sink:
            problems.append(f"path {i} does not run source to sink")
        if len(set(vs)) != len(vs):
            problems.append(f"path {i} repeats a vertex")
        for a, b in zip(vs, vs[1:]):
            if not view.has_edge_labels(a.bits, b.bits):
                problems.append(f"path {i} uses non-edge {a.label()}-{b.label()}")
            key = (a, b) if a <= b else (b, a)
            if key in seen_edges and seen_edges[key] != i:
                problems.append(f"edge {a.label()}-{b.label()} appears in paths {seen_edges[key]} and {i}")
            seen_edges[key] = i
        for w in vs[1:-1]:
            if w in seen_inner:
                problems.append(f"inner vertex {w.label()} shared by paths {seen_inner[w]} and {i}")
            else:
                seen_inner[w] = i
    return problems


# ---------------------------------------------------------------------------
# exact oracle for small hosts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleResult:
    """Exact value when lower == upper and exact is set; else a bracket."""

    lower: int
    upper: int
    exact: bool
    nodes_used: int

    @property
    def value(self) -> int:
        if not self.exact:
            raise ContractViolation("oracle result is a bracket, not an exact value")
        return self.lower


def oracle_tau(
    g: AugmentedCube | GraphView,
    terminals: Iterable[Vertex],
    budget: int = DEFAULT_ORACLE_BUDGET,
) -> OracleResult:
    """Maximum number of internally disjoint pendant Steiner trees for the
    terminal set, by exhaustive packing.

    Every pendant tree prunes to one whose internal vertex set is minimal
    (connected, with every terminal attached and no removable vertex), so
    the search enumerates exactly those internal sets, smallest first,
    then packs pairwise disjoint ones by branch and bound.  Intended for
    hosts of at most 16 vertices; the budget counts search nodes and an
    exhausted budget yields a bracket instead of an exact value.
    """
    if budget <= 0:
        raise ContractViolation("budget must be positive")
    view = _as_view(g)
    terms = sorted({t for t in terminals})
    for t in terms:
        view.cube.check_vertex(t)
        if not view.contains_label(t.bits):
            raise ContractViolation(f"terminal {t.label()} outside the view")
    if len(terms) < 2:
        raise ContractViolation("at least two terminals required")

    term_labels = [t.bits for t in terms]
    ground = [v for v in view.vertex_labels() if v not in term_labels]
    index = {v: i for i, v in enumerate(ground)}
    m = len(ground)
    adj_mask = [0] * m
    for v in ground:
        for w in view.neighbor_labels(v):
            if w in index:
                adj_mask[index[v]] |= 1 << index[w]
    attach_mask = []
    for t in term_labels:
        mask = 0
        for w in view.neighbor_labels(t):
            if w in index:
                mask |= 1 << index[w]
        attach_mask.append(mask)

    # hard ceiling: each packed tree consumes a distinct edge at every
    # terminal, and edges between terminals are unusable for |S| >= 3
    free_deg = []
    for t in term_labels:
        nbrs = view.neighbor_labels(t)
        in_s = sum(1 for w in nbrs if w in term_labels)
        free = len(nbrs) - in_s
        if len(terms) == 2 and in_s:
            free += 1  # the direct edge itself is a valid two-terminal tree
        free_deg.append(free)
    ceiling = min(free_deg)

    nodes = 0
    exhausted = False

    def feasible(mask: int) -> bool:
        nonlocal nodes
        nodes += 1
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
    direct_edge_tree = len(terms) == 2 and view.has_edge_labels(term_labels[0], term_labels[1])

    sizes = range(1, m + 1)
    enumeration_complete = True
    for size in sizes:
        if exhausted:
            enumeration_complete = False
            break
        for combo in itertools.combinations(range(m), size):
            if nodes >= budget:
                exhausted = True
                enumeration_complete = False
                break
            mask = 0
            for i in combo:
                mask |= 1 << i
            if any(prev & mask == prev for prev in minimal):
                continue
            if feasible(mask):
                minimal.append(mask)

    # pack pairwise disjoint minimal sets, largest count wins
    minimal.sort(key=lambda msk: (msk.bit_count(), msk))
    best = 0
    packing_complete = True

    def slots_left(used: int) -> int:
        return min((am & ~used).bit_count() for am in attach_mask)

    def dfs(start: int, used: int, count: int) -> None:
        nonlocal best, nodes, packing_complete
        best = max(best, count)
        if nodes >= budget:
            packing_complete = False
            return
        if count + slots_left(used) <= best:
            return
        for j in range(start, len(minimal)):
            if minimal[j] & used:
                continue
            nodes += 1
            dfs(j + 1, used | minimal[j], count + 1)
            if not packing_complete:
                return

    dfs(0, 0, 1 if direct_edge_tree else 0)
    exact = enumeration_complete and packing_complete
    upper = best if exact else max(best, ceiling)
    return OracleResult(lower=best, upper=upper, exact=exact, nodes_used=nodes)


# ---------------------------------------------------------------------------
# degree bound and connectivity
# ---------------------------------------------------------------------------

def hager_upper_bound(g: AugmentedCube, k: int) -> int:
    """Largest pendant k-tree packing size not excluded by minimum degree:
    a packing of m trees forces min degree >= k + m - 1, so m <= d - k + 1."""
    if k < 2:
        raise ContractViolation("terminal count must be at least 2")
    return g.degree - k + 1


@dataclass(frozen=True)
class ConnectivityResult:
    value: int
    exact: bool


def connectivity(g: AugmentedCube, exact_limit: int = 5) -> ConnectivityResult:
    """Vertex connectivity via the path engine.

    Label translations are automorphisms, so the pair minimum over all
    (u, v) equals the minimum over pairs (0, w).  Exact for dim up to
    exact_limit; beyond that a deterministic sample of w values gives an
    upper estimate flagged as inexact.
    """
    from . import paths as _paths

    n = g.dim
    view = g.view()
    if n <= exact_limit:
        candidates = range(1, g.order)
        exact = True
    else:
        fixed = set(adjacency_candidates(n))
        candidates = sorted(fixed)
        exact = False
    best = g.degree
    zero = g.vertex(0)
    for w in candidates:
        res = _paths.disjoint_paths(view, zero, g.vertex(w), g.degree)
        local = g.degree if isinstance(res, _paths.PathSystem) else res.size
        best = min(best, local)
    return ConnectivityResult(value=best, exact=exact)


def adjacency_candidates(n: int) -> set[int]:
    """Deterministic w sample for large-dimension connectivity estimates."""
    from .topology import adjacency_deltas

    out = set(adjacency_deltas(n))
    out.add((1 << n) - 1)
    out.update(range(1, min(1 << n, 24)))
    return out
