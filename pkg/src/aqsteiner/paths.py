"""Internally disjoint path systems and connector trees inside cube views.

The central operation is ``disjoint_paths``: k internally disjoint u-v
paths computed by unit-vertex-capacity max flow (the standard Menger
reduction).  Every inner vertex is split into an in/out pair joined by a
capacity-1 arc; edge arcs get capacity 2 so they can never be saturated
(each endpoint passes at most one unit), which keeps minimum cuts on the
split arcs and makes the cut witness a plain vertex set.  The one
exception is a direct u-v edge, whose arc keeps capacity 1; a witness
that needs it reports that separately, since no vertex set separates an
adjacent pair.

Augmenting paths are found by BFS with neighbours enumerated in
ascending label order, so results are reproducible across runs, thread
counts and platforms.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .topology import ContractViolation, GraphView, Vertex

DEFAULT_HAMILTONIAN_BUDGET = 2_000_000


class PinUnsatisfiable(ContractViolation):
    """No path of the system has the requested endpoint neighbour."""


class HamiltonianNotFound(Exception):
    """Exhaustive backtracking proved there is no such path."""


class SearchBudgetExceeded(Exception):
    """Backtracking ran out of its node budget before deciding."""


@dataclass(frozen=True)
class Path:
    """A simple path as an ordered vertex tuple (length >= 1 vertex)."""

    vertices: tuple[Vertex, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    def edges(self) -> list[tuple[Vertex, Vertex]]:
        vs = self.vertices
        return [undirected(vs[i], vs[i + 1]) for i in range(len(vs) - 1)]


@dataclass(frozen=True)
class PathSystem:
    """Internally disjoint paths sharing exactly their two endpoints."""

    source: Vertex
    sink: Vertex
    paths: tuple[Path, ...]


@dataclass(frozen=True)
class MinCut:
    """Separator witness returned when k disjoint paths do not exist.

    Removing ``separator`` (plus the direct source-sink edge when
    ``uses_direct_edge`` is set, which happens exactly for adjacent
    endpoints) disconnects source from sink.
    """

    source: Vertex
    sink: Vertex
    separator: tuple[Vertex, ...]
    uses_direct_edge: bool

    @property
    def size(self) -> int:
        return len(self.separator) + (1 if self.uses_direct_edge else 0)


def undirected(u: Vertex, v: Vertex) -> tuple[Vertex, Vertex]:
    return (u, v) if u <= v else (v, u)


# ---------------------------------------------------------------------------
# max-flow core (labels only)
# ---------------------------------------------------------------------------

def _flow_paths(view: GraphView, s: int, t: int, k: int) -> tuple[list[list[int]] | None, list[int]]:
    """Return (paths, []) with exactly k label paths, or (None, vertex_cut)."""
    # node ids: 2*v = in side, 2*v + 1 = out side
    cap: dict[tuple[int, int], int] = {}
    adj: dict[int, list[int]] = {}

    def add_arc(a: int, b: int, c: int) -> None:
        if (a, b) not in cap:
            cap[(a, b)] = 0
            cap.setdefault((b, a), 0)
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        cap[(a, b)] += c

    labels = view.vertex_labels()
    for v in labels:
        if v != s and v != t:
            add_arc(2 * v, 2 * v + 1, 1)
    for u in labels:
        for w in view.neighbor_labels(u):
            if u == t or w == s:
                continue
            a = 2 * u + 1
            b = 2 * w
            add_arc(a, b, 1 if (u == s and w == t) else 2)
    for a in adj:
        adj[a] = sorted(set(adj[a]))

    src, dst = 2 * s + 1, 2 * t
    if dst not in adj:
        adj[dst] = []
    flow = 0
    pushed: dict[tuple[int, int], int] = {}
    while flow < k:
        parent: dict[int, int | None] = {src: None}
        queue = deque([src])
        while queue and dst not in parent:
            a = queue.popleft()
            for b in adj[a]:
                if b not in parent and cap.get((a, b), 0) > 0:
                    parent[b] = a
                    queue.append(b)
        if dst not in parent:
            break
        b = dst
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

    if flow < k:
        reach = {src}
        queue = deque([src])
        while queue:
            a = queue.popleft()
            for b in adj[a]:
                if b not in reach and cap.get((a, b), 0) > 0:
                    reach.add(b)
                    queue.append(b)
        cut = [v for v in labels if v not in (s, t) and 2 * v in reach and 2 * v + 1 not in reach]
        return None, sorted(cut)

    # Decompose the net flow into k source-to-sink walks.  Unit vertex
    # capacities mean no vertex repeats across walks; stray flow cycles
    # (possible after residual cancellations) are simply never visited.
    paths: list[list[int]] = []
    for _ in range(k):
        node = src
        verts = [s]
        while node != dst:
            for b in adj[node]:
                if pushed.get((node, b), 0) > 0:
                    pushed[(node, b)] -= 1
                    node = b
                    break
            else:
                raise AssertionError("flow conservation violated during decomposition")
            if node % 2 == 0:
                verts.append(node // 2)
        paths.append(verts)
    return paths, []


def disjoint_paths(view: GraphView, u: Vertex, v: Vertex, k: int) -> PathSystem | MinCut:
    """k internally disjoint u-v paths inside the view, or a cut witness.

    Deterministic for fixed inputs.  Raises on u == v, k < 1, or
    endpoints outside the view.
    """
    view.cube.check_vertex(u)
    view.cube.check_vertex(v)
    if u == v:
        raise ContractViolation("path system endpoints must differ")
    if k < 1:
        raise ContractViolation("at least one path must be requested")
    if not (view.contains_label(u.bits) and view.contains_label(v.bits)):
        raise ContractViolation("endpoints must lie inside the view")

    label_paths, cut = _flow_paths(view, u.bits, v.bits, k)
    if label_paths is None:
        return MinCut(
            source=u,
            sink=v,
            separator=tuple(Vertex(w, view.dim) for w in cut),
            uses_direct_edge=view.has_edge_labels(u.bits, v.bits),
        )
    system = PathSystem(
        source=u,
        sink=v,
        paths=tuple(Path(tuple(Vertex(w, view.dim) for w in p)) for p in label_paths),
    )
    problems = _system_problems(view, system)
    if problems:
        raise AssertionError(f"flow produced an invalid path system: {problems}")
    return system


def _system_problems(view: GraphView, ps: PathSystem) -> list[str]:
    # independent of the flow bookkeeping: checks the finished object only
    from . import verify

    return verify.check_path_system(view, ps)


# ---------------------------------------------------------------------------
# system manipulation
# ---------------------------------------------------------------------------

def neighbor_along(ps: PathSystem, endpoint: Vertex, i: int) -> Vertex:
    """The vertex adjacent to the given endpoint on path i."""
    if endpoint not in (ps.source, ps.sink):
        raise ContractViolation("endpoint must be the system's source or sink")
    if not 0 <= i < len(ps.paths):
        raise ContractViolation(f"path index {i} out of range")
    vs = ps.paths[i].vertices
    return vs[1] if endpoint == ps.source else vs[-2]


def reorder_paths(
    ps: PathSystem,
    pinned: Sequence[tuple[int, Vertex]],
    endpoint: Vertex | None = None,
) -> PathSystem:
    """Permute paths so prescribed endpoint neighbours land at prescribed
    indices; unpinned paths keep their relative order.

    Pins refer to the sink end unless ``endpoint`` says otherwise.
    """
    at = ps.sink if endpoint is None else endpoint
    k = len(ps.paths)
    nbrs = [neighbor_along(ps, at, i) for i in range(k)]
    slot: dict[int, int] = {}
    taken: set[int] = set()
    for index, required in pinned:
        if not 0 <= index < k:
            raise PinUnsatisfiable(f"pin index {index} out of range")
        matches = [j for j, nb in enumerate(nbrs) if nb == required]
        if not matches:
            raise PinUnsatisfiable(f"no path has endpoint neighbour {required.label()}")
        j = matches[0]
        if index in slot and slot[index] != j:
            raise PinUnsatisfiable(f"conflicting pins for index {index}")
        if j in taken and slot.get(index) != j:
            raise PinUnsatisfiable(f"path for {required.label()} pinned twice")
        slot[index] = j
        taken.add(j)
    rest = [j for j in range(k) if j not in taken]
    order: list[int] = []
    for i in range(k):
        if i in slot:
            order.append(slot[i])
        else:
            order.append(rest.pop(0))
    return PathSystem(ps.source, ps.sink, tuple(ps.paths[j] for j in order))


def map_path_system(iso: Callable[[Vertex], Vertex], ps: PathSystem) -> PathSystem:
    """Image of a path system under an adjacency-preserving vertex map."""
    return PathSystem(
        source=iso(ps.source),
        sink=iso(ps.sink),
        paths=tuple(Path(tuple(iso(v) for v in p.vertices)) for p in ps.paths),
    )


# ---------------------------------------------------------------------------
# connector trees and Hamiltonian paths inside views
# ---------------------------------------------------------------------------

def connector_tree(view: GraphView, terminals: Iterable[Vertex]) -> frozenset[tuple[Vertex, Vertex]]:
    """A tree inside the view containing all terminals.

    Built as a union of breadth-first shortest paths, each grafted onto
    the partial tree at first contact, so no cycle can form.  Returns the
    edge set; a single terminal yields the empty set.
    """
    terms = sorted(set(terminals))
    if not terms:
        raise ContractViolation("at least one terminal required")
    for t in terms:
        view.cube.check_vertex(t)
        if not view.contains_label(t.bits):
            raise ContractViolation(f"terminal {t.label()} outside the view")
    tree_vertices = {terms[0].bits}
    edges: set[tuple[Vertex, Vertex]] = set()
    for t in terms[1:]:
        if t.bits in tree_vertices:
            continue
        prev: dict[int, int] = {t.bits: -1}
        queue = deque([t.bits])
        hit = -1
        while queue and hit < 0:
            a = queue.popleft()
            for b in view.neighbor_labels(a):
                if b in prev:
                    continue
                prev[b] = a
                if b in tree_vertices:
                    hit = b
                    break
                queue.append(b)
        if hit < 0:
            raise ContractViolation(f"terminal {t.label()} not connected inside the view")
        node = hit
        while prev[node] != -1:
            edges.add(undirected(Vertex(node, view.dim), Vertex(prev[node], view.dim)))
            tree_vertices.add(node)
            node = prev[node]
        tree_vertices.add(t.bits)
    return frozenset(edges)


def hamiltonian_path(
    view: GraphView,
    u: Vertex,
    v: Vertex,
    node_budget: int = DEFAULT_HAMILTONIAN_BUDGET,
) -> Path:
    """A u-v path visiting every view vertex once, by backtracking.

    Raises HamiltonianNotFound when the exhaustive search finishes empty,
    SearchBudgetExceeded when the node budget runs out first.
    """
    view.cube.check_vertex(u)
    view.cube.check_vertex(v)
    if u == v:
        raise ContractViolation("endpoints must differ")
    labels = view.vertex_labels()
    if u.bits not in labels or v.bits not in labels:
        raise ContractViolation("endpoints must lie inside the view")
    total = len(labels)
    target = v.bits
    visited = {u.bits}
    order = [u.bits]
    expanded = 0

    def extend(cur: int) -> bool:
        nonlocal expanded
        expanded += 1
        if expanded > node_budget:
            raise SearchBudgetExceeded(f"budget of {node_budget} nodes exhausted")
        if len(order) == total:
            return cur == target
        for w in view.neighbor_labels(cur):
            if w in visited or (w == target and len(order) != total - 1):
                continue
            visited.add(w)
            order.append(w)
            if extend(w):
                return True
            visited.remove(w)
            order.pop()
        return False

    if extend(u.bits):
        return Path(tuple(Vertex(w, view.dim) for w in order))
    raise HamiltonianNotFound(f"no spanning path between {u.label()} and {v.label()}")
