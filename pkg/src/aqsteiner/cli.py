"""Command-line surface: build, check, sweep, probe.

Commands
  info       degree / connectivity / packing-bound facts for one dimension
  construct  build a verified pendant-tree family for three targets
  verify     re-check a certificate file independently of its producer
  sweep      construct for many target triples and tabulate the outcomes
  oracle     exact packing number by exhaustive search (small hosts)
  paths      internally disjoint path systems / separator witnesses

Exit codes: 0 success or accepted, 1 verification or feasibility failure,
2 usage or parse errors.  All output is deterministic for fixed flags;
wall-clock timings go to stderr so stdout stays byte-stable.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import itertools
import json
import random
import sys
import time
from dataclasses import dataclass
from typing import Sequence

from . import paths as _paths
from . import verify as _verify
from .construct import (
    FallbackDisabled,
    InternalError,
    SteinerTree,
    TreeFamily,
    classify,
    construct as build_family,
    target_family_size,
)
from .topology import AugmentedCube, ContractViolation, Vertex, parse_vertex

TOOL_ID = "aqsteiner"
TOOL_VERSION = "0.1.0"
SCHEMA_VERSION = "1"

_PALETTE = (
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02",
    "#a6761d", "#666666", "#1f78b4", "#b2df8a", "#fb9a99", "#cab2d6",
    "#6a3d9a", "#ffff33", "#a65628", "#f781bf", "#999999",
)


class CertificateFormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# certificate documents
# ---------------------------------------------------------------------------

def certificate_doc(family: TreeFamily, case: str) -> dict:
    """Canonical JSON form: sorted target labels, per-tree sorted edges."""
    trees = []
    for tree in family.trees:
        edges = sorted([u.label(), v.label()] for (u, v) in tree.edges)
        trees.append({"edges": edges})
    return {
        "schema_version": SCHEMA_VERSION,
        "n": family.dim,
        "s": sorted(t.label() for t in family.terminals),
        "case": case,
        "fallback_used": family.fallback_used,
        "trees": trees,
        "tool": {"id": TOOL_ID, "version": TOOL_VERSION},
    }


def _require_keys(obj: dict, keys: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise CertificateFormatError(f"{where} must be an object")
    got = set(obj)
    if got != keys:
        extra = sorted(got - keys)
        missing = sorted(keys - got)
        raise CertificateFormatError(
            f"{where} has wrong fields (unknown: {extra}, missing: {missing})"
        )


@dataclass(frozen=True)
class ParsedCertificate:
    n: int
    terminals: frozenset[Vertex]
    case: str
    fallback_used: bool
    trees: tuple[SteinerTree, ...]

    @property
    def dim(self) -> int:
        return self.n


def parse_certificate(doc: dict) -> ParsedCertificate:
    """Strict reader: unknown fields are rejected, labels must fit n."""
    _require_keys(doc, {"schema_version", "n", "s", "case", "fallback_used", "trees", "tool"}, "certificate")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise CertificateFormatError(f"unsupported schema_version {doc['schema_version']!r}")
    n = doc["n"]
    if not isinstance(n, int) or not 1 <= n <= 62:
        raise CertificateFormatError("n must be an integer in 1..62")

    def read_vertex(text) -> Vertex:
        if not isinstance(text, str) or len(text) != n or any(ch not in "01" for ch in text):
            raise CertificateFormatError(f"bad vertex label {text!r} for n={n}")
        return Vertex(int(text, 2), n)

    s_field = doc["s"]
    if not isinstance(s_field, list) or len(s_field) != 3:
        raise CertificateFormatError("s must list exactly 3 vertex labels")
    terminals = frozenset(read_vertex(t) for t in s_field)
    if len(terminals) != 3:
        raise CertificateFormatError("s must hold distinct labels")
    if not isinstance(doc["case"], str):
        raise CertificateFormatError("case must be a string")
    if not isinstance(doc["fallback_used"], bool):
        raise CertificateFormatError("fallback_used must be a boolean")
    _require_keys(doc["tool"], {"id", "version"}, "tool")
    if not all(isinstance(doc["tool"][k], str) for k in ("id", "version")):
        raise CertificateFormatError("tool id and version must be strings")
    if not isinstance(doc["trees"], list):
        raise CertificateFormatError("trees must be a list")
    trees = []
    for i, entry in enumerate(doc["trees"]):
        _require_keys(entry, {"edges"}, f"trees[{i}]")
        if not isinstance(entry["edges"], list):
            raise CertificateFormatError(f"trees[{i}].edges must be a list")
        edges = set()
        for pair in entry["edges"]:
            if not isinstance(pair, list) or len(pair) != 2:
                raise CertificateFormatError(f"trees[{i}] has a malformed edge {pair!r}")
            u, v = read_vertex(pair[0]), read_vertex(pair[1])
            edges.add(_paths.undirected(u, v))
        trees.append(SteinerTree(terminals, frozenset(edges)))
    return ParsedCertificate(n, terminals, doc["case"], doc["fallback_used"], tuple(trees))


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def family_to_dot(family: TreeFamily, case: str) -> str:
    """One graph block per tree; targets get doubled borders, each tree one
    colour, so the output diffs visually against hand drawings."""
    lines: list[str] = []
    terms = sorted(t.label() for t in family.terminals)
    for i, tree in enumerate(family.trees):
        color = _PALETTE[i % len(_PALETTE)]
        lines.append(f"graph tree{i} {{")
        lines.append(f'  label="tree {i} ({case})";')
        lines.append("  node [shape=circle];")
        for t in terms:
            lines.append(f'  "{t}" [shape=doublecircle];')
        for u, v in sorted((u.label(), v.label()) for (u, v) in tree.edges):
            lines.append(f'  "{u}" -- "{v}" [color="{color}"];')
        lines.append("}")
    return "\n".join(lines) + "\n"


def family_to_text(family: TreeFamily, case: str) -> str:
    lines = [
        f"n={family.dim} targets={','.join(sorted(t.label() for t in family.terminals))} "
        f"case={case} trees={len(family.trees)} fallback={'yes' if family.fallback_used else 'no'}"
    ]
    for i, tree in enumerate(family.trees):
        edges = " ".join(f"{u}-{v}" for u, v in sorted((u.label(), v.label()) for (u, v) in tree.edges))
        lines.append(f"  tree {i}: {edges}")
    return "\n".join(lines) + "\n"


def path_system_doc(res: _paths.PathSystem) -> dict:
    return {
        "source": res.source.label(),
        "sink": res.sink.label(),
        "count": len(res.paths),
        "paths": [[v.label() for v in p.vertices] for p in res.paths],
    }


def min_cut_doc(res: _paths.MinCut) -> dict:
    return {
        "source": res.source.label(),
        "sink": res.sink.label(),
        "separator": [v.label() for v in res.separator],
        "uses_direct_edge": res.uses_direct_edge,
        "size": res.size,
    }


def path_system_to_dot(res: _paths.PathSystem) -> str:
    lines = ["graph paths {"]
    for t in (res.source, res.sink):
        lines.append(f'  "{t.label()}" [shape=doublecircle];')
    for i, p in enumerate(res.paths):
        color = _PALETTE[i % len(_PALETTE)]
        for u, v in p.edges():
            lines.append(f'  "{u.label()}" -- "{v.label()}" [color="{color}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# sweep harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRecord:
    labels: tuple[int, ...]
    case: str
    fallback: bool
    size: int
    verified: bool


def _sweep_batch(args: tuple[int, list[tuple[int, ...]], bool]) -> list[SweepRecord]:
    n, batch, allow_fallback = args
    g = AugmentedCube(n)
    out = []
    for labels in batch:
        terms = [Vertex(a, n) for a in labels]
        family = build_family(g, terms, allow_fallback=allow_fallback)
        report = _verify.verify_family(g, family)
        out.append(
            SweepRecord(
                labels=labels,
                case=family.provenance[0].case.value,
                fallback=family.fallback_used,
                size=len(family.trees),
                verified=report.accepted,
            )
        )
    return out


def run_sweep(
    n: int,
    triples: Sequence[tuple[int, ...]],
    jobs: int = 1,
    allow_fallback: bool = True,
) -> list[SweepRecord]:
    """Construct and re-verify every triple; deterministic merge order."""
    triples = sorted(triples)
    if jobs <= 1 or len(triples) < 4:
        records = _sweep_batch((n, list(triples), allow_fallback))
    else:
        chunk = max(1, (len(triples) + 4 * jobs - 1) // (4 * jobs))
        batches = [triples[i : i + chunk] for i in range(0, len(triples), chunk)]
        records = []
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_sweep_batch, [(n, list(b), allow_fallback) for b in batches]):
                records.extend(part)
    records.sort(key=lambda r: r.labels)
    return records


def sweep_summary(n: int, records: Sequence[SweepRecord]) -> dict:
    cases: dict[str, int] = {}
    for r in records:
        cases[r.case] = cases.get(r.case, 0) + 1
    fallbacks = sum(1 for r in records if r.fallback)
    return {
        "n": n,
        "triples": len(records),
        "expected_size": target_family_size(n),
        "min_size": min((r.size for r in records), default=0),
        "max_size": max((r.size for r in records), default=0),
        "all_verified": all(r.verified for r in records),
        "fallback_count": fallbacks,
        "fallback_fraction": (fallbacks / len(records)) if records else 0.0,
        "cases": dict(sorted(cases.items())),
    }


def all_triples(n: int) -> list[tuple[int, ...]]:
    return [t for t in itertools.combinations(range(1 << n), 3)]


def sample_triples(n: int, count: int, seed: int) -> list[tuple[int, ...]]:
    rng = random.Random(seed)
    total = 1 << n
    seen: set[tuple[int, ...]] = set()
    while len(seen) < count:
        trio = tuple(sorted(rng.sample(range(total), 3)))
        seen.add(trio)
    return sorted(seen)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _emit(text: str, output: str | None) -> None:
    if output and output != "-":
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_targets(raw: str, n: int, low: int = 3, high: int = 3) -> list[Vertex]:
    parts = raw.split(",")
    if not low <= len(parts) <= high:
        wanted = str(low) if low == high else f"{low}..{high}"
        raise ContractViolation(f"expected {wanted} comma-separated labels, got {len(parts)}")
    out = []
    for p in parts:
        v = parse_vertex(p)
        if v.dim != n:
            raise ContractViolation(f"label {p!r} does not have length {n}")
        out.append(v)
    if len(set(out)) != len(out):
        raise ContractViolation("duplicate vertex in target set")
    return out


def cmd_info(args: argparse.Namespace) -> int:
    n = args.n
    if not 1 <= n <= 10:
        print("info supports dimensions 1..10", file=sys.stderr)
        return 2
    g = AugmentedCube(n)
    conn = _verify.connectivity(g)
    doc = {
        "n": n,
        "vertices": g.order,
        "degree": g.degree,
        "connectivity": {"value": conn.value, "exact": conn.exact},
        "hager_bound_k3": _verify.hager_upper_bound(g, 3) if n >= 2 else None,
    }
    if args.format == "json":
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
    else:
        hager = doc["hager_bound_k3"]
        _emit(
            f"n={n} vertices={g.order} degree={g.degree} "
            f"connectivity={conn.value}{'' if conn.exact else ' (sampled bound)'} "
            f"hager3={hager if hager is not None else 'n/a'}\n",
            args.output,
        )
    return 0


def cmd_construct(args: argparse.Namespace) -> int:
    try:
        targets = _parse_targets(args.targets, args.n)
        g = AugmentedCube(args.n)
        tag = classify(g, targets)
    except ContractViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        family = build_family(
            g, targets, fidelity=args.fidelity, allow_fallback=not args.no_fallback
        )
    except FallbackDisabled as exc:
        print(f"fallback required but disabled: {exc}", file=sys.stderr)
        return 1
    except (InternalError, _paths.SearchBudgetExceeded) as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return 1
    case = tag.case.value
    if args.format == "json":
        _emit(json.dumps(certificate_doc(family, case), indent=2) + "\n", args.output)
    elif args.format == "dot":
        _emit(family_to_dot(family, case), args.output)
    else:
        _emit(family_to_text(family, case), args.output)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        if args.path == "-":
            raw = sys.stdin.read()
        else:
            with open(args.path, "r", encoding="utf-8") as fh:
                raw = fh.read()
        doc = json.loads(raw)
        cert = parse_certificate(doc)
    except (OSError, json.JSONDecodeError, CertificateFormatError) as exc:
        print(f"malformed certificate: {exc}", file=sys.stderr)
        return 2
    g = AugmentedCube(cert.n)
    report = _verify.verify_family(g, cert)
    sys.stdout.write(json.dumps(report.to_json(), indent=2) + "\n")
    return 0 if report.accepted else 1


def cmd_sweep(args: argparse.Namespace) -> int:
    n = args.n
    if n < 3:
        print("sweep needs dimension at least 3", file=sys.stderr)
        return 2
    if args.exhaustive:
        if n > 5 and not args.force:
            print("exhaustive sweep above dimension 5 needs --force", file=sys.stderr)
            return 2
        triples = all_triples(n)
    else:
        if args.samples is None:
            print("either --exhaustive or --samples N is required", file=sys.stderr)
            return 2
        triples = sample_triples(n, args.samples, args.seed)
    started = time.monotonic()
    try:
        records = run_sweep(n, triples, jobs=args.jobs, allow_fallback=not args.no_fallback)
    except FallbackDisabled as exc:
        print(f"fallback required but disabled: {exc}", file=sys.stderr)
        return 1
    elapsed = time.monotonic() - started
    summary = sweep_summary(n, records)
    if args.format == "json":
        sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    else:
        lines = [
            f"n={summary['n']} triples={summary['triples']} "
            f"expected_size={summary['expected_size']} min={summary['min_size']} max={summary['max_size']}",
            f"all_verified={'yes' if summary['all_verified'] else 'NO'} "
            f"fallbacks={summary['fallback_count']} ({summary['fallback_fraction']:.4f})",
        ]
        for case, count in summary["cases"].items():
            lines.append(f"  {case}: {count}")
        sys.stdout.write("\n".join(lines) + "\n")
    print(f"sweep completed in {elapsed:.1f}s", file=sys.stderr)
    ok = (
        summary["all_verified"]
        and summary["min_size"] == summary["expected_size"]
        and summary["max_size"] == summary["expected_size"]
    )
    return 0 if ok else 1


def cmd_oracle(args: argparse.Namespace) -> int:
    n = args.n
    if (1 << n) > 16 and not args.force:
        print("oracle beyond 16 vertices needs --force (results may be a bracket)", file=sys.stderr)
        return 2
    try:
        targets = _parse_targets(args.targets, n, low=2, high=3)
        g = AugmentedCube(n)
        res = _verify.oracle_tau(g, targets, budget=args.budget)
    except ContractViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = {
        "n": n,
        "s": sorted(t.label() for t in targets),
        "lower": res.lower,
        "upper": res.upper,
        "exact": res.exact,
        "nodes_used": res.nodes_used,
    }
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_paths(args: argparse.Namespace) -> int:
    try:
        u = parse_vertex(args.u)
        v = parse_vertex(args.v)
        if u.dim != args.n or v.dim != args.n:
            raise ContractViolation("endpoint labels must have length n")
        g = AugmentedCube(args.n)
        res = _paths.disjoint_paths(g.view(), u, v, args.k)
    except ContractViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if isinstance(res, _paths.MinCut):
        sys.stdout.write(json.dumps(min_cut_doc(res), indent=2) + "\n")
        return 1
    if args.format == "dot":
        sys.stdout.write(path_system_to_dot(res))
    elif args.format == "text":
        for i, p in enumerate(res.paths):
            sys.stdout.write(f"path {i}: {'-'.join(w.label() for w in p.vertices)}\n")
    else:
        sys.stdout.write(json.dumps(path_system_doc(res), indent=2) + "\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aqsteiner",
        description="Pendant Steiner-tree packing certificates for augmented cubes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="facts for one dimension")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("construct", help="build a verified family for 3 targets")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-S", "--targets", required=True, help="three comma-separated binary labels")
    p.add_argument("--format", choices=("json", "dot", "text"), default="json")
    p.add_argument("--fidelity", action="store_true", help="route one-side extras along spanning paths")
    p.add_argument("--no-fallback", action="store_true", help="fail instead of repairing a rejected recipe")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="check a certificate file")
    p.add_argument("path", help="certificate JSON path, or - for stdin")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="construct for many triples and tabulate")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--force", action="store_true")
    p.add_argument("--no-fallback", action="store_true")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exact packing number by exhaustive search")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-S", "--targets", required=True)
    p.add_argument("--budget", type=int, default=_verify.DEFAULT_ORACLE_BUDGET)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("paths", help="internally disjoint path systems")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-u", required=True)
    p.add_argument("-v", required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--format", choices=("json", "dot", "text"), default="json")
    p.set_defaults(func=cmd_paths)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
