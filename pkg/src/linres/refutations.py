"""Splitting-based refutation formats for 0-1 unsatisfiable linear systems.

Four kinds are supported:

* ``lintree``   - a tree splitting on arbitrary linear forms; nodes carry no
  systems, a node is a leaf exactly when the instance together with the
  equations on its path is unsolvable over F_p^n.
* ``binregdag`` - a dag splitting on variables; each node carries a 0-1
  unsatisfiable system, and each child's span must lie inside the parent's
  span restricted by the edge assignment.
* ``bindag``    - variable splits with the stronger side condition
  span(child, x=b) inside span(parent, x=b).
* ``lindag``    - like bindag but splitting on arbitrary linear forms, one
  outgoing edge per value the form takes on the boolean cube.

Proof file format (UTF-8, line oriented):

    kind <lintree|bindag|binregdag|lindag>
    root <id>
    node <id> [terminal]
    split var <j>               (variable-splitting kinds)
    split form <n coeffs>       (form-splitting kinds)
    eq <n coeffs> | <rhs>       (zero or more system rows for the node)
    edge <from> <to> <n coeffs> | <value>

All integers lie in [0, p).  `serialize` emits nodes sorted by id and
edges sorted by (from, value, to), and `parse` inverts it bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import MalformedProof, NotUnsat, ParseError
from .instances import LinearSystem, zero_one_sat
from .linalg import AffinePoly, AffineSpan, Field, PartialAssignment, check_budget, form_image

KINDS = ("lintree", "bindag", "binregdag", "lindag")

VARIABLE_SPLIT_KINDS = ("bindag", "binregdag")


@dataclass(frozen=True)
class NodeRecord:
    """One proof node: an optional system plus an optional split label.

    `split_var` is set for variable-splitting kinds, `split_form` (a length-n
    coefficient vector) for form-splitting kinds.  Terminal nodes carry no
    split label.
    """

    system: Optional[LinearSystem] = None
    split_var: Optional[int] = None
    split_form: Optional[Tuple[int, ...]] = None
    terminal: bool = False

    def __post_init__(self):
        if self.terminal and (self.split_var is not None or self.split_form is not None):
            raise ValueError("terminal nodes carry no split label")


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    form: Tuple[int, ...]
    value: int


@dataclass(frozen=True)
class Refutation:
    kind: str
    field: Field
    n: int
    root: int
    nodes: Dict[int, NodeRecord] = dc_field(default_factory=dict)
    edges: Tuple[Edge, ...] = ()

    def children(self, node_id: int) -> List[Edge]:
        return [e for e in self.edges if e.src == node_id]

    def out_degree(self, node_id: int) -> int:
        return sum(1 for e in self.edges if e.src == node_id)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    diagnostic: Optional[str] = None

    def __bool__(self):
        return self.ok


def _reject(msg: str) -> CheckResult:
    return CheckResult(False, msg)


def _topological_order(ref: Refutation) -> List[int]:
    """Node ids in a fixed topological order; raises on cycles or bad refs."""
    indeg = {nid: 0 for nid in ref.nodes}
    for e in ref.edges:
        if e.src not in ref.nodes or e.dst not in ref.nodes:
            raise MalformedProof(f"edge {e.src}->{e.dst} references a missing node")
        indeg[e.dst] += 1
    roots = sorted(nid for nid, d in indeg.items() if d == 0)
    if roots != [ref.root]:
        raise MalformedProof(f"expected unique in-degree-0 root {ref.root}, found {roots}")
    order: List[int] = []
    ready = [ref.root]
    indeg = dict(indeg)
    while ready:
        ready.sort()
        nid = ready.pop(0)
        order.append(nid)
        for e in sorted(ref.children(nid), key=lambda e: (e.value, e.dst)):
            indeg[e.dst] -= 1
            if indeg[e.dst] == 0:
                ready.append(e.dst)
    if len(order) != len(ref.nodes):
        raise MalformedProof("proof graph contains a cycle or unreachable nodes")
    return order


def _edge_poly(ref: Refutation, e: Edge) -> AffinePoly:
    return AffinePoly.from_equation(ref.field, e.form, e.value)


def _span_with(system: LinearSystem, extra: Sequence[AffinePoly]) -> AffineSpan:
    return AffineSpan.span(system.field, system.n, system.polys() + list(extra))


def check_refutation(ref: Refutation, inst: LinearSystem, budget: Optional[int] = None) -> CheckResult:
    """Verify every defining clause of the refutation kind against inst.

    Structural breakage (cycles, duplicate roots, dangling references)
    raises MalformedProof; any failed semantic clause yields a reject whose
    diagnostic names the first failing node or edge in topological order.
    """
    if ref.kind not in KINDS:
        raise MalformedProof(f"unknown refutation kind {ref.kind!r}")
    if ref.field != inst.field or ref.n != inst.n:
        return _reject("instance ambient mismatch")
    order = _topological_order(ref)
    if ref.kind == "lintree":
        return _check_lintree(ref, inst, order, budget)
    return _check_dag(ref, inst, order, budget)


def _check_lintree(ref: Refutation, inst: LinearSystem, order, budget) -> CheckResult:
    indeg: Dict[int, int] = {nid: 0 for nid in ref.nodes}
    for e in ref.edges:
        indeg[e.dst] += 1
    for nid, d in indeg.items():
        if nid != ref.root and d != 1:
            return _reject(f"node {nid}: in-degree {d} breaks the tree shape")
    # path systems accumulate edge equations from the root
    paths: Dict[int, List[AffinePoly]] = {ref.root: []}
    for nid in order:
        rec = ref.nodes[nid]
        if rec.system is not None:
            return _reject(f"node {nid}: lintree nodes carry no systems")
        acc = paths[nid]
        solvable = not _span_with(inst, acc).inconsistent
        children = sorted(ref.children(nid), key=lambda e: (e.value, e.dst))
        if rec.terminal or not children:
            if not rec.terminal:
                return _reject(f"node {nid}: childless node not marked terminal")
            if solvable:
                return _reject(f"node {nid}: leaf but instance plus path is F_p-solvable")
            continue
        if not solvable:
            return _reject(f"node {nid}: internal node already F_p-unsolvable (must be a leaf)")
        if rec.split_form is None:
            return _reject(f"node {nid}: internal lintree node lacks a split form")
        image = form_image(ref.field, rec.split_form)
        seen_values = []
        for e in children:
            if tuple(e.form) != tuple(rec.split_form):
                return _reject(f"edge {e.src}->{e.dst}: label form differs from split form")
            if e.value not in image:
                return _reject(f"edge {e.src}->{e.dst}: value {e.value} outside boolean image")
            seen_values.append(e.value)
        if sorted(seen_values) != sorted(set(seen_values)):
            return _reject(f"node {nid}: duplicate edge values")
        if set(seen_values) != set(image):
            missing = sorted(set(image) - set(seen_values))
            return _reject(f"node {nid}: split covers {sorted(seen_values)}, missing values {missing}")
        form_poly_base = rec.split_form
        for e in children:
            paths[e.dst] = acc + [AffinePoly.from_equation(ref.field, form_poly_base, e.value)]
    return CheckResult(True)


def _check_dag(ref: Refutation, inst: LinearSystem, order, budget) -> CheckResult:
    check_budget(1 << ref.n, budget, "node 0-1 unsat checks")
    for nid in order:
        rec = ref.nodes[nid]
        if rec.system is None:
            return _reject(f"node {nid}: dag nodes must carry a system")
        if nid == ref.root and rec.system != inst:
            return _reject("root system differs from the instance")
        if zero_one_sat(rec.system, budget) is not None:
            return _reject(f"node {nid}: system is 0-1 satisfiable")
        children = sorted(ref.children(nid), key=lambda e: (e.value, e.dst))
        if rec.terminal or not children:
            if not rec.terminal:
                return _reject(f"node {nid}: childless node not marked terminal")
            if rec.system.solvable_over_field():
                return _reject(f"node {nid}: terminal system is F_p-solvable")
            continue
        if ref.kind in VARIABLE_SPLIT_KINDS:
            if rec.split_var is None:
                return _reject(f"node {nid}: splitting node lacks a split variable")
            j = rec.split_var
            if not 0 <= j < ref.n:
                return _reject(f"node {nid}: split variable {j} out of range")
            unit = [0] * ref.n
            unit[j] = 1
            values = [e.value for e in children]
            if sorted(values) != [0, 1] or len(children) != 2:
                return _reject(f"node {nid}: variable split must have edges for values 0 and 1")
            for e in children:
                if tuple(e.form) != tuple(unit):
                    return _reject(f"edge {e.src}->{e.dst}: label is not the split variable")
                rho = PartialAssignment({j: e.value}, ref.n)
                child = ref.nodes[e.dst]
                if child.system is None:
                    return _reject(f"node {e.dst}: dag nodes must carry a system")
                if ref.kind == "binregdag":
                    parent_span = rec.system.restrict(rho).span()
                    if not parent_span.contains_span(child.system.span()):
                        return _reject(
                            f"edge {e.src}->{e.dst}: child span escapes restricted parent span"
                        )
                else:  # bindag
                    eq = _edge_poly(ref, e)
                    parent_span = _span_with(rec.system, [eq])
                    child_span = _span_with(child.system, [eq])
                    if not parent_span.contains_span(child_span):
                        return _reject(
                            f"edge {e.src}->{e.dst}: child-plus-edge span escapes parent-plus-edge span"
                        )
        else:  # lindag
            if rec.split_form is None:
                return _reject(f"node {nid}: splitting node lacks a split form")
            image = form_image(ref.field, rec.split_form)
            values = [e.value for e in children]
            if sorted(values) != sorted(set(values)):
                return _reject(f"node {nid}: duplicate edge values")
            if set(values) != set(image):
                missing = sorted(set(image) - set(values))
                return _reject(f"node {nid}: split covers {sorted(values)}, missing values {missing}")
            for e in children:
                if tuple(e.form) != tuple(rec.split_form):
                    return _reject(f"edge {e.src}->{e.dst}: label form differs from split form")
                child = ref.nodes[e.dst]
                if child.system is None:
                    return _reject(f"node {e.dst}: dag nodes must carry a system")
                eq = _edge_poly(ref, e)
                parent_span = _span_with(rec.system, [eq])
                child_span = _span_with(child.system, [eq])
                if not parent_span.contains_span(child_span):
                    return _reject(
                        f"edge {e.src}->{e.dst}: child-plus-edge span escapes parent-plus-edge span"
                    )
    return CheckResult(True)


def build_layered_refutation(
    inst: LinearSystem,
    var_order: Optional[Sequence[int]] = None,
    budget: Optional[int] = None,
) -> Refutation:
    """The generic binregdag refutation built layer by layer.

    Layer i holds the distinct restrictions of the instance under boolean
    prefixes of length i (deduplicated by the raw restricted (A', b')
    pair); every node of layer i splits on the (i+1)-th variable of the
    order, and nodes whose system becomes F_p-unsolvable are terminal.
    The node count is at most (n+1) * |A({0,1}^n)|.
    """
    n = inst.n
    order = list(var_order) if var_order is not None else list(range(n))
    if sorted(order) != list(range(n)):
        raise ValueError("var order must be a permutation of all variables")
    if zero_one_sat(inst, budget) is not None:
        raise NotUnsat("instance is 0-1 satisfiable")
    nodes: Dict[int, NodeRecord] = {}
    edges: List[Edge] = []
    layer: Dict[bytes, int] = {inst.key(): 0}
    systems: Dict[int, LinearSystem] = {0: inst}
    next_id = 1
    for depth in range(n + 1):
        new_layer: Dict[bytes, int] = {}
        for key, nid in layer.items():
            system = systems[nid]
            if not system.solvable_over_field():
                nodes[nid] = NodeRecord(system=system, terminal=True)
                continue
            if depth == n:  # cannot happen for 0-1 unsat instances
                raise AssertionError("fully restricted system still F_p-solvable")
            j = order[depth]
            unit = [0] * n
            unit[j] = 1
            nodes[nid] = NodeRecord(system=system, split_var=j)
            for value in (0, 1):
                child_sys = system.restrict(PartialAssignment({j: value}, n))
                ckey = child_sys.key()
                cid = new_layer.get(ckey)
                if cid is None:
                    cid = next_id
                    next_id += 1
                    new_layer[ckey] = cid
                    systems[cid] = child_sys
                edges.append(Edge(nid, cid, tuple(unit), value))
        layer = new_layer
    return Refutation(
        kind="binregdag",
        field=inst.field,
        n=n,
        root=0,
        nodes=nodes,
        edges=tuple(edges),
    )


def _format_row(coeffs: Sequence[int], value: int) -> str:
    return " ".join(str(int(c)) for c in coeffs) + f" | {int(value)}"


def serialize_refutation(ref: Refutation) -> str:
    lines = [f"kind {ref.kind}", f"root {ref.root}"]
    for nid in sorted(ref.nodes):
        rec = ref.nodes[nid]
        lines.append(f"node {nid} terminal" if rec.terminal else f"node {nid}")
        if rec.split_var is not None:
            lines.append(f"split var {rec.split_var}")
        if rec.split_form is not None:
            lines.append("split form " + " ".join(str(int(c)) for c in rec.split_form))
        if rec.system is not None:
            for i in range(rec.system.k):
                lines.append("eq " + _format_row(rec.system.a[i], rec.system.b[i]))
    for e in sorted(ref.edges, key=lambda e: (e.src, e.value, e.dst)):
        lines.append(f"edge {e.src} {e.dst} " + _format_row(e.form, e.value))
    return "\n".join(lines) + "\n"


def save_refutation(ref: Refutation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_refutation(ref))


def _parse_row(toks: List[str], n: int, p: int, lineno: int) -> Tuple[Tuple[int, ...], int]:
    if "|" not in toks:
        raise ParseError("row missing '|' separator", lineno)
    bar = toks.index("|")
    coeffs = [int(t) for t in toks[:bar]]
    tail = toks[bar + 1 :]
    if len(coeffs) != n or len(tail) != 1:
        raise ParseError(f"expected {n} coefficients, '|', one value", lineno)
    value = int(tail[0])
    if any(not 0 <= c < p for c in coeffs) or not 0 <= value < p:
        raise ParseError("entry outside [0, p)", lineno)
    return tuple(coeffs), value


def parse_refutation(text: str, field: Field, n: int) -> Refutation:
    kind = None
    root = None
    current: Optional[int] = None
    node_rows: Dict[int, List[Tuple[Tuple[int, ...], int]]] = {}
    node_flags: Dict[int, dict] = {}
    edges: List[Edge] = []
    order_seen: List[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if head == "kind":
            if kind is not None:
                raise ParseError("duplicate kind line", lineno)
            if len(toks) != 2 or toks[1] not in KINDS:
                raise ParseError(f"kind must be one of {KINDS}", lineno)
            kind = toks[1]
        elif head == "root":
            if root is not None:
                raise ParseError("duplicate root line", lineno)
            root = int(toks[1])
        elif head == "node":
            if len(toks) not in (2, 3) or (len(toks) == 3 and toks[2] != "terminal"):
                raise ParseError("node line must be 'node <id> [terminal]'", lineno)
            current = int(toks[1])
            if current in node_flags:
                raise ParseError(f"duplicate node id {current}", lineno)
            node_flags[current] = {"terminal": len(toks) == 3, "var": None, "form": None}
            node_rows[current] = []
            order_seen.append(current)
        elif head == "split":
            if current is None:
                raise ParseError("split line outside a node block", lineno)
            if toks[1] == "var" and len(toks) == 3:
                node_flags[current]["var"] = int(toks[2])
            elif toks[1] == "form":
                coeffs = [int(t) for t in toks[2:]]
                if len(coeffs) != n or any(not 0 <= c < field.p for c in coeffs):
                    raise ParseError(f"split form needs {n} residues in [0, p)", lineno)
                node_flags[current]["form"] = tuple(coeffs)
            else:
                raise ParseError("split line must be 'split var <j>' or 'split form <coeffs>'", lineno)
        elif head == "eq":
            if current is None:
                raise ParseError("eq line outside a node block", lineno)
            node_rows[current].append(_parse_row(toks[1:], n, field.p, lineno))
        elif head == "edge":
            src, dst = int(toks[1]), int(toks[2])
            form, value = _parse_row(toks[3:], n, field.p, lineno)
            edges.append(Edge(src, dst, form, value))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)
    if kind is None or root is None:
        raise ParseError("missing kind/root header")
    if root not in node_flags:
        raise ParseError(f"root {root} has no node block")
    for e in edges:
        if e.src not in node_flags or e.dst not in node_flags:
            raise ParseError(f"edge {e.src}->{e.dst} references an undeclared node")
    nodes: Dict[int, NodeRecord] = {}
    for nid in order_seen:
        flags = node_flags[nid]
        rows = node_rows[nid]
        system = None
        if rows:
            system = LinearSystem(field, [list(r[0]) for r in rows], [r[1] for r in rows])
        if flags["terminal"] and (flags["var"] is not None or flags["form"] is not None):
            raise ParseError(f"terminal node {nid} carries a split label")
        nodes[nid] = NodeRecord(
            system=system,
            split_var=flags["var"],
            split_form=flags["form"],
            terminal=flags["terminal"],
        )
    return Refutation(kind=kind, field=field, n=n, root=root, nodes=nodes, edges=tuple(edges))


def load_refutation(path, field: Field, n: int) -> Refutation:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_refutation(fh.read(), field, n)
