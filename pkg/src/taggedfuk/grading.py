"""Degrees, the sequence degree laws, and shift normalization.

A system is nice when every granted interior morphism has degree zero.
`normalize_nice` reaches that state by re-solving the objects' shifts
along the graph of irreducible interior morphisms, which must be a forest
once partner objects are tied together.
"""

from __future__ import annotations

from dataclasses import replace

from . import homs, model
from .ainf import Report, extract_sequences


class NotAForest(Exception):
    """The irreducible interior-morphism graph contains a cycle, so no
    choice of shifts can zero every edge degree independently."""


def degree_of(sys, f):
    """Degree of a basis morphism (units have degree zero)."""
    return homs.degree(sys, f)


def check_degree_sums(sys):
    """Degree laws of extracted sequences.

    The corners of a disc sequence of length n sum to n - 2; those of a
    composition sequence sum to the value's degree plus n - 2.
    """
    report = Report()
    discs, comps = extract_sequences(sys)
    for d in discs:
        n = len(d.corners)
        got = sum(homs.degree(sys, c) for c in d.corners)
        report.checked += 1
        if got != n - 2:
            report.violations.append(
                {"sequence": [c.serialize() for c in d.corners],
                 "sum": got, "expected": n - 2})
    for c in comps:
        n = len(c.corners)
        got = sum(homs.degree(sys, x) for x in c.corners)
        want = homs.degree(sys, c.value) + n - 2
        report.checked += 1
        if got != want:
            report.violations.append(
                {"sequence": [x.serialize() for x in c.corners],
                 "value": c.value.serialize(), "sum": got, "expected": want})
    return report


def _irreducible_edges(sys):
    """Granted interior morphisms with no granted intermediate stop,
    as (point, pos_from, pos_to) triples."""
    edges = []
    for pid in sys.points:
        xs = sys.point_positions(pid)
        n = len(xs)
        for a in range(n):
            for b in range(a + 1, n):
                if not sys.granted(pid, a, b):
                    continue
                if any(sys.granted(pid, a, t) and sys.granted(pid, t, b)
                       for t in range(a + 1, b)):
                    continue
                edges.append((pid, a, b))
    return edges


def normalize_nice(sys):
    """Return an equivalent system whose shifts make it nice.

    Walks each component of the morphism graph from an arbitrary root,
    assigning every neighbour the shift that zeroes the connecting edge;
    partner objects keep their relative shift.  Raises NotAForest when the
    graph has a cycle, since the edges then over-determine the shifts.
    """
    # constraints: new_shift[v] - new_shift[u] = diff
    constraints = []
    for pid, a, b in _irreducible_edges(sys):
        xs = sys.point_positions(pid)
        u, v = xs[a], xs[b]
        raw = sys.span_index(pid, a, b) - sys.objects[u].shift \
            + sys.objects[v].shift
        constraints.append((u, v, raw))
    seen_arcs = set()
    for obj in sys.objects.values():
        if obj.arc in seen_arcs:
            continue
        seen_arcs.add(obj.arc)
        partner = sys.partner(obj.id)
        if partner is not None:
            constraints.append((obj.id, partner.id,
                                sys.objects[partner.id].shift - obj.shift))

    adjacency = {}
    for u, v, diff in constraints:
        adjacency.setdefault(u, []).append((v, diff))
        adjacency.setdefault(v, []).append((u, -diff))

    new_shift = {}
    for root in sorted(adjacency):
        if root in new_shift:
            continue
        new_shift[root] = sys.objects[root].shift
        stack = [root]
        parent = {root: None}
        while stack:
            u = stack.pop()
            for v, diff in adjacency[u]:
                if v in new_shift:
                    if v != parent[u]:
                        raise NotAForest(
                            "objects %r and %r are linked by more than "
                            "one chain of morphisms" % (u, v))
                    continue
                new_shift[v] = new_shift[u] + diff
                parent[v] = u
                stack.append(v)

    data = model.system_to_dict(sys)
    for entry in data["objects"]:
        if entry["id"] in new_shift:
            entry["shift"] = new_shift[entry["id"]]
    return model.load_system(data)
