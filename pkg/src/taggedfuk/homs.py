r"""Morphism spaces between tagged objects.

Three kinds of basis morphism:

* boundary: a path inside one marked interval from the slot of the source
  arc to a later slot of the target arc (paths never cross gap segments);
* interior: granted by an orbifold point between two positions of its good
  linearization;
* unit: the strict identity of an object (only endomorphism spaces have it).

Morphisms between the two partners of a thick pair are zero by definition,
and so is Hom between two objects with no connecting path or grant.

Serialization is stable and used by the CLI reports:
``b:M1:2->5@X->Y``  boundary from slot 2 to slot 5 of marking M1,
``i:P3:e1->e4@X->Y``  interior between positions 1 and 4 at point P3,
``u@X``  the unit.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import model


class NotComposable(Exception):
    """Concatenation of two morphisms that do not meet end to end."""


class NotNice(Exception):
    """Sign data requested on a system that is not nice."""


@dataclass(frozen=True)
class Boundary:
    marking: str
    slot_from: int
    slot_to: int
    src: str
    dst: str

    def serialize(self):
        return "b:%s:%d->%d@%s->%s" % (self.marking, self.slot_from,
                                       self.slot_to, self.src, self.dst)


@dataclass(frozen=True)
class Interior:
    point: str
    pos_from: int
    pos_to: int
    src: str
    dst: str

    def serialize(self):
        return "i:%s:e%d->e%d@%s->%s" % (self.point, self.pos_from,
                                         self.pos_to, self.src, self.dst)


@dataclass(frozen=True)
class Unit:
    obj: str

    @property
    def src(self):
        return self.obj

    @property
    def dst(self):
        return self.obj

    def serialize(self):
        return "u@%s" % self.obj


def parse(text):
    """Inverse of serialize."""
    if text.startswith("u@"):
        return Unit(text[2:])
    kind, rest = text.split(":", 1)
    body, objs = rest.rsplit("@", 1)
    src, dst = objs.split("->")
    place, span = body.rsplit(":", 1)
    a, b = span.split("->")
    if kind == "b":
        return Boundary(place, int(a), int(b), src, dst)
    if kind == "i":
        return Interior(place, int(a[1:]), int(b[1:]), src, dst)
    raise ValueError("unknown morphism text %r" % text)


# --------------------------------------------------------------------------
# basis enumeration


def _arc_slots(sys, obj):
    arc = sys.arcs[obj.arc]
    return [(e.marking, e.slot) for e in arc.marking_ends()]


def hom_basis(sys, src_id, dst_id, include_unit=True):
    r"""Basis of Hom(src, dst) in a stable lexicographic order.

    Thick partners get the zero space.  Self-homs include the unit last
    (when `include_unit`).
    """
    src = sys.objects[src_id]
    dst = sys.objects[dst_id]
    out = []
    if src_id != dst_id and src.arc == dst.arc:
        return out  # partners

    for m, i in sorted(_arc_slots(sys, src)):
        for m2, j in sorted(_arc_slots(sys, dst)):
            if m == m2 and i < j:
                out.append(Boundary(m, i, j, src_id, dst_id))

    for pid in sorted(sys.points):
        xs = sys.point_positions(pid)
        for a, oa in enumerate(xs):
            if oa != src_id:
                continue
            for b in range(a + 1, len(xs)):
                if xs[b] == dst_id and sys.granted(pid, a, b):
                    out.append(Interior(pid, a, b, src_id, dst_id))

    out.sort(key=lambda f: f.serialize())
    if include_unit and src_id == dst_id:
        out.append(Unit(src_id))
    return out


def all_basic_morphisms(sys):
    """Every non-unit basis morphism of the system, stably ordered."""
    out = []
    ids = sorted(sys.objects)
    for x in ids:
        for y in ids:
            out.extend(hom_basis(sys, x, y, include_unit=False))
    return out


def interior_morphism_at(sys, point, src_id, dst_id):
    """The interior morphism granted by a point, or None."""
    xs = sys.point_positions(point)
    for a, oa in enumerate(xs):
        if oa != src_id:
            continue
        for b in range(a + 1, len(xs)):
            if xs[b] == dst_id and sys.granted(point, a, b):
                return Interior(point, a, b, src_id, dst_id)
    return None


def degree(sys, f):
    """Integer degree of a basis morphism."""
    if isinstance(f, Unit):
        return 0
    if isinstance(f, Boundary):
        base = sys.wedge_degree(f.marking, f.slot_from, f.slot_to)
        return base + sys.objects[f.src].shift - sys.objects[f.dst].shift
    return sys.span_index(f.point, f.pos_from, f.pos_to)


# --------------------------------------------------------------------------
# concatenation and the weight/sign brackets


def concatenable(sys, f, g):
    """Whether f: X -> Y and g: Y -> Z meet head to tail."""
    if isinstance(f, Unit) or isinstance(g, Unit):
        return False
    if f.dst != g.src:
        return False
    if isinstance(f, Boundary) and isinstance(g, Boundary):
        return f.marking == g.marking and f.slot_to == g.slot_from
    if isinstance(f, Interior) and isinstance(g, Interior):
        return f.point == g.point and f.pos_to == g.pos_from
    return False


def concatenate(sys, f, g):
    """The path composite f then g (no sign, no weight)."""
    if not concatenable(sys, f, g):
        raise NotComposable("%s then %s" % (f.serialize(), g.serialize()))
    if isinstance(f, Boundary):
        return Boundary(f.marking, f.slot_from, g.slot_to, f.src, g.dst)
    return Interior(f.point, f.pos_from, g.pos_to, f.src, g.dst)


def middle_object(sys, f, g):
    assert f.dst == g.src
    return sys.objects[f.dst]


def fold_indicator(sys, f, g):
    r"""The bracket <f, g>: 1 when a fold can occur between f and g.

    Concatenable boundary pair through a middle arc of interior number 1,
    or concatenable interior pair through a middle arc of interior number 2.
    """
    if not concatenable(sys, f, g):
        return 0
    nu = sys.arcs[middle_object(sys, f, g).arc].nu
    if isinstance(f, Boundary):
        return 1 if nu == 1 else 0
    return 1 if nu == 2 else 0


def source_sign(sys, f):
    """sigma(f): the source tagging at the defining point, 0 for boundary."""
    if isinstance(f, Interior):
        return sys.objects[f.src].tag_at(f.point)
    return 0


def fold_sign(sys, f, g):
    r"""sigma(f, g): tagging of the middle arc's other interior endpoint.

    Zero unless <f, g> = 1.  For a boundary pair the middle arc has exactly
    one interior end; for an interior pair it is the end away from the
    concatenation point.
    """
    if not fold_indicator(sys, f, g):
        return 0
    mid = middle_object(sys, f, g)
    arc = sys.arcs[mid.arc]
    pts = [e.point for e in arc.point_ends()]
    if isinstance(f, Boundary):
        (q,) = pts
    else:
        others = [p for p in pts if p != f.point]
        (q,) = others
    return mid.tag_at(q)


def morphism_sign(sys, f):
    """sigma(f) on a nice system (raises NotNice otherwise)."""
    if not sys.is_nice():
        raise NotNice("sign conventions require a nice system")
    return source_sign(sys, f)
