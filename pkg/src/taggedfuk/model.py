r"""Surface data model: markings, orbifold points, arcs, tagged objects, faces.

A system lives on an oriented surface whose boundary carries marked intervals
(markings) and whose interior carries order-2 orbifold points.  Arcs end
either on a slot of a marking or on an orbifold point.  A tagged object is an
arc together with a mod-2 tagging at each of its interior endpoints and an
integer shift.  Faces are the closures of the complement components of the
arc union, stored explicitly as oriented boundary walks.

Everything here is combinatorial.  The loader performs schema and reference
checks; `validate_arc_system` checks geometric closure (every arc side used
exactly once, corners join consecutive slots, sectors join cyclically
adjacent ends, the arc union is a forest); `validate_thick_good_full` checks
the three conditions that make a pre-tagged system an actual system of
tagged arcs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field


class SchemaError(Exception):
    """Malformed input document (missing keys, wrong types, bad counts)."""


class DanglingReference(SchemaError):
    """A reference to a marking, point, arc or object that does not exist."""


class InvalidPlacement(Exception):
    """Arc ends, slot usage, order data or taggings violate placement rules."""


class InconsistentFaces(Exception):
    """Face walks do not close up into a consistent complement decomposition."""


class DegreeSumViolation(Exception):
    """A sequence's degrees do not satisfy the expected sum law."""


# --------------------------------------------------------------------------
# primitive records


@dataclass(frozen=True)
class MarkingEnd:
    marking: str
    slot: int

    def key(self):
        return ("m", self.marking, self.slot)


@dataclass(frozen=True)
class PointEnd:
    point: str
    index: int  # 0 or 1, distinguishing the two ends of an arc at one point

    def key(self):
        return ("p", self.point, self.index)


@dataclass(frozen=True)
class Marking:
    id: str
    slots: int


@dataclass(frozen=True)
class OrbifoldPoint:
    r"""An order-2 interior point with its good linearization.

    ``order`` lists arc ends in the good linear order.  An arc carrying a
    thick pair and hanging here appears at both extremes (the two positions
    stand for the two partner objects).  ``indices`` are the arc-level
    integers between consecutive positions; the object-level index of a span
    adds the shift difference on top (see `span_index`).
    """

    id: str
    order: tuple  # tuple of (arc_id, end_index) pairs
    indices: tuple  # len(order) - 1 integers


@dataclass(frozen=True)
class Arc:
    id: str
    ends: tuple  # two MarkingEnd/PointEnd records

    @property
    def nu(self):
        return sum(1 for e in self.ends if isinstance(e, PointEnd))

    def point_ends(self):
        return [e for e in self.ends if isinstance(e, PointEnd)]

    def marking_ends(self):
        return [e for e in self.ends if isinstance(e, MarkingEnd)]


@dataclass(frozen=True)
class TaggedObject:
    id: str
    arc: str
    tagging: tuple  # sorted tuple of (point_id, 0|1)
    shift: int

    def tag_at(self, point):
        for p, t in self.tagging:
            if p == point:
                return t
        raise KeyError(point)


# face walk entries


@dataclass(frozen=True)
class SideEntry:
    arc: str


@dataclass(frozen=True)
class CornerEntry:
    marking: str
    slot_from: int
    slot_to: int


@dataclass(frozen=True)
class SectorEntry:
    point: str


@dataclass(frozen=True)
class GapEntry:
    label: str


@dataclass(frozen=True)
class Face:
    id: str
    loop: tuple
    unmarked_circles: int = 0
    interior_points: tuple = ()  # orbifold points strictly inside


@dataclass
class ArcSystem:
    markings: dict
    points: dict
    arcs: dict
    objects: dict
    faces: dict
    elementary: dict  # marking id -> tuple of wedge degrees (slots - 1 many)
    extra: dict = field(default_factory=dict)

    # ---- lookups ------------------------------------------------------

    def objects_on(self, arc_id):
        return [o for o in self.objects.values() if o.arc == arc_id]

    def partner(self, obj_id):
        """The thick partner of an object, or None."""
        obj = self.objects[obj_id]
        for o in self.objects_on(obj.arc):
            if o.id != obj_id:
                return o
        return None

    def is_thick(self, arc_id):
        return len(self.objects_on(arc_id)) == 2

    def point_positions(self, point_id):
        """Object-level linearization of a point: list of object ids."""
        return self._positions[point_id]

    def span_index(self, point_id, pos_a, pos_b):
        """Object-level index between positions a < b of the linearization."""
        assert pos_a < pos_b
        pt = self.points[point_id]
        raw = sum(pt.indices[pos_a:pos_b])
        xs = self.point_positions(point_id)
        sa = self.objects[xs[pos_a]].shift
        sb = self.objects[xs[pos_b]].shift
        return raw + sa - sb

    def granted(self, point_id, pos_a, pos_b):
        """Whether the point grants the morphism position a -> position b."""
        if pos_a >= pos_b:
            return False
        xs = self.point_positions(point_id)
        src = self.objects[xs[pos_a]]
        dst = self.objects[xs[pos_b]]
        if src.arc == dst.arc:
            return False  # partners never receive morphisms
        i = self.span_index(point_id, pos_a, pos_b)
        return (dst.tag_at(point_id) - src.tag_at(point_id) - i) % 2 == 0

    def wedge_degree(self, marking_id, slot_from, slot_to):
        """Sum of elementary degrees over slots [slot_from, slot_to)."""
        assert slot_from < slot_to
        return sum(self.elementary[marking_id][slot_from:slot_to])

    def arc_at_slot(self, marking_id, slot):
        return self._slot_arc[(marking_id, slot)]

    def is_nice(self):
        """Every granted interior morphism has index 0."""
        for pid in self.points:
            xs = self.point_positions(pid)
            for a in range(len(xs)):
                for b in range(a + 1, len(xs)):
                    if self.granted(pid, a, b) and self.span_index(pid, a, b) != 0:
                        return False
        return True


# --------------------------------------------------------------------------
# loading

_KNOWN_TOP = {
    "name", "comment", "markings", "orbifold_points", "arcs", "objects",
    "faces", "elementary_degrees", "involution",
}


def _parse_end(raw, arcs_seen=None):
    if not isinstance(raw, dict):
        raise SchemaError("arc end must be an object, got %r" % (raw,))
    if "at" in raw and "slot" in raw:
        return MarkingEnd(str(raw["at"]), int(raw["slot"]))
    if "at" in raw:
        return PointEnd(str(raw["at"]), int(raw.get("end", 0)))
    raise SchemaError("arc end needs an 'at' field: %r" % (raw,))


def _parse_loop_entry(raw):
    if not isinstance(raw, dict) or len(raw) != 1 and "corner" not in raw:
        if not isinstance(raw, dict):
            raise SchemaError("face loop entry must be an object: %r" % (raw,))
    if "arc" in raw:
        return SideEntry(str(raw["arc"]))
    if "corner" in raw:
        c = raw["corner"]
        return CornerEntry(str(c["marking"]), int(c["from"]), int(c["to"]))
    if "point" in raw:
        return SectorEntry(str(raw["point"]))
    if "gap" in raw:
        return GapEntry(str(raw["gap"]))
    raise SchemaError("unknown face loop entry %r" % (raw,))


def load_system(source):
    r"""Load an arc system from a path, a JSON string, or a parsed dict.

    Performs schema checks and reference resolution, then builds the derived
    caches.  Raises `SchemaError` / `DanglingReference` on malformed input.
    Geometric validation is separate (`validate_arc_system`,
    `validate_thick_good_full`).
    """
    if isinstance(source, (str, os.PathLike)) and os.path.exists(str(source)):
        with open(source) as fh:
            doc = json.load(fh)
    elif isinstance(source, str):
        doc = json.loads(source)
    elif isinstance(source, dict):
        doc = source
    else:
        raise SchemaError("unsupported source %r" % (type(source),))

    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object")
    unknown = set(doc) - _KNOWN_TOP
    if unknown:
        raise SchemaError("unknown top-level keys: %s" % sorted(unknown))

    markings = {}
    for m in doc.get("markings", []):
        mid = str(m["id"])
        if mid in markings:
            raise SchemaError("duplicate marking %r" % mid)
        slots = int(m["slots"])
        if slots < 1:
            raise SchemaError("marking %r needs at least one slot" % mid)
        markings[mid] = Marking(mid, slots)

    points = {}
    for p in doc.get("orbifold_points", []):
        pid = str(p["id"])
        if pid in points:
            raise SchemaError("duplicate orbifold point %r" % pid)
        order = []
        for entry in p.get("order", []):
            if isinstance(entry, str):
                order.append((entry, 0))
            else:
                order.append((str(entry["arc"]), int(entry.get("end", 0))))
        indices = tuple(int(v) for v in p.get("indices", []))
        if order and len(indices) != len(order) - 1:
            raise SchemaError(
                "point %r: %d order entries need %d indices, got %d"
                % (pid, len(order), len(order) - 1, len(indices)))
        points[pid] = OrbifoldPoint(pid, tuple(order), indices)

    arcs = {}
    for a in doc.get("arcs", []):
        aid = str(a["id"])
        if aid in arcs:
            raise SchemaError("duplicate arc %r" % aid)
        ends = a.get("ends", [])
        if len(ends) != 2:
            raise SchemaError("arc %r needs exactly two ends" % aid)
        parsed = []
        for k, e in enumerate(ends):
            end = _parse_end(e)
            if isinstance(end, PointEnd) and "end" not in e:
                end = PointEnd(end.point, k)
            parsed.append(end)
        arcs[aid] = Arc(aid, tuple(parsed))

    objects = {}
    for o in doc.get("objects", []):
        oid = str(o["id"])
        if oid in objects:
            raise SchemaError("duplicate object %r" % oid)
        tagging = tuple(sorted(
            (str(k), int(v) % 2) for k, v in (o.get("tagging") or {}).items()))
        objects[oid] = TaggedObject(oid, str(o["arc"]), tagging,
                                    int(o.get("shift", 0)))

    faces = {}
    for f in doc.get("faces", []):
        fid = str(f["id"])
        if fid in faces:
            raise SchemaError("duplicate face %r" % fid)
        loop = tuple(_parse_loop_entry(e) for e in f.get("loop", []))
        faces[fid] = Face(fid, loop,
                          int(f.get("unmarked_circles", 0)),
                          tuple(str(q) for q in f.get("interior_points", [])))

    elementary = {}
    for mid, vals in (doc.get("elementary_degrees") or {}).items():
        elementary[str(mid)] = tuple(int(v) for v in vals)

    sys = ArcSystem(markings, points, arcs, objects, faces, elementary,
                    extra={k: doc[k] for k in ("involution", "name", "comment")
                           if k in doc})
    _resolve(sys)
    return sys


def _resolve(sys):
    """Reference resolution plus derived caches. Raises on dangling refs."""
    # every marking needs an elementary degree vector of the right length
    for mid, m in sys.markings.items():
        got = sys.elementary.get(mid)
        if m.slots == 1:
            sys.elementary.setdefault(mid, ())
            got = sys.elementary[mid]
        if got is None or len(got) != m.slots - 1:
            raise SchemaError(
                "marking %r with %d slots needs %d elementary degrees"
                % (mid, m.slots, m.slots - 1))

    slot_arc = {}
    for arc in sys.arcs.values():
        for end in arc.ends:
            if isinstance(end, MarkingEnd):
                if end.marking not in sys.markings:
                    raise DanglingReference("arc %r: no marking %r"
                                            % (arc.id, end.marking))
                if not (0 <= end.slot < sys.markings[end.marking].slots):
                    raise InvalidPlacement(
                        "arc %r: slot %d out of range at %r"
                        % (arc.id, end.slot, end.marking))
                key = (end.marking, end.slot)
                if key in slot_arc:
                    raise InvalidPlacement(
                        "slot %r used twice (%r and %r)"
                        % (key, slot_arc[key], arc.id))
                slot_arc[key] = arc.id
            else:
                if end.point not in sys.points:
                    raise DanglingReference("arc %r: no orbifold point %r"
                                            % (arc.id, end.point))
    sys._slot_arc = slot_arc

    for obj in sys.objects.values():
        if obj.arc not in sys.arcs:
            raise DanglingReference("object %r: no arc %r" % (obj.id, obj.arc))
        tagged_at = {p for p, _ in obj.tagging}
        needed = {e.point for e in sys.arcs[obj.arc].point_ends()}
        if tagged_at != needed:
            raise InvalidPlacement(
                "object %r must be tagged exactly at %s, got %s"
                % (obj.id, sorted(needed), sorted(tagged_at)))

    for pid, pt in sys.points.items():
        for aid, endidx in pt.order:
            if aid not in sys.arcs:
                raise DanglingReference("point %r order: no arc %r" % (pid, aid))

    _build_positions(sys)


def _build_positions(sys):
    r"""Object-level linearizations of each point.

    Non-thick arcs contribute their unique object at each listed position.
    A thick arc listed at the two extremes contributes one partner at each;
    the assignment is fixed by requiring every consecutive pair of the two
    drop-one sequences to be granted, trying both ways.  Ambiguity cannot
    arise: the two assignments grant disjoint consecutive pairs unless the
    point has no other arcs, in which case the order of partners is pinned
    by object id for determinism.
    """
    positions = {}
    for pid, pt in sys.points.items():
        row = []
        for aid, _endidx in pt.order:
            objs = sorted(sys.objects_on(aid), key=lambda o: o.id)
            if not objs:
                raise InvalidPlacement(
                    "point %r order references arc %r with no object"
                    % (pid, aid))
            row.append(objs)
        n = len(row)
        if n >= 2 and pt.order[0][0] == pt.order[-1][0] and \
                len(row[0]) == 2:
            # thick pair at the extremes: choose the partner assignment
            pair = row[0]
            candidates = []
            for first, last in (pair, pair[::-1]):
                trial = ([first.id]
                         + [r[0].id for r in row[1:-1]]
                         + [last.id])
                candidates.append(trial)
            positions[pid] = _pick_pair_assignment(sys, pid, candidates)
        else:
            for aid_ei, objs in zip(pt.order, row):
                if len(objs) != 1:
                    raise InvalidPlacement(
                        "point %r: arc %r carries %d objects but is not "
                        "listed as a pair at the extremes"
                        % (pid, aid_ei[0], len(objs)))
            positions[pid] = [r[0].id for r in row]
    sys._positions = positions


def _pick_pair_assignment(sys, pid, candidates):
    sys._positions = getattr(sys, "_positions", {})
    best = None
    for cand in candidates:
        sys._positions[pid] = cand
        ok = all(sys.granted(pid, k, k + 1) for k in range(len(cand) - 2)) \
            and all(sys.granted(pid, k, k + 1) for k in range(1, len(cand) - 1))
        if len(cand) == 2:
            ok = True  # lone pair: nothing to grant
        if ok:
            best = cand
            break
    if best is None:
        best = candidates[0]  # validators will report the failure
    sys._positions[pid] = best
    return best


# --------------------------------------------------------------------------
# geometric validation


def validate_arc_system(sys):
    r"""Closure checks for the underlying arc system.

    Returns a list of problem strings (empty when valid).  Raises nothing;
    callers that want exceptions can use `require_valid`.
    """
    problems = []

    # every slot of every marking is used
    for mid, m in sys.markings.items():
        for s in range(m.slots):
            if (mid, s) not in sys._slot_arc:
                problems.append("slot %d of marking %r is unused" % (s, mid))

    # point order lists match the arc ends that actually hang there
    for pid, pt in sys.points.items():
        expect = []
        for arc in sys.arcs.values():
            for k, end in enumerate(arc.ends):
                if isinstance(end, PointEnd) and end.point == pid:
                    expect.append((arc.id, k))
        listed = list(pt.order)
        thick_first = listed and listed[0][0] == listed[-1][0] and \
            len(listed) >= 2 and sys.is_thick(listed[0][0])
        effective = listed[:-1] if thick_first else listed
        if sorted(effective) != sorted(expect):
            problems.append(
                "point %r order %s does not match hanging ends %s"
                % (pid, listed, sorted(expect)))

    # the arc union must be a forest: cycles can only close through
    # orbifold points, so look at the multigraph on points.
    parent = {}

    def find(x):
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    for arc in sys.arcs.values():
        pends = arc.point_ends()
        if len(pends) == 2:
            a, b = pends[0].point, pends[1].point
            ra, rb = find(a), find(b)
            if ra == rb:
                problems.append(
                    "arc union is not a forest: arc %r closes a cycle "
                    "through points %r, %r" % (arc.id, a, b))
            else:
                parent[ra] = rb

    problems.extend(_validate_faces(sys))
    return problems


def _face_sides(face):
    return [e for e in face.loop if isinstance(e, SideEntry)]


def _validate_faces(sys):
    problems = []
    side_count = {aid: 0 for aid in sys.arcs}
    gap_seen = set()

    for face in sys.faces.values():
        loop = face.loop
        if not loop:
            problems.append("face %r has an empty loop" % face.id)
            continue
        n = len(loop)
        for i, entry in enumerate(loop):
            nxt = loop[(i + 1) % n]
            prev = loop[i - 1]
            if isinstance(entry, SideEntry):
                if entry.arc not in sys.arcs:
                    problems.append("face %r references unknown arc %r"
                                    % (face.id, entry.arc))
                    continue
                side_count[entry.arc] += 1
            elif isinstance(entry, CornerEntry):
                if entry.marking not in sys.markings:
                    problems.append("face %r: unknown marking %r"
                                    % (face.id, entry.marking))
                    continue
                if entry.slot_to != entry.slot_from + 1:
                    problems.append(
                        "face %r: corner %r %d->%d does not cross a single "
                        "wedge" % (face.id, entry.marking, entry.slot_from,
                                   entry.slot_to))
                    continue
                a_prev = sys._slot_arc.get((entry.marking, entry.slot_from))
                a_next = sys._slot_arc.get((entry.marking, entry.slot_to))
                ok_fwd = (isinstance(prev, SideEntry) and prev.arc == a_prev
                          and isinstance(nxt, SideEntry) and nxt.arc == a_next)
                ok_bwd = (isinstance(prev, SideEntry) and prev.arc == a_next
                          and isinstance(nxt, SideEntry) and nxt.arc == a_prev)
                if not (ok_fwd or ok_bwd):
                    problems.append(
                        "face %r: corner at %r (%d,%d) not flanked by its "
                        "slot arcs" % (face.id, entry.marking,
                                       entry.slot_from, entry.slot_to))
            elif isinstance(entry, SectorEntry):
                if entry.point not in sys.points:
                    problems.append("face %r: unknown point %r"
                                    % (face.id, entry.point))
                    continue
                if not (isinstance(prev, SideEntry)
                        and isinstance(nxt, SideEntry)):
                    problems.append(
                        "face %r: sector at %r must sit between two arc "
                        "sides" % (face.id, entry.point))
                    continue
                ends = [aid for aid, _e in
                        _distinct_cyclic_ends(sys.points[entry.point])]
                if prev.arc not in ends or nxt.arc not in ends:
                    problems.append(
                        "face %r: sector at %r flanked by arcs not hanging "
                        "there" % (face.id, entry.point))
                elif len(ends) > 1:
                    i_prev = ends.index(prev.arc)
                    if ends[(i_prev + 1) % len(ends)] != nxt.arc and \
                            ends[i_prev - 1] != nxt.arc:
                        problems.append(
                            "face %r: sector at %r joins non-adjacent ends "
                            "%r -> %r" % (face.id, entry.point, prev.arc,
                                          nxt.arc))
            elif isinstance(entry, GapEntry):
                if entry.label in gap_seen:
                    problems.append("gap run %r appears in two faces"
                                    % entry.label)
                gap_seen.add(entry.label)

        for q in face.interior_points:
            if q not in sys.points:
                problems.append("face %r: unknown interior point %r"
                                % (face.id, q))

    for aid, cnt in side_count.items():
        if cnt != 2:
            problems.append("arc %r used on %d face sides, expected 2"
                            % (aid, cnt))
    return problems


def _distinct_cyclic_ends(pt):
    """Cyclic end order of a point with a doubled thick extreme collapsed."""
    order = list(pt.order)
    if len(order) >= 2 and order[0][0] == order[-1][0] and \
            order[0][1] == order[-1][1]:
        order = order[:-1]
    return order


def require_valid(sys):
    problems = validate_arc_system(sys)
    if problems:
        raise InconsistentFaces("; ".join(problems))
    problems = validate_thick_good_full(sys)
    if problems:
        raise InvalidPlacement("; ".join(problems))
    return sys


# --------------------------------------------------------------------------
# thick / good / full


def validate_thick_good_full(sys):
    """Check the three tagging conditions. Returns a list of problems."""
    problems = []
    problems.extend(_check_thick(sys))
    problems.extend(_check_good(sys))
    problems.extend(_check_full(sys))
    return problems


def _check_thick(sys):
    problems = []
    for aid, arc in sys.arcs.items():
        objs = sorted(sys.objects_on(aid), key=lambda o: o.id)
        if len(objs) > 2:
            problems.append("arc %r carries %d objects, at most 2 allowed"
                            % (aid, len(objs)))
            continue
        if len(objs) != 2:
            continue
        if arc.nu < 1:
            problems.append("thick pair on arc %r needs an interior end"
                            % aid)
            continue
        x, y = objs
        n = y.shift - x.shift
        pts = [e.point for e in arc.point_ends()]
        if arc.nu == 1:
            p = pts[0]
            if (y.tag_at(p) - x.tag_at(p) - 1 - n) % 2 != 0:
                problems.append(
                    "pair (%s, %s) violates the tagging relation at %r"
                    % (x.id, y.id, p))
        else:
            flips = [p for p in pts
                     if (y.tag_at(p) - x.tag_at(p) - 1 - n) % 2 == 0]
            keeps = [p for p in pts
                     if (y.tag_at(p) - x.tag_at(p) - n) % 2 == 0]
            if not (len(flips) == 1 and len(keeps) == 1 and
                    set(flips) | set(keeps) == set(pts)):
                problems.append(
                    "pair (%s, %s) must flip at exactly one of its two "
                    "points" % (x.id, y.id))
            else:
                p = flips[0]
                others = [a for a in sys.arcs.values() if a.id != aid
                          and any(isinstance(e, PointEnd) and e.point == p
                                  for e in a.ends)]
                if others:
                    problems.append(
                        "arc %r is thick at %r with interior number 2, so "
                        "it must hang there alone" % (aid, p))
    return problems


def _check_good(sys):
    problems = []
    for pid, pt in sys.points.items():
        xs = sys.point_positions(pid)
        n = len(xs)
        arcs_listed = [aid for aid, _e in pt.order]
        pair_arcs = {aid for aid in set(arcs_listed) if sys.is_thick(aid)}
        if len(pair_arcs) > 1:
            problems.append("point %r has %d thick pairs, at most one "
                            "allowed" % (pid, len(pair_arcs)))
            continue
        if pair_arcs:
            aid = next(iter(pair_arcs))
            if not (arcs_listed[0] == aid and arcs_listed[-1] == aid):
                problems.append(
                    "point %r: thick pair %r must occupy the first and "
                    "last positions" % (pid, aid))
                continue
            # both drop-one sequences must be good
            for lo, hi in ((0, n - 1), (1, n)):
                for k in range(lo, hi - 1):
                    if not sys.granted(pid, k, k + 1):
                        problems.append(
                            "point %r: consecutive pair (%s, %s) not "
                            "granted" % (pid, xs[k], xs[k + 1]))
        else:
            for k in range(n - 1):
                if not sys.granted(pid, k, k + 1):
                    problems.append(
                        "point %r: consecutive pair (%s, %s) not granted"
                        % (pid, xs[k], xs[k + 1]))
    return problems


def classify_face(sys, face):
    r"""Fullness feature count and corner roles of one face.

    Returns (count, roles) where roles maps loop positions of sector
    entries to "forward", "backward" or "outward" and count is the number
    of fullness features: gap runs, unmarked circles, enclosed points,
    outward sectors, non-thick folds.
    """
    loop = face.loop
    n = len(loop)
    count = face.unmarked_circles + len(face.interior_points)
    count += sum(1 for e in loop if isinstance(e, GapEntry))
    roles = {}
    for i, entry in enumerate(loop):
        if not isinstance(entry, SectorEntry):
            continue
        prev = loop[i - 1]
        nxt = loop[(i + 1) % n]
        if not (isinstance(prev, SideEntry) and isinstance(nxt, SideEntry)):
            roles[i] = "outward"
            count += 1
            continue
        if prev.arc == nxt.arc:
            # a fold; thickness decides whether it costs a feature
            roles[i] = "fold"
            if not sys.is_thick(prev.arc):
                count += 1
            continue
        direction = _sector_direction(sys, entry.point, prev.arc, nxt.arc)
        roles[i] = direction
        if direction == "outward":
            count += 1
    return count, roles


def _sector_direction(sys, pid, arc_a, arc_b):
    """Role of the sector crossed from arc_a to arc_b at point pid."""
    xs = sys.point_positions(pid)
    pos_a = [k for k, oid in enumerate(xs) if sys.objects[oid].arc == arc_a]
    pos_b = [k for k, oid in enumerate(xs) if sys.objects[oid].arc == arc_b]
    for a in pos_a:
        for b in pos_b:
            if a < b and sys.granted(pid, a, b):
                return "forward"
    for b in pos_b:
        for a in pos_a:
            if b < a and sys.granted(pid, b, a):
                return "backward"
    return "outward"


def _check_full(sys):
    problems = []
    for face in sys.faces.values():
        count, roles = classify_face(sys, face)
        if count > 1:
            problems.append("face %r has %d fullness features, at most one "
                            "allowed" % (face.id, count))
            continue
        if count == 0:
            backs = [r for r in roles.values() if r == "backward"]
            if len(backs) > 1:
                problems.append(
                    "face %r has %d backward corners; an eligible face "
                    "admits at most one" % (face.id, len(backs)))
    return problems


# --------------------------------------------------------------------------
# editing


def add_arc(sys, arc, objects=(), faces=None, drop_faces=(),
            elementary_degrees=None, orbifold_points=None):
    r"""Return a new system with an arc added and the faces re-stitched.

    `arc` and `objects` are raw JSON-style dicts as in fixtures; `faces`
    replaces the faces whose ids appear in `drop_faces`.  The result is
    re-loaded from scratch so every loader check runs again.
    """
    doc = system_to_dict(sys)
    doc["arcs"].append(arc)
    doc["objects"].extend(objects)
    if elementary_degrees:
        doc["elementary_degrees"].update(
            {k: list(v) for k, v in elementary_degrees.items()})
    if orbifold_points:
        have = {p["id"]: p for p in doc["orbifold_points"]}
        for p in orbifold_points:
            have[p["id"]] = p
        doc["orbifold_points"] = list(have.values())
    if faces is not None:
        doc["faces"] = [f for f in doc["faces"]
                        if f["id"] not in set(drop_faces)] + list(faces)
    return load_system(doc)


def system_to_dict(sys):
    """Raw JSON-style document for a system (inverse of load_system)."""
    def end_to_dict(e):
        if isinstance(e, MarkingEnd):
            return {"at": e.marking, "slot": e.slot}
        return {"at": e.point, "end": e.index}

    def entry_to_dict(e):
        if isinstance(e, SideEntry):
            return {"arc": e.arc}
        if isinstance(e, CornerEntry):
            return {"corner": {"marking": e.marking, "from": e.slot_from,
                               "to": e.slot_to}}
        if isinstance(e, SectorEntry):
            return {"point": e.point}
        return {"gap": e.label}

    return {
        "markings": [{"id": m.id, "slots": m.slots}
                     for m in sys.markings.values()],
        "orbifold_points": [
            {"id": p.id,
             "order": [{"arc": a, "end": e} for a, e in p.order],
             "indices": list(p.indices)}
            for p in sys.points.values()],
        "arcs": [{"id": a.id, "ends": [end_to_dict(e) for e in a.ends]}
                 for a in sys.arcs.values()],
        "objects": [{"id": o.id, "arc": o.arc,
                     "tagging": {p: t for p, t in o.tagging},
                     "shift": o.shift}
                    for o in sys.objects.values()],
        "faces": [{"id": f.id,
                   "loop": [entry_to_dict(e) for e in f.loop],
                   "unmarked_circles": f.unmarked_circles,
                   "interior_points": list(f.interior_points)}
                  for f in sys.faces.values()],
        "elementary_degrees": {k: list(v) for k, v in sys.elementary.items()},
        **({"involution": sys.extra["involution"]}
           if "involution" in sys.extra else {}),
    }


def fixture_path(name):
    """Resolve a fixture name against TAGGEDFUK_FIXTURES or ./fixtures."""
    base = os.environ.get("TAGGEDFUK_FIXTURES")
    if base is None:
        here = os.path.dirname(os.path.abspath(__file__))
        for cand in (os.path.join(os.getcwd(), "fixtures"),
                     os.path.normpath(os.path.join(here, "..", "..",
                                                   "fixtures"))):
            if os.path.isdir(cand):
                base = cand
                break
        else:
            base = "fixtures"
    if not name.endswith(".json"):
        name += ".json"
    return os.path.join(base, name)
