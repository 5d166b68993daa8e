"""Invariant category of a free-or-branched double with an involution.

A cover fixture is an ordinary arc system (no interior points) together
with an ``involution`` block naming the deck transformation: permutations
of markings, arcs and objects, plus the branch points.  Arcs fixed by the
involution are *special*; each passes through exactly one branch point
and projects to a half-arc hanging at an order-2 point downstairs.

Everything here works over the plain cover engine.  Matrix morphisms
between the doubled complexes span the invariant hom spaces, and the
quotient construction rebuilds the orbifold system that the comparison
report checks structure constants against.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from . import ainf
from . import homs
from . import model
from .ainf import ChainElement, Report, as_chain
from .homs import Boundary, Interior, Unit
from .twisted import (TwMorphism, TwistedComplex, twisted, tw_m_n,
                      tw_hom_basis, _cell_degree, _rref)


class NotInvolutive(Exception):
    """The involution block is inconsistent with the cover system."""


class TagMismatch(Exception):
    """A tag does not fit the arc kind at the corresponding end."""


class NotInvariant(Exception):
    """A computed matrix escapes the span of the doubled basis."""


TAGS = ("0", "+", "-")
_SIGN = {"+": 1, "-": -1}


@dataclass(frozen=True)
class FixedPoint:
    id: str
    arc: str | None = None
    face: str | None = None


@dataclass(frozen=True)
class InvolutiveSystem:
    """A cover system with its deck involution and representative choices.

    ``markings``, ``arcs`` and ``objects`` are the permutation maps.
    Representatives default to the lowest id of each orbit; preferred
    morphisms are the boundary morphisms living on representative
    markings.
    """

    system: model.ArcSystem
    markings: dict
    arcs: dict
    objects: dict
    fixed_points: tuple
    rep_markings: frozenset
    rep_arcs: frozenset
    rep_objects: frozenset
    _arc_point: dict = field(default_factory=dict)

    def iota_marking(self, mid):
        return self.markings[mid]

    def iota_arc(self, aid):
        return self.arcs[aid]

    def iota_object(self, oid):
        return self.objects[oid]

    def is_special(self, aid):
        return self.arcs.get(aid) == aid

    def special_point(self, aid):
        try:
            return self._arc_point[aid]
        except KeyError:
            raise NotInvolutive("arc %r has no branch point" % aid)

    def marking_rep(self, mid):
        return mid if mid in self.rep_markings else self.markings[mid]

    def arc_rep(self, aid):
        return aid if aid in self.rep_arcs else self.arcs[aid]

    def object_rep(self, oid):
        return oid if oid in self.rep_objects else self.objects[oid]

    def preferred(self, f):
        """Whether a boundary morphism lives on a representative marking."""
        if not isinstance(f, Boundary):
            raise NotInvolutive("%r is not a boundary morphism" % (f,))
        return f.marking in self.rep_markings


def _orbit_reps(perm, chosen=None):
    if chosen is not None:
        reps = frozenset(str(x) for x in chosen)
        for x in perm:
            if (x in reps) == (perm[x] in reps) and perm[x] != x:
                raise NotInvolutive(
                    "representative set picks %s orbit members %r, %r"
                    % ("both" if x in reps else "no", x, perm[x]))
        return reps
    return frozenset(x for x in perm if x <= perm[x])


def load_involutive(source, representatives=None):
    """Load a cover fixture and wrap its ``involution`` block.

    ``representatives`` may override the default lowest-id choices, as a
    mapping with any of the keys ``markings``, ``arcs``, ``objects``.
    """
    sys_ = source if isinstance(source, model.ArcSystem) \
        else model.load_system(source)
    block = sys_.extra.get("involution")
    if not isinstance(block, dict):
        raise NotInvolutive("fixture carries no involution block")
    markings = {str(k): str(v) for k, v in block.get("markings", {}).items()}
    arcs = {str(k): str(v) for k, v in block.get("arcs", {}).items()}
    objects = {str(k): str(v) for k, v in block.get("objects", {}).items()}
    fps = []
    for e in block.get("fixed_points", []):
        fps.append(FixedPoint(str(e["id"]),
                              str(e["arc"]) if "arc" in e else None,
                              str(e["face"]) if "face" in e else None))
    chosen = representatives or block.get("representatives") or {}
    reps_m = _orbit_reps(markings, chosen.get("markings"))
    reps_a = _orbit_reps(arcs, chosen.get("arcs"))
    if "objects" in chosen:
        reps_o = _orbit_reps(objects, chosen.get("objects"))
    else:
        # follow the arc choice where possible so Delta summand order
        # matches the arc representatives
        reps_o = frozenset(o for o, ob in sys_.objects.items()
                           if ob.arc in reps_a or objects.get(o) == o)
        if len(reps_o) * 2 - sum(1 for o in objects if objects[o] == o) \
                != len(objects):
            reps_o = _orbit_reps(objects)
    points = {fp.arc: fp.id for fp in fps if fp.arc is not None}
    return InvolutiveSystem(sys_, markings, arcs, objects, tuple(fps),
                            reps_m, reps_a, reps_o, points)


# --------------------------------------------------------------------------
# the involution on morphisms, chains, complexes and matrices


def iota_morphism(inv, f):
    if isinstance(f, Boundary):
        return Boundary(inv.markings[f.marking], f.slot_from, f.slot_to,
                        inv.objects[f.src], inv.objects[f.dst])
    if isinstance(f, Unit):
        return Unit(inv.objects[f.obj])
    raise NotInvolutive("interior morphisms do not occur on a cover")


def iota_chain(inv, el):
    out = ChainElement.zero()
    for f, c in as_chain(el).items():
        out = out + ChainElement.of(iota_morphism(inv, f), c)
    return out


def iota_complex(inv, C):
    entries = tuple((inv.objects[o], k) for o, k in C.entries)
    delta = {(i, j): iota_chain(inv, el) for i, j, el in C.delta}
    return twisted(inv.system, entries, delta)


def iota_matrix(inv, m):
    return TwMorphism(iota_complex(inv, m.src), iota_complex(inv, m.dst),
                      {key: iota_chain(inv, el)
                       for key, el in m.entries.items()})


# --------------------------------------------------------------------------
# validation


def _loop_signature(entry):
    if isinstance(entry, model.SideEntry):
        return ("side", entry.arc)
    if isinstance(entry, model.CornerEntry):
        return ("corner", entry.marking, entry.slot_from, entry.slot_to)
    if isinstance(entry, model.GapEntry):
        return ("gap",)
    return ("sector", entry.point)


def _iota_signature(inv, entry):
    sig = _loop_signature(entry)
    if sig[0] == "side":
        return ("side", inv.arcs[sig[1]])
    if sig[0] == "corner":
        return ("corner", inv.markings[sig[1]], sig[2], sig[3])
    return sig


def _match_rotation(target, loops):
    """Face id and rotation whose signature loop equals ``target``."""
    n = len(target)
    for fid, sig in loops.items():
        if len(sig) != n:
            continue
        for r in range(n):
            if all(sig[(r + k) % n] == target[k] for k in range(n)):
                return fid, r
    return None, None


def face_orbits(inv):
    """Pairs ``(fid, image_fid)`` of the induced face permutation.

    Raises when some face has no image; an invariant face maps to
    itself.
    """
    sys_ = inv.system
    loops = {fid: [_loop_signature(e) for e in f.loop]
             for fid, f in sys_.faces.items()}
    out = {}
    for fid, f in sorted(sys_.faces.items()):
        target = [_iota_signature(inv, e) for e in f.loop]
        gid, _r = _match_rotation(target, loops)
        if gid is None:
            raise NotInvolutive("face %r has no involution image" % fid)
        out[fid] = gid
    return out


def validate_involutive(inv):
    """Check the involution block against the cover system."""
    sys_ = inv.system
    report = Report()

    def check(ok, what):
        report.checked += 1
        report.entries.append(what)
        if not ok:
            report.violations.append(what)

    for name, perm, ids in (("markings", inv.markings, sys_.markings),
                            ("arcs", inv.arcs, sys_.arcs),
                            ("objects", inv.objects, sys_.objects)):
        check(set(perm) == set(ids) and set(perm.values()) == set(ids),
              "%s map is a permutation of the fixture ids" % name)
        check(all(perm.get(perm.get(x)) == x for x in ids),
              "%s map squares to the identity" % name)
    if report.violations:
        return report

    check(not sys_.points, "cover has no interior orbifold points")
    check(all(inv.markings[m] != m for m in sys_.markings),
          "no marking is fixed")
    check(all(sys_.markings[m].slots == sys_.markings[inv.markings[m]].slots
              for m in sys_.markings),
          "slot counts agree along marking orbits")
    check(all(sys_.elementary[m] == sys_.elementary[inv.markings[m]]
              for m in sys_.markings),
          "elementary degrees agree along marking orbits")

    for aid, arc in sorted(sys_.arcs.items()):
        image = sys_.arcs[inv.arcs[aid]]
        want = {(inv.markings[e.marking], e.slot) for e in arc.ends}
        got = {(e.marking, e.slot) for e in image.ends}
        check(want == got, "ends of %r map onto ends of %r"
              % (aid, inv.arcs[aid]))
        if inv.is_special(aid):
            (m0, s0), (m1, s1) = [(e.marking, e.slot) for e in arc.ends]
            check(inv.markings[m0] == m1 and s0 == s1,
                  "special arc %r joins swapped markings at equal slots"
                  % aid)

    for oid, ob in sorted(sys_.objects.items()):
        image = sys_.objects[inv.objects[oid]]
        check(image.arc == inv.arcs[ob.arc] and image.shift == ob.shift,
              "object %r maps compatibly with its arc and shift" % oid)
    per_arc = {}
    for oid, ob in sys_.objects.items():
        per_arc.setdefault(ob.arc, []).append(oid)
    check(all(len(v) == 1 for v in per_arc.values())
          and set(per_arc) == set(sys_.arcs),
          "every arc carries exactly one object")

    special = {a for a in sys_.arcs if inv.is_special(a)}
    on_arc = [fp for fp in inv.fixed_points if fp.arc is not None]
    check(len({fp.id for fp in inv.fixed_points}) == len(inv.fixed_points),
          "fixed point ids are distinct")
    check({fp.arc for fp in on_arc} == special
          and len(on_arc) == len(special),
          "special arcs and on-arc fixed points correspond one to one")
    check(len(special) <= len(inv.fixed_points),
          "at least as many fixed points as special arcs")

    try:
        orbits = face_orbits(inv)
    except NotInvolutive as exc:
        check(False, str(exc))
        return report
    check(all(orbits[orbits[f]] == f for f in orbits),
          "induced face map squares to the identity")
    invariant = {f for f in orbits if orbits[f] == f}
    in_face = {fp.face for fp in inv.fixed_points if fp.face is not None}
    check(invariant == in_face,
          "invariant faces are exactly those holding an interior "
          "fixed point")
    return report


def require_involutive(inv):
    report = validate_involutive(inv)
    if not report.ok:
        raise NotInvolutive("; ".join(report.violations))
    return inv


# --------------------------------------------------------------------------
# quotient construction


def _project_loop(inv, loop):
    out = []
    for e in loop:
        if isinstance(e, model.SideEntry):
            if inv.is_special(e.arc):
                out.extend([{"arc": e.arc},
                            {"point": inv.special_point(e.arc)},
                            {"arc": e.arc}])
            else:
                out.append({"arc": inv.arc_rep(e.arc)})
        elif isinstance(e, model.CornerEntry):
            out.append({"corner": {"marking": inv.marking_rep(e.marking),
                                   "from": e.slot_from, "to": e.slot_to}})
        elif isinstance(e, model.GapEntry):
            out.append({"gap": e.label})
        else:
            raise NotInvolutive("sector entry on a cover face")
    return out


def _half_window(inv, face, material):
    """Half of an invariant face loop, cut at a side entry.

    The deck map sends entry ``k`` to entry ``k + r`` for the rotation
    ``r`` realising the self-matching; the window covers one fundamental
    domain.  A special side inside the window projects to a spike.
    """
    loop = face.loop
    sig = [_loop_signature(e) for e in loop]
    target = [_iota_signature(inv, e) for e in loop]
    n = len(loop)
    rot = next(r for r in range(n)
               if all(sig[(r + k) % n] == target[k] for k in range(n)))
    if (2 * rot) % n != 0 or rot == 0:
        raise NotInvolutive("face %r matches itself at rotation %d of %d"
                            % (face.id, rot, n))
    starts = [k for k in range(n) if isinstance(loop[k], model.SideEntry)]
    if not starts:
        raise NotInvolutive("invariant face %r has no side to cut at"
                            % face.id)
    k0 = next((k for k in starts
               if inv.is_special(loop[k].arc)), starts[0])
    window = [loop[(k0 + k) % n] for k in range(rot)]
    if material and face.unmarked_circles:
        raise NotInvolutive("unmarked circles on an invariant face")
    return window


def quotient_object_name(inv, oid, tag):
    """Downstairs id of an orbit object, with ``tag`` in ``TAGS``."""
    rep = inv.object_rep(oid)
    return rep if tag == "0" else rep + tag


def quotient_system(inv):
    """The tagged orbifold system downstairs.

    Orbit representatives keep their ids.  A special arc becomes a
    half-arc hanging at its branch point, and its object becomes the
    tagged thick pair.  Swapped face pairs project to one face; an
    invariant face contributes half of its loop and records its interior
    branch point.
    """
    sys_ = inv.system
    doc = {"name": "quotient", "markings": [], "orbifold_points": [],
           "arcs": [], "objects": [], "faces": [], "elementary_degrees": {}}
    for mid in sorted(inv.rep_markings):
        doc["markings"].append({"id": mid,
                                "slots": sys_.markings[mid].slots})
        doc["elementary_degrees"][mid] = list(sys_.elementary[mid])
    for fp in inv.fixed_points:
        if fp.arc is not None:
            doc["orbifold_points"].append(
                {"id": fp.id,
                 "order": [{"arc": fp.arc, "end": 1},
                           {"arc": fp.arc, "end": 1}],
                 "indices": [1]})
        else:
            doc["orbifold_points"].append(
                {"id": fp.id, "order": [], "indices": []})
    for aid in sorted(inv.rep_arcs):
        arc = sys_.arcs[aid]
        if inv.is_special(aid):
            keep = next(e for e in arc.ends
                        if e.marking in inv.rep_markings)
            doc["arcs"].append(
                {"id": aid, "ends": [{"at": keep.marking, "slot": keep.slot},
                                     {"at": inv.special_point(aid)}]})
        else:
            doc["arcs"].append(
                {"id": aid,
                 "ends": [{"at": inv.marking_rep(e.marking), "slot": e.slot}
                          for e in arc.ends]})
    for oid in sorted(inv.rep_objects):
        ob = sys_.objects[oid]
        if inv.is_special(ob.arc):
            pt = inv.special_point(ob.arc)
            for tag, value in (("+", 0), ("-", 1)):
                doc["objects"].append(
                    {"id": quotient_object_name(inv, oid, tag),
                     "arc": ob.arc, "tagging": {pt: value},
                     "shift": ob.shift})
        else:
            doc["objects"].append({"id": oid, "arc": ob.arc, "tagging": {},
                                   "shift": ob.shift})
    orbits = face_orbits(inv)
    interior = {}
    for fp in inv.fixed_points:
        if fp.face is not None:
            interior.setdefault(fp.face, []).append(fp.id)
    seen = set()
    for fid in sorted(orbits):
        if fid in seen:
            continue
        gid = orbits[fid]
        seen.update({fid, gid})
        face = inv.system.faces[fid]
        if gid == fid:
            loop = _project_loop(inv, _half_window(inv, face, True))
            doc["faces"].append({"id": fid, "loop": loop,
                                 "interior_points": interior.get(fid, [])})
        else:
            doc["faces"].append(
                {"id": fid, "loop": _project_loop(inv, face.loop),
                 "unmarked_circles": face.unmarked_circles})
    out = model.load_system(doc)
    model.require_valid(out)
    return out


# --------------------------------------------------------------------------
# doubled objects and matrices


def _object_on(inv, aid):
    found = [oid for oid, ob in inv.system.objects.items() if ob.arc == aid]
    if len(found) != 1:
        raise NotInvolutive("arc %r carries %d objects, need exactly one"
                            % (aid, len(found)))
    return found[0]


def delta_complex(inv, oid):
    """The doubled twisted complex of an orbit: rep summand first."""
    rep = inv.object_rep(oid)
    ob = inv.system.objects[rep]
    return twisted(inv.system,
                   ((rep, ob.shift), (inv.objects[rep], ob.shift)), {})


def idempotent(inv, oid, sign):
    """The half-sum projector on the double of a special-arc object."""
    rep = inv.object_rep(oid)
    if not inv.is_special(inv.system.objects[rep].arc):
        raise TagMismatch("object %r does not sit on a special arc" % oid)
    s = _SIGN[sign]
    C = delta_complex(inv, rep)
    half = Fraction(1, 2)
    e = ChainElement.of(Unit(rep))
    return TwMorphism(C, C, {(0, 0): e.scaled(half),
                             (1, 1): e.scaled(half),
                             (0, 1): e.scaled(half * s),
                             (1, 0): e.scaled(half * s)})


def delta_identity(inv, oid, tag):
    """Unit of the doubled object: the identity matrix, or a projector."""
    if tag == "0":
        return TwMorphism.identity(delta_complex(inv, oid))
    return idempotent(inv, oid, tag)


def _require_tag(tag, is_special, end):
    if tag not in TAGS:
        raise TagMismatch("unknown tag %r" % (tag,))
    if (tag == "0") == is_special:
        raise TagMismatch("tag %r does not fit the %s %s end"
                          % (tag, "special" if is_special else "ordinary",
                             end))


def delta_morphism(inv, theta, a="0", b="0"):
    """Matrix of a boundary morphism between doubled objects.

    ``a`` and ``b`` tag the source and target ends: ``"0"`` for an
    ordinary arc, a sign for a special one.  The input may be either
    member of its orbit; entries are placed by which of the pair
    connects the summand objects, and coefficient grids are anchored at
    the preferred member, which lives on a representative marking.
    """
    if isinstance(theta, Interior):
        raise TagMismatch("interior morphisms do not occur on a cover")
    sys_ = inv.system
    sp_s = inv.is_special(sys_.objects[theta.src].arc)
    sp_d = inv.is_special(sys_.objects[theta.dst].arc)
    _require_tag(a, sp_s, "source")
    _require_tag(b, sp_d, "target")
    pref = theta if inv.preferred(theta) else iota_morphism(inv, theta)
    ipref = iota_morphism(inv, pref)
    X = delta_complex(inv, theta.src)
    Y = delta_complex(inv, theta.dst)

    def connecting(j, i):
        for u in (pref, ipref):
            if u.src == X.obj(j) and u.dst == Y.obj(i):
                return u
        return None

    entries = {}
    if sp_s and sp_d:
        s, t = _SIGN[a], _SIGN[b]
        quarter = Fraction(1, 4)
        for i in range(2):
            for j in range(2):
                el = ChainElement.of(pref, s * s ** j * t ** i * quarter) \
                    + ChainElement.of(ipref,
                                      s * s ** (1 - j) * t ** (1 - i)
                                      * quarter)
                entries[(i, j)] = el
    elif sp_d:
        t = _SIGN[b]
        j0 = 0 if pref.src == X.obj(0) else 1
        for i in range(2):
            for j in range(2):
                entries[(i, j)] = ChainElement.of(
                    connecting(j, i), t ** (i + j - j0) * Fraction(1, 2))
    elif sp_s:
        s = _SIGN[a]
        i0 = 0 if pref.dst == Y.obj(0) else 1
        for i in range(2):
            for j in range(2):
                entries[(i, j)] = ChainElement.of(
                    connecting(j, i), s * s ** (i - i0 + j) * Fraction(1, 2))
    else:
        for i in range(2):
            for j in range(2):
                u = connecting(j, i)
                if u is not None:
                    entries[(i, j)] = ChainElement.of(u)
    return TwMorphism(X, Y, entries)


def delta_conjugate(inv, m):
    """The deck action on a matrix between doubled objects.

    Both complexes are two-summand doubles without connecting maps, so
    the action is the entrywise involution composed with the summand
    swap on each side; no shift signs arise.
    """
    entries = {}
    for (i, j), el in m.entries.items():
        entries[(1 - i, 1 - j)] = iota_chain(inv, el)
    return TwMorphism(m.src, m.dst, entries)


# --------------------------------------------------------------------------
# invariant operations and the span check


def _matrix_vector(m, index):
    vec = [Fraction(0)] * len(index)
    for (i, j), el in m.entries.items():
        for f, c in el.terms.items():
            vec[index[(i, j, f)]] += c
    return vec


def _span_residual(vectors, target):
    if not vectors:
        return any(target)
    rows, pivots = _rref(vectors)
    out = list(target)
    for row, col in zip(rows, pivots):
        if out[col]:
            c = out[col]
            out = [x - c * y for x, y in zip(out, row)]
    return any(out)


def _delta_candidates(inv, X, Y):
    """All doubled basis matrices between two doubled complexes."""
    sys_ = inv.system
    out = []
    sp_s = inv.is_special(sys_.objects[X.obj(0)].arc)
    sp_d = inv.is_special(sys_.objects[Y.obj(0)].arc)
    a_tags = ("+", "-") if sp_s else ("0",)
    b_tags = ("+", "-") if sp_d else ("0",)
    seen = set()
    for j in range(X.size):
        for i in range(Y.size):
            for f in homs.hom_basis(sys_, X.obj(j), Y.obj(i),
                                    include_unit=False):
                pref = f if inv.preferred(f) else iota_morphism(inv, f)
                if pref in seen:
                    continue
                seen.add(pref)
                for a in a_tags:
                    for b in b_tags:
                        out.append(delta_morphism(inv, pref, a, b))
    if X.entries == Y.entries:
        for a in a_tags:
            out.append(delta_identity(inv, X.obj(0), a))
    return out


def invariant_m_n(inv, ms):
    """Total operation on doubled matrices, kept inside the doubled span.

    Evaluates the cover operation entrywise and asserts the result is a
    combination of doubled basis matrices and projectors; anything else
    signals a convention error.
    """
    ms = list(ms)
    out = tw_m_n(inv.system, ms)
    X, Y = ms[0].src, ms[-1].dst
    cells = tw_hom_basis(inv.system, X, Y)
    index = {cell: n for n, cell in enumerate(cells)}
    vectors = [_matrix_vector(c, index) for c in _delta_candidates(inv, X, Y)]
    if _span_residual(vectors, _matrix_vector(out, index)):
        raise NotInvariant("operation result %r escapes the doubled span"
                           % out)
    return out


# --------------------------------------------------------------------------
# comparison with the quotient


def quotient_object_map(inv):
    """Downstairs object id -> (cover object, tag)."""
    out = {}
    for oid in inv.rep_objects:
        if inv.is_special(inv.system.objects[oid].arc):
            for tag in ("+", "-"):
                out[quotient_object_name(inv, oid, tag)] = (oid, tag)
        else:
            out[oid] = (oid, "0")
    return out


def lift_morphism(inv, down, f):
    """Preferred cover lift of a downstairs basis morphism, with tags."""
    names = quotient_object_map(inv)
    if isinstance(f, Unit):
        oid, tag = names[f.obj]
        return Unit(oid), tag, tag
    if isinstance(f, Interior):
        raise NotInvolutive("quotient of a cover has no interior morphisms")
    src, stag = names[f.src]
    dst, dtag = names[f.dst]
    cover_src = _object_on(inv, inv.system.arc_at_slot(f.marking,
                                                       f.slot_from))
    cover_dst = _object_on(inv, inv.system.arc_at_slot(f.marking,
                                                       f.slot_to))
    if {cover_src, inv.objects[cover_src]} != {src, inv.objects[src]} or \
            {cover_dst, inv.objects[cover_dst]} != {dst, inv.objects[dst]}:
        raise NotInvolutive("downstairs morphism %r does not lift at %r"
                            % (f, f.marking))
    return Boundary(f.marking, f.slot_from, f.slot_to,
                    cover_src, cover_dst), stag, dtag


def lift_matrix(inv, down, f):
    """Doubled matrix of a downstairs basis morphism or unit."""
    lifted, a, b = lift_morphism(inv, down, f)
    if isinstance(lifted, Unit):
        return delta_identity(inv, lifted.obj, a)
    return delta_morphism(inv, lifted, a, b)


def lift_chain(inv, down, el, src_obj, dst_obj):
    """Doubled matrix of a downstairs chain element.

    ``src_obj`` and ``dst_obj`` name downstairs objects pinning the
    matrix spaces when the element is zero.
    """
    names = quotient_object_map(inv)
    el = as_chain(el)
    X = delta_complex(inv, names[src_obj][0])
    Y = delta_complex(inv, names[dst_obj][0])
    out = TwMorphism(X, Y)
    for f, c in el.items():
        out = out + lift_matrix(inv, down, f).scaled(c)
    return out


def _hom_dims(sys_, pairs):
    dims = {}
    for f in pairs:
        dims[homs.degree(sys_, f)] = dims.get(homs.degree(sys_, f), 0) + 1
    return dims


def _invariant_dims(inv, X, Y, p, q):
    """Graded dimensions of the compressed invariant matrix space."""
    sys_ = inv.system
    cells = tw_hom_basis(sys_, X, Y)
    index = {cell: n for n, cell in enumerate(cells)}
    by_degree = {}
    for cell in cells:
        by_degree.setdefault(_cell_degree(sys_, X, Y, cell), []).append(cell)
    dims = {}
    for g, group in sorted(by_degree.items()):
        kept = []
        for cell in group:
            i, j, f = cell
            m = TwMorphism(X, Y, {(i, j): ChainElement.of(f)})
            m = m + delta_conjugate(inv, m)
            cm = tw_m_n(sys_, (p, tw_m_n(sys_, (m, q))))
            if not cm.is_zero():
                kept.append(_matrix_vector(cm, index))
        if kept:
            rows, _pivots = _rref(kept)
            if rows:
                dims[g] = len(rows)
    return dims


def compare_with_quotient(inv, max_arity=4):
    """Check the structure constants of the double against the quotient.

    Builds the quotient, matches hom-space dimensions object pair by
    object pair, then evaluates every supported downstairs tuple up to
    ``max_arity`` both ways: once with the downstairs operations, once
    with the cover operation on doubled matrices.  Returns a report
    whose violations list any disagreement.
    """
    require_involutive(inv)
    sys_ = inv.system
    down = quotient_system(inv)
    report = Report()
    names = quotient_object_map(inv)

    def idem(qoid):
        oid, tag = names[qoid]
        return delta_identity(inv, oid, tag)

    for src in sorted(names):
        for dst in sorted(names):
            basis = homs.hom_basis(down, src, dst, include_unit=False)
            want = _hom_dims(down, basis)
            oid_s, tag_s = names[src]
            oid_d, tag_d = names[dst]
            X = delta_complex(inv, oid_s)
            Y = delta_complex(inv, oid_d)
            got = _invariant_dims(inv, X, Y, idem(src), idem(dst))
            if src == dst:
                got[0] = got.get(0, 0) - 1  # drop the unit class
                if not got[0]:
                    del got[0]
            report.checked += 1
            if want != got:
                report.violations.append(
                    "hom dims %s -> %s: downstairs %r, invariant %r"
                    % (src, dst, want, got))
    report.entries.append("hom dimensions over %d object pairs"
                          % len(names) ** 2)

    def tuples_to_check():
        by_src = {}
        all_basis = list(homs.all_basic_morphisms(down))
        for f in all_basis:
            by_src.setdefault(f.src, []).append(f)
        for f in all_basis:
            yield (Unit(f.src), f)
            yield (f, Unit(f.dst))
            for g in by_src.get(f.dst, ()):
                yield (f, g)
        discs, comps = ainf.extract_sequences(down, max_arity)
        seen = set()
        for d in discs:
            if len(d.corners) <= max_arity and d.corners not in seen:
                seen.add(d.corners)
                yield d.corners
        for c in comps:
            for k in range(len(c.corners)):
                t = c.corners[:k] + (c.value,) + c.corners[k:]
                if len(t) <= max_arity and t not in seen:
                    seen.add(t)
                    yield t

    mismatches = 0
    for corners in tuples_to_check():
        value = ainf.m_n(down, corners)
        rhs = lift_chain(inv, down, value,
                         corners[0].src, corners[-1].dst)
        lhs = tw_m_n(sys_, [lift_matrix(inv, down, f) for f in corners])
        report.checked += 1
        if lhs != rhs:
            mismatches += 1
            report.violations.append(
                "tuple (%s): doubled %r, downstairs %r"
                % (", ".join(f.serialize() for f in corners), lhs, rhs))
    report.entries.append("structure constants on supported tuples "
                          "up to arity %d" % max_arity)
    if mismatches:
        report.entries.append("%d mismatching tuples" % mismatches)
    return report


# --------------------------------------------------------------------------
# the branch-point loop scenario


def branch_loop_scenario(inv, theta, shift=0):
    """Twisted-complex data for a loop through a branch point.

    ``theta`` is a degree-1 boundary morphism from a special-arc object
    to an ordinary one.  The loop object is the cone-like complex on
    ``theta`` and its deck image, shifted by ``shift``; together with
    the doubled loop, the doubled special object, their projectors and
    the deck action on matrices, it exhibits hom spaces whose parity
    depends on ``shift`` and the projector signs.
    """
    sys_ = inv.system
    if homs.degree(sys_, theta) != 1:
        raise TagMismatch("loop construction needs a degree-1 morphism")
    A, B = theta.src, theta.dst
    if not inv.is_special(sys_.objects[A].arc) \
            or inv.is_special(sys_.objects[B].arc):
        raise TagMismatch("need special source and ordinary target")
    iB = inv.objects[B]
    th = ChainElement.of(theta)
    ith = ChainElement.of(iota_morphism(inv, theta))
    d = shift
    gamma = twisted(sys_, ((A, d), (B, d), (iB, d)),
                    {(1, 0): th, (2, 0): ith})
    igamma = twisted(sys_, ((A, d), (iB, d), (B, d)),
                     {(1, 0): ith, (2, 0): th})
    dgamma = twisted(sys_, gamma.entries + igamma.entries,
                     {(1, 0): th, (2, 0): ith, (4, 3): ith, (5, 3): th})
    dalpha = delta_complex(inv, A)
    alpha = TwistedComplex.single(A, 0)

    e = {oid: ChainElement.of(Unit(oid)) for oid in (A, B, iB)}
    epsilon = TwMorphism(gamma, igamma,
                         {(0, 0): e[A], (1, 2): e[iB], (2, 1): e[B]})
    epsilon_back = TwMorphism(igamma, gamma,
                              {(0, 0): e[A], (1, 2): e[B], (2, 1): e[iB]})
    phi = TwMorphism(gamma, alpha, {(0, 0): e[A]})
    phibar = TwMorphism(alpha, gamma, {(1, 0): th, (2, 0): ith.scaled(-1)})

    half = Fraction(1, 2)

    def loop_projector(sign):
        s = _SIGN[sign]
        entries = {(i, i): e[dgamma.obj(i)].scaled(half) for i in range(6)}
        for i, j in ((3, 0), (4, 2), (5, 1), (0, 3), (2, 4), (1, 5)):
            entries[(i, j)] = e[dgamma.obj(i)].scaled(half * s)
        return TwMorphism(dgamma, dgamma, entries)

    swap6 = {(i, j): e[dgamma.obj(i)]
             for i, j in ((3, 0), (4, 1), (5, 2), (0, 3), (1, 4), (2, 5))}
    swap2 = {(0, 1): e[A], (1, 0): e[A]}

    def act_from_loop(m):
        """Deck action on matrices from the doubled loop to the double."""
        acted = iota_matrix(inv, m)
        left = TwMorphism(dgamma, acted.src, swap6)
        right = TwMorphism(acted.dst, dalpha, swap2)
        return tw_m_n(sys_, (tw_m_n(sys_, (left, acted)), right))

    def act_to_loop(m):
        acted = iota_matrix(inv, m)
        left = TwMorphism(dalpha, acted.src, swap2)
        right = TwMorphism(acted.dst, dgamma, swap6)
        return tw_m_n(sys_, (tw_m_n(sys_, (left, acted)), right))

    return {"loop": gamma, "deck_loop": igamma, "double_loop": dgamma,
            "double_special": dalpha, "special": alpha,
            "identify": epsilon, "identify_back": epsilon_back,
            "hom_out": phi, "hom_in": phibar,
            "loop_projector": loop_projector,
            "special_projector": lambda sign: idempotent(inv, A, sign),
            "act_from_loop": act_from_loop, "act_to_loop": act_to_loop}
