r"""The A-infinity operations of a tagged arc system.

Four families feed the total operation: concatenation of two wedges at a
shared marking or point, disc faces (all rotations, with one-step
extensions at either end), composition faces (whose value is the interior
morphism granted against the traversal at the face's orbifold corner), and
the arity-3 exchange through a thick pair.  Coefficients are exact
rationals, always of the form +-(1/2)^k.

Face traversals seed the sequence sets; a face carrying a thick arc
contributes one seed per choice of partner on each pass.  The seeds are
then closed under end-to-end gluing, because a polygon may straddle
several faces (two triangles joined across a shared arc bound a square)
or run twice around a doubled point (a wedge-shaped face whose fold
corners concatenate glues to itself).  Gluing can lengthen sequences
without bound on some surfaces, so the closure is truncated at a corner
count no operation of the requested arity can see past.

The two verifiers at the bottom check the Stasheff identities (with a
brute-force unpruned mode as an independent oracle) and the additivity of
weights and signs under gluing of two extracted sequences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import homs
from .homs import Boundary, Interior, NotComposable, Unit
from .model import CornerEntry, GapEntry, SectorEntry, SideEntry, classify_face


class ThickPartnerMissing(Exception):
    """A thick-exchange pattern matched at a doubled point whose arc does
    not carry both partner objects: the system is inconsistent."""


# --------------------------------------------------------------------------
# chain elements


class ChainElement:
    """A formal rational combination of basis morphisms (units included)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        for m, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                self.terms[m] = c

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def of(cls, morphism, coeff=1):
        return cls({morphism: Fraction(coeff)})

    def is_zero(self):
        return not self.terms

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].serialize())

    @property
    def src(self):
        objs = {m.src for m in self.terms}
        return objs.pop() if len(objs) == 1 else None

    @property
    def dst(self):
        objs = {m.dst for m in self.terms}
        return objs.pop() if len(objs) == 1 else None

    def scaled(self, c):
        c = Fraction(c)
        return ChainElement({m: v * c for m, v in self.terms.items()})

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return ChainElement(out)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def __eq__(self, other):
        if isinstance(other, ChainElement):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join("%s*%s" % (c, m.serialize())
                          for m, c in self.items())


def as_chain(x):
    if isinstance(x, ChainElement):
        return x
    return ChainElement.of(x)


# --------------------------------------------------------------------------
# sequences


@dataclass(frozen=True)
class DiscSequence:
    """Cyclic corner tuple bounding a polygon.  ``face`` names the seeding
    face and is None for a sequence produced by gluing."""

    face: str | None
    corners: tuple
    phi: int
    sigma: int


@dataclass(frozen=True)
class CompositionSequence:
    face: str | None
    corners: tuple
    value: Interior
    phi: int
    sigma: int


def _indicator(f):
    return 1 if isinstance(f, Interior) else 0


def disc_phi(sys, corners):
    """Weight of a cyclic corner tuple: interior corners plus boundary
    folds."""
    n = len(corners)
    total = 0
    for i, f in enumerate(corners):
        g = corners[(i + 1) % n]
        ind = _indicator(f)
        total += ind + (1 - ind) * homs.fold_indicator(sys, f, g)
    return total


def disc_sigma(sys, corners):
    n = len(corners)
    total = 0
    for i, f in enumerate(corners):
        g = corners[(i + 1) % n]
        total += homs.source_sign(sys, f) * (1 - homs.fold_indicator(sys, f, g))
    return total % 2


def _split_off_tail(sys, whole, head):
    """The morphism t with head . t == whole, or None."""
    if type(whole) is not type(head) or whole.src != head.src:
        return None
    if isinstance(whole, Boundary):
        if whole.marking != head.marking or whole.slot_from != head.slot_from:
            return None
        if not head.slot_to < whole.slot_to:
            return None
        tail = Boundary(whole.marking, head.slot_to, whole.slot_to,
                        head.dst, whole.dst)
    elif isinstance(whole, Interior):
        if whole.point != head.point or whole.pos_from != head.pos_from:
            return None
        if not head.pos_to < whole.pos_to:
            return None
        tail = Interior(whole.point, head.pos_to, whole.pos_to,
                        head.dst, whole.dst)
    else:
        return None
    return tail if _is_basic(sys, tail) else None


def _split_off_head(sys, whole, tail):
    """The morphism h with h . tail == whole, or None."""
    if type(whole) is not type(tail) or whole.dst != tail.dst:
        return None
    if isinstance(whole, Boundary):
        if whole.marking != tail.marking or whole.slot_to != tail.slot_to:
            return None
        if not whole.slot_from < tail.slot_from:
            return None
        head = Boundary(whole.marking, whole.slot_from, tail.slot_from,
                        whole.src, tail.src)
    elif isinstance(whole, Interior):
        if whole.point != tail.point or whole.pos_to != tail.pos_to:
            return None
        if not whole.pos_from < tail.pos_from:
            return None
        head = Interior(whole.point, whole.pos_from, tail.pos_from,
                        whole.src, tail.src)
    else:
        return None
    return head if _is_basic(sys, head) else None


def _is_basic(sys, f):
    """Whether a structurally well-formed wedge is an actual morphism."""
    src = sys.objects[f.src]
    dst = sys.objects[f.dst]
    if src.arc == dst.arc and f.src != f.dst:
        return False  # partners have zero hom
    if isinstance(f, Boundary):
        return (sys.arc_at_slot(f.marking, f.slot_from) == src.arc
                and sys.arc_at_slot(f.marking, f.slot_to) == dst.arc)
    return sys.granted(f.point, f.pos_from, f.pos_to)


def _folded_value_first(sys, value, first):
    """Bracket and sign for the pair (value, first corner), which is read
    through the decomposition value = first . tail when the face folds at
    its starting corner; zero otherwise."""
    tail = _split_off_tail(sys, value, first) \
        if isinstance(first, Interior) else None
    if tail is None:
        return 0, 0
    return (homs.fold_indicator(sys, first, tail),
            homs.fold_sign(sys, first, tail))


def _folded_last_value(sys, last, value):
    """Bracket and sign for (last corner, value) via value = head . last."""
    head = _split_off_head(sys, value, last) \
        if isinstance(last, Interior) else None
    if head is None:
        return 0, 0
    return (homs.fold_indicator(sys, head, last),
            homs.fold_sign(sys, head, last))


def comp_phi(sys, corners, value):
    n = len(corners)
    total = sum(_indicator(f) for f in corners[1:n - 1])
    for i in range(n - 1):
        f, g = corners[i], corners[i + 1]
        total += (1 - _indicator(f)) * homs.fold_indicator(sys, f, g)
    return total


def comp_sigma(sys, corners, value):
    _, s_first = _folded_value_first(sys, value, corners[0])
    _, s_last = _folded_last_value(sys, corners[-1], value)
    total = s_first + s_last - homs.source_sign(sys, corners[0])
    for i in range(len(corners) - 1):
        f, g = corners[i], corners[i + 1]
        total += homs.source_sign(sys, f) * (1 - homs.fold_indicator(sys, f, g))
    return total % 2


# --------------------------------------------------------------------------
# extraction


def _loop_alternates(loop):
    n = len(loop)
    if n == 0 or n % 2:
        return False
    sides = [isinstance(e, SideEntry) for e in loop]
    return (all(sides[::2]) and not any(sides[1::2])) or \
           (all(sides[1::2]) and not any(sides[::2]))


def _face_joints(sys, face):
    """Cyclic (transition, prev_arc, next_arc) triples, or None.

    The loop must alternate sides and transitions; a fold (a sector whose
    two flanks are the same arc) is dropped here and merges its flanks into
    a single pass later.
    """
    loop = list(face.loop)
    if not _loop_alternates(loop):
        return None
    if not isinstance(loop[0], SideEntry):
        loop = loop[1:] + loop[:1]
    sides = loop[::2]
    trans = loop[1::2]
    k = len(trans)
    return [(trans[i], sides[i].arc, sides[(i + 1) % k].arc)
            for i in range(k)]


def _passes(sys, joints):
    """Group sides into passes by dropping folds.

    Returns (pass_arcs, pass_joints) where pass_joints[i] is the
    transition from pass i to pass i+1 (cyclically), or None when the face
    is a single pass folded at both ends.
    """
    arcs = []
    trans = []
    for t, a, b in joints:
        if isinstance(t, SectorEntry) and a == b:
            continue
        arcs.append(a)
        trans.append(t)
    if not trans:
        return None
    # trans[i] leads from the pass on arcs[i] to the pass on arcs[i+1]
    return arcs, trans


def _sector_morphism(sys, point, u, v):
    """Forward morphism u -> v at the point, else the granted reverse as a
    backward value, else None.  Returns (morphism, is_backward)."""
    xs = sys.point_positions(point)
    if u not in xs or v not in xs:
        return None
    pu, pv = xs.index(u), xs.index(v)
    if pu < pv and sys.granted(point, pu, pv):
        return Interior(point, pu, pv, u, v), False
    if pv < pu and sys.granted(point, pv, pu):
        return Interior(point, pv, pu, v, u), True
    return None


def _corner_morphism(sys, corner, u, v):
    """Boundary morphism across a corner from object u's arc to v's arc.

    Returns (morphism, is_backward) or None when the flanks do not fit.
    """
    a = sys.arc_at_slot(corner.marking, corner.slot_from)
    b = sys.arc_at_slot(corner.marking, corner.slot_to)
    ua, va = sys.objects[u].arc, sys.objects[v].arc
    if (ua, va) == (a, b):
        return Boundary(corner.marking, corner.slot_from, corner.slot_to,
                        u, v), False
    if (ua, va) == (b, a):
        return Boundary(corner.marking, corner.slot_from, corner.slot_to,
                        v, u), True
    return None


def default_sequence_cap(sys):
    """Two more corners than the longest face has sides.

    A Stasheff check of arity up to this bound exercises every face
    sequence both as an inner and as an outer input; it is also the
    closure cutoff when no explicit bound is given.
    """
    sides = [sum(1 for e in f.loop if isinstance(e, SideEntry))
             for f in sys.faces.values()]
    return max(sides, default=0) + 2


def extract_sequences(sys, max_len=None):
    r"""Disc sequences (every rotation) and composition sequences with at
    most ``max_len`` corners.

    Face traversals seed the sets.  Only faces without fullness features
    are read; a face whose single feature is a gap run, an unmarked
    circle, an enclosed point or an outward sector bounds no sequence.
    On a thick arc each pass branches over the two partners; assignments
    whose transition morphisms do not all exist are dropped.

    The seeds are then closed under gluing: two discs merge across a pair
    of concatenable junction corners, a composition caps a disc through
    its value corner, and a disc or composition is absorbed into a
    composition at a middle corner or, splitting the value, at the first
    or last one.  A sequence never needs a longer one to be derived, so
    cutting the closure off at ``max_len`` (by default two past the
    longest face) loses nothing below the cutoff.
    """
    need = default_sequence_cap(sys) if max_len is None else max_len
    discs, comps = _sequence_state(sys, need)
    return ([d for d in discs if len(d.corners) <= need],
            [c for c in comps if len(c.corners) <= need])


def _sequence_state(sys, need):
    state = getattr(sys, "_sequence_cache", None)
    if state is None or state[0] < need:
        cap = max(need, default_sequence_cap(sys))
        discs, comps = _face_sequences(sys)
        _merge_closure(sys, discs, comps, cap)
        state = (cap,
                 sorted(discs.values(),
                        key=lambda d: [c.serialize() for c in d.corners]),
                 sorted(comps.values(),
                        key=lambda c: [x.serialize() for x in c.corners]))
        sys._sequence_cache = state
        sys._disc_table = None
        sys._comp_table = None
    return state[1], state[2]


def _face_sequences(sys):
    discs = {}
    comps = {}
    for face in sys.faces.values():
        count, _roles = classify_face(sys, face)
        if count:
            continue
        joints = _face_joints(sys, face)
        if joints is None:
            continue
        grouped = _passes(sys, joints)
        if grouped is None:
            continue
        arcs, trans = grouped
        k = len(arcs)
        if k < 2:
            continue
        choice_sets = [sorted(sys.objects_on(a), key=lambda o: o.id)
                       for a in arcs]
        if any(not cs for cs in choice_sets):
            continue
        for combo in itertools.product(*choice_sets):
            objs = [o.id for o in combo]
            for objs_dir, trans_dir in (
                    (objs, trans),
                    (objs[::-1], [trans[(k - 2 - i) % k] for i in range(k)])):
                seq = _read_assignment(sys, objs_dir, trans_dir)
                if seq is None:
                    continue
                corners, backward = seq
                if backward is None:
                    for r in range(len(corners)):
                        rot = tuple(corners[r:] + corners[:r])
                        discs[rot] = DiscSequence(
                            face.id, rot,
                            disc_phi(sys, rot), disc_sigma(sys, rot))
                else:
                    tup = tuple(corners)
                    if len(tup) >= 2:
                        comps[(tup, backward)] = CompositionSequence(
                            face.id, tup, backward,
                            comp_phi(sys, tup, backward),
                            comp_sigma(sys, tup, backward))
    return discs, comps


def _merge_closure(sys, discs, comps, cap):
    """Close the seed sets under gluing, in place, up to ``cap`` corners.

    Every glued corner must itself be a basis morphism, and a glue across
    a value needs both junction pairs concatenable even when only one is
    fused (the other survives as a fold).  Weights and signs of glued
    sequences are recomputed from their corner tuples; the additivity
    checker confirms they differ from the pieces' sums by the expected
    corrections.
    """

    def add_disc(corners):
        if len(corners) > cap or corners in discs:
            return False
        for r in range(len(corners)):
            rot = corners[r:] + corners[:r]
            discs[rot] = DiscSequence(None, rot, disc_phi(sys, rot),
                                      disc_sigma(sys, rot))
        return True

    def add_comp(corners, value):
        key = (corners, value)
        if len(corners) > cap or len(corners) < 2 or key in comps:
            return False
        comps[key] = CompositionSequence(None, corners, value,
                                         comp_phi(sys, corners, value),
                                         comp_sigma(sys, corners, value))
        return True

    def fuse(f, g):
        if not homs.concatenable(sys, f, g):
            return None
        out = homs.concatenate(sys, f, g)
        return out if _is_basic(sys, out) else None

    changed = True
    while changed:
        changed = False
        disc_list = list(discs.values())
        comp_list = list(comps.values())

        for d1 in disc_list:
            a = d1.corners
            for d2 in disc_list:
                b = d2.corners
                if len(a) + len(b) - 2 > cap:
                    continue
                f_head = fuse(b[-1], a[0])
                f_join = fuse(a[-1], b[0])
                if f_head is None or f_join is None:
                    continue
                changed |= add_disc(
                    (f_head,) + a[1:-1] + (f_join,) + b[1:-1])

        for c in comp_list:
            phi_ = c.corners
            for d in disc_list:
                psi_ = d.corners
                # cap: the disc consumes the value, one junction fuses
                if psi_[-1] == c.value and len(psi_) >= 2:
                    trimmed = psi_[:-1]
                    if _con(sys, phi_[-1], trimmed[0]) \
                            and _con(sys, trimmed[-1], phi_[0]):
                        f = fuse(phi_[-1], trimmed[0])
                        if f is not None:
                            changed |= add_disc(
                                phi_[:-1] + (f,) + trimmed[1:])
                        f = fuse(trimmed[-1], phi_[0])
                        if f is not None:
                            changed |= add_disc(
                                trimmed[:-1] + (f,) + phi_[1:])
                # absorbed between two corners
                for k in range(len(phi_) - 1):
                    f_in = fuse(phi_[k], psi_[0])
                    f_out = fuse(psi_[-1], phi_[k + 1])
                    if f_in is None or f_out is None:
                        continue
                    changed |= add_comp(
                        phi_[:k] + (f_in,) + psi_[1:-1] + (f_out,)
                        + phi_[k + 2:], c.value)
                # absorbed at the first corner, splitting the value
                if len(psi_) >= 2:
                    rest = _split_off_tail(sys, c.value, psi_[0])
                    if rest is not None:
                        f = fuse(psi_[-1], phi_[0])
                        if f is not None:
                            changed |= add_comp(
                                psi_[1:-1] + (f,) + phi_[1:], rest)
                    rest = _split_off_head(sys, c.value, psi_[-1])
                    if rest is not None:
                        f = fuse(phi_[-1], psi_[0])
                        if f is not None:
                            changed |= add_comp(
                                phi_[:-1] + (f,) + psi_[1:-1], rest)

        for c1 in comp_list:
            phi_ = c1.corners
            m = len(phi_)
            for c2 in comp_list:
                psi_ = c2.corners
                # at a middle corner both junctions must concatenate but
                # only one fuses; the other survives as a fold
                for k in range(1, m - 1):
                    if phi_[k] != c2.value:
                        continue
                    if not (_con(sys, phi_[k - 1], psi_[0])
                            and _con(sys, psi_[-1], phi_[k + 1])):
                        continue
                    f = fuse(phi_[k - 1], psi_[0])
                    if f is not None:
                        changed |= add_comp(
                            phi_[:k - 1] + (f,) + psi_[1:] + phi_[k + 1:],
                            c1.value)
                    f = fuse(psi_[-1], phi_[k + 1])
                    if f is not None:
                        changed |= add_comp(
                            phi_[:k] + psi_[:-1] + (f,) + phi_[k + 2:],
                            c1.value)
                # at the end corners the unfused variant (value split off,
                # junction kept as a fold) certifies the fused one
                if m >= 2 and phi_[-1] == c2.value:
                    rest = _split_off_head(sys, c1.value, psi_[-1])
                    if rest is not None \
                            and (phi_[:-1] + psi_[:-1], rest) in comps:
                        f = fuse(phi_[-2], psi_[0])
                        if f is not None:
                            changed |= add_comp(
                                phi_[:-2] + (f,) + psi_[1:], c1.value)
                if m >= 2 and phi_[0] == c2.value:
                    rest = _split_off_tail(sys, c1.value, psi_[0])
                    if rest is not None \
                            and (psi_[1:] + phi_[1:], rest) in comps:
                        f = fuse(psi_[-1], phi_[1])
                        if f is not None:
                            changed |= add_comp(
                                psi_[:-1] + (f,) + phi_[2:], c1.value)


def _read_assignment(sys, objs, trans):
    """Corner morphisms of one object assignment in one traversal direction.

    Returns (corners_starting_after_backward, value_or_None); None when
    some transition admits no morphism or more than one runs backward.
    """
    k = len(objs)
    morphisms = []
    backs = []
    for i, t in enumerate(trans):
        u, v = objs[i], objs[(i + 1) % k]
        if isinstance(t, CornerEntry):
            got = _corner_morphism(sys, t, u, v)
            if got is None:
                return None
            m, bwd = got
            if bwd:
                return None  # a backward boundary corner bounds nothing
        elif isinstance(t, SectorEntry):
            got = _sector_morphism(sys, t.point, u, v)
            if got is None:
                return None
            m, bwd = got
        else:
            return None
        morphisms.append(m)
        if bwd:
            backs.append(i)
    if not backs:
        return morphisms, None
    if len(backs) > 1:
        return None
    b = backs[0]
    value = morphisms[b]
    corners = [morphisms[(b + 1 + j) % k] for j in range(k - 1)]
    return corners, value


# --------------------------------------------------------------------------
# the four operation families


def m2_con(sys, f, g):
    """Concatenation product, including the strict unit rules."""
    if isinstance(f, Unit):
        if f.dst != g.src:
            return ChainElement.zero()
        return ChainElement.of(g)
    if isinstance(g, Unit):
        if f.dst != g.src:
            return ChainElement.zero()
        return ChainElement.of(f, (-1) ** homs.degree(sys, f))
    if not homs.concatenable(sys, f, g):
        return ChainElement.zero()
    sign = (-1) ** (homs.degree(sys, f) + homs.fold_sign(sys, f, g))
    weight = Fraction(1, 2) ** homs.fold_indicator(sys, f, g)
    out = homs.concatenate(sys, f, g)
    if not _is_basic(sys, out):
        return ChainElement.zero()
    return ChainElement.of(out, sign * weight)


def _discs_by_length(sys, length):
    discs, _ = _sequence_state(sys, length)
    table = getattr(sys, "_disc_table", None)
    if table is None:
        table = {}
        for d in discs:
            table.setdefault(len(d.corners), []).append(d)
        sys._disc_table = table
    return table.get(length, ())


def _comps_by_length(sys, length):
    _, comps = _sequence_state(sys, length)
    table = getattr(sys, "_comp_table", None)
    if table is None:
        table = {}
        for c in comps:
            table.setdefault(len(c.corners), []).append(c)
        sys._comp_table = table
    return table.get(length, ())


def m_disc(sys, corners):
    """Disc contribution: exact tuples and one-step extensions at either
    end, summed over every matching extracted rotation."""
    corners = tuple(corners)
    n = len(corners)
    if n < 2 or any(isinstance(c, Unit) for c in corners):
        return ChainElement.zero()
    total = ChainElement.zero()
    for d in _discs_by_length(sys, n):
        seq = d.corners
        if corners == seq:
            br = homs.fold_indicator(sys, seq[-1], seq[0])
            coeff = Fraction((-1) ** d.sigma) * Fraction(1, 2) ** (d.phi - br)
            total = total + ChainElement.of(Unit(seq[0].src), coeff)
        if corners[1:] == seq[1:] and corners[0] != seq[0]:
            theta = _split_off_head(sys, corners[0], seq[0])
            if theta is not None:
                sign = d.sigma + homs.degree(sys, theta) \
                    + homs.fold_sign(sys, theta, seq[0])
                br = homs.fold_indicator(sys, theta, seq[0])
                coeff = Fraction((-1) ** sign) * Fraction(1, 2) ** (d.phi - br)
                total = total + ChainElement.of(theta, coeff)
        if corners[:-1] == seq[:-1] and corners[-1] != seq[-1]:
            psi = _split_off_tail(sys, corners[-1], seq[-1])
            if psi is not None:
                sign = d.sigma + homs.fold_sign(sys, seq[-1], psi)
                br = homs.fold_indicator(sys, seq[-1], psi)
                coeff = Fraction((-1) ** sign) * Fraction(1, 2) ** (d.phi - br)
                total = total + ChainElement.of(psi, coeff)
    return total


def m_comp(sys, corners):
    """Composition contribution: exact tuple matches only."""
    corners = tuple(corners)
    if len(corners) < 2 or any(isinstance(c, Unit) for c in corners):
        return ChainElement.zero()
    total = ChainElement.zero()
    for c in _comps_by_length(sys, len(corners)):
        if c.corners == corners:
            coeff = Fraction((-1) ** c.sigma) * Fraction(1, 2) ** c.phi
            total = total + ChainElement.of(c.value, coeff)
    return total


def m_thick(sys, triple):
    """Arity-3 exchange through a thick pair.

    In the first shape the boundary morphism comes first and its target is
    swapped for the partner; in the mirrored shape it comes last and its
    source is swapped.  Raises ThickPartnerMissing when a doubled point
    order matches the shape but the arc carries a single object.
    """
    f, g, h = triple
    if any(isinstance(x, Unit) for x in triple):
        return ChainElement.zero()
    if f.dst != g.src or g.dst != h.src:
        return ChainElement.zero()

    if isinstance(f, Boundary) and isinstance(g, Interior) \
            and isinstance(h, Interior):
        _require_partner_consistency(sys, g, h)
        src, dst = sys.objects[g.src], sys.objects[h.dst]
        if src.arc != dst.arc or src.id == dst.id:
            return ChainElement.zero()
        swapped = Boundary(f.marking, f.slot_from, f.slot_to, f.src, dst.id)
        if not _is_basic(sys, swapped):
            return ChainElement.zero()
        sign = homs.degree(sys, f) + 1 + homs.source_sign(sys, g) \
            + homs.fold_sign(sys, g, h)
        weight = 1 + homs.fold_indicator(sys, g, h)
        return ChainElement.of(swapped,
                               Fraction((-1) ** sign) * Fraction(1, 2) ** weight)

    if isinstance(h, Boundary) and isinstance(f, Interior) \
            and isinstance(g, Interior):
        _require_partner_consistency(sys, f, g)
        src, dst = sys.objects[f.src], sys.objects[g.dst]
        if src.arc != dst.arc or src.id == dst.id:
            return ChainElement.zero()
        swapped = Boundary(h.marking, h.slot_from, h.slot_to, src.id, h.dst)
        if not _is_basic(sys, swapped):
            return ChainElement.zero()
        sign = homs.source_sign(sys, f) + homs.fold_sign(sys, f, g)
        weight = 1 + homs.fold_indicator(sys, f, g)
        return ChainElement.of(swapped,
                               Fraction((-1) ** sign) * Fraction(1, 2) ** weight)

    return ChainElement.zero()


def _require_partner_consistency(sys, a, b):
    """Diagnose a doubled point order whose pair object is missing."""
    for m in (a, b):
        pt = sys.points[m.point]
        if len(pt.order) >= 2 and pt.order[0][0] == pt.order[-1][0]:
            if len(sys.objects_on(pt.order[0][0])) != 2:
                raise ThickPartnerMissing(
                    "point %r lists arc %r at both extremes but the arc "
                    "does not carry a partner pair" % (m.point, pt.order[0][0]))


# --------------------------------------------------------------------------
# total operation


def m_basic(sys, corners):
    """Total operation on a tuple of basis morphisms (units allowed)."""
    corners = tuple(corners)
    cache = getattr(sys, "_m_cache", None)
    if cache is None:
        cache = sys._m_cache = {}
    hit = cache.get(corners)
    if hit is not None:
        return hit
    n = len(corners)
    if n < 2:
        out = ChainElement.zero()
    elif any(isinstance(c, Unit) for c in corners):
        out = m2_con(sys, *corners) if n == 2 else ChainElement.zero()
    else:
        out = m_disc(sys, corners) + m_comp(sys, corners)
        if n == 2:
            out = out + m2_con(sys, *corners)
        if n == 3:
            out = out + m_thick(sys, corners)
    cache[corners] = out
    return out


def m_n(sys, elements):
    """Multilinear extension of the total operation.

    Input elements may be basis morphisms or chain elements; consecutive
    ones must share an object (zero elements compose with anything).
    """
    elements = [as_chain(x) for x in elements]
    if len(elements) < 2:
        return ChainElement.zero()
    if any(e.is_zero() for e in elements):
        return ChainElement.zero()
    for e in elements:
        if e.src is None or e.dst is None:
            raise NotComposable("chain element %r spans several hom spaces" % e)
    for a, b in zip(elements, elements[1:]):
        if a.dst != b.src:
            raise NotComposable("%r then %r" % (a, b))
    total = ChainElement.zero()
    for combo in itertools.product(*(e.items() for e in elements)):
        coeff = Fraction(1)
        for _m, c in combo:
            coeff *= c
        part = m_basic(sys, tuple(m for m, _c in combo))
        if not part.is_zero():
            total = total + part.scaled(coeff)
    return total


def output_degree(sys, element):
    """Common degree of a homogeneous chain element, None when mixed."""
    degs = {homs.degree(sys, m) for m in element.terms}
    return degs.pop() if len(degs) == 1 else None


# --------------------------------------------------------------------------
# verification: Stasheff identities


@dataclass
class Report:
    checked: int = 0
    entries: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {"checked": self.checked, "ok": self.ok,
                "violations": self.violations}


def _composable_tuples(sys, max_arity):
    outgoing = {}
    for f in homs.all_basic_morphisms(sys):
        outgoing.setdefault(f.src, []).append(f)
    for fs in outgoing.values():
        fs.sort(key=lambda f: f.serialize())

    def grow(chain):
        if len(chain) >= 2:
            yield tuple(chain)
        if len(chain) == max_arity:
            return
        for f in outgoing.get(chain[-1].dst, ()):
            chain.append(f)
            yield from grow(chain)
            chain.pop()

    for start in sorted(outgoing, key=str):
        for f in outgoing[start]:
            yield from grow([f])


def stasheff_residual(sys, corners):
    """The signed sum of all inner/outer pairings on one input tuple."""
    n = len(corners)
    total = ChainElement.zero()
    for k in range(2, n):
        for i in range(n - k + 1):
            inner = m_basic(sys, corners[i:i + k])
            if inner.is_zero():
                continue
            sign = (-1) ** (sum(homs.degree(sys, c) for c in corners[:i]) + i)
            outer_args = [ChainElement.of(c) for c in corners[:i]] \
                + [inner] \
                + [ChainElement.of(c) for c in corners[i + k:]]
            total = total + m_n(sys, outer_args).scaled(sign)
    return total


def check_ainf_identities(sys, max_arity, brute_force=False):
    r"""Verify the Stasheff identities on every composable basis tuple.

    Units are excluded here (see `check_unitality`).  The default mode
    skips tuples none of whose consecutive runs produces a value, which
    cannot contribute; `brute_force=True` evaluates the full double sum on
    every tuple and must agree.
    """
    report = Report()
    for corners in _composable_tuples(sys, max_arity):
        if not brute_force:
            n = len(corners)
            if not any(not m_basic(sys, corners[i:i + k]).is_zero()
                       for k in range(2, n)
                       for i in range(n - k + 1)):
                report.checked += 1
                continue
        residual = stasheff_residual(sys, corners)
        report.checked += 1
        if not residual.is_zero():
            report.violations.append(
                {"tuple": [c.serialize() for c in corners],
                 "residue": repr(residual)})
    return report


def check_unitality(sys):
    """Strict unit rules: left unit acts as identity, right unit
    contributes the degree sign, and units kill every higher arity."""
    report = Report()
    units = {oid: Unit(oid) for oid in sys.objects}
    basics = homs.all_basic_morphisms(sys)
    for f in basics:
        report.checked += 2
        left = m_basic(sys, (units[f.src], f))
        right = m_basic(sys, (f, units[f.dst]))
        want_right = ChainElement.of(f, (-1) ** homs.degree(sys, f))
        if left != ChainElement.of(f):
            report.violations.append({"tuple": ["u@" + f.src, f.serialize()],
                                      "residue": repr(left)})
        if right != want_right:
            report.violations.append({"tuple": [f.serialize(), "u@" + f.dst],
                                      "residue": repr(right - want_right)})
    for oid in sys.objects:
        report.checked += 1
        ee = m_basic(sys, (units[oid], units[oid]))
        if ee != ChainElement.of(units[oid]):
            report.violations.append({"tuple": ["u@" + oid, "u@" + oid],
                                      "residue": repr(ee)})
    for f, g in itertools.product(basics, repeat=2):
        if f.dst != g.src:
            continue
        for spot in range(3):
            args = [f, g]
            args.insert(spot, units[(f.src, f.dst, g.dst)[spot]])
            report.checked += 1
            got = m_basic(sys, tuple(args))
            if not got.is_zero():
                report.violations.append(
                    {"tuple": [a.serialize() for a in args],
                     "residue": repr(got)})
    return report


# --------------------------------------------------------------------------
# verification: weight and sign additivity under gluing


def _con(sys, f, g):
    return homs.concatenable(sys, f, g)


def _cat(sys, f, g):
    return homs.concatenate(sys, f, g)


def _record(report, pattern, pieces, checks):
    ok = all(lhs == rhs for lhs, rhs, _ in checks)
    entry = {"pattern": pattern, "pieces": pieces,
             "checks": [{"name": name, "lhs": lhs, "rhs": rhs}
                        for lhs, rhs, name in checks],
             "ok": ok}
    report.checked += 1
    report.entries.append(entry)
    if not ok:
        report.violations.append(entry)


def check_phi_sigma_additivity(sys):
    r"""Additivity of weight and sign over realized gluings.

    Every ordered pair of extracted sequences is matched against the glue
    patterns (disc+disc, composition capped by a disc through its value,
    disc absorbed into a composition at a middle, first or last corner,
    composition within a composition likewise, and the thick-pair exchange
    between a disc and its dual composition).  For each instance the glued
    tuple's weight and sign must deviate from the sum of the pieces' by
    exactly the stated bracket and sign corrections.
    """
    report = Report()
    discs, comps = extract_sequences(sys)
    for d1, d2 in itertools.product(discs, repeat=2):
        _check_disc_disc(sys, report, d1, d2)
    for c, d in itertools.product(comps, discs):
        _check_cap(sys, report, c, d)
        _check_absorb_middle(sys, report, c, d)
        _check_absorb_first(sys, report, c, d)
        _check_absorb_last(sys, report, c, d)
    for c1, c2 in itertools.product(comps, repeat=2):
        _check_comp_in_comp(sys, report, c1, c2)
    for d in discs:
        _check_thick_exchange(sys, report, d)
    return report


def _check_disc_disc(sys, report, d1, d2):
    phi_, psi_ = d1.corners, d2.corners
    if not (_con(sys, phi_[-1], psi_[0]) and _con(sys, psi_[-1], phi_[0])):
        return
    merged = (_cat(sys, psi_[-1], phi_[0]),) + phi_[1:-1] \
        + (_cat(sys, phi_[-1], psi_[0]),) + psi_[1:-1]
    br_a = homs.fold_indicator(sys, psi_[-1], phi_[0])
    br_b = homs.fold_indicator(sys, phi_[-1], psi_[0])
    sg_a = homs.fold_sign(sys, psi_[-1], phi_[0])
    sg_b = homs.fold_sign(sys, phi_[-1], psi_[0])
    _record(report, "disc-disc",
            [[c.serialize() for c in phi_], [c.serialize() for c in psi_]],
            [(disc_phi(sys, merged), d1.phi + d2.phi - br_a - br_b, "phi"),
             (disc_sigma(sys, merged),
              (d1.sigma + d2.sigma - sg_a - sg_b) % 2, "sigma")])


def _check_cap(sys, report, c, d):
    """A composition glued to a disc containing its value becomes a disc."""
    phi_ = c.corners
    for j, corner in enumerate(d.corners):
        if corner != c.value:
            continue
        rot = d.corners[j + 1:] + d.corners[:j + 1]
        psi_ = rot[:-1]
        if len(psi_) < 2:
            continue
        if not (_con(sys, phi_[-1], psi_[0]) and _con(sys, psi_[-1], phi_[0])):
            continue
        merged_a = phi_[:-1] + (_cat(sys, phi_[-1], psi_[0]),) + psi_[1:]
        merged_b = psi_[:-1] + (_cat(sys, psi_[-1], phi_[0]),) + phi_[1:]
        pieces = [[x.serialize() for x in phi_], [x.serialize() for x in rot]]
        _record(report, "comp-cap",
                pieces,
                [(disc_phi(sys, merged_a), c.phi + d.phi, "phi a"),
                 (disc_sigma(sys, merged_a),
                  (c.sigma + d.sigma
                   - homs.fold_sign(sys, phi_[-1], psi_[0])) % 2, "sigma a"),
                 (disc_phi(sys, merged_b), c.phi + d.phi, "phi b"),
                 (disc_sigma(sys, merged_b),
                  (c.sigma + d.sigma
                   - homs.fold_sign(sys, psi_[-1], phi_[0])) % 2, "sigma b")])


def _check_absorb_middle(sys, report, c, d):
    phi_, psi_ = c.corners, d.corners
    m = len(phi_)
    for k in range(m - 1):
        if not (_con(sys, phi_[k], psi_[0]) and _con(sys, psi_[-1], phi_[k + 1])):
            continue
        merged = phi_[:k] + (_cat(sys, phi_[k], psi_[0]),) + psi_[1:-1] \
            + (_cat(sys, psi_[-1], phi_[k + 1]),) + phi_[k + 2:]
        br_a = homs.fold_indicator(sys, phi_[k], psi_[0])
        br_b = homs.fold_indicator(sys, psi_[-1], phi_[k + 1])
        sg_a = homs.fold_sign(sys, phi_[k], psi_[0])
        sg_b = homs.fold_sign(sys, psi_[-1], phi_[k + 1])
        _record(report, "disc-into-comp-middle",
                [[x.serialize() for x in phi_], [x.serialize() for x in psi_]],
                [(comp_phi(sys, merged, c.value),
                  c.phi + d.phi - br_a - br_b, "phi"),
                 (comp_sigma(sys, merged, c.value),
                  (c.sigma + d.sigma - sg_a - sg_b) % 2, "sigma")])


def _check_absorb_first(sys, report, c, d):
    """The disc's first corner splits off the composition's value."""
    phi_, psi_ = c.corners, d.corners
    theta2 = _split_off_tail(sys, c.value, psi_[0]) \
        if isinstance(psi_[0], Interior) else None
    if theta2 is None or len(psi_) < 2:
        return
    if not _con(sys, psi_[-1], phi_[0]):
        return
    merged = psi_[1:-1] + (_cat(sys, psi_[-1], phi_[0]),) + phi_[1:]
    _record(report, "disc-into-comp-first",
            [[x.serialize() for x in phi_], [x.serialize() for x in psi_]],
            [(comp_phi(sys, merged, theta2),
              d.phi + c.phi - 1 - homs.fold_indicator(sys, psi_[0], theta2),
              "phi"),
             (comp_sigma(sys, merged, theta2),
              (d.sigma + c.sigma - homs.fold_sign(sys, psi_[-1], phi_[0])
               - homs.fold_sign(sys, psi_[0], theta2)) % 2, "sigma")])


def _check_absorb_last(sys, report, c, d):
    phi_, psi_ = c.corners, d.corners
    theta2 = _split_off_head(sys, c.value, psi_[-1]) \
        if isinstance(psi_[-1], Interior) else None
    if theta2 is None or len(psi_) < 2:
        return
    if not _con(sys, phi_[-1], psi_[0]):
        return
    merged = phi_[:-1] + (_cat(sys, phi_[-1], psi_[0]),) + psi_[1:-1]
    if len(merged) < 2:
        return
    _record(report, "disc-into-comp-last",
            [[x.serialize() for x in phi_], [x.serialize() for x in psi_]],
            [(comp_phi(sys, merged, theta2),
              c.phi + d.phi - 1 - homs.fold_indicator(sys, theta2, psi_[-1]),
              "phi"),
             (comp_sigma(sys, merged, theta2),
              (c.sigma + d.sigma - homs.fold_sign(sys, phi_[-1], psi_[0])
               - homs.fold_sign(sys, theta2, psi_[-1])) % 2, "sigma")])


def _check_comp_in_comp(sys, report, c1, c2):
    phi_, psi_ = c1.corners, c2.corners
    m = len(phi_)
    pieces = [[x.serialize() for x in phi_], [x.serialize() for x in psi_]]
    # value sits at a middle corner: both one-sided gluings exist
    for k in range(1, m - 1):
        if phi_[k] != c2.value:
            continue
        if not (_con(sys, phi_[k - 1], psi_[0])
                and _con(sys, psi_[-1], phi_[k + 1])):
            continue
        merged_lo = phi_[:k - 1] + (_cat(sys, phi_[k - 1], psi_[0]),) \
            + psi_[1:] + phi_[k + 1:]
        merged_hi = phi_[:k] + psi_[:-1] \
            + (_cat(sys, psi_[-1], phi_[k + 1]),) + phi_[k + 2:]
        sg = (c1.sigma + c2.sigma - homs.fold_sign(sys, phi_[k - 1], psi_[0])
              - homs.fold_sign(sys, psi_[-1], phi_[k + 1])) % 2
        _record(report, "comp-in-comp-middle", pieces,
                [(comp_phi(sys, merged_lo, c1.value),
                  c1.phi + c2.phi - 1, "phi lo"),
                 (comp_sigma(sys, merged_lo, c1.value), sg, "sigma lo"),
                 (comp_phi(sys, merged_hi, c1.value),
                  c1.phi + c2.phi - 1, "phi hi"),
                 (comp_sigma(sys, merged_hi, c1.value), sg, "sigma hi")])
    # value is the last corner: the outer value splits off the inner last
    if m >= 2 and phi_[-1] == c2.value:
        theta2 = _split_off_head(sys, c1.value, psi_[-1]) \
            if isinstance(psi_[-1], Interior) else None
        if theta2 is not None and _con(sys, phi_[-2], psi_[0]):
            merged_n = phi_[:-1] + psi_[:-1]
            merged_1 = phi_[:-2] + (_cat(sys, phi_[-2], psi_[0]),) + psi_[1:]
            _record(report, "comp-in-comp-last", pieces,
                    [(comp_phi(sys, merged_n, theta2),
                      c1.phi + c2.phi
                      - homs.fold_indicator(sys, theta2, psi_[-1]) + 1,
                      "phi tail"),
                     (comp_sigma(sys, merged_n, theta2),
                      (c1.sigma + c2.sigma
                       - homs.fold_sign(sys, theta2, psi_[-1])) % 2,
                      "sigma tail"),
                     (comp_phi(sys, merged_1, c1.value),
                      c1.phi + c2.phi, "phi glued"),
                     (comp_sigma(sys, merged_1, c1.value),
                      (c1.sigma + c2.sigma
                       - homs.fold_sign(sys, phi_[-2], psi_[0])) % 2,
                      "sigma glued")])
    # value is the first corner
    if m >= 2 and phi_[0] == c2.value:
        theta2 = _split_off_tail(sys, c1.value, psi_[0]) \
            if isinstance(psi_[0], Interior) else None
        if theta2 is not None and _con(sys, psi_[-1], phi_[1]):
            merged_1 = psi_[1:] + phi_[1:]
            merged_n = psi_[:-1] + (_cat(sys, psi_[-1], phi_[1]),) + phi_[2:]
            _record(report, "comp-in-comp-first", pieces,
                    [(comp_phi(sys, merged_1, theta2),
                      c1.phi + c2.phi
                      - homs.fold_indicator(sys, psi_[0], theta2) + 1,
                      "phi tail"),
                     (comp_sigma(sys, merged_1, theta2),
                      (c1.sigma + c2.sigma
                       - homs.fold_sign(sys, psi_[0], theta2)) % 2,
                      "sigma tail"),
                     (comp_phi(sys, merged_n, c1.value),
                      c1.phi + c2.phi, "phi glued"),
                     (comp_sigma(sys, merged_n, c1.value),
                      (c1.sigma + c2.sigma
                       - homs.fold_sign(sys, psi_[-1], phi_[1])) % 2,
                      "sigma glued")])


def _check_thick_exchange(sys, report, d):
    """A disc starting or ending at a thick pair against its dual
    composition with the interior morphism across the pair as value."""
    corners = d.corners
    first, second = corners[0], corners[1]
    if isinstance(first, Interior) and isinstance(second, Boundary):
        xs = sys.point_positions(first.point)
        dst_arc = sys.objects[first.dst].arc
        for a in range(first.pos_from):
            if not sys.granted(first.point, a, first.pos_from):
                continue
            cand = sys.objects[xs[a]]
            if cand.arc != dst_arc or cand.id == first.dst:
                continue
            psi = Interior(first.point, a, first.pos_from, cand.id, first.src)
            tup = corners[1:]
            _record(report, "thick-exchange-head",
                    [[x.serialize() for x in corners], [psi.serialize()]],
                    [(d.phi,
                      comp_phi(sys, tup, psi)
                      + homs.fold_indicator(sys, psi, first) + 1, "phi"),
                     (d.sigma,
                      (comp_sigma(sys, tup, psi) + homs.source_sign(sys, first)
                       + homs.fold_sign(sys, psi, first)) % 2, "sigma")])
    last, before = corners[-1], corners[-2]
    if isinstance(last, Interior) and isinstance(before, Boundary):
        xs = sys.point_positions(last.point)
        src_arc = sys.objects[last.src].arc
        for b in range(last.pos_to + 1, len(xs)):
            if not sys.granted(last.point, last.pos_to, b):
                continue
            cand = sys.objects[xs[b]]
            if cand.arc != src_arc or cand.id == last.src:
                continue
            psi = Interior(last.point, last.pos_to, b, last.dst, cand.id)
            tup = corners[:-1]
            _record(report, "thick-exchange-tail",
                    [[x.serialize() for x in corners], [psi.serialize()]],
                    [(d.phi,
                      comp_phi(sys, tup, psi)
                      + homs.fold_indicator(sys, last, psi) + 1, "phi"),
                     (d.sigma,
                      (comp_sigma(sys, tup, psi) + homs.source_sign(sys, last)
                       + homs.fold_sign(sys, last, psi)) % 2, "sigma")])
