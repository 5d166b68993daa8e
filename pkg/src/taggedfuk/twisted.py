r"""Twisted complexes over a tagged arc system.

A twisted complex is a finite list of shifted objects together with a
strictly lower-triangular connecting matrix of total degree one whose
Maurer-Cartan expression vanishes.  The operations extend the base ones
entrywise, summing over every way of feeding copies of the connecting
matrices between (and around) the given arguments.

Shift bookkeeping: a matrix entry from summand ``(X, k)`` to summand
``(Y, l)`` is a base element of ``Hom(X, Y)`` carried with twisted degree
``deg + k - l``.  Each entrywise base product is additionally scaled by
``(-1)**s`` where s sums the source-summand shifts of all the arguments,
that is, every shift along the summand chain except the final target.
With that one rule the units stay strict, ``m2(x, e) = (-1)**|x| x`` and
``m2(e, x) = x`` hold verbatim for twisted degrees, the identities close
at every arity, and no further hand signs appear.

The second half of the module applies the machinery: hom-complex
cohomology over exact rationals, the witness that contracting one side of
a polygon realizes an arc as a twisted complex on the rest (with both
composites equal to the same nonzero scalar times the identity), and
strict idempotent summands with their compressed hom cohomology.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction

from . import ainf, homs, model
from .ainf import ChainElement, as_chain
from .homs import NotComposable, Unit
from .model import CornerEntry, GapEntry, SectorEntry, SideEntry


class NotTwisted(Exception):
    """The data does not describe a twisted complex."""


class NotRemovable(Exception):
    """Dropping the object does not leave a tagged arc system."""


class NoEligibleDisc(Exception):
    """No extracted polygon presents the object on the rest of its
    corners: the removal has no witness."""


class NotIdempotent(Exception):
    """The endomorphism is not a strict unit-built idempotent."""


# --------------------------------------------------------------------------
# complexes and matrices


@dataclass(frozen=True)
class TwistedComplex:
    """Summands ``(object_id, shift)`` with a connecting matrix.

    ``delta`` holds triples ``(i, j, element)`` mapping summand j into a
    strictly later summand i.  Use `twisted` to build a validated one.
    """

    entries: tuple
    delta: tuple = ()

    @property
    def size(self):
        return len(self.entries)

    def obj(self, i):
        return self.entries[i][0]

    def shift(self, i):
        return self.entries[i][1]

    def delta_map(self):
        return {(i, j): el for i, j, el in self.delta}

    @classmethod
    def single(cls, obj, shift=0):
        return cls(((obj, shift),))

    def to_dict(self):
        return {"entries": [[o, k] for o, k in self.entries],
                "delta": [{"to": i, "from": j, "element": _chain_doc(el)}
                          for i, j, el in self.delta]}


def _chain_doc(el):
    return {m.serialize(): str(c) for m, c in el.items()}


def _chain_from_doc(doc):
    return ChainElement({homs.parse(k): Fraction(v) for k, v in doc.items()})


def twisted(sys, entries, delta):
    """Validated twisted complex.

    ``delta`` may be a dict ``{(i, j): element}``.  Checks strict lower
    triangularity, that entries live in the right hom spaces, and that
    every connecting entry has twisted degree one.  Vanishing of the
    Maurer-Cartan expression is a separate question; see `mc_check`.
    """
    entries = tuple((o, int(k)) for o, k in entries)
    if isinstance(delta, dict):
        delta = [(i, j, el) for (i, j), el in delta.items()]
    rows = []
    for i, j, el in sorted(delta, key=lambda t: (t[0], t[1])):
        el = as_chain(el)
        if el.is_zero():
            continue
        if not (0 <= j < i < len(entries)):
            raise NotTwisted("connecting entry (%d, %d) is not strictly "
                             "lower triangular" % (i, j))
        if el.src != entries[j][0] or el.dst != entries[i][0]:
            raise NotTwisted("entry (%d, %d) does not map summand %d "
                             "to summand %d" % (i, j, j, i))
        jump = entries[j][1] - entries[i][1]
        for m in el.terms:
            if homs.degree(sys, m) + jump != 1:
                raise NotTwisted(
                    "entry (%d, %d) term %s has twisted degree %d, not 1"
                    % (i, j, m.serialize(),
                       homs.degree(sys, m) + jump))
        rows.append((i, j, el))
    return TwistedComplex(entries, tuple(rows))


def twisted_from_dict(sys, doc):
    delta = {(e["to"], e["from"]): _chain_from_doc(e["element"])
             for e in doc.get("delta", ())}
    return twisted(sys, [tuple(e) for e in doc["entries"]], delta)


class TwMorphism:
    """Matrix of chain elements between two twisted complexes.

    ``entries[(i, j)]`` maps source summand j into target summand i.
    """

    __slots__ = ("src", "dst", "entries")

    def __init__(self, src, dst, entries=None):
        self.src = src
        self.dst = dst
        self.entries = {}
        for key, el in (entries or {}).items():
            self._accumulate(key, as_chain(el))

    def _accumulate(self, key, el):
        i, j = key
        if el.is_zero():
            return
        if el.src != self.src.obj(j) or el.dst != self.dst.obj(i):
            raise NotComposable(
                "element %r does not map summand %d of the source to "
                "summand %d of the target" % (el, j, i))
        total = self.entries.get(key, ChainElement.zero()) + el
        if total.is_zero():
            self.entries.pop(key, None)
        else:
            self.entries[key] = total

    @classmethod
    def identity(cls, T):
        return cls(T, T, {(i, i): ChainElement.of(Unit(T.obj(i)))
                          for i in range(T.size)})

    def is_zero(self):
        return not self.entries

    def scaled(self, c):
        return TwMorphism(self.src, self.dst,
                          {k: el.scaled(c) for k, el in self.entries.items()})

    def __add__(self, other):
        if (other.src, other.dst) != (self.src, self.dst):
            raise NotComposable("sum of matrices between different complexes")
        out = TwMorphism(self.src, self.dst, self.entries)
        for key, el in other.entries.items():
            out._accumulate(key, el)
        return out

    def __sub__(self, other):
        return self + other.scaled(-1)

    def __eq__(self, other):
        if isinstance(other, TwMorphism):
            return (self.src == other.src and self.dst == other.dst
                    and self.entries == other.entries)
        return NotImplemented

    def __repr__(self):
        if not self.entries:
            return "tw(0)"
        cells = ", ".join("(%d,%d): %r" % (i, j, el)
                          for (i, j), el in sorted(self.entries.items()))
        return "tw{%s}" % cells

    def to_dict(self):
        return {"src": self.src.to_dict(), "dst": self.dst.to_dict(),
                "entries": [{"to": i, "from": j, "element": _chain_doc(el)}
                            for (i, j), el in sorted(self.entries.items())]}


def tw_morphism_from_dict(sys, doc):
    src = twisted_from_dict(sys, doc["src"])
    dst = twisted_from_dict(sys, doc["dst"])
    return TwMorphism(src, dst,
                      {(e["to"], e["from"]): _chain_from_doc(e["element"])
                       for e in doc["entries"]})


def tw_degree(sys, m):
    """Common twisted degree of a matrix, None when mixed or zero."""
    degs = set()
    for (i, j), el in m.entries.items():
        jump = m.src.shift(j) - m.dst.shift(i)
        for f in el.terms:
            degs.add(homs.degree(sys, f) + jump)
    return degs.pop() if len(degs) == 1 else None


def delta_morphism_of(T):
    """The connecting matrix packaged as an endomorphism."""
    return TwMorphism(T, T, T.delta_map())


# --------------------------------------------------------------------------
# operations


def _matrix_m(sys, seq):
    """Entrywise total operation on a fixed run of matrices.

    Walks every chain of summand indices with nonzero entries, feeds the
    chain of elements to the base operation, and applies the shift sign:
    minus one to the sum of the source-summand shifts of the arguments.
    Returns a bare ``{(i, j): element}`` dict.
    """
    out = {}
    for j0 in range(seq[0].src.size):
        frontier = [((j0,), ())]
        for m in seq:
            grown = []
            for chain, elems in frontier:
                j = chain[-1]
                for (i, jj), el in m.entries.items():
                    if jj == j:
                        grown.append((chain + (i,), elems + (el,)))
            frontier = grown
            if not frontier:
                break
        for chain, elems in frontier:
            val = ainf.m_n(sys, list(elems))
            if val.is_zero():
                continue
            sign = sum(m.src.shift(chain[t]) for t, m in enumerate(seq))
            if sign % 2:
                val = val.scaled(-1)
            key = (chain[-1], chain[0])
            total = out.get(key, ChainElement.zero()) + val
            if total.is_zero():
                out.pop(key, None)
            else:
                out[key] = total
    return out


def tw_m_n(sys, ms):
    """Total operation on twisted matrices.

    Sums the entrywise base operation over every pattern of connecting
    matrices inserted at the interfaces, including the two outer ones.
    Accepts a single matrix, which yields its twisted differential.
    """
    ms = list(ms)
    if not ms:
        raise NotComposable("no arguments")
    for a, b in zip(ms, ms[1:]):
        if a.dst != b.src:
            raise NotComposable("matrix into %r followed by one out of %r"
                                % (a.dst, b.src))
    interfaces = [ms[0].src] + [m.dst for m in ms]
    deltas = [delta_morphism_of(C) for C in interfaces]
    out = TwMorphism(ms[0].src, ms[-1].dst)
    for counts in itertools.product(*(range(C.size) for C in interfaces)):
        seq = []
        for t, m in enumerate(ms):
            seq.extend([deltas[t]] * counts[t])
            seq.append(m)
        seq.extend([deltas[-1]] * counts[-1])
        if len(seq) < 2:
            continue
        for key, val in _matrix_m(sys, seq).items():
            out._accumulate(key, val)
    return out


def tw_stasheff_residual(sys, ms):
    """Alternating sum of nested applications on twisted matrices.

    Signs use twisted degrees; every argument must be homogeneous.  The
    sum vanishes whenever the complexes involved satisfy the
    Maurer-Cartan equation.
    """
    ms = list(ms)
    degs = []
    for m in ms:
        g = tw_degree(sys, m)
        if g is None and not m.is_zero():
            raise NotComposable("inhomogeneous matrix %r" % m)
        degs.append(g or 0)
    n = len(ms)
    total = TwMorphism(ms[0].src, ms[-1].dst)
    for r in range(1, n + 1):
        for i in range(0, n - r + 1):
            inner = tw_m_n(sys, ms[i:i + r])
            if inner.is_zero():
                continue
            term = tw_m_n(sys, ms[:i] + [inner] + ms[i + r:])
            if (sum(degs[:i]) + i) % 2:
                term = term.scaled(-1)
            total = total + term
    return total


def mc_residual(sys, T):
    """Sum of the operations fed with copies of the connecting matrix."""
    d = delta_morphism_of(T)
    out = TwMorphism(T, T)
    for k in range(2, T.size):
        for key, val in _matrix_m(sys, [d] * k).items():
            out._accumulate(key, val)
    return out


def mc_check(sys, T):
    """Whether the Maurer-Cartan expression of ``T`` vanishes."""
    return mc_residual(sys, T).is_zero()


# --------------------------------------------------------------------------
# exact linear algebra over the rationals


def _rref(rows):
    """Reduced row echelon form.  Returns (nonzero rows, pivot columns)."""
    rows = [list(r) for r in rows]
    pivots = []
    lead = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((k for k in range(lead, len(rows)) if rows[k][col]),
                     None)
        if pivot is None:
            continue
        rows[lead], rows[pivot] = rows[pivot], rows[lead]
        inv = Fraction(1) / rows[lead][col]
        rows[lead] = [x * inv for x in rows[lead]]
        for k in range(len(rows)):
            if k != lead and rows[k][col]:
                c = rows[k][col]
                rows[k] = [a - c * b for a, b in zip(rows[k], rows[lead])]
        pivots.append(col)
        lead += 1
    return rows[:lead], pivots


def _reduce_vector(rref_rows, pivots, vec):
    """Residual of ``vec`` against a reduced row span."""
    vec = list(vec)
    for row, p in zip(rref_rows, pivots):
        if vec[p]:
            c = vec[p]
            vec = [a - c * b for a, b in zip(vec, row)]
    return vec


def _nullspace(columns, height):
    """Basis of combinations of the columns summing to zero.

    ``columns`` is a list of height-``height`` vectors; the result is a
    list of coefficient vectors over the columns.
    """
    n = len(columns)
    rows = [[columns[j][i] for j in range(n)] for i in range(height)]
    reduced, pivots = _rref(rows)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


# --------------------------------------------------------------------------
# hom complexes and their cohomology


def tw_hom_basis(sys, X, Y):
    """Basis cells ``(i, j, f)`` of the matrix space from X to Y."""
    out = []
    for j in range(X.size):
        for i in range(Y.size):
            for f in homs.hom_basis(sys, X.obj(j), Y.obj(i)):
                out.append((i, j, f))
    return out


def _cell_degree(sys, X, Y, cell):
    i, j, f = cell
    return homs.degree(sys, f) + X.shift(j) - Y.shift(i)


def _to_vector(m, index):
    vec = [Fraction(0)] * len(index)
    for (i, j), el in m.entries.items():
        for f, c in el.terms.items():
            vec[index[(i, j, f)]] = c
    return vec


def _from_vector(X, Y, cells, vec):
    out = TwMorphism(X, Y)
    for cell, c in zip(cells, vec):
        if c:
            i, j, f = cell
            out._accumulate((i, j), ChainElement.of(f, c))
    return out


@dataclass
class CohomologyTable:
    """Graded dimensions with chosen representative cocycles."""

    dims: dict
    representatives: dict
    complex_dims: dict

    @property
    def total(self):
        return sum(self.dims.values())

    def to_dict(self):
        degs = sorted(set(self.dims) | set(self.complex_dims))
        return {"dims": {str(g): self.dims.get(g, 0) for g in degs},
                "complex_dims": {str(g): self.complex_dims.get(g, 0)
                                 for g in degs},
                "representatives": {
                    str(g): [m.to_dict()["entries"] for m in reps]
                    for g, reps in sorted(self.representatives.items())}}


def _graded_cohomology(sys, X, Y, span_by_degree):
    cells = tw_hom_basis(sys, X, Y)
    index = {cell: n for n, cell in enumerate(cells)}

    # independent basis per degree
    basis = {}
    for g, vectors in span_by_degree.items():
        reduced, pivots = _rref(vectors)
        if reduced:
            basis[g] = reduced

    images = {}
    for g, vectors in basis.items():
        cols = []
        for v in vectors:
            dv = tw_m_n(sys, [_from_vector(X, Y, cells, v)])
            dvec = _to_vector(dv, index)
            target = basis.get(g + 1, [])
            rr, pp = _rref(target)
            if any(_reduce_vector(rr, pp, dvec)):
                raise NotIdempotent(
                    "differential leaves the compressed space in degree %d"
                    % g)
            cols.append(dvec)
        images[g] = cols

    dims, reps = {}, {}
    for g, vectors in basis.items():
        cols = images[g]
        kernel = [_combine(vectors, coeffs)
                  for coeffs in _nullspace(cols, len(cells))]
        prior = images.get(g - 1, [])
        span, pivots = _rref(prior)
        found = []
        for v in kernel:
            residual = _reduce_vector(span, pivots, v)
            if any(residual):
                found.append(_from_vector(X, Y, cells, v))
                span, pivots = _rref(span + [residual])
        if found:
            dims[g] = len(found)
            reps[g] = found
    complex_dims = {g: len(v) for g, v in basis.items()}
    return CohomologyTable(dims, reps, complex_dims)


def _combine(vectors, coeffs):
    out = [Fraction(0)] * len(vectors[0])
    for v, c in zip(vectors, coeffs):
        if c:
            out = [a + c * b for a, b in zip(out, v)]
    return out


def hom_cohomology(sys, X, Y):
    """Cohomology of the matrix space from X to Y under the twisted
    differential: graded dimensions plus representative cocycles."""
    cells = tw_hom_basis(sys, X, Y)
    index = {cell: n for n, cell in enumerate(cells)}
    span = {}
    for cell in cells:
        g = _cell_degree(sys, X, Y, cell)
        vec = [Fraction(0)] * len(cells)
        vec[index[cell]] = Fraction(1)
        span.setdefault(g, []).append(vec)
    return _graded_cohomology(sys, X, Y, span)


# --------------------------------------------------------------------------
# removing an arc against a polygon


def _fuse_transitions(parts):
    """Fuse a run of transition entries left after cutting out a side.

    Corners chain through the removed slot, a gap anywhere makes the run
    a gap, and two sector passes at the same point stay a single sector.
    """
    kinds = {type(p) for p in parts}
    if GapEntry in kinds:
        label = next(p.label for p in parts if isinstance(p, GapEntry))
        return GapEntry(label)
    if kinds == {CornerEntry}:
        first, last = parts[0], parts[-1]
        for a, b in zip(parts, parts[1:]):
            if a.marking != b.marking or a.slot_to != b.slot_from:
                raise NotRemovable(
                    "corners %r and %r do not chain at the removed slot"
                    % (a, b))
        return CornerEntry(first.marking, first.slot_from, last.slot_to)
    if kinds == {SectorEntry}:
        if len({p.point for p in parts}) != 1:
            raise NotRemovable("sector passes at different points")
        return parts[0]
    raise NotRemovable("cannot fuse boundary run %r" % (parts,))


def _collapse_cycle(cycle):
    """Fuse adjacent transitions in a cyclic loop until it alternates."""
    if all(not isinstance(e, SideEntry) for e in cycle):
        raise NotRemovable("merged face has no sides left")
    start = next(k for k, e in enumerate(cycle)
                 if isinstance(e, SideEntry))
    cycle = cycle[start:] + cycle[:start]
    out = []
    run = []
    for e in cycle:
        if isinstance(e, SideEntry):
            if run:
                out.append(_fuse_transitions(run))
                run = []
            out.append(e)
        else:
            run.append(e)
    if run:
        out.append(_fuse_transitions(run))
    return out


def _merge_faces(sys, arc_id):
    """Face documents after cutting the arc out, before slot renumbering.

    Returns (face docs, id of the face that absorbed the arc).
    """
    hits = []
    for fid in sorted(sys.faces):
        loop = sys.faces[fid].loop
        for k, e in enumerate(loop):
            if isinstance(e, SideEntry) and e.arc == arc_id:
                hits.append((fid, k))
    if len(hits) != 2:
        raise NotRemovable("arc %r bounds %d face sides, expected 2"
                           % (arc_id, len(hits)))
    (f1, p1), (f2, p2) = hits
    faces = {fid: list(f.loop) for fid, f in sys.faces.items()}
    if f1 != f2:
        a = faces[f1][p1:] + faces[f1][:p1]
        b = faces[f2][p2:] + faces[f2][:p2]
        merged = _collapse_cycle(a[1:] + b[1:])
    else:
        a = faces[f1][p1:] + faces[f1][:p1]
        q = next(k for k in range(1, len(a))
                 if isinstance(a[k], SideEntry) and a[k].arc == arc_id)
        if q == len(a) - 2:
            a = a[q:] + a[:q]
            q = 2
        if q != 2:
            raise NotRemovable(
                "both sides of %r lie on one face and are not adjacent: "
                "the complement face is not a disc" % arc_id)
        merged = _collapse_cycle(a[3:])
    interior = list(sys.faces[f1].interior_points)
    if f1 != f2:
        interior += list(sys.faces[f2].interior_points)

    docs = []
    for fid in sorted(sys.faces):
        if fid == f2 and f2 != f1:
            continue
        face = sys.faces[fid]
        if fid == f1:
            docs.append({"id": fid, "loop": merged,
                         "unmarked_circles": face.unmarked_circles
                         + (sys.faces[f2].unmarked_circles
                            if f2 != f1 else 0),
                         "interior_points": interior})
        else:
            docs.append({"id": fid, "loop": list(face.loop),
                         "unmarked_circles": face.unmarked_circles,
                         "interior_points": list(face.interior_points)})
    return docs, f1


def _renumber_slots(doc_faces, sys, arc):
    """Drop the arc's marking slots and close up the numbering."""
    removed = {}
    for e in arc.marking_ends():
        removed.setdefault(e.marking, set()).add(e.slot)

    def new_slot(mid, s):
        gone = removed.get(mid, ())
        if s in gone:
            raise NotRemovable("slot %d of %r still referenced" % (s, mid))
        return s - sum(1 for g in gone if g < s)

    markings = []
    elementary = {}
    for mid in sorted(sys.markings):
        m = sys.markings[mid]
        gone = removed.get(mid, set())
        keep = [s for s in range(m.slots) if s not in gone]
        if not keep:
            raise NotRemovable("marking %r would lose all its slots" % mid)
        markings.append({"id": mid, "slots": len(keep)})
        elem = sys.elementary[mid]
        vec = []
        for a, b in zip(keep, keep[1:]):
            vec.append(sum(elem[a:b]))
        elementary[mid] = vec

    arcs = []
    for aid in sorted(sys.arcs):
        if aid == arc.id:
            continue
        ends = []
        for e in sys.arcs[aid].ends:
            if isinstance(e, model.MarkingEnd):
                ends.append({"at": e.marking, "slot": new_slot(e.marking,
                                                              e.slot)})
            else:
                ends.append({"at": e.point, "end": e.index})
        arcs.append({"id": aid, "ends": ends})

    faces = []
    for fd in doc_faces:
        loop = []
        for e in fd["loop"]:
            if isinstance(e, SideEntry):
                loop.append({"arc": e.arc})
            elif isinstance(e, CornerEntry):
                loop.append({"corner": {"marking": e.marking,
                                        "from": new_slot(e.marking,
                                                         e.slot_from),
                                        "to": new_slot(e.marking,
                                                       e.slot_to)}})
            elif isinstance(e, SectorEntry):
                loop.append({"point": e.point})
            else:
                loop.append({"gap": e.label})
        faces.append({"id": fd["id"], "loop": loop,
                      "unmarked_circles": fd["unmarked_circles"],
                      "interior_points": fd["interior_points"]})
    return markings, elementary, arcs, faces


def _shrink_points(sys, arc):
    """Point documents with the arc's entries cut out of the orders."""
    emptied = []
    points = []
    for pid in sorted(sys.points):
        p = sys.points[pid]
        order = list(p.order)
        indices = list(p.indices)
        while True:
            pos = next((k for k, (a, _e) in enumerate(order)
                        if a == arc.id), None)
            if pos is None:
                break
            order.pop(pos)
            if not indices:
                pass
            elif pos == 0:
                indices.pop(0)
            elif pos == len(order):
                indices.pop()
            else:
                merged = indices[pos - 1] + indices[pos]
                indices[pos - 1:pos + 1] = [merged]
        if not order:
            emptied.append(pid)
        points.append({"id": pid,
                       "order": [{"arc": a, "end": e} for a, e in order],
                       "indices": indices})
    return points, emptied


def complement_doc(sys, obj_id):
    """Document for the system with one object dropped.

    When the object was alone on its arc the arc goes too: the flanking
    faces merge, the marking slots close up, and any orbifold point left
    with no hanging ends moves to the merged face's interior.
    """
    if obj_id not in sys.objects:
        raise KeyError(obj_id)
    doc = model.system_to_dict(sys)
    doc.pop("involution", None)
    doc["objects"] = [o for o in doc["objects"] if o["id"] != obj_id]
    if sys.partner(obj_id) is not None:
        return doc
    arc = sys.arcs[sys.objects[obj_id].arc]
    face_docs, merged_id = _merge_faces(sys, arc.id)
    markings, elementary, arcs, faces = _renumber_slots(face_docs, sys, arc)
    points, emptied = _shrink_points(sys, arc)
    for fd in faces:
        if fd["id"] == merged_id:
            fd["interior_points"] = sorted(set(fd["interior_points"])
                                           | set(emptied))
    doc.update({"markings": markings, "orbifold_points": points,
                "arcs": arcs, "faces": faces,
                "elementary_degrees": elementary})
    doc["objects"] = [o for o in doc["objects"]
                      if o["id"] != obj_id]
    return doc


def check_complement(sys, obj_id):
    """Complement document, validated.  Raises `NotRemovable` when the
    system minus the object is not a tagged arc system."""
    doc = complement_doc(sys, obj_id)
    try:
        rest = model.load_system(doc)
        model.require_valid(rest)
    except (model.SchemaError, model.DanglingReference,
            model.InvalidPlacement, model.InconsistentFaces,
            model.DegreeSumViolation) as exc:
        raise NotRemovable("complement of %r is not a tagged arc system: %s"
                           % (obj_id, exc)) from exc
    return doc


def _variant(corner, src, dst):
    return replace(corner, src=src, dst=dst)


@dataclass
class RemovalWitness:
    """Realization of an object on the other corners of a polygon.

    ``complex_`` is built from the remaining corner objects, ``forward``
    maps it onto the shifted removed object, ``backward`` the other way,
    and both composites equal ``scalar`` times the respective identity.
    """

    removed: str
    complex_: TwistedComplex
    forward: TwMorphism
    backward: TwMorphism
    scalar: Fraction
    corners: tuple
    phi: int
    sigma: int
    nu: int
    complement: dict

    def __iter__(self):
        return iter((self.complex_, self.forward, self.backward,
                     self.scalar))

    def to_dict(self, sys):
        checks = []
        for name, pair, expect in (
                ("backward_then_forward",
                 (self.backward, self.forward),
                 TwMorphism.identity(self.backward.src)),
                ("forward_then_backward",
                 (self.forward, self.backward),
                 TwMorphism.identity(self.complex_))):
            checks.append({
                "compose": name,
                "arguments": [m.to_dict() for m in pair],
                "expected": expect.scaled(self.scalar).to_dict()})
        return {"removed": self.removed,
                "complex": self.complex_.to_dict(),
                "forward": self.forward.to_dict(),
                "backward": self.backward.to_dict(),
                "scalar": str(self.scalar),
                "corners": [c.serialize() for c in self.corners],
                "phi": self.phi, "sigma": self.sigma, "nu": self.nu,
                "checks": checks,
                "complement": self.complement}


def _rotation_blocks(sys, corners):
    """Kept summands and folds for a polygon rotation ending at the
    removed object.  Returns (entries, index map, folds, nu) or raises
    ``NoEligibleDisc`` reasons via ValueError."""
    r = len(corners)
    mids = [c.src for c in corners]
    folds = []
    for k in range(r):
        folds.append(homs.fold_indicator(sys, corners[k - 1],
                                         corners[k]) == 1)
    if folds[r - 1]:
        raise ValueError("the removed object sits on a fold")
    nu = sum(folds)
    entries = []
    index = {}
    s = 0
    for k in range(r - 1):
        if k > 0:
            s += homs.degree(sys, corners[k - 1]) - 1
        obj = mids[k]
        if folds[k]:
            partner = sys.partner(obj)
            if partner is None:
                raise ValueError("folded corner object %r has no partner"
                                 % obj)
            d = sys.objects[obj].shift - partner.shift
            index[(k, "+")] = len(entries)
            entries.append((obj, s))
            index[(k, "-")] = len(entries)
            entries.append((partner.id, s + d))
        else:
            index[(k, "+")] = len(entries)
            entries.append((obj, s))
    return entries, index, folds, nu


def _block_matrix(sys, corner, index, k_src, k_dst, entries):
    """Entries of one connecting block, over the partner choices
    realized at each end."""
    sources = [j for (k, _s), j in index.items() if k == k_src]
    targets = [i for (k, _s), i in index.items() if k == k_dst]
    return {(i, j): ChainElement.of(_variant(corner, entries[j][0],
                                             entries[i][0]))
            for j in sources for i in targets}


def removal_witness(sys, obj_id):
    """Witness that the object is a twisted complex on its polygon mates.

    Hunts every extracted polygon rotation that ends with the corner out
    of the object, requires the object itself unfolded there and every
    other folded corner carried by a thick pair, builds the complex on
    the remaining corners, and verifies both composites against the
    polygon's scalar before returning.
    """
    if obj_id not in sys.objects:
        raise KeyError(obj_id)
    discs, _comps = ainf.extract_sequences(sys)
    rejections = []
    candidates = []
    seen = set()
    for d in discs:
        corners = d.corners
        if corners[-1].src != obj_id:
            continue
        if corners in seen:
            continue
        seen.add(corners)
        candidates.append(d)
    candidates.sort(key=lambda d: tuple(c.serialize() for c in d.corners))
    if not candidates:
        raise NoEligibleDisc(
            "no extracted polygon ends at an unfolded pass of %r" % obj_id)
    for d in candidates:
        corners = d.corners
        try:
            entries, index, folds, nu = _rotation_blocks(sys, corners)
        except ValueError as exc:
            rejections.append("%s: %s"
                              % ([c.serialize() for c in corners], exc))
            continue
        if any(c.src == obj_id for c in corners[:-1]):
            rejections.append("%s: the object returns among the kept "
                              "corners" % [c.serialize() for c in corners])
            continue
        complement = check_complement(sys, obj_id)
        r = len(corners)
        delta = {}
        for k in range(r - 2):
            delta.update(_block_matrix(sys, corners[k], index, k, k + 1,
                                       entries))
        T = twisted(sys, entries, delta)
        shift = -homs.degree(sys, corners[r - 1])
        W = TwistedComplex(((obj_id, shift),))
        fwd = TwMorphism(T, W)
        for (k, sgn), j in index.items():
            if k == r - 2:
                fwd._accumulate((0, j), ChainElement.of(
                    _variant(corners[r - 2], entries[j][0], obj_id)))
        bwd = TwMorphism(W, T)
        for (k, sgn), i in index.items():
            if k == 0:
                bwd._accumulate((i, 0), ChainElement.of(
                    _variant(corners[r - 1], obj_id, entries[i][0])))
        scalar = Fraction((-1) ** (d.sigma % 2), 2 ** (d.phi - nu))
        if not mc_check(sys, T):
            rejections.append("%s: Maurer-Cartan expression does not vanish"
                              % [c.serialize() for c in corners])
            continue
        gf = tw_m_n(sys, (bwd, fwd))
        fg = tw_m_n(sys, (fwd, bwd))
        if gf != TwMorphism.identity(W).scaled(scalar) \
                or fg != TwMorphism.identity(T).scaled(scalar):
            raise RuntimeError(
                "witness verification failed for %r on %s: got %r and %r "
                "against scalar %s"
                % (obj_id, [c.serialize() for c in corners], gf, fg,
                   scalar))
        return RemovalWitness(obj_id, T, fwd, bwd, scalar, corners,
                              d.phi, d.sigma, nu, complement)
    raise NoEligibleDisc(
        "every polygon through %r was rejected: %s"
        % (obj_id, "; ".join(rejections)))


# --------------------------------------------------------------------------
# strict idempotents and compressed hom spaces


@dataclass
class IdempotentObject:
    """A twisted complex with a strict unit-built idempotent on it."""

    complex_: TwistedComplex
    idempotent: TwMorphism


def check_idempotent(sys, T, p):
    """Validate a strict idempotent: degree zero, unit-built entries,
    compatible with the connecting matrix, and squaring to itself."""
    if p.src != T or p.dst != T:
        raise NotIdempotent("idempotent must be an endomorphism of its "
                            "carrier")
    if not p.is_zero() and tw_degree(sys, p) != 0:
        raise NotIdempotent("idempotent is not of twisted degree zero")
    for (i, j), el in p.entries.items():
        for f in el.terms:
            if not isinstance(f, Unit):
                raise NotIdempotent("entry (%d, %d) is not unit-built"
                                    % (i, j))
    if not tw_m_n(sys, [p]).is_zero():
        raise NotIdempotent("idempotent does not commute with the "
                            "connecting matrix")
    if tw_m_n(sys, (p, p)) != p:
        raise NotIdempotent("endomorphism does not square to itself")


def _unpack_idempotent(sys, spec):
    if isinstance(spec, IdempotentObject):
        T, p = spec.complex_, spec.idempotent
    elif isinstance(spec, TwistedComplex):
        T, p = spec, TwMorphism.identity(spec)
    else:
        T, p = spec
    check_idempotent(sys, T, p)
    return T, p


def idempotent_hom(sys, source, target, invariance=None):
    """Compressed hom cohomology between idempotent summands.

    ``source`` and ``target`` are ``(complex, idempotent)`` pairs,
    `IdempotentObject` instances, or bare complexes (identity
    idempotent).  ``invariance``, when given, is an involution of the
    matrix space; the compression is applied to its fixed part only.
    Returns a `CohomologyTable`.
    """
    X, p = _unpack_idempotent(sys, source)
    Y, q = _unpack_idempotent(sys, target)
    cells = tw_hom_basis(sys, X, Y)
    index = {cell: n for n, cell in enumerate(cells)}

    by_degree = {}
    for cell in cells:
        by_degree.setdefault(_cell_degree(sys, X, Y, cell), []).append(cell)

    span = {}
    for g, group in sorted(by_degree.items()):
        vectors = []
        for cell in group:
            i, j, f = cell
            m = TwMorphism(X, Y, {(i, j): ChainElement.of(f)})
            vectors.append(m)
        if invariance is not None:
            fixed = []
            cols = []
            for m in vectors:
                acted = invariance(m)
                cols.append([a - b for a, b in
                             zip(_to_vector(acted, index),
                                 _to_vector(m, index))])
            for coeffs in _nullspace(cols, len(cells)):
                combo = TwMorphism(X, Y)
                for m, c in zip(vectors, coeffs):
                    if c:
                        combo = combo + m.scaled(c)
                fixed.append(combo)
            vectors = fixed
        compressed = []
        for m in vectors:
            cm = tw_m_n(sys, (p, tw_m_n(sys, (m, q))))
            if not cm.is_zero():
                compressed.append(_to_vector(cm, index))
        if compressed:
            span[g] = compressed
    return _graded_cohomology(sys, X, Y, span)
