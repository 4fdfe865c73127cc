"""Diagrams and presheaves valued in finite sets or finite GF(p) vector spaces,
with colimits, limits, restriction, left Kan extension and transformation search.

A presheaf on C is stored as a Diagram whose shape is opposite(C); its action
therefore sends a morphism f: x -> y of C to a value map F(y) -> F(x).
"""

from dataclasses import dataclass

from . import fincat
from .errors import BackendUnsupported, NotFunctorial, SearchBudgetExceeded
from .util import UnionFind, sort_key


# -- value categories ------------------------------------------------------


@dataclass(frozen=True)
class SetObj:
    elements: tuple

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class SetMor:
    src: SetObj
    tgt: SetObj
    mapping: tuple  # parallel to src.elements

    def __call__(self, x):
        return self.mapping[self.src.elements.index(x)]

    def as_dict(self):
        return dict(zip(self.src.elements, self.mapping))


def set_obj(elements):
    elements = tuple(elements)
    assert len(set(elements)) == len(elements)
    return SetObj(elements)


def set_mor(src, tgt, assignment):
    if callable(assignment):
        mapping = tuple(assignment(x) for x in src.elements)
    elif isinstance(assignment, dict):
        mapping = tuple(assignment[x] for x in src.elements)
    else:
        mapping = tuple(assignment)
    assert all(y in tgt.elements for y in mapping)
    return SetMor(src, tgt, mapping)


class FinSet:
    """Finite sets with cartesian product; colimits via union-find."""

    name = "finset"

    def terminal(self):
        return set_obj(("*",))

    def unit(self):
        return self.terminal()

    def size(self, obj):
        return len(obj.elements)

    def identity(self, obj):
        return SetMor(obj, obj, obj.elements)

    def compose(self, g, f):
        return SetMor(f.src, g.tgt, tuple(g(f(x)) for x in f.src.elements))

    def product(self, objs):
        """Cartesian product; elements are tuples, lex order."""
        elts = [()]
        for o in objs:
            elts = [t + (x,) for t in elts for x in o.elements]
        return set_obj(elts)

    def product_mor(self, mors):
        src = self.product([m.src for m in mors])
        tgt = self.product([m.tgt for m in mors])
        return set_mor(src, tgt, lambda t: tuple(m(x) for m, x in zip(mors, t)))

    def coproduct(self, objs):
        elts = [(i, x) for i, o in enumerate(objs) for x in o.elements]
        total = set_obj(elts)
        injections = [set_mor(o, total, lambda x, i=i: (i, x)) for i, o in enumerate(objs)]
        return total, injections

    def coequalizer_of_relations(self, obj, relations):
        """Quotient of obj by the pairs in relations; returns (obj, map)."""
        uf = UnionFind(obj.elements)
        for a, b in relations:
            uf.union(a, b)
        classes = uf.classes()
        reps = sorted(classes.keys(), key=sort_key)
        out = set_obj(reps)
        rep_of = {}
        for r, members in classes.items():
            for m in members:
                rep_of[m] = r
        return out, set_mor(obj, out, lambda x: rep_of[x])

    def coequalizer(self, f, g):
        assert f.src == g.src and f.tgt == g.tgt
        return self.coequalizer_of_relations(
            f.tgt, [(f(x), g(x)) for x in f.src.elements]
        )

    def is_iso(self, m):
        return len(set(m.mapping)) == len(m.tgt.elements) == len(m.src.elements)

    def equal_up_to_iso(self, a, b):
        return len(a.elements) == len(b.elements)

    def elements(self, obj):
        return obj.elements


@dataclass(frozen=True)
class VecObj:
    dim: int
    p: int


@dataclass(frozen=True)
class VecMor:
    src: VecObj
    tgt: VecObj
    matrix: tuple  # rows: tgt.dim x src.dim, entries mod p

    def __call__(self, v):
        p = self.src.p
        return tuple(
            sum(self.matrix[i][j] * v[j] for j in range(self.src.dim)) % p
            for i in range(self.tgt.dim)
        )


def _rref(rows, p):
    """Row-reduce a matrix mod p; returns (rref rows, pivot columns)."""
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] % p), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], p - 2, p)
        rows[r] = [(x * inv) % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] % p:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


class FinVect:
    """Finite-dimensional vector spaces over GF(p); product is the tensor."""

    name = "finvect"

    def __init__(self, p):
        if p < 2 or any(p % k == 0 for k in range(2, p)):
            raise BackendUnsupported(f"{p} is not prime")
        self.p = p

    def terminal(self):
        return VecObj(0, self.p)

    def unit(self):
        return VecObj(1, self.p)

    def size(self, obj):
        return obj.dim

    def identity(self, obj):
        return VecMor(obj, obj, tuple(
            tuple(1 if i == j else 0 for j in range(obj.dim)) for i in range(obj.dim)
        ))

    def compose(self, g, f):
        p = self.p
        rows = tuple(
            tuple(
                sum(g.matrix[i][k] * f.matrix[k][j] for k in range(f.tgt.dim)) % p
                for j in range(f.src.dim)
            )
            for i in range(g.tgt.dim)
        )
        return VecMor(f.src, g.tgt, rows)

    def product(self, objs):
        """Tensor product over GF(p); the empty tensor is the unit."""
        d = 1
        for o in objs:
            d *= o.dim
        return VecObj(d, self.p)

    def product_mor(self, mors):
        """Kronecker product of the matrices."""
        src = self.product([m.src for m in mors])
        tgt = self.product([m.tgt for m in mors])
        rows = [[1]]
        for m in mors:
            out = []
            for r in rows:
                for i in range(m.tgt.dim):
                    out.append([
                        (a * m.matrix[i][j]) % self.p
                        for a in r
                        for j in range(m.src.dim)
                    ])
            rows = out
        return VecMor(src, tgt, tuple(tuple(r) for r in rows))

    def coproduct(self, objs):
        dims = [o.dim for o in objs]
        total = VecObj(sum(dims), self.p)
        injections = []
        off = 0
        for o in objs:
            rows = tuple(
                tuple(1 if j + off == i else 0 for j in range(o.dim))
                for i in range(total.dim)
            )
            injections.append(VecMor(o, total, rows))
            off += o.dim
        return total, injections

    def quotient_by_columns(self, obj, columns):
        """Quotient of obj by the span of the given vectors; (obj, projection)."""
        rref, pivots = _rref(columns, self.p) if columns else ([], [])
        pivset = set(pivots)
        free = [c for c in range(obj.dim) if c not in pivset]
        out = VecObj(len(free), self.p)
        # projection: e_c maps to e_c for free c; pivot columns get rewritten
        # by the relation rows so the quotient map kills the span.
        proj = [[0] * obj.dim for _ in range(len(free))]
        for k, c in enumerate(free):
            proj[k][c] = 1
        for row, pc in zip(rref, pivots):
            # e_{pc} = -sum_{free c} row[c] e_c in the quotient
            for k, c in enumerate(free):
                if row[c]:
                    proj[k][pc] = (-row[c]) % self.p
        return out, VecMor(obj, out, tuple(tuple(r) for r in proj))

    def coequalizer(self, f, g):
        cols = []
        for j in range(f.src.dim):
            col = [(f.matrix[i][j] - g.matrix[i][j]) % self.p for i in range(f.tgt.dim)]
            if any(col):
                cols.append(col)
        return self.quotient_by_columns(f.tgt, cols)

    def is_iso(self, m):
        if m.src.dim != m.tgt.dim:
            return False
        _, pivots = _rref(m.matrix, self.p)
        return len(pivots) == m.src.dim

    def equal_up_to_iso(self, a, b):
        return a.dim == b.dim

    def rank(self, m):
        return len(_rref(m.matrix, self.p)[1])


FINSET = FinSet()


# -- diagrams --------------------------------------------------------------


class Diagram:
    """A functor shape -> value category, given by per-object values and
    per-morphism value maps."""

    def __init__(self, shape, values, actions, backend=FINSET, check=True):
        self.shape = shape
        self.backend = backend
        self.values = tuple(values)
        self.actions = tuple(actions)
        if check:
            self.validate()

    def validate(self):
        C, V = self.shape, self.backend
        for f, act in enumerate(self.actions):
            if act.src != self.values[C.src(f)] or act.tgt != self.values[C.tgt(f)]:
                raise NotFunctorial(f"diagram action at {C.morphisms[f].name} has wrong endpoints")
        for x, e in enumerate(C.identity):
            if self.actions[e] != V.identity(self.values[x]):
                raise NotFunctorial(f"diagram does not preserve identity at {C.objects[x]}")
        for (g, f), gf in C.table.items():
            if V.compose(self.actions[g], self.actions[f]) != self.actions[gf]:
                raise NotFunctorial(
                    f"diagram not functorial at ({C.morphisms[g].name}, {C.morphisms[f].name})"
                )

    def value(self, x):
        return self.values[x]

    def action(self, f):
        return self.actions[f]


@dataclass
class Cocone:
    diagram: Diagram
    apex: object
    legs: tuple

    def validate(self):
        D, V = self.diagram, self.diagram.backend
        for f in range(len(D.shape.morphisms)):
            x, y = D.shape.src(f), D.shape.tgt(f)
            if V.compose(self.legs[y], D.actions[f]) != self.legs[x]:
                raise NotFunctorial(f"cocone leg fails at {D.shape.morphisms[f].name}")
        return True


# -- presheaves ------------------------------------------------------------


class Presheaf(Diagram):
    """Presheaf on C: a Diagram on opposite(C).

    ``base`` is C itself; object x of C and morphism f of C are indexed as in
    C (the opposite shares indices).  value(x) is F(x); action(f: x -> y) is
    F(f): F(y) -> F(x).
    """

    def __init__(self, base, values, actions, backend=FINSET, check=True):
        self.base = base
        super().__init__(fincat.opposite(base), values, actions, backend, check)

    def act(self, f):
        """Value map F(tgt f) -> F(src f)."""
        return self.actions[f]


def presheaf_from_maps(base, value_of, act_of, backend=FINSET, check=True):
    values = [value_of(x) for x in range(len(base.objects))]
    actions = [act_of(f) for f in range(len(base.morphisms))]
    return Presheaf(base, values, actions, backend, check)


def yoneda(C, c):
    """The representable presheaf x -> Hom_C(x, c), action by precomposition."""
    def value_of(x):
        return set_obj(tuple(C.morphisms[h].name for h in C.hom(x, c)))

    def act_of(f):
        # F(f): Hom(tgt f, c) -> Hom(src f, c), g -> g . f
        x, y = C.src(f), C.tgt(f)
        return set_mor(
            value_of(y), value_of(x),
            {C.morphisms[g].name: C.morphisms[C.table[(g, f)]].name for g in C.hom(y, c)},
        )

    return presheaf_from_maps(C, value_of, act_of)


def constant_presheaf(C, obj, backend=FINSET):
    return presheaf_from_maps(C, lambda x: obj, lambda f: backend.identity(obj), backend)


def empty_presheaf(C, backend=FINSET):
    empty = set_obj(()) if backend.name == "finset" else VecObj(0, backend.p)
    return constant_presheaf(C, empty, backend)


# -- (co)limits ------------------------------------------------------------


def colimit(D):
    """Universal cocone of a diagram: coproduct of values modulo the action
    relations (union-find over FinSet; cokernel of difference maps over
    FinVect)."""
    V = D.backend
    total, injections = V.coproduct(list(D.values))
    C = D.shape
    if V.name == "finset":
        rel = []
        for f in range(len(C.morphisms)):
            x, y = C.src(f), C.tgt(f)
            for e in D.values[x].elements:
                rel.append((injections[x](e), injections[y](D.actions[f](e))))
        obj, q = V.coequalizer_of_relations(total, rel)
    elif V.name == "finvect":
        cols = []
        for f in range(len(C.morphisms)):
            x, y = C.src(f), C.tgt(f)
            for j in range(D.values[x].dim):
                basis = tuple(1 if k == j else 0 for k in range(D.values[x].dim))
                vx = injections[x](basis)
                vy = injections[y](D.actions[f](basis))
                col = [(a - b) % V.p for a, b in zip(vx, vy)]
                if any(col):
                    cols.append(col)
        obj, q = V.quotient_by_columns(total, cols)
    else:
        raise BackendUnsupported(V.name)
    legs = tuple(V.compose(q, inj) for inj in injections)
    return obj, Cocone(D, obj, legs)


def limit(D):
    """Limit of a FinSet diagram: compatible tuples in the product."""
    if D.backend.name != "finset":
        raise BackendUnsupported("limits implemented for FinSet only")
    C = D.shape
    n = len(C.objects)
    elts = [()]
    for x in range(n):
        elts = [t + (e,) for t in elts for e in D.values[x].elements]
    good = []
    for t in elts:
        ok = True
        for f in range(len(C.morphisms)):
            x, y = C.src(f), C.tgt(f)
            if D.actions[f](t[x]) != t[y]:
                ok = False
                break
        if ok:
            good.append(t)
    apex = set_obj(good)
    cone = tuple(set_mor(apex, D.values[x], lambda t, x=x: t[x]) for x in range(n))
    return apex, cone


# -- restriction and left Kan extension ------------------------------------


def restrict(u, F):
    """u^* F = F . u^op for u: C -> D and F a presheaf on D."""
    return Presheaf(
        u.source,
        [F.values[u.obj_map[x]] for x in range(len(u.source.objects))],
        [F.actions[u.mor_map[f]] for f in range(len(u.source.morphisms))],
        F.backend,
        check=False,
    )


def _kan_comma(u, d):
    """Indexing data for the pointwise left Kan extension at object d of D.

    Objects are pairs (c, g: d -> u(c)); a morphism (c, g) -> (c1, g1) is
    h: c1 -> c in C with u(h) . g1 = g, and it acts on values by F(h):
    F(c) -> F(c1).  Returns (objects, morphisms) with morphisms as triples
    (index of source pair, index of target pair, h).
    """
    C, D = u.source, u.target
    objs = []
    for c in range(len(C.objects)):
        for g in D.hom(d, u.obj_map[c]):
            objs.append((c, g))
    ix = {o: i for i, o in enumerate(objs)}
    mors = []
    for (c, g) in objs:
        for (c1, g1) in objs:
            for h in C.hom(c1, c):
                if D.table[(u.mor_map[h], g1)] == g:
                    mors.append((ix[(c, g)], ix[(c1, g1)], h))
    return objs, mors


def left_kan(u, F):
    """Left Kan extension of a presheaf F on C along u: C -> D, with the unit
    transformation F -> u^* (u_! F).

    Computed pointwise: (u_! F)(d) is the colimit over pairs (c, d -> u(c))
    of F(c), glued along morphisms of C acting through F.
    """
    C, D = u.source, u.target
    V = F.backend
    pointwise = {}
    for d in range(len(D.objects)):
        objs, mors = _kan_comma(u, d)
        vals = [F.values[c] for c, _ in objs]
        total, injections = V.coproduct(vals)
        if V.name == "finset":
            rel = []
            for i, j, h in mors:
                c_i = objs[i][0]
                for e in F.values[c_i].elements:
                    rel.append((injections[i](e), injections[j](F.actions[h](e))))
            obj, q = V.coequalizer_of_relations(total, rel)
        else:
            cols = []
            for i, j, h in mors:
                c_i = objs[i][0]
                for b in range(F.values[c_i].dim):
                    basis = tuple(1 if k == b else 0 for k in range(F.values[c_i].dim))
                    vx = injections[i](basis)
                    vy = injections[j](F.actions[h](basis))
                    col = [(a - b2) % V.p for a, b2 in zip(vx, vy)]
                    if any(col):
                        cols.append(col)
            obj, q = V.quotient_by_columns(total, cols)
        legs = [V.compose(q, inj) for inj in injections]
        pointwise[d] = (obj, objs, legs)

    def act_of(f):
        # (u_!F)(f: d' -> d): value at d -> value at d', by precomposing the
        # comma coordinate g: d -> u(c) with f.
        d1, d = D.src(f), D.tgt(f)
        obj_d, objs_d, legs_d = pointwise[d]
        obj_d1, objs_d1, legs_d1 = pointwise[d1]
        ix1 = {o: i for i, o in enumerate(objs_d1)}
        if V.name == "finset":
            mapping = {}
            for i, (c, g) in enumerate(objs_d):
                j = ix1[(c, D.table[(g, f)])]
                for e in F.values[c].elements:
                    mapping[legs_d[i](e)] = legs_d1[j](e)
            return set_mor(obj_d, obj_d1, mapping)
        rows = [[0] * obj_d.dim for _ in range(obj_d1.dim)]
        # build on the quotient: express via a section is awkward; instead map
        # each generator of the coproduct and factor through the projections.
        # legs give total -> quotient; the map below is defined on class
        # representatives, so we accumulate columns via the coproduct.
        total_cols = {}
        for i, (c, g) in enumerate(objs_d):
            j = ix1[(c, D.table[(g, f)])]
            for b in range(F.values[c].dim):
                basis = tuple(1 if k == b else 0 for k in range(F.values[c].dim))
                src_vec = legs_d[i](basis)
                tgt_vec = legs_d1[j](basis)
                total_cols.setdefault(src_vec, tgt_vec)
        # solve: find matrix M with M * src_vec = tgt_vec for all entries.
        # The src vectors span obj_d, so gaussian-solve column by column.
        pairs = list(total_cols.items())
        A = [list(s) for s, _ in pairs]          # rows: one per pair
        Bm = [list(t) for _, t in pairs]
        # want M (dim1 x dim) with A_i . M^T = B_i; solve M columns via rref
        aug, _ = _rref([a + b for a, b in zip(A, Bm)], V.p)
        M = [[0] * obj_d.dim for _ in range(obj_d1.dim)]
        for row in aug:
            lead = next((c for c in range(obj_d.dim) if row[c]), None)
            if lead is None:
                continue
            for r in range(obj_d1.dim):
                M[r][lead] = row[obj_d.dim + r]
        return VecMor(obj_d, obj_d1, tuple(tuple(r) for r in M))

    lan = Presheaf(D, [pointwise[d][0] for d in range(len(D.objects))],
                   [act_of(f) for f in range(len(D.morphisms))], V, check=True)

    # unit F -> u^* (u_! F): at c, the colimit leg at (c, id_{u(c)})
    unit_components = []
    for c in range(len(C.objects)):
        d = u.obj_map[c]
        obj_d, objs_d, legs_d = pointwise[d]
        i = objs_d.index((c, D.identity[d]))
        unit_components.append(legs_d[i])
    return lan, tuple(unit_components)


# -- natural transformations -----------------------------------------------


class Transformation:
    """Natural transformation between presheaves on the same base."""

    def __init__(self, source, target, components):
        self.source = source
        self.target = target
        self.components = tuple(components)

    def is_natural(self):
        F, G, C = self.source, self.target, self.source.base
        V = F.backend
        for f in range(len(C.morphisms)):
            x, y = C.src(f), C.tgt(f)
            if V.compose(self.components[x], F.actions[f]) != V.compose(
                G.actions[f], self.components[y]
            ):
                return False
        return True

    def is_iso(self):
        V = self.source.backend
        return all(V.is_iso(c) for c in self.components)


def transformations(F, G, mode="all", budget=2_000_000):
    """Enumerate natural transformations F -> G (complete list).

    mode="iso" keeps componentwise bijections only.  Raises
    SearchBudgetExceeded when the raw component space is too large.
    """
    C = F.base
    V = F.backend
    n = len(C.objects)
    if V.name == "finset":
        spaces = []
        for x in range(n):
            src, tgt = F.values[x], G.values[x]
            maps = [()]
            for _ in src.elements:
                maps = [t + (y,) for t in maps for y in tgt.elements]
            if mode == "iso":
                maps = [m for m in maps if len(set(m)) == len(tgt.elements) == len(src.elements)]
            spaces.append([set_mor(src, tgt, m) for m in maps])
        totsize = 1
        for s in spaces:
            totsize *= max(len(s), 1)
            if totsize > budget:
                raise SearchBudgetExceeded(budget, totsize)

        results = []

        def backtrack(x, chosen):
            if x == n:
                results.append(Transformation(F, G, list(chosen)))
                return
            for cand in spaces[x]:
                chosen.append(cand)
                if _partial_natural(F, G, chosen):
                    backtrack(x + 1, chosen)
                chosen.pop()

        backtrack(0, [])
        return results
    if V.name == "finvect":
        return _vect_transformations(F, G, mode, budget)
    raise BackendUnsupported(V.name)


def _partial_natural(F, G, chosen):
    C = F.base
    V = F.backend
    k = len(chosen)
    for f in range(len(C.morphisms)):
        x, y = C.src(f), C.tgt(f)
        if x < k and y < k:
            if V.compose(chosen[x], F.actions[f]) != V.compose(G.actions[f], chosen[y]):
                return False
    return True


def _vect_transformations(F, G, mode, budget):
    """Solve the naturality system over GF(p) and enumerate the solution space."""
    C, V = F.base, F.backend
    p = V.p
    n = len(C.objects)
    # unknowns: entries of each component matrix
    offsets, total = [], 0
    for x in range(n):
        offsets.append(total)
        total += G.values[x].dim * F.values[x].dim

    def entry_var(x, i, j):
        return offsets[x] + i * F.values[x].dim + j

    rows = []
    for f in range(len(C.morphisms)):
        x, y = C.src(f), C.tgt(f)
        Ff, Gf = F.actions[f], G.actions[f]
        # t_x . F(f) = G(f) . t_y  : matrices (G_x.dim x F_y.dim)
        for i in range(G.values[x].dim):
            for j in range(F.values[y].dim):
                row = [0] * total
                for k in range(F.values[x].dim):
                    row[entry_var(x, i, k)] = (row[entry_var(x, i, k)] + Ff.matrix[k][j]) % p
                for k in range(G.values[y].dim):
                    row[entry_var(y, k, j)] = (row[entry_var(y, k, j)] - Gf.matrix[i][k]) % p
                if any(row):
                    rows.append(row)
    rref, pivots = _rref(rows, p)
    free = [c for c in range(total) if c not in set(pivots)]
    if p ** len(free) > budget:
        raise SearchBudgetExceeded(budget, p ** len(free))
    sols = []
    import itertools

    for assign in itertools.product(range(p), repeat=len(free)):
        vec = [0] * total
        for c, v in zip(free, assign):
            vec[c] = v
        for row, pc in zip(rref, pivots):
            vec[pc] = (-sum(row[c] * vec[c] for c in free)) % p
        comps = []
        for x in range(n):
            m = tuple(
                tuple(vec[entry_var(x, i, j)] for j in range(F.values[x].dim))
                for i in range(G.values[x].dim)
            )
            comps.append(VecMor(F.values[x], G.values[x], m))
        t = Transformation(F, G, comps)
        if mode == "iso" and not t.is_iso():
            continue
        sols.append(t)
    return sols
