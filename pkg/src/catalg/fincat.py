"""Finite categories as explicit tables, functors, and elementary (co)final checks."""

from dataclasses import dataclass, field

from .errors import IllTypedComposite, MissingIdentity, NonAssociative, NotFunctorial
from .util import UnionFind, sort_key


@dataclass(frozen=True)
class Mor:
    name: str
    src: int
    tgt: int


class FinCat:
    """A finite category: object labels, morphism table, composition table.

    Instances are immutable after construction; all operations are pure.
    ``compose(g, f)`` follows the usual convention: defined when
    ``tgt(f) == src(g)`` and denotes "f then g".
    """

    def __init__(self, objects, morphisms, identity, table, name="C"):
        self.name = name
        self.objects = tuple(objects)
        self.morphisms = tuple(morphisms)
        self.identity = tuple(identity)
        self.table = dict(table)
        self._hom = {}
        for i, m in enumerate(self.morphisms):
            self._hom.setdefault((m.src, m.tgt), []).append(i)
        self._iso = None

    # -- basic accessors -------------------------------------------------

    def src(self, f):
        return self.morphisms[f].src

    def tgt(self, f):
        return self.morphisms[f].tgt

    def hom(self, x, y):
        return tuple(self._hom.get((x, y), ()))

    def compose(self, g, f):
        """g after f."""
        if self.tgt(f) != self.src(g):
            raise IllTypedComposite(self.morphisms[g].name, self.morphisms[f].name)
        return self.table[(g, f)]

    def object_index(self, label):
        return self.objects.index(label)

    def morphism_index(self, name):
        for i, m in enumerate(self.morphisms):
            if m.name == name:
                return i
        raise KeyError(name)

    def is_identity(self, f):
        return self.identity[self.src(f)] == f and self.src(f) == self.tgt(f)

    def iso_morphisms(self):
        """Indices of all isomorphisms (cached)."""
        if self._iso is None:
            isos = set()
            for f in range(len(self.morphisms)):
                x, y = self.src(f), self.tgt(f)
                for g in self.hom(y, x):
                    if (
                        self.table[(g, f)] == self.identity[x]
                        and self.table[(f, g)] == self.identity[y]
                    ):
                        isos.add(f)
                        break
            self._iso = frozenset(isos)
        return self._iso

    def __repr__(self):
        return f"FinCat({self.name}: {len(self.objects)} objects, {len(self.morphisms)} morphisms)"


def build_category(objects, morphisms, identity, table, name="C"):
    """Validate the raw tables and return a FinCat.

    Raises IllTypedComposite / MissingIdentity / NonAssociative naming the
    offending entry.
    """
    objects = tuple(objects)
    morphisms = tuple(Mor(*m) if not isinstance(m, Mor) else m for m in morphisms)
    identity = tuple(identity)
    table = dict(table)
    nm = len(morphisms)

    def mname(i):
        return morphisms[i].name

    if len(identity) != len(objects):
        raise MissingIdentity("<missing identity entries>")
    for x, e in enumerate(identity):
        if not (0 <= e < nm) or morphisms[e].src != x or morphisms[e].tgt != x:
            raise MissingIdentity(objects[x])

    for (g, f), gf in table.items():
        if morphisms[f].tgt != morphisms[g].src:
            raise IllTypedComposite(mname(g), mname(f), "(pair not composable)")
        if morphisms[gf].src != morphisms[f].src or morphisms[gf].tgt != morphisms[g].tgt:
            raise IllTypedComposite(mname(g), mname(f), f"(composite {mname(gf)} has wrong endpoints)")
    for g in range(nm):
        for f in range(nm):
            if morphisms[f].tgt == morphisms[g].src and (g, f) not in table:
                raise IllTypedComposite(mname(g), mname(f), "(composite undeclared)")

    for f in range(nm):
        x, y = morphisms[f].src, morphisms[f].tgt
        if table[(identity[y], f)] != f:
            raise MissingIdentity(objects[y], mname(f))
        if table[(f, identity[x])] != f:
            raise MissingIdentity(objects[x], mname(f))

    for h in range(nm):
        for g in range(nm):
            if morphisms[g].tgt != morphisms[h].src:
                continue
            hg = table[(h, g)]
            for f in range(nm):
                if morphisms[f].tgt != morphisms[g].src:
                    continue
                if table[(h, table[(g, f)])] != table[(hg, f)]:
                    raise NonAssociative(mname(h), mname(g), mname(f))

    return FinCat(objects, morphisms, identity, table, name=name)


def from_generators(objects, identity_names, arrows, relations_compose, name="C"):
    """Convenience builder: morphisms listed with an explicit compose function.

    ``arrows`` is a list of (name, src_label, tgt_label) covering all
    non-identity morphisms; ``relations_compose(gname, fname) -> name`` gives
    every composite.  Identities are created automatically.
    """
    labels = list(objects)
    names = [identity_names[o] for o in labels] + [a[0] for a in arrows]
    srcs = {identity_names[o]: o for o in labels}
    tgts = dict(srcs)
    for nm_, s, t in arrows:
        srcs[nm_], tgts[nm_] = s, t
    morphisms = [Mor(n, labels.index(srcs[n]), labels.index(tgts[n])) for n in names]
    index = {n: i for i, n in enumerate(names)}
    identity = [index[identity_names[o]] for o in labels]
    table = {}
    for g in names:
        for f in names:
            if tgts[f] != srcs[g]:
                continue
            if f == identity_names[srcs[f]]:
                table[(index[g], index[f])] = index[g]
            elif g == identity_names[tgts[g]]:
                table[(index[g], index[f])] = index[f]
            else:
                table[(index[g], index[f])] = index[relations_compose(g, f)]
    return build_category(labels, morphisms, identity, table, name=name)


# -- stock categories ----------------------------------------------------


def terminal_category():
    return build_category(["*"], [Mor("id_*", 0, 0)], [0], {(0, 0): 0}, name="1")


def discrete(labels, name=None):
    morphisms = [Mor(f"id_{x}", i, i) for i, x in enumerate(labels)]
    table = {(i, i): i for i in range(len(labels))}
    return build_category(labels, morphisms, list(range(len(labels))), table,
                          name=name or f"disc{len(labels)}")


def walking_arrow():
    ms = [Mor("id_a", 0, 0), Mor("id_b", 1, 1), Mor("f", 0, 1)]
    table = {(0, 0): 0, (1, 1): 1, (2, 0): 2, (1, 2): 2}
    return build_category(["a", "b"], ms, [0, 1], table, name="2")


def walking_cospan():
    # a -> c <- b
    ms = [Mor("id_a", 0, 0), Mor("id_b", 1, 1), Mor("id_c", 2, 2),
          Mor("f", 0, 2), Mor("g", 1, 2)]
    table = {(0, 0): 0, (1, 1): 1, (2, 2): 2,
             (3, 0): 3, (2, 3): 3, (4, 1): 4, (2, 4): 4}
    return build_category(["a", "b", "c"], ms, [0, 1, 2], table, name="cospan")


def monoid_category(elements, op, unit, name="M"):
    """One-object category from a finite monoid given by its operation table."""
    elements = list(elements)
    ms = [Mor(str(e), 0, 0) for e in elements]
    idx = {e: i for i, e in enumerate(elements)}
    table = {(idx[g], idx[f]): idx[op(g, f)] for g in elements for f in elements}
    return build_category(["*"], ms, [idx[unit]], table, name=name)


def poset_category(elements, leq, name="P"):
    elements = list(elements)
    ms, table = [], {}
    pairs = [(i, j) for i, x in enumerate(elements) for j, y in enumerate(elements)
             if leq(x, y)]
    for i, j in pairs:
        ms.append(Mor(f"le({elements[i]},{elements[j]})", i, j))
    name_of = {(m.src, m.tgt): k for k, m in enumerate(ms)}
    identity = [name_of[(i, i)] for i in range(len(elements))]
    for k2, m2 in enumerate(ms):
        for k1, m1 in enumerate(ms):
            if m1.tgt == m2.src:
                table[(k2, k1)] = name_of[(m1.src, m2.tgt)]
    return build_category(elements, ms, identity, table, name=name)


# -- functors and natural transformations --------------------------------


class Functor:
    def __init__(self, source, target, obj_map, mor_map, name="F", check=True):
        self.name = name
        self.source = source
        self.target = target
        self.obj_map = tuple(obj_map)
        self.mor_map = tuple(mor_map)
        if check:
            self._validate()

    def _validate(self):
        S, T = self.source, self.target
        for f, img in enumerate(self.mor_map):
            if T.src(img) != self.obj_map[S.src(f)] or T.tgt(img) != self.obj_map[S.tgt(f)]:
                raise NotFunctorial(f"{self.name}: endpoint mismatch at {S.morphisms[f].name}")
        for x, e in enumerate(S.identity):
            if self.mor_map[e] != T.identity[self.obj_map[x]]:
                raise NotFunctorial(f"{self.name}: identity not preserved at {S.objects[x]}")
        for (g, f), gf in S.table.items():
            if T.table[(self.mor_map[g], self.mor_map[f])] != self.mor_map[gf]:
                raise NotFunctorial(
                    f"{self.name}: composition not preserved at ({S.morphisms[g].name}, {S.morphisms[f].name})"
                )

    def on_obj(self, x):
        return self.obj_map[x]

    def on_mor(self, f):
        return self.mor_map[f]

    def then(self, other):
        """Composite functor: self followed by other."""
        if other.source is not self.target:
            raise NotFunctorial("functors not composable")
        return Functor(
            self.source,
            other.target,
            [other.obj_map[x] for x in self.obj_map],
            [other.mor_map[f] for f in self.mor_map],
            name=f"{other.name}.{self.name}",
            check=False,
        )

    def __repr__(self):
        return f"Functor({self.name}: {self.source.name} -> {self.target.name})"


def identity_functor(C):
    return Functor(C, C, range(len(C.objects)), range(len(C.morphisms)),
                   name=f"id_{C.name}", check=False)


def constant_functor(C, D, obj):
    return Functor(C, D, [obj] * len(C.objects),
                   [D.identity[obj]] * len(C.morphisms), name="const", check=False)


class NatTransform:
    """Natural transformation between parallel functors, components checked."""

    def __init__(self, source, target, components, check=True):
        self.source = source
        self.target = target
        self.components = tuple(components)
        if check and not self.is_natural():
            raise NotFunctorial("naturality square fails")

    def is_natural(self):
        F, G = self.source, self.target
        C, D = F.source, F.target
        for f in range(len(C.morphisms)):
            x, y = C.src(f), C.tgt(f)
            left = D.table[(self.components[y], F.mor_map[f])]
            right = D.table[(G.mor_map[f], self.components[x])]
            if left != right:
                return False
        return True

    def is_iso(self):
        D = self.source.target
        return all(c in D.iso_morphisms() for c in self.components)


# -- derived categories --------------------------------------------------


def opposite(C):
    ms = [Mor(m.name, m.tgt, m.src) for m in C.morphisms]
    table = {(f, g): gf for (g, f), gf in C.table.items()}
    return FinCat(C.objects, ms, C.identity, table, name=f"{C.name}^op")


def product(C, D):
    objs, ms = [], []
    obj_ix = {}
    for i, x in enumerate(C.objects):
        for j, y in enumerate(D.objects):
            obj_ix[(i, j)] = len(objs)
            objs.append((x, y))
    mor_ix = {}
    for i, m in enumerate(C.morphisms):
        for j, n in enumerate(D.morphisms):
            mor_ix[(i, j)] = len(ms)
            ms.append(Mor((m.name, n.name), obj_ix[(m.src, n.src)], obj_ix[(m.tgt, n.tgt)]))
    identity = [0] * len(objs)
    for (i, j), o in obj_ix.items():
        identity[o] = mor_ix[(C.identity[i], D.identity[j])]
    table = {}
    for (g1, g2), g in mor_ix.items():
        for (f1, f2), f in mor_ix.items():
            if C.morphisms[f1].tgt == C.morphisms[g1].src and D.morphisms[f2].tgt == D.morphisms[g2].src:
                table[(g, f)] = mor_ix[(C.table[(g1, f1)], D.table[(g2, f2)])]
    cat = FinCat(objs, ms, identity, table, name=f"{C.name}x{D.name}")
    p1 = Functor(cat, C, [i for (i, j) in obj_ix], [i for (i, j) in mor_ix], name="pr1", check=False)
    p2 = Functor(cat, D, [j for (i, j) in obj_ix], [j for (i, j) in mor_ix], name="pr2", check=False)
    return cat, p1, p2


def comma(F, G):
    """Comma category (F down G) for F: A -> C, G: B -> C, with projections.

    Objects: (a, b, f: F(a) -> G(b)); morphisms (u, v) with
    G(v) . f = f' . F(u).
    """
    A, B, C = F.source, G.source, F.target
    objs, obj_ix = [], {}
    for a in range(len(A.objects)):
        for b in range(len(B.objects)):
            for f in C.hom(F.obj_map[a], G.obj_map[b]):
                obj_ix[(a, b, f)] = len(objs)
                objs.append((A.objects[a], B.objects[b], C.morphisms[f].name))
    ms, mor_ix = [], {}
    for (a, b, f), o1 in obj_ix.items():
        for (a2, b2, f2), o2 in obj_ix.items():
            for u in A.hom(a, a2):
                for v in B.hom(b, b2):
                    if C.table[(G.mor_map[v], f)] == C.table[(f2, F.mor_map[u])]:
                        mor_ix[(o1, o2, u, v)] = len(ms)
                        ms.append(Mor((objs[o1], objs[o2], A.morphisms[u].name, B.morphisms[v].name), o1, o2))
    identity = [0] * len(objs)
    for (a, b, f), o in obj_ix.items():
        identity[o] = mor_ix[(o, o, A.identity[a], B.identity[b])]
    table = {}
    for (o1, o2, u, v), m1 in mor_ix.items():
        for (p1_, p2_, u2, v2), m2 in mor_ix.items():
            if p1_ == o2:
                table[(m2, m1)] = mor_ix[(o1, p2_, A.table[(u2, u)], B.table[(v2, v)])]
    cat = FinCat(objs, ms, identity, table, name=f"({F.name}|{G.name})")
    keys = [k for k, _ in sorted(obj_ix.items(), key=lambda kv: kv[1])]
    mkeys = [k for k, _ in sorted(mor_ix.items(), key=lambda kv: kv[1])]
    pA = Functor(cat, A, [a for (a, b, f) in keys], [u for (_, _, u, v) in mkeys], name="dom", check=False)
    pB = Functor(cat, B, [b for (a, b, f) in keys], [v for (_, _, u, v) in mkeys], name="cod", check=False)
    return cat, pA, pB


def obj_inclusion_functor(C, x):
    """The functor from the terminal category picking out object x."""
    T = terminal_category()
    return Functor(T, C, [x], [C.identity[x]], name=f"<{C.objects[x]}>", check=False)


def slice_over(C, x):
    """C/x with its projection to C."""
    cat, p, _ = comma(identity_functor(C), obj_inclusion_functor(C, x))
    return cat, p


def coslice_under(C, x):
    """x/C with its projection to C."""
    cat, _, p = comma(obj_inclusion_functor(C, x), identity_functor(C))
    return cat, p


def twisted_arrow(C):
    """Tw(C): objects are morphisms of C; a morphism (u, v): f -> f' satisfies
    f = v . f' . u, contravariant on the target side."""
    objs = [m.name for m in C.morphisms]
    ms, mor_ix = [], {}
    for f in range(len(C.morphisms)):
        for f2 in range(len(C.morphisms)):
            for u in C.hom(C.src(f), C.src(f2)):
                for v in C.hom(C.tgt(f2), C.tgt(f)):
                    if C.table[(v, C.table[(f2, u)])] == f:
                        mor_ix[(f, f2, u, v)] = len(ms)
                        ms.append(Mor((objs[f], objs[f2], C.morphisms[u].name, C.morphisms[v].name), f, f2))
    identity = [0] * len(objs)
    for f in range(len(C.morphisms)):
        identity[f] = mor_ix[(f, f, C.identity[C.src(f)], C.identity[C.tgt(f)])]
    table = {}
    for (f, f2, u, v), m1 in mor_ix.items():
        for (g, g2, u2, v2), m2 in mor_ix.items():
            if g == f2:
                table[(m2, m1)] = mor_ix[(f, g2, C.table[(u2, u)], C.table[(v, v2)])]
    return FinCat(objs, ms, identity, table, name=f"Tw({C.name})")


def max_subgroupoid(C):
    isos = sorted(C.iso_morphisms())
    reindex = {f: i for i, f in enumerate(isos)}
    ms = [Mor(C.morphisms[f].name, C.src(f), C.tgt(f)) for f in isos]
    identity = [reindex[e] for e in C.identity]
    table = {
        (reindex[g], reindex[f]): reindex[C.table[(g, f)]]
        for g in isos
        for f in isos
        if C.tgt(f) == C.src(g)
    }
    return FinCat(C.objects, ms, identity, table, name=f"iso({C.name})")


def derive(C, mode, **kwargs):
    """Dispatcher per the supported derivations; returns category (+ functors)."""
    if mode == "opposite":
        return opposite(C)
    if mode == "product":
        return product(C, kwargs["other"])
    if mode == "comma":
        return comma(kwargs["F"], kwargs["G"])
    if mode == "slice":
        return slice_over(C, kwargs["obj"])
    if mode == "coslice":
        return coslice_under(C, kwargs["obj"])
    if mode == "twisted_arrow":
        return twisted_arrow(C)
    if mode == "max_subgroupoid":
        return max_subgroupoid(C)
    raise ValueError(f"unknown derivation mode {mode!r}")


# -- pi0 and (co)finality ------------------------------------------------


def pi0(C):
    """Partition of objects by zig-zags of morphisms."""
    uf = UnionFind(range(len(C.objects)))
    for m in C.morphisms:
        uf.union(m.src, m.tgt)
    return [
        [C.objects[i] for i in members]
        for members in sorted(uf.classes().values(), key=lambda ms: min(ms))
    ]


def _nonempty_connected(C):
    return len(C.objects) > 0 and len(pi0(C)) == 1


def is_pi0_cofinal(F):
    """True iff every comma (b down F) is nonempty and connected."""
    B = F.target
    for b in range(len(B.objects)):
        cat, _, _ = comma(obj_inclusion_functor(B, b), F)
        if not _nonempty_connected(cat):
            return False
    return True


def is_pi0_coinitial(F):
    """True iff every comma (F down b) is nonempty and connected."""
    B = F.target
    for b in range(len(B.objects)):
        cat, _, _ = comma(F, obj_inclusion_functor(B, b))
        if not _nonempty_connected(cat):
            return False
    return True


def find_isomorphism(C, D):
    """Search for an isomorphism of categories C ~= D; None if absent."""
    if len(C.objects) != len(D.objects) or len(C.morphisms) != len(D.morphisms):
        return None
    homsig = lambda cat, i: tuple(
        sorted(len(cat.hom(i, j)) for j in range(len(cat.objects)))
    )

    def extend(obj_map):
        k = len(obj_map)
        if k == len(C.objects):
            # object bijection fixed; now match morphisms hom-set by hom-set
            mor_map = [None] * len(C.morphisms)

            def pick(homs):
                if not homs:
                    f = Functor(C, D, obj_map, mor_map, name="iso-cand", check=False)
                    try:
                        f._validate()
                    except NotFunctorial:
                        return None
                    return f
                (x, y), fs = homs[0]
                targets = D.hom(obj_map[x], obj_map[y])
                if len(targets) != len(fs):
                    return None
                import itertools as it

                for perm in it.permutations(targets):
                    for f_, t in zip(fs, perm):
                        mor_map[f_] = t
                    res = pick(homs[1:])
                    if res is not None:
                        return res
                return None

            homs = sorted(C._hom.items())
            return pick(homs)
        used = set(obj_map)
        for d in range(len(D.objects)):
            if d in used:
                continue
            obj_map.append(d)
            res = extend(obj_map)
            if res is not None:
                return res
            obj_map.pop()
        return None

    return extend([])
