"""Truncated simplex category, active/inert factorization, category objects
(double categories) in FinCat, Segal and admissibility checks, and the
discrete double category on a finite set."""

import itertools
from dataclasses import dataclass, field

from . import fincat
from .errors import NotFunctorial, SegalFailure
from .util import monotone_maps, sort_key


@dataclass(frozen=True)
class DeltaMor:
    """A monotone map [m] -> [n], stored by its image tuple."""

    m: int
    n: int
    images: tuple

    def __call__(self, i):
        return self.images[i]

    def then(self, other):
        """self followed by other: other . self."""
        assert self.n == other.m
        return DeltaMor(self.m, other.n, tuple(other.images[v] for v in self.images))

    @property
    def is_active(self):
        return self.images[0] == 0 and self.images[-1] == self.n

    @property
    def is_inert(self):
        return all(self.images[i] == self.images[0] + i for i in range(self.m + 1))


def delta_id(n):
    return DeltaMor(n, n, tuple(range(n + 1)))


def rho(i, n):
    """The inert inclusion [1] ~= {i-1, i} -> [n] (1 <= i <= n)."""
    return DeltaMor(1, n, (i - 1, i))


def rho_block(a, b, n):
    """The inert map [b-a] -> [n], j -> a + j."""
    return DeltaMor(b - a, n, tuple(a + j for j in range(b - a + 1)))


def sigma(j, n):
    """The vertex inclusion [0] -> [n] at j."""
    return DeltaMor(0, n, (j,))


def active_map(m, n=None, inner=()):
    """The active map [m] -> [n]; for m=1 the unique one, else images given
    by (0, *inner, n)."""
    if n is None:
        n = m
    if m == 0:
        assert n == 0
        return DeltaMor(0, 0, (0,))
    if m == 1:
        return DeltaMor(1, n, (0, n))
    images = (0,) + tuple(inner) + (n,)
    assert len(images) == m + 1
    return DeltaMor(m, n, images)


def all_active_maps(m, n):
    return [
        DeltaMor(m, n, im)
        for im in monotone_maps(m, n)
        if im[0] == 0 and im[-1] == n
    ]


def factor_active_inert(f):
    """Unique factorization f = inert . active; returns (active, inert)."""
    a, b = f.images[0], f.images[-1]
    active = DeltaMor(f.m, b - a, tuple(v - a for v in f.images))
    inert = rho_block(a, b, f.n)
    return active, inert


class DeltaTrunc:
    """The full subcategory of the simplex category on [0..N], with the
    active and inert classes marked."""

    def __init__(self, N):
        self.N = N
        self.morphisms = {}
        for m in range(N + 1):
            for n in range(N + 1):
                self.morphisms[(m, n)] = [DeltaMor(m, n, im) for im in monotone_maps(m, n)]
        self.active = [f for fs in self.morphisms.values() for f in fs if f.is_active]
        self.inert = [f for fs in self.morphisms.values() for f in fs if f.is_inert]

    def hom(self, m, n):
        return self.morphisms[(m, n)]

    def all(self):
        for fs in self.morphisms.values():
            yield from fs

    def as_fincat(self):
        objs = [f"[{i}]" for i in range(self.N + 1)]
        ms, ix = [], {}
        for f in self.all():
            ix[f] = len(ms)
            ms.append(fincat.Mor(f"{f.m}->{f.n}:{','.join(map(str, f.images))}", f.m, f.n))
        identity = [ix[delta_id(i)] for i in range(self.N + 1)]
        table = {}
        for g in self.all():
            for f in self.all():
                if f.n == g.m:
                    table[(ix[g], ix[f])] = ix[f.then(g)]
        return fincat.build_category(objs, ms, identity, table, name=f"Delta<={self.N}")


def build_delta(N):
    """Validated truncated simplex category; hom counts are C(m+n+1, m+1)."""
    import math

    d = DeltaTrunc(N)
    for m in range(N + 1):
        for n in range(N + 1):
            expect = math.comb(m + n + 1, m + 1)
            if len(d.hom(m, n)) != expect:
                raise NotFunctorial(f"|Hom([{m}],[{n}])| != C({m+n+1},{m+1})")
    for f in d.all():
        act, inert = factor_active_inert(f)
        if not act.is_active or not inert.is_inert or act.then(inert) != f:
            raise NotFunctorial(f"active/inert factorization fails at {f}")
        others = [
            (a, i)
            for a in d.hom(f.m, act.n) if a.is_active
            for i in d.hom(act.n, f.n) if i.is_inert and a.then(i) == f
        ]
        if len(others) != 1:
            raise NotFunctorial(f"factorization of {f} through [{act.n}] not unique")
    return d


# -- category objects -------------------------------------------------------


class CategoryObject:
    """A truncated simplicial object in FinCat: levels X_0..X_N and a functor
    X(f): X_n -> X_m for every monotone f: [m] -> [n], contravariantly."""

    def __init__(self, delta, levels, actions, check=True, name="X"):
        self.delta = delta
        self.name = name
        self.levels = tuple(levels)
        self.actions = dict(actions)
        self._segal = None
        if check:
            self.validate()

    @property
    def N(self):
        return self.delta.N

    def act(self, f):
        return self.actions[f]

    def validate(self):
        d = self.delta
        for f in d.all():
            F = self.actions[f]
            if F.source is not self.levels[f.n] or F.target is not self.levels[f.m]:
                raise NotFunctorial(f"action at {f} has wrong endpoints")
        for i in range(d.N + 1):
            F = self.actions[delta_id(i)]
            if F.obj_map != tuple(range(len(self.levels[i].objects))):
                raise NotFunctorial(f"identity action at [{i}] not identity")
        for g in d.all():
            for f in d.all():
                if f.n != g.m:
                    continue
                comp = f.then(g)
                lhs = self.actions[comp]
                rhs = self.actions[g].then(self.actions[f])
                if lhs.obj_map != rhs.obj_map or lhs.mor_map != rhs.mor_map:
                    raise NotFunctorial(f"actions not functorial at ({g}, {f})")

    # Segal -----------------------------------------------------------------

    def segal_comparison(self, n):
        """The canonical functor X_n -> X_1 x_{X_0} ... x_{X_0} X_1 together
        with the materialized fiber-product category."""
        X1, X0 = self.levels[1], self.levels[0]
        e0 = self.actions[sigma(0, 1)]
        e1 = self.actions[sigma(1, 1)]
        # fiber product category: tuples of X_1 objects/morphisms matching in X_0
        objs, oix = [], {}
        for tup in itertools.product(range(len(X1.objects)), repeat=n):
            if all(e1.obj_map[tup[i]] == e0.obj_map[tup[i + 1]] for i in range(n - 1)):
                oix[tup] = len(objs)
                objs.append(tup)
        ms, mix = [], {}
        for tup in itertools.product(range(len(X1.morphisms)), repeat=n):
            srcs = tuple(X1.src(f) for f in tup)
            tgts = tuple(X1.tgt(f) for f in tup)
            if srcs in oix and tgts in oix and all(
                e1.mor_map[tup[i]] == e0.mor_map[tup[i + 1]] for i in range(n - 1)
            ):
                mix[tup] = len(ms)
                ms.append(fincat.Mor(str(tup), oix[srcs], oix[tgts]))
        identity = [0] * len(objs)
        for tup, o in oix.items():
            identity[o] = mix[tuple(X1.identity[x] for x in tup)]
        table = {}
        for t2, m2 in mix.items():
            for t1, m1 in mix.items():
                if all(X1.tgt(t1[i]) == X1.src(t2[i]) for i in range(n)):
                    table[(m2, m1)] = mix[tuple(X1.table[(t2[i], t1[i])] for i in range(n))]
        fp = fincat.FinCat([str(o) for o in objs], ms, identity, table, name=f"X1^x{n}")
        rhos = [self.actions[rho(i, n)] for i in range(1, n + 1)]
        obj_map = [oix[tuple(r.obj_map[x] for r in rhos)] for x in range(len(self.levels[n].objects))]
        mor_map = [mix[tuple(r.mor_map[f] for r in rhos)] for f in range(len(self.levels[n].morphisms))]
        cmp = fincat.Functor(self.levels[n], fp, obj_map, mor_map, name=f"segal{n}", check=False)
        return cmp, fp

    def check_segal(self):
        """Verify the Segal comparison is an isomorphism for 2 <= n <= N."""
        if self._segal is not None:
            return self._segal
        for n in range(2, self.N + 1):
            cmp, fp = self.segal_comparison(n)
            ok_obj = sorted(cmp.obj_map) == list(range(len(fp.objects))) and len(
                set(cmp.obj_map)
            ) == len(cmp.obj_map)
            ok_mor = sorted(cmp.mor_map) == list(range(len(fp.morphisms))) and len(
                set(cmp.mor_map)
            ) == len(cmp.mor_map)
            if not (ok_obj and ok_mor):
                self._segal = False
                raise SegalFailure(n, f"(|X_{n}|={len(self.levels[n].objects)}, fiber product has {len(fp.objects)} objects)")
        self._segal = True
        return True

    # protocol methods shared with lazy double-category systems ---------------

    def level_objects(self, n):
        return range(len(self.levels[n].objects))

    def act_obj(self, phi, x):
        return self.actions[phi].obj_map[x]

    def act_mor(self, phi, h):
        return self.actions[phi].mor_map[h]

    def hom_level(self, n, a, b):
        return self.levels[n].hom(a, b)

    def hom_possible(self, n, a, b):
        return True

    def compose_level(self, n, g, f):
        return self.levels[n].table[(g, f)]

    def identity_level(self, n, x):
        return self.levels[n].identity[x]

    def comma_under(self, phi, xi):
        return comma_under(self, phi, xi)


def build_category_object(delta, levels, actions, name="X"):
    """Validate functoriality and the Segal condition."""
    X = CategoryObject(delta, levels, actions, check=True, name=name)
    X.check_segal()
    return X


def category_object_from_generators(delta, levels, gen_actions, name="X"):
    """Assemble the full action table from face/degeneracy generator functors.

    ``gen_actions`` maps DeltaMor keys for cofaces d_i: [n-1] -> [n] and
    codegeneracies s_j: [n+1] -> [n] to functors; composites are generated and
    consistency is validated by build_category_object.
    """
    actions = dict(gen_actions)
    for i in range(delta.N + 1):
        actions[delta_id(i)] = fincat.identity_functor(levels[i])
    changed = True
    while changed:
        changed = False
        for g in delta.all():
            for f in delta.all():
                if f.n != g.m:
                    continue
                comp = f.then(g)
                if comp in actions or f not in actions or g not in actions:
                    continue
                actions[comp] = actions[g].then(actions[f])
                changed = True
    missing = [f for f in delta.all() if f not in actions]
    if missing:
        raise NotFunctorial(f"generators do not generate: missing {missing[:3]}")
    return build_category_object(delta, levels, actions, name=name)


def nerve(C, N, name=None):
    """Nerve of a finite category as a CategoryObject with discrete levels.

    Level n is the discrete category of n-chains of composable morphisms
    (chains store morphism indices; level 0 stores object indices).
    """
    delta = DeltaTrunc(N)
    chains = {0: [(x,) for x in range(len(C.objects))]}
    if N >= 1:
        chains[1] = [(f,) for f in range(len(C.morphisms))]
    for n in range(2, N + 1):
        chains[n] = [
            ch + (f,)
            for ch in chains[n - 1]
            for f in range(len(C.morphisms))
            if C.src(f) == C.tgt(ch[-1])
        ]
    levels = [fincat.discrete([str(c) for c in chains[n]], name=f"N{n}") for n in range(N + 1)]

    def vertex(ch, n, i):
        # object index at position i of a chain at level n
        if n == 0:
            return ch[0]
        return C.src(ch[i]) if i < n else C.tgt(ch[-1])

    def edge(ch, n, i, j):
        # composite morphism from vertex i to vertex j of a level-n chain
        if i == j:
            return C.identity[vertex(ch, n, i)]
        f = ch[i]
        for k in range(i + 1, j):
            f = C.table[(ch[k], f)]
        return f

    def act_of(f):
        src_chains, tgt_chains = chains[f.n], chains[f.m]
        ix = {c: i for i, c in enumerate(tgt_chains)}

        def image(ch):
            if f.m == 0:
                return (vertex(ch, f.n, f.images[0]),)
            if f.n == 0:
                return tuple(C.identity[ch[0]] for _ in range(f.m))
            return tuple(edge(ch, f.n, f.images[i], f.images[i + 1]) for i in range(f.m))

        obj_map = [ix[image(ch)] for ch in src_chains]
        return fincat.Functor(
            levels[f.n], levels[f.m], obj_map,
            [levels[f.m].identity[obj_map[i]] for i in range(len(src_chains))],
            name=str(f), check=False,
        )

    actions = {f: act_of(f) for f in delta.all()}
    return build_category_object(delta, levels, actions, name=name or f"N({C.name})"), chains


def constant_category_object(C, N, name=None):
    delta = DeltaTrunc(N)
    levels = [C] * (N + 1)
    actions = {f: fincat.identity_functor(C) for f in delta.all()}
    return build_category_object(delta, levels, actions, name=name or f"const({C.name})")


def delta_X(elements, N, name=None):
    """The discrete double category with level n the set X^{n+1}: faces are
    projections and degeneracies diagonals."""
    elements = tuple(elements)
    delta = DeltaTrunc(N)
    tuples = {n: list(itertools.product(elements, repeat=n + 1)) for n in range(N + 1)}
    levels = [fincat.discrete([str(t) for t in tuples[n]], name=f"X^{n+1}") for n in range(N + 1)]

    def act_of(f):
        ix = {t: i for i, t in enumerate(tuples[f.m])}
        obj_map = [ix[tuple(t[v] for v in f.images)] for t in tuples[f.n]]
        return fincat.Functor(
            levels[f.n], levels[f.m], obj_map,
            [levels[f.m].identity[o] for o in obj_map], name=str(f), check=False,
        )

    actions = {f: act_of(f) for f in delta.all()}
    X = build_category_object(delta, levels, actions, name=name or f"delta_X({len(elements)})")
    X._tuples = tuples
    return X


def comma_under(X, phi, xi):
    """The comma (xi down X(phi)) for phi: [m] -> [n] and xi in X_m, built
    through the double-category protocol (works for lazy systems too).

    Objects: (eta in X_n, alpha: xi -> X(phi)(eta) in X_m); a morphism
    (eta, alpha) -> (eta', alpha') is h: eta -> eta' in X_n with
    X(phi)(h) . alpha = alpha'.  Returns (FinCat, objects, morphism data).
    """
    m, n = phi.m, phi.n
    objs, oix = [], {}
    for eta in X.level_objects(n):
        img = X.act_obj(phi, eta)
        if not X.hom_possible(m, xi, img):
            continue
        for alpha in X.hom_level(m, xi, img):
            oix[(eta, alpha)] = len(objs)
            objs.append((eta, alpha))
    ms, mdata = [], []
    for (eta, alpha) in objs:
        o1 = oix[(eta, alpha)]
        for (eta2, alpha2) in objs:
            o2 = oix[(eta2, alpha2)]
            if not X.hom_possible(n, eta, eta2):
                continue
            for h in X.hom_level(n, eta, eta2):
                if X.compose_level(m, X.act_mor(phi, h), alpha) == alpha2:
                    mdata.append((o1, o2, h))
                    ms.append(fincat.Mor((o1, o2, str(h)), o1, o2))
    mix = {d: i for i, d in enumerate(mdata)}
    identity = [
        mix[(o, o, X.identity_level(n, eta))] for o, (eta, alpha) in enumerate(objs)
    ]
    table = {}
    for (o1, o2, h1) in mdata:
        for (p1, p2, h2) in mdata:
            if p1 == o2:
                table[(mix[(p1, p2, h2)], mix[(o1, o2, h1)])] = mix[
                    (o1, p2, X.compose_level(n, h2, h1))
                ]
    cat = fincat.FinCat(
        [str(o) for o in objs], ms, identity, table, name=f"({xi}|{phi})"
    )
    return cat, objs, mdata


# -- admissibility -----------------------------------------------------------


@dataclass
class AdmissibilityVerdict:
    phi: DeltaMor
    xi: int
    passed: bool
    detail: str = ""


@dataclass
class AdmissibilityReport:
    verdicts: list = field(default_factory=list)
    sampled: bool = False

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def failures(self):
        return [v for v in self.verdicts if not v.passed]


def blocks_of_active(phi):
    """Block lengths (phi(j) - phi(j-1)) for j = 1..m."""
    return [phi.images[j] - phi.images[j - 1] for j in range(1, phi.m + 1)]


def comparison_data(X, phi, xi):
    """The comparison functor Q: U -> prod_j U_j for an active phi: [m] -> [n]
    and xi in X_m (the commas the iterated Day tensors interchange over).

    Returns (U catdata, list of U_j catdata, Q object map, Q morphism map),
    where catdata is the (FinCat, objects, mordata) triple of comma_under.
    """
    m, n = phi.m, phi.n
    U = comma_under(X, phi, xi)
    blocks = blocks_of_active(phi)
    Ujs = []
    for j in range(1, m + 1):
        b = blocks[j - 1]
        xi_j = X.act_obj(rho(j, m), xi)
        Ujs.append(comma_under(X, active_map(1, b), xi_j))
    # Q on objects: (eta, alpha) -> (X(rho-block_j) eta, X(rho_j) alpha)_j
    qobj, qmor = [], []
    for (eta, alpha) in U[1]:
        coords = []
        for j in range(1, m + 1):
            eta_j = X.act_obj(rho_block(phi.images[j - 1], phi.images[j], n), eta)
            beta_j = X.act_mor(rho(j, m), alpha)
            coords.append((eta_j, beta_j))
        qobj.append(tuple(coords))
    for (o1, o2, h) in U[2]:
        coords = []
        for j in range(1, m + 1):
            h_j = X.act_mor(rho_block(phi.images[j - 1], phi.images[j], n), h)
            coords.append(h_j)
        qmor.append(tuple(coords))
    return U, Ujs, qobj, qmor


def _product_comma_check(U, Ujs, qobj, qmor):
    """pi0-coinitiality of Q: for every v in prod U_j the comma (Q down v)
    must be nonempty and connected."""
    from .util import UnionFind

    ucat, uobjs, umors = U
    nblocks = len(Ujs)
    block_objs = [objs for _, objs, _ in Ujs]
    # per block: object index, morphism index by data, hom lists, compose table
    block_oix = [{o: i for i, o in enumerate(objs)} for objs in block_objs]
    block_mix = [{d: i for i, d in enumerate(mdata)} for _, _, mdata in Ujs]
    block_homs = []
    for _, _, mdata in Ujs:
        homs = {}
        for k, (o1, o2, h) in enumerate(mdata):
            homs.setdefault((o1, o2), []).append(k)
        block_homs.append(homs)
    qix = [
        tuple(block_oix[j][coords[j]] for j in range(nblocks)) for coords in qobj
    ]
    # U-morphisms with their block images as morphism indices of each U_j
    uedges = []
    for k, (o1, o2, h) in enumerate(umors):
        imgs = []
        ok = True
        for j in range(nblocks):
            key = (qix[o1][j], qix[o2][j], qmor[k][j])
            if key not in block_mix[j]:
                ok = False
                break
            imgs.append(block_mix[j][key])
        if ok:
            uedges.append((o1, o2, tuple(imgs)))

    for v in itertools.product(*[range(len(objs)) for objs in block_objs]):
        comma = []
        for u in range(len(uobjs)):
            hom_lists = [block_homs[j].get((qix[u][j], v[j]), []) for j in range(nblocks)]
            if all(hom_lists):
                for psi in itertools.product(*hom_lists):
                    comma.append((u, psi))
        if not comma:
            return False, f"empty comma at v={v}"
        if len(comma) > 1:
            cix = {c: i for i, c in enumerate(comma)}
            uf = UnionFind(range(len(comma)))
            for (u, psi) in comma:
                for (o1, o2, imgs) in uedges:
                    if o2 != u:
                        continue
                    composed = tuple(
                        Ujs[j][0].table[(psi[j], imgs[j])] for j in range(nblocks)
                    )
                    other = (o1, composed)
                    if other in cix:
                        uf.union(cix[(u, psi)], cix[other])
            if len({uf.find(i) for i in range(len(comma))}) > 1:
                return False, f"disconnected comma at v={v}"
    return True, ""


def check_admissible(X, xi_sample=None, seed=0, include_trivial=False):
    """Admissibility report: for every active phi: [m] -> [n] within the
    truncation (m >= 2; m <= 1 comparisons are identities) and every xi in
    X_m — or a seeded sample of size xi_sample — the comparison functor to
    the product of block commas is pi0-coinitial.
    """
    X.check_segal()
    report = AdmissibilityReport()
    rng = None
    if xi_sample is not None:
        from .util import deterministic_rng

        rng = deterministic_rng(seed)
        report.sampled = True
    lo = 0 if include_trivial else 2
    for m in range(lo, X.N + 1):
        for n in range(X.N + 1):
            for phi in all_active_maps(m, n):
                xis = list(X.level_objects(m))
                if rng is not None and len(xis) > xi_sample:
                    xis = rng.sample(xis, xi_sample)
                for xi in xis:
                    U, Ujs, qobj, qmor = comparison_data(X, phi, xi)
                    ok, detail = _product_comma_check(U, Ujs, qobj, qmor)
                    report.verdicts.append(AdmissibilityVerdict(phi, xi, ok, detail))
    return report
