"""Adequate triples and spans over finite categories, the interval functor
behind span algebras, truncated simplicial sets, 2-Segal checking, and
associative algebra structures in spans of finite sets."""

import itertools
from dataclasses import dataclass, field

from . import fincat
from .errors import (
    IndexOutOfRange,
    NotAdequate,
    NotClosed,
    NotSimplicial,
    PreconditionFailed,
)
from .simplicial import DeltaMor, all_active_maps, rho_block
from .util import sort_key


# -- triples and spans over a FinCat ----------------------------------------


def _find_pullback(C, f, g, forwards, backwards):
    """Search for a pullback square of the cospan (f: x -> y, g: z -> y) whose
    legs lie in the given classes.  Returns (w, proj_x, proj_z) or None.

    The square must satisfy the genuine universal property in C (checked by
    exhaustive cone enumeration).
    """
    x, z, y = C.src(f), C.src(g), C.tgt(f)

    def cones(v):
        return [
            (p, q)
            for p in C.hom(v, x)
            for q in C.hom(v, z)
            if C.table[(f, p)] == C.table[(g, q)]
        ]

    for w in range(len(C.objects)):
        for p, q in cones(w):
            if p not in backwards or q not in forwards:
                continue
            ok = True
            for v in range(len(C.objects)):
                homs = C.hom(v, w)
                target = cones(v)
                # universal: h -> (p.h, q.h) bijective onto cones(v)
                image = [(C.table[(p, h)], C.table[(q, h)]) for h in homs]
                if sorted(image) != sorted(target) or len(set(image)) != len(image):
                    ok = False
                    break
            if ok:
                return w, p, q
    return None


class Triple:
    """An adequate triple on a finite category: forwards/backwards classes
    closed under composition and containing all isomorphisms, such that every
    forwards/backwards cospan has a pullback with classed legs."""

    def __init__(self, base, forwards, backwards, chosen_pullbacks):
        self.base = base
        self.forwards = frozenset(forwards)
        self.backwards = frozenset(backwards)
        self.chosen_pullbacks = chosen_pullbacks  # (f, g) -> (w, proj_src_f, proj_src_g)

    def pullback(self, f, g):
        return self.chosen_pullbacks[(f, g)]


def validate_triple(base, forwards, backwards):
    """Check closure and adequacy exhaustively; returns a Triple with chosen
    pullbacks (first found in deterministic enumeration)."""
    forwards = frozenset(forwards)
    backwards = frozenset(backwards)
    isos = base.iso_morphisms()
    for name, cls in (("forwards", forwards), ("backwards", backwards)):
        missing = isos - cls
        if missing:
            f = next(iter(sorted(missing)))
            raise NotClosed(name, base.morphisms[f].name, "(missing isomorphism)")
        for g in cls:
            for f in cls:
                if base.tgt(f) == base.src(g) and base.table[(g, f)] not in cls:
                    raise NotClosed(name, base.morphisms[g].name, base.morphisms[f].name)
    chosen = {}
    for f in sorted(forwards):
        for g in sorted(backwards):
            if base.tgt(f) != base.tgt(g):
                continue
            found = _find_pullback(base, f, g, forwards, backwards)
            if found is None:
                raise NotAdequate(base.morphisms[f].name, base.morphisms[g].name)
            chosen[(f, g)] = found
    return Triple(base, forwards, backwards, chosen)


def maximal_triple(base):
    all_m = frozenset(range(len(base.morphisms)))
    return validate_triple(base, all_m, all_m)


@dataclass(frozen=True)
class CatSpan:
    """A span left <- apex -> right in a finite category, legs by index."""

    left: int
    apex: int
    right: int
    back: int     # apex -> left, in the backwards class
    forward: int  # apex -> right, in the forwards class


def identity_span(T, x):
    e = T.base.identity[x]
    return CatSpan(x, x, x, e, e)


def compose_cat_spans(T, s, t):
    """Composite of spans a <= u => b and b <= w => c via the chosen pullback
    of (forward of s, back of t)."""
    if s.right != t.left:
        raise PreconditionFailed("spans do not share the middle object")
    C = T.base
    w, p, q = T.pullback(s.forward, t.back)
    # p: w -> src(s.forward) = s.apex (backwards), q: w -> t.apex (forwards)
    return CatSpan(
        s.left, w, t.right,
        C.table[(s.back, p)],
        C.table[(t.forward, q)],
    )


def cat_span_iso(T, s, t):
    """Isomorphism witness between parallel spans: an iso apex -> apex
    commuting with both legs, or None."""
    C = T.base
    if (s.left, s.right) != (t.left, t.right):
        return None
    for h in C.hom(s.apex, t.apex):
        if h not in C.iso_morphisms():
            continue
        if C.table[(t.back, h)] == s.back and C.table[(t.forward, h)] == s.forward:
            return h
    return None


# -- the interval functor (theta) --------------------------------------------


def theta(phi, i):
    """Interval object of the simplex category attached to (phi: [m] -> [n], i):
    the subinterval {phi(i-1), ..., phi(i)} of [n], returned as its length
    (the object [phi(i) - phi(i-1)]) plus the inert inclusion into [n]."""
    if not (1 <= i <= phi.m):
        raise IndexOutOfRange(f"i={i} not in 1..{phi.m}")
    a, b = phi.images[i - 1], phi.images[i]
    return b - a, rho_block(a, b, phi.n)


def theta_on_morphism(phi, i, phi2, i2, mu, nu):
    """Image of a morphism (phi, i) -> (phi2, i2) of the twisted-arrow-style
    index category: mu: [m] -> [m'], nu: [n'] -> [n] with phi = nu . phi2 . mu
    and mu(i-1) < i2 <= mu(i).  Returns the restriction of nu as a map
    [phi2(i2) - phi2(i2-1)] -> [phi(i) - phi(i-1)]."""
    if not (mu.images[i - 1] < i2 <= mu.images[i]):
        raise IndexOutOfRange(f"i2={i2} not in (mu(i-1), mu(i)]")
    composite = mu.then(phi2).then(nu)
    if composite != phi:
        raise PreconditionFailed("square does not commute")
    a, b = phi.images[i - 1], phi.images[i]
    a2, b2 = phi2.images[i2 - 1], phi2.images[i2]
    images = tuple(nu.images[a2 + j] - a for j in range(b2 - a2 + 1))
    if any(v < 0 or v > b - a for v in images):
        raise PreconditionFailed("restriction leaves the target interval")
    return DeltaMor(b2 - a2, b - a, images)


# -- truncated simplicial sets ------------------------------------------------


class TruncSimplicialSet:
    """Levels X_0..X_N of element labels with face and degeneracy tables;
    simplicial identities validated on construction."""

    def __init__(self, levels, faces, degeneracies, name="X", check=True):
        self.name = name
        self.levels = [tuple(l) for l in levels]
        self.faces = {k: dict(v) for k, v in faces.items()}        # (n, i): X_n -> X_{n-1}
        self.degeneracies = {k: dict(v) for k, v in degeneracies.items()}  # (n, j): X_n -> X_{n+1}
        if check:
            self.validate()

    @property
    def N(self):
        return len(self.levels) - 1

    def face(self, n, i):
        return self.faces[(n, i)]

    def degeneracy(self, n, j):
        return self.degeneracies[(n, j)]

    def validate(self):
        N = self.N
        for (n, i), m in self.faces.items():
            if not (1 <= n <= N and 0 <= i <= n):
                raise NotSimplicial(f"d_{i}^{n}", "(bad index)")
            if set(m) != set(self.levels[n]) or not set(m.values()) <= set(self.levels[n - 1]):
                raise NotSimplicial(f"d_{i}^{n}", "(not a total map between the levels)")
        for (n, j), m in self.degeneracies.items():
            if not (0 <= n < N and 0 <= j <= n):
                raise NotSimplicial(f"s_{j}^{n}", "(bad index)")
            if set(m) != set(self.levels[n]) or not set(m.values()) <= set(self.levels[n + 1]):
                raise NotSimplicial(f"s_{j}^{n}", "(not a total map between the levels)")
        for n in range(1, N + 1):
            for i in range(n + 1):
                if (n, i) not in self.faces:
                    raise NotSimplicial(f"d_{i}^{n}", "(missing)")
        for n in range(N):
            for j in range(n + 1):
                if (n, j) not in self.degeneracies:
                    raise NotSimplicial(f"s_{j}^{n}", "(missing)")
        # d_i d_j = d_{j-1} d_i (i < j)
        for n in range(2, N + 1):
            for j in range(n + 1):
                for i in range(j):
                    for x in self.levels[n]:
                        lhs = self.face(n - 1, i)[self.face(n, j)[x]]
                        rhs = self.face(n - 1, j - 1)[self.face(n, i)[x]]
                        if lhs != rhs:
                            raise NotSimplicial(f"d_{i} d_{j} = d_{j-1} d_{i}", f"at level {n}, {x}")
        # s_i s_j = s_{j+1} s_i (i <= j)
        for n in range(N - 1):
            for j in range(n + 1):
                for i in range(j + 1):
                    for x in self.levels[n]:
                        lhs = self.degeneracy(n + 1, i)[self.degeneracy(n, j)[x]]
                        rhs = self.degeneracy(n + 1, j + 1)[self.degeneracy(n, i)[x]]
                        if lhs != rhs:
                            raise NotSimplicial(f"s_{i} s_{j} = s_{j+1} s_{i}", f"at level {n}, {x}")
        # d_i s_j relations
        for n in range(N):
            for j in range(n + 1):
                for i in range(n + 2):
                    for x in self.levels[n]:
                        val = self.face(n + 1, i)[self.degeneracy(n, j)[x]]
                        if i == j or i == j + 1:
                            expect = x
                        elif i < j:
                            expect = self.degeneracy(n - 1, j - 1)[self.face(n, i)[x]]
                        else:
                            expect = self.degeneracy(n - 1, j)[self.face(n, i - 1)[x]]
                        if val != expect:
                            raise NotSimplicial(f"d_{i} s_{j}", f"at level {n}, {x}")

    def act(self, f, x):
        """Value of the simplicial operator for the monotone map f: [m] -> [n]
        on x in X_n, via the face/degeneracy factorization f = delta . sigma."""
        images = list(f.images)
        current = x
        level = f.n
        # injective part: drop missed values, largest first (indices stay put)
        missed = [v for v in range(f.n + 1) if v not in images]
        for v in sorted(missed, reverse=True):
            current = self.face(level, v)[current]
            level -= 1
        # surjective part sigma: [m] ->> [level]: peel one collapse at a time;
        # sigma = tau . sigma_j when positions j, j+1 repeat, and
        # X(sigma) = s_j . X(tau).
        kept = sorted(set(images))
        relabel = {v: i for i, v in enumerate(kept)}
        seq = [relabel[v] for v in images]

        def apply_surjective(seq, current):
            m = len(seq) - 1
            lev = max(seq) if seq else 0
            if m == lev:
                return current
            j = next(i for i in range(m) if seq[i] == seq[i + 1])
            tau = seq[: j + 1] + seq[j + 2 :]
            return self.degeneracy(m - 1, j)[apply_surjective(tau, current)]

        return apply_surjective(seq, current)


def simplicial_set_from_monotone_action(levels, act, N, name="X"):
    """Build a TruncSimplicialSet from a function act(f: DeltaMor, x)."""
    from .simplicial import DeltaMor as DM

    if isinstance(levels, dict):
        levels = [levels[n] for n in range(N + 1)]
    faces = {}
    degeneracies = {}
    for n in range(1, N + 1):
        for i in range(n + 1):
            d_i = DM(n - 1, n, tuple(v if v < i else v + 1 for v in range(n)))
            faces[(n, i)] = {x: act(d_i, x) for x in levels[n]}
    for n in range(N):
        for j in range(n + 1):
            s_j = DM(n + 1, n, tuple(v if v <= j else v - 1 for v in range(n + 2)))
            degeneracies[(n, j)] = {x: act(s_j, x) for x in levels[n]}
    return TruncSimplicialSet(levels, faces, degeneracies, name=name)


def nerve_simplicial_set(C, N, name=None):
    """Nerve of a finite category as a truncated simplicial set."""
    chains = {0: [("o", x) for x in range(len(C.objects))]}
    if N >= 1:
        chains[1] = [(f,) for f in range(len(C.morphisms))]
    for n in range(2, N + 1):
        chains[n] = [
            ch + (f,) for ch in chains[n - 1] for f in range(len(C.morphisms))
            if C.src(f) == C.tgt(ch[-1])
        ]

    def vertex(ch, n, i):
        if n == 0:
            return ch[1]
        return C.src(ch[i]) if i < n else C.tgt(ch[-1])

    def act(f, ch):
        n, m = f.n, f.m
        if m == 0:
            return ("o", vertex(ch, n, f.images[0]))
        if n == 0:
            return tuple(C.identity[ch[1]] for _ in range(m))
        out = []
        for k in range(m):
            i, j = f.images[k], f.images[k + 1]
            if i == j:
                out.append(C.identity[vertex(ch, n, i)])
            else:
                g = ch[i]
                for t in range(i + 1, j):
                    g = C.table[(ch[t], g)]
                out.append(g)
        return tuple(out)

    return simplicial_set_from_monotone_action(
        chains, act, N, name=name or f"N({C.name})"
    )


def monoid_nerve(elements, op, unit, N, name=None):
    C = fincat.monoid_category(elements, op, unit, name=name or "M")
    return nerve_simplicial_set(C, N)


# -- the 2-Segal checker -------------------------------------------------------


@dataclass
class TwoSegalReport:
    conditions_i: list = field(default_factory=list)   # (map, passed)
    conditions_ii: list = field(default_factory=list)
    conditions_iii: list = field(default_factory=list)  # (alpha, passed, detail)
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures


def _long_edge(X, n, x):
    """Image of x in X_n under the unique active [1] -> [n]."""
    if n == 1:
        return x
    if n == 0:
        return X.degeneracy(0, 0)[x]
    cur = x
    for level in range(n, 1, -1):
        # drop inner vertex 1..: face d_1 repeatedly keeps endpoints
        cur = X.face(level, 1)[cur]
    return cur


def _edge(X, n, i, x):
    """Image of x in X_n under the inert rho_i: [1] -> [n] (1 <= i <= n)."""
    cur = x
    level = n
    # remove vertices above i
    for v in range(n, i, -1):
        cur = X.face(level, v)[cur]
        level -= 1
    for v in range(i - 2, -1, -1):
        cur = X.face(level, 0)[cur]
        level -= 1
    return cur


def _block(X, n, a, b, x):
    """Image of x in X_n under the inert rho_{a,b}: [b-a] -> [n]."""
    cur = x
    level = n
    for v in range(n, b, -1):
        cur = X.face(level, v)[cur]
        level -= 1
    for v in range(a - 1, -1, -1):
        cur = X.face(level, 0)[cur]
        level -= 1
    return cur


def check_2segal(X, triple_classes=("all", "all")):
    """Report on the three span-algebra conditions for a truncated simplicial
    set of finite sets.

    (i): the unique active [1] -> [n] must induce a forwards-class map
    X_n -> X_1; (ii): each inert [1] -> [n] a backwards-class map; with the
    default maximal classes both are vacuous.  (iii): for every active
    alpha: [n] -> [m] within the truncation, the comparison
    X_m -> X_n x_{prod X_1} prod_i X_{alpha(i)-alpha(i-1)} must be bijective.
    """
    N = X.N
    fwd_name, bwd_name = triple_classes
    report = TwoSegalReport()

    def in_class(name, mapping):
        if name == "all":
            return True
        values = list(mapping.values())
        if name == "bijections":
            return len(set(values)) == len(values) == len(set(mapping))
        if name == "injections":
            return len(set(values)) == len(mapping)
        raise ValueError(name)

    for n in range(N + 1):
        m_act = {x: _long_edge(X, n, x) for x in X.levels[n]}
        ok = in_class(fwd_name, m_act)
        report.conditions_i.append((f"active [1]->[{n}]", ok))
        if not ok:
            report.failures.append(("i", f"active [1]->[{n}]"))
        for i in range(1, n + 1):
            m_in = {x: _edge(X, n, i, x) for x in X.levels[n]}
            ok = in_class(bwd_name, m_in)
            report.conditions_ii.append((f"rho_{i}: [1]->[{n}]", ok))
            if not ok:
                report.failures.append(("ii", f"rho_{i}: [1]->[{n}]"))

    for n in range(N + 1):
        for m in range(N + 1):
            for alpha in all_active_maps(n, m):
                if n == 1 or n == 0:
                    continue  # comparison is an identity
                fib = []
                for y in X.levels[n]:
                    edges = [_edge(X, n, i, y) for i in range(1, n + 1)]
                    for zs in itertools.product(
                        *[
                            X.levels[alpha.images[i] - alpha.images[i - 1]]
                            for i in range(1, n + 1)
                        ]
                    ):
                        if all(
                            _long_edge(X, alpha.images[i] - alpha.images[i - 1], zs[i - 1])
                            == edges[i - 1]
                            for i in range(1, n + 1)
                        ):
                            fib.append((y, zs))
                image = {}
                ok = True
                for x in X.levels[m]:
                    y = X.act(alpha, x)
                    zs = tuple(
                        _block(X, m, alpha.images[i - 1], alpha.images[i], x)
                        for i in range(1, n + 1)
                    )
                    if (y, zs) in image:
                        ok = False
                        break
                    image[(y, zs)] = x
                detail = ""
                if ok:
                    ok = len(image) == len(fib) and all(k in image for k in fib)
                    if not ok:
                        detail = f"|X_{m}|={len(X.levels[m])} vs fiber product {len(fib)}"
                else:
                    detail = "comparison not injective"
                report.conditions_iii.append((alpha, ok, detail))
                if not ok:
                    report.failures.append(("iii", alpha, detail))
    return report


# -- spans of finite sets and span algebras ------------------------------------


@dataclass(frozen=True)
class SetSpan:
    """A concrete span of finite sets: legs are dicts from the apex."""

    left: tuple
    apex: tuple
    right: tuple
    back: tuple     # apex -> left, parallel tuple
    forward: tuple  # apex -> right

    def back_map(self):
        return dict(zip(self.apex, self.back))

    def forward_map(self):
        return dict(zip(self.apex, self.forward))


def set_span(left, apex, right, back, forward):
    left, apex, right = tuple(left), tuple(apex), tuple(right)
    bk = tuple(back[x] if isinstance(back, dict) else back(x) for x in apex)
    fw = tuple(forward[x] if isinstance(forward, dict) else forward(x) for x in apex)
    assert all(b in left for b in bk) and all(f in right for f in fw)
    return SetSpan(left, apex, right, bk, fw)


def compose_set_spans(s, t):
    """Pullback composition: apex is the literal subset of the product,
    ordered lexicographically."""
    if s.right != t.left:
        raise PreconditionFailed("spans do not share the middle set")
    fw, bk = s.forward_map(), t.back_map()
    apex = tuple(
        (u, w)
        for u in s.apex
        for w in t.apex
        if fw[u] == bk[w]
    )
    sback = s.back_map()
    tfor = t.forward_map()
    return SetSpan(
        s.left, apex, t.right,
        tuple(sback[u] for (u, w) in apex),
        tuple(tfor[w] for (u, w) in apex),
    )


def product_set_spans(s, t):
    """Componentwise product of two spans."""
    def prod(a, b):
        return tuple((x, y) for x in a for y in b)

    apex = prod(s.apex, t.apex)
    sb, tb = s.back_map(), t.back_map()
    sf, tf = s.forward_map(), t.forward_map()
    return SetSpan(
        prod(s.left, t.left), apex, prod(s.right, t.right),
        tuple((sb[u], tb[v]) for (u, v) in apex),
        tuple((sf[u], tf[v]) for (u, v) in apex),
    )


def identity_set_span(xs):
    xs = tuple(xs)
    return SetSpan(xs, xs, xs, xs, xs)


def set_span_iso(s, t):
    """Bijection witness apex(s) -> apex(t) commuting with both legs, found by
    matching leg fibers; None when fiber sizes disagree."""
    if (s.left, s.right) != (t.left, t.right):
        return None
    def fibers(sp):
        out = {}
        bk, fw = sp.back_map(), sp.forward_map()
        for a in sp.apex:
            out.setdefault((bk[a], fw[a]), []).append(a)
        return out

    fs, ft = fibers(s), fibers(t)
    if set(fs) != set(ft):
        return None
    witness = {}
    for key in fs:
        if len(fs[key]) != len(ft[key]):
            return None
        for a, b in zip(sorted(fs[key], key=sort_key), sorted(ft[key], key=sort_key)):
            witness[a] = b
    return witness


@dataclass
class SpanAlgebra:
    """Associative algebra structure on X_1 in spans of finite sets."""

    carrier: tuple           # X_1
    multiplication: SetSpan  # X_1 x X_1 <= X_2 => X_1
    unit: SetSpan            # {*} <= X_0 => X_1
    source: TruncSimplicialSet


def span_algebra(X, report=None):
    """The associative algebra in spans attached to a unital 2-Segal set:
    multiplication X_1 x X_1 <= X_2 => X_1 via the outer faces backwards and
    the inner face forwards; unit {*} <= X_0 => X_1 via the degeneracy."""
    if report is None:
        report = check_2segal(X)
    if not report.passed:
        raise PreconditionFailed("2-Segal conditions fail; no span algebra")
    if X.N < 3:
        raise PreconditionFailed("need truncation level >= 3 to verify associativity")
    X1 = X.levels[1]
    mult = set_span(
        tuple((a, b) for a in X1 for b in X1),
        X.levels[2],
        X1,
        {y: (X.face(2, 2)[y], X.face(2, 0)[y]) for y in X.levels[2]},
        dict(X.face(2, 1)),
    )
    unit = set_span(
        ("*",),
        X.levels[0],
        X1,
        {u: "*" for u in X.levels[0]},
        dict(X.degeneracy(0, 0)),
    )
    return SpanAlgebra(tuple(X1), mult, unit, X)


@dataclass
class SpanAlgebraWitnesses:
    assoc_left: SetSpan
    assoc_right: SetSpan
    assoc_iso: dict
    assoc_apex_vs_x3: dict
    unit_left_iso: dict
    unit_right_iso: dict

    @property
    def passed(self):
        return (
            self.assoc_iso is not None
            and self.assoc_apex_vs_x3 is not None
            and self.unit_left_iso is not None
            and self.unit_right_iso is not None
        )


def verify(algebra):
    """Produce associativity and unit isomorphism witnesses by composing the
    structure spans; the associativity apexes are also matched against the
    X_3-based pullback."""
    X = algebra.source
    mult, unit = algebra.multiplication, algebra.unit
    X1 = algebra.carrier
    idsp = identity_set_span(X1)

    left = compose_set_spans(product_set_spans(mult, idsp), mult)
    right = compose_set_spans(product_set_spans(idsp, mult), mult)
    # reassociate the left/right boundary objects so both are spans
    # X1^3 <= . => X1 with left boundary ((a,b),c) vs (a,(b,c)); normalize.
    left_n = SetSpan(
        tuple((a, b, c) for ((a, b), c) in left.left),
        left.apex, left.right,
        tuple((a, b, c) for ((a, b), c) in left.back),
        left.forward,
    )
    right_n = SetSpan(
        tuple((a, b, c) for (a, (b, c)) in right.left),
        right.apex, right.right,
        tuple((a, b, c) for (a, (b, c)) in right.back),
        right.forward,
    )
    assoc_iso = set_span_iso(left_n, right_n)

    # X_3-based pullback span: X_1^3 <= X_3 => X_1
    x3span = set_span(
        left_n.left,
        X.levels[3],
        tuple(X1),
        {
            w: (
                _edge(X, 3, 1, w),
                _edge(X, 3, 2, w),
                _edge(X, 3, 3, w),
            )
            for w in X.levels[3]
        },
        {w: _long_edge(X, 3, w) for w in X.levels[3]},
    )
    assoc_vs_x3 = set_span_iso(left_n, x3span)

    lunit = compose_set_spans(product_set_spans(unit, idsp), mult)
    runit = compose_set_spans(product_set_spans(idsp, unit), mult)
    lunit_n = SetSpan(
        tuple(b for (star, b) in lunit.left), lunit.apex, lunit.right,
        tuple(b for (star, b) in lunit.back), lunit.forward,
    )
    runit_n = SetSpan(
        tuple(a for (a, star) in runit.left), runit.apex, runit.right,
        tuple(a for (a, star) in runit.back), runit.forward,
    )
    unit_left_iso = set_span_iso(lunit_n, idsp)
    unit_right_iso = set_span_iso(runit_n, idsp)
    return SpanAlgebraWitnesses(
        left_n, right_n, assoc_iso, assoc_vs_x3, unit_left_iso, unit_right_iso
    )
