"""Colored symmetric sequences with finite support, and two independent
implementations of the composition product.

Convention: compose(F, G) uses F as the outer factor: an element of
(F compose G)(n) is an m-ary F-operation whose m inputs are fed by
G-operations with total arity n.  Components are indexed by keys
(arity, input colors, output color).

``compose_day`` computes each component as a groupoid colimit: tuples
(f: n -> m, middle colors, inner G-elements per fiber, outer F-element)
glued by middle-relabeling zig-zags via union-find.  ``compose_direct``
normalizes instead: it enumerates only block-ordered representatives
(blocks sorted by least element, empty blocks last, residual symmetry
resolved by orbit minimum).  The two must agree up to an equivariant
isomorphism, which ``day_direct_witness`` constructs canonically.
"""

import functools
import itertools

from .errors import BadEquivariance, PreconditionFailed
from .util import perm_as_adjacent_transpositions, sort_key


def _swap_tuple(t, a):
    """Swap 1-based positions a, a+1."""
    t = list(t)
    t[a - 1], t[a] = t[a], t[a - 1]
    return tuple(t)


class SymSeq:
    """Finitely supported functor on the groupoid of colored finite sets.

    components: key -> tuple of element labels (only nonempty keys stored)
    gens: (key, i) -> dict, the action of the adjacent transposition s_i
          from the component at key to the component at the i-swapped key.
    """

    def __init__(self, colors, components, gens, check=True):
        self.colors = tuple(colors)
        self.components = {k: tuple(v) for k, v in components.items() if v}
        self.gens = {k: dict(v) for k, v in gens.items()}
        self.reps = None  # set by the compose routines
        if check:
            self.validate()

    def component(self, key):
        return self.components.get(key, ())

    def max_arity(self):
        return max((k[0] for k in self.components), default=0)

    def keys(self):
        return sorted(self.components, key=sort_key)

    def gen(self, key, i):
        if key not in self.components:
            return {}
        return self.gens[(key, i)]

    def act(self, key, perm):
        """Action of an arbitrary permutation: returns (target key, mapping)."""
        cache = getattr(self, "_act_cache", None)
        if cache is None:
            cache = self._act_cache = {}
        hit = cache.get((key, perm))
        if hit is not None:
            return hit
        n = key[0]
        assert len(perm) == n
        word = perm_as_adjacent_transpositions(perm)
        mapping = {e: e for e in self.component(key)}
        cur = key
        for a in reversed(word):
            g = self.gen(cur, a)
            mapping = {e: g[v] for e, v in mapping.items()}
            cur = (cur[0], _swap_tuple(cur[1], a), cur[2])
        cache[(key, perm)] = (cur, mapping)
        return cur, mapping

    def validate(self):
        for key in self.components:
            n, cs, t = key
            if len(cs) != n or t not in self.colors or any(c not in self.colors for c in cs):
                raise BadEquivariance(f"malformed key {key}")
            for i in range(1, n):
                if (key, i) not in self.gens:
                    raise BadEquivariance(f"missing generator action s_{i} at {key}")
                g = self.gens[(key, i)]
                tgt = (n, _swap_tuple(cs, i), t)
                if set(g) != set(self.components[key]):
                    raise BadEquivariance(f"s_{i} at {key} not total")
                if set(g.values()) != set(self.component(tgt)) or len(g) != len(
                    self.component(tgt)
                ):
                    raise BadEquivariance(f"s_{i} at {key} not a bijection onto {tgt}")
        # Coxeter relations
        for key in self.components:
            n, cs, t = key
            for i in range(1, n):
                tgt = (n, _swap_tuple(cs, i), t)
                g = self.gens[(key, i)]
                gback = self.gens.get((tgt, i), {})
                for e in self.components[key]:
                    if gback.get(g[e]) != e:
                        raise BadEquivariance(f"s_{i}^2 != id at {key}")
            for i in range(1, n):
                for j in range(i + 2, n):
                    if self._word(key, [i, j]) != self._word(key, [j, i]):
                        raise BadEquivariance(f"s_{i} s_{j} commutation fails at {key}")
            for i in range(1, n - 1):
                lhs = self._word(key, [i, i + 1, i])
                rhs = self._word(key, [i + 1, i, i + 1])
                if lhs != rhs:
                    raise BadEquivariance(f"braid relation fails at {key}, i={i}")

    def _word(self, key, word):
        mapping = {e: e for e in self.component(key)}
        cur = key
        for a in word:
            g = self.gen(cur, a)
            mapping = {e: g[v] for e, v in mapping.items()}
            cur = (cur[0], _swap_tuple(cur[1], a), cur[2])
        return cur, mapping

    def total_size(self):
        return sum(len(v) for v in self.components.values())

    def support(self):
        return sorted({k[0] for k in self.components})


def build_symseq(colors, components, gens):
    """Validated construction (BadEquivariance on failure)."""
    return SymSeq(colors, components, gens, check=True)


def one_color(components_by_arity, actions_by_arity=None, color="*"):
    """One-color symmetric sequence: components_by_arity maps n to a list of
    elements; actions_by_arity maps (n, i) to a dict (defaults to identity)."""
    actions_by_arity = actions_by_arity or {}
    comps, gens = {}, {}
    for n, elems in components_by_arity.items():
        if not elems:
            continue
        key = (n, (color,) * n, color)
        comps[key] = tuple(elems)
        for i in range(1, n):
            gens[(key, i)] = dict(actions_by_arity.get((n, i), {e: e for e in elems}))
    return build_symseq((color,), comps, gens)


def symseq_unit(colors):
    """The unit: a singleton in arity 1 at matching colors, empty elsewhere."""
    comps = {(1, (c,), c): ("1",) for c in colors}
    return build_symseq(tuple(colors), comps, {})


def empty_symseq(colors=("*",)):
    return build_symseq(tuple(colors), {}, {})


# -- shared transport helpers -------------------------------------------------


def _fibers(f, m):
    fib = [[] for _ in range(m)]
    for p, j in enumerate(f, start=1):
        fib[j - 1].append(p)
    return [tuple(b) for b in fib]


def _fiber_key(fiber, s_colors, out_color):
    return (len(fiber), tuple(s_colors[p - 1] for p in fiber), out_color)


def _middle_swap(outer, tup, t, a):
    """Transport a tuple (m, f, y, g, h) along the middle relabeling s_a."""
    m, f, y, g, h = tup
    newf = tuple(a + 1 if v == a else (a if v == a + 1 else v) for v in f)
    newy = _swap_tuple(y, a)
    newg = _swap_tuple(g, a)
    newh = outer.gen((m, y, t), a)[h]
    return (m, newf, newy, newg, newh)


def _leaf_swap(inner, tup, s_colors, t, a):
    """Transport a tuple along the input relabeling s_a (leaves a, a+1)."""
    m, f, y, g, h = tup
    j1, j2 = f[a - 1], f[a]
    newf = _swap_tuple(f, a)
    if j1 == j2:
        fiber = _fibers(f, m)[j1 - 1]
        r = fiber.index(a) + 1  # a, a+1 occupy ranks r, r+1
        key = _fiber_key(fiber, s_colors, y[j1 - 1])
        newg = list(g)
        newg[j1 - 1] = inner.gen(key, r)[g[j1 - 1]]
        return (m, newf, y, tuple(newg), h)
    return (m, newf, y, g, h)


# -- tuple enumeration ---------------------------------------------------------


def _ordered_partitions(positions, sizes):
    """Ordered partitions of the position tuple into blocks of given sizes."""
    if not sizes:
        if not positions:
            yield ()
        return
    k = sizes[0]
    rest = sizes[1:]
    for block in itertools.combinations(positions, k):
        bset = set(block)
        remaining = tuple(p for p in positions if p not in bset)
        for tail in _ordered_partitions(remaining, rest):
            yield (block,) + tail


@functools.lru_cache(maxsize=8192)
def _ordered_partitions_of_n(n, sizes):
    return tuple(_ordered_partitions(tuple(range(1, n + 1)), sizes))


@functools.lru_cache(maxsize=8192)
def _canonical_partitions_of_n(n, sizes_available, max_blocks):
    return tuple(
        _canonical_partitions(tuple(range(1, n + 1)), sizes_available, max_blocks)
    )


def _canonical_partitions(positions, sizes_available, max_blocks):
    """Set partitions of positions into nonempty blocks with sizes from
    sizes_available and at most max_blocks blocks, each partition listed with
    blocks ordered by least element."""
    if not positions:
        yield ()
        return
    if max_blocks == 0:
        return
    head = positions[0]
    rest = positions[1:]
    for k in sizes_available:
        if k < 1 or k > len(positions):
            continue
        for others in itertools.combinations(rest, k - 1):
            block = (head,) + others
            oset = set(others)
            remaining = tuple(p for p in rest if p not in oset)
            for tail in _canonical_partitions(remaining, sizes_available, max_blocks - 1):
                yield (block,) + tail


def _blocks_to_f(blocks, n):
    f = [0] * n
    for j, b in enumerate(blocks, start=1):
        for p in b:
            f[p - 1] = j
    return tuple(f)


def _enumerate_tuples(outer, inner, out_key):
    """All factorization tuples (m, f, y, g, h) contributing to the component
    of compose(outer, inner) at out_key — prior to any quotient."""
    n, s_colors, t = out_key
    inner_sizes = sorted({k[0] for k in inner.components})
    out = []
    for (m, y, t2), helts in outer.components.items():
        if t2 != t:
            continue
        for profile in itertools.product(inner_sizes, repeat=m):
            if sum(profile) != n:
                continue
            for blocks in _ordered_partitions_of_n(n, profile):
                gchoices = []
                for j, b in enumerate(blocks):
                    elems = inner.component(_fiber_key(b, s_colors, y[j]))
                    if not elems:
                        gchoices = None
                        break
                    gchoices.append(elems)
                if gchoices is None:
                    continue
                f = _blocks_to_f(blocks, n)
                for g in itertools.product(*gchoices):
                    for h in helts:
                        out.append((m, f, y, g, h))
    return out


def _reachable_out_keys(outer, inner):
    """Output keys that can receive a contribution (color bookkeeping only)."""
    keys = set()
    inner_by_out = {}
    for k in inner.components:
        inner_by_out.setdefault(k[2], []).append(k)
    for (m, y, t) in outer.components:
        per_slot = [inner_by_out.get(y[j], []) for j in range(m)]
        for combo in itertools.product(*per_slot) if m else [()]:
            n = sum(c[0] for c in combo)
            keys.add((n, tuple(c for k2 in combo for c in k2[1]), t))
    # close under adjacent swaps so every color arrangement appears
    frontier = list(keys)
    while frontier:
        k = frontier.pop()
        n = k[0]
        for a in range(1, n):
            k2 = (n, _swap_tuple(k[1], a), k[2])
            if k2 not in keys:
                keys.add(k2)
                frontier.append(k2)
    return sorted(keys, key=sort_key)


# -- the two composition products ---------------------------------------------


class _IntUF:
    __slots__ = ("parent",)

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


def _named(prefix, i):
    return f"{prefix}{i}"


def compose_day(outer, inner):
    """Composition product as a groupoid colimit with union-find over the
    middle-relabeling zig-zags.  Output elements are renamed c0, c1, ... in
    representative order; the representative tuples live in ``.reps``."""
    if outer.colors != inner.colors:
        raise PreconditionFailed("color sets differ")
    comps, gens = {}, {}
    reps_of = {}
    class_name = {}  # out_key -> {tuple: name}
    for out_key in _reachable_out_keys(outer, inner):
        tuples = _enumerate_tuples(outer, inner, out_key)
        if not tuples:
            continue
        t = out_key[2]
        ix = {tup: i for i, tup in enumerate(tuples)}
        uf = _IntUF(len(tuples))
        for tup in tuples:
            m = tup[0]
            i0 = ix[tup]
            for a in range(1, m):
                uf.union(i0, ix[_middle_swap(outer, tup, t, a)])
        groups = {}
        for tup, i in ix.items():
            groups.setdefault(uf.find(i), []).append(tup)
        reps = sorted(min(g) for g in groups.values())
        names = {rep: _named("c", i) for i, rep in enumerate(reps)}
        cmap = {}
        for g in groups.values():
            rep = min(g)
            for tup in g:
                cmap[tup] = names[rep]
        comps[out_key] = tuple(names[rep] for rep in reps)
        class_name[out_key] = cmap
        reps_of[out_key] = {names[rep]: rep for rep in reps}
    result = SymSeq(outer.colors, comps, {}, check=False)
    for out_key, elems in comps.items():
        n, s_colors, t = out_key
        for a in range(1, n):
            tgt_key = (n, _swap_tuple(s_colors, a), t)
            mapping = {}
            for name in elems:
                moved = _leaf_swap(inner, reps_of[out_key][name], s_colors, t, a)
                mapping[name] = class_name[tgt_key][moved]
            gens[(out_key, a)] = mapping
    result.gens = gens
    result.validate()
    result.reps = reps_of
    return result


def _canonical_form(outer, inner, tup, s_colors, t):
    """Normal form of a factorization tuple: nonempty blocks sorted by least
    element and placed first, empty blocks last with their data minimized
    jointly with the outer element over the residual symmetry."""
    m, f, y, g, h = tup
    blocks = _fibers(f, m)
    nonempty = [j for j in range(m) if blocks[j]]
    empty = [j for j in range(m) if not blocks[j]]
    order = sorted(nonempty, key=lambda j: blocks[j][0]) + empty
    perm = [0] * m
    for new, old in enumerate(order, start=1):
        perm[old] = new
    perm = tuple(perm)
    if perm != tuple(range(1, m + 1)):
        _, hmap = outer.act((m, y, t), perm)
        newy = tuple(y[order[j]] for j in range(m))
        newg = tuple(g[order[j]] for j in range(m))
        newf = tuple(perm[v - 1] for v in f)
        newh = hmap[h]
    else:
        newy, newg, newf, newh = y, g, f, h
    k = len(nonempty)
    e = m - k
    if e <= 1:
        return (m, newf, newy, newg, newh)
    best = None
    for tau in itertools.permutations(range(k + 1, m + 1)):
        block_perm = tuple(range(1, k + 1)) + tau
        _, hmap2 = outer.act((m, newy, t), block_perm)
        candy = list(newy)
        candg = list(newg)
        for old_pos, new_pos in zip(range(k + 1, m + 1), tau):
            candy[new_pos - 1] = newy[old_pos - 1]
            candg[new_pos - 1] = newg[old_pos - 1]
        cand = (m, newf, tuple(candy), tuple(candg), hmap2[newh])
        if best is None or cand < best:
            best = cand
    return best


def _enumerate_canonical(outer, inner, out_key):
    """Canonical representatives directly: nonempty blocks sorted by least
    element, empty blocks appended, residual empty-block symmetry reduced to
    the orbit minimum."""
    n, s_colors, t = out_key
    nonempty_sizes = sorted({k[0] for k in inner.components if k[0] >= 1})
    has_nullary = any(k[0] == 0 for k in inner.components)
    positions = tuple(range(1, n + 1))
    out = set()
    for (m, y, t2), helts in outer.components.items():
        if t2 != t:
            continue
        for blocks in _canonical_partitions_of_n(n, tuple(nonempty_sizes), m):
            k = len(blocks)
            e = m - k
            if e and not has_nullary:
                continue
            # nonempty blocks occupy slots 1..k: middle colors must match y on
            # those slots only if we keep y fixed; instead y is part of the
            # data, so only block-color compatibility is constrained.
            gchoices = []
            for j, b in enumerate(blocks):
                elems = inner.component(_fiber_key(b, s_colors, y[j]))
                if not elems:
                    gchoices = None
                    break
                gchoices.append(elems)
            if gchoices is None:
                continue
            empty_choices = []
            ok = True
            for j in range(k, m):
                elems = inner.component((0, (), y[j]))
                if not elems:
                    ok = False
                    break
                empty_choices.append(elems)
            if not ok:
                continue
            f = _blocks_to_f(blocks, n)
            for g_non in itertools.product(*gchoices):
                for g_emp in itertools.product(*empty_choices):
                    for h in helts:
                        tup = (m, f, y, g_non + g_emp, h)
                        if e > 1:
                            tup = _canonical_form(outer, inner, tup, s_colors, t)
                        out.add(tup)
    return sorted(out)


def compose_direct(outer, inner):
    """Composition product via canonical normalization of ordered-partition
    data (the coend over functions n -> m with middle relabelings resolved by
    block sorting)."""
    if outer.colors != inner.colors:
        raise PreconditionFailed("color sets differ")
    comps = {}
    reps_of = {}
    canon_name = {}
    for out_key in _reachable_out_keys(outer, inner):
        reps = _enumerate_canonical(outer, inner, out_key)
        if not reps:
            continue
        names = {rep: _named("c", i) for i, rep in enumerate(reps)}
        comps[out_key] = tuple(names[rep] for rep in reps)
        reps_of[out_key] = {names[rep]: rep for rep in reps}
        canon_name[out_key] = names
    result = SymSeq(outer.colors, comps, {}, check=False)
    gens = {}
    for out_key, elems in comps.items():
        n, s_colors, t = out_key
        for a in range(1, n):
            tgt_key = (n, _swap_tuple(s_colors, a), t)
            mapping = {}
            for name in elems:
                moved = _leaf_swap(inner, reps_of[out_key][name], s_colors, t, a)
                cf = _canonical_form(outer, inner, moved, _swap_tuple(s_colors, a), t)
                mapping[name] = canon_name[tgt_key][cf]
            gens[(out_key, a)] = mapping
    result.gens = gens
    result.validate()
    result.reps = reps_of
    result._canon_name = canon_name
    return result


# -- isomorphism witnesses ------------------------------------------------------


def check_symseq_iso(A, B, witness):
    """Verify a per-key mapping is a bijective, generator-equivariant iso."""
    if set(A.components) != set(B.components):
        return False
    for key in A.components:
        w = witness[key]
        if sorted(map(sort_key, w)) != sorted(map(sort_key, A.component(key))):
            return False
        if sorted(map(sort_key, w.values())) != sorted(map(sort_key, B.component(key))):
            return False
        if len(set(w.values())) != len(w):
            return False
    for key in A.components:
        n, cs, t = key
        for a in range(1, n):
            tgt = (n, _swap_tuple(cs, a), t)
            for e in A.component(key):
                if witness[tgt][A.gen(key, a)[e]] != B.gen(key, a)[witness[key][e]]:
                    return False
    return True


def day_direct_witness(outer, inner, day, direct):
    """Canonical equivariant iso compose_day -> compose_direct: send each
    class representative to its normal form."""
    if set(day.components) != set(direct.components):
        return None
    witness = {}
    for key in day.components:
        w = {}
        for name in day.component(key):
            cf = _canonical_form(outer, inner, day.reps[key][name], key[1], key[2])
            target = direct._canon_name[key].get(cf)
            if target is None:
                return None
            w[name] = target
        witness[key] = w
    return witness if check_symseq_iso(day, direct, witness) else None


def find_symseq_iso(A, B, budget=200_000):
    """Backtracking search for an equivariant isomorphism A ~= B."""
    if set(A.components) != set(B.components):
        return None
    for key in A.components:
        if len(A.component(key)) != len(B.component(key)):
            return None
    keys = sorted(A.components, key=sort_key)
    witness = {k: {} for k in keys}
    budget_left = [budget]

    def propagate(key, e, target):
        stack = [(key, e, target)]
        made = []
        while stack:
            k, x, y = stack.pop()
            cur = witness[k].get(x)
            if cur is not None:
                if cur != y:
                    for kk, xx in made:
                        del witness[kk][xx]
                    return None
                continue
            if y in witness[k].values():
                for kk, xx in made:
                    del witness[kk][xx]
                return None
            witness[k][x] = y
            made.append((k, x))
            n, cs, t = k
            for a in range(1, n):
                tgt = (n, _swap_tuple(cs, a), t)
                stack.append((tgt, A.gen(k, a)[x], B.gen(k, a)[y]))
        return made

    def solve():
        for k in keys:
            for e in A.component(k):
                if e not in witness[k]:
                    for cand in B.component(k):
                        budget_left[0] -= 1
                        if budget_left[0] < 0:
                            return False
                        if cand in witness[k].values():
                            continue
                        made = propagate(k, e, cand)
                        if made is None:
                            continue
                        if solve():
                            return True
                        for kk, xx in made:
                            del witness[kk][xx]
                    return False
        return True

    if solve():
        return witness
    return None


# -- linearization over GF(p) ----------------------------------------------------


def compose_day_dims_vect(outer, inner, p):
    """Dimensions of the composition product of the GF(p)-linearizations,
    computed as honest coinvariants: span the relation vectors e_t - e_{s.t}
    for the middle-relabeling generators and row-reduce."""
    from .presheaf import _rref

    dims = {}
    for out_key in _reachable_out_keys(outer, inner):
        tuples = _enumerate_tuples(outer, inner, out_key)
        if not tuples:
            continue
        ix = {tup: i for i, tup in enumerate(tuples)}
        t = out_key[2]
        rows = []
        for tup in tuples:
            m = tup[0]
            for a in range(1, m):
                other = _middle_swap(outer, tup, t, a)
                if other == tup:
                    continue
                row = [0] * len(tuples)
                row[ix[tup]] = 1
                row[ix[other]] = (row[ix[other]] - 1) % p
                rows.append(row)
        rank = len(_rref(rows, p)[1]) if rows else 0
        dims[out_key] = len(tuples) - rank
    return dims
