"""The category of chains of finite-set maps with injective, fiberwise-
Cartesian morphisms: truncated enumeration, fiber categories as a (lazy or
materialized) double-category system, the colored variant, and the
product-extension of a symmetric sequence to a presheaf on the arity-1 fiber.

A chain at level n is a pair (sizes, maps): sizes = (a_0..a_n) and maps a
tuple of n image-tuples, maps[i] sending {1..a_i} into {1..a_{i+1}}
(1-based).  Morphisms between chains at the same level are tuples of
injections (u_0..u_n) forming levelwise-Cartesian commuting ladders.
"""

import itertools
from dataclasses import dataclass

from . import fincat
from .errors import PreconditionFailed, SegalFailure
from .simplicial import DeltaMor, DeltaTrunc, delta_id
from .util import sort_key


# -- chains -------------------------------------------------------------------


def compose_maps(f, g):
    """f then g, as image tuples."""
    return tuple(g[v - 1] for v in f)


def all_maps(a, b):
    return list(itertools.product(range(1, b + 1), repeat=a))


def all_injections(a, b):
    return list(itertools.permutations(range(1, b + 1), a))


def chains(n, K):
    """All chains of length n with set sizes <= K, deterministic order."""
    if n == 0:
        return [((a,), ()) for a in range(K + 1)]
    shorter = chains(n - 1, K)
    out = []
    for sizes, maps in shorter:
        last = sizes[-1]
        for b in range(K + 1):
            for f in all_maps(last, b):
                out.append((sizes + (b,), maps + (f,)))
    return out


def chain_action(phi, chain):
    """Reindex a level-n chain along phi: [m] -> [n]: level i of the result is
    level phi(i), with composite maps in between."""
    sizes, maps = chain
    new_sizes = tuple(sizes[v] for v in phi.images)
    new_maps = []
    for i in range(phi.m):
        a, b = phi.images[i], phi.images[i + 1]
        f = tuple(range(1, sizes[a] + 1))
        for k in range(a, b):
            f = compose_maps(f, maps[k])
        new_maps.append(f)
    return (new_sizes, tuple(new_maps))


def chain_fibers(f, b):
    """Fibers of an image-tuple map into {1..b}, as sorted position tuples."""
    fib = [[] for _ in range(b)]
    for p, v in enumerate(f, start=1):
        fib[v - 1].append(p)
    return [tuple(x) for x in fib]


def chain_morphisms(src, tgt):
    """All morphisms src -> tgt between level-n chains: injection ladders
    (u_0..u_n) with commuting, levelwise-Cartesian squares.

    Enumerated top-down: the top injection is free; each lower level then
    decomposes into fiberwise bijections (that is exactly Cartesianness).
    """
    s_sizes, _ = src
    t_sizes, _ = tgt
    n = len(s_sizes) - 1
    out = []
    for u_top in all_injections(s_sizes[n], t_sizes[n]):
        out.extend(_extend_ladder(src, tgt, n, (u_top,)))
    return out


def _extend_ladder(src, tgt, level, suffix):
    """Complete a partial ladder (u_level..u_n given as suffix[0] = u_level)
    downward; returns full ladders (u_0..u_n)."""
    s_sizes, s_maps = src
    t_sizes, t_maps = tgt
    if level == 0:
        return [suffix]
    u_next = suffix[0]
    i = level - 1
    s_fib = chain_fibers(s_maps[i], s_sizes[i + 1])
    t_fib = chain_fibers(t_maps[i], t_sizes[i + 1])
    per_x = []
    for x in range(1, s_sizes[i + 1] + 1):
        sf = s_fib[x - 1]
        tf = t_fib[u_next[x - 1] - 1]
        if len(sf) != len(tf):
            return []
        per_x.append((sf, tf))
    out = []
    choice_lists = [
        [tuple(zip(sf, perm)) for perm in itertools.permutations(tf)]
        for sf, tf in per_x
    ]
    for combo in itertools.product(*choice_lists):
        u = [0] * s_sizes[i]
        for pairs in combo:
            for p, q in pairs:
                u[p - 1] = q
        out.extend(_extend_ladder(src, tgt, i, (tuple(u),) + suffix))
    return out


def morphism_action(phi, ladder, src, tgt):
    """Restrict a ladder along phi: [m] -> [n] (select the phi-indexed levels)."""
    return tuple(ladder[v] for v in phi.images)


def compose_ladders(g, f):
    """Componentwise composition of injection ladders (f then g)."""
    return tuple(compose_maps(fi, gi) for fi, gi in zip(f, g))


def identity_ladder(chain):
    sizes, _ = chain
    return tuple(tuple(range(1, a + 1)) for a in sizes)


# -- the lazy double-category system -------------------------------------------


class DeltaFSystem:
    """Fibers of the chain category over the truncated simplex category,
    presented lazily: levels are enumerated on demand and hom-sets computed
    per pair.  Implements the protocol consumed by the admissibility checker
    and the Day-convolution machinery."""

    def __init__(self, N, K):
        self.N = N
        self.K = K
        self.delta = DeltaTrunc(N)
        self._levels = {}
        self._index = {}
        self.name = f"DeltaF(N={N},K={K})"

    def level_list(self, n):
        if n not in self._levels:
            self._levels[n] = chains(n, self.K)
            self._index[n] = {c: i for i, c in enumerate(self._levels[n])}
        return self._levels[n]

    def level_objects(self, n):
        return range(len(self.level_list(n)))

    def chain_of(self, n, i):
        return self.level_list(n)[i]

    def index_of(self, n, chain):
        self.level_list(n)
        return self._index[n][chain]

    def act_obj(self, phi, x):
        return self.index_of(phi.m, chain_action(phi, self.chain_of(phi.n, x)))

    def act_mor(self, phi, h):
        # morphisms are self-describing: (level, src index, tgt index, ladder)
        n, a, b, ladder = h
        src = chain_action(phi, self.chain_of(n, a))
        tgt = chain_action(phi, self.chain_of(n, b))
        return (
            phi.m,
            self.index_of(phi.m, src),
            self.index_of(phi.m, tgt),
            morphism_action(phi, ladder, src, tgt),
        )

    def hom_level(self, n, a, b):
        src, tgt = self.chain_of(n, a), self.chain_of(n, b)
        return [(n, a, b, lad) for lad in chain_morphisms(src, tgt)]

    def hom_possible(self, n, a, b):
        s_sizes = self.chain_of(n, a)[0]
        t_sizes = self.chain_of(n, b)[0]
        return all(x <= y for x, y in zip(s_sizes, t_sizes))

    def compose_level(self, n, g, f):
        assert f[2] == g[1]
        return (n, f[1], g[2], compose_ladders(g[3], f[3]))

    def identity_level(self, n, x):
        return (n, x, x, identity_ladder(self.chain_of(n, x)))

    def check_segal(self):
        """Object-level Segal comparison by explicit matching: a level-n chain
        corresponds uniquely to its n composable level-1 segments."""
        for n in range(2, self.N + 1):
            seen = {}
            for c in self.level_list(n):
                sizes, maps = c
                segs = tuple(((sizes[i], sizes[i + 1]), (maps[i],)) for i in range(n))
                if segs in seen:
                    raise SegalFailure(n, "segment decomposition not injective")
                seen[segs] = c
            count = 0
            lvl1 = self.level_list(1)
            for combo in itertools.product(lvl1, repeat=n):
                if all(
                    combo[i][0][1] == combo[i + 1][0][0] and True
                    for i in range(n - 1)
                ):
                    # matching endpoint sizes is necessary but gluing also
                    # requires equality of the shared set, which for the
                    # skeleton is just the size
                    count += 1
            if count != len(self.level_list(n)):
                raise SegalFailure(n, f"{count} strings vs {len(self.level_list(n))} chains")
        return True

    def comma_under(self, phi, xi):
        from .simplicial import comma_under as generic

        return generic(self, phi, xi)


def fiber_category(n, K, name=None):
    """Materialized FinCat of level-n chains with sizes <= K (small K only)."""
    objs = chains(n, K)
    ms, mdata, mix = [], [], {}
    for a, src in enumerate(objs):
        for b, tgt in enumerate(objs):
            if any(x > y for x, y in zip(src[0], tgt[0])):
                continue
            for lad in chain_morphisms(src, tgt):
                mix[(a, b, lad)] = len(ms)
                mdata.append((a, b, lad))
                ms.append(fincat.Mor((a, b, lad), a, b))
    identity = [mix[(a, a, identity_ladder(src))] for a, src in enumerate(objs)]
    by_src = {}
    for d in mdata:
        by_src.setdefault(d[0], []).append(d)
    table = {}
    for (a, b, l1) in mdata:
        i1 = mix[(a, b, l1)]
        for (b2, c, l2) in by_src.get(b, ()):
            table[(mix[(b2, c, l2)], i1)] = mix[(a, c, compose_ladders(l2, l1))]
    cat = fincat.FinCat([str(o) for o in objs], ms, identity, table,
                        name=name or f"DF[{n}]K{K}")
    return cat, objs, mdata


def category_object(N, K, name=None):
    """Materialized CategoryObject for the chain fibers (practical for K <= 2)."""
    from .simplicial import CategoryObject, build_category_object

    delta = DeltaTrunc(N)
    levels, objlists, mordata = [], [], []
    for n in range(N + 1):
        cat, objs, mdata = fiber_category(n, K)
        levels.append(cat)
        objlists.append(objs)
        mordata.append(mdata)
    obj_ix = [{c: i for i, c in enumerate(objs)} for objs in objlists]
    mor_ix = [{d: i for i, d in enumerate(md)} for md in mordata]

    def act_of(phi):
        m, n = phi.m, phi.n
        obj_map = [
            obj_ix[m][chain_action(phi, c)] for c in objlists[n]
        ]
        mor_map = []
        for (a, b, lad) in mordata[n]:
            src = chain_action(phi, objlists[n][a])
            tgt = chain_action(phi, objlists[n][b])
            mor_map.append(
                mor_ix[m][(obj_ix[m][src], obj_ix[m][tgt],
                           morphism_action(phi, lad, src, tgt))]
            )
        return fincat.Functor(levels[n], levels[m], obj_map, mor_map,
                              name=str(phi), check=False)

    actions = {phi: act_of(phi) for phi in delta.all()}
    X = build_category_object(delta, levels, actions, name=name or f"DFvee(N={N},K={K})")
    X._chains = objlists
    X._mordata = mordata
    return X


# -- the whole truncated chain category (across levels) -------------------------


def delta_f_morphisms(I, J, phi):
    """Morphisms I -> J over phi: [n] -> [m], where I is a level-n chain and
    J a level-m chain: injection ladders into the phi-restriction of J."""
    restricted = chain_action(phi, J)
    return chain_morphisms(I, restricted)


def build_delta_F(N, K, colors=None):
    """Materialize the truncated chain category (all levels, all monotone
    reindexings); with colors, the colored variant.  Returns an object list
    and a morphism table; sizes grow quickly so keep N, K small.
    """
    delta = DeltaTrunc(N)
    objs = []
    for n in range(N + 1):
        for c in chains(n, K):
            if colors is None:
                objs.append((n, c))
            else:
                sizes = c[0]
                for coloring in itertools.product(
                    *[tuple(itertools.product(colors, repeat=a)) for a in sizes]
                ):
                    objs.append((n, c, coloring))
    morphisms = {}
    for i, src in enumerate(objs):
        for j, tgt in enumerate(objs):
            n, m = src[0], tgt[0]
            homs = []
            for phi in delta.hom(n, m):
                if colors is None:
                    for lad in delta_f_morphisms(src[1], tgt[1], phi):
                        homs.append((phi, lad))
                else:
                    restricted = chain_action(phi, tgt[1])
                    rest_colors = tuple(tgt[2][v] for v in phi.images)
                    for lad in chain_morphisms(src[1], restricted):
                        if all(
                            src[2][lvl][p - 1] == rest_colors[lvl][q - 1]
                            for lvl in range(n + 1)
                            for p, q in enumerate(lad[lvl], start=1)
                        ):
                            homs.append((phi, lad))
            if homs:
                morphisms[(i, j)] = homs
    return objs, morphisms


def c_object(n):
    """The chain (n -> 1) at level 1 (the n-ary corolla)."""
    return ((n, 1), (tuple(1 for _ in range(n)),))


def e_object():
    """The level-0 singleton chain."""
    return ((1,), ())


# -- product extension of a symmetric sequence ----------------------------------


def _induced_perm(src_fiber, tgt_fiber, u):
    """Permutation in canonical coordinates induced by the bijection u
    restricted to src_fiber -> tgt_fiber (both sorted position tuples)."""
    return tuple(tgt_fiber.index(u[p - 1]) + 1 for p in src_fiber)


def extend_symseq(F, X1cat, objs, mordata, color="*"):
    """Extend a one-color symmetric sequence to a presheaf on the materialized
    arity-1 fiber category: the value at a chain (a -> b) is the product of
    the components at its fibers, with morphisms acting by fiber transport.
    """
    from . import presheaf as ps

    def fiber_keys(chain):
        sizes, maps = chain
        fibs = chain_fibers(maps[0], sizes[1])
        return fibs, [(len(fb), (color,) * len(fb), color) for fb in fibs]

    def value_of(x):
        fibs, keys = fiber_keys(objs[x])
        choices = [F.component(k) for k in keys]
        if any(not c for c in choices):
            return ps.set_obj(())
        return ps.set_obj(tuple(itertools.product(*choices)))

    def act_of(midx):
        a, b, lad = mordata[midx]
        va, vb = value_of(a), value_of(b)
        if len(vb.elements) == 0:
            return ps.SetMor(vb, va, ())
        src_fibs, src_keys = fiber_keys(objs[a])
        tgt_fibs, _ = fiber_keys(objs[b])
        u0, u1 = lad[0], lad[1]
        mapping = {}
        for telt in vb.elements:
            parts = []
            for j, sf in enumerate(src_fibs):
                tf = tgt_fibs[u1[j] - 1]
                tau = _induced_perm(sf, tf, u0)
                from .util import perm_inverse

                _, m = F.act(
                    (len(tf), (color,) * len(tf), color), perm_inverse(tau)
                )
                parts.append(m[telt[u1[j] - 1]])
            mapping[telt] = tuple(parts)
        return ps.set_mor(vb, va, mapping)

    return ps.Presheaf(
        X1cat,
        [value_of(x) for x in range(len(objs))],
        [act_of(f) for f in range(len(mordata))],
        check=True,
    )


# -- iso-marked subcommas (the factorization the admissibility proof uses) ------


def factor_chains(g_map, a, b, depth, K):
    """Chains a -> c_1 -> ... -> c_depth -> b with sizes <= K whose composite
    is g_map, as (sizes, maps) pairs."""
    if depth == 0:
        return [((a, b), (g_map,))]
    out = []
    for c in range(K + 1):
        for g1 in all_maps(a, c):
            for tail in factor_chains(None, c, b, depth - 1, K):
                # accept tails whose composite after g1 equals g_map
                comp = g1
                for mp in tail[1]:
                    comp = compose_maps(comp, mp)
                if comp == g_map:
                    out.append(((a,) + tail[0], (g1,) + tail[1]))
    return out


def _factor_chains_any(a, b, depth, K):
    if depth == 0:
        return [((a, b), (f,)) for f in all_maps(a, b)]
    out = []
    for c in range(K + 1):
        for g1 in all_maps(a, c):
            for tail in _factor_chains_any(c, b, depth - 1, K):
                out.append(((a,) + tail[0], (g1,) + tail[1]))
    return out


def iso_comma_objects(K, phi, xi_chain):
    """Objects of the full-subcomma of (xi down X(phi)) on levelwise-bijective
    ladders: pairs (eta, alpha) where alpha: xi -> X(phi)(eta) has all
    components bijective.  eta is assembled from per-level permutations at the
    phi-marked positions and interpolating chains in between."""
    sizes, maps = xi_chain
    m, n = phi.m, phi.n
    perm_lists = [list(itertools.permutations(range(1, s + 1))) for s in sizes]
    results = []

    def build(j, alphas, blocks_acc):
        if j == m:
            # assemble eta: concatenate interpolating blocks
            esizes = [sizes[0]]
            emaps = []
            for bsizes, bmaps in blocks_acc:
                esizes.extend(bsizes[1:])
                emaps.extend(bmaps)
            eta = (tuple(esizes), tuple(emaps))
            # ladder alpha at phi-levels; interpolated levels are not part of
            # the comma morphism (alpha lives in X_m)
            results.append((eta, tuple(alphas)))
            return
        f_j = maps[j] if m >= 1 else None
        depth = phi.images[j + 1] - phi.images[j] - 1 if j + 1 <= m else 0
        a_sz, b_sz = sizes[j], sizes[j + 1]
        for alpha_next in perm_lists[j + 1]:
            # required composite of the block: alpha_next . f_j . alpha_j^{-1}
            inv = [0] * a_sz
            for p, v in enumerate(alphas[j], start=1):
                inv[v - 1] = p
            conj = tuple(alpha_next[f_j[inv[q] - 1] - 1] for q in range(1, a_sz + 1))
            if depth < 0:
                # degenerate block: the restricted map is an identity, so the
                # conjugate of f_j must be one too; no levels are added
                if a_sz == b_sz and conj == tuple(range(1, a_sz + 1)):
                    build(j + 1, alphas + [alpha_next], blocks_acc + [((a_sz,), ())])
                continue
            if depth == 0:
                build(j + 1, alphas + [alpha_next], blocks_acc + [((a_sz, b_sz), (conj,))])
            else:
                for block in factor_chains(conj, a_sz, b_sz, depth, K):
                    build(j + 1, alphas + [alpha_next], blocks_acc + [block])

    if m == 0:
        # xi is a single set; eta interpolations do not exist at n=0
        for alpha0 in perm_lists[0]:
            results.append(((sizes, maps), (alpha0,)))
        return results
    for alpha0 in perm_lists[0]:
        build(0, [alpha0], [])
    return results


def chain_morphisms_fixed(src, tgt, fixed):
    """Ladders src -> tgt whose components at the levels in ``fixed`` are the
    given injections (others free), enumerated like chain_morphisms."""
    s_sizes, s_maps = src
    n = len(s_sizes) - 1
    tops = [fixed[n]] if n in fixed else all_injections(s_sizes[n], tgt[0][n])
    out = []
    for u_top in tops:
        for lad in _extend_ladder(src, tgt, n, (u_top,)):
            if all(lad[l] == u for l, u in fixed.items()):
                out.append(lad)
    return out


def iso_comma_morphisms(K, phi, xi_chain, obj1, obj2):
    """Morphisms (eta, alpha) -> (eta', alpha') in the comma: ladders
    h: eta -> eta' with X(phi)(h) . alpha = alpha'.  The phi-level components
    are forced to alpha'_j . alpha_j^{-1}."""
    eta1, a1 = obj1
    eta2, a2 = obj2
    fixed = {}
    for j, lvl in enumerate(phi.images):
        inv = [0] * len(a1[j])
        for p, v in enumerate(a1[j], start=1):
            inv[v - 1] = p
        forced = tuple(a2[j][inv[q] - 1] for q in range(1, len(a1[j]) + 1))
        if lvl in fixed and fixed[lvl] != forced:
            return []
        fixed[lvl] = forced
    return chain_morphisms_fixed(eta1, eta2, fixed)


def block_data(phi, xi_chain, obj):
    """Images of an iso-comma object under the block projections: for each
    j = 1..m the pair (block chain of eta, endpoint bijections)."""
    eta, alphas = obj
    m = phi.m
    out = []
    for j in range(1, m + 1):
        a, b = phi.images[j - 1], phi.images[j]
        bsizes = eta[0][a : b + 1]
        bmaps = eta[1][a:b]
        out.append(((bsizes, bmaps), (alphas[j - 1], alphas[j])))
    return tuple(out)


def glue_blocks(phi, xi_chain, blocks):
    """Left inverse up to junction conjugation: assemble an iso-comma object
    whose block data is isomorphic to the given blocks.

    Each block (chain_j, (l_j, r_j)) is conjugated so that its endpoint
    bijections match a single shared permutation per junction.
    """
    sizes, maps = xi_chain
    m = phi.m
    alphas = [blocks[0][1][0]]
    esizes = [sizes[0]]
    emaps = []
    for j in range(1, m + 1):
        chain_j, (l_j, r_j) = blocks[j - 1]
        # conjugate the block so its left bijection equals alphas[-1]
        left = alphas[-1]
        inv_l = [0] * len(l_j)
        for p, v in enumerate(l_j, start=1):
            inv_l[v - 1] = p
        conj = tuple(left[inv_l[q] - 1] for q in range(1, len(l_j) + 1))
        bsizes, bmaps = chain_j
        if bmaps:
            first = tuple(bmaps[0][conj.index(q)] for q in range(1, bsizes[0] + 1))
            bmaps = (first,) + bmaps[1:]
        esizes.extend(bsizes[1:])
        emaps.extend(bmaps)
        alphas.append(r_j)
    return ((tuple(esizes), tuple(emaps)), tuple(alphas))
