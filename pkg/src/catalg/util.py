"""Small combinatorial helpers shared across modules."""

import itertools


class UnionFind:
    """Union-find over arbitrary hashable keys, path-compressed."""

    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx

    def classes(self):
        """Partition as a dict root -> sorted members (deterministic order)."""
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        groups = {}
        for members in out.values():
            members.sort(key=sort_key)
            groups[members[0]] = members
        return groups


def sort_key(x):
    """Total order on the nested tuples/strings/ints used as element labels."""
    if isinstance(x, tuple):
        return (2, tuple(sort_key(y) for y in x))
    if isinstance(x, (bool, int)):
        return (0, int(x))
    if isinstance(x, str):
        return (1, x)
    if isinstance(x, frozenset):
        return (3, tuple(sorted(sort_key(y) for y in x)))
    return (4, repr(x))


def monotone_maps(m, n):
    """All order-preserving maps [m] -> [n], as image tuples of length m+1."""
    return [
        tuple(c)
        for c in itertools.combinations_with_replacement(range(n + 1), m + 1)
    ]


def injections(a, b):
    """All injective maps {1..a} -> {1..b} as tuples of images (1-based)."""
    return list(itertools.permutations(range(1, b + 1), a))


def permutations(n):
    """All bijections of {1..n} as image tuples."""
    return list(itertools.permutations(range(1, n + 1)))


def perm_compose(p, q):
    """(p . q)(i) = p(q(i)); tuples are 1-based images."""
    return tuple(p[q[i] - 1] for i in range(len(q)))


def perm_inverse(p):
    inv = [0] * len(p)
    for i, v in enumerate(p):
        inv[v - 1] = i + 1
    return tuple(inv)


def perm_identity(n):
    return tuple(range(1, n + 1))


def adjacent_transposition(n, i):
    """The permutation of {1..n} swapping i and i+1 (1 <= i < n)."""
    img = list(range(1, n + 1))
    img[i - 1], img[i] = img[i], img[i - 1]
    return tuple(img)


def perm_as_adjacent_transpositions(p):
    """Decompose p into adjacent transposition indices (bubble sort)."""
    img = list(p)
    n = len(img)
    word = []
    for stop in range(n - 1, 0, -1):
        for i in range(stop):
            if img[i] > img[i + 1]:
                img[i], img[i + 1] = img[i + 1], img[i]
                word.append(i + 1)
    # word sorts p to identity: p = s_{w1} s_{w2} ... applied on the left,
    # so reading in reverse rebuilds p from the identity.
    return list(reversed(word))


def functions(a, b):
    """All maps {1..a} -> {1..b} as image tuples."""
    return list(itertools.product(range(1, b + 1), repeat=a))


def deterministic_rng(seed):
    import random

    return random.Random(seed)
