"""Finite and affine Cartan data, root systems, Weyl-group words,
diagram automorphisms and foldings, sigma-Coxeter elements, and twisted
reduced expressions of the longest element."""

from fractions import Fraction


# ---------------------------------------------------------------------------
# type tags
#
# Finite tags: "A3", "D4", "E6", "F4", "G2", ... with the node labelings
# used throughout this package:
#   A_n, B_n, C_n : chain 1 - 2 - ... - n  (double edge at the n end)
#   D_n           : chain 1 - ... - (n-2), with n-1 and n attached to n-2
#   E_n           : chain 1 - 3 - 4 - 5 - 6 (- 7 (- 8)), node 2 attached to 4
#   F4            : chain 1 - 2 => 3 - 4 (3, 4 short)
#   G2            : 1 <= 2  (1 short)
# "F4r" and "G2r" denote the same diagrams with all root lengths swapped
# (arrows reversed); they appear as classical subalgebras of twisted types.
#
# Affine tags: "E6~1", "E7~1", "E8~1", "F4~1", "G2~1", "E6~2", "D4~3".

def parse_type(s):
    """Normalize a type-tag string like 'E6~1' or 'd4' -> canonical tag."""
    t = s.strip().replace("^", "~").replace("(", "~").replace(")", "")
    t = t.upper().replace("_", "")
    if not t or t[0] not in "ABCDEFG":
        raise ValueError("bad type tag: %r" % (s,))
    return t


def _chain_edges(n):
    return [(i, i + 1) for i in range(1, n)]


def _finite_edges(letter, rank):
    """Simply-laced underlying edges with our node labels."""
    if letter in "ABC":
        return _chain_edges(rank)
    if letter == "D":
        if rank < 3:
            raise ValueError("rank too small for D")
        e = _chain_edges(rank - 2)
        e += [(rank - 2, rank - 1), (rank - 2, rank)]
        if rank == 3:
            e = [(1, 2), (1, 3)]
        return e
    if letter == "E":
        if rank not in (6, 7, 8):
            raise ValueError("E rank must be 6,7,8")
        chain = [1, 3, 4, 5, 6, 7, 8][: rank - 1]
        return [(a, b) for a, b in zip(chain, chain[1:])] + [(2, 4)]
    if letter == "F":
        return _chain_edges(4)
    if letter == "G":
        return _chain_edges(2)
    raise ValueError("unsupported letter %r" % letter)


def _finite_sym(letter, rank, reversed_=False):
    """Symmetrizer d_i (integers, min 1): (alpha_i, alpha_i) ~ 2 d_i."""
    d = {i: 1 for i in range(1, rank + 1)}
    if letter == "B":  # node n short
        d = {i: 2 for i in d}
        d[rank] = 1
    elif letter == "C":  # node n long
        d[rank] = 2
    elif letter == "F":  # nodes 3,4 short
        d = {1: 2, 2: 2, 3: 1, 4: 1}
    elif letter == "G":  # node 1 short
        d = {1: 1, 2: 3}
    if reversed_:
        m = max(d.values())
        d = {i: m // d[i] for i in d}
    return d


class CartanDatum:
    """Generalized Cartan matrix with symmetrizer and (for affine types)
    marks, comarks and quantum-parameter data."""

    def __init__(self, tag, nodes, A, d, affine=None):
        self.tag = tag
        self.nodes = tuple(nodes)
        self.A = A            # dict (i,j) -> int
        self.d = dict(d)      # symmetrizer
        self.affine = affine  # dict or None
        # sanity: D.A symmetric
        for i in nodes:
            for j in nodes:
                if d[i] * A[i, j] != d[j] * A[j, i]:
                    raise ValueError("symmetrization failed at (%s,%s)" % (i, j))

    @property
    def rank(self):
        return len(self.nodes)

    def a(self, i, j):
        return self.A[i, j]

    def neighbors(self, i):
        return [j for j in self.nodes if j != i and self.A[i, j] != 0]

    def inner(self, i, j):
        """(alpha_i, alpha_j) normalized so the longest root has length 1."""
        m = max(self.d.values())
        return Fraction(self.d[i] * self.A[i, j], 2 * m)

    def to_json(self):
        return {
            "tag": self.tag,
            "nodes": list(self.nodes),
            "cartan_matrix": [[self.A[i, j] for j in self.nodes] for i in self.nodes],
            "symmetrizer": {str(i): self.d[i] for i in self.nodes},
            "affine": self.affine and {
                k: (dict((str(a), b) for a, b in v.items()) if isinstance(v, dict) else v)
                for k, v in self.affine.items()
            },
        }


def _matrix_from_sym(nodes, edges, d):
    """Cartan matrix from an (undirected) edge list and symmetrizer:
    (alpha_i, alpha_j) = -lcm-ish pairing: for an edge set
    (alpha_i, alpha_j) = -max(d_i, d_j)."""
    A = {}
    for i in nodes:
        for j in nodes:
            A[i, j] = 2 if i == j else 0
    for (i, j) in edges:
        ip = -max(d[i], d[j])
        A[i, j] = ip // d[i]
        A[j, i] = ip // d[j]
    return A


_FINITE_CACHE = {}


def finite_cartan(tag):
    tag = parse_type(tag)
    if tag in _FINITE_CACHE:
        return _FINITE_CACHE[tag]
    rev = tag.endswith("R")
    base = tag[:-1] if rev else tag
    letter, rank = base[0], int(base[1:])
    if letter == "A" and rank < 1 or rank < 1:
        raise ValueError("bad rank")
    nodes = list(range(1, rank + 1))
    edges = _finite_edges(letter, rank)
    d = _finite_sym(letter, rank, reversed_=rev)
    A = _matrix_from_sym(nodes, edges, d)
    cd = CartanDatum(tag, nodes, A, d)
    _FINITE_CACHE[tag] = cd
    return cd


# ---------------------------------------------------------------------------
# affine data
#
# Node labels for the exceptional affine diagrams:
#   E6~1 : 0 - 2 above 4;  chain 1-3-4-5-6
#   E7~1 : 0 - 1 - 3 - 4 - 5 - 6 - 7, 2 above 4
#   E8~1 : 1 - 3 - 4 - 5 - 6 - 7 - 8 - 0, 2 above 4
#   F4~1 : 0 - 1 - 2 => 3 - 4          (3,4 short; q3 = q4 = q^(1/2))
#   E6~2 : 0 - 1 - 2 <= 3 - 4          (0,1,2 short; q3 = q4 = q^2)
#   G2~1 : 0 - 1 => 2 (triple; 2 short, q2 = q^(1/3))
#   D4~3 : 0 - 1 <= 2 (triple; 0,1 short, q2 = q^3)
#
# "qexp" lists the exponent of q_s in q_i; "gamma" is the denominator of the
# q-power lattice (q_s = q^(1/gamma)).  "pstar" is (sign, exponent of q_s).
# "classical" names the finite subdiagram on I0 with its length structure.
# "fold" names the diagram folding whose (folded) AR quivers drive the
# denominator combinatorics, and "dorder" its order d.

def _aff(nodes, edges, d, gamma, marks, comarks, pstar_sign, pstar_qs,
         classical, fold, dorder):
    A = _matrix_from_sym(nodes, edges, d)
    return {
        "nodes": nodes, "edges": edges, "d": d, "A": A, "gamma": gamma,
        "marks": marks, "comarks": comarks,
        "pstar": (pstar_sign, pstar_qs),
        "classical": classical, "fold": fold, "dorder": dorder,
    }


_AFFINE_TABLE = {
    "E6~1": _aff(
        list(range(7)), [(1, 3), (3, 4), (4, 5), (5, 6), (2, 4), (0, 2)],
        {i: 1 for i in range(7)}, 1,
        {0: 1, 1: 1, 2: 2, 3: 2, 4: 3, 5: 2, 6: 1},
        {0: 1, 1: 1, 2: 2, 3: 2, 4: 3, 5: 2, 6: 1},
        1, 12, "E6", ("E6", 2), 1),
    "E7~1": _aff(
        list(range(8)), [(0, 1), (1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (2, 4)],
        {i: 1 for i in range(8)}, 1,
        {0: 1, 1: 2, 2: 2, 3: 3, 4: 4, 5: 3, 6: 2, 7: 1},
        {0: 1, 1: 2, 2: 2, 3: 3, 4: 4, 5: 3, 6: 2, 7: 1},
        1, 18, "E7", None, 1),
    "E8~1": _aff(
        list(range(9)), [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 0), (2, 4)],
        {i: 1 for i in range(9)}, 1,
        {0: 1, 1: 2, 2: 3, 3: 4, 4: 6, 5: 5, 6: 4, 7: 3, 8: 2},
        {0: 1, 1: 2, 2: 3, 3: 4, 4: 6, 5: 5, 6: 4, 7: 3, 8: 2},
        1, 30, "E8", None, 1),
    "F4~1": _aff(
        list(range(5)), [(0, 1), (1, 2), (2, 3), (3, 4)],
        {0: 2, 1: 2, 2: 2, 3: 1, 4: 1}, 2,
        {0: 1, 1: 2, 2: 3, 3: 4, 4: 2},
        {0: 1, 1: 2, 2: 3, 3: 2, 4: 1},
        1, 18, "F4", ("E6", 2), 2),
    "E6~2": _aff(
        list(range(5)), [(0, 1), (1, 2), (2, 3), (3, 4)],
        {0: 1, 1: 1, 2: 1, 3: 2, 4: 2}, 1,
        {0: 1, 1: 2, 2: 3, 3: 2, 4: 1},
        {0: 1, 1: 2, 2: 3, 3: 4, 4: 2},
        -1, 12, "F4R", ("E6", 2), 2),
    "G2~1": _aff(
        list(range(3)), [(0, 1), (1, 2)],
        {0: 3, 1: 3, 2: 1}, 3,
        {0: 1, 1: 2, 2: 3},
        {0: 1, 1: 2, 2: 1},
        1, 12, "G2R", ("D4", 3), 3),
    "D4~3": _aff(
        list(range(3)), [(0, 1), (1, 2)],
        {0: 1, 1: 1, 2: 3}, 1,
        {0: 1, 1: 2, 2: 1},
        {0: 1, 1: 2, 2: 3},
        1, 6, "G2", ("D4", 3), 3),
}


def affine_cartan(tag):
    tag = parse_type(tag)
    if tag not in _AFFINE_TABLE:
        if tag.startswith("A") and tag.endswith("~2"):
            raise NotImplementedError("tag reserved, not implemented: %s" % tag)
        raise ValueError("unsupported affine type %r" % tag)
    t = _AFFINE_TABLE[tag]
    aff = {
        "gamma": t["gamma"],
        "q_exp": {i: t["d"][i] for i in t["nodes"]},
        "marks": t["marks"],
        "comarks": t["comarks"],
        "pstar": t["pstar"],
        "classical": t["classical"],
        "fold": t["fold"],
        "dorder": t["dorder"],
    }
    cd = CartanDatum(tag, t["nodes"], t["A"], t["d"], affine=aff)
    # null vectors: A . marks = 0 and comarks . A = 0
    for i in t["nodes"]:
        assert sum(t["A"][i, j] * t["marks"][j] for j in t["nodes"]) == 0
        assert sum(t["comarks"][j] * t["A"][j, i] for j in t["nodes"]) == 0
    return cd


def classical_cartan(tag):
    """Finite Cartan datum of the classical subalgebra on I0 = I \\ {0},
    with the node labels of the affine diagram."""
    return finite_cartan(affine_cartan(tag).affine["classical"])


# ---------------------------------------------------------------------------
# root systems

class RootSystemData:
    """Positive roots of a finite type as coordinate vectors over Pi."""

    def __init__(self, cartan):
        self.cartan = cartan
        self.nodes = cartan.nodes
        n = len(self.nodes)
        self._idx = {i: k for k, i in enumerate(self.nodes)}
        simples = []
        for i in self.nodes:
            v = [0] * n
            v[self._idx[i]] = 1
            simples.append(tuple(v))
        self.simples = simples
        pos = set(simples)
        frontier = set(simples)
        while frontier:
            new = set()
            for b in frontier:
                for i in self.nodes:
                    c = self.reflect(i, b)
                    if all(x >= 0 for x in c) and c not in pos:
                        new.add(c)
            pos |= new
            frontier = new
        self.positive_roots = sorted(pos, key=lambda r: (sum(r), r))
        self.N = len(self.positive_roots)
        self.theta = max(self.positive_roots, key=self.height)
        self._len2 = {b: self._length2(b) for b in self.positive_roots}

    def alpha(self, i):
        return self.simples[self._idx[i]]

    def coeff(self, beta, i):
        return beta[self._idx[i]]

    def height(self, beta):
        return sum(beta)

    def pairing(self, i, beta):
        """<h_i, beta> for beta in root coordinates."""
        A = self.cartan.A
        return sum(A[i, j] * beta[self._idx[j]] for j in self.nodes)

    def reflect(self, i, beta):
        c = self.pairing(i, beta)
        v = list(beta)
        v[self._idx[i]] -= c
        return tuple(v)

    def act(self, word, beta):
        """Apply s_{i_1} ... s_{i_k} to beta (leftmost reflection last)."""
        for i in reversed(word):
            beta = self.reflect(i, beta)
        return beta

    def _length2(self, beta):
        ip = self.cartan.inner
        tot = Fraction(0)
        for i in self.nodes:
            for j in self.nodes:
                tot += beta[self._idx[i]] * beta[self._idx[j]] * ip(i, j)
        return tot

    def length2(self, beta):
        return self._len2.get(beta) or self._length2(beta)

    def is_positive(self, beta):
        return all(x >= 0 for x in beta) and any(x > 0 for x in beta)

    def word_length(self, word):
        """Coxeter length of the product, via inversion counting."""
        inv = 0
        for b in self.positive_roots:
            if not self.is_positive(self.act(word, b)):
                inv += 1
        return inv

    def is_reduced(self, word):
        return self.word_length(word) == len(word)

    def longest_word(self):
        """Deterministic reduced word for w0 (least available letter first)."""
        word = []
        while len(word) < self.N:
            for i in self.nodes:
                # appending s_i on the right lengthens iff (current w)(alpha_i) > 0
                if self.is_positive(self.act(word, self.alpha(i))):
                    word.append(i)
                    break
            else:
                raise RuntimeError("stuck before reaching w0")
        return tuple(word)

    def to_json(self):
        return {
            "type": self.cartan.tag,
            "N": self.N,
            "positive_roots": [list(r) for r in self.positive_roots],
            "highest_root": list(self.theta),
        }


_RS_CACHE = {}


def build_root_system(tag):
    tag = parse_type(tag)
    if tag not in _RS_CACHE:
        _RS_CACHE[tag] = RootSystemData(finite_cartan(tag))
    return _RS_CACHE[tag]


def star_involution(tag, i):
    """i* with w0(alpha_i) = -alpha_{i*}."""
    rs = build_root_system(tag)
    w0 = rs.longest_word()
    b = rs.act(w0, rs.alpha(i))
    neg = tuple(-x for x in b)
    for j in rs.nodes:
        if neg == rs.alpha(j):
            return j
    raise RuntimeError("w0(alpha_i) is not minus a simple root")


# ---------------------------------------------------------------------------
# diagram automorphisms and foldings

class DiagramAutomorphism:
    """An automorphism sigma of a simply-laced diagram together with the
    orbit map into the folded diagram."""

    def __init__(self, tag, sigma, sbar, folded_tag, order):
        self.tag = parse_type(tag)
        self.sigma = dict(sigma)
        self.sbar = dict(sbar)
        self.folded_tag = folded_tag
        self.order = order
        cd = finite_cartan(self.tag)
        for i in cd.nodes:
            for j in cd.nodes:
                if cd.A[i, j] != cd.A[sigma[i], sigma[j]]:
                    raise ValueError("sigma does not preserve the Cartan matrix")
        self.folded = finite_cartan(folded_tag) if folded_tag else None

    def orbits(self):
        seen, out = set(), []
        for i in sorted(self.sigma):
            if i in seen:
                continue
            orb = [i]
            j = self.sigma[i]
            while j != i:
                orb.append(j)
                j = self.sigma[j]
            seen.update(orb)
            out.append(tuple(orb))
        return out

    def apply_word(self, word):
        return tuple(self.sigma[i] for i in word)


def identity_automorphism(tag):
    cd = finite_cartan(tag)
    ident = {i: i for i in cd.nodes}
    return DiagramAutomorphism(tag, ident, ident, cd.tag, 1)


def folding(tag, order=None):
    """The distinguished folding of a simply-laced finite type:
      A_{2n-1} -> B_n,  D_{n+1} -> C_n,  E6 -> F4,  (D4, order 3) -> G2.
    For D4 with order=2 the C3 folding applies; order=3 gives G2."""
    tag = parse_type(tag)
    letter, rank = tag[0], int(tag[1:])
    if letter == "E" and rank == 6:
        sigma = {1: 6, 6: 1, 3: 5, 5: 3, 4: 4, 2: 2}
        sbar = {1: 1, 6: 1, 3: 2, 5: 2, 4: 3, 2: 4}
        return DiagramAutomorphism(tag, sigma, sbar, "F4", 2)
    if letter == "D" and rank == 4 and order == 3:
        sigma = {1: 3, 3: 4, 4: 1, 2: 2}
        # the fixed (central) node folds to the short G2 node, which is
        # node 2 in the labeling of the affine algebra's classical part
        sbar = {2: 2, 1: 1, 3: 1, 4: 1}
        return DiagramAutomorphism(tag, sigma, sbar, "G2R", 3)
    if letter == "A" and rank % 2 == 1 and rank >= 3:
        n = (rank + 1) // 2
        sigma = {i: rank + 1 - i for i in range(1, rank + 1)}
        sbar = {i: min(i, rank + 1 - i) for i in range(1, rank + 1)}
        return DiagramAutomorphism(tag, sigma, sbar, "B%d" % n, 2)
    if letter == "D":
        n = rank - 1
        sigma = {i: i for i in range(1, rank + 1)}
        sigma[rank - 1], sigma[rank] = rank, rank - 1
        sbar = {i: i for i in range(1, rank)}
        sbar[rank] = rank - 1
        return DiagramAutomorphism(tag, sigma, sbar, "C%d" % n, 2)
    raise ValueError("no distinguished folding for %r (order=%r)" % (tag, order))


def folded_length2(auto):
    """Squared lengths of the folded simple roots (longest = 1), indexed by
    the folded node set."""
    fd = auto.folded
    m = max(fd.d.values())
    return {i: Fraction(fd.d[i], m) for i in fd.nodes}


def sigma_coxeter_word(auto, reps, order=None):
    """The word s_{i_1} ... s_{i_k} of a sigma-Coxeter element, one simple
    reflection per sigma-orbit, in the given order."""
    if order is not None:
        reps = [reps[k] for k in order]
    orbs = auto.orbits()
    of = {}
    for t, orb in enumerate(orbs):
        for i in orb:
            of[i] = t
    seen = set()
    for i in reps:
        if of[i] in seen:
            raise ValueError("two representatives from one orbit: %r" % (reps,))
        seen.add(of[i])
    if len(seen) != len(orbs):
        raise ValueError("need exactly one representative per orbit")
    return tuple(reps)


def twisted_longest_word(cword, auto):
    """Concatenation prod_k (c)^{k sigma} with N/len(c) blocks; must come out
    reduced of length N = |Phi+|."""
    rs = build_root_system(auto.tag)
    l = len(cword)
    if rs.N % l != 0:
        raise ValueError("sigma-Coxeter length %d does not divide N=%d" % (l, rs.N))
    word = []
    block = tuple(cword)
    for _ in range(rs.N // l):
        word.extend(block)
        block = auto.apply_word(block)
    word = tuple(word)
    if not rs.is_reduced(word):
        raise ValueError("twisted concatenation is not reduced; bad input word")
    return word
