"""Reduced words, commutation classes, adaptedness to Dynkin quivers,
reflection functors, and root sequences of reduced expressions of w0."""

from .cartan import build_root_system, finite_cartan, star_involution, parse_type


def parse_word(s):
    return tuple(int(x) for x in s.split())


def format_word(word):
    return " ".join(str(i) for i in word)


class ReducedWord:
    """A reduced expression in a fixed finite type."""

    def __init__(self, tag, letters):
        self.tag = parse_type(tag)
        self.letters = tuple(letters)
        rs = build_root_system(self.tag)
        if not rs.is_reduced(self.letters):
            raise ValueError("word is not reduced: %s" % (self.letters,))

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return (self.tag, self.letters) == (other.tag, other.letters)

    def __hash__(self):
        return hash((self.tag, self.letters))

    def __repr__(self):
        return "ReducedWord(%r, %s)" % (self.tag, format_word(self.letters))


def roots_sequence(tag, word):
    """beta_k = s_{i_1} ... s_{i_{k-1}}(alpha_{i_k}); requires a reduced
    word for w0 and returns the total order <_w on Phi+."""
    rs = build_root_system(tag)
    if len(word) != rs.N or not rs.is_reduced(word):
        raise ValueError("need a reduced word for the longest element")
    out = []
    for k in range(len(word)):
        out.append(rs.act(word[:k], rs.alpha(word[k])))
    if len(set(out)) != rs.N:
        raise ValueError("root sequence is not a bijection onto Phi+")
    return out


# ---------------------------------------------------------------------------
# heaps and commutation classes

def _heap_prec(cartan, letters):
    """For each position k, the list of earlier positions j that do not
    commute past k (a_{i_j, i_k} != 0, including equal letters)."""
    A = cartan.A
    prec = []
    for k, ik in enumerate(letters):
        prec.append([j for j in range(k) if A[letters[j], ik] != 0])
    return prec


def _lex_least(cartan, letters):
    """Lexicographically least word reachable by commutation moves: greedy
    smallest-letter choice among currently available heap elements."""
    n = len(letters)
    prec = _heap_prec(cartan, letters)
    npred = [len(p) for p in prec]
    succ = [[] for _ in range(n)]
    for k, ps in enumerate(prec):
        for j in ps:
            succ[j].append(k)
    avail = sorted((letters[k], k) for k in range(n) if npred[k] == 0)
    out = []
    import heapq
    heapq.heapify(avail)
    while avail:
        _, k = heapq.heappop(avail)
        out.append(letters[k])
        for m in succ[k]:
            npred[m] -= 1
            if npred[m] == 0:
                heapq.heappush(avail, (letters[m], m))
    return tuple(out)


class CommutationClass:
    """A commutation class of reduced words, keyed by its canonical
    (lexicographically least) representative."""

    def __init__(self, tag, letters):
        self.tag = parse_type(tag)
        cartan = finite_cartan(self.tag)
        rs = build_root_system(self.tag)
        letters = tuple(letters)
        if not rs.is_reduced(letters):
            raise ValueError("word is not reduced")
        self.rep = _lex_least(cartan, letters)
        self.cartan = cartan
        self.rs = rs

    def __eq__(self, other):
        return (self.tag, self.rep) == (other.tag, other.rep)

    def __hash__(self):
        return hash((self.tag, self.rep))

    def __repr__(self):
        return "CommutationClass(%r, %s)" % (self.tag, format_word(self.rep))

    def is_longest(self):
        return len(self.rep) == self.rs.N

    def members(self, cap=None):
        """Lazy stream of all words in the class (linear extensions of the
        heap).  Raises Truncated when a cap is hit."""
        return class_members_linear_extensions(self, cap)

    def count_members(self):
        """Number of linear extensions of the heap (independent counter by
        memoized antichain recursion)."""
        letters = self.rep
        n = len(letters)
        prec = _heap_prec(self.cartan, letters)
        masks = [0] * n
        for k, ps in enumerate(prec):
            for j in ps:
                masks[k] |= 1 << j
        from functools import lru_cache

        @lru_cache(maxsize=None)
        def count(done):
            if done == (1 << n) - 1:
                return 1
            tot = 0
            for k in range(n):
                if not (done >> k) & 1 and (masks[k] & ~done) == 0:
                    tot += count(done | (1 << k))
            return tot

        return count(0)


class Truncated(Exception):
    """Raised by member enumeration when the cap is exceeded."""


def class_members_linear_extensions(c, cap=None):
    """Generate every word of the commutation class c; each emitted word is a
    linear extension of the heap of the representative."""
    letters = c.rep
    n = len(letters)
    prec = _heap_prec(c.cartan, letters)
    npred = [len(p) for p in prec]
    succ = [[] for _ in range(n)]
    for k, ps in enumerate(prec):
        for j in ps:
            succ[j].append(k)
    emitted = 0
    stack_word = []

    def rec():
        nonlocal emitted
        if len(stack_word) == n:
            emitted += 1
            if cap is not None and emitted > cap:
                raise Truncated()
            yield tuple(letters[k] for k in stack_word)
            return
        for k in range(n):
            if npred[k] == 0:
                npred[k] = -1
                stack_word.append(k)
                for m in succ[k]:
                    npred[m] -= 1
                yield from rec()
                for m in succ[k]:
                    npred[m] += 1
                stack_word.pop()
                npred[k] = 0

    return rec()


# ---------------------------------------------------------------------------
# Dynkin quivers

class QuiverOrientation:
    """An orientation of the edges of a simply-laced Dynkin diagram; arrows
    stored as a frozenset of directed pairs (i, j) meaning i -> j."""

    def __init__(self, tag, arrows):
        self.tag = parse_type(tag)
        cartan = finite_cartan(self.tag)
        edges = {frozenset((i, j)) for i in cartan.nodes
                 for j in cartan.nodes if i < j and cartan.A[i, j] != 0}
        if any(cartan.A[i, j] * cartan.A[j, i] > 1 for i in cartan.nodes
               for j in cartan.nodes if i != j and cartan.A[i, j] != 0):
            raise ValueError("quiver orientations need a simply-laced type")
        got = {frozenset(a) for a in arrows}
        if got != edges:
            raise ValueError("arrows do not orient the Dynkin diagram")
        self.arrows = frozenset(tuple(a) for a in arrows)
        self.cartan = cartan

    def __eq__(self, other):
        return (self.tag, self.arrows) == (other.tag, other.arrows)

    def __hash__(self):
        return hash((self.tag, self.arrows))

    def __repr__(self):
        arr = sorted(self.arrows)
        return "QuiverOrientation(%r, %s)" % (
            self.tag, ", ".join("%s->%s" % a for a in arr))

    def is_sink(self, i):
        return all(a[0] != i for a in self.arrows)

    def sinks(self):
        return [i for i in self.cartan.nodes if self.is_sink(i)]

    def reflect(self, i):
        """s_i Q: reverse every arrow incident with i."""
        arr = {(b, a) if i in (a, b) else (a, b) for (a, b) in self.arrows}
        return QuiverOrientation(self.tag, arr)

    def reversed(self):
        return QuiverOrientation(self.tag, {(b, a) for (a, b) in self.arrows})


def all_orientations(tag):
    cartan = finite_cartan(parse_type(tag))
    edges = sorted(tuple(sorted(e)) for e in
                   {frozenset((i, j)) for i in cartan.nodes
                    for j in cartan.nodes if i < j and cartan.A[i, j] != 0})
    out = []
    for mask in range(1 << len(edges)):
        arrows = set()
        for b, (i, j) in enumerate(edges):
            arrows.add((i, j) if (mask >> b) & 1 else (j, i))
        out.append(QuiverOrientation(cartan.tag, arrows))
    return out


def is_adapted(word, quiver):
    """Sink-popping test: i_k must be a sink of s_{i_{k-1}} ... s_{i_1} Q."""
    q = quiver
    for i in word:
        if not q.is_sink(i):
            return False
        q = q.reflect(i)
    return True


def adapted_quiver(c):
    """The unique Dynkin quiver every word of the class is adapted to, or
    None.  Adaptedness is a class invariant, so one representative is
    tested against each orientation."""
    hits = [q for q in all_orientations(c.tag) if is_adapted(c.rep, q)]
    if len(hits) > 1:
        raise RuntimeError("word adapted to two quivers; broken invariant")
    return hits[0] if hits else None


def quiver_class(quiver):
    """[Q]: the commutation class of the sink-popping word for w0."""
    rs = build_root_system(quiver.tag)
    word, q = [], quiver
    while len(word) < rs.N:
        for i in q.sinks():
            if rs.is_positive(rs.act(tuple(word), rs.alpha(i))):
                word.append(i)
                q = q.reflect(i)
                break
        else:
            raise RuntimeError("no usable sink; not a Dynkin quiver?")
    return CommutationClass(quiver.tag, word)


# ---------------------------------------------------------------------------
# reflection functor

def reflection_functor(c, i):
    """r_i: if some word in c ends with s_i, the class of (s_{i*}, prefix);
    otherwise c itself."""
    letters = c.rep
    n = len(letters)
    prec = _heap_prec(c.cartan, letters)
    succ = [[] for _ in range(n)]
    for k, ps in enumerate(prec):
        for j in ps:
            succ[j].append(k)
    last = None
    for k in range(n):
        if letters[k] == i and not succ[k]:
            last = k
            break
    if last is None:
        return c
    istar = star_involution(c.tag, i)
    new = (istar,) + letters[:last] + letters[last + 1:]
    return CommutationClass(c.tag, new)
