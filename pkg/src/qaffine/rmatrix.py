"""Classically-highest-weight analysis of V_x (x) W_y, normalized R-matrix
eigenvalue blocks via pull-down words, denominator extraction, and the
a(z)-function calculus (q-Pochhammer products, fusion, divisibility engine).

The R-matrix r = r_{V,W}(x,y) : V_x (x) W_y -> W_y (x) V_x commutes with the
classical subalgebra, hence is determined by its blocks on the classically
highest-weight vectors of each dominant weight lambda.  With x = 1, y = z and
a pull-down word F satisfying F u = c * u_top on a highest-weight vector u,
the intertwining relation gives the block equation C2 . A = a_top . C1, where
C1/C2 collect pull-down coefficients computed in V_1 (x) W_z and W_z (x) V_1
respectively.  All blocks are normalized by the monic polynomial P clearing
every denominator of C2^{-1} C1; P itself is the denominator d_{V,W}(z).
"""

import re
from collections import Counter
from fractions import Fraction

from .cartan import affine_cartan
from .affmod import (_alpha_col, _i0, BasedModule, DEFAULT_COPRODUCT,
                     dominant_extremal_vector, fundamental_module,
                     is_dominant, nullspace)
from .coefficients import (Cyclo, DenPoly, QPochProduct, QScalar, ZRational,
                           ZVAR, bracket, factor_denpoly, poch_mul,
                           poch_substitute, poch_to_laurent_ratio, qs_pow,
                           zeta_pow, zrational, PLUS, MINUS, OMEGA, OMEGAB)

ONE = zrational(1)


# ---------------------------------------------------------------------------
# operator words
#
# A word is a tuple of letters (kind, node, power) in APPLICATION order (the
# first letter acts first).  Printed operator products act rightmost-first,
# so parse_word reverses the token order.  Powers are divided powers: the
# letter ("f", i, m) applies f_i^m / [m]_i!.

_TOKEN = re.compile(r"([ef])(\d+)(?:\^\(?(\d+)\)?)?$")


def parse_word(text):
    """Parse 'f0 f1 f2^2 f1' (math order, rightmost acts first) into a word
    in application order with divided powers."""
    letters = []
    for tok in text.split():
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError("bad operator token %r" % tok)
        letters.append((m.group(1), int(m.group(2)), int(m.group(3) or 1)))
    return tuple(reversed(letters))


def format_ops(word):
    """Inverse of parse_word (math order string)."""
    toks = []
    for (kind, i, p) in reversed(word):
        toks.append("%s%d" % (kind, i) + ("^%d" % p if p > 1 else ""))
    return " ".join(toks)


def _normalize_runs(word):
    """Merge consecutive identical letters into divided powers."""
    out = []
    for (kind, i, p) in word:
        if out and out[-1][0] == kind and out[-1][1] == i:
            out[-1] = (kind, i, out[-1][2] + p)
        else:
            out.append([kind, i, p])
    return tuple((k, i, p) for (k, i, p) in out)


def _qfact_inv(n, d):
    """1/[n]_i! as a ZRational (d = qs-exponent of q_i)."""
    x = ONE
    for k in range(2, n + 1):
        x = x * zrational(bracket(k, d))
    return ONE / x


def apply_word(T, vec, word):
    """Apply a word (divided powers included) to a sparse vector over T,
    which may be a TensorSpace or a BasedModule."""
    ac = T.ac
    for (kind, i, p) in word:
        for _ in range(p):
            vec = T.apply(i, kind, vec)
            if not vec:
                return {}
        if p > 1:
            s = _qfact_inv(p, ac.affine["q_exp"][i])
            vec = {k: s * v for k, v in vec.items()}
    return vec


# ---------------------------------------------------------------------------
# lazy tensor space
#
# V_a (x) W_b is never materialized: operators act on sparse vectors through
# the coproduct formula, with per-factor operator tables coerced to ZRational
# (and optionally specialized at a rational value of qs) once and cached.

def _spec_zrational(zr, x):
    num, den = zr.eval_qs(x)
    return ZRational({e: QScalar.from_cyclo(c) for e, c in num.items()},
                     {e: QScalar.from_cyclo(c) for e, c in den.items()})


class TensorSpace:
    """Lazy tensor product of two spectrally shifted based modules."""

    def __init__(self, V, a1, W, a2, convention=None, specialize=None):
        if V.tag != W.tag:
            raise ValueError("ambient affine types differ")
        if convention is None:
            convention = DEFAULT_COPRODUCT
        if convention not in ("eK", "Ke"):
            raise ValueError("unknown coproduct convention %r" % convention)
        self.V, self.W = V, W
        self.a = (None if a1 is None else zrational(a1),
                  None if a2 is None else zrational(a2))
        self.ac = V.ac
        self.tag = V.tag
        self.convention = convention
        self.specialize = specialize
        self.dW = W.dim
        self.dim = V.dim * W.dim
        self._ops = {}
        self._ks = {}
        self._wt = None
        self._spaces = None

    # -- indices and weights ------------------------------------------------
    def index(self, kv, kw):
        return kv * self.dW + kw

    def unindex(self, k):
        return divmod(k, self.dW)

    def label(self, k):
        kv, kw = self.unindex(k)
        return "%s(x)%s" % (self.V.labels[kv], self.W.labels[kw])

    def weight(self, k):
        kv, kw = self.unindex(k)
        return tuple(a + b for a, b in zip(self.V.wt[kv], self.W.wt[kw]))

    def weight_spaces(self):
        if self._spaces is None:
            spaces = {}
            for kv in range(self.V.dim):
                wv = self.V.wt[kv]
                base = kv * self.dW
                for kw in range(self.dW):
                    w = tuple(a + b for a, b in zip(wv, self.W.wt[kw]))
                    spaces.setdefault(w, []).append(base + kw)
            self._spaces = spaces
        return self._spaces

    # -- cached per-factor data --------------------------------------------
    def _coerce(self, x):
        z = zrational(x)
        if self.specialize is not None:
            z = _spec_zrational(z, self.specialize)
        return z

    def _fop(self, which, i, kind):
        key = (which, i, kind)
        if key not in self._ops:
            M = self.V if which == 0 else self.W
            a = self.a[which]
            base = M.op(i, kind)
            out = {}
            for c, ents in base.items():
                row = []
                for (r, co) in ents:
                    z = zrational(co)
                    if i == 0 and a is not None:
                        z = z * a if kind == "e" else z / a
                    if self.specialize is not None:
                        z = _spec_zrational(z, self.specialize)
                    row.append((r, z))
                out[c] = row
            self._ops[key] = out
        return self._ops[key]

    def _kvals(self, which, i, inverse):
        key = (which, i, inverse)
        if key not in self._ks:
            M = self.V if which == 0 else self.W
            self._ks[key] = [self._coerce(x)
                             for x in M.k_diag(i, inverse=inverse)]
        return self._ks[key]

    # -- coproduct action ---------------------------------------------------
    def apply(self, i, kind, vec):
        dW = self.dW
        Vop = self._fop(0, i, kind)
        Wop = self._fop(1, i, kind)
        out = {}

        def acc(k, v):
            cur = out.get(k)
            out[k] = v if cur is None else cur + v

        if (self.convention == "eK") == (kind == "e"):
            # twisted on V: op (x) K^-1 + 1 (x) op
            kWinv = self._kvals(1, i, True)
            for k, x in vec.items():
                kv, kw = divmod(k, dW)
                for (r, co) in Vop.get(kv, ()):
                    acc(r * dW + kw, co * kWinv[kw] * x)
                for (r, co) in Wop.get(kw, ()):
                    acc(kv * dW + r, co * x)
        else:
            # twisted on W: op (x) 1 + K (x) op
            kV = self._kvals(0, i, False)
            for k, x in vec.items():
                kv, kw = divmod(k, dW)
                for (r, co) in Vop.get(kv, ()):
                    acc(r * dW + kw, co * x)
                for (r, co) in Wop.get(kw, ()):
                    acc(kv * dW + r, kV[kv] * co * x)
        return {k: v for k, v in out.items() if not v.is_zero()}


# ---------------------------------------------------------------------------
# classically highest-weight vectors on a TensorSpace

class HighestWeightDatum:
    """Dominant classical weight with the ordered kernel basis."""

    __slots__ = ("lam", "vectors")

    def __init__(self, lam, vectors):
        self.lam = tuple(lam)
        self.vectors = list(vectors)

    @property
    def multiplicity(self):
        return len(self.vectors)

    def __repr__(self):
        return "HighestWeightDatum(lam=%r, multiplicity=%d)" % (
            self.lam, self.multiplicity)


def tensor_hw(ts, lam):
    """Joint kernel of the classical raising operators on one weight space."""
    idxs = ts.weight_spaces().get(tuple(lam), [])
    if not idxs:
        return []
    posmap = {k: c for c, k in enumerate(idxs)}
    rows = {}
    for i in _i0(ts.ac):
        for c in idxs:
            img = ts.apply(i, "e", {c: ONE})
            for r, co in img.items():
                rows.setdefault((i, r), {})[posmap[c]] = co
    vecs = nullspace(list(rows.values()), len(idxs))
    return [{idxs[c]: zrational(x) for c, x in sorted(v.items())}
            for v in vecs]


def highest_weight_vectors(T):
    """All classically highest-weight vectors of a tensor space, as a list of
    HighestWeightDatum sorted by decreasing dominant weight."""
    if isinstance(T, BasedModule):
        from .affmod import classical_highest_vectors
        hw = classical_highest_vectors(T)
        out = [HighestWeightDatum(w, [{k: zrational(x) for k, x in v.items()}
                                      for v in vs])
               for w, vs in hw.items()]
        out.sort(key=lambda h: h.lam, reverse=True)
        return out
    spaces = ts_dominant_weights(T)
    out = []
    for w in spaces:
        vecs = tensor_hw(T, w)
        if vecs:
            out.append(HighestWeightDatum(w, vecs))
    return out


def ts_dominant_weights(ts):
    return sorted((w for w in ts.weight_spaces() if is_dominant(w)),
                  reverse=True)


# ---------------------------------------------------------------------------
# weight graph, pull-down word search

def _moves(ac, classical_only=False, kinds=("e", "f")):
    nodes = _i0(ac) if classical_only else sorted(ac.nodes)
    out = []
    for kind in kinds:
        for i in nodes:
            col = _alpha_col(ac, i)
            if kind == "f":
                col = tuple(-x for x in col)
            out.append((kind, i, col))
    return out


def _dist_map(support, moves, target):
    """Minimal number of single operator applications from each weight in the
    support to the target weight (BFS on the weight graph)."""
    dist = {tuple(target): 0}
    frontier = [tuple(target)]
    while frontier:
        new = []
        for w in frontier:
            for (_k, _i, d) in moves:
                prev = tuple(a - b for a, b in zip(w, d))
                if prev in support and prev not in dist:
                    dist[prev] = dist[w] + 1
                    new.append(prev)
        frontier = new
    return dist


class BudgetExhausted(RuntimeError):
    pass


def _iter_pull_words(ts, vecs, src, tgt, moves, dist, budget=200000,
                     max_extra=4):
    """Yield (word, images) for operator words moving src to tgt on the
    weight graph, shortest words first, pruning branches where every tracked
    vector image vanishes.  Words are in application order without
    divided-power merging."""
    src = tuple(src)
    tgt = tuple(tgt)
    base = dist.get(src)
    if base is None:
        raise ValueError("target weight unreachable from %r" % (src,))
    count = [0]
    for limit in range(base, base + max_extra + 1):
        stack = [(src, tuple(vecs), ())]
        while stack:
            wt, vv, word = stack.pop()
            if wt == tgt:
                if len(word) == limit:
                    yield (word, vv)
                if limit == 0:
                    continue
            rem = limit - len(word)
            # deterministic order: reversed so the stack pops in move order
            for (kind, i, d) in reversed(moves):
                nwt = tuple(a + b for a, b in zip(wt, d))
                nd = dist.get(nwt)
                if nd is None or nd + len(word) + 1 > limit:
                    continue
                count[0] += 1
                if count[0] > budget:
                    raise BudgetExhausted(
                        "pull-down search budget exhausted (%d)" % budget)
                nvv = tuple(ts.apply(i, kind, v) for v in vv)
                if all(not v for v in nvv):
                    continue
                stack.append((nwt, nvv, word + ((kind, i, 1),)))
            del rem


def _line_coefficient(vec, top_idx):
    """Coefficient of a vector supported on the extremal line."""
    if not vec:
        return zrational(0)
    for k in vec:
        if k != top_idx:
            raise ValueError("pull-down image not on the extremal line")
    return vec[top_idx]


def pull_down(T, v, word=None, target=None, budget=200000, max_extra=4):
    """Find (or verify) an operator word mapping the highest-weight vector v
    to the extremal line, returning (word, coefficient)."""
    spaces = T.weight_spaces()
    if target is None:
        if hasattr(T, "top_index"):
            target = T.top_index
        else:
            raise ValueError("target index required")
    twt = T.weight(target) if hasattr(T, "weight") else T.wt[target]
    if word is not None:
        if isinstance(word, str):
            word = parse_word(word)
        img = apply_word(T, v, word)
        return word, _line_coefficient(img, target)
    src = None
    for k in v:
        w = T.weight(k) if hasattr(T, "weight") else T.wt[k]
        if src is None:
            src = w
        elif src != w:
            raise ValueError("vector is not weight-homogeneous")
    moves = _moves(T.ac)
    dist = _dist_map(set(spaces), moves, twt)
    for (w, vv) in _iter_pull_words(T, [v], src, twt, moves, dist,
                                    budget=budget, max_extra=max_extra):
        if vv[0]:
            co = _line_coefficient(vv[0], target)
            if not co.is_zero():
                w = _normalize_runs(w)
                # recompute with divided powers so the coefficient matches
                # the returned word
                return w, _line_coefficient(apply_word(T, v, w), target)
    raise ValueError("no pull-down word found within the budget")


# ---------------------------------------------------------------------------
# small exact linear algebra over ZRational

def _is_zero_zr(x):
    return zrational(x).is_zero()


def mat_mul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    return [[sum((A[i][k] * B[k][j] for k in range(m)), zrational(0))
             for j in range(p)] for i in range(n)]


def mat_inv(A):
    n = len(A)
    M = [[zrational(x) for x in row] + [ONE if i == j else zrational(0)
                                        for j in range(n)]
         for i, row in enumerate(A)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not M[r][col].is_zero():
                piv = r
                break
        if piv is None:
            raise ValueError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = ONE / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and not M[r][col].is_zero():
                c = M[r][col]
                M[r] = [x - c * y for x, y in zip(M[r], M[col])]
    return [row[n:] for row in M]


class _RankTracker:
    """Incremental row echelon over the ZRational field."""

    def __init__(self, ncols):
        self.ncols = ncols
        self.rows = []  # (pivot, normalized row)

    @property
    def rank(self):
        return len(self.rows)

    def add(self, row):
        row = [zrational(x) for x in row]
        for (p, brow) in self.rows:
            if not row[p].is_zero():
                c = row[p]
                row = [x - c * y for x, y in zip(row, brow)]
        for p, x in enumerate(row):
            if not x.is_zero():
                inv = ONE / x
                self.rows.append((p, [y * inv for y in row]))
                return True
        return False


# ---------------------------------------------------------------------------
# eigensystem

class REigenSystem:
    """Blocks of r_{V,W}(1, z) on classically highest-weight vectors, in the
    polynomial normalization (top block = the monic denominator P)."""

    def __init__(self, tag, i, j, top_weight, raw, blocks, denominator, unit,
                 words, hw1, hw2, ts1, ts2, top1, top2, specialize):
        self.tag = tag
        self.i = i
        self.j = j
        self.top_weight = top_weight
        self.raw = raw              # lam -> matrix of a^lam / a^top
        self.blocks = blocks        # lam -> P * raw (polynomial entries)
        self.denominator = denominator
        self.unit = unit
        self.words = words
        self.hw1 = hw1
        self.hw2 = hw2
        self.ts1 = ts1
        self.ts2 = ts2
        self.top1 = top1
        self.top2 = top2
        self.specialize = specialize

    def to_json(self):
        return [{
            "lambda": list(lam),
            "multiplicity": len(self.raw[lam]),
            "block": [[str(x) for x in row] for row in self.blocks[lam]],
        } for lam in sorted(self.raw, reverse=True)]


def _entry_droots(entry, specialize, max_exp):
    """Root multiset of the denominator of a reduced ZRational entry."""
    if entry.is_laurent():
        return Counter()
    if specialize is None:
        _, dp = factor_denpoly(ZRational(dict(entry.den)), max_exp=max_exp)
        return Counter(dp.roots)
    poly = {e: _cyclo_const(c) for e, c in entry.den.items()}
    return _cyclo_roots(poly, specialize, max_exp)


def _cyclo_const(c):
    """Constant value of a qs-degree-0 QScalar as a Cyclo."""
    if set(c.num) - {0} or set(c.den) - {0}:
        raise ValueError("specialized scalar is not constant in qs")
    return c.eval_at(0)


def _cyclo_pow(c, n):
    if n < 0:
        c, n = c.inverse(), -n
    out = Cyclo.from_rat(Fraction(1))
    for _ in range(n):
        out = out * c
    return out


def _cyclo_eval(poly, val):
    """Horner evaluation of {exp: Cyclo} at a Cyclo value (exps >= 0)."""
    tot = Cyclo()
    for e in range(max(poly), -1, -1):
        tot = tot * val + poly.get(e, Cyclo())
    return tot


def _cyclo_roots(poly, x, max_exp):
    """Factor a Cyclo-coefficient z-polynomial into roots zeta^k x^m."""
    num = {e: c for e, c in poly.items() if not c.is_zero()}
    if not num:
        raise ValueError("zero polynomial")
    off = min(num)
    num = {e - off: c for e, c in num.items()}
    roots = Counter()
    xc = Cyclo.from_rat(Fraction(x))
    while max(num) > 0:
        found = False
        for absm in range(0, max_exp + 1):
            for m in ((0,) if absm == 0 else (absm, -absm)):
                xm = _cyclo_pow(xc, m)
                for k in range(12):
                    val = zeta_pow(k) * xm
                    if _cyclo_eval(num, val).is_zero():
                        num = _cyclo_synth_div(num, val)
                        roots[(k, m)] += 1
                        found = True
                        break
                if found:
                    break
            if found:
                break
        if not found:
            raise ValueError("no candidate root divides the specialized "
                             "denominator")
    return roots


def _cyclo_synth_div(num, root):
    deg = max(num)
    out = {}
    carry = Cyclo()
    for e in range(deg, -1, -1):
        carry = num.get(e, Cyclo()) + (carry * root if e != deg else Cyclo())
        if e > 0:
            out[e - 1] = carry
        else:
            if not carry.is_zero():
                raise ValueError("not an exact root")
    return {e: c for e, c in out.items() if not c.is_zero()}


def _denpoly_expand(dp, specialize):
    """Monic expansion of a DenPoly root multiset as a ZRational."""
    out = ONE
    for (k, m), e in sorted(dp.roots.items()):
        if specialize is None:
            r = zrational(qs_pow(m, zeta_pow(k)))
        else:
            xm = _cyclo_pow(Cyclo.from_rat(Fraction(specialize)), m)
            r = zrational(QScalar.from_cyclo(zeta_pow(k) * xm))
        lin = ZVAR - r
        for _ in range(e):
            out = out * lin
    return out


def _lr(text):
    """Parse a printed raising word that composes left-to-right (the printed
    e-operators raise by the highest root at the affine node, i.e. they are
    this module's f-operators applied in token order)."""
    return tuple(reversed(parse_word(text)))


# Paper-derived pull-down words for the hand-verified cases, keyed by
# (affine tag, i, j) then by dominant weight.  Plain strings compose
# rightmost-first; _lr(...) entries compose left-to-right.
_E62_STAR = ("f2 f4 f3 f1 f3 f4 f2^2 f1 f3 f2^2 f1 f0 f3 f2^2 f3 f1^2 f4^2 "
             "f3 f2^2 f3 f2 f3 f2 f4 f1^2 f0 f2 f3 f2 f1 f0^3")
_E62_X = "f1 f2 f3 f4 f2 f3 f1 f2^2 f1 f3 f4 f2 f3 f2 f1 f0^3"
_E62_DOT = "f1 f0 f2 f3 f1 f2 " + _E62_STAR
_F4_STAR = ("f3 f4 f2 f1 f3^2 f4 f2 f3 f2 f1 f3^2 f2^2 f1 f3 f4^2 f0 f3 f4 "
            "f2 f3^2 f1 f2^2 f1 f3 f4 f3 f4 f2 f3^2 f4 f2 f3 f1 f2 f3 f4 "
            "f0^2 f1^2 f2^2 f3^3 f2 f3 f1 f0 f2 f1 f0")

HINT_WORDS = {
    ("G2~1", 2, 2): {
        (1, 0): ["f0 f1 f2^2 f1"],
        (0, 1): ["f0 f1 f2"],
        (0, 0): ["f0 f1 f2^2 f1 f0"],
    },
    ("F4~1", 4, 4): {
        (0, 0, 0, 1): [_lr("f4 f3 f2 f1 f0 " + _F4_STAR)],
        (0, 0, 1, 0): [_lr(_F4_STAR)],
        (1, 0, 0, 0): [_lr("f1 f2 f3^2 f2 f1 f0")],
        (0, 0, 0, 0): [_lr("f0 f1 f2 f3^2 f2 f1 f0")],
    },
    ("E6~2", 1, 1): {
        (0, 1, 0, 0): [_lr("f2 f3 f1 f2 " + _E62_STAR)],
        (0, 0, 0, 1): [_lr("f4 f3 f2 f1 f2 f1 f3 f2 f0 " + _E62_STAR)],
        (1, 0, 0, 0): [_lr("f0"), _lr(_E62_X), _lr(_E62_DOT)],
        (0, 0, 0, 0): [_lr("f0 f0"), _lr("f0 " + _E62_X)],
    },
}


def r_eigensystem(tag, i, j=None, hints=None, specialize=None,
                  convention=None, budget=400000, max_extra=4, max_exp=80):
    """Blocks of the R-matrix of V(pi_i)_1 (x) V(pi_j)_z on classically
    highest-weight vectors, and the denominator d_{i,j}(z)."""
    V = fundamental_module(tag, i)
    jj = i if j is None else j
    W = V if jj == i else fundamental_module(tag, jj)
    ts1 = TensorSpace(V, None, W, ZVAR, convention, specialize)
    ts2 = TensorSpace(W, ZVAR, V, None, convention, specialize)
    uV = dominant_extremal_vector(V, i)
    uW = uV if W is V else dominant_extremal_vector(W, jj)
    top1 = ts1.index(uV, uW)
    top2 = ts2.index(uW, uV)
    lam_top = ts1.weight(top1)
    ts1.top_index = top1
    ts2.top_index = top2

    hw1l = highest_weight_vectors(ts1)
    hw1 = {h.lam: h.vectors for h in hw1l}
    if V is W:
        hw2 = hw1
    else:
        hw2 = {h.lam: h.vectors for h in highest_weight_vectors(ts2)}
    for lam, vs in hw1.items():
        if len(hw2.get(lam, [])) != len(vs):
            raise ValueError("highest-weight multiplicities differ between "
                             "the two tensor orders at %r" % (lam,))

    word_hints = dict(HINT_WORDS.get((ts1.tag, i, jj), {}))
    if hints:
        for lam, ws in hints.items():
            word_hints.setdefault(tuple(lam), [])
            word_hints[tuple(lam)] = list(ws) + word_hints[tuple(lam)]

    moves = _moves(ts1.ac)
    support = set(ts1.weight_spaces())
    dist = _dist_map(support, moves, lam_top)

    raw = {lam_top: [[ONE]]}
    words = {lam_top: [()]}
    for lam, vecs in hw1.items():
        if lam == lam_top:
            continue
        m = len(vecs)
        tracker = _RankTracker(m)
        kept = []
        for text in word_hints.get(lam, ()):
            w = parse_word(text) if isinstance(text, str) else tuple(text)
            imgs = [apply_word(ts1, v, w) for v in vecs]
            row = [_line_coefficient(g, top1) for g in imgs]
            if tracker.add(row):
                kept.append((w, row))
            if tracker.rank == m:
                break
        if tracker.rank < m:
            for (w, imgs) in _iter_pull_words(ts1, vecs, lam, lam_top, moves,
                                              dist, budget=budget,
                                              max_extra=max_extra):
                row = [_line_coefficient(g, top1) for g in imgs]
                if tracker.add(row):
                    kept.append((_normalize_runs(w), row))
                if tracker.rank == m:
                    break
        if tracker.rank < m:
            raise ValueError("could not find %d independent pull-down words "
                             "at %r" % (m, lam))
        C1 = [row for (_w, row) in kept]
        C2 = []
        for (w, _row) in kept:
            imgs2 = [apply_word(ts2, v, w) for v in hw2[lam]]
            C2.append([_line_coefficient(g, top2) for g in imgs2])
        raw[lam] = mat_mul(mat_inv(C2), C1)
        words[lam] = [w for (w, _row) in kept]

    droots = Counter()
    for lam, M in raw.items():
        for row in M:
            for entry in row:
                er = _entry_droots(entry, specialize, max_exp)
                for r, e in er.items():
                    droots[r] = max(droots[r], e)
    denominator = DenPoly(droots)
    P = _denpoly_expand(denominator, specialize)
    blocks = {}
    for lam, M in raw.items():
        B = [[P * x for x in row] for row in M]
        for row in B:
            for x in row:
                if not x.is_laurent():
                    raise ValueError("denominator lcm failed to clear a "
                                     "block entry at %r" % (lam,))
        blocks[lam] = B

    hw2l = ([HighestWeightDatum(lam, hw2[lam]) for lam in hw2]
            if V is not W else hw1l)
    return REigenSystem(ts1.tag, i, jj, lam_top, raw, blocks, denominator,
                        None, words, hw1l, hw2l, ts1, ts2, top1, top2,
                        specialize)


def denominator_from_eigensystem(sys):
    """The monic least common denominator of every block (= d_{i,j}(z))."""
    return sys.denominator


# ---------------------------------------------------------------------------
# reconstruction of the normalized R-matrix on arbitrary weight vectors

def _descendant_basis(sys, mu):
    """A basis of the mu weight space of ts1 by classical lowerings of the
    highest-weight vectors, with matching images in ts2.

    Returns (groups, members): groups[g] = (lam, word, vecs1, vecs2) where
    vecs1/vecs2 list the images of every highest-weight vector of lam under
    the word; members = list of (g, t) selected as a basis, in order."""
    ts1, ts2 = sys.ts1, sys.ts2
    mu = tuple(mu)
    idxs = ts1.weight_spaces().get(mu, [])
    if not idxs:
        raise ValueError("empty weight space %r" % (mu,))
    posmap = {k: c for c, k in enumerate(idxs)}
    dim = len(idxs)
    tracker = _RankTracker(dim)
    hw1 = {h.lam: h.vectors for h in sys.hw1}
    hw2 = {h.lam: h.vectors for h in sys.hw2}
    moves = _moves(ts1.ac, classical_only=True, kinds=("f",))
    support = set(ts1.weight_spaces())
    dist = _dist_map(support, moves, mu)
    groups = []
    members = []

    def coords(vec):
        row = [zrational(0)] * dim
        for k, x in vec.items():
            row[posmap[k]] = x
        return row

    for lam in sorted(hw1, reverse=True):
        if tuple(lam) not in dist and tuple(lam) != mu:
            continue
        vecs1 = hw1[lam]
        vecs2 = hw2[lam]
        if tuple(lam) == mu:
            g = len(groups)
            groups.append((lam, (), vecs1, vecs2))
            for t in range(len(vecs1)):
                if tracker.add(coords(vecs1[t])):
                    members.append((g, t))
            continue
        for (w, imgs) in _iter_pull_words(ts1, vecs1, lam, mu, moves, dist,
                                          budget=400000, max_extra=2):
            picked = [t for t in range(len(imgs))
                      if imgs[t] and tracker.add(coords(imgs[t]))]
            if picked:
                w = _normalize_runs(w)
                g = len(groups)
                groups.append((lam, w,
                               list(imgs),
                               [apply_word(ts2, v, w) for v in vecs2]))
                for t in picked:
                    members.append((g, t))
            if tracker.rank == dim:
                break
        if tracker.rank == dim:
            break
    if tracker.rank != dim:
        raise ValueError("could not span the %r weight space by descendants"
                         % (mu,))
    return groups, members, idxs


def rnorm_on_vector(sys, vec, mu=None):
    """Image of a ts1 weight vector under the normalized R-matrix (top block
    = identity), as a sparse ts2 vector."""
    ts1 = sys.ts1
    if mu is None:
        ws = {ts1.weight(k) for k in vec}
        if len(ws) != 1:
            raise ValueError("vector is not weight-homogeneous")
        mu = ws.pop()
    groups, members, idxs = _descendant_basis(sys, mu)
    posmap = {k: c for c, k in enumerate(idxs)}
    dim = len(idxs)
    # solve vec = sum c_b * basis_b
    A = [[zrational(0)] * len(members) for _ in range(dim)]
    for col, (g, t) in enumerate(members):
        for k, x in groups[g][2][t].items():
            A[posmap[k]][col] = A[posmap[k]][col] + x
    b = [zrational(0)] * dim
    for k, x in vec.items():
        b[posmap[k]] = x
    coeffs = _solve_square(A, b)
    out = {}
    for c, (g, t) in zip(coeffs, members):
        if c.is_zero():
            continue
        lam, _w, _v1, v2 = groups[g]
        M = sys.raw[tuple(lam)]
        for s in range(len(M)):
            cs = c * M[s][t]
            if cs.is_zero():
                continue
            for k, x in v2[s].items():
                cur = out.get(k)
                v = cs * x
                out[k] = v if cur is None else cur + v
    return {k: v for k, v in out.items() if not v.is_zero()}


def _solve_square(A, b):
    n = len(A)
    m = len(A[0])
    M = [list(row) + [b[r]] for r, row in enumerate(A)]
    pivots = []
    row = 0
    for col in range(m):
        piv = None
        for r in range(row, n):
            if not M[r][col].is_zero():
                piv = r
                break
        if piv is None:
            continue
        M[row], M[piv] = M[piv], M[row]
        inv = ONE / M[row][col]
        M[row] = [x * inv for x in M[row]]
        for r in range(n):
            if r != row and not M[r][col].is_zero():
                c = M[r][col]
                M[r] = [x - c * y for x, y in zip(M[r], M[row])]
        pivots.append(col)
        row += 1
    for r in range(row, n):
        if not M[r][m].is_zero():
            raise ValueError("inconsistent linear system")
    x = [zrational(0)] * m
    for r, col in enumerate(pivots):
        x[col] = M[r][m]
    return x


# ---------------------------------------------------------------------------
# the extremal 2x2 computation (printed "R^norm(u (x) f_j u)" pairs)

def rnorm_entry_on_pair(tag, i, jnode=None, convention=None, word=None,
                        budget=200000, max_extra=4):
    """Coefficients of R^norm(u (x) f_j u_z) in {u_z (x) f_j u, f_j u_z (x) u}
    for the fundamental module V(pi_i), j a classical node with f_j u != 0."""
    V = fundamental_module(tag, i)
    u = dominant_extremal_vector(V, i)
    if jnode is None:
        jnode = i
    fu = V.apply(jnode, "f", {u: 1})
    if len(fu) != 1:
        raise ValueError("f_%d u is not a basis line" % jnode)
    (widx, kappa), = fu.items()
    kappa = zrational(kappa)
    ts1 = TensorSpace(V, None, V, ZVAR, convention)
    ts2 = TensorSpace(V, ZVAR, V, None, convention)
    top1 = ts1.index(u, u)
    top2 = top1
    ts1.top_index = top1
    ts2.top_index = top2
    a = ts1.index(u, widx)
    b = ts1.index(widx, u)
    mu = ts1.weight(a)
    # kernel vector at mu (the classical structure of ts1 and ts2 coincides)
    hw = tensor_hw(ts1, mu)
    if len(hw) != 1:
        raise ValueError("expected a 1-dimensional kernel at %r" % (mu,))
    v1 = hw[0]
    word, c1 = pull_down(ts1, v1, word=word, target=top1, budget=budget,
                         max_extra=max_extra)
    c2 = _line_coefficient(apply_word(ts2, v1, word), top2)
    s = c1 / c2
    w1 = ts1.apply(jnode, "f", {top1: ONE})
    w2 = ts2.apply(jnode, "f", {top2: ONE})
    # X = u (x) f_j u = alpha * w1 + beta * v1
    det = (w1.get(a, zrational(0)) * v1.get(b, zrational(0))
           - w1.get(b, zrational(0)) * v1.get(a, zrational(0)))
    alpha = (kappa * v1.get(b, zrational(0))) / det
    beta = (w1.get(a, zrational(0)) * zrational(0)
            - w1.get(b, zrational(0)) * kappa) / det
    out = {}
    for k, x in w2.items():
        out[k] = alpha * x
    for k, x in v1.items():
        out[k] = out.get(k, zrational(0)) + beta * s * x
    return (out.get(a, zrational(0)) / kappa,
            out.get(b, zrational(0)) / kappa)


# ---------------------------------------------------------------------------
# a(z) calculus: q-Pochhammer products from denominators, fusion, constraints

def _pstar_of(pstar):
    """(zeta-index, qs-exponent) of p*."""
    if isinstance(pstar, str):
        pstar = affine_cartan(pstar).affine["pstar"]
    sign, m = pstar
    return (0 if sign == 1 else 6), m


def _classify_unit_atoms(raw, infinite, T):
    """Convert Counter{(zeta_k, qs_m): e} of linear factors (1 - zeta^k qs^m z)
    into Pochhammer family atoms; omega-type units must pair up."""
    c = Counter()
    stash = {}
    for (k, m), e in raw.items():
        kk = (k + 6 * m) % 12
        if kk == 0:
            c[(PLUS, m)] += e
        elif kk == 6:
            c[(MINUS, m)] += e
        elif kk in (4, 8):
            stash.setdefault((OMEGA, m), Counter())[kk] += e
        elif kk in (2, 10):
            stash.setdefault((OMEGAB, m), Counter())[kk] += e
        else:
            raise ValueError("unsupported unit zeta^%d in factor list" % k)
    for (fam, m), pair in stash.items():
        vals = set(pair.values())
        if len(pair) != 2 or len(vals) != 1:
            raise ValueError("unpaired cube-root-of-unity factors at qs^%d"
                             % m)
        c[(fam, m)] += vals.pop()
    out = Counter()
    for (fam, a), e in c.items():
        if not e:
            continue
        out[(fam, a)] += e
        if not infinite:
            out[(fam, a + T)] -= e
    return out


def a_from_denominators(d_kl, d_kstar_l, pstar):
    """The q-Pochhammer product for a_{k,l}(z), up to a dropped unit:
    prod over roots y of d_{k*,l} of (p* y z; p*^2)(p* y^{-1} z; p*^2)
    over roots x of d_{k,l} of (x z; p*^2)(p*^2 x^{-1} z; p*^2)."""
    pk, pm = _pstar_of(pstar)
    T = 2 * pm
    raw = Counter()
    for (k, m), e in d_kstar_l.roots.items():
        raw[((pk + k) % 12, pm + m)] += e
        raw[((pk - k) % 12, pm - m)] += e
    for (k, m), e in d_kl.roots.items():
        raw[(k % 12, m)] -= e
        raw[((2 * pk - k) % 12, 2 * pm - m)] -= e
    return QPochProduct(T, _classify_unit_atoms(raw, True, T))


def poch_from_denpoly(T, dp, inverse=False):
    """Finite polynomial prod (z - r) as a Pochhammer ratio, up to units:
    (z - r) == (1 - r^{-1} z) -> [a]/[a+T]-type atom pairs."""
    raw = Counter()
    for (k, m), e in dp.roots.items():
        raw[((-k) % 12, -m)] += (-e if inverse else e)
    return QPochProduct(T, _classify_unit_atoms(raw, False, T))


def poch_from_zrational(T, zr, max_exp=80):
    """A ZRational whose numerator and denominator factor into linear terms
    (z - zeta^k qs^m), re-expressed as a finite Pochhammer ratio (units
    dropped)."""
    num = dict(zr.num)
    den = dict(zr.den)

    def factor(poly):
        off = min(poly)
        shifted = {e - off: c for e, c in poly.items()}
        _u, dp = factor_denpoly(ZRational(shifted), max_exp=max_exp)
        return dp

    x = poch_from_denpoly(T, factor(num))
    return poch_mul(x, poch_from_denpoly(T, factor(den), inverse=True))


def _unit_as_substitution(scalar):
    """Express zeta^k qs^m as sign * (-qs)^m; raises for non-real units."""
    k, m = scalar
    kk = (k + 6 * m) % 12
    if kk == 0:
        return 1, m
    if kk == 6:
        return -1, m
    raise ValueError("substitution unit zeta^%d qs^%d is not +-(-qs)^m"
                     % (k, m))


class DoreyHom:
    """A Dorey-type surjection V(pi_i)_a (x) V(pi_j)_b ->> V(pi_k)_c.

    Spectral scalars are unit monomials (zeta-index, qs-exponent)."""

    def __init__(self, tag, src1, src2, tgt):
        self.tag = tag
        self.src1 = (src1[0], tuple(src1[1]))
        self.src2 = (src2[0], tuple(src2[1]))
        self.tgt = (tgt[0], tuple(tgt[1]))

    def shifts(self):
        """Relative scalars (a/c, b/c) as (zeta-index, qs-exponent)."""
        (_, (k1, m1)) = self.src1
        (_, (k2, m2)) = self.src2
        (_, (k3, m3)) = self.tgt
        return ((k1 - k3) % 12, m1 - m3), ((k2 - k3) % 12, m2 - m3)

    def __repr__(self):
        return "DoreyHom(%s: %r (x) %r ->> %r)" % (
            self.tag, self.src1, self.src2, self.tgt)


def a_via_fusion(h, known, correction=None):
    """a_{W,k}(z) = a_{W,i}((a/c) z) a_{W,j}((b/c) z) * correction for a
    surjection V(pi_i)_a (x) V(pi_j)_b ->> V(pi_k)_c; `known` maps the source
    node indices to the a_{W,.} products."""
    u, v = h.shifts()
    ai = known[h.src1[0]]
    aj = known[h.src2[0]]
    su, ku = _unit_as_substitution(u)
    sv, kv = _unit_as_substitution(v)
    out = poch_mul(poch_substitute(ai, su, ku), poch_substitute(aj, sv, kv))
    if correction is not None:
        if isinstance(correction, ZRational):
            correction = poch_from_zrational(out.T, correction)
        out = poch_mul(out, correction)
    return out


def _table_get(table, a, b):
    if (a, b) in table:
        return table[(a, b)]
    return table[(b, a)]


def dorey_constraint(h, w, d_table, a_table):
    """Lemma-style divisibility report for a surjection h and a test module
    W = V(pi_w):

        d_{W,V'}(uz) d_{W,V''}(vz) a_{W,V}(z)
        -------------------------------------  in k[z^{+-1}].
        d_{W,V}(z) a_{W,V'}(uz) a_{W,V''}(vz)

    Returns (Q, report) with Q the telescoped a-ratio and report the root
    bookkeeping: numerator/denominator multisets and the divisibility
    verdict for d_{W,V} (which may be a candidate being tested)."""
    u, v = h.shifts()
    i, j, k = h.src1[0], h.src2[0], h.tgt[0]
    su, ku = _unit_as_substitution(u)
    sv, kv = _unit_as_substitution(v)
    aWi = poch_substitute(_table_get(a_table, w, i), su, ku)
    aWj = poch_substitute(_table_get(a_table, w, j), sv, kv)
    Q = poch_mul(_table_get(a_table, w, k),
                 poch_mul(aWi, aWj).inverse())
    Qlaurent = poch_to_laurent_ratio(Q)
    dWi = _table_get(d_table, w, i).subs_z_scale(u[0], u[1])
    dWj = _table_get(d_table, w, j).subs_z_scale(v[0], v[1])
    dWk = _table_get(d_table, w, k)
    num = Counter((dWi * dWj).roots)
    den = Counter(dWk.roots)
    qnum = dict(Qlaurent.num)
    qden = dict(Qlaurent.den)

    def add_roots(counter, poly):
        off = min(poly)
        shifted = {e - off: c for e, c in poly.items()}
        _u2, dp = factor_denpoly(ZRational(shifted))
        for r, e in dp.roots.items():
            counter[r] += e

    add_roots(num, qnum)
    add_roots(den, qden)
    slack = Counter(num)
    divides = True
    for r, e in den.items():
        slack[r] -= e
        if slack[r] < 0:
            divides = False
    report = {
        "numerator": DenPoly(num),
        "denominator": DenPoly(den),
        "laurent": Qlaurent,
        "divides": divides,
        "slack": DenPoly(slack) if divides else None,
    }
    return Q, report
