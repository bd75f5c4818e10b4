"""Exact scalar arithmetic.

The coefficient tower, bottom up:

  * ``Cyclo``   -- the degree-4 cyclotomic field Q(zeta) with zeta a primitive
                   12th root of unity (zeta^4 = zeta^2 - 1).  Houses omega =
                   zeta^4 and sqrt(-1) = zeta^3.
  * ``QScalar`` -- rational functions in one variable ``qs`` over Cyclo,
                   stored as reduced Laurent numerator / polynomial
                   denominator.
  * ``ZRational`` / ``DenPoly`` -- rational functions / monic polynomials in
                   ``z`` over QScalar.
  * ``QPochProduct`` -- formal products of infinite q-Pochhammer symbols
                   ((-qs)^a z; qs^T) and (-(-qs)^a z; qs^T) with integer
                   exponents, supporting telescoping to ZRational.

All values are immutable after construction.
"""

from __future__ import annotations

from collections import Counter
from math import gcd as _igcd

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    from fractions import Fraction as _Q

_Q0 = _Q(0)
_Q1 = _Q(1)


# ---------------------------------------------------------------------------
# Q(zeta_12)
# ---------------------------------------------------------------------------

class Cyclo:
    """Element of Q(zeta) with zeta = exp(i*pi/6); zeta^4 - zeta^2 + 1 = 0.

    Stored as coefficients (c0, c1, c2, c3) of 1, zeta, zeta^2, zeta^3.
    """

    __slots__ = ("c",)

    def __init__(self, c0=0, c1=0, c2=0, c3=0):
        self.c = (_Q(c0), _Q(c1), _Q(c2), _Q(c3))

    @staticmethod
    def _raw(c):
        x = Cyclo.__new__(Cyclo)
        x.c = c
        return x

    @staticmethod
    def from_rat(r):
        return Cyclo._raw((_Q(r), _Q0, _Q0, _Q0))

    def __add__(self, o):
        o = _cyclo(o)
        a, b = self.c, o.c
        return Cyclo._raw((a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]))

    __radd__ = __add__

    def __neg__(self):
        a = self.c
        return Cyclo._raw((-a[0], -a[1], -a[2], -a[3]))

    def __sub__(self, o):
        return self + (-_cyclo(o))

    def __rsub__(self, o):
        return _cyclo(o) + (-self)

    def __mul__(self, o):
        o = _cyclo(o)
        a, b = self.c, o.c
        # convolution up to degree 6
        d = [_Q0] * 7
        for i in range(4):
            ai = a[i]
            if ai:
                for j in range(4):
                    if b[j]:
                        d[i + j] += ai * b[j]
        # reduce: z^4 = z^2 - 1, z^5 = z^3 - z, z^6 = -1
        return Cyclo._raw((d[0] - d[4] - d[6], d[1] - d[5],
                           d[2] + d[4], d[3] + d[5]))

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("Cyclo inverse of zero")
        # extended Euclid in Q[x] modulo x^4 - x^2 + 1
        m = [_Q1, _Q0, -_Q1, _Q0, _Q1]          # minimal polynomial
        a = list(self.c)
        while a and not a[-1]:
            a.pop()
        r0, r1 = m, a
        s0, s1 = [], [_Q1]
        while True:
            q, r = _qpoly_divmod(r0, r1)
            if not r:
                break
            s0, s1 = s1, _qpoly_sub(s0, _qpoly_mul(q, s1))
            r0, r1 = r1, r
        lead = r1[-1]
        inv = [x / lead for x in s1]
        inv += [_Q0] * (4 - len(inv))
        return Cyclo._raw(tuple(inv[:4]))

    def __truediv__(self, o):
        return self * _cyclo(o).inverse()

    def __rtruediv__(self, o):
        return _cyclo(o) * self.inverse()

    def __eq__(self, o):
        try:
            return self.c == _cyclo(o).c
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self.c)

    def is_zero(self):
        return not any(self.c)

    def is_rational(self):
        return not any(self.c[1:])

    def rational(self):
        if not self.is_rational():
            raise ValueError("not rational: %s" % self)
        return self.c[0]

    def conj(self):
        """Complex conjugate: zeta -> zeta^-1 = zeta^11."""
        a = self.c
        # zeta^-1 = zeta^3 - zeta  (from zeta^4 = zeta^2 - 1 divided by zeta... )
        # directly: conj(zeta^k) = zeta^(12-k); expand in the power basis.
        out = Cyclo.from_rat(a[0])
        for k in (1, 2, 3):
            if a[k]:
                out = out + Cyclo.from_rat(a[k]) * _zeta_pow(12 - k)
        return out

    def complex(self):
        import cmath
        z = cmath.exp(1j * cmath.pi / 6)
        return sum(float(c) * z ** k for k, c in enumerate(self.c))

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for k, c in enumerate(self.c):
            if not c:
                continue
            if k == 0:
                parts.append(str(c))
            elif c == 1:
                parts.append("zeta^%d" % k if k > 1 else "zeta")
            else:
                parts.append("%s*zeta^%d" % (c, k) if k > 1 else "%s*zeta" % c)
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


from fractions import Fraction as _Fraction


def _cyclo(x):
    if isinstance(x, Cyclo):
        return x
    if isinstance(x, (int, _Fraction, type(_Q0))):
        return Cyclo.from_rat(x)
    raise TypeError("cannot coerce %r to Cyclo" % (x,))


def _qpoly_divmod(a, b):
    """Division with remainder for dense mpq coefficient lists."""
    a = list(a)
    q = [_Q0] * max(0, len(a) - len(b) + 1)
    inv = 1 / b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] * inv
        if c:
            q[i] = c
            for j, bj in enumerate(b):
                a[i + j] -= c * bj
    while a and not a[-1]:
        a.pop()
    return q, a


def _qpoly_mul(a, b):
    out = [_Q0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _qpoly_sub(a, b):
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else _Q0) - (b[i] if i < len(b) else _Q0)
           for i in range(n)]
    while out and not out[-1]:
        out.pop()
    return out


ZERO_C = Cyclo()
ONE_C = Cyclo(1)
ZETA = Cyclo(0, 1)
SQRT_M1 = Cyclo(0, 0, 0, 1)          # zeta^3
OMEGA = Cyclo(-1, 0, 1)              # zeta^4 = zeta^2 - 1
MINUS_ONE_C = Cyclo(-1)

_ZETA_POWS = None


def _zeta_pow(k):
    global _ZETA_POWS
    if _ZETA_POWS is None:
        _ZETA_POWS = [ONE_C]
        for _ in range(11):
            _ZETA_POWS.append(_ZETA_POWS[-1] * ZETA)
    return _ZETA_POWS[k % 12]


def zeta_pow(k):
    """zeta^k as a Cyclo."""
    return _zeta_pow(k)


def unit_index(u):
    """Return k with u == zeta^k, or None if u is not a 12th root of unity."""
    u = _cyclo(u)
    for k in range(12):
        if u == _zeta_pow(k):
            return k
    return None


# ---------------------------------------------------------------------------
# Laurent polynomials in qs over Cyclo, as {exponent: Cyclo} dicts
# ---------------------------------------------------------------------------

def _pd_trim(d):
    return {k: v for k, v in d.items() if not v.is_zero()}


def _pd_add(a, b):
    out = dict(a)
    for k, v in b.items():
        w = out.get(k)
        out[k] = v if w is None else w + v
    return _pd_trim(out)


def _pd_neg(a):
    return {k: -v for k, v in a.items()}


def _pd_mul(a, b):
    out = {}
    for i, ai in a.items():
        for j, bj in b.items():
            k = i + j
            p = ai * bj
            w = out.get(k)
            out[k] = p if w is None else w + p
    return _pd_trim(out)


def _pd_scale(a, c):
    if c.is_zero():
        return {}
    return _pd_trim({k: v * c for k, v in a.items()})


def _pd_shift(a, s):
    return {k + s: v for k, v in a.items()}


def _pd_divmod(a, b):
    """Polynomial division (non-negative exponents assumed)."""
    if not b:
        raise ZeroDivisionError
    a = dict(a)
    db = max(b.keys())
    lead = b[db].inverse()
    q = {}
    while a:
        da = max(a.keys())
        if da < db:
            break
        c = a[da] * lead
        q[da - db] = c
        for k, v in b.items():
            kk = da - db + k
            w = a.get(kk, ZERO_C) - c * v
            if w.is_zero():
                a.pop(kk, None)
            else:
                a[kk] = w
    return q, a


def _pd_strip(a):
    """Scale a Cyclo-coefficient dict to integer-primitive form (rational
    content removed).  Keeps exponents as-is."""
    if not a:
        return a
    G = 0
    L = 1
    for cy in a.values():
        for comp in cy.c:
            if comp:
                n = int(comp.numerator)
                d = int(comp.denominator)
                G = _igcd(G, n)
                L = L * (d // _igcd(L, d))
    if not G:
        return a
    s = _Q(L, G)
    if s == 1:
        return a
    sc = Cyclo.from_rat(s)
    return {k: v * sc for k, v in a.items()}


def _pd_prem(a, b):
    """Pseudo-remainder of a by b: lead(b)^k * a mod b, fraction-free."""
    db = max(b.keys())
    lb = b[db]
    r = dict(a)
    while r:
        da = max(r.keys())
        if da < db:
            break
        c = r.pop(da)
        new = {k: v * lb for k, v in r.items()}
        for k, v in b.items():
            if k == db:
                continue
            kk = da - db + k
            w = new.get(kk, ZERO_C) - c * v
            if w.is_zero():
                new.pop(kk, None)
            else:
                new[kk] = w
        r = new
    return r


def _pd_gcd(a, b):
    """Monic gcd via primitive PRS (avoids Euclid coefficient blow-up)."""
    a = _pd_strip(_pd_trim(dict(a)))
    b = _pd_strip(_pd_trim(dict(b)))
    if a and b and max(a.keys()) < max(b.keys()):
        a, b = b, a
    while b:
        r = _pd_prem(a, b)
        a, b = b, _pd_strip(_pd_trim(r))
    if a:
        lead = a[max(a.keys())].inverse()
        a = _pd_scale(a, lead)
    return a


def _pd_content_shift(a):
    """Return (shifted-to-min-exp-0 dict, shift)."""
    if not a:
        return {}, 0
    m = min(a.keys())
    return _pd_shift(a, -m), m


def _pd_eval(a, x):
    """Evaluate at a Cyclo value (negative exponents via inverse)."""
    tot = ZERO_C
    xinv = None
    for k, v in a.items():
        if k >= 0:
            tot = tot + v * _cpow(x, k)
        else:
            if xinv is None:
                xinv = x.inverse()
            tot = tot + v * _cpow(xinv, -k)
    return tot


def _cpow(x, n):
    out = ONE_C
    b = x
    while n:
        if n & 1:
            out = out * b
        b = b * b
        n >>= 1
    return out


# ---------------------------------------------------------------------------
# QScalar: rational functions in qs
# ---------------------------------------------------------------------------

class QScalar:
    """Reduced rational function in qs with Cyclo coefficients.

    num is a Laurent dict; den is a polynomial dict with nonzero constant
    term and monic leading coefficient; gcd(num shifted, den) = 1.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None):
        if den is None:
            den = {0: ONE_C}
        self.num, self.den = _qs_reduce(num, den)
        self._hash = None

    @staticmethod
    def _raw(num, den):
        x = QScalar.__new__(QScalar)
        x.num, x.den = num, den
        x._hash = None
        return x

    @staticmethod
    def from_cyclo(c):
        c = _cyclo(c)
        return QScalar._raw({} if c.is_zero() else {0: c}, {0: ONE_C})

    @staticmethod
    def qs_power(k, coeff=None):
        c = ONE_C if coeff is None else _cyclo(coeff)
        return QScalar._raw({} if c.is_zero() else {k: c}, {0: ONE_C})

    def __add__(self, o):
        o = qscalar(o)
        if self.den == o.den:
            return QScalar(_pd_add(self.num, o.num), self.den)
        num = _pd_add(_pd_mul(self.num, o.den), _pd_mul(o.num, self.den))
        return QScalar(num, _pd_mul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        return QScalar._raw(_pd_neg(self.num), self.den)

    def __sub__(self, o):
        return self + (-qscalar(o))

    def __rsub__(self, o):
        return qscalar(o) + (-self)

    def __mul__(self, o):
        o = qscalar(o)
        return QScalar(_pd_mul(self.num, o.num), _pd_mul(self.den, o.den))

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError("QScalar inverse of zero")
        return QScalar(self.den, self.num)

    def __truediv__(self, o):
        return self * qscalar(o).inverse()

    def __rtruediv__(self, o):
        return qscalar(o) * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE_Q
        b = self
        while n:
            if n & 1:
                out = out * b
            b = b * b
            n >>= 1
        return out

    def __eq__(self, o):
        try:
            o = qscalar(o)
        except TypeError:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()),
                               frozenset(self.den.items())))
        return self._hash

    def is_zero(self):
        return not self.num

    def is_one(self):
        return self.num == {0: ONE_C} and self.den == {0: ONE_C}

    def subs_power(self, k):
        """qs -> qs^k for integer k >= 1 (exact)."""
        if k < 1:
            raise ValueError("substitution power must be >= 1")
        return QScalar._raw({e * k: c for e, c in self.num.items()},
                            {e * k: c for e, c in self.den.items()})

    def eval_at(self, x):
        """Evaluate at a Cyclo (or rational) value of qs."""
        x = _cyclo(x)
        den = _pd_eval(self.den, x)
        return _pd_eval(self.num, x) / den

    def as_monomial(self):
        """Return (coeff: Cyclo, exp: int) if this is c*qs^e, else None."""
        if self.den == {0: ONE_C} and len(self.num) == 1:
            (e, c), = self.num.items()
            return c, e
        return None

    def __str__(self):
        n = _poly_str(self.num, "qs")
        if self.den == {0: ONE_C}:
            return n
        return "(%s)/(%s)" % (n, _poly_str(self.den, "qs"))

    __repr__ = __str__

    def to_json(self):
        return {"var": "qs",
                "num": [{"exp": e, "coeff": str(c)}
                        for e, c in sorted(self.num.items())],
                "den": [{"exp": e, "coeff": str(c)}
                        for e, c in sorted(self.den.items())]}


def _qs_reduce(num, den):
    num = _pd_trim(num)
    den = _pd_trim(den)
    if not den:
        raise ZeroDivisionError("zero denominator")
    if not num:
        return {}, {0: ONE_C}
    nsh, noff = _pd_content_shift(num)
    dsh, doff = _pd_content_shift(den)
    if max(nsh.keys()) > 0 and max(dsh.keys()) > 0:
        g = _pd_gcd(nsh, dsh)
        if g and max(g.keys()) > 0:
            nsh, _ = _pd_divmod(nsh, g)
            dsh, _ = _pd_divmod(dsh, g)
    lead = dsh[max(dsh.keys())]
    if lead != ONE_C:
        inv = lead.inverse()
        nsh = _pd_scale(nsh, inv)
        dsh = _pd_scale(dsh, inv)
    return _pd_shift(nsh, noff - doff), dsh


def qscalar(x):
    if isinstance(x, QScalar):
        return x
    if isinstance(x, (Cyclo, int, _Fraction, type(_Q0))):
        return QScalar.from_cyclo(_cyclo(x))
    raise TypeError("cannot coerce %r to QScalar" % (x,))


ZERO_Q = QScalar.from_cyclo(0)
ONE_Q = QScalar.from_cyclo(1)
QS = QScalar.qs_power(1)


def qs_pow(k, coeff=None):
    return QScalar.qs_power(k, coeff)


def bracket(n, scale=1):
    """Gaussian integer [n]_i with q_i = qs^scale, as a QScalar.

    [n] = (q_i^n - q_i^-n)/(q_i - q_i^-1) = sum_{j=0}^{n-1} q_i^(n-1-2j).
    """
    if n < 0:
        return -bracket(-n, scale)
    num = {}
    for j in range(n):
        num[scale * (n - 1 - 2 * j)] = ONE_C
    return QScalar(num) if num else ZERO_Q


def _poly_str(d, var):
    if not d:
        return "0"
    parts = []
    for e in sorted(d.keys()):
        c = d[e]
        cs = str(c)
        if " " in cs:
            cs = "(%s)" % cs
        if e == 0:
            parts.append(cs)
        else:
            head = "" if cs == "1" else ("-" if cs == "-1" else cs + "*")
            parts.append("%s%s^%d" % (head, var, e) if e != 1
                         else "%s%s" % (head, var))
    return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# rational functions in z over QScalar
# ---------------------------------------------------------------------------

def _zd_trim(d):
    return {k: v for k, v in d.items() if not v.is_zero()}


def _zd_add(a, b):
    out = dict(a)
    for k, v in b.items():
        w = out.get(k)
        out[k] = v if w is None else w + v
    return _zd_trim(out)


def _zd_mul(a, b):
    out = {}
    for i, ai in a.items():
        for j, bj in b.items():
            k = i + j
            p = ai * bj
            w = out.get(k)
            out[k] = p if w is None else w + p
    return _zd_trim(out)


def _zd_scale(a, c):
    if c.is_zero():
        return {}
    return _zd_trim({k: v * c for k, v in a.items()})


def _zd_divmod(a, b):
    if not b:
        raise ZeroDivisionError
    a = dict(a)
    db = max(b.keys())
    inv = b[db].inverse()
    q = {}
    while a:
        da = max(a.keys())
        if da < db:
            break
        c = a[da] * inv
        q[da - db] = c
        for k, v in b.items():
            kk = da - db + k
            w = a.get(kk, ZERO_Q) - c * v
            if w.is_zero():
                a.pop(kk, None)
            else:
                a[kk] = w
    return q, a


def _zq_clear(a):
    """Clear qs-denominators from a {zexp: QScalar} dict.

    Returns {zexp: qs-poly dict} equal to the input times a unit of the form
    (qs-poly) * qs^m; exponents are normalized to be non-negative with at
    least one coefficient having a nonzero constant term.
    """
    L = {0: ONE_C}
    for q in a.values():
        g = _pd_gcd(L, q.den)
        quo, _ = _pd_divmod(q.den, g)
        L = _pd_mul(L, quo)
    out = {}
    for k, q in a.items():
        quo, _ = _pd_divmod(L, q.den)
        out[k] = _pd_mul(q.num, quo)
    m = min(min(d.keys()) for d in out.values())
    if m:
        out = {k: _pd_shift(d, -m) for k, d in out.items()}
    return out


def _zp_strip(A):
    """Remove the qs-content (monic gcd of coefficients) and the global
    rational content from a {zexp: qs-poly dict} polynomial."""
    A = {k: v for k, v in ((k, _pd_trim(v)) for k, v in A.items()) if v}
    if not A:
        return A
    c = None
    for v in A.values():
        c = dict(v) if c is None else _pd_gcd(c, v)
        if c and max(c.keys()) == 0:
            c = None
            break
    if c and max(c.keys()) > 0:
        A = {k: _pd_divmod(v, c)[0] for k, v in A.items()}
    G = 0
    L = 1
    for v in A.values():
        for cy in v.values():
            for comp in cy.c:
                if comp:
                    n = int(comp.numerator)
                    d = int(comp.denominator)
                    G = _igcd(G, n)
                    L = L * (d // _igcd(L, d))
    if G:
        s = _Q(L, G)
        if s != 1:
            sc = Cyclo.from_rat(s)
            A = {k: {e: cv * sc for e, cv in v.items()}
                 for k, v in A.items()}
    return A


def _zp_prem(A, B):
    """Pseudo-remainder in z for {zexp: qs-poly dict} polynomials."""
    dB = max(B.keys())
    lb = B[dB]
    R = dict(A)
    while R:
        dA = max(R.keys())
        if dA < dB:
            break
        c = R.pop(dA)
        new = {k: _pd_mul(v, lb) for k, v in R.items()}
        for k, v in B.items():
            if k == dB:
                continue
            kk = dA - dB + k
            w = _pd_add(new.get(kk, {}), _pd_neg(_pd_mul(c, v)))
            if w:
                new[kk] = w
            else:
                new.pop(kk, None)
        R = new
    return R


_ZP_SPEC_POINTS = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


def _zp_coprime(A, B):
    """Certify coprimality in z of two cleared polynomials by specializing qs.

    Sound one-way test: if it returns True the polynomials are coprime over
    the qs rational-function field (a nontrivial common factor would survive
    specialization at any point where both leading z-coefficients are
    nonzero).  False means "possibly not coprime".
    """
    la = A[max(A.keys())]
    lb = B[max(B.keys())]
    for pt in _ZP_SPEC_POINTS:
        x = Cyclo.from_rat(pt)
        if _pd_eval(la, x).is_zero() or _pd_eval(lb, x).is_zero():
            continue
        As = _pd_trim({k: _pd_eval(v, x) for k, v in A.items()})
        Bs = _pd_trim({k: _pd_eval(v, x) for k, v in B.items()})
        g = _pd_gcd(As, Bs)
        return bool(g) and max(g.keys()) == 0
    return False


def _zp_gcd(A, B):
    """Primitive-PRS gcd in z of cleared polynomials; returns a primitive
    {zexp: qs-poly dict} representative."""
    A = _zp_strip(A)
    B = _zp_strip(B)
    if A and B and max(A.keys()) < max(B.keys()):
        A, B = B, A
    while B:
        R = _zp_prem(A, B)
        A, B = B, _zp_strip(R)
    return A


def _zd_gcd(a, b):
    """Monic gcd in z of two {zexp: QScalar} polynomials."""
    A = _zq_clear(a)
    B = _zq_clear(b)
    if _zp_coprime(A, B):
        return {0: ONE_Q}
    G = _zp_gcd(A, B)
    g = {k: QScalar(v) for k, v in G.items()}
    dg = max(g.keys())
    if not g[dg].is_one():
        inv = g[dg].inverse()
        g = {k: v * inv for k, v in g.items()}
    return g


class ZRational:
    """Reduced rational function in z over the qs rational-function field."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None):
        if den is None:
            den = {0: ONE_Q}
        num = _zd_trim({k: qscalar(v) for k, v in num.items()})
        den = _zd_trim({k: qscalar(v) for k, v in den.items()})
        if not den:
            raise ZeroDivisionError("zero denominator in z")
        if not num:
            self.num, self.den = {}, {0: ONE_Q}
        else:
            noff = min(num.keys())
            doff = min(den.keys())
            nsh = {k - noff: v for k, v in num.items()}
            dsh = {k - doff: v for k, v in den.items()}
            if max(nsh.keys()) > 0 and max(dsh.keys()) > 0:
                g = _zd_gcd(nsh, dsh)
                if g and max(g.keys()) > 0:
                    nsh, _ = _zd_divmod(nsh, g)
                    dsh, _ = _zd_divmod(dsh, g)
            lead = dsh[max(dsh.keys())]
            if not lead.is_one():
                inv = lead.inverse()
                nsh = _zd_scale(nsh, inv)
                dsh = _zd_scale(dsh, inv)
            self.num = {k + noff - doff: v for k, v in nsh.items()}
            self.den = dsh
        self._hash = None

    @staticmethod
    def from_qscalar(c):
        c = qscalar(c)
        x = ZRational.__new__(ZRational)
        x.num = {} if c.is_zero() else {0: c}
        x.den = {0: ONE_Q}
        x._hash = None
        return x

    @staticmethod
    def z_power(k, coeff=None):
        c = ONE_Q if coeff is None else qscalar(coeff)
        x = ZRational.__new__(ZRational)
        x.num = {} if c.is_zero() else {k: c}
        x.den = {0: ONE_Q}
        x._hash = None
        return x

    def __add__(self, o):
        o = zrational(o)
        num = _zd_add(_zd_mul(self.num, o.den), _zd_mul(o.num, self.den))
        return ZRational(num, _zd_mul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        x = ZRational.__new__(ZRational)
        x.num = {k: -v for k, v in self.num.items()}
        x.den = self.den
        x._hash = None
        return x

    def __sub__(self, o):
        return self + (-zrational(o))

    def __rsub__(self, o):
        return zrational(o) + (-self)

    def __mul__(self, o):
        o = zrational(o)
        return ZRational(_zd_mul(self.num, o.num), _zd_mul(self.den, o.den))

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError("ZRational inverse of zero")
        return ZRational(self.den, self.num)

    def __truediv__(self, o):
        return self * zrational(o).inverse()

    def __rtruediv__(self, o):
        return zrational(o) * self.inverse()

    def __eq__(self, o):
        try:
            o = zrational(o)
        except TypeError:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()),
                               frozenset(self.den.items())))
        return self._hash

    def is_zero(self):
        return not self.num

    def is_polynomial(self):
        return self.den == {0: ONE_Q} and all(k >= 0 for k in self.num)

    def is_laurent(self):
        return self.den == {0: ONE_Q}

    def subs_z(self, c, k=0):
        """z -> c * z^(+1 or -1) ... here: z -> c*z (c a QScalar); k shifts
        are handled by callers; only linear substitution is needed."""
        c = qscalar(c)
        num = {e: v * c ** e for e, v in self.num.items()}
        den = {e: v * c ** e for e, v in self.den.items()}
        return ZRational(num, den)

    def subs_z_inv(self, c):
        """z -> c / z."""
        c = qscalar(c)
        num = {-e: v * c ** e for e, v in self.num.items()}
        den = {-e: v * c ** e for e, v in self.den.items()}
        return ZRational(num, den)

    def eval_z(self, x):
        """Evaluate at z = x (QScalar); returns QScalar."""
        x = qscalar(x)
        n = ZERO_Q
        d = ZERO_Q
        for e, v in self.num.items():
            n = n + v * x ** e
        for e, v in self.den.items():
            d = d + v * x ** e
        return n / d

    def eval_qs(self, q):
        """Specialize qs -> rational/Cyclo value; returns dict pair of
        Cyclo-coefficient z-polynomials (num, den)."""
        q = _cyclo(q)
        num = {e: v.eval_at(q) for e, v in self.num.items()}
        den = {e: v.eval_at(q) for e, v in self.den.items()}
        return _pd_trim(num), _pd_trim(den)

    def __str__(self):
        n = _zpoly_str(self.num)
        if self.den == {0: ONE_Q}:
            return n
        return "(%s)/(%s)" % (n, _zpoly_str(self.den))

    __repr__ = __str__

    def to_json(self):
        return {"var": "z",
                "num": [{"exp": e, "coeff": str(c)}
                        for e, c in sorted(self.num.items())],
                "den": [{"exp": e, "coeff": str(c)}
                        for e, c in sorted(self.den.items())]}


def _zpoly_str(d):
    if not d:
        return "0"
    parts = []
    for e in sorted(d.keys()):
        c = d[e]
        cs = str(c)
        if " " in cs or "/" in cs:
            cs = "(%s)" % cs
        if e == 0:
            parts.append(cs)
        else:
            head = "" if cs == "1" else ("-" if cs == "-1" else cs + "*")
            parts.append("%sz^%d" % (head, e) if e != 1 else "%sz" % head)
    return " + ".join(parts).replace("+ -", "- ")


def zrational(x):
    if isinstance(x, ZRational):
        return x
    if isinstance(x, (QScalar, Cyclo, int, _Fraction, type(_Q0))):
        return ZRational.from_qscalar(qscalar(x))
    raise TypeError("cannot coerce %r to ZRational" % (x,))


ZERO_Z = ZRational.from_qscalar(0)
ONE_Z = ZRational.from_qscalar(1)
ZVAR = ZRational.z_power(1)


# ---------------------------------------------------------------------------
# DenPoly: monic polynomials in z whose roots are mu_12 * qs^m
# ---------------------------------------------------------------------------

class DenPoly:
    """Monic polynomial in z stored as a multiset of roots.

    Each root is (k, m) meaning zeta^k * qs^m; the polynomial is
    prod (z - zeta^k qs^m)^mult.  Equality is root-multiset equality.
    """

    __slots__ = ("roots", "_hash")

    def __init__(self, roots=()):
        c = Counter()
        if isinstance(roots, (Counter, dict)):
            for r, e in roots.items():
                if e:
                    c[(r[0] % 12, r[1])] += e
        else:
            for r in roots:
                if len(r) == 3:
                    c[(r[0] % 12, r[1])] += r[2]
                else:
                    c[(r[0] % 12, r[1])] += 1
        for r in [r for r, e in c.items() if not e]:
            del c[r]
        if any(e < 0 for e in c.values()):
            raise ValueError("negative multiplicity in DenPoly")
        self.roots = c
        self._hash = None

    @staticmethod
    def one():
        return DenPoly()

    def degree(self):
        return sum(self.roots.values())

    def __mul__(self, o):
        c = Counter(self.roots)
        c.update(o.roots)
        return DenPoly(c)

    def __eq__(self, o):
        if not isinstance(o, DenPoly):
            return NotImplemented
        return self.roots == o.roots

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.roots.items()))
        return self._hash

    def root_value(self, r):
        k, m = r
        return qs_pow(m, zeta_pow(k))

    def expand(self):
        out = ONE_Z
        for (k, m), e in sorted(self.roots.items()):
            lin = ZVAR - zrational(qs_pow(m, zeta_pow(k)))
            for _ in range(e):
                out = out * lin
        return out

    def subs_z_scale(self, unit_k, shift_m):
        """Roots of p(c*z) with c = zeta^unit_k * qs^shift_m, re-monicized:
        root r of p gives root r/c of p(cz)."""
        c = Counter()
        for (k, m), e in self.roots.items():
            c[((k - unit_k) % 12, m - shift_m)] += e
        return DenPoly(c)

    def subs_z_inv_scale(self, unit_k, shift_m):
        """Root multiset of the monic polynomial with roots c/r for each
        root r (as arises from p(c/z) up to units), c = zeta^unit_k qs^shift_m."""
        c = Counter()
        for (k, m), e in self.roots.items():
            c[((unit_k - k) % 12, shift_m - m)] += e
        return DenPoly(c)

    def lcm(self, o):
        c = Counter()
        for r in set(self.roots) | set(o.roots):
            c[r] = max(self.roots.get(r, 0), o.roots.get(r, 0))
        return DenPoly(c)

    def __str__(self):
        if not self.roots:
            return "1"
        parts = []
        for (k, m), e in sorted(self.roots.items(), key=_root_sort_key):
            u = _UNIT_NAMES[k]
            if u == "1":
                body = "z-qs^%d" % m if m != 0 else "z-1"
            elif u == "-1":
                body = "z+qs^%d" % m if m != 0 else "z+1"
            else:
                body = "z-%s*qs^%d" % (u, m) if m != 0 else "z-%s" % u
            parts.append("(%s)" % body + ("^%d" % e if e > 1 else ""))
        return "".join(parts)

    __repr__ = __str__

    def to_json(self):
        return [{"zeta": k, "exp": m, "mult": e}
                for (k, m), e in sorted(self.roots.items())]


_UNIT_NAMES = ["1", "zeta", "zeta^2", "i", "omega", "zeta^5", "-1",
               "-zeta", "-zeta^2", "-i", "-omega", "-zeta^5"]


def _root_sort_key(item):
    (k, m), _ = item
    return (m, k)


def factor_denpoly(p, max_exp=80):
    """Factor a polynomial ZRational into a DenPoly times a unit.

    Returns (unit: QScalar, DenPoly).  All candidate roots are
    zeta^k * qs^m with |m| <= max_exp; raises if a nonconstant remainder
    survives.
    """
    if not p.is_polynomial():
        raise ValueError("not a polynomial in z")
    num = dict(p.num)
    if not num:
        raise ValueError("zero polynomial")
    roots = Counter()
    # candidate exponents from the support of the coefficients
    while max(num.keys()) > 0:
        found = False
        for k, m in _root_candidates(num, max_exp):
            val = qs_pow(m, zeta_pow(k))
            tot = ZERO_Q
            for e, c in num.items():
                tot = tot + c * val ** e
            if tot.is_zero():
                num = _zd_synth_div(num, val)
                roots[(k, m)] += 1
                found = True
                break
        if not found:
            raise ValueError("irreducible non-linear factor remains: %s"
                             % ZRational(num))
    unit = num[0]
    return unit, DenPoly(roots)


def _root_candidates(num, max_exp):
    # scan exponents outward from 0; paper roots have small exponents
    for absm in range(0, max_exp + 1):
        for m in ((absm,) if absm == 0 else (absm, -absm)):
            for k in range(12):
                yield k, m


def _zd_synth_div(num, root):
    """Divide polynomial dict by (z - root) exactly."""
    deg = max(num.keys())
    out = {}
    carry = ZERO_Q
    for e in range(deg, -1, -1):
        carry = num.get(e, ZERO_Q) + (carry * root if e != deg else ZERO_Q)
        if e > 0:
            out[e - 1] = carry
        else:
            if not carry.is_zero():
                raise ValueError("not an exact root")
    return _zd_trim(out)


# ---------------------------------------------------------------------------
# QPochProduct
# ---------------------------------------------------------------------------

PLUS = "plus"      # ((-qs)^a z ; qs^T)_inf
MINUS = "minus"    # (-(-qs)^a z ; qs^T)_inf
# Quadratic families pairing the two primitive cube-root-of-unity factors:
#   omega : prod_s (1 + (-qs)^{Ts+a} z + (-qs)^{2(Ts+a)} z^2)
#         = prod_s (1 - omega (-qs)^{Ts+a} z)(1 - omega^2 (-qs)^{Ts+a} z)
#   omegab: prod_s (1 - (-qs)^{Ts+a} z + (-qs)^{2(Ts+a)} z^2)
OMEGA = "omega"
OMEGAB = "omegab"

_FAMILIES = (PLUS, MINUS, OMEGA, OMEGAB)
_FAM_TOGGLE = {PLUS: MINUS, MINUS: PLUS, OMEGA: OMEGAB, OMEGAB: OMEGA}
_FAM_SYMBOL = {PLUS: "[%d]", MINUS: "<%d>", OMEGA: "w[%d]", OMEGAB: "w'[%d]"}


class QPochProduct:
    """Formal product of q-Pochhammer atoms with a common period T.

    Atom (family, a) with exponent e:
      plus:  ((-qs)^a z; qs^T)_inf ^ e
      minus: (-(-qs)^a z; qs^T)_inf ^ e
    """

    __slots__ = ("T", "atoms", "_hash")

    def __init__(self, T, atoms=()):
        if T <= 0 or T % 2:
            raise ValueError("period must be a positive even integer")
        self.T = T
        c = Counter()
        if isinstance(atoms, (Counter, dict)):
            for (fam, a), e in atoms.items():
                if e:
                    c[(fam, a)] += e
        else:
            for fam, a, e in atoms:
                if fam not in _FAMILIES:
                    raise ValueError("bad family %r" % fam)
                if e:
                    c[(fam, a)] += e
        for key in [k for k, e in c.items() if not e]:
            del c[key]
        self.atoms = c
        self._hash = None

    @staticmethod
    def atom(T, fam, a, e=1):
        return QPochProduct(T, [(fam, a, e)])

    def __eq__(self, o):
        if not isinstance(o, QPochProduct):
            return NotImplemented
        return self.T == o.T and self.atoms == o.atoms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.T, frozenset(self.atoms.items())))
        return self._hash

    def inverse(self):
        return QPochProduct(self.T, {k: -e for k, e in self.atoms.items()})

    def __str__(self):
        if not self.atoms:
            return "1"
        parts = []
        for (fam, a), e in sorted(self.atoms.items(),
                                  key=lambda kv: (kv[0][1], kv[0][0])):
            sym = _FAM_SYMBOL[fam] % a
            parts.append(sym + ("^%d" % e if e != 1 else ""))
        return "".join(parts)

    __repr__ = __str__


def poch_mul(x, y):
    """Merged product of two QPochProducts with equal period."""
    if x.T != y.T:
        raise ValueError("period mismatch: %d vs %d" % (x.T, y.T))
    c = Counter(x.atoms)
    c.update(y.atoms)
    return QPochProduct(x.T, c)


def poch_substitute(x, sign, k, invert_z=False):
    """Substitute z -> sign * (-qs)^k * z (or sign*(-qs)^k / z).

    sign must be +1 or -1.  Label a shifts to a+k; sign -1 toggles the
    family.  With invert_z the product must telescope to a finite Laurent
    ratio first; the result is re-expressed as atoms up to a dropped
    qs-power unit (all consumers compare under the paper's "equivalence up
    to units" convention).
    """
    if sign not in (1, -1):
        raise ValueError("substitution unit must be +-(-qs)^k")
    if not invert_z:
        c = Counter()
        for (fam, a), e in x.atoms.items():
            if sign == -1:
                fam = _FAM_TOGGLE[fam]
            c[(fam, a + k)] += e
        return QPochProduct(x.T, c)
    # z -> sign*(-qs)^k/z: requires a finite telescope.  Each surviving
    # linear factor (1 -+ (-qs)^a z) turns into (1 -+' (-qs)^(-a-k) z) up to
    # a dropped unit; the family toggles when sign == -1.  Linear factors
    # are re-encoded as atom pairs [b]/[b+T].
    factors = _telescope_factors(x)
    c = Counter()
    for (fam, a), e in factors.items():
        fam2 = fam
        if sign == -1:
            fam2 = _FAM_TOGGLE[fam]
        b = -(a + k)
        c[(fam2, b)] += e
        c[(fam2, b + x.T)] -= e
    return QPochProduct(x.T, c)


def _telescope_factors(x):
    """Finite linear factors of a telescoping product.

    Returns Counter {(family, a): e} meaning (1 - (-qs)^a z)^e for plus,
    (1 + (-qs)^a z)^e for minus.  Raises if the product does not telescope.
    """
    groups = {}
    for (fam, a), e in x.atoms.items():
        groups.setdefault((fam, a % x.T), []).append((a, e))
    out = Counter()
    for (fam, _), entries in groups.items():
        entries.sort()
        if sum(e for _, e in entries) != 0:
            raise ValueError("infinite product residue: %s" % x)
        running = 0
        for idx in range(len(entries) - 1):
            a, e = entries[idx]
            running += e
            nxt = entries[idx + 1][0]
            if running:
                for lab in range(a, nxt, x.T):
                    out[(fam, lab)] += running
        for key in [k for k, e in out.items() if not e]:
            del out[key]
    return out


def poch_to_laurent_ratio(x):
    """Exact ZRational value of a finitely-telescoping QPochProduct."""
    factors = _telescope_factors(x)
    out = ONE_Z
    minus_qs = qs_pow(1, MINUS_ONE_C)
    for (fam, a), e in sorted(factors.items()):
        c = minus_qs ** a
        cz = zrational(c) * ZVAR
        if fam == PLUS:
            lin = ONE_Z - cz
        elif fam == MINUS:
            lin = ONE_Z + cz
        elif fam == OMEGA:
            lin = ONE_Z + cz + cz * cz
        else:
            lin = ONE_Z - cz + cz * cz
        if e >= 0:
            for _ in range(e):
                out = out * lin
        else:
            for _ in range(-e):
                out = out / lin
    return out


def poch_numeric(x, q, zval, nfactors=40):
    """Float value of the truncated infinite product at qs=q, z=zval."""
    total = 1.0
    mq = -float(q)
    qT = float(q) ** x.T
    for (fam, a), e in x.atoms.items():
        base = (mq ** a) * float(zval)
        val = 1.0
        t = base
        for _ in range(nfactors):
            if fam == PLUS:
                val *= (1.0 - t)
            elif fam == MINUS:
                val *= (1.0 + t)
            elif fam == OMEGA:
                val *= (1.0 + t + t * t)
            else:
                val *= (1.0 - t + t * t)
            t *= qT
        total *= val ** e
    return total
