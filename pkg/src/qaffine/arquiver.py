"""Combinatorial AR quivers of commutation classes of w0: heap order,
residues, rational coordinates, folding, and DOT/ASCII/JSON rendering."""

import json
from fractions import Fraction

from .cartan import build_root_system, folded_length2, identity_automorphism
from .words import roots_sequence, _heap_prec, format_word


# Default anchors: the minimum coordinate p over all vertices, per
# (type, automorphism order), chosen so rendered output matches the
# standard figures.
_DEFAULT_MIN_P = {
    ("E6", 2): Fraction(1, 2),
    ("D4", 3): Fraction(1),
}


def root_label(tag, root, rs=None):
    """Compact label: epsilon-pair <a,+-b> for D4, digit string otherwise."""
    if tag == "D4" and rs is not None:
        # alpha1 = e1-e2, alpha2 = e2-e3, alpha3 = e3-e4, alpha4 = e3+e4
        c = {i: rs.coeff(root, i) for i in (1, 2, 3, 4)}
        eps = [c[1], c[2] - c[1], c[3] + c[4] - c[2], c[4] - c[3]]
        pos = [k + 1 for k, v in enumerate(eps) if v == 1]
        neg = [k + 1 for k, v in enumerate(eps) if v == -1]
        if len(pos) == 2 and not neg:
            return "<%d,%d>" % tuple(pos)
        if len(pos) == 1 and len(neg) == 1:
            return "<%d,-%d>" % (pos[0], neg[0])
        raise ValueError("not a D4 root: %r" % (root,))
    return "".join(str(x) for x in root)


class ARQuiver:
    """The quiver of a commutation class of w0: vertices Phi+, heap order,
    residues and coordinates (i, p)."""

    def __init__(self, cclass, auto=None, min_p=None):
        if not cclass.is_longest():
            raise ValueError("class must be a commutation class of w0")
        self.cclass = cclass
        self.tag = cclass.tag
        self.rs = build_root_system(self.tag)
        self.auto = auto or identity_automorphism(self.tag)
        if self.auto.tag != self.tag:
            raise ValueError("automorphism type mismatch")
        word = cclass.rep
        self.word = word
        self.roots = roots_sequence(self.tag, word)
        self.pos = {b: k for k, b in enumerate(self.roots)}
        self.residue = {b: word[k] for k, b in enumerate(self.roots)}
        n = len(word)
        prec = _heap_prec(cclass.cartan, word)
        # reachability masks: reach[k] = positions j <= k with j preceding k
        reach = [0] * n
        for k in range(n):
            m = 1 << k
            for j in prec[k]:
                m |= reach[j]
            reach[k] = m
        self._reach = reach
        # Hasse covers: j covered-by k iff j precedes k with no intermediate
        covers = []
        for k in range(n):
            below = reach[k] & ~(1 << k)
            direct = below
            for j in range(k):
                if (below >> j) & 1:
                    direct &= ~(reach[j] & ~(1 << j))
            for j in range(k):
                if (direct >> j) & 1:
                    covers.append((k, j))  # arrow beta_k -> beta_j
        self.cover_arrows = covers
        self._assign_coordinates(min_p)

    # -- order -------------------------------------------------------------
    def precedes(self, alpha, beta):
        """alpha strictly precedes beta in every reading order of the class."""
        j, k = self.pos[alpha], self.pos[beta]
        return j != k and bool((self._reach[k] >> j) & 1)

    def comparable(self, alpha, beta):
        return self.precedes(alpha, beta) or self.precedes(beta, alpha)

    # -- coordinates -------------------------------------------------------
    def arrow_length(self, k, j):
        """min of folded squared simple-root lengths at the two residues."""
        if self.auto.order == 1:
            return Fraction(1)
        l2 = folded_length2(self.auto)
        sb = self.auto.sbar
        return min(l2[sb[self.word[k]]], l2[sb[self.word[j]]])

    def _assign_coordinates(self, min_p):
        n = len(self.word)
        adj = {k: [] for k in range(n)}
        for (k, j) in self.cover_arrows:
            l = self.arrow_length(k, j)
            adj[k].append((j, l))   # p(j) = p(k) + l
            adj[j].append((k, -l))
        p = {0: Fraction(0)}
        stack = [0]
        while stack:
            u = stack.pop()
            for (v, dl) in adj[u]:
                q = p[u] + dl
                if v in p:
                    if p[v] != q:
                        raise RuntimeError("inconsistent coordinates")
                else:
                    p[v] = q
                    stack.append(v)
        if len(p) != n:
            raise RuntimeError("AR quiver is not connected")
        lo = min(p.values())
        if min_p is None:
            min_p = _DEFAULT_MIN_P.get((self.tag, self.auto.order), Fraction(1))
        shift = Fraction(min_p) - lo
        self.p = {b: p[self.pos[b]] + shift for b in self.roots}

    def coordinate(self, beta):
        return (self.residue[beta], self.p[beta])

    def arrows(self):
        """Arrows as (source_root, target_root) pointing toward increasing p."""
        return [(self.roots[k], self.roots[j]) for (k, j) in self.cover_arrows]

    def to_json(self):
        verts = sorted(self.roots, key=lambda b: (self.residue[b], self.p[b]))
        return {
            "type": self.tag,
            "class": format_word(self.word),
            "vertices": [
                {"root": list(b), "residue": self.residue[b],
                 "p": str(self.p[b])}
                for b in verts
            ],
            "arrows": sorted(
                [[list(u), list(v)] for (u, v) in self.arrows()]),
        }


class FoldedARQuiver:
    """Folded coordinates (i-hat, p); injective on vertices."""

    def __init__(self, quiver):
        self.quiver = quiver
        self.auto = quiver.auto
        sb = self.auto.sbar
        self.coord = {}
        seen = {}
        for b in quiver.roots:
            i, p = quiver.coordinate(b)
            key = (sb[i], p)
            if key in seen:
                raise ValueError("folded coordinate collision at %r" % (key,))
            seen[key] = b
            self.coord[b] = key
        self.folded_tag = self.auto.folded_tag

    def coordinate(self, beta):
        return self.coord[beta]

    def by_coordinate(self):
        return {v: k for k, v in self.coord.items()}


def build_ar_quiver(cclass, auto=None, min_p=None):
    return ARQuiver(cclass, auto=auto, min_p=min_p)


def fold(quiver, auto=None):
    if auto is not None and auto is not quiver.auto:
        quiver = ARQuiver(quiver.cclass, auto=auto)
    return FoldedARQuiver(quiver)


def precedes(quiver, alpha, beta):
    return quiver.precedes(alpha, beta)


# ---------------------------------------------------------------------------
# rendering

def _grid(quiver, folded=False):
    if folded:
        fq = FoldedARQuiver(quiver)
        coords = {b: fq.coord[b] for b in quiver.roots}
    else:
        coords = {b: quiver.coordinate(b) for b in quiver.roots}
    rows = sorted({i for (i, _) in coords.values()})
    cols = sorted({p for (_, p) in coords.values()})
    return coords, rows, cols


def render(quiver, fmt="ascii", folded=False, row_order=None):
    """Deterministic text rendering: 'ascii' (the (i/p) grid of the figures),
    'dot', or 'json'."""
    if fmt == "json":
        return json.dumps(quiver.to_json(), indent=1, sort_keys=True)
    if fmt == "dot":
        lines = ["digraph ar {", "  rankdir=LR;"]
        for b in sorted(quiver.roots, key=lambda b: (quiver.p[b], quiver.residue[b])):
            i, p = quiver.coordinate(b)
            lab = root_label(quiver.tag, b, quiver.rs)
            lines.append('  "%s" [label="%s:%s:%s"];' % (lab, i, p, lab))
        for (u, v) in sorted(quiver.arrows()):
            lines.append('  "%s" -> "%s";' % (
                root_label(quiver.tag, u, quiver.rs),
                root_label(quiver.tag, v, quiver.rs)))
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt != "ascii":
        raise ValueError("unknown format %r" % (fmt,))
    coords, rows, cols = _grid(quiver, folded=folded)
    if row_order:
        rows = list(row_order)
    cell = {}
    width = 1
    for b, (i, p) in coords.items():
        lab = root_label(quiver.tag, b, quiver.rs)
        cell[i, p] = lab
        width = max(width, len(lab))

    def fp(p):
        return str(p)

    width = max(width, max(len(fp(p)) for p in cols)) + 1
    head = ("(i/p)").ljust(7) + "".join(fp(p).rjust(width) for p in cols)
    out = [head]
    for i in rows:
        line = str(i).ljust(7)
        for p in cols:
            line += cell.get((i, p), "").rjust(width)
        out.append(line.rstrip())
    return "\n".join(out) + "\n"
