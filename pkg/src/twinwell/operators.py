"""Normal-ordered operator algebra over the four bosonic modes.

Modes are ordered (a1, a2, b1, b2): two internal components at well A
followed by two at well B.  A monomial is the normal-ordered product

    a1†^p0 a2†^p1 b1†^p2 b2†^p3 · a1^q0 a2^q1 b1^q2 b2^q3

encoded as the 8-tuple ``(p0, p1, p2, p3, q0, q1, q2, q3)``.  Polynomials
are sparse complex combinations of such monomials; products are put back
into normal order on the fly with the per-mode identity

    a^q a†^r = sum_k k! C(q,k) C(r,k) a†^(r-k) a^(q-k).

Mode transforms (the tunneling-pulse beam splitter in particular) are
carried as exact numerator/half-power pairs so that bilinear expansion
coefficients like 1/2 stay exact floats; this keeps shot-noise baselines
clean to ~1e-13 even at N = 2000.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

N_MODES = 4
A1, A2, B1, B2 = range(N_MODES)


def key_order(key) -> int:
    return sum(key)


def key_dagger(key):
    return key[4:] + key[:4]


@dataclass(frozen=True)
class ModeMonomial:
    """Exponent vector of one normal-ordered operator product."""

    key: tuple

    @classmethod
    def site_a(cls, p1: int, p2: int, q1: int, q2: int) -> "ModeMonomial":
        return cls((p1, p2, 0, 0, q1, q2, 0, 0))

    @classmethod
    def site_b(cls, p1: int, p2: int, q1: int, q2: int) -> "ModeMonomial":
        return cls((0, 0, p1, p2, 0, 0, q1, q2))

    @classmethod
    def cross(cls, a_part, b_part) -> "ModeMonomial":
        pa1, pa2, qa1, qa2 = a_part
        pb1, pb2, qb1, qb2 = b_part
        return cls((pa1, pa2, pb1, pb2, qa1, qa2, qb1, qb2))

    @property
    def order(self) -> int:
        return sum(self.key)

    def dagger(self) -> "ModeMonomial":
        return ModeMonomial(key_dagger(self.key))

    def site_parts(self):
        k = self.key
        return (k[0], k[1], k[4], k[5]), (k[2], k[3], k[6], k[7])


class NormalPoly:
    """Sparse complex polynomial in normal-ordered mode monomials."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    @classmethod
    def constant(cls, c) -> "NormalPoly":
        return cls({(0,) * 8: complex(c)})

    def copy(self) -> "NormalPoly":
        return NormalPoly(self.terms)

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0j) + c
            if v == 0:
                out.pop(k, None)
            else:
                out[k] = v
        return NormalPoly(out)

    def __sub__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0j) - c
            if v == 0:
                out.pop(k, None)
            else:
                out[k] = v
        return NormalPoly(out)

    def __neg__(self):
        return NormalPoly({k: -c for k, c in self.terms.items()})

    def __rmul__(self, scalar):
        if isinstance(scalar, NormalPoly):  # pragma: no cover - symmetry
            return scalar.__mul__(self)
        s = complex(scalar)
        if s == 0:
            return NormalPoly()
        return NormalPoly({k: s * c for k, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, NormalPoly):
            return self.__rmul__(other)
        out: dict = {}
        for k1, c1 in self.terms.items():
            p1, q1 = k1[:4], k1[4:]
            for k2, c2 in other.terms.items():
                p2, q2 = k2[:4], k2[4:]
                base = c1 * c2
                ranges = [range(min(q1[i], p2[i]) + 1) for i in range(4)]
                for kk in itertools.product(*ranges):
                    w = base
                    for i in range(4):
                        if kk[i]:
                            w *= (
                                math.comb(q1[i], kk[i])
                                * math.comb(p2[i], kk[i])
                                * math.factorial(kk[i])
                            )
                    key = tuple(p1[i] + p2[i] - kk[i] for i in range(4)) + tuple(
                        q1[i] + q2[i] - kk[i] for i in range(4)
                    )
                    v = out.get(key, 0j) + w
                    if v == 0:
                        out.pop(key, None)
                    else:
                        out[key] = v
        return NormalPoly(out)

    def dagger(self) -> "NormalPoly":
        return NormalPoly({key_dagger(k): c.conjugate() for k, c in self.terms.items()})

    @property
    def order(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def expectation(self, source) -> complex:
        """Exact expectation via a monomial source, summed with fsum.

        fsum makes the term sum order-independent and lets structurally
        cancelling terms cancel exactly (shot-noise baselines at tau=0).
        """
        re, im = [], []
        for k, c in self.terms.items():
            v = c * source(k)
            re.append(v.real)
            im.append(v.imag)
        return complex(math.fsum(re), math.fsum(im))

    def __repr__(self):  # pragma: no cover - debugging aid
        items = ", ".join(f"{k}: {c:.4g}" for k, c in sorted(self.terms.items()))
        return f"NormalPoly({{{items}}})"


def creation(mode: int) -> NormalPoly:
    p = [0] * 8
    p[mode] = 1
    return NormalPoly({tuple(p): 1.0 + 0j})


def annihilation(mode: int) -> NormalPoly:
    q = [0] * 8
    q[4 + mode] = 1
    return NormalPoly({tuple(q): 1.0 + 0j})


@dataclass(frozen=True)
class ModeVector:
    """Linear combination of bare annihilation operators with exact scale.

    The coefficient of mode m is ``num[m] / sqrt(2)**nhalf``.  All
    transforms used here have numerators in {0, ±1, ±1j}, so bilinear
    coefficients are exact multiples of powers of 1/2.
    """

    num: tuple
    nhalf: int = 0


SITE_A = (ModeVector((1, 0, 0, 0)), ModeVector((0, 1, 0, 0)))
SITE_B = (ModeVector((0, 0, 1, 0)), ModeVector((0, 0, 0, 1)))


def beam_splitter(a: ModeVector, b: ModeVector):
    """50:50 splitter with pi/2 phase: c = (a + i b)/√2, d = (b + i a)/√2."""
    if a.nhalf != b.nhalf:
        raise ValueError("cannot mix modes with different normalization")
    c = ModeVector(tuple(x + 1j * y for x, y in zip(a.num, b.num)), a.nhalf + 1)
    d = ModeVector(tuple(y + 1j * x for x, y in zip(a.num, b.num)), a.nhalf + 1)
    return c, d


SITE_C = tuple(beam_splitter(a, b)[0] for a, b in zip(SITE_A, SITE_B))
SITE_D = tuple(beam_splitter(a, b)[1] for a, b in zip(SITE_A, SITE_B))


def bilinear(left: ModeVector, right: ModeVector) -> NormalPoly:
    """Normal-ordered left† · right expanded over the bare modes."""
    halves = left.nhalf + right.nhalf
    if halves % 2:
        raise ValueError("bilinear of mixed normalization is not exact")
    scale = 0.5 ** (halves // 2)
    terms: dict = {}
    for m, cm in enumerate(left.num):
        if cm == 0:
            continue
        cmc = complex(cm).conjugate()
        for n, cn in enumerate(right.num):
            if cn == 0:
                continue
            p = [0] * 4
            q = [0] * 4
            p[m] = 1
            q[n] = 1
            key = tuple(p) + tuple(q)
            v = terms.get(key, 0j) + cmc * cn * scale
            if v == 0:
                terms.pop(key, None)
            else:
                terms[key] = v
    return NormalPoly(terms)


def raising_bilinear(site) -> NormalPoly:
    """m2† m1 for a (possibly transformed) site; its phase defines Δθ."""
    m1, m2 = site
    return bilinear(m2, m1)


def number_operator(site) -> NormalPoly:
    m1, m2 = site
    return bilinear(m1, m1) + bilinear(m2, m2)


def spin_operators(site, phase_factor):
    """(J^X, J^Y, J^Z) for one site with mode-phase factor e^{iΔθ} on m2† m1."""
    m1, m2 = site
    s = complex(phase_factor) * bilinear(m2, m1)
    sd = s.dagger()
    jx = 0.5 * (s + sd)
    jy = -0.5j * (s - sd)
    jz = 0.5 * (bilinear(m2, m2) - bilinear(m1, m1))
    return jx, jy, jz
