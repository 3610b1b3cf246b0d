"""Ideals of truncated Iwasawa algebras O[[T]] and O[[S,T]].

Ideals are represented by polynomial generators at a stated coefficient
precision and degree cap.  The machinery here covers: Weierstrass division
by distinguished polynomials, valuations at height-one primes, the
divisibility-up-to-height-two relations (written `precedes`/`equivalent`
below), specialization of two-variable ideals along gamma1^a1 gamma2^a2 = u,
the search for good specializations, and elementary modules with their
specialization slope data.

Everything is exact at the stated precision; when a factorization or a
membership question cannot be settled within the precision and degree caps
an explicit error is raised rather than guessing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .rings import RingElem, TruncatedLocalRing


class PrecisionExhausted(ValueError):
    """A computation became ambiguous at the stated precision or caps."""


class ZeroIdealError(ValueError):
    pass


class NonDistinguished(ValueError):
    pass


class NonUnimodular(ValueError):
    pass


class HeightNotCertified(ValueError):
    """The height >= 2 precondition could not be certified in this fragment."""


# -- one-variable polynomials ------------------------------------------------------


class Poly1:
    """Dense polynomial over a truncated local ring, lowest degree first."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: TruncatedLocalRing, coeffs: Sequence[RingElem]):
        self.ring = ring
        cs = list(coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    @staticmethod
    def from_ints(ring: TruncatedLocalRing, ints: Sequence[int]) -> "Poly1":
        return Poly1(ring, [ring.from_int(c) for c in ints])

    @staticmethod
    def zero(ring: TruncatedLocalRing) -> "Poly1":
        return Poly1(ring, [])

    @staticmethod
    def monomial(ring: TruncatedLocalRing, deg: int, coeff: Optional[RingElem] = None) -> "Poly1":
        c = coeff if coeff is not None else ring.one()
        return Poly1(ring, [ring.zero()] * deg + [c])

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else -1

    def coeff(self, i: int) -> RingElem:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else self.ring.zero()

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly1) and self.ring == other.ring and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.ring, self.coeffs))

    def __add__(self, other: "Poly1") -> "Poly1":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly1(self.ring, [self.coeff(i) + other.coeff(i) for i in range(n)])

    def __sub__(self, other: "Poly1") -> "Poly1":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly1(self.ring, [self.coeff(i) - other.coeff(i) for i in range(n)])

    def __neg__(self) -> "Poly1":
        return Poly1(self.ring, [-c for c in self.coeffs])

    def __mul__(self, other: "Poly1") -> "Poly1":
        if self.is_zero() or other.is_zero():
            return Poly1.zero(self.ring)
        out = [self.ring.zero()] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly1(self.ring, out)

    def scale(self, c: RingElem) -> "Poly1":
        return Poly1(self.ring, [a * c for a in self.coeffs])

    def truncate(self, cap: int) -> Tuple["Poly1", bool]:
        """Drop terms of degree > cap; the flag records whether anything nonzero fell off."""
        if self.degree <= cap:
            return self, False
        dropped = any(not c.is_zero() for c in self.coeffs[cap + 1 :])
        return Poly1(self.ring, self.coeffs[: cap + 1]), dropped

    def content_valuation(self) -> int:
        """min over coefficients of the pi-valuation (precision N for the zero poly)."""
        if self.is_zero():
            return self.ring.precision
        return min(c.valuation() for c in self.coeffs)

    def is_distinguished(self) -> bool:
        """Monic with all lower coefficients of positive valuation."""
        if self.degree < 1:
            return False
        if self.coeffs[-1] != self.ring.one():
            return False
        return all(c.valuation() >= 1 for c in self.coeffs[:-1])

    def eval(self, point: RingElem) -> RingElem:
        acc = self.ring.zero()
        for c in reversed(self.coeffs):
            acc = acc * point + c
        return acc

    def weierstrass_degree(self) -> int:
        """Index of the first coefficient of minimal valuation (the lambda part)."""
        if self.is_zero():
            raise ZeroIdealError("zero polynomial has no Weierstrass degree")
        mu = self.content_valuation()
        for i, c in enumerate(self.coeffs):
            if c.valuation() == mu:
                return i
        raise AssertionError

    def newton_polygon(self) -> List[Tuple[int, int]]:
        """Lower convex hull vertices of {(i, val(c_i))}."""
        pts = [(i, c.valuation()) for i, c in enumerate(self.coeffs) if not c.is_zero()]
        if not pts:
            return []
        hull: List[Tuple[int, int]] = []
        for pt in pts:
            while len(hull) >= 2:
                (x1, y1), (x2, y2) = hull[-2], hull[-1]
                if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                    hull.pop()
                else:
                    break
            hull.append(pt)
        return hull

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        bits = []
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                bits.append(f"{c}*T^{i}" if i else f"{c}")
        return " + ".join(bits)


def weierstrass_divide(f: Poly1, g: Poly1) -> Tuple[Poly1, Poly1]:
    """f = q*g + r with deg r < deg g, exact at precision; g must be distinguished."""
    if not g.is_distinguished():
        raise NonDistinguished(f"divisor {g} is not distinguished")
    ring = f.ring
    rem = list(f.coeffs)
    dg = g.degree
    q = [ring.zero()] * max(0, len(rem) - dg)
    for i in range(len(rem) - 1, dg - 1, -1):
        c = rem[i]
        if c.is_zero():
            continue
        q[i - dg] = c
        for j in range(dg + 1):
            rem[i - dg + j] = rem[i - dg + j] - c * g.coeff(j)
    return Poly1(ring, q), Poly1(ring, rem[:dg])


def divides_exactly(g: Poly1, f: Poly1) -> bool:
    if f.is_zero():
        return True
    if f.degree < g.degree:
        return False
    _, r = weierstrass_divide(f, g)
    return r.is_zero()


def prime_order(f: Poly1, g: Poly1) -> int:
    """Largest k with g^k | f at precision (f nonzero)."""
    k = 0
    cur = f
    while not cur.is_zero():
        q, r = weierstrass_divide(cur, g)
        if not r.is_zero():
            break
        k += 1
        cur = q
    return k


# -- distinguished factor search ---------------------------------------------------


def _distinguished_candidates(ring: TruncatedLocalRing, degree: int, cap: int = 100000):
    """All monic distinguished polynomials of the given degree at this precision."""
    low_choices: List[List[RingElem]] = []
    count = 1
    for _ in range(degree):
        opts = [c for c in _pi_multiples(ring)]
        count *= len(opts)
        if count > cap:
            raise PrecisionExhausted(
                f"distinguished factor search of degree {degree} needs {count} candidates"
            )
        low_choices.append(opts)
    for lows in itertools.product(*low_choices):
        yield Poly1(ring, list(lows) + [ring.one()])


def _pi_multiples(ring: TruncatedLocalRing) -> List[RingElem]:
    if ring.size > 100000:
        raise PrecisionExhausted("factor search over a ring this large is not attempted")
    return [x for x in ring.elements() if x.valuation() >= 1]


def is_irreducible_distinguished(g: Poly1) -> bool:
    """Irreducibility by Newton-polygon fast path, then exhaustive factor search."""
    if not g.is_distinguished():
        raise NonDistinguished(f"{g} is not distinguished")
    d = g.degree
    if d == 1:
        return True
    hull = g.newton_polygon()
    if len(hull) >= 2 and hull[0][0] == 0 and hull[-1] == (d, 0) and len(hull) == 2:
        # single segment: irreducible when the slope is 1/d in lowest terms
        v0 = hull[0][1]
        from math import gcd

        if gcd(v0, d) == 1:
            return True
    for k in range(1, d // 2 + 1):
        for cand in _distinguished_candidates(g.ring, k):
            if divides_exactly(cand, g):
                return False
    return True


def distinguished_factors(f: Poly1) -> List[Poly1]:
    """Irreducible distinguished divisors of f (degree up to the lambda part)."""
    if f.is_zero():
        return []
    lam = f.weierstrass_degree()
    out = []
    for k in range(1, lam + 1):
        for cand in _distinguished_candidates(f.ring, k):
            if divides_exactly(cand, f) and is_irreducible_distinguished(cand):
                out.append(cand)
    return out


@dataclass(frozen=True)
class HeightOnePrime:
    """(pi) or (g) for an irreducible distinguished polynomial g."""

    kind: str  # "pi" | "distinguished"
    poly: Optional[Poly1] = None

    def __post_init__(self):
        if self.kind not in ("pi", "distinguished"):
            raise ValueError("kind must be 'pi' or 'distinguished'")
        if self.kind == "distinguished":
            if self.poly is None or not self.poly.is_distinguished():
                raise NonDistinguished("distinguished prime needs a distinguished polynomial")
            if not is_irreducible_distinguished(self.poly):
                raise ValueError("polynomial is not irreducible at this precision")

    def __repr__(self) -> str:
        return "(pi)" if self.kind == "pi" else f"({self.poly})"


# -- polynomial ideals --------------------------------------------------------------


@dataclass(frozen=True)
class PolyIdeal:
    """Finitely generated ideal of O[[T]] (nvars=1) or O[[S,T]] (nvars=2).

    Spans, membership and equality are taken inside the truncated quotient
    by the degree cap (monomials beyond the cap form the tracked error
    ideal); generator-level computations (gcds, valuations, divisions) are
    exact at the coefficient precision.
    """

    ring: TruncatedLocalRing
    nvars: int
    gens: tuple
    degree_cap: int

    def __post_init__(self):
        if self.nvars not in (1, 2):
            raise ValueError("only 1 or 2 variables supported")
        gens = tuple(g for g in self.gens if not g.is_zero())
        object.__setattr__(self, "gens", gens)

    @staticmethod
    def one_var(ring, gens: Sequence[Poly1], degree_cap: int = 16) -> "PolyIdeal":
        return PolyIdeal(ring, 1, tuple(gens), degree_cap)

    @staticmethod
    def two_var(ring, gens: Sequence["Poly2"], degree_cap: int = 10) -> "PolyIdeal":
        return PolyIdeal(ring, 2, tuple(gens), degree_cap)

    def is_zero(self) -> bool:
        return not self.gens

    # span of the ideal image in the truncated quotient, as Z/p^N rows
    def _span_rows(self) -> List[List[int]]:
        d = self.ring.degree
        cap = self.degree_cap
        rows = []
        if self.nvars == 1:
            width = (cap + 1) * d
            for g in self.gens:
                for k in range(cap + 1):
                    row = [0] * width
                    for i, c in enumerate(g.coeffs):
                        if i + k > cap:
                            break
                        for j, cc in enumerate(c.coeffs):
                            row[(i + k) * d + j] = cc
                    if any(row):
                        rows.append(row)
        else:
            width = (cap + 1) * (cap + 1) * d
            for g in self.gens:
                for ks in range(cap + 1):
                    for kt in range(cap + 1):
                        row = [0] * width
                        for (i, j), c in g.terms.items():
                            if i + ks > cap or j + kt > cap:
                                continue
                            pos = ((i + ks) * (cap + 1) + (j + kt)) * d
                            for jj, cc in enumerate(c.coeffs):
                                row[pos + jj] = cc
                        if any(row):
                            rows.append(row)
        return rows

    def howell(self) -> List[List[int]]:
        cached = getattr(self, "_howell_cache", None)
        if cached is None:
            cached = linalg.howell_form(self._span_rows(), self.ring.p, self.ring.precision)
            object.__setattr__(self, "_howell_cache", cached)
        return cached

    def contains_poly(self, f) -> bool:
        """Membership within the degree cap (span membership)."""
        d = self.ring.degree
        cap = self.degree_cap
        if self.nvars == 1:
            if f.degree > cap:
                raise PrecisionExhausted("membership test beyond degree cap")
            vec = [0] * ((cap + 1) * d)
            for i, c in enumerate(f.coeffs):
                for j, cc in enumerate(c.coeffs):
                    vec[i * d + j] = cc
        else:
            degs = f.max_degrees()
            if max(degs) > cap:
                raise PrecisionExhausted("membership test beyond degree cap")
            vec = [0] * ((cap + 1) * (cap + 1) * d)
            for (i, j), c in f.terms.items():
                for jj, cc in enumerate(c.coeffs):
                    vec[(i * (cap + 1) + j) * d + jj] = cc
        return linalg.in_span(vec, self.howell(), self.ring.p, self.ring.precision)

    def issubset(self, other: "PolyIdeal") -> bool:
        return all(other.contains_poly(g) for g in self.gens)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PolyIdeal)
            and self.ring == other.ring
            and self.nvars == other.nvars
            and self.degree_cap == other.degree_cap
            and self.howell() == other.howell()
        )

    def __hash__(self):
        return hash((self.ring, self.nvars, self.degree_cap))

    def __mul__(self, other: "PolyIdeal") -> "PolyIdeal":
        gens = tuple(a * b for a in self.gens for b in other.gens)
        return PolyIdeal(self.ring, self.nvars, gens, max(self.degree_cap, other.degree_cap))

    def __add__(self, other: "PolyIdeal") -> "PolyIdeal":
        return PolyIdeal(
            self.ring, self.nvars, self.gens + other.gens, max(self.degree_cap, other.degree_cap)
        )

    def canonical_gens(self) -> List:
        """Generators read off the Howell form (module-canonical within the cap)."""
        d = self.ring.degree
        cap = self.degree_cap
        out = []
        for row in self.howell():
            if self.nvars == 1:
                coeffs = []
                for i in range(cap + 1):
                    coeffs.append(self.ring.elem(list(row[i * d : (i + 1) * d])))
                out.append(Poly1(self.ring, coeffs))
            else:
                terms = {}
                for i in range(cap + 1):
                    for j in range(cap + 1):
                        pos = (i * (cap + 1) + j) * d
                        c = self.ring.elem(list(row[pos : pos + d]))
                        if not c.is_zero():
                            terms[(i, j)] = c
                out.append(Poly2(self.ring, terms))
        return out


# -- two-variable polynomials --------------------------------------------------------


class Poly2:
    """Sparse polynomial in S, T over a truncated local ring."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: TruncatedLocalRing, terms: Dict[Tuple[int, int], RingElem]):
        self.ring = ring
        self.terms = {k: v for k, v in terms.items() if not v.is_zero()}

    @staticmethod
    def from_int_terms(ring, data: Dict[Tuple[int, int], int]) -> "Poly2":
        return Poly2(ring, {k: ring.from_int(v) for k, v in data.items()})

    @staticmethod
    def zero(ring) -> "Poly2":
        return Poly2(ring, {})

    def is_zero(self) -> bool:
        return not self.terms

    def max_degrees(self) -> Tuple[int, int]:
        if not self.terms:
            return (0, 0)
        return (max(i for i, _ in self.terms), max(j for _, j in self.terms))

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly2) and self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, tuple(sorted(self.terms.items()))))

    def __add__(self, other: "Poly2") -> "Poly2":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, self.ring.zero()) + v
        return Poly2(self.ring, out)

    def __sub__(self, other: "Poly2") -> "Poly2":
        return self + (-other)

    def __neg__(self) -> "Poly2":
        return Poly2(self.ring, {k: -v for k, v in self.terms.items()})

    def __mul__(self, other: "Poly2") -> "Poly2":
        out: Dict[Tuple[int, int], RingElem] = {}
        for (i1, j1), a in self.terms.items():
            for (i2, j2), b in other.terms.items():
                k = (i1 + i2, j1 + j2)
                c = a * b
                out[k] = out.get(k, self.ring.zero()) + c
        return Poly2(self.ring, out)

    def content_valuation(self) -> int:
        if self.is_zero():
            return self.ring.precision
        return min(c.valuation() for c in self.terms.values())

    def constant_term(self) -> RingElem:
        return self.terms.get((0, 0), self.ring.zero())

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for (i, j), c in sorted(self.terms.items()):
            mono = "".join(s for s, e in (("S^%d" % i, i), ("T^%d" % j, j)) if e)
            bits.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(bits)


# -- valuations and the ideal relations ----------------------------------------------


def valuation_at_prime(ideal: PolyIdeal, prime: HeightOnePrime) -> int:
    """ord_P of a one-variable ideal: min over generators."""
    if ideal.nvars != 1:
        raise ValueError("valuation_at_prime is for one-variable ideals")
    if ideal.is_zero():
        raise ZeroIdealError("zero ideal has no finite valuation")
    if prime.kind == "pi":
        return min(g.content_valuation() for g in ideal.gens)
    return min(prime_order(g, prime.poly) for g in ideal.gens)


def _divide_by_pi_power(f: Poly1, mu: int) -> Poly1:
    """Exact division by pi^mu with precision reduction to N - mu."""
    ring = f.ring
    if mu == 0:
        return f
    if f.content_valuation() < mu:
        raise PrecisionExhausted("pi-content smaller than requested division")
    if ring.degree != 1:
        raise PrecisionExhausted("pi-division implemented over the base ring only")
    new_ring = ring.with_precision(ring.precision - mu)
    p = ring.p
    return Poly1(new_ring, [new_ring.from_int(c.coeffs[0] // p**mu) for c in f.coeffs])


def _reinterpret(f: Poly1, ring: TruncatedLocalRing) -> Poly1:
    """The same polynomial read at a lower precision."""
    return Poly1(ring, [ring.elem(c.coeffs) for c in f.coeffs])


def ideal_gcd(ideal: PolyIdeal) -> Tuple[int, Poly1]:
    """gcd of the generators as (pi-exponent, monic distinguished part).

    The distinguished part comes back at the precision left after stripping
    the per-generator pi-contents (content tracking); PrecisionExhausted is
    raised when the gcd cannot be pinned down at that precision.
    """
    if ideal.nvars != 1:
        raise ValueError("one-variable ideals only")
    if ideal.is_zero():
        raise ZeroIdealError("zero ideal has no gcd")
    contents = [g.content_valuation() for g in ideal.gens]
    mu = min(contents)
    strip_prec = ideal.ring.precision - max(contents)
    if strip_prec < 1:
        raise PrecisionExhausted("pi-content consumed the whole precision")
    work_ring = ideal.ring.with_precision(strip_prec)
    stripped = [
        _reinterpret(_divide_by_pi_power(g, c), work_ring)
        for g, c in zip(ideal.gens, contents)
    ]
    if any(s.is_zero() for s in stripped):
        raise PrecisionExhausted("generator vanished after content stripping")
    one = Poly1.from_ints(work_ring, [1])
    if any(s.weierstrass_degree() == 0 for s in stripped):
        return mu, one
    # fast path: a unit-leading generator that divides all the others
    for pivot in sorted(stripped, key=lambda s: s.weierstrass_degree()):
        if not pivot.coeffs[-1].is_unit():
            continue
        norm = pivot.scale(pivot.coeffs[-1].inv())
        if all(divides_exactly(norm, s) for s in stripped):
            return mu, norm
    # factor accumulation with an ambiguity guard
    pivot = min(stripped, key=lambda s: s.weierstrass_degree())
    lam = pivot.weierstrass_degree()
    common: List[Tuple[Poly1, int]] = []
    for k in range(1, lam + 1):
        for cand in _distinguished_candidates(work_ring, k):
            if all(divides_exactly(cand, s) for s in stripped) and is_irreducible_distinguished(cand):
                order = min(prime_order(s, cand) for s in stripped)
                common.append((cand, order))
    product = one
    total_deg = 0
    for cand, order in common:
        total_deg += cand.degree * order
        for _ in range(order):
            product = product * cand
    if total_deg > lam:
        raise PrecisionExhausted("gcd factorization ambiguous at this precision")
    return mu, product


@dataclass
class PrecedesVerdict:
    holds: bool
    certificate: Optional[PolyIdeal]
    degenerate_certificate: bool
    containment: bool
    gcd_i: Optional[Tuple[int, Poly1]]
    gcd_j: Optional[Tuple[int, Poly1]]
    verified_product: bool
    note: str = ""


def precedes(ideal_i: PolyIdeal, ideal_j: PolyIdeal) -> PrecedesVerdict:
    """Decide I < J: some height >= 2 ideal A has A*I inside J.

    Criterion on the implemented fragment: the gcd part of J divides the
    gcd part of I (this is ord_P(I) >= ord_P(J) at every height-one prime).
    On success the certificate is A = J / gcd(J), verified by explicit
    membership of the generator products; a unit certificate (containment
    case) is flagged as degenerate.
    """
    if ideal_i.nvars != ideal_j.nvars or ideal_i.ring != ideal_j.ring:
        raise ValueError("ideals must share variables and precision")
    if ideal_i.nvars != 1:
        raise ValueError("the relation is decided for one-variable ideals")
    if ideal_i.is_zero() or ideal_j.is_zero():
        raise ZeroIdealError("relations are decided for nonzero ideals")
    if ideal_i.issubset(ideal_j):
        full = PolyIdeal.one_var(ideal_i.ring, [Poly1.from_ints(ideal_i.ring, [1])], ideal_i.degree_cap)
        return PrecedesVerdict(True, full, True, True, None, None, True)
    mu_i, h_i = ideal_gcd(ideal_i)
    mu_j, h_j = ideal_gcd(ideal_j)
    if mu_i < mu_j:
        return PrecedesVerdict(
            False, None, False, False, (mu_i, h_i), (mu_j, h_j), False, "fails at (pi)"
        )
    common_prec = min(h_i.ring.precision, h_j.ring.precision)
    ring_c = ideal_i.ring.with_precision(common_prec)
    hi_c, hj_c = _reinterpret(h_i, ring_c), _reinterpret(h_j, ring_c)
    if hj_c.degree >= 1 and not divides_exactly(hj_c, hi_c):
        return PrecedesVerdict(
            False, None, False, False, (mu_i, h_i), (mu_j, h_j), False,
            f"fails at the distinguished part ({hj_c})",
        )
    # certificate A = J / (pi^mu_j * h_j)
    quotients = []
    for g in ideal_j.gens:
        q = _divide_by_pi_power(g, mu_j)
        if h_j.degree >= 1:
            hjq = _reinterpret(h_j, q.ring)
            q, r = weierstrass_divide(q, hjq)
            if not r.is_zero():
                raise PrecisionExhausted("gcd division left a remainder at precision")
        quotients.append(q)
    cert_ring = quotients[0].ring
    cap = ideal_i.degree_cap + ideal_j.degree_cap
    cert = PolyIdeal.one_var(cert_ring, quotients, cap)
    degenerate = cert.contains_poly(Poly1.from_ints(cert_ring, [1]))
    # verify A * I inside J at the (possibly reduced) precision
    j_red = PolyIdeal.one_var(
        cert_ring, [_reinterpret(g, cert_ring) for g in ideal_j.gens], cap
    )
    verified = all(
        j_red.contains_poly(a * _reinterpret(g, cert_ring))
        for a in cert.gens
        for g in ideal_i.gens
    )
    return PrecedesVerdict(
        True, cert, degenerate, False, (mu_i, h_i), (mu_j, h_j), verified
    )


def equivalent(ideal_i: PolyIdeal, ideal_j: PolyIdeal) -> Tuple[bool, PrecedesVerdict, PrecedesVerdict]:
    fwd = precedes(ideal_i, ideal_j)
    bwd = precedes(ideal_j, ideal_i)
    return fwd.holds and bwd.holds, fwd, bwd


# -- specialization -------------------------------------------------------------------


def _binom_fraction(z: Fraction, k: int) -> Fraction:
    num = Fraction(1)
    for i in range(k):
        num *= z - i
    return num / Fraction(_factorial(k))


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def _fraction_to_ring(q: Fraction, ring: TruncatedLocalRing) -> RingElem:
    den = q.denominator
    if den % ring.p == 0:
        raise PrecisionExhausted("denominator not a p-adic unit")
    return ring.from_int(q.numerator) * ring.from_int(den).inv()


def _unit_root(u: RingElem, a: int) -> RingElem:
    """u^{1/a} for u == 1 mod pi and a a p-adic unit, via the binomial series."""
    ring = u.ring
    if a % ring.p == 0:
        raise NonUnimodular("exponent denominator must be a p-adic unit")
    w = u - ring.one()
    if not w.is_zero() and w.valuation() < 1:
        raise ValueError("u must be congruent to 1 mod pi")
    z = Fraction(1, a)
    acc = ring.zero()
    power = ring.one()
    k = 0
    while True:
        acc = acc + _fraction_to_ring(_binom_fraction(z, k), ring) * power
        k += 1
        power = power * w
        if power.is_zero():
            break
    return acc


def _one_plus_t_power(z: Fraction, ring: TruncatedLocalRing, cap: int) -> Poly1:
    """(1+T)^z truncated at the degree cap, z a p-integral rational."""
    coeffs = []
    for k in range(cap + 1):
        coeffs.append(_fraction_to_ring(_binom_fraction(z, k), ring))
    return Poly1(ring, coeffs)


@dataclass
class SpecializationResult:
    ideal: PolyIdeal
    eliminated_var: int  # 0 = S eliminated (result in T), 1 = T eliminated
    truncated: bool  # true when expansion dropped terms beyond the cap


def specialize(ideal: PolyIdeal, a1: int, a2: int, u: RingElem) -> SpecializationResult:
    """Image of a two-variable ideal in the quotient by (1+S)^a1 (1+T)^a2 = u.

    Requires (a1, a2) unimodular (at least one a p-adic unit).  One variable
    is eliminated by a truncated binomial expansion; the result is returned
    Howell-cleaned at the ideal's degree cap.
    """
    if ideal.nvars != 2:
        raise ValueError("specialize expects a two-variable ideal")
    ring = ideal.ring
    p = ring.p
    if a1 % p != 0:
        elim, keep = 0, 1
        za, zb = a1, a2
    elif a2 % p != 0:
        elim, keep = 1, 0
        za, zb = a2, a1
    else:
        raise NonUnimodular(f"({a1}, {a2}) is not unimodular")
    cap = ideal.degree_cap
    # eliminated variable: 1 + X = u^{1/za} (1+Y)^{-zb/za}
    series = _one_plus_t_power(Fraction(-zb, za), ring, cap).scale(_unit_root(u, za))
    sub = series - Poly1.from_ints(ring, [1])  # the series for X itself
    truncated = False
    out_gens: List[Poly1] = []
    for g in ideal.gens:
        acc = Poly1.zero(ring)
        # collect by power of the eliminated variable
        by_elim: Dict[int, Poly1] = {}
        for (i, j), c in g.terms.items():
            e = (i, j)[elim]
            k = (i, j)[keep]
            cur = by_elim.setdefault(e, Poly1.zero(ring))
            by_elim[e] = cur + Poly1.monomial(ring, k, c)
        sub_pow = Poly1.from_ints(ring, [1])
        for e in range(max(by_elim) + 1 if by_elim else 0):
            part = by_elim.get(e)
            if part is not None:
                term = part * sub_pow
                term, dropped = term.truncate(cap)
                truncated = truncated or dropped
                acc = acc + term
            sub_pow = sub_pow * sub
            sub_pow, dropped = sub_pow.truncate(cap)
            truncated = truncated or dropped
        out_gens.append(acc)
    raw = PolyIdeal.one_var(ring, out_gens, cap)
    clean = PolyIdeal.one_var(ring, raw.canonical_gens(), cap)
    return SpecializationResult(clean, elim, truncated)


# -- height tests and the good-specialization search -----------------------------------


def one_var_height_at_least_two(ideal: PolyIdeal) -> bool:
    """gcd of the generators is a unit: no (pi) and no common distinguished factor."""
    if ideal.nvars != 1:
        raise ValueError("one-variable test")
    if ideal.is_zero():
        return False
    if min(g.content_valuation() for g in ideal.gens) > 0:
        return False
    first = next(g for g in ideal.gens if not g.is_zero())
    if first.content_valuation() == 0 and first.weierstrass_degree() == 0:
        return True  # a unit generator
    for f in distinguished_factors(first):
        if all(divides_exactly(f, g) for g in ideal.gens):
            return False
    return True


def _fp_poly2(g: Poly2, p: int) -> Dict[Tuple[int, int], int]:
    out = {}
    for k, c in g.terms.items():
        if c.ring.degree != 1:
            raise HeightNotCertified("mod-p reduction implemented over the base ring only")
        v = c.coeffs[0] % p
        if v:
            out[k] = v
    return out


def _mod_p_split_certify(polys: List[Dict[Tuple[int, int], int]]) -> bool:
    """Certify a unit gcd when one generator reduces mod p to a nonzero
    polynomial in S alone and another to one in T alone: a common height-one
    divisor would have to divide both, which forces it to be a unit."""
    has_pure_s = any(f and all(j == 0 for _, j in f) for f in polys)
    has_pure_t = any(f and all(i == 0 for i, _ in f) for f in polys)
    return has_pure_s and has_pure_t


def two_var_height_at_least_two(ideal: PolyIdeal) -> bool:
    """Certified height >= 2 test for the implemented two-variable fragment.

    Certifies when (a) the pi-content of the ideal is 0, and (b) some
    generator is pi^a times a unit power series (unit constant after content
    stripping), or the mod-p polynomial gcd is visibly a unit.  Raises
    HeightNotCertified when neither route certifies.
    """
    if ideal.nvars != 2:
        raise ValueError("two-variable test")
    if ideal.is_zero():
        return False
    content = min(g.content_valuation() for g in ideal.gens)
    if content > 0:
        return False
    if any(g.constant_term().is_unit() for g in ideal.gens):
        # the ideal is the unit ideal: height convention handled upstream
        return True
    p = ideal.ring.p
    for g in ideal.gens:
        mu = g.content_valuation()
        c0 = g.constant_term()
        if c0.valuation() == mu:
            # g = pi^mu * unit power series: common divisors divide pi^mu,
            # and the content-0 condition rules pi out.
            return True
    try:
        if _mod_p_split_certify([_fp_poly2(g, p) for g in ideal.gens]):
            return True
    except HeightNotCertified:
        pass
    raise HeightNotCertified("height >= 2 not certified for this ideal in the fragment")


def _unimodular_pairs(radius: int, p: int) -> List[Tuple[int, int]]:
    pairs = []
    for a1 in range(-radius, radius + 1):
        for a2 in range(-radius, radius + 1):
            if (a1, a2) == (0, 0):
                continue
            if a1 % p == 0 and a2 % p == 0:
                continue
            lead = a1 if a1 != 0 else a2
            if lead < 0:
                continue  # (a1,a2) and (-a1,-a2) cut the same subgroup
            pairs.append((a1, a2))
    pairs.sort(key=lambda t: (max(abs(t[0]), abs(t[1])), abs(t[0]) + abs(t[1]), abs(t[1]), t[1] < 0, t[0] < 0))
    return pairs


@dataclass
class GoodSpecialization:
    a1: int
    a2: int
    u: RingElem
    image_i: PolyIdeal
    image_j: PolyIdeal
    rejected: List[Tuple[int, int, str]]


def find_good_specialization(
    ideal_i: PolyIdeal,
    ideal_j: PolyIdeal,
    radius: int = 2,
    units: Optional[Sequence[RingElem]] = None,
) -> GoodSpecialization:
    """First (by the documented enumeration order) (a1, a2, u) whose
    specialized images both keep height >= 2, or PrecisionExhausted if the
    search box is exhausted."""
    for ideal in (ideal_i, ideal_j):
        if not two_var_height_at_least_two(ideal):
            raise HeightNotCertified("input ideal does not have certified height >= 2")
    ring = ideal_i.ring
    if units is None:
        units = [ring.one(), ring.one() + ring.from_int(ring.p)]
    rejected = []
    for a1, a2 in _unimodular_pairs(radius, ring.p):
        for u in units:
            try:
                img_i = specialize(ideal_i, a1, a2, u).ideal
                img_j = specialize(ideal_j, a1, a2, u).ideal
            except (NonUnimodular, PrecisionExhausted) as exc:
                rejected.append((a1, a2, f"u={u}: {exc}"))
                continue
            if img_i.is_zero() or img_j.is_zero():
                rejected.append((a1, a2, f"u={u}: zero image"))
                continue
            if one_var_height_at_least_two(img_i) and one_var_height_at_least_two(img_j):
                return GoodSpecialization(a1, a2, u, img_i, img_j, rejected)
            rejected.append((a1, a2, f"u={u}: image height < 2"))
    raise PrecisionExhausted(f"search box radius {radius} exhausted; rejected: {rejected}")


# -- elementary modules and the slope check --------------------------------------------


@dataclass(frozen=True)
class ElementaryModule:
    """Direct sum of Lambda/(d_j) for divisors d_j = pi^mu * distinguished."""

    ring: TruncatedLocalRing
    divisors: Tuple[Poly1, ...]
    chain_ok: bool = field(default=False, compare=False)

    def __post_init__(self):
        for d in self.divisors:
            if d.is_zero():
                raise ValueError("zero divisor in elementary module")
            mu = d.content_valuation()
            body = _divide_by_pi_power(d, mu)
            lead = body.coeffs[-1]
            if not lead.is_unit():
                raise NonDistinguished(f"divisor {d} is not pi-power times distinguished")
            normalized = body.scale(lead.inv())
            if normalized.degree >= 1 and not normalized.is_distinguished():
                raise NonDistinguished(f"divisor {d} is not pi-power times distinguished")
        chain = True
        for a, b in zip(self.divisors, self.divisors[1:]):
            try:
                chain = chain and _divides_with_pi(b, a)
            except PrecisionExhausted:
                chain = False
        object.__setattr__(self, "chain_ok", chain)


def _divides_with_pi(small: Poly1, big: Poly1) -> bool:
    """small | big allowing a pi-power factor mismatch."""
    mu_s, mu_b = small.content_valuation(), big.content_valuation()
    if mu_s > mu_b:
        return False
    body_s = _divide_by_pi_power(small, mu_s)
    body_b = _divide_by_pi_power(big, mu_s)  # align precisions
    lead = body_s.coeffs[-1]
    body_s = body_s.scale(lead.inv())
    if body_s.degree == 0:
        return True
    return divides_exactly(body_s, body_b)


def elementary_fitting(module: ElementaryModule, i: int, degree_cap: int = 24) -> PolyIdeal:
    """Fitt_i of the diagonal presentation: the (r-i)-fold divisor products."""
    r = len(module.divisors)
    k = r - i
    if k <= 0:
        return PolyIdeal.one_var(module.ring, [Poly1.from_ints(module.ring, [1])], degree_cap)
    gens = []
    for subset in itertools.combinations(module.divisors, k):
        prod = Poly1.from_ints(module.ring, [1])
        for d in subset:
            prod = prod * d
        gens.append(prod)
    return PolyIdeal.one_var(module.ring, gens, degree_cap)


@dataclass
class SlopeReport:
    slope_reference: int
    values: List[int]
    offsets: List[int]
    slope_matches: bool
    offset_constant: bool

    @property
    def passed(self) -> bool:
        return self.slope_matches and self.offset_constant


def slope_check(
    module: ElementaryModule,
    i: int,
    c: RingElem,
    n_max: int = 6,
) -> SlopeReport:
    """Specialize T -> c + p^n for n = 1..n_max and compare the pi-valuation
    growth of Fitt_i against its order at the prime (T - c)."""
    ring = module.ring
    fitt = elementary_fitting(module, i)
    if c.valuation() < 1 and not c.is_zero():
        raise ValueError("c must have positive valuation")
    prime = HeightOnePrime("distinguished", Poly1(ring, [-c, ring.one()]))
    slope_ref = valuation_at_prime(fitt, prime)
    values = []
    for n in range(1, n_max + 1):
        point = c + ring.from_int(ring.p) ** n
        vals = [g.eval(point).valuation() for g in fitt.gens]
        v = min(vals) if vals else 0
        if v >= ring.precision:
            raise PrecisionExhausted(f"specialized value vanished at precision (n={n})")
        values.append(v)
    offsets = [v - slope_ref * n for v, n in zip(values, range(1, n_max + 1))]
    slope_matches = all(
        values[k + 1] - values[k] == slope_ref for k in range(len(values) - 1)
    )
    offset_constant = len(set(offsets)) <= 1
    return SlopeReport(slope_ref, values, offsets, slope_matches, offset_constant)


# -- JSON codecs ------------------------------------------------------------------------


def poly_ideal_to_json(ideal: PolyIdeal) -> dict:
    gens = []
    for g in ideal.gens:
        if ideal.nvars == 1:
            monos = [
                {"e": [i], "c": list(c.coeffs)} for i, c in enumerate(g.coeffs) if not c.is_zero()
            ]
        else:
            monos = [{"e": [i, j], "c": list(c.coeffs)} for (i, j), c in sorted(g.terms.items())]
        gens.append({"monomials": monos})
    return {
        "vars": ideal.nvars,
        "gens": gens,
        "N": ideal.ring.precision,
        "p": ideal.ring.p,
        "degree_cap": ideal.degree_cap,
    }


def poly_ideal_from_json(data: dict) -> PolyIdeal:
    ring = TruncatedLocalRing(int(data.get("p", 3)), int(data["N"]))
    nvars = int(data["vars"])
    cap = int(data.get("degree_cap", 12))
    gens = []
    for g in data["gens"]:
        if nvars == 1:
            coeffs: Dict[int, RingElem] = {}
            for m in g["monomials"]:
                coeffs[m["e"][0]] = ring.elem(m["c"])
            top = max(coeffs) if coeffs else -1
            gens.append(Poly1(ring, [coeffs.get(i, ring.zero()) for i in range(top + 1)]))
        else:
            terms = {tuple(m["e"]): ring.elem(m["c"]) for m in g["monomials"]}
            gens.append(Poly2(ring, terms))
    return PolyIdeal(ring, nvars, tuple(gens), cap)
