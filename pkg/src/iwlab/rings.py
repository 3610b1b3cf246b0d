"""Truncated local rings O/pi^N and exact arithmetic in them.

Two families are supported, enough to cover unramified coefficient rings
Z_p[zeta] and totally ramified (Eisenstein) extensions with one uniformizer:

* unramified: O = Z_p[x]/(f) with f monic irreducible mod p; pi = p.
* ramified:   O = Z_p[x]/(f) with f Eisenstein at p;          pi = x.

Elements are stored in a canonical coordinate form (power basis 1..x^{d-1},
coordinate j reduced modulo its exact additive order), so equality is
bit-exact and values are safely hashable/immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

from .linalg import pval


class NonUnitError(ValueError):
    """Raised when inverting an element of positive valuation."""


class OrderDivisibleByP(ValueError):
    """Raised when asking for roots of unity of order divisible by p."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in range(2, int(n**0.5) + 1):
        if n % q == 0:
            return False
    return True


# -- polynomial helpers over F_p (for irreducibility / residue inverses) ----


def _poly_trim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a: List[int], b: List[int], f: List[int], p: int) -> List[int]:
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    return _poly_divmod(prod, f, p)[1]


def _poly_divmod(a: List[int], f: List[int], p: int) -> Tuple[List[int], List[int]]:
    # f monic over F_p
    a = [x % p for x in a]
    q = [0] * max(0, len(a) - len(f) + 1)
    d = len(f) - 1
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i] % p
        if c:
            q[i - d] = c
            for j in range(len(f)):
                a[i - d + j] = (a[i - d + j] - c * f[j]) % p
    return _poly_trim(q), _poly_trim(a[:d])


def _poly_powmod(base: List[int], e: int, f: List[int], p: int) -> List[int]:
    result = [1]
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, p)
        base = _poly_mulmod(base, base, f, p)
        e >>= 1
    return result


def _poly_gcd(a: List[int], b: List[int], p: int) -> List[int]:
    a, b = _poly_trim([x % p for x in a]), _poly_trim([x % p for x in b])
    while b:
        _, r = _poly_divmod(a, [x * pow(b[-1], -1, p) % p for x in b], p)
        a, b = b, r
    if a:
        lead_inv = pow(a[-1], -1, p)
        a = [x * lead_inv % p for x in a]
    return a


def _irreducible_mod_p(f: Sequence[int], p: int) -> bool:
    fp = _poly_trim([c % p for c in f])
    d = len(fp) - 1
    if d < 1 or fp[-1] != 1:
        return False
    if d == 1:
        return True
    x = [0, 1]
    if _poly_powmod(x, p**d, fp, p) != x:
        return False
    for q in {q for q in range(2, d + 1) if d % q == 0 and _is_prime(q)}:
        h = _poly_powmod(x, p ** (d // q), fp, p)
        diff = [(a - b) % p for a, b in zip(h + [0] * len(x), [0, 1] + [0] * len(h))]
        g = _poly_gcd(diff, fp, p)
        if len(g) - 1 > 0:
            return False
    return True


def _poly_xgcd_inverse(a: List[int], f: List[int], p: int) -> List[int]:
    """Inverse of a modulo (f, p); a must be coprime to f over F_p."""
    r0, r1 = _poly_trim([x % p for x in f]), _poly_trim([x % p for x in a])
    s0, s1 = [], [1]
    while r1:
        lead_inv = pow(r1[-1], -1, p)
        r1n = [x * lead_inv % p for x in r1]
        q, r = _poly_divmod(r0, r1n, p)
        q = [x * lead_inv % p for x in q]
        s2 = list(s0)
        qs = [0] * (len(q) + len(s1) - 1) if q and s1 else []
        for i, xq in enumerate(q):
            for j, xs in enumerate(s1):
                qs[i + j] = (qs[i + j] + xq * xs) % p
        ln = max(len(s2), len(qs))
        s2 = [(s2[i] if i < len(s2) else 0) - (qs[i] if i < len(qs) else 0) for i in range(ln)]
        s2 = _poly_trim([x % p for x in s2])
        r0, r1 = r1, _poly_trim(r)
        s0, s1 = s1, s2
    if len(r0) != 1:
        raise NonUnitError("element not invertible in residue field")
    c_inv = pow(r0[0], -1, p)
    return [x * c_inv % p for x in s0]


@dataclass(frozen=True)
class TruncatedLocalRing:
    """O/pi^N for O unramified or Eisenstein over Z_p.

    `poly` is the defining polynomial, lowest degree first, monic.  The
    shorthand poly=(1,) (or [1] in JSON) denotes the trivial extension, so
    the ring is plain Z/p^N.
    """

    p: int
    precision: int
    poly: Tuple[int, ...] = (1,)
    ramified: bool = False

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.precision < 1:
            raise ValueError("precision must be >= 1")
        poly = tuple(int(c) for c in self.poly)
        if poly == (1,):
            poly = (0, 1)  # trivial extension: f = x, pi = p either way
            object.__setattr__(self, "ramified", False)
        object.__setattr__(self, "poly", poly)
        if len(poly) < 2 or poly[-1] != 1:
            raise ValueError("defining polynomial must be monic of degree >= 1")
        if self.ramified:
            d = len(poly) - 1
            if any(c % self.p for c in poly[:-1]):
                raise ValueError("ramified case requires an Eisenstein polynomial")
            if poly[0] % self.p**2 == 0:
                raise ValueError("Eisenstein polynomial needs p||constant term")
            if d == 1:
                # pi = x = -a0 = p*unit: same ring as Z/p^N, normalize.
                object.__setattr__(self, "poly", (0, 1))
                object.__setattr__(self, "ramified", False)
        else:
            if not _irreducible_mod_p(poly, self.p):
                raise ValueError("defining polynomial must be irreducible mod p")

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    @property
    def coord_moduli(self) -> Tuple[int, ...]:
        d = self.degree
        if not self.ramified:
            return (self.p**self.precision,) * d
        # val(c_j x^j) = d*val_p(c_j) + j, all distinct mod d, so coordinate
        # j is determined modulo p^ceil((N-j)/d).
        out = []
        for j in range(d):
            mj = max(0, -(-(self.precision - j) // d))
            out.append(self.p**mj)
        return tuple(out)

    @property
    def residue_field_size(self) -> int:
        return self.p**self.degree if not self.ramified else self.p

    @property
    def size(self) -> int:
        n = 1
        for m in self.coord_moduli:
            n *= m
        return n

    def with_precision(self, new_precision: int) -> "TruncatedLocalRing":
        return TruncatedLocalRing(self.p, new_precision, self.poly, self.ramified)

    # -- element constructors ------------------------------------------------

    def elem(self, coeffs: Sequence[int]) -> "RingElem":
        return RingElem(self, tuple(coeffs))

    def from_int(self, n: int) -> "RingElem":
        return self.elem([n] + [0] * (self.degree - 1))

    def zero(self) -> "RingElem":
        return self.from_int(0)

    def one(self) -> "RingElem":
        return self.from_int(1)

    def gen(self) -> "RingElem":
        """The power-basis generator x (for d >= 2)."""
        if self.degree < 2:
            raise ValueError("trivial extension has no generator x")
        return self.elem([0, 1] + [0] * (self.degree - 2))

    def uniformizer(self) -> "RingElem":
        if self.ramified:
            return self.elem([0, 1] + [0] * (self.degree - 2))
        return self.from_int(self.p)

    def elements(self) -> Iterator["RingElem"]:
        """All p^{dN}-ish elements (use only on desk-scale rings)."""

        def rec(j: int, acc: List[int]):
            if j == self.degree:
                yield self.elem(list(acc))
                return
            for c in range(self.coord_moduli[j]):
                acc.append(c)
                yield from rec(j + 1, acc)
                acc.pop()

        yield from rec(0, [])

    def __repr__(self) -> str:
        if self.degree == 1:
            return f"Z/{self.p}^{self.precision}"
        kind = "ram" if self.ramified else "unram"
        return f"Z/{self.p}^{self.precision}[x]/{list(self.poly)}({kind})"

    # -- JSON descriptor -----------------------------------------------------

    def to_descriptor(self) -> dict:
        poly = [1] if self.degree == 1 else list(self.poly)
        return {"p": self.p, "N": self.precision, "poly": poly, "ramified": self.ramified}

    @staticmethod
    def from_descriptor(desc: dict) -> "TruncatedLocalRing":
        return TruncatedLocalRing(
            int(desc["p"]),
            int(desc["N"]),
            tuple(desc.get("poly", [1])),
            bool(desc.get("ramified", False)),
        )


@dataclass(frozen=True)
class RingElem:
    """A canonical-form element of a TruncatedLocalRing."""

    ring: TruncatedLocalRing
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        d = self.ring.degree
        raw = list(self.coeffs) + [0] * (d - len(self.coeffs))
        if len(raw) > d:
            raise ValueError("coordinate vector longer than ring degree")
        mods = self.ring.coord_moduli
        object.__setattr__(self, "coeffs", tuple(c % m for c, m in zip(raw, mods)))

    def _require_same_ring(self, other: "RingElem") -> None:
        if self.ring != other.ring:
            raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")

    def __add__(self, other: "RingElem") -> "RingElem":
        self._require_same_ring(other)
        return RingElem(self.ring, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "RingElem") -> "RingElem":
        self._require_same_ring(other)
        return RingElem(self.ring, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "RingElem":
        return RingElem(self.ring, tuple(-a for a in self.coeffs))

    def __mul__(self, other: "RingElem") -> "RingElem":
        self._require_same_ring(other)
        d = self.ring.degree
        if d == 1:
            return RingElem(self.ring, (self.coeffs[0] * other.coeffs[0],))
        prod = [0] * (2 * d - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] += a * b
        f = self.ring.poly
        for i in range(2 * d - 2, d - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j in range(d):
                    prod[i - d + j] -= c * f[j]
        return RingElem(self.ring, tuple(prod[:d]))

    def __pow__(self, e: int) -> "RingElem":
        if e < 0:
            return self.inv() ** (-e)
        result = self.ring.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def valuation(self) -> int:
        """Largest k <= N with self in (pi^k); the zero residue gets N."""
        n_prec = self.ring.precision
        p = self.ring.p
        if self.is_zero():
            return n_prec
        if not self.ring.ramified:
            return min(pval(c, p, n_prec) for c in self.coeffs if c)
        d = self.ring.degree
        vals = [
            d * pval(c, p, self.ring.precision) + j
            for j, c in enumerate(self.coeffs)
            if c
        ]
        return min(min(vals), n_prec)

    def is_unit(self) -> bool:
        return self.valuation() == 0

    def inv(self) -> "RingElem":
        """Exact inverse of a unit (residue-field inverse + Newton lifting)."""
        if not self.is_unit():
            raise NonUnitError(f"{self} has positive valuation")
        ring = self.ring
        p = ring.p
        if ring.ramified or ring.degree == 1:
            b = ring.from_int(pow(self.coeffs[0] % p, -1, p))
        else:
            inv_poly = _poly_xgcd_inverse(list(self.coeffs), list(ring.poly), p)
            b = ring.elem(inv_poly + [0] * (ring.degree - len(inv_poly)))
        one = ring.one()
        two = ring.from_int(2)
        while self * b != one:
            b = b * (two - self * b)
        return b

    def reduce_precision(self, new_precision: int) -> "RingElem":
        if not 1 <= new_precision <= self.ring.precision:
            raise ValueError("target precision must satisfy 1 <= N' <= N")
        return RingElem(self.ring.with_precision(new_precision), self.coeffs)

    def __repr__(self) -> str:
        if self.ring.degree == 1:
            return str(self.coeffs[0])
        return str(list(self.coeffs))


def ring_arith(a: RingElem, b: RingElem, op: str) -> RingElem:
    """Dispatch form of +, -, * used by the CLI."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def inv_unit(a: RingElem) -> RingElem:
    return a.inv()


def valuation(a: RingElem) -> int:
    return a.valuation()


def reduce_precision(a: RingElem, new_precision: int) -> RingElem:
    return a.reduce_precision(new_precision)


def roots_of_unity(ring: TruncatedLocalRing, order: int) -> List[RingElem]:
    """All z with z^order = 1, Hensel-lifted from the residue field.

    Requires gcd(order, p) = 1; the count is gcd(order, #k - 1) where k is
    the residue field.
    """
    if order < 1:
        raise ValueError("order must be positive")
    if order % ring.p == 0:
        raise OrderDivisibleByP(f"order {order} is divisible by p={ring.p}")
    p = ring.p
    # roots in the residue field, by scan
    if ring.ramified or ring.degree == 1:
        res_roots = [[z] for z in range(1, p) if pow(z, order, p) == 1]
        width = 1
    else:
        d = ring.degree
        fp = [c % p for c in ring.poly]
        res_roots = []
        from itertools import product

        for vec in product(range(p), repeat=d):
            if not any(vec):
                continue
            if _poly_powmod(_poly_trim(list(vec)), order, fp, p) == [1]:
                res_roots.append(list(vec))
        width = d
    order_elem = ring.from_int(order)
    out = []
    for root in res_roots:
        z = ring.elem(root + [0] * (ring.degree - width))
        # Newton for z^order - 1: converges since the derivative is a unit.
        while (zo := z**order) != ring.one():
            z = z - (zo - ring.one()) * (order_elem * z ** (order - 1)).inv()
        out.append(z)
    out.sort(key=lambda e: e.coeffs)
    for z in out:
        assert z**order == ring.one()
    return out


def extend_scalars(a: RingElem, big: TruncatedLocalRing) -> RingElem:
    """Embed an element of Z/p^N into an unramified extension ring."""
    if a.ring.degree != 1:
        raise ValueError("scalar extension is implemented from the base ring only")
    if big.p != a.ring.p or big.precision != a.ring.precision:
        raise ValueError("extension must share p and precision")
    return big.from_int(a.coeffs[0])
