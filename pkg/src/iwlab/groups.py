"""Finite abelian groups, group rings R[G], and the operator calculus on them.

Everything downstream (Fitting ideals, Euler towers) works with sparse
group-ring elements over a TruncatedLocalRing.  Linear algebra over R[G] is
done by flattening to the free Z/p^N-module on the basis {g * x^j} and
running the chain-ring Howell/diagonalization kernels from `linalg`.

Flattening requires the additive group of the coefficient ring to have a
single exponent p^N, which holds for unramified rings and for d = 1; the
genuinely ramified rings of higher degree keep their exact arithmetic but
are rejected here (no lemma suite needs them under a group algebra).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import linalg
from .rings import RingElem, TruncatedLocalRing, roots_of_unity

GroupElem = Tuple[int, ...]


@dataclass(frozen=True)
class FinAbGroup:
    """Product of cyclic groups Z/m_1 x ... x Z/m_k, elements = exponent tuples."""

    cyclic_orders: Tuple[int, ...]

    def __post_init__(self):
        orders = tuple(int(m) for m in self.cyclic_orders)
        if any(m < 1 for m in orders):
            raise ValueError("cyclic orders must be positive")
        object.__setattr__(self, "cyclic_orders", orders)

    @property
    def rank(self) -> int:
        return len(self.cyclic_orders)

    @property
    def order(self) -> int:
        n = 1
        for m in self.cyclic_orders:
            n *= m
        return n

    def identity(self) -> GroupElem:
        return (0,) * self.rank

    def reduce(self, g: Sequence[int]) -> GroupElem:
        if len(g) != self.rank:
            raise ValueError(f"element {g} has wrong rank for {self}")
        return tuple(int(x) % m for x, m in zip(g, self.cyclic_orders))

    def add(self, g: GroupElem, h: GroupElem) -> GroupElem:
        return tuple((a + b) % m for a, b, m in zip(g, h, self.cyclic_orders))

    def neg(self, g: GroupElem) -> GroupElem:
        return tuple((-a) % m for a, m in zip(g, self.cyclic_orders))

    def scale(self, g: GroupElem, k: int) -> GroupElem:
        return tuple((a * k) % m for a, m in zip(g, self.cyclic_orders))

    def elements(self) -> Iterator[GroupElem]:
        return itertools.product(*(range(m) for m in self.cyclic_orders))

    def element_index(self, g: GroupElem) -> int:
        idx = 0
        for a, m in zip(g, self.cyclic_orders):
            idx = idx * m + (a % m)
        return idx

    def generator(self, i: int) -> GroupElem:
        g = [0] * self.rank
        g[i] = 1
        return tuple(g)

    def subgroup_elements(self, gens: Iterable[GroupElem]) -> List[GroupElem]:
        gens = [self.reduce(g) for g in gens]
        seen = {self.identity()}
        frontier = [self.identity()]
        while frontier:
            cur = frontier.pop()
            for g in gens:
                nxt = self.add(cur, g)
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return sorted(seen)

    def element_order(self, g: GroupElem) -> int:
        n = 1
        cur = self.reduce(g)
        while cur != self.identity():
            cur = self.add(cur, g)
            n += 1
        return n

    def to_descriptor(self) -> dict:
        return {"cyclic_orders": list(self.cyclic_orders)}

    @staticmethod
    def from_descriptor(desc: dict) -> "FinAbGroup":
        return FinAbGroup(tuple(desc["cyclic_orders"]))

    def __repr__(self) -> str:
        return "x".join(f"Z/{m}" for m in self.cyclic_orders) or "1"


class GroupRingElem:
    """Sparse element of R[G]; zero coefficients are never stored."""

    __slots__ = ("ring", "group", "terms")

    def __init__(
        self,
        ring: TruncatedLocalRing,
        group: FinAbGroup,
        terms: Optional[Dict[GroupElem, RingElem]] = None,
    ):
        self.ring = ring
        self.group = group
        clean: Dict[GroupElem, RingElem] = {}
        for g, c in (terms or {}).items():
            if c.ring != ring:
                raise ValueError("coefficient from a different ring")
            if not c.is_zero():
                clean[group.reduce(g)] = c
        self.terms = clean

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def zero(ring: TruncatedLocalRing, group: FinAbGroup) -> "GroupRingElem":
        return GroupRingElem(ring, group, {})

    @staticmethod
    def one(ring: TruncatedLocalRing, group: FinAbGroup) -> "GroupRingElem":
        return GroupRingElem(ring, group, {group.identity(): ring.one()})

    @staticmethod
    def monomial(
        ring: TruncatedLocalRing,
        group: FinAbGroup,
        g: Sequence[int],
        coeff: Optional[RingElem] = None,
    ) -> "GroupRingElem":
        return GroupRingElem(ring, group, {tuple(g): coeff if coeff is not None else ring.one()})

    @staticmethod
    def from_int(ring: TruncatedLocalRing, group: FinAbGroup, n: int) -> "GroupRingElem":
        return GroupRingElem(ring, group, {group.identity(): ring.from_int(n)})

    # -- basic structure -------------------------------------------------------

    def coeff(self, g: Sequence[int]) -> RingElem:
        return self.terms.get(self.group.reduce(g), self.ring.zero())

    def support(self) -> List[GroupElem]:
        return sorted(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupRingElem)
            and self.ring == other.ring
            and self.group == other.group
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.ring, self.group, tuple(sorted(self.terms.items()))))

    def _require_compatible(self, other: "GroupRingElem") -> None:
        if self.ring != other.ring or self.group != other.group:
            raise ValueError("group-ring mismatch")

    def __add__(self, other: "GroupRingElem") -> "GroupRingElem":
        self._require_compatible(other)
        out = dict(self.terms)
        for g, c in other.terms.items():
            s = out.get(g)
            out[g] = c if s is None else s + c
        return GroupRingElem(self.ring, self.group, out)

    def __sub__(self, other: "GroupRingElem") -> "GroupRingElem":
        return self + (-other)

    def __neg__(self) -> "GroupRingElem":
        return GroupRingElem(self.ring, self.group, {g: -c for g, c in self.terms.items()})

    def __mul__(self, other: "GroupRingElem") -> "GroupRingElem":
        self._require_compatible(other)
        out: Dict[GroupElem, RingElem] = {}
        add = self.group.add
        for g, a in self.terms.items():
            for h, b in other.terms.items():
                k = add(g, h)
                c = a * b
                s = out.get(k)
                out[k] = c if s is None else s + c
        return GroupRingElem(self.ring, self.group, out)

    def scale(self, c: RingElem) -> "GroupRingElem":
        return GroupRingElem(self.ring, self.group, {g: a * c for g, a in self.terms.items()})

    def scale_int(self, n: int) -> "GroupRingElem":
        return self.scale(self.ring.from_int(n))

    def act(self, g: Sequence[int]) -> "GroupRingElem":
        """Multiplication by the group element g."""
        g = self.group.reduce(g)
        return GroupRingElem(
            self.ring, self.group, {self.group.add(g, h): c for h, c in self.terms.items()}
        )

    def involution(self) -> "GroupRingElem":
        """g -> g^{-1} extended linearly."""
        return GroupRingElem(
            self.ring, self.group, {self.group.neg(g): c for g, c in self.terms.items()}
        )

    def augmentation(self) -> RingElem:
        total = self.ring.zero()
        for c in self.terms.values():
            total = total + c
        return total

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = [f"{c}*{g}" for g, c in sorted(self.terms.items())]
        return " + ".join(bits)

    # -- JSON ------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "terms": [
                {"g": list(g), "c": list(c.coeffs)} for g, c in sorted(self.terms.items())
            ]
        }

    @staticmethod
    def from_json(ring: TruncatedLocalRing, group: FinAbGroup, data: dict) -> "GroupRingElem":
        terms = {}
        for t in data.get("terms", []):
            terms[tuple(t["g"])] = ring.elem(t["c"])
        return GroupRingElem(ring, group, terms)


# -- norm, augmentation ideal, idempotents ------------------------------------


def norm_element(
    ring: TruncatedLocalRing, group: FinAbGroup, subgroup_gens: Iterable[GroupElem]
) -> GroupRingElem:
    """N_H = sum of the subgroup generated by `subgroup_gens`."""
    elems = group.subgroup_elements(subgroup_gens)
    return GroupRingElem(ring, group, {g: ring.one() for g in elems})


def augmentation_ideal_gens(
    ring: TruncatedLocalRing, group: FinAbGroup, subgroup_gens: Iterable[GroupElem]
) -> List[GroupRingElem]:
    """Generators {h - 1} of I(H) for the subgroup generated by the given set."""
    out = []
    for h in subgroup_gens:
        out.append(
            GroupRingElem.monomial(ring, group, group.reduce(h))
            - GroupRingElem.one(ring, group)
        )
    return out


@dataclass(frozen=True)
class Character:
    """Character of a finite abelian group with unit values in the ring."""

    group: FinAbGroup
    values: Tuple[RingElem, ...]

    def __post_init__(self):
        if len(self.values) != self.group.rank:
            raise ValueError("need one value per cyclic generator")
        for v, m in zip(self.values, self.group.cyclic_orders):
            if v**m != v.ring.one():
                raise ValueError("character value order must divide the generator order")

    @property
    def ring(self) -> TruncatedLocalRing:
        return self.values[0].ring if self.values else None  # type: ignore[return-value]

    def __call__(self, g: Sequence[int]) -> RingElem:
        g = self.group.reduce(g)
        out = self.values[0].ring.one()
        for e, v in zip(g, self.values):
            out = out * v**e
        return out

    @staticmethod
    def trivial(ring: TruncatedLocalRing, group: FinAbGroup) -> "Character":
        return Character(group, tuple(ring.one() for _ in range(group.rank)))

    @staticmethod
    def all_characters(ring: TruncatedLocalRing, group: FinAbGroup) -> List["Character"]:
        """All characters whose values exist in the ring (p coprime to #G)."""
        choices = []
        for m in group.cyclic_orders:
            roots = roots_of_unity(ring, m)
            choices.append(roots)
        out = []
        for combo in itertools.product(*choices):
            try:
                out.append(Character(group, tuple(combo)))
            except ValueError:
                continue
        return out


class MissingRoots(ValueError):
    pass


class OrderNotCoprime(ValueError):
    pass


def idempotent(psi: Character) -> GroupRingElem:
    """e_psi = |G|^{-1} sum_g psi(g) g^{-1}; a character idempotent."""
    ring = psi.ring
    group = psi.group
    if group.order % ring.p == 0:
        raise OrderNotCoprime(f"#G={group.order} is divisible by p={ring.p}")
    inv_n = ring.from_int(group.order).inv()
    terms: Dict[GroupElem, RingElem] = {}
    for g in group.elements():
        terms[group.neg(g)] = psi(g) * inv_n
    return GroupRingElem(ring, group, terms)


# -- Kolyvagin operators -------------------------------------------------------


def kolyvagin_D(
    ring: TruncatedLocalRing,
    group: FinAbGroup,
    primes: Sequence[Tuple[GroupElem, int]],
) -> GroupRingElem:
    """D_n = prod_l D_l with D_l = sum_{i=1}^{#H_l - 1} i * sigma_l^i.

    `primes` lists (sigma_l, #H_l); each sigma_l must generate its H_l factor
    and distinct factors must be independent coordinates of the group.
    """
    used_coords: set = set()
    out = GroupRingElem.one(ring, group)
    for sigma, order in primes:
        sigma = group.reduce(sigma)
        coords = {i for i, e in enumerate(sigma) if e}
        if len(coords) != 1:
            raise ValueError(f"sigma {sigma} must live in a single cyclic factor")
        (coord,) = coords
        if coord in used_coords:
            raise ValueError("H_l factors must be independent")
        used_coords.add(coord)
        if group.element_order(sigma) != order:
            raise ValueError(f"sigma {sigma} does not generate a factor of order {order}")
        d_l = GroupRingElem(
            ring,
            group,
            {
                group.scale(sigma, i): ring.from_int(i)
                for i in range(1, order)
            },
        )
        out = out * d_l
    return out


# -- the s_n projector ----------------------------------------------------------


def sn_apply(
    x: GroupRingElem, prime_coords: Sequence[int]
) -> GroupRingElem:
    """s_n = sum over divisor supports d of (-1)^{eps(n/d)} pi_d applied to x.

    `prime_coords` are the coordinates of the H_l factors inside x.group; the
    projection pi_d keeps the coordinates in d and kills the others.
    """
    group = x.group
    out = GroupRingElem.zero(x.ring, group)
    r = len(prime_coords)
    for keep_size in range(r + 1):
        for keep in itertools.combinations(prime_coords, keep_size):
            sign = (-1) ** (r - keep_size)
            proj_terms: Dict[GroupElem, RingElem] = {}
            for g, c in x.terms.items():
                h = list(g)
                for i in prime_coords:
                    if i not in keep:
                        h[i] = 0
                h_t = tuple(h)
                s = proj_terms.get(h_t)
                proj_terms[h_t] = c if s is None else s + c
            term = GroupRingElem(x.ring, group, proj_terms)
            out = out + (term if sign > 0 else -term)
    return out


# -- ring maps (base-change handles) --------------------------------------------


class RingMap:
    """A homomorphism handle R[G] -> R'[G'] built from coefficient and group data.

    Kinds:
      * precision: reduce coefficients O/pi^N -> O/pi^N'
      * group: push forward along a group homomorphism G -> G'
      * eval: evaluate one cyclic coordinate at a unit u == 1 mod pi, dropping it
      * character: evaluate a coordinate block at character values (e.g. the
        psi-component map on a Delta-factor)
    """

    def __init__(
        self,
        src_ring: TruncatedLocalRing,
        src_group: FinAbGroup,
        dst_ring: TruncatedLocalRing,
        dst_group: FinAbGroup,
        elem_map: Callable[[GroupElem], Tuple[GroupElem, RingElem]],
        coeff_map: Callable[[RingElem], RingElem],
        label: str,
    ):
        self.src_ring = src_ring
        self.src_group = src_group
        self.dst_ring = dst_ring
        self.dst_group = dst_group
        self._elem_map = elem_map
        self._coeff_map = coeff_map
        self.label = label

    def __call__(self, x: GroupRingElem) -> GroupRingElem:
        if x.ring != self.src_ring or x.group != self.src_group:
            raise ValueError("element incompatible with this map")
        out: Dict[GroupElem, RingElem] = {}
        for g, c in x.terms.items():
            h, scale = self._elem_map(g)
            val = self._coeff_map(c) * scale
            s = out.get(h)
            out[h] = val if s is None else s + val
        return GroupRingElem(self.dst_ring, self.dst_group, out)

    def __repr__(self) -> str:
        return f"RingMap({self.label})"


def precision_map(
    ring: TruncatedLocalRing, group: FinAbGroup, new_precision: int
) -> RingMap:
    dst = ring.with_precision(new_precision)
    return RingMap(
        ring,
        group,
        dst,
        group,
        lambda g: (g, dst.one()),
        lambda c: c.reduce_precision(new_precision),
        f"precision->{new_precision}",
    )


def group_quotient_map(
    ring: TruncatedLocalRing,
    group: FinAbGroup,
    dst_group: FinAbGroup,
    gen_images: Sequence[GroupElem],
) -> RingMap:
    """Push forward along the homomorphism sending generator i to gen_images[i]."""
    if len(gen_images) != group.rank:
        raise ValueError("need one image per source generator")
    images = [dst_group.reduce(h) for h in gen_images]
    for img, m in zip(images, group.cyclic_orders):
        if dst_group.scale(img, m) != dst_group.identity():
            raise ValueError("image order does not divide generator order")

    def elem_map(g: GroupElem) -> Tuple[GroupElem, RingElem]:
        h = dst_group.identity()
        for e, img in zip(g, images):
            h = dst_group.add(h, dst_group.scale(img, e))
        return h, ring.one()

    return RingMap(ring, group, ring, dst_group, elem_map, lambda c: c, "group-quotient")


def eval_map(
    ring: TruncatedLocalRing, group: FinAbGroup, coord: int, u: RingElem
) -> RingMap:
    """gamma_coord -> u (a unit == 1 mod pi); identity on the other coordinates."""
    if u.ring != ring:
        raise ValueError("u must live in the coefficient ring")
    if (u - ring.one()).valuation() < 1:
        raise ValueError("u must be congruent to 1 mod pi")
    m = group.cyclic_orders[coord]
    if u**m != ring.one():
        raise ValueError(f"u^{m} != 1: evaluation is not well defined at precision")
    dst_orders = tuple(o for i, o in enumerate(group.cyclic_orders) if i != coord)
    dst_group = FinAbGroup(dst_orders)
    powers = [ring.one()]
    for _ in range(1, m):
        powers.append(powers[-1] * u)

    def elem_map(g: GroupElem) -> Tuple[GroupElem, RingElem]:
        h = tuple(e for i, e in enumerate(g) if i != coord)
        return h, powers[g[coord]]

    return RingMap(ring, group, ring, dst_group, elem_map, lambda c: c, f"eval[{coord}]")


def character_collapse_map(
    ring: TruncatedLocalRing,
    group: FinAbGroup,
    coords: Sequence[int],
    psi_values: Sequence[RingElem],
) -> RingMap:
    """Evaluate the coordinates in `coords` at the given character values."""
    coords = list(coords)
    if len(psi_values) != len(coords):
        raise ValueError("need one character value per collapsed coordinate")
    for v, i in zip(psi_values, coords):
        if not v.is_unit():
            raise MissingRoots("character values must be units")
        if v ** group.cyclic_orders[i] != ring.one():
            raise ValueError("character value order must divide the coordinate order")
    dst_orders = tuple(o for i, o in enumerate(group.cyclic_orders) if i not in coords)
    dst_group = FinAbGroup(dst_orders)
    value_of = dict(zip(coords, psi_values))

    def elem_map(g: GroupElem) -> Tuple[GroupElem, RingElem]:
        h = tuple(e for i, e in enumerate(g) if i not in coords)
        scale = ring.one()
        for i in coords:
            scale = scale * value_of[i] ** g[i]
        return h, scale

    return RingMap(ring, group, ring, dst_group, elem_map, lambda c: c, "character-collapse")


# -- flattening to Z/p^N and group-ring linear algebra ---------------------------


def flat_dim(ring: TruncatedLocalRing, group: FinAbGroup) -> int:
    return ring.degree * group.order


def _require_flattenable(ring: TruncatedLocalRing) -> None:
    if ring.ramified and ring.degree > 1:
        raise ValueError(
            "group-ring linear algebra needs a uniform additive modulus; "
            "ramified rings of degree > 1 are not supported here"
        )


def flatten_elem(x: GroupRingElem) -> List[int]:
    """Coordinates of x in the Z/p^N basis {g * x^j}, g in lex order."""
    _require_flattenable(x.ring)
    d = x.ring.degree
    out = [0] * flat_dim(x.ring, x.group)
    for g, c in x.terms.items():
        base = x.group.element_index(g) * d
        for j, cj in enumerate(c.coeffs):
            out[base + j] = cj
    return out


def unflatten_elem(
    vec: Sequence[int], ring: TruncatedLocalRing, group: FinAbGroup
) -> GroupRingElem:
    _require_flattenable(ring)
    d = ring.degree
    terms: Dict[GroupElem, RingElem] = {}
    for idx, g in enumerate(group.elements()):
        coeffs = vec[idx * d : (idx + 1) * d]
        if any(coeffs):
            terms[g] = ring.elem(list(coeffs))
    return GroupRingElem(ring, group, terms)


def operator_matrix(x: GroupRingElem) -> List[List[int]]:
    """Matrix of multiplication-by-x on the flattened module (column = image of basis)."""
    _require_flattenable(x.ring)
    ring, group = x.ring, x.group
    d = ring.degree
    n = flat_dim(ring, group)
    cols: List[List[int]] = []
    for g in group.elements():
        for j in range(d):
            basis_elem = GroupRingElem.monomial(
                ring, group, g, ring.elem([0] * j + [1] + [0] * (d - 1 - j))
            )
            cols.append(flatten_elem(x * basis_elem))
    return [[cols[c][r] for c in range(n)] for r in range(n)]


def flatten_matrix(
    rows: Sequence[Sequence[GroupRingElem]],
    ring: TruncatedLocalRing,
    group: FinAbGroup,
) -> List[List[int]]:
    """Block-flatten a matrix over R[G] into one over Z/p^N."""
    _require_flattenable(ring)
    n_block = flat_dim(ring, group)
    m = len(rows)
    n = len(rows[0]) if m else 0
    out = [[0] * (n * n_block) for _ in range(m * n_block)]
    for i in range(m):
        for j in range(n):
            block = operator_matrix(rows[i][j])
            for r in range(n_block):
                orow = out[i * n_block + r]
                brow = block[r]
                for c in range(n_block):
                    orow[j * n_block + c] = brow[c]
    return out


def flatten_vector(
    vec: Sequence[GroupRingElem], ring: TruncatedLocalRing, group: FinAbGroup
) -> List[int]:
    out: List[int] = []
    for x in vec:
        out.extend(flatten_elem(x))
    return out


def unflatten_vector(
    flat: Sequence[int], n: int, ring: TruncatedLocalRing, group: FinAbGroup
) -> List[GroupRingElem]:
    n_block = flat_dim(ring, group)
    return [
        unflatten_elem(flat[i * n_block : (i + 1) * n_block], ring, group)
        for i in range(n)
    ]


@dataclass
class LinearSolution:
    solvable: bool
    particular: Optional[List[GroupRingElem]]
    kernel: List[List[GroupRingElem]]
    howell: List[List[int]]


def howell_solve(
    mat: Sequence[Sequence[GroupRingElem]],
    rhs: Sequence[GroupRingElem],
    ring: TruncatedLocalRing,
    group: FinAbGroup,
) -> LinearSolution:
    """Solve an R[G]-linear system by flattening to Z/p^N.

    Returns a particular solution, Howell-canonical kernel generators (as
    vectors over R[G]), and the Howell form of the flattened matrix row span.
    """
    m = len(mat)
    n = len(mat[0]) if m else 0
    if any(len(row) != n for row in mat):
        raise ValueError("ragged matrix")
    if len(rhs) != m:
        raise ValueError("dimension mismatch between matrix and right-hand side")
    p, n_prec = ring.p, ring.precision
    flat_a = flatten_matrix(mat, ring, group)
    flat_b = flatten_vector(rhs, ring, group)
    n_block = flat_dim(ring, group)
    ok, x, ker = linalg.solve(flat_a, flat_b, p, n_prec, ncols=n * n_block)
    hform = linalg.howell_form(flat_a, p, n_prec)
    if not ok:
        return LinearSolution(False, None, [], hform)
    particular = unflatten_vector(x, n, ring, group)
    kernel = [unflatten_vector(k, n, ring, group) for k in ker]
    return LinearSolution(True, particular, kernel, hform)


def module_span_rows(
    vectors: Sequence[Sequence[GroupRingElem]],
    ring: TruncatedLocalRing,
    group: FinAbGroup,
) -> List[List[int]]:
    """Flattened Z/p^N-generators of the R[G]-span of the given vectors."""
    _require_flattenable(ring)
    d = ring.degree
    rows: List[List[int]] = []
    monomials = [
        GroupRingElem.monomial(ring, group, g, ring.elem([0] * j + [1] + [0] * (d - 1 - j)))
        for g in group.elements()
        for j in range(d)
    ]
    for vec in vectors:
        for mono in monomials:
            rows.append(flatten_vector([mono * x for x in vec], ring, group))
    return rows
