"""Finitely presented modules over group rings.

A module is given by a relation matrix A over R[G]: M = coker(A : R^m -> R^n).
Higher Fitting ideals come from minors of A, Hom modules from flattened kernel
computations, and the exterior-power biduals from Hom-of-wedge-of-Hom.  All
ideal and module comparisons go through Howell-canonical flattened spans.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .groups import (
    FinAbGroup,
    GroupRingElem,
    RingMap,
    flat_dim,
    flatten_matrix,
    flatten_vector,
    howell_solve,
    module_span_rows,
    unflatten_vector,
)
from .rings import RingElem, TruncatedLocalRing


class UnderlyingNotFree(ValueError):
    """The flattened underlying module is not free over Z/p^N."""


@dataclass(frozen=True)
class IdealGens:
    """Finitely generated ideal of R[G], compared via Howell forms."""

    ring: TruncatedLocalRing
    group: FinAbGroup
    gens: Tuple[GroupRingElem, ...]

    def howell(self) -> List[List[int]]:
        cached = getattr(self, "_howell_cache", None)
        if cached is None:
            rows = module_span_rows([[g] for g in self.gens], self.ring, self.group)
            cached = linalg.howell_form(rows, self.ring.p, self.ring.precision)
            object.__setattr__(self, "_howell_cache", cached)
        return cached

    def contains(self, x: GroupRingElem) -> bool:
        from .groups import flatten_elem

        return linalg.in_span(flatten_elem(x), self.howell(), self.ring.p, self.ring.precision)

    def issubset(self, other: "IdealGens") -> bool:
        hw = other.howell()
        from .groups import flatten_elem

        return all(
            linalg.in_span(flatten_elem(g), hw, self.ring.p, self.ring.precision)
            for g in self.gens
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IdealGens)
            and self.ring == other.ring
            and self.group == other.group
            and self.howell() == other.howell()
        )

    def __hash__(self):
        return hash((self.ring, self.group, tuple(map(tuple, self.howell()))))

    def __add__(self, other: "IdealGens") -> "IdealGens":
        return IdealGens(self.ring, self.group, self.gens + other.gens)

    def __mul__(self, other: "IdealGens") -> "IdealGens":
        prods = tuple(a * b for a in self.gens for b in other.gens)
        return IdealGens(self.ring, self.group, prods)

    def is_zero(self) -> bool:
        return not self.howell()

    def is_full(self) -> bool:
        return self.contains(GroupRingElem.one(self.ring, self.group))

    @staticmethod
    def zero(ring: TruncatedLocalRing, group: FinAbGroup) -> "IdealGens":
        return IdealGens(ring, group, ())

    @staticmethod
    def full(ring: TruncatedLocalRing, group: FinAbGroup) -> "IdealGens":
        return IdealGens(ring, group, (GroupRingElem.one(ring, group),))

    def map(self, phi: RingMap) -> "IdealGens":
        return IdealGens(phi.dst_ring, phi.dst_group, tuple(phi(g) for g in self.gens))

    def to_json(self) -> dict:
        return {
            "gens": [g.to_json() for g in self.gens],
            "howell_canonical": self.howell(),
        }


@dataclass(frozen=True)
class FPModule:
    """M = coker(A) for a relation matrix A (rows = relations) over R[G]."""

    ring: TruncatedLocalRing
    group: FinAbGroup
    n_gens: int
    relations: Tuple[Tuple[GroupRingElem, ...], ...]

    def __post_init__(self):
        for row in self.relations:
            if len(row) != self.n_gens:
                raise ValueError("relation row width != number of generators")

    @staticmethod
    def from_rows(
        ring: TruncatedLocalRing,
        group: FinAbGroup,
        n_gens: int,
        rows: Sequence[Sequence[GroupRingElem]],
    ) -> "FPModule":
        return FPModule(ring, group, n_gens, tuple(tuple(r) for r in rows))

    @staticmethod
    def free(ring: TruncatedLocalRing, group: FinAbGroup, rank: int) -> "FPModule":
        return FPModule(ring, group, rank, ())

    @staticmethod
    def from_diagonal(
        ring: TruncatedLocalRing, group: FinAbGroup, diag: Sequence[GroupRingElem]
    ) -> "FPModule":
        n = len(diag)
        rows = []
        zero = GroupRingElem.zero(ring, group)
        for i, d in enumerate(diag):
            rows.append(tuple(d if j == i else zero for j in range(n)))
        return FPModule(ring, group, n, tuple(rows))

    # -- flattened views -------------------------------------------------------

    def relation_span(self) -> List[List[int]]:
        """Howell form of the flattened R[G]-span of the relation rows."""
        rows = module_span_rows(list(self.relations), self.ring, self.group)
        if not rows:
            return []
        return linalg.howell_form(rows, self.ring.p, self.ring.precision)

    def flat_rank(self) -> int:
        return self.n_gens * flat_dim(self.ring, self.group)

    def size(self) -> int:
        total = self.ring.size ** (self.n_gens * self.group.order)
        span = self.relation_span()
        return total // linalg.span_size(span, self.ring.p, self.ring.precision)

    def element_eq(self, x: Sequence[GroupRingElem], y: Sequence[GroupRingElem]) -> bool:
        diff = [a - b for a, b in zip(x, y)]
        return linalg.in_span(
            flatten_vector(diff, self.ring, self.group),
            self.relation_span(),
            self.ring.p,
            self.ring.precision,
        )

    def underlying_is_free(self) -> bool:
        """Is the flattened underlying module free over Z/p^N?"""
        rows = module_span_rows(list(self.relations), self.ring, self.group)
        if not rows:
            return True
        diag, _, _ = linalg.diagonalize(rows, self.ring.p, self.ring.precision)
        # free over Z/p^N iff every relation constraint is either trivial
        # (unit pivot: kills a generator entirely) or vacuous (0 mod p^N)
        return all(d == 0 or linalg.pval(d, self.ring.p, self.ring.precision) == 0 for d in diag)

    def to_json(self) -> dict:
        return {
            "base": {
                "ring": self.ring.to_descriptor(),
                "group": self.group.to_descriptor(),
            },
            "n_gens": self.n_gens,
            "relations": [[e.to_json() for e in row] for row in self.relations],
        }

    @staticmethod
    def from_json(data: dict) -> "FPModule":
        ring = TruncatedLocalRing.from_descriptor(data["base"]["ring"])
        group = FinAbGroup.from_descriptor(data["base"]["group"])
        rows = [
            [GroupRingElem.from_json(ring, group, e) for e in row]
            for row in data.get("relations", [])
        ]
        return FPModule.from_rows(ring, group, int(data["n_gens"]), rows)


# -- determinants and Fitting ideals --------------------------------------------


def det(rows: Sequence[Sequence[GroupRingElem]], ring, group) -> GroupRingElem:
    """Determinant over the commutative ring R[G] (expansion by minors)."""
    n = len(rows)
    if n == 0:
        return GroupRingElem.one(ring, group)
    cache: Dict[Tuple[int, Tuple[int, ...]], GroupRingElem] = {}

    def minor(row: int, cols: Tuple[int, ...]) -> GroupRingElem:
        if not cols:
            return GroupRingElem.one(ring, group)
        key = (row, cols)
        got = cache.get(key)
        if got is not None:
            return got
        acc = GroupRingElem.zero(ring, group)
        for k, c in enumerate(cols):
            entry = rows[row][c]
            if entry.is_zero():
                continue
            sub = minor(row + 1, cols[:k] + cols[k + 1 :])
            term = entry * sub
            acc = acc + term if k % 2 == 0 else acc - term
        cache[key] = acc
        return acc

    return minor(0, tuple(range(n)))


def fitting_ideal(module: FPModule, i: int) -> IdealGens:
    """Fitt_i(M): the ideal of (n-i) x (n-i) minors of the relation matrix."""
    if i < 0:
        raise ValueError("Fitting index must be >= 0")
    ring, group = module.ring, module.group
    n = module.n_gens
    k = n - i
    if k <= 0:
        return IdealGens.full(ring, group)
    rows = module.relations
    if len(rows) < k:
        # padding with zero rows: every k-minor hits a zero row
        return IdealGens.zero(ring, group)
    gens: List[GroupRingElem] = []
    full_howell = IdealGens.full(ring, group).howell()
    for row_idx in itertools.combinations(range(len(rows)), k):
        for col_idx in itertools.combinations(range(n), k):
            sub = [[rows[r][c] for c in col_idx] for r in row_idx]
            m = det(sub, ring, group)
            if not m.is_zero():
                gens.append(m)
        # early exit once the ideal has stabilized to the full ring
        current = IdealGens(ring, group, tuple(gens))
        if current.howell() == full_howell:
            return current
    return IdealGens(ring, group, tuple(gens))


def base_change(module: FPModule, phi: RingMap) -> FPModule:
    """Entrywise image of the relation matrix under a ring map handle."""
    if phi.src_ring != module.ring or phi.src_group != module.group:
        raise ValueError("map incompatible with module base")
    rows = tuple(tuple(phi(e) for e in row) for row in module.relations)
    return FPModule(phi.dst_ring, phi.dst_group, module.n_gens, rows)


def quotient_by(module: FPModule, sub_gens: Sequence[Sequence[GroupRingElem]]) -> FPModule:
    """M / <sub_gens>, with the submodule generators given as coordinate vectors."""
    rows = list(module.relations) + [tuple(v) for v in sub_gens]
    return FPModule(module.ring, module.group, module.n_gens, tuple(rows))


def pad_presentation(module: FPModule, combo: Sequence[GroupRingElem]) -> FPModule:
    """Add a redundant generator equal to sum combo_i * e_i (plus its relation).

    Fitting ideals are invariant under this, which is the presentation
    independence check.
    """
    if len(combo) != module.n_gens:
        raise ValueError("combo must have one coefficient per generator")
    ring, group = module.ring, module.group
    zero = GroupRingElem.zero(ring, group)
    minus_one = -GroupRingElem.one(ring, group)
    new_rows = [tuple(row) + (zero,) for row in module.relations]
    new_rows.append(tuple(combo) + (minus_one,))
    return FPModule(ring, group, module.n_gens + 1, tuple(new_rows))


# -- Hom modules ------------------------------------------------------------------


@dataclass
class HomModule:
    """Hom_{R[G]}(M, R[G]) presented by functional vectors + their syzygies."""

    source: FPModule
    gens: List[List[GroupRingElem]]  # each gen: values on module generators
    relations: List[List[GroupRingElem]]  # syzygies among the gens

    def as_module(self) -> FPModule:
        return FPModule.from_rows(
            self.source.ring, self.source.group, len(self.gens), self.relations
        )

    def evaluate(self, functional: Sequence[GroupRingElem], elem: Sequence[GroupRingElem]) -> GroupRingElem:
        acc = GroupRingElem.zero(self.source.ring, self.source.group)
        for f, m in zip(functional, elem):
            acc = acc + f * m
        return acc


def _syzygies(
    vectors: Sequence[Sequence[GroupRingElem]],
    ring: TruncatedLocalRing,
    group: FinAbGroup,
    ambient_len: int,
) -> List[List[GroupRingElem]]:
    """R[G]-relations among the given vectors of R[G]^ambient_len."""
    s = len(vectors)
    if s == 0:
        return []
    # solve sum_j a_j vectors[j] = 0: matrix columns indexed by j
    mat = [[vectors[j][i] for j in range(s)] for i in range(ambient_len)]
    zero = [GroupRingElem.zero(ring, group) for _ in range(ambient_len)]
    sol = howell_solve(mat, zero, ring, group)
    return sol.kernel


def hom_module(module: FPModule) -> HomModule:
    """Hom_R(M, R) = {y in R^n : A y = 0} via the flattened kernel."""
    ring, group = module.ring, module.group
    n = module.n_gens
    m = len(module.relations)
    if m == 0:
        basis = []
        one = GroupRingElem.one(ring, group)
        zero = GroupRingElem.zero(ring, group)
        for i in range(n):
            basis.append([one if j == i else zero for j in range(n)])
        return HomModule(module, basis, _syzygies(basis, ring, group, n))
    mat = [list(row) for row in module.relations]
    zero_vec = [GroupRingElem.zero(ring, group) for _ in range(m)]
    sol = howell_solve(mat, zero_vec, ring, group)
    gens = sol.kernel
    return HomModule(module, gens, _syzygies(gens, ring, group, n) if gens else [])


def extend_functional(
    module: FPModule,
    sub_elem: Sequence[GroupRingElem],
    value: GroupRingElem,
) -> Optional[List[GroupRingElem]]:
    """Extend f(sub_elem) = value on the cyclic submodule <sub_elem> to all of M.

    Returns the extended functional (a vector) or None when no extension
    exists.  Over the self-injective R[G] an extension exists whenever f is
    well defined on the cyclic submodule.
    """
    ring, group = module.ring, module.group
    n = module.n_gens
    # unknown functional y: constraints A y = 0 (well-defined on M) and
    # sub_elem . y = value
    rows = [list(r) for r in module.relations]
    rhs = [GroupRingElem.zero(ring, group) for _ in rows]
    rows.append(list(sub_elem))
    rhs.append(value)
    sol = howell_solve(rows, rhs, ring, group)
    if not sol.solvable:
        return None
    return sol.particular


# -- exterior powers and biduals ---------------------------------------------------


def _wedge_presentation(
    gens_count: int,
    relations: Sequence[Sequence[GroupRingElem]],
    i: int,
    ring: TruncatedLocalRing,
    group: FinAbGroup,
) -> Tuple[List[Tuple[int, ...]], List[List[GroupRingElem]]]:
    """Presentation of the i-th exterior power of coker(relations)."""
    subsets = list(itertools.combinations(range(gens_count), i))
    index = {s: k for k, s in enumerate(subsets)}
    rel_rows: List[List[GroupRingElem]] = []
    zero = GroupRingElem.zero(ring, group)
    for b in relations:
        for t_subset in itertools.combinations(range(gens_count), i - 1):
            row = [zero] * len(subsets)
            for j in range(gens_count):
                if j in t_subset:
                    continue
                merged = tuple(sorted(t_subset + (j,)))
                pos = merged.index(j)
                coeff = b[j] if pos % 2 == 0 else -b[j]
                row[index[merged]] = row[index[merged]] + coeff
            if any(not c.is_zero() for c in row):
                rel_rows.append(row)
    return subsets, rel_rows


@dataclass
class BidualData:
    """The i-th exterior bidual of M together with the comparison map xi^i."""

    module: FPModule
    i: int
    hom: HomModule
    wedge_hom_gens: List[Tuple[int, ...]]  # i-subsets of Hom generators
    cap: HomModule  # Hom(wedge^i Hom(M,R), R): the bidual
    xi_images: List[List[GroupRingElem]]  # image of each i-subset of module gens
    xi_sources: List[Tuple[int, ...]]

    def cap_module(self) -> FPModule:
        return self.cap.as_module()

    def cap_size(self) -> int:
        return self.cap_module().size() if self.cap.gens else 1


def bidual_cap(module: FPModule, i: int) -> BidualData:
    """Compute cap^i M = Hom(wedge^i Hom(M, R), R) and the natural map xi^i."""
    if i < 0:
        raise ValueError("exterior power index must be >= 0")
    ring, group = module.ring, module.group
    hom = hom_module(module)
    s = len(hom.gens)
    wedge_subsets, wedge_rels = _wedge_presentation(s, hom.relations, i, ring, group)
    wedge_module = FPModule.from_rows(ring, group, len(wedge_subsets), wedge_rels)
    cap = hom_module(wedge_module)
    # xi^i on generators e_S of wedge^i M: values on wedge-subset T of Hom gens
    xi_sources = list(itertools.combinations(range(module.n_gens), i))
    xi_images = []
    for src in xi_sources:
        vec = []
        for t_subset in wedge_subsets:
            entries = [
                [hom.gens[t][e] for e in src]
                for t in t_subset
            ]
            vec.append(det(entries, ring, group))
        xi_images.append(vec)
    return BidualData(module, i, hom, wedge_subsets, cap, xi_images, xi_sources)


def xi_is_injective(data: BidualData) -> bool:
    """Kernel of xi^i is contained in the wedge^i M relations."""
    ring, group = data.module.ring, data.module.group
    src_subsets, src_rels = _wedge_presentation(
        data.module.n_gens, data.module.relations, data.i, ring, group
    )
    v = len(data.wedge_hom_gens)
    if not src_subsets:
        return True
    # xi as a matrix: columns = xi image of each source generator
    mat = [
        [data.xi_images[c][r] for c in range(len(src_subsets))]
        for r in range(v)
    ]
    zero = [GroupRingElem.zero(ring, group) for _ in range(v)]
    sol = howell_solve(mat, zero, ring, group)
    rel_rows = module_span_rows(src_rels, ring, group)
    hw = linalg.howell_form(rel_rows, ring.p, ring.precision) if rel_rows else []
    for k in sol.kernel:
        flat = flatten_vector(k, ring, group)
        if hw:
            if not linalg.in_span(flat, hw, ring.p, ring.precision):
                return False
        elif any(flat):
            return False
    return True


def xi_is_isomorphism(data: BidualData) -> bool:
    """xi^i bijective: image spans the bidual and source/target sizes agree."""
    ring, group = data.module.ring, data.module.group
    if not xi_is_injective(data):
        return False
    src_subsets, src_rels = _wedge_presentation(
        data.module.n_gens, data.module.relations, data.i, ring, group
    )
    wedge_src = FPModule.from_rows(ring, group, len(src_subsets), src_rels)
    # surjectivity: xi images span the solution module of the bidual
    img_rows = module_span_rows(data.xi_images, ring, group) if data.xi_images else []
    cap_rows = module_span_rows(data.cap.gens, ring, group) if data.cap.gens else []
    p, n_prec = ring.p, ring.precision
    if linalg.howell_form(img_rows, p, n_prec) != linalg.howell_form(cap_rows, p, n_prec):
        return False
    return wedge_src.size() == data.cap_size()


@dataclass
class BidualReductionReport:
    hom_surjective: bool
    iso: bool
    upstairs_size: int
    downstairs_size: int
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.hom_surjective and self.iso


def bidual_reduction_check(module: FPModule, nu: int, i: int) -> BidualReductionReport:
    """Check cap^{i+1}(M) (x) Z/p^nu = cap^{i+1}(M (x) Z/p^nu).

    Hypothesis: the flattened underlying module of M is free over Z/p^N.
    Both sides are computed independently; the comparison aligns generators
    by reducing the upstairs Hom generators mod p^nu, which is legitimate
    exactly when the mod-p^nu map on Hom is surjective (also verified).
    """
    ring, group = module.ring, module.group
    if not 1 <= nu <= ring.precision:
        raise ValueError("need 1 <= nu <= N")
    if not module.underlying_is_free():
        raise UnderlyingNotFree("flattened underlying module is not free over Z/p^N")
    from .groups import precision_map

    phi = precision_map(ring, group, nu)
    module_down = base_change(module, phi)
    ring_down = phi.dst_ring
    p = ring.p

    hom_up = hom_module(module)
    hom_down = hom_module(module_down)
    reduced_gens = [[phi(x) for x in gen] for gen in hom_up.gens]

    # (1) Hom reduction surjectivity: the reduced upstairs generators span
    # the downstairs Hom module.
    red_rows = module_span_rows(reduced_gens, ring_down, group) if reduced_gens else []
    red_hw = linalg.howell_form(red_rows, p, nu)
    surj = all(
        linalg.in_span(flatten_vector(g, ring_down, group), red_hw, p, nu)
        for g in hom_down.gens
    )

    # (2) Bidual comparison with aligned generator lists.
    k = i + 1
    up_subsets, up_rels = _wedge_presentation(
        len(hom_up.gens), hom_up.relations, k, ring, group
    )
    wedge_up = FPModule.from_rows(ring, group, len(up_subsets), up_rels)
    cap_up = hom_module(wedge_up)

    down_rels = _syzygies(reduced_gens, ring_down, group, module.n_gens)
    down_subsets, down_wedge_rels = _wedge_presentation(
        len(reduced_gens), down_rels, k, ring_down, group
    )
    wedge_down = FPModule.from_rows(ring_down, group, len(down_subsets), down_wedge_rels)
    cap_down = hom_module(wedge_down)

    # upstairs solution span reduced mod p^nu vs downstairs solution span
    v = len(up_subsets)
    up_rows = module_span_rows(cap_up.gens, ring, group) if cap_up.gens else []
    up_red_rows = [[x % p**nu for x in row] for row in up_rows]
    down_rows = module_span_rows(cap_down.gens, ring_down, group) if cap_down.gens else []
    spans_match = linalg.howell_form(up_red_rows, p, nu) == linalg.howell_form(down_rows, p, nu)

    # injectivity of (cap (x) Z/p^nu) -> cap(M (x) Z/p^nu):
    # K cap p^nu * R^v must equal p^nu * K
    up_hw = linalg.howell_form(up_rows, p, ring.precision)
    scaled = [[(x * p**nu) % p**ring.precision for x in row] for row in up_rows]
    ncols = v * flat_dim(ring, group)
    pnu_ambient = []
    for c in range(ncols):
        row = [0] * ncols
        row[c] = p**nu
        pnu_ambient.append(row)
    inter = linalg.intersect_spans(up_hw, pnu_ambient, p, ring.precision) if up_hw else []
    inj = linalg.howell_form(scaled, p, ring.precision) == inter

    up_size = (
        linalg.span_size(up_hw, p, ring.precision) if up_hw else 1
    )
    down_hw = linalg.howell_form(down_rows, p, nu)
    down_size = linalg.span_size(down_hw, p, nu) if down_hw else 1
    return BidualReductionReport(
        hom_surjective=surj,
        iso=spans_match and inj,
        upstairs_size=up_size,
        downstairs_size=down_size,
        detail="" if (surj and spans_match and inj) else f"surj={surj} spans={spans_match} inj={inj}",
    )
