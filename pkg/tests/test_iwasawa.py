import random

import pytest

from iwlab.iwasawa import (
    ElementaryModule,
    HeightNotCertified,
    HeightOnePrime,
    NonDistinguished,
    NonUnimodular,
    Poly1,
    Poly2,
    PolyIdeal,
    ZeroIdealError,
    elementary_fitting,
    equivalent,
    find_good_specialization,
    ideal_gcd,
    is_irreducible_distinguished,
    one_var_height_at_least_two,
    precedes,
    slope_check,
    specialize,
    two_var_height_at_least_two,
    valuation_at_prime,
    weierstrass_divide,
)
from iwlab.rings import TruncatedLocalRing

Z9 = TruncatedLocalRing(3, 2)


def P1(ints, ring=Z9):
    return Poly1.from_ints(ring, ints)


def test_weierstrass_examples():
    t, t2 = P1([0, 1]), P1([0, 0, 1])
    q, r = weierstrass_divide(t2, t)
    assert q == t and r.is_zero()
    q, r = weierstrass_divide(P1([0, 3, 1]), P1([3, 1]))
    assert q == t and r.is_zero()
    with pytest.raises(NonDistinguished):
        weierstrass_divide(t2, P1([1, 1]))


def test_weierstrass_resubstitution_random():
    rng = random.Random(2)
    ring = TruncatedLocalRing(3, 3)
    for _ in range(100):
        g = Poly1(
            ring,
            [ring.from_int(3 * rng.randrange(9)) for _ in range(rng.randrange(1, 4))]
            + [ring.one()],
        )
        f = Poly1(ring, [ring.from_int(rng.randrange(27)) for _ in range(rng.randrange(0, 7))])
        q, r = weierstrass_divide(f, g)
        assert q * g + r == f
        assert r.is_zero() or r.degree < g.degree


def test_valuation_examples():
    ring = TruncatedLocalRing(3, 4)
    t_prime = HeightOnePrime("distinguished", Poly1.from_ints(ring, [0, 1]))
    pi_prime = HeightOnePrime("pi")
    ideal = PolyIdeal.one_var(ring, [Poly1.from_ints(ring, [0, 0, 0, 3])], 8)
    assert valuation_at_prime(ideal, t_prime) == 3
    assert valuation_at_prime(ideal, pi_prime) == 1
    ideal2 = PolyIdeal.one_var(
        ring, [Poly1.from_ints(ring, [0, 0, 1]), Poly1.from_ints(ring, [0, 3])], 8
    )
    assert valuation_at_prime(ideal2, t_prime) == 1
    with pytest.raises(ZeroIdealError):
        valuation_at_prime(PolyIdeal.one_var(ring, [], 8), t_prime)


def test_valuation_multiplicative_on_principal():
    t_prime = HeightOnePrime("distinguished", P1([0, 1]))
    a = PolyIdeal.one_var(Z9, [P1([0, 1])], 6)
    b = PolyIdeal.one_var(Z9, [P1([3, 1])], 6)
    assert valuation_at_prime(a * b, t_prime) == valuation_at_prime(
        a, t_prime
    ) + valuation_at_prime(b, t_prime)
    pi_prime = HeightOnePrime("pi")
    c = PolyIdeal.one_var(Z9, [P1([0, 3])], 6)
    assert valuation_at_prime(a * c, pi_prime) == valuation_at_prime(
        a, pi_prime
    ) + valuation_at_prime(c, pi_prime)


def test_irreducibility():
    assert is_irreducible_distinguished(P1([0, 1]))
    assert is_irreducible_distinguished(P1([3, 1]))
    assert not is_irreducible_distinguished(P1([0, 0, 1]))  # T^2 = T * T


def test_precedes_fixture():
    ideal_i = PolyIdeal.one_var(Z9, [P1([0, 0, 1]), P1([0, 3])], 6)
    ideal_j = PolyIdeal.one_var(Z9, [P1([0, 1])], 6)
    fwd = precedes(ideal_i, ideal_j)
    assert fwd.holds and fwd.containment and fwd.degenerate_certificate
    bwd = precedes(ideal_j, ideal_i)
    assert bwd.holds and not bwd.containment and bwd.verified_product
    cert = PolyIdeal.one_var(Z9, [P1([3]), P1([0, 1])], bwd.certificate.degree_cap)
    assert bwd.certificate == cert
    both, _, _ = equivalent(ideal_i, ideal_j)
    assert both


def test_precedes_strict_example():
    t_ideal = PolyIdeal.one_var(Z9, [P1([0, 1])], 6)
    t2_ideal = PolyIdeal.one_var(Z9, [P1([0, 0, 1])], 6)
    assert not precedes(t_ideal, t2_ideal).holds
    assert precedes(t2_ideal, t_ideal).holds
    assert precedes(t_ideal, t_ideal).holds  # reflexive, certificate = ring


def test_ideal_gcd():
    ideal = PolyIdeal.one_var(Z9, [P1([0, 0, 1]), P1([0, 3])], 6)
    mu, h = ideal_gcd(ideal)
    assert mu == 0 and h.degree == 1 and h.coeffs[1] == h.ring.one()
    principal = PolyIdeal.one_var(Z9, [P1([0, 3])], 6)
    mu, h = ideal_gcd(principal)
    assert mu == 1 and h.degree == 1


def test_specialize_examples():
    s = Poly2.from_int_terms(Z9, {(1, 0): 1})
    t = Poly2.from_int_terms(Z9, {(0, 1): 1})
    p3 = Poly2.from_int_terms(Z9, {(0, 0): 3})
    ideal = PolyIdeal.two_var(Z9, [p3, s], 6)
    res = specialize(ideal, 1, 1, Z9.one())
    assert res.ideal == PolyIdeal.one_var(Z9, [P1([3]), P1([0, 1])], 6)
    res2 = specialize(ideal, 1, 0, Z9.one())
    assert res2.ideal == PolyIdeal.one_var(Z9, [P1([3])], 6)
    res3 = specialize(PolyIdeal.two_var(Z9, [s], 6), 1, 0, Z9.from_int(4))
    assert res3.ideal == PolyIdeal.one_var(Z9, [P1([3])], 6)
    with pytest.raises(NonUnimodular):
        specialize(ideal, 3, 0, Z9.one())


def test_specialize_multiplicative():
    s = Poly2.from_int_terms(Z9, {(1, 0): 1})
    t = Poly2.from_int_terms(Z9, {(0, 1): 1})
    p3 = Poly2.from_int_terms(Z9, {(0, 0): 3})
    a = PolyIdeal.two_var(Z9, [p3, s], 6)
    b = PolyIdeal.two_var(Z9, [p3, t], 6)
    img_a = specialize(a, 1, 1, Z9.one()).ideal
    img_b = specialize(b, 1, 1, Z9.one()).ideal
    img_ab = specialize(a * b, 1, 1, Z9.one()).ideal
    prod = PolyIdeal.one_var(
        Z9, [x * y for x in img_a.gens for y in img_b.gens], img_ab.degree_cap
    )
    assert img_ab == prod


def test_good_specialization_fixture():
    s = Poly2.from_int_terms(Z9, {(1, 0): 1})
    t = Poly2.from_int_terms(Z9, {(0, 1): 1})
    p3 = Poly2.from_int_terms(Z9, {(0, 0): 3})
    ideal_i = PolyIdeal.two_var(Z9, [p3, s], 6)
    ideal_j = PolyIdeal.two_var(Z9, [p3, t], 6)
    res = find_good_specialization(ideal_i, ideal_j, radius=2)
    assert (res.a1, res.a2) == (1, 1) and res.u == Z9.one()
    rejected = {(a, b) for a, b, _ in res.rejected}
    assert (1, 0) in rejected and (0, 1) in rejected
    assert one_var_height_at_least_two(res.image_i)
    assert one_var_height_at_least_two(res.image_j)
    st = Poly2.from_int_terms(Z9, {(1, 0): 1, (0, 1): 1})
    same = PolyIdeal.two_var(Z9, [p3, st], 6)
    res2 = find_good_specialization(same, same, radius=2)
    assert (res2.a1, res2.a2) == (1, 0)
    with pytest.raises(HeightNotCertified):
        find_good_specialization(PolyIdeal.two_var(Z9, [p3], 6), ideal_j)


def test_two_var_height_certification():
    s = Poly2.from_int_terms(Z9, {(1, 0): 1})
    t = Poly2.from_int_terms(Z9, {(0, 1): 1})
    p3 = Poly2.from_int_terms(Z9, {(0, 0): 3})
    assert two_var_height_at_least_two(PolyIdeal.two_var(Z9, [p3, s], 6))
    assert two_var_height_at_least_two(PolyIdeal.two_var(Z9, [s, t], 6))
    assert not two_var_height_at_least_two(PolyIdeal.two_var(Z9, [p3], 6))


def test_elementary_and_slope_fixture():
    ring = TruncatedLocalRing(3, 22)
    module = ElementaryModule(
        ring, (Poly1.from_ints(ring, [0, 0, 1]), Poly1.from_ints(ring, [0, 3]))
    )
    assert not module.chain_ok  # T*p does not divide T^2
    f0 = elementary_fitting(module, 0)
    assert f0 == PolyIdeal.one_var(ring, [Poly1.from_ints(ring, [0, 0, 0, 3])], 24)
    rep0 = slope_check(module, 0, ring.zero(), 6)
    assert rep0.passed and rep0.slope_reference == 3
    assert rep0.values == [3 * n + 1 for n in range(1, 7)]
    rep1 = slope_check(module, 1, ring.zero(), 6)
    assert rep1.passed and rep1.slope_reference == 1
    assert rep1.values == [n + 1 for n in range(1, 7)]
    rep2 = slope_check(module, 2, ring.zero(), 6)
    assert rep2.passed and rep2.slope_reference == 0 and rep2.values == [0] * 6


def test_elementary_chain_detection():
    ring = TruncatedLocalRing(3, 10)
    chain = ElementaryModule(
        ring, (Poly1.from_ints(ring, [0, 0, 1]), Poly1.from_ints(ring, [0, 1]))
    )
    assert chain.chain_ok
    with pytest.raises(NonDistinguished):
        ElementaryModule(ring, (Poly1.from_ints(ring, [1, 3]),))  # 1 + 3T: unit


def test_equivalence_pool_sanity():
    rng = random.Random(4)
    polys = [P1([0, 1]), P1([0, 0, 1]), P1([3]), P1([0, 3]), P1([3, 1]), P1([6, 0, 1])]
    pool = []
    for _ in range(15):
        gens = rng.sample(polys, rng.randrange(1, 3))
        pool.append(PolyIdeal.one_var(Z9, gens, 6))
    for ideal in pool:
        assert precedes(ideal, ideal).holds
    for a in pool[:6]:
        for b in pool[:6]:
            for c in pool[:6]:
                try:
                    ab, bc, ac = (
                        precedes(a, b).holds,
                        precedes(b, c).holds,
                        precedes(a, c).holds,
                    )
                except Exception:
                    continue
                if ab and bc:
                    assert ac
