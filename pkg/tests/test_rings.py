import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iwlab.rings import (
    NonUnitError,
    OrderDivisibleByP,
    TruncatedLocalRing,
    roots_of_unity,
)

Z9 = TruncatedLocalRing(3, 2)
Z27 = TruncatedLocalRing(3, 3)
GAUSS9 = TruncatedLocalRing(3, 2, (1, 0, 1))  # (Z/9)[x]/(x^2+1)


def test_arith_examples():
    assert (Z9.from_int(4) * Z9.from_int(7)) == Z9.one()
    assert (Z9.from_int(3) * Z9.from_int(3)).is_zero()
    x = GAUSS9.gen()
    assert (x * x) == GAUSS9.from_int(-1)


def test_ring_mismatch():
    with pytest.raises(ValueError):
        Z9.from_int(1) + Z27.from_int(1)


def test_inv_unit_examples():
    assert Z9.from_int(4).inv() == Z9.from_int(7)
    with pytest.raises(NonUnitError):
        Z9.from_int(3).inv()
    x = GAUSS9.gen()
    assert x.inv() == -x
    assert x * x.inv() == GAUSS9.one()


def test_inv_unit_involutive():
    for ring in (Z9, Z27, GAUSS9):
        for a in ring.elements():
            if a.is_unit():
                assert a.inv().inv() == a


def test_valuation_examples():
    assert Z9.from_int(6).valuation() == 1
    assert Z9.zero().valuation() == 2
    assert Z27.from_int(18).valuation() == 2


def test_valuation_multiplicative_exhaustive():
    for a in Z9.elements():
        for b in Z9.elements():
            assert (a * b).valuation() == min(a.valuation() + b.valuation(), 2)


def test_units_are_valuation_zero():
    for a in GAUSS9.elements():
        assert a.is_unit() == (a.valuation() == 0)


def test_roots_of_unity_examples():
    assert sorted(z.coeffs[0] for z in roots_of_unity(Z9, 2)) == [1, 8]
    # brute-force oracle: all solutions of z^4 = 1 in (Z/9)^x are 1 and 8
    brute = sorted(a.coeffs[0] for a in Z9.elements() if (a**4) == Z9.one())
    assert brute == [1, 8]
    assert sorted(z.coeffs[0] for z in roots_of_unity(Z9, 4)) == brute
    ring25 = TruncatedLocalRing(5, 2, (1, 1, 1))
    roots = roots_of_unity(ring25, 3)
    assert len(roots) == 3  # gcd(3, 5^2 - 1)
    brute25 = [a for a in ring25.elements() if a**3 == ring25.one()]
    assert sorted(r.coeffs for r in roots) == sorted(a.coeffs for a in brute25)


def test_roots_of_unity_order_divisible_by_p():
    with pytest.raises(OrderDivisibleByP):
        roots_of_unity(Z9, 3)


def test_reduce_precision_examples():
    assert Z27.from_int(22).reduce_precision(2) == Z9.from_int(4)
    assert Z27.from_int(9).reduce_precision(2).is_zero()
    with pytest.raises(ValueError):
        Z9.from_int(1).reduce_precision(3)


def test_reduce_precision_homomorphism_exhaustive():
    for target in (1, 2):
        for a in Z27.elements():
            for b in Z27.elements():
                ra, rb = a.reduce_precision(target), b.reduce_precision(target)
                assert (a + b).reduce_precision(target) == ra + rb
                assert (a * b).reduce_precision(target) == ra * rb


def test_reduce_precision_composes():
    for a in Z27.elements():
        assert a.reduce_precision(2).reduce_precision(1) == a.reduce_precision(1)


def test_ramified_ring():
    # Z3[x]/(x^2 - 3): pi = x, pi^2 = 3, residue field F_3
    eis = TruncatedLocalRing(3, 3, (-3, 0, 1), ramified=True)
    pi = eis.uniformizer()
    assert pi.valuation() == 1
    assert pi * pi == eis.from_int(3)
    assert (pi**3).is_zero()
    assert eis.size == 3 ** (2 + 1)  # coordinate moduli 3^2, 3^1
    u = eis.one() + pi
    assert u * u.inv() == eis.one()
    assert len(roots_of_unity(eis, 2)) == 2  # gcd(2, p - 1)


def test_invalid_rings_rejected():
    with pytest.raises(ValueError):
        TruncatedLocalRing(4, 2)  # not prime
    with pytest.raises(ValueError):
        TruncatedLocalRing(3, 2, (2, 0, 1))  # x^2 + 2 = (x+1)(x+2) mod 3
    with pytest.raises(ValueError):
        TruncatedLocalRing(3, 2, (9, 0, 1), ramified=True)  # p^2 | constant


def test_descriptor_roundtrip():
    for ring in (Z9, GAUSS9, TruncatedLocalRing(3, 3, (-3, 0, 1), ramified=True)):
        assert TruncatedLocalRing.from_descriptor(ring.to_descriptor()) == ring


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 8), st.integers(0, 8), st.integers(0, 8))
def test_ring_axioms_random(a, b, c):
    x, y, z = Z9.from_int(a), Z9.from_int(b), Z9.from_int(c)
    assert x * (y + z) == x * y + x * z
    assert (x * y) * z == x * (y * z)
    assert x + (-x) == Z9.zero()
