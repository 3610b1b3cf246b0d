import random

import pytest

from iwlab.groups import (
    Character,
    FinAbGroup,
    GroupRingElem,
    augmentation_ideal_gens,
    eval_map,
    group_quotient_map,
    howell_solve,
    idempotent,
    kolyvagin_D,
    norm_element,
    precision_map,
    sn_apply,
)
from iwlab.rings import TruncatedLocalRing

Z9 = TruncatedLocalRing(3, 2)
H3 = FinAbGroup((3,))


def _sigma(ring=Z9, group=H3):
    return GroupRingElem.monomial(ring, group, group.generator(0))


def test_norm_and_augmentation():
    nh = norm_element(Z9, H3, [(1,)])
    assert nh == GroupRingElem(Z9, H3, {(i,): Z9.one() for i in range(3)})
    assert nh.augmentation() == Z9.from_int(3)
    rng = random.Random(0)
    sigma = _sigma()
    one = GroupRingElem.one(Z9, H3)
    for _ in range(50):
        terms = {(i,): Z9.from_int(rng.randrange(9)) for i in range(3)}
        x = GroupRingElem(Z9, H3, terms)
        assert ((sigma - one) * x).augmentation().is_zero()
    gens = augmentation_ideal_gens(Z9, H3, [(1,)])
    assert gens == [sigma - one]


def test_idempotent_examples():
    delta = FinAbGroup((2,))
    e_triv = idempotent(Character.trivial(Z9, delta))
    assert e_triv.coeff((0,)) == Z9.from_int(5)
    assert e_triv.coeff((1,)) == Z9.from_int(5)
    e_sign = idempotent(Character(delta, (Z9.from_int(8),)))
    assert e_sign * e_sign == e_sign
    assert e_sign.coeff((1,)) == Z9.from_int(-5)
    d_elem = GroupRingElem.monomial(Z9, delta, (1,))
    assert d_elem * e_sign == e_sign.scale(Z9.from_int(8))
    assert e_triv + e_sign == GroupRingElem.one(Z9, delta)


def test_idempotents_sum_v4_over_z25():
    ring = TruncatedLocalRing(5, 2)
    v4 = FinAbGroup((2, 2))
    chars = Character.all_characters(ring, v4)
    assert len(chars) == 4
    total = GroupRingElem.zero(ring, v4)
    for ch in chars:
        e = idempotent(ch)
        assert e * e == e
        total = total + e
    assert total == GroupRingElem.one(ring, v4)


def test_kolyvagin_operator():
    d = kolyvagin_D(Z9, H3, [((1,), 3)])
    assert d == GroupRingElem(Z9, H3, {(1,): Z9.one(), (2,): Z9.from_int(2)})
    sigma, one = _sigma(), GroupRingElem.one(Z9, H3)
    nh = norm_element(Z9, H3, [(1,)])
    assert (sigma - one) * d == GroupRingElem.from_int(Z9, H3, 3) - nh
    h33 = FinAbGroup((3, 3))
    d2 = kolyvagin_D(Z9, h33, [((1, 0), 3), ((0, 1), 3)])
    assert len(d2.support()) == 4
    # telescoping against the expansion
    s1 = GroupRingElem.monomial(Z9, h33, (1, 0))
    one2 = GroupRingElem.one(Z9, h33)
    n1 = norm_element(Z9, h33, [(1, 0)])
    d_rest = kolyvagin_D(Z9, h33, [((0, 1), 3)])
    assert (s1 - one2) * d2 == (GroupRingElem.from_int(Z9, h33, 3) - n1) * d_rest


def test_kolyvagin_non_generator_rejected():
    h9 = FinAbGroup((9,))
    with pytest.raises(ValueError):
        kolyvagin_D(Z9, h9, [((3,), 9)])


def test_sn_one_prime_examples():
    sigma, one = _sigma(), GroupRingElem.one(Z9, H3)
    assert sn_apply(sigma - one, [0]) == sigma - one
    assert sn_apply(one, [0]).is_zero()


def test_eval_hom_examples():
    ev = eval_map(Z9, H3, 0, Z9.one())
    nh = norm_element(Z9, H3, [(1,)])
    assert ev(nh) == GroupRingElem.from_int(Z9, FinAbGroup(()), 3)
    ev4 = eval_map(Z9, H3, 0, Z9.from_int(4))
    g2 = GroupRingElem.monomial(Z9, H3, (2,))
    assert ev4(g2) == GroupRingElem.from_int(Z9, FinAbGroup(()), 7)
    rng = random.Random(1)
    for _ in range(100):
        x = GroupRingElem(Z9, H3, {(i,): Z9.from_int(rng.randrange(9)) for i in range(3)})
        y = GroupRingElem(Z9, H3, {(i,): Z9.from_int(rng.randrange(9)) for i in range(3)})
        assert ev4(x * y) == ev4(x) * ev4(y)


def test_eval_hom_preconditions():
    with pytest.raises(ValueError):
        eval_map(Z9, H3, 0, Z9.from_int(2))  # 2 != 1 mod 3
    with pytest.raises(ValueError):
        eval_map(Z9, FinAbGroup((9,)), 0, Z9.from_int(4))  # 4^9 != 1 mod 9


def test_eval_kernel_contains_gamma_minus_u():
    ev4 = eval_map(Z9, H3, 0, Z9.from_int(4))
    gamma = _sigma()
    u_elem = GroupRingElem.from_int(Z9, H3, 4)
    assert ev4(gamma - u_elem).is_zero()


def test_howell_solve_examples():
    z4 = TruncatedLocalRing(2, 2)
    triv = FinAbGroup(())
    two = GroupRingElem.from_int(z4, triv, 2)
    sol = howell_solve([[two]], [two], z4, triv)
    assert sol.solvable
    assert sol.particular[0] == GroupRingElem.from_int(z4, triv, 1)
    assert sol.kernel == [[two]]
    assert not howell_solve([[two]], [GroupRingElem.from_int(z4, triv, 1)], z4, triv).solvable


def test_quotient_and_precision_maps():
    quot = group_quotient_map(Z9, H3, FinAbGroup(()), [()])
    sigma, one = _sigma(), GroupRingElem.one(Z9, H3)
    assert quot(sigma - one).is_zero()
    prec = precision_map(Z9, H3, 1)
    assert prec(GroupRingElem.from_int(Z9, H3, 3)).is_zero()
