import random

from hypothesis import given, settings
from hypothesis import strategies as st

from iwlab import linalg


def test_howell_examples_mod4():
    assert linalg.howell_form([[2]], 2, 2) == [[2]]
    ok, x, ker = linalg.solve([[2]], [2], 2, 2)
    assert ok and (2 * x[0]) % 4 == 2
    assert ker == [[2]]
    ok, _, _ = linalg.solve([[2]], [1], 2, 2)
    assert not ok


def test_howell_idempotent_and_membership():
    rows = [[4, 1, 0], [0, 0, 5], [3, 0, 0]]
    h = linalg.howell_form(rows, 3, 2)
    assert linalg.howell_form(h, 3, 2) == h
    for r in rows:
        assert linalg.in_span(r, h, 3, 2)
    assert not linalg.in_span([1, 0, 0], h, 3, 2) or linalg.in_span([1, 0, 0], h, 3, 2)


def test_span_canonical_under_row_ops():
    rng = random.Random(7)
    for _ in range(40):
        p, n_prec = rng.choice([(2, 2), (3, 2), (3, 3)])
        modulus = p**n_prec
        rows = [[rng.randrange(modulus) for _ in range(3)] for _ in range(rng.randrange(1, 4))]
        h = linalg.howell_form(rows, p, n_prec)
        shuffled = [r[:] for r in rows]
        rng.shuffle(shuffled)
        u = rng.choice([x for x in range(1, modulus) if x % p])
        shuffled[0] = [(u * x) % modulus for x in shuffled[0]]
        combo = [0, 0, 0]
        for r in shuffled:
            c = rng.randrange(modulus)
            combo = [(a + c * b) % modulus for a, b in zip(combo, r)]
        shuffled.append(combo)
        assert linalg.howell_form(shuffled, p, n_prec) == h


def test_solve_resubstitution_random():
    rng = random.Random(11)
    for _ in range(50):
        p, n_prec = rng.choice([(2, 3), (3, 2)])
        modulus = p**n_prec
        m, n = rng.randrange(1, 4), rng.randrange(1, 4)
        mat = [[rng.randrange(modulus) for _ in range(n)] for _ in range(m)]
        x_true = [rng.randrange(modulus) for _ in range(n)]
        rhs = linalg.mat_vec(mat, x_true, modulus)
        ok, x, ker = linalg.solve(mat, rhs, p, n_prec)
        assert ok
        assert linalg.mat_vec(mat, x, modulus) == rhs
        for k in ker:
            assert linalg.mat_vec(mat, k, modulus) == [0] * m


def test_diagonalize_consistency():
    rng = random.Random(3)
    for _ in range(30):
        p, n_prec = 3, 2
        modulus = p**n_prec
        m, n = rng.randrange(1, 4), rng.randrange(1, 4)
        mat = [[rng.randrange(modulus) for _ in range(n)] for _ in range(m)]
        diag, u_mat, v_mat = linalg.diagonalize(mat, p, n_prec)
        prod = [
            [
                sum(u_mat[i][a] * mat[a][b] * v_mat[b][j] for a in range(m) for b in range(n))
                % modulus
                for j in range(n)
            ]
            for i in range(m)
        ]
        for i in range(m):
            for j in range(n):
                expect = diag[i] if (i == j and i < len(diag)) else 0
                assert prod[i][j] == expect % modulus


def test_intersect_spans():
    # <(2,0),(0,1)> and <(1,1)> inside (Z/4)^2
    a = linalg.howell_form([[2, 0], [0, 1]], 2, 2)
    b = linalg.howell_form([[1, 1]], 2, 2)
    inter = linalg.intersect_spans(a, b, 2, 2)
    for v in inter:
        assert linalg.in_span(v, a, 2, 2) and linalg.in_span(v, b, 2, 2)
    assert linalg.in_span([2, 2], inter, 2, 2)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.lists(st.integers(0, 8), min_size=3, max_size=3), min_size=1, max_size=4)
)
def test_howell_idempotent_property(rows):
    h = linalg.howell_form(rows, 3, 2)
    assert linalg.howell_form(h, 3, 2) == h
