"""Exact linear algebra over Z/p^N.

Z/p^N is a chain ring: every element is a unit times a power of p, so both
the Howell normal form and matrix diagonalization can be computed entirely
mod p^N with valuation-based pivoting (no integer coefficient growth).

The Howell form is the canonical object here: two row sets span the same
submodule of (Z/p^N)^n if and only if their Howell forms are identical,
which gives decidable module equality and membership.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

Row = List[int]


def pval(x: int, p: int, cap: int) -> int:
    """p-adic valuation of x, capped at `cap` (the zero residue gets `cap`)."""
    x = x % (p**cap)
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def unit_part(x: int, p: int, n_prec: int) -> Tuple[int, int]:
    """Write x = u * p^k mod p^N with u a unit; returns (u, k); (1, N) for 0."""
    modulus = p**n_prec
    x %= modulus
    if x == 0:
        return 1, n_prec
    k = pval(x, p, n_prec)
    return (x // p**k) % modulus, k


def howell_form(rows: Sequence[Sequence[int]], p: int, n_prec: int) -> List[Row]:
    """Canonical Howell form of the row span of `rows` over Z/p^N.

    Properties of the output: pivot columns strictly increase, each pivot is
    an exact power of p, entries above a pivot are reduced modulo the pivot,
    and every span element with leading column j is reachable from rows with
    pivot column <= j (enforced by the annihilator rows added during
    elimination).
    """
    modulus = p**n_prec
    work = [[x % modulus for x in row] for row in rows]
    work = [r for r in work if any(r)]
    if not work:
        return []
    ncols = len(work[0])
    result: List[Row] = []
    for j in range(ncols):
        sel = [r for r in work if r[j] != 0]
        rest = [r for r in work if r[j] == 0]
        if not sel:
            work = rest
            continue
        piv = min(sel, key=lambda r: pval(r[j], p, n_prec))
        sel.remove(piv)
        u, k = unit_part(piv[j], p, n_prec)
        uinv = pow(u, -1, modulus)
        piv = [(x * uinv) % modulus for x in piv]
        pk = p**k
        for r in sel:
            q = r[j] // pk
            r2 = [(a - q * b) % modulus for a, b in zip(r, piv)]
            if any(r2):
                rest.append(r2)
        result.append(piv)
        if k > 0:
            ann = [(x * p ** (n_prec - k)) % modulus for x in piv]
            if any(ann):
                rest.append(ann)
        work = rest
    # Reduce entries above each pivot modulo the pivot value.
    pivots = [(next(i for i, x in enumerate(row) if x != 0), row) for row in result]
    for idx in range(1, len(pivots)):
        j, row = pivots[idx]
        pk = row[j]
        for prev_idx in range(idx):
            _, prev = pivots[prev_idx]
            q = prev[j] // pk
            if q:
                for c in range(len(prev)):
                    prev[c] = (prev[c] - q * row[c]) % modulus
    return [row for _, row in pivots]


def in_span(vec: Sequence[int], howell_rows: Sequence[Sequence[int]], p: int, n_prec: int) -> bool:
    """Membership of `vec` in the span given by a Howell form."""
    modulus = p**n_prec
    v = [x % modulus for x in vec]
    for row in howell_rows:
        j = next(i for i, x in enumerate(row) if x != 0)
        if v[j] == 0:
            continue
        if v[j] % row[j] != 0:
            return False
        q = v[j] // row[j]
        v = [(a - q * b) % modulus for a, b in zip(v, row)]
    return not any(v)


def span_eq(rows_a: Sequence[Sequence[int]], rows_b: Sequence[Sequence[int]], p: int, n_prec: int) -> bool:
    return howell_form(rows_a, p, n_prec) == howell_form(rows_b, p, n_prec)


def span_size(howell_rows: Sequence[Sequence[int]], p: int, n_prec: int) -> int:
    """Number of elements of the spanned submodule."""
    size = 1
    for row in howell_rows:
        j = next(i for i, x in enumerate(row) if x != 0)
        k = pval(row[j], p, n_prec)
        size *= p ** (n_prec - k)
    return size


def _eye(n: int) -> List[Row]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def diagonalize(
    mat: Sequence[Sequence[int]], p: int, n_prec: int
) -> Tuple[List[int], List[Row], List[Row]]:
    """Diagonalize over Z/p^N: returns (d, U, V) with U*mat*V = diag(d).

    U and V are invertible mod p^N; the diagonal entries are exact powers of
    p (or 0) in non-decreasing valuation order.
    """
    modulus = p**n_prec
    m = len(mat)
    n = len(mat[0]) if m else 0
    a = [[x % modulus for x in row] for row in mat]
    u_mat = _eye(m)
    v_mat = _eye(n)
    rank = 0
    for t in range(min(m, n)):
        best: Optional[Tuple[int, int, int]] = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] != 0:
                    v = pval(a[i][j], p, n_prec)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, bi, bj = best
        if bi != t:
            a[t], a[bi] = a[bi], a[t]
            u_mat[t], u_mat[bi] = u_mat[bi], u_mat[t]
        if bj != t:
            for row in a:
                row[t], row[bj] = row[bj], row[t]
            for row in v_mat:
                row[t], row[bj] = row[bj], row[t]
        u, k = unit_part(a[t][t], p, n_prec)
        uinv = pow(u, -1, modulus)
        a[t] = [(x * uinv) % modulus for x in a[t]]
        u_mat[t] = [(x * uinv) % modulus for x in u_mat[t]]
        pk = p**k
        for i in range(m):
            if i == t or a[i][t] == 0:
                continue
            q = a[i][t] // pk
            a[i] = [(x - q * y) % modulus for x, y in zip(a[i], a[t])]
            u_mat[i] = [(x - q * y) % modulus for x, y in zip(u_mat[i], u_mat[t])]
        for j in range(n):
            if j == t or a[t][j] == 0:
                continue
            q = a[t][j] // pk
            for row in a:
                row[j] = (row[j] - q * row[t]) % modulus
            for row in v_mat:
                row[j] = (row[j] - q * row[t]) % modulus
        rank += 1
    diag = [a[i][i] if i < n else 0 for i in range(min(m, n))]
    return diag, u_mat, v_mat


def mat_vec(mat: Sequence[Sequence[int]], vec: Sequence[int], modulus: int) -> Row:
    return [sum(x * y for x, y in zip(row, vec)) % modulus for row in mat]


def solve(
    mat: Sequence[Sequence[int]],
    rhs: Sequence[int],
    p: int,
    n_prec: int,
    ncols: Optional[int] = None,
) -> Tuple[bool, Optional[Row], List[Row]]:
    """Solve mat*x = rhs over Z/p^N.

    Returns (solvable, particular_solution, kernel_generators). The kernel
    generators are returned in Howell-canonical form, so equal solution sets
    have identical descriptions. `ncols` is required when mat has no rows.
    """
    modulus = p**n_prec
    m = len(mat)
    n = len(mat[0]) if m else (ncols or 0)
    if m == 0:
        return True, [0] * n, howell_form(_eye(n), p, n_prec) if n else []
    diag, u_mat, v_mat = diagonalize(mat, p, n_prec)
    c = mat_vec(u_mat, rhs, modulus)
    y = [0] * n
    kernel: List[Row] = []
    for t in range(n):
        d = diag[t] if t < len(diag) else 0
        if d != 0:
            k = pval(d, p, n_prec)
            if t < m:
                if c[t] % d != 0:
                    return False, None, []
                y[t] = c[t] // d
            if k > 0:
                ker_y = [0] * n
                ker_y[t] = p ** (n_prec - k)
                kernel.append(ker_y)
        else:
            if t < m and c[t] % modulus != 0:
                return False, None, []
            ker_y = [0] * n
            ker_y[t] = 1
            kernel.append(ker_y)
    for t in range(n, m):
        if c[t] % modulus != 0:
            return False, None, []
    x = [sum(v_mat[i][j] * y[j] for j in range(n)) % modulus for i in range(n)]
    ker_x = [
        [sum(v_mat[i][j] * g[j] for j in range(n)) % modulus for i in range(n)]
        for g in kernel
    ]
    return True, x, howell_form(ker_x, p, n_prec)


def kernel(
    mat: Sequence[Sequence[int]], p: int, n_prec: int, ncols: Optional[int] = None
) -> List[Row]:
    """Howell-canonical generators of {x : mat*x = 0} over Z/p^N."""
    ok, _, ker = solve(mat, [0] * len(mat), p, n_prec, ncols=ncols)
    assert ok
    return ker


def intersect_spans(
    rows_a: Sequence[Sequence[int]], rows_b: Sequence[Sequence[int]], p: int, n_prec: int
) -> List[Row]:
    """Howell form of the intersection of the two row spans."""
    modulus = p**n_prec
    if not rows_a or not rows_b:
        return []
    ncols = len(rows_a[0])
    # x = sum a_i A_i = sum b_j B_j: solve [A^T | -B^T] (a,b)^T = 0.
    na, nb = len(rows_a), len(rows_b)
    sys_rows: List[Row] = []
    for c in range(ncols):
        sys_rows.append([rows_a[i][c] for i in range(na)] + [(-rows_b[j][c]) % modulus for j in range(nb)])
    ker = kernel(sys_rows, p, n_prec)
    out = []
    for g in ker:
        vec = [0] * ncols
        for i in range(na):
            for c in range(ncols):
                vec[c] = (vec[c] + g[i] * rows_a[i][c]) % modulus
        if any(vec):
            out.append(vec)
    return howell_form(out, p, n_prec)
