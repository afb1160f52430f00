"""Compiled inner loops for the truncated density evaluator.

Only IEEE basic operations (add, multiply, min, sqrt) happen here; they round
identically to the numpy expressions in the reference evaluator.
"""

import math

import numba as nb

# Run offsets are cast to uintp: with signed indices numba must allow for
# negative (wrap-around) indexing, which blocks contiguous vector loads.


@nb.njit(nogil=True, cache=True)
def gather_roots(k, A, C, B, lo, hi, root_cut, buf):
    """Write sqrt(min(A + B*C, 1)) for every cell of every run into ``buf``.

    Roots above ``root_cut`` (beyond the cutoff distance) are written as NaN.
    """
    n = nb.uintp(0)
    nan = math.nan
    for r in range(k.size):
        row = B[k[r]]
        a0 = A[r]
        c = C[r]
        j0 = nb.uintp(lo[r])
        length = nb.uintp(hi[r] + 1 - lo[r])
        for q in range(length):
            # product first, matching the reference's b *= c; a += b
            root = math.sqrt(min(a0 + row[j0 + q] * c, 1.0))
            buf[n + q] = root if root <= root_cut else nan
        n += length
    return n


@nb.njit(nogil=True, cache=True)
def accumulate_runs(s, terms, w, lo, hi):
    """Add ``terms * w`` into ``s`` run by run; NaN (cut) terms add +0.0.

    Runs arrive in ascending point order, so every cell sums its points in
    input order. Adding +0.0 to a non-negative partial sum leaves it unchanged.
    """
    n = nb.uintp(0)
    for r in range(lo.size):
        wk = w[r]
        j0 = nb.uintp(lo[r])
        length = nb.uintp(hi[r] + 1 - lo[r])
        for q in range(length):
            t = terms[n + q]
            s[j0 + q] += t * wk if t == t else 0.0
        n += length
