# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sparse exact linear-algebra kernels.

Semantics match penta._kernels_py exactly; coefficients stay arbitrary
Python/gmpy2 objects, the win comes from C-level dict iteration in the
merge loops that dominate the row reductions.
"""

IMPLEMENTATION = "cython"


cpdef merge_scaled(dict dst, dict src, c):
    """dst += c*src in place, dropping entries that cancel to zero."""
    cdef object k, v, w
    if not c:
        return dst
    for k, v in src.items():
        w = dst.get(k)
        if w is None:
            dst[k] = c * v
        else:
            w = w + c * v
            if w:
                dst[k] = w
            else:
                del dst[k]
    return dst


cpdef reduce_row(dict row, dict pivots):
    """Eliminate every pivot coordinate present in row; returns row."""
    cdef list hits
    cdef object k, c
    while True:
        hits = [k for k in row if k in pivots]
        if not hits:
            return row
        for k in hits:
            c = row.get(k)
            if c is not None:
                merge_scaled(row, pivots[k], -c)


cpdef dict echelonize(rows, dict pivots=None):
    """Two-pass reduced echelon form; see the pure-Python twin for contract."""
    cdef dict row
    cdef list hits
    cdef object r, p, k, c, inv
    if pivots is None:
        pivots = {}
    for r in rows:
        row = reduce_row(dict(r), pivots)
        if not row:
            continue
        p = min(row)
        inv = 1 / row[p]
        pivots[p] = {k: v * inv for k, v in row.items()}
    for p in sorted(pivots, reverse=True):
        row = pivots[p]
        hits = [k for k in row if k != p and k in pivots]
        for k in hits:
            c = row.get(k)
            if c is not None:
                merge_scaled(row, pivots[k], -c)
    return pivots
