"""Pure-Python fallback for the sparse exact linear-algebra kernels.

The compiled twin (_kernels.pyx) implements the same three functions with the
same semantics; penta.kernels selects whichever is importable.  Vectors are
dicts mapping an integer coordinate to a nonzero exact rational.
"""

IMPLEMENTATION = "python"


def merge_scaled(dst, src, c):
    """dst += c*src in place, dropping entries that cancel to zero."""
    if not c:
        return dst
    get = dst.get
    for k, v in src.items():
        w = get(k)
        if w is None:
            dst[k] = c * v
        else:
            w = w + c * v
            if w:
                dst[k] = w
            else:
                del dst[k]
    return dst


def reduce_row(row, pivots):
    """Eliminate every pivot coordinate present in row; returns row."""
    while True:
        hits = [k for k in row if k in pivots]
        if not hits:
            return row
        for k in hits:
            c = row.get(k)
            if c is not None:
                merge_scaled(row, pivots[k], -c)


def echelonize(rows, pivots=None):
    """Two-pass reduced echelon form of a list of sparse vectors.

    Returns a dict pivot-coordinate -> monic row whose tail is supported on
    non-pivot coordinates only.  The pivot of a row is its smallest
    coordinate; row processing order is the caller's, so results are
    deterministic.  Extends `pivots` in place when given.
    """
    if pivots is None:
        pivots = {}
    for row in rows:
        row = reduce_row(dict(row), pivots)
        if not row:
            continue
        p = min(row)
        inv = 1 / row[p]
        pivots[p] = {k: v * inv for k, v in row.items()}
    # Back-substitution in decreasing pivot order: a tail coordinate is
    # always larger than the row's own pivot, so one sweep cleans all tails.
    for p in sorted(pivots, reverse=True):
        row = pivots[p]
        hits = [k for k in row if k != p and k in pivots]
        for k in hits:
            c = row.get(k)
            if c is not None:
                merge_scaled(row, pivots[k], -c)
    return pivots
