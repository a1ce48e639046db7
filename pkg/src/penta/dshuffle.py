"""Generalized double shuffle apparatus: Y-algebra, stuffle, regularization.

Index pairs (a composition with root-of-unity exponents) index multiple
L-values; l_coeff reads their avatar off a group-like series.  The series
and integral regularizations produce polynomials in a formal parameter T,
compared through the generating-function map L_map.
"""

import itertools
from fractions import Fraction

from penta.kernels import merge_scaled
from penta.ncseries import Series, TensorTable, alphabet_Y, concat_mul, exp_series
from penta.ratio import QQ, rat


class TPoly:
    """Polynomial in the regularization parameter T over exact rationals."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        if isinstance(coeffs, (int, str, Fraction)) or type(coeffs) is type(QQ(0)):
            coeffs = (rat(coeffs),)
        cs = [rat(c) if isinstance(c, (int, str, Fraction)) else c for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def T(cls, power=1, coeff=1):
        return cls((0,) * power + (coeff,))

    def degree(self):
        return len(self.coeffs) - 1

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, TPoly):
            other = TPoly(other)
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        if not isinstance(other, TPoly):
            other = TPoly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (QQ(0),) * (n - len(self.coeffs))
        b = other.coeffs + (QQ(0),) * (n - len(other.coeffs))
        return TPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return TPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, TPoly):
            other = TPoly(other)
        return self + (-other)

    def __rsub__(self, other):
        return TPoly(other) - self

    def __mul__(self, other):
        if not isinstance(other, TPoly):
            return TPoly([c * other for c in self.coeffs])
        out = [QQ(0)] * (len(self.coeffs) + len(other.coeffs))
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return TPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / rat(other))

    def at_zero(self):
        return self.coeffs[0] if self.coeffs else QQ(0)

    def coeff(self, n):
        return self.coeffs[n] if n < len(self.coeffs) else QQ(0)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        bits = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            t = "1" if i == 0 else ("T" if i == 1 else f"T^{i}")
            bits.append(f"({c})*{t}" if i else f"{c}")
        return " + ".join(bits)


class IndexPair:
    """A composition with exponents in Z/N; the index of a multiple L-value."""

    __slots__ = ("a", "e", "N")

    def __init__(self, a, e, N):
        self.a = tuple(int(x) for x in a)
        self.N = int(N)
        self.e = tuple(int(x) % self.N for x in e)
        if len(self.a) != len(self.e):
            raise ValueError("composition and exponent tuple lengths differ")
        if any(x < 1 for x in self.a):
            raise ValueError("composition entries must be positive")

    @property
    def weight(self):
        return sum(self.a)

    @property
    def depth(self):
        return len(self.a)

    def is_admissible(self):
        return self.depth > 0 and (self.a[-1], self.e[-1]) != (1, 0)

    def is_empty(self):
        return self.depth == 0

    def trailing_ones(self):
        t = 0
        for x, ee in zip(reversed(self.a), reversed(self.e)):
            if (x, ee) == (1, 0):
                t += 1
            else:
                break
        return t

    def concat(self, other):
        if other.N != self.N:
            raise ValueError("level mismatch")
        return IndexPair(self.a + other.a, self.e + other.e, self.N)

    def __eq__(self, other):
        return (
            isinstance(other, IndexPair)
            and self.a == other.a
            and self.e == other.e
            and self.N == other.N
        )

    def __hash__(self):
        return hash((self.a, self.e, self.N))

    def __repr__(self):
        return f"IndexPair({format_index(self)!r})"


def parse_index(text) -> IndexPair:
    """Parse 'a1,...,ak;e1,...,ek@N'."""
    body, _, level = text.partition("@")
    if not level:
        raise ValueError("index must end with @N")
    avec, _, evec = body.partition(";")
    a = [int(x) for x in avec.split(",") if x.strip()] if avec.strip() else []
    e = [int(x) for x in evec.split(",") if x.strip()] if evec.strip() else []
    return IndexPair(a, e, int(level))


def format_index(p: IndexPair) -> str:
    return "{};{}@{}".format(
        ",".join(map(str, p.a)), ",".join(map(str, p.e)), p.N
    )


def all_index_pairs(N, max_weight, admissible_only=False, nonempty=True):
    """Every index pair of weight <= max_weight at level N."""
    out = []
    if not nonempty:
        out.append(IndexPair((), (), N))
    for w in range(1, max_weight + 1):
        for k in range(1, w + 1):
            for a in _compositions(w, k):
                for e in itertools.product(range(N), repeat=k):
                    p = IndexPair(a, e, N)
                    if admissible_only and not p.is_admissible():
                        continue
                    out.append(p)
    return out


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# -- the Y side ----------------------------------------------------------------


def y_alphabet(N, maxweight):
    return alphabet_Y(N, maxweight)


def _y_letter(alpha, n, a):
    return alpha.index[f"Y{n}_{a % alpha.level}"]


def _parse_blocks(word, a_idx):
    """Split a word not ending in A into (A-run, B-exponent) blocks, left first."""
    blocks = []
    run = 0
    for x in word:
        if x == a_idx:
            run += 1
        else:
            blocks.append((run + 1, x))
            run = 0
    return blocks


def pi_Y(h: Series, maxweight=None) -> Series:
    """Linear map to the Y-algebra killing words that end in A."""
    D = h.maxdeg if maxweight is None else maxweight
    N = h.alphabet.level
    ya = y_alphabet(N, D)
    a_idx = h.alphabet.index["A"]
    b_exp = {h.alphabet.index[f"B{a}"]: a for a in range(N)}
    out = {}
    for w, c in h.terms.items():
        if len(w) > D:
            continue
        if w and w[-1] == a_idx:
            continue
        blocks = [(n, b_exp[x]) for n, x in _parse_blocks(w, a_idx)]
        m = len(blocks)
        # leftmost block is (n_m, a_m); image letters left to right
        letters = []
        for j in range(m):
            n_j, a_j = blocks[j]
            if j == 0:
                letters.append(_y_letter(ya, n_j, -a_j))
            else:
                letters.append(_y_letter(ya, n_j, blocks[j - 1][1] - a_j))
        word = tuple(letters)
        sign = QQ(-1) if m % 2 else QQ(1)
        prev = out.get(word)
        nc = sign * c if prev is None else prev + sign * c
        if nc:
            out[word] = nc
        elif word in out:
            del out[word]
    return Series(ya, D, out, coerce=False)


def delta_star(y: Series) -> TensorTable:
    """Coproduct dual to the stuffle product, multiplicative for concatenation."""
    alpha = y.alphabet
    N = alpha.level
    D = y.maxdeg

    def letter_coproduct(idx):
        name = alpha.letters[idx]
        n, a = name[1:].split("_")
        n, a = int(n), int(a)
        pairs = [(((idx,), ()), QQ(1)), (((), (idx,)), QQ(1))]
        for k in range(1, n):
            for b in range(N):
                left = (_y_letter(alpha, k, b),)
                right = (_y_letter(alpha, n - k, a - b),)
                pairs.append(((left, right), QQ(1)))
        return pairs

    out = {}
    for w, c in y.terms.items():
        parts = [(((), ()), c)]
        for x in w:
            lc = letter_coproduct(x)
            nxt = {}
            for (u1, u2), cv in parts:
                for (v1, v2), dv in lc:
                    key = (u1 + v1, u2 + v2)
                    prev = nxt.get(key)
                    nc = cv * dv if prev is None else prev + cv * dv
                    if nc:
                        nxt[key] = nc
                    elif key in nxt:
                        del nxt[key]
            parts = list(nxt.items())
        for key, cv in parts:
            prev = out.get(key)
            nc = cv if prev is None else prev + cv
            if nc:
                out[key] = nc
            elif key in out:
                del out[key]
    return TensorTable(alpha, D, out)


def h_corr(h: Series, maxweight=None) -> Series:
    """Correction factor exp(sum_n ((-1)^n/n) c_{A^{n-1}B(0)}(h) Y_{1,0}^n)."""
    D = h.maxdeg if maxweight is None else maxweight
    N = h.alphabet.level
    ya = y_alphabet(N, D)
    a_idx = h.alphabet.index["A"]
    b0 = h.alphabet.index["B0"]
    y10 = _y_letter(ya, 1, 0)
    arg = {}
    for n in range(1, D + 1):
        c = h.terms.get((a_idx,) * (n - 1) + (b0,))
        if c:
            sign = QQ(-1, n) if n % 2 else QQ(1, n)
            arg[(y10,) * n] = sign * c
    return exp_series(Series(ya, D, arg, coerce=False))


def h_star(h: Series, maxweight=None) -> Series:
    return concat_mul(h_corr(h, maxweight), pi_Y(h, maxweight))


def residual_double_shuffle(h: Series, maxweight=None):
    """Delta_*(h_*) - h_* (x) h_*, truncated at total weight."""
    from penta.equations import Residual, _exact_series

    D = h.maxdeg if maxweight is None else maxweight
    if _exact_series(h):
        if h.coeff(["A"]) or h.coeff(["B0"]):
            raise ValueError("needs c_A(h) = c_B(0)(h) = 0")
    hs = h_star(h, D)
    lhs = delta_star(hs)
    wd = hs.alphabet.word_degree
    rhs = {}
    for w1, c1 in hs.terms.items():
        d1 = wd(w1)
        for w2, c2 in hs.terms.items():
            if d1 + wd(w2) > D:
                continue
            rhs[(w1, w2)] = c1 * c2
    diff = lhs - TensorTable(hs.alphabet, D, rhs)
    return Residual("double_shuffle", {"double_shuffle": diff})


def embed_Y(y: Series, maxdeg=None) -> Series:
    """Algebra embedding sending Y_{m,a} to -A^{m-1}B(-a)."""
    from penta.ncseries import alphabet_FN

    D = y.maxdeg if maxdeg is None else maxdeg
    N = y.alphabet.level
    dst = alphabet_FN(N)
    a_idx = dst.index["A"]
    out = {}
    for w, c in y.terms.items():
        img = []
        for x in w:
            n, a = y.alphabet.letters[x][1:].split("_")
            n, a = int(n), int(a)
            img.extend([a_idx] * (n - 1))
            img.append(dst.index[f"B{(-a) % N}"])
        sign = QQ(-1) if len(w) % 2 else QQ(1)
        word = tuple(img)
        prev = out.get(word)
        nc = sign * c if prev is None else prev + sign * c
        if nc:
            out[word] = nc
        elif word in out:
            del out[word]
    return Series(dst, D, out, coerce=False)


# -- stuffle combinatorics -------------------------------------------------------


def enumerate_sh_leq(k, l):
    """All ordered surjections of Sh^<=(k,l), as value tuples of length k+l."""
    out = []
    for n in range(max(k, l), k + l + 1):
        for sa in itertools.combinations(range(1, n + 1), k):
            for sb in itertools.combinations(range(1, n + 1), l):
                if set(sa) | set(sb) != set(range(1, n + 1)):
                    continue
                out.append(sa + sb)
    return out


def stuffle_indices(p: IndexPair, q: IndexPair):
    """One merged index per ordered surjection; merged roots multiply."""
    if p.N != q.N:
        raise ValueError("level mismatch")
    if p.is_empty():
        return [q]
    if q.is_empty():
        return [p]
    k, l = p.depth, q.depth
    out = []
    for sigma in enumerate_sh_leq(k, l):
        n = max(sigma)
        a = [0] * n
        e = [0] * n
        for s in range(k):
            i = sigma[s] - 1
            a[i] += p.a[s]
            e[i] += p.e[s]
        for t in range(l):
            i = sigma[k + t] - 1
            a[i] += q.a[t]
            e[i] += q.e[t]
        out.append(IndexPair(a, e, p.N))
    return out


# -- coefficient extraction and regularized values --------------------------------


def index_word(alpha, p: IndexPair):
    """The word whose coefficient computes the L-value avatar of p."""
    a_idx = alpha.index["A"]
    N = p.N
    word = []
    for j in range(p.depth - 1, -1, -1):
        word.extend([a_idx] * (p.a[j] - 1))
        esum = sum(p.e[j:])
        word.append(alpha.index[f"B{(-esum) % N}"])
    return tuple(word)


def l_coeff(h: Series, p: IndexPair):
    """(-1)^depth times the coefficient of the index word."""
    if p.is_empty():
        return h.constant_term()
    w = index_word(h.alphabet, p)
    c = h.terms.get(w, QQ(0))
    return -c if p.depth % 2 else c


def l_I(h: Series, p: IndexPair) -> TPoly:
    """Integral regularization: l_coeff against exp(T B(0)) h."""
    if p.is_empty():
        return TPoly(h.constant_term())
    b0 = h.alphabet.index["B0"]
    w = index_word(h.alphabet, p)
    coeffs = []
    fact = 1
    for n in range(len(w) + 1):
        if n:
            fact *= n
        if n and w[n - 1] != b0:
            break
        coeffs.append(h.terms.get(w[n:], QQ(0)) / QQ(fact))
        if n < len(w) and w[n] != b0:
            break
    poly = TPoly(coeffs)
    return -poly if p.depth % 2 else poly


def l_S(h: Series, p: IndexPair, _memo=None) -> TPoly:
    """Series regularization: the unique stuffle-compatible extension.

    Non-admissible indices are resolved against the identity
    l_S(r') * l_S((1;0)) = sum over stuffles, which contains the target with
    multiplicity (its trailing-ones count) and otherwise only indices of
    the same weight with strictly fewer trailing (1;0) slots.
    """
    if _memo is None:
        _memo = {}
    got = _memo.get(p)
    if got is not None:
        return got
    if p.is_empty():
        out = TPoly(h.constant_term())
    elif p.is_admissible():
        out = TPoly(l_coeff(h, p))
    elif p.depth == 1:
        out = TPoly.T(1, -1)  # l_S((1;0)) = -T
    else:
        rprime = IndexPair(p.a[:-1], p.e[:-1], p.N)
        one0 = IndexPair((1,), (0,), p.N)
        t = p.trailing_ones()
        acc = l_S(h, rprime, _memo) * l_S(h, one0, _memo)
        count = 0
        for s in stuffle_indices(rprime, one0):
            if s == p:
                count += 1
            else:
                acc = acc - l_S(h, s, _memo)
        assert count == t, "trailing-ones multiplicity mismatch"
        out = acc / count
    _memo[p] = out
    return out


def L_map(h: Series, poly: TPoly) -> TPoly:
    """The exponential-generating-function comparison map on Q[T]."""
    n = poly.degree() if poly else 0
    table = _L_table(h, n)
    out = TPoly()
    for i, c in enumerate(poly.coeffs):
        out = out + table[i] * c
    return out


def _L_table(h: Series, nmax):
    """L(T^n) for n <= nmax via exp(Tu - sum_{m>=2} l_m u^m / m)."""
    ls = {m: l_coeff(h, IndexPair((m,), (0,), h.alphabet.level)) for m in range(2, nmax + 1)}
    # series in u with TPoly coefficients
    arg = [TPoly()] * (nmax + 1)
    if nmax >= 1:
        arg[1] = TPoly.T(1)
    for m in range(2, nmax + 1):
        arg[m] = TPoly(-ls[m] / QQ(m))
    expo = [TPoly(1)] + [TPoly()] * nmax
    power = [TPoly(1)] + [TPoly()] * nmax
    fact = 1
    for k in range(1, nmax + 1):
        nxt = [TPoly()] * (nmax + 1)
        for i in range(nmax + 1):
            if not power[i]:
                continue
            for j in range(1, nmax + 1 - i):
                if arg[j]:
                    nxt[i + j] = nxt[i + j] + power[i] * arg[j]
        power = nxt
        fact *= k
        inv = QQ(1, fact)
        for i in range(nmax + 1):
            if power[i]:
                expo[i] = expo[i] + power[i] * inv
    table = []
    fact = 1
    for nn in range(nmax + 1):
        if nn:
            fact *= nn
        table.append(expo[nn] * fact)
    return table


def regularization_check(h: Series, p: IndexPair) -> bool:
    """l_S(h,p) == L_map(l_I(h,p))."""
    return l_S(h, p) == L_map(h, l_I(h, p))


def check_stuffle(h: Series, p: IndexPair, q: IndexPair) -> bool:
    """Evaluated stuffle identity for a pair of admissible indices."""
    lhs = l_coeff(h, p) * l_coeff(h, q)
    rhs = QQ(0)
    for s in stuffle_indices(p, q):
        rhs = rhs + l_coeff(h, s)
    return lhs == rhs


def check_regularized_stuffle(h: Series, p: IndexPair, q: IndexPair) -> bool:
    """Stuffle identity for l_S on arbitrary (possibly divergent) indices."""
    memo = {}
    lhs = l_S(h, p, memo) * l_S(h, q, memo)
    rhs = TPoly()
    for s in stuffle_indices(p, q):
        rhs = rhs + l_S(h, s, memo)
    return lhs == rhs


def check_dmr_normalizations(h: Series, a, mu, N) -> dict:
    """Report on the depth-1/depth-2 normalizations of the stratum (a, mu)."""
    mu = rat(mu)
    report = {}
    if N <= 2:
        got = h.coeff(["A", "B0"])
        want = mu * mu / 24
        report["normalization2"] = {
            "statement": "c_AB(0)(h) = mu^2/24",
            "got": got,
            "want": want,
            "passed": got == want,
        }
    else:
        diff = h.coeff([f"B{a % N}"]) - h.coeff([f"B{(-a) % N}"])
        want = -(N - 2) * mu / (2 * N)
        report["normalization2"] = {
            "statement": "c_B(a)(h) - c_B(-a)(h) = -(N-2)mu/2N",
            "got": diff,
            "want": want,
            "passed": diff == want,
        }
        rows = []
        for k in range(1, N // 2 + 1):
            lhs = h.coeff([f"B{(k * a) % N}"]) - h.coeff([f"B{(-k * a) % N}"])
            rhs = QQ(N - 2 * k) / (N - 2) * diff
            rows.append({"k": k, "got": lhs, "want": rhs, "passed": lhs == rhs})
        report["normalization1"] = {
            "statement": "c_B(ka)-c_B(-ka) = (N-2k)/(N-2) (c_B(a)-c_B(-a))",
            "rows": rows,
            "passed": all(r["passed"] for r in rows),
        }
    report["passed"] = all(
        v["passed"] for k, v in report.items() if isinstance(v, dict)
    )
    return report
