"""Truncated non-commutative formal power series on graded alphabets.

Words are tuples of letter indices (leftmost letter first); a Series is a
sparse table word -> nonzero coefficient, carrying its alphabet and a hard
truncation degree.  Coefficients are exact rationals in the symbolic modules;
the same containers also accept float/complex/mpmath coefficients for the
numeric oracle, since every operation only needs ring arithmetic and
truthiness as the zero test.
"""

import itertools
from fractions import Fraction

from penta.kernels import merge_scaled
from penta.ratio import QQ, rat, rat_str


class AlphabetMismatch(ValueError):
    pass


class TruncationMismatch(ValueError):
    pass


class Alphabet:
    """Ordered list of named letters with positive integer degrees."""

    def __init__(self, kind, letters, degrees=None, level=1):
        self.kind = kind
        self.letters = tuple(letters)
        if len(set(self.letters)) != len(self.letters):
            raise ValueError("letters must be pairwise distinct")
        if degrees is None:
            degrees = [1] * len(self.letters)
        self.degrees = tuple(int(d) for d in degrees)
        if any(d < 1 for d in self.degrees):
            raise ValueError("letter degrees must be >= 1")
        self.level = level
        self.index = {name: i for i, name in enumerate(self.letters)}

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return (
            isinstance(other, Alphabet)
            and self.letters == other.letters
            and self.degrees == other.degrees
        )

    def __hash__(self):
        return hash((self.letters, self.degrees))

    def __repr__(self):
        return f"Alphabet({self.kind!r}, {list(self.letters)})"

    def word_degree(self, word):
        degs = self.degrees
        return sum(degs[i] for i in word)

    def word_name(self, word):
        return [self.letters[i] for i in word]

    def word_from_names(self, names):
        try:
            return tuple(self.index[n] for n in names)
        except KeyError as e:
            raise KeyError(f"unknown letter {e.args[0]!r} in {self.kind}") from None

    def uniform_degree_one(self):
        return all(d == 1 for d in self.degrees)


def alphabet_F2():
    """Two free generators A, B (the g side)."""
    return Alphabet("F2", ["A", "B"], level=1)


def alphabet_FN(N):
    """A and B(a), a in Z/N, all degree 1 (the h side)."""
    return Alphabet("FN1", ["A"] + [f"B{a}" for a in range(N)], level=N)


def alphabet_Y(N, maxweight):
    """Y_{n,a} with degree n, for n <= maxweight and a in Z/N."""
    letters, degrees = [], []
    for n in range(1, maxweight + 1):
        for a in range(N):
            letters.append(f"Y{n}_{a}")
            degrees.append(n)
    return Alphabet("YN", letters, degrees, level=N)


EMPTY = ()


class Series:
    """Sparse truncated series; immutable by convention."""

    __slots__ = ("alphabet", "maxdeg", "terms")

    def __init__(self, alphabet, maxdeg, terms=None, coerce=True):
        self.alphabet = alphabet
        self.maxdeg = int(maxdeg)
        tbl = {}
        if terms:
            wd = alphabet.word_degree
            for w, c in terms.items():
                if coerce and isinstance(c, (int, str, Fraction)):
                    c = rat(c)
                if not c:
                    continue
                if wd(w) > self.maxdeg:
                    continue
                tbl[w] = c
        self.terms = tbl

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, alphabet, maxdeg):
        return cls(alphabet, maxdeg)

    @classmethod
    def one(cls, alphabet, maxdeg):
        return cls(alphabet, maxdeg, {EMPTY: QQ(1)}, coerce=False)

    @classmethod
    def letter(cls, alphabet, name, maxdeg):
        w = alphabet.word_from_names([name])
        return cls(alphabet, maxdeg, {w: QQ(1)}, coerce=False)

    @classmethod
    def from_names(cls, alphabet, maxdeg, named_terms):
        """Build from {('A','B0'): coeff} style tables."""
        return cls(
            alphabet,
            maxdeg,
            {alphabet.word_from_names(w): c for w, c in named_terms.items()},
        )

    # -- basics ------------------------------------------------------------

    def coeff(self, word):
        if isinstance(word, (list,)) or (word and isinstance(word[0], str)):
            word = self.alphabet.word_from_names(word)
        return self.terms.get(tuple(word), QQ(0))

    def constant_term(self):
        return self.terms.get(EMPTY, QQ(0))

    def is_zero(self):
        return not self.terms

    def degree_component(self, d):
        wd = self.alphabet.word_degree
        return {w: c for w, c in self.terms.items() if wd(w) == d}

    def by_degree(self):
        out = {}
        wd = self.alphabet.word_degree
        for w, c in self.terms.items():
            out.setdefault(wd(w), {})[w] = c
        return out

    def truncated(self, maxdeg):
        if maxdeg > self.maxdeg:
            raise TruncationMismatch("cannot extend a truncated series")
        return Series(self.alphabet, maxdeg, self.terms, coerce=False)

    def _check_compat(self, other):
        if self.alphabet != other.alphabet:
            raise AlphabetMismatch(
                f"{self.alphabet.kind} vs {other.alphabet.kind}"
            )
        if self.maxdeg != other.maxdeg:
            raise TruncationMismatch(f"{self.maxdeg} vs {other.maxdeg}")

    # -- linear structure ----------------------------------------------------

    def __add__(self, other):
        self._check_compat(other)
        terms = dict(self.terms)
        merge_scaled(terms, other.terms, QQ(1))
        return Series(self.alphabet, self.maxdeg, terms, coerce=False)

    def __sub__(self, other):
        self._check_compat(other)
        terms = dict(self.terms)
        merge_scaled(terms, other.terms, QQ(-1))
        return Series(self.alphabet, self.maxdeg, terms, coerce=False)

    def __neg__(self):
        return Series(
            self.alphabet, self.maxdeg, {w: -c for w, c in self.terms.items()},
            coerce=False,
        )

    def scale(self, c):
        if isinstance(c, (int, str, Fraction)):
            c = rat(c)
        if not c:
            return Series.zero(self.alphabet, self.maxdeg)
        return Series(
            self.alphabet, self.maxdeg, {w: c * v for w, v in self.terms.items()},
            coerce=False,
        )

    def __mul__(self, other):
        if isinstance(other, Series):
            return concat_mul(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        return (
            isinstance(other, Series)
            and self.alphabet == other.alphabet
            and self.maxdeg == other.maxdeg
            and self.terms == other.terms
        )

    def __repr__(self):
        if not self.terms:
            return "<Series 0>"
        bits = []
        for w in sorted(self.terms, key=lambda w: (self.alphabet.word_degree(w), w)):
            name = ".".join(self.alphabet.word_name(w)) or "1"
            bits.append(f"({self.terms[w]})*{name}")
        s = " + ".join(bits[:12])
        if len(bits) > 12:
            s += f" + ... [{len(bits)} terms]"
        return f"<Series {s}>"

    def max_abs_by_degree(self):
        """Largest |coefficient| per degree (works for exact and float)."""
        out = {}
        for d, comp in self.by_degree().items():
            out[d] = max(abs(c) for c in comp.values())
        return out


# -- products ---------------------------------------------------------------


def concat_mul(a: Series, b: Series) -> Series:
    """Concatenation product, truncated at the common degree bound."""
    a._check_compat(b)
    D = a.maxdeg
    wd = a.alphabet.word_degree
    out = {}
    bitems = [(w, wd(w), c) for w, c in b.terms.items()]
    for wa, ca in a.terms.items():
        da = wd(wa)
        for wb, db, cb in bitems:
            if da + db > D:
                continue
            w = wa + wb
            c = out.get(w)
            c = ca * cb if c is None else c + ca * cb
            if c:
                out[w] = c
            elif w in out:
                del out[w]
    return Series(a.alphabet, D, out, coerce=False)


def shuffle_word(w1, w2):
    """All interleavings of two words (with multiplicity)."""
    n1, n2 = len(w1), len(w2)
    n = n1 + n2
    for pos in itertools.combinations(range(n), n1):
        out = [None] * n
        for i, p in enumerate(pos):
            out[p] = w1[i]
        it = iter(w2)
        for p in range(n):
            if out[p] is None:
                out[p] = next(it)
        yield tuple(out)


def shuffle_mul(a: Series, b: Series) -> Series:
    """Shuffle product, truncated at the common degree bound."""
    a._check_compat(b)
    D = a.maxdeg
    wd = a.alphabet.word_degree
    out = {}
    bitems = [(w, wd(w), c) for w, c in b.terms.items()]
    for wa, ca in a.terms.items():
        da = wd(wa)
        for wb, db, cb in bitems:
            if da + db > D:
                continue
            c = ca * cb
            for w in shuffle_word(wa, wb):
                prev = out.get(w)
                nc = c if prev is None else prev + c
                if nc:
                    out[w] = nc
                elif w in out:
                    del out[w]
    return Series(a.alphabet, D, out, coerce=False)


class TensorTable:
    """Sparse table (word, word) -> coefficient; a tensor-square element."""

    __slots__ = ("alphabet", "maxdeg", "terms")

    def __init__(self, alphabet, maxdeg, terms=None):
        self.alphabet = alphabet
        self.maxdeg = maxdeg
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    def is_zero(self):
        return not self.terms

    def __sub__(self, other):
        terms = dict(self.terms)
        merge_scaled(terms, other.terms, QQ(-1))
        return TensorTable(self.alphabet, self.maxdeg, terms)

    def __eq__(self, other):
        return isinstance(other, TensorTable) and self.terms == other.terms

    def coeff(self, w1, w2):
        return self.terms.get((tuple(w1), tuple(w2)), QQ(0))

    def max_abs_by_degree(self):
        wd = self.alphabet.word_degree
        out = {}
        for (w1, w2), c in self.terms.items():
            d = wd(w1) + wd(w2)
            a = abs(c)
            if a > out.get(d, -1):
                out[d] = a
        return out


def coproduct(a: Series) -> TensorTable:
    """Unshuffle coproduct: generators primitive, multiplicative for concat."""
    wd = a.alphabet.word_degree
    out = {}
    for w, c in a.terms.items():
        n = len(w)
        for r in range(n + 1):
            for pos in itertools.combinations(range(n), r):
                left = tuple(w[i] for i in pos)
                rest = tuple(w[i] for i in range(n) if i not in pos)
                key = (left, rest)
                prev = out.get(key)
                nc = c if prev is None else prev + c
                if nc:
                    out[key] = nc
                elif key in out:
                    del out[key]
    return TensorTable(a.alphabet, a.maxdeg, out)


def tensor_square(a: Series, b: Series) -> TensorTable:
    out = {}
    wd = a.alphabet.word_degree
    for w1, c1 in a.terms.items():
        d1 = wd(w1)
        for w2, c2 in b.terms.items():
            if d1 + wd(w2) > a.maxdeg:
                continue
            out[(w1, w2)] = c1 * c2
    return TensorTable(a.alphabet, a.maxdeg, out)


# -- exp / log / inverse ------------------------------------------------------


def exp_series(x: Series) -> Series:
    if x.constant_term():
        raise ValueError("exp needs zero constant term")
    out = Series.one(x.alphabet, x.maxdeg)
    power = Series.one(x.alphabet, x.maxdeg)
    fact = 1
    for k in range(1, x.maxdeg + 1):
        power = concat_mul(power, x)
        if power.is_zero():
            break
        fact *= k
        out = out + power.scale(QQ(1, fact))
    return out


def log_series(g: Series) -> Series:
    if g.constant_term() != 1:
        raise ValueError("log needs constant term 1")
    u = g - Series.one(g.alphabet, g.maxdeg)
    out = Series.zero(g.alphabet, g.maxdeg)
    power = Series.one(g.alphabet, g.maxdeg)
    for k in range(1, g.maxdeg + 1):
        power = concat_mul(power, u)
        if power.is_zero():
            break
        out = out + power.scale(QQ(-1 if k % 2 == 0 else 1, k))
    return out


def inverse(g: Series) -> Series:
    """Multiplicative inverse; constant term must be invertible."""
    c0 = g.constant_term()
    if not c0:
        raise ValueError("inverse needs nonzero constant term")
    if isinstance(c0, (int, Fraction)):
        c0 = QQ(c0)
    inv0 = 1 / c0
    u = Series.one(g.alphabet, g.maxdeg) - g.scale(inv0)
    out = Series.one(g.alphabet, g.maxdeg)
    power = Series.one(g.alphabet, g.maxdeg)
    for _ in range(g.maxdeg):
        power = concat_mul(power, u)
        if power.is_zero():
            break
        out = out + power
    return out.scale(inv0)


def is_primitive(x: Series) -> bool:
    """Delta(x) == x (x) 1 + 1 (x) x, degree by degree."""
    delta = coproduct(x)
    expect = {}
    for w, c in x.terms.items():
        if w == EMPTY:
            return False if c else True
        expect[(w, EMPTY)] = c
        expect[(EMPTY, w)] = c
    return delta.terms == expect


def is_grouplike(g: Series) -> bool:
    if g.constant_term() != 1:
        return False
    x = log_series(g)
    return is_primitive(x)


# -- substitution -------------------------------------------------------------


def substitute(a: Series, images: dict) -> Series:
    """Algebra morphism determined by letter images.

    `images` maps source letter names to Series over a common target
    alphabet; each image must be homogeneous of the source letter's degree.
    The target truncation degree must be >= the source's.
    """
    alpha = a.alphabet
    missing = [n for n in alpha.letters if n not in images]
    if missing:
        raise KeyError(f"missing images for {missing}")
    target_alpha = None
    D = None
    for name, img in images.items():
        if target_alpha is None:
            target_alpha, D = img.alphabet, img.maxdeg
        elif img.alphabet != target_alpha or img.maxdeg != D:
            raise AlphabetMismatch("images must share alphabet and truncation")
        d = alpha.degrees[alpha.index[name]]
        for w in img.terms:
            if img.alphabet.word_degree(w) != d:
                raise ValueError(f"image of {name} not homogeneous of degree {d}")
    if target_alpha is None:
        raise ValueError("no images supplied")
    if D < a.maxdeg:
        raise TruncationMismatch("target truncation below source")
    img_by_idx = [images[n] for n in alpha.letters]
    one = Series.one(target_alpha, D)
    cache = {EMPTY: one}

    def img_of(word):
        got = cache.get(word)
        if got is None:
            got = concat_mul(img_by_idx[word[0]], img_of(word[1:]))
            cache[word] = got
        return got

    out = Series.zero(target_alpha, D)
    for w, c in a.terms.items():
        out = out + img_of(w).scale(c)
    return out


# -- Lyndon words and Lie series ----------------------------------------------


def lyndon_words(num_letters, length):
    """Lyndon words of given length over 0..num_letters-1, lex order (Duval)."""
    if length <= 0:
        return
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if m == length:
            yield tuple(w)
        while len(w) < length:
            w.append(w[-m])
        while w and w[-1] == num_letters - 1:
            w.pop()


def is_lyndon(word):
    return len(word) > 0 and all(word < word[i:] for i in range(1, len(word)))


def standard_factorization(word):
    """w = u.v with v the longest proper Lyndon suffix."""
    n = len(word)
    for i in range(1, n):
        if is_lyndon(word[i:]):
            return word[:i], word[i:]
    raise ValueError(f"{word} is not a Lyndon word of length >= 2")


def lyndon_bracket_series(alphabet, word, maxdeg):
    """Expansion of the standard bracketing of a Lyndon word."""
    if len(word) == 1:
        return Series(alphabet, maxdeg, {tuple(word): QQ(1)}, coerce=False)
    u, v = standard_factorization(word)
    pu = lyndon_bracket_series(alphabet, u, maxdeg)
    pv = lyndon_bracket_series(alphabet, v, maxdeg)
    return concat_mul(pu, pv) - concat_mul(pv, pu)


class LieSeries:
    """Primitive series stored by coordinates on the Lyndon basis."""

    __slots__ = ("alphabet", "maxdeg", "coords")

    def __init__(self, alphabet, maxdeg, coords=None):
        if not alphabet.uniform_degree_one():
            raise ValueError("Lyndon basis requires a degree-1 alphabet")
        self.alphabet = alphabet
        self.maxdeg = maxdeg
        self.coords = {}
        for w, c in (coords or {}).items():
            c = rat(c) if isinstance(c, (int, str, Fraction)) else c
            if not c:
                continue
            w = tuple(w)
            if not is_lyndon(w):
                raise ValueError(f"{w} is not Lyndon")
            if len(w) <= maxdeg:
                self.coords[w] = c

    def to_series(self) -> Series:
        out = Series.zero(self.alphabet, self.maxdeg)
        for w, c in self.coords.items():
            out = out + lyndon_bracket_series(self.alphabet, w, self.maxdeg).scale(c)
        return out

    def __eq__(self, other):
        return isinstance(other, LieSeries) and self.coords == other.coords


def lie_from_series(x: Series) -> LieSeries:
    """Inverse of LieSeries.to_series; rejects non-Lie input.

    Uses the triangularity of the Lyndon basis: the bracketing of a Lyndon
    word is that word plus lexicographically larger ones, so repeatedly
    stripping the lex-smallest remaining word terminates exactly on Lie
    elements.
    """
    if x.constant_term():
        raise ValueError("not primitive: nonzero constant term")
    alpha = x.alphabet
    coords = {}
    for d, comp in sorted(x.by_degree().items()):
        rest = dict(comp)
        while rest:
            w = min(rest)
            if not is_lyndon(w):
                raise ValueError(f"not a Lie element (stuck at word {w})")
            c = rest[w]
            coords[w] = c
            basis = lyndon_bracket_series(alpha, w, d)
            merge_scaled(rest, basis.terms, -c)
    return LieSeries(alpha, x.maxdeg, coords)


def lyndon_roundtrip(x):
    """LieSeries -> Series or Series -> LieSeries."""
    if isinstance(x, LieSeries):
        return x.to_series()
    return lie_from_series(x)


# -- JSON documents -----------------------------------------------------------


def alphabet_to_doc(alpha: Alphabet) -> dict:
    return {
        "kind": alpha.kind,
        "level": alpha.level,
        "letters": list(alpha.letters),
        "degrees": list(alpha.degrees),
    }


def alphabet_from_doc(doc: dict) -> Alphabet:
    return Alphabet(doc["kind"], doc["letters"], doc["degrees"], doc.get("level", 1))


def series_to_doc(s: Series) -> dict:
    wd = s.alphabet.word_degree
    words = sorted(s.terms, key=lambda w: (wd(w), w))
    return {
        "alphabet": alphabet_to_doc(s.alphabet),
        "maxdeg": s.maxdeg,
        "terms": [
            {"word": s.alphabet.word_name(w), "coeff": rat_str(s.terms[w])}
            for w in words
        ],
    }


def series_from_doc(doc: dict) -> Series:
    alpha = alphabet_from_doc(doc["alphabet"])
    terms = {}
    for i, t in enumerate(doc["terms"]):
        try:
            w = alpha.word_from_names(t["word"])
        except KeyError as e:
            raise ValueError(f"terms[{i}]: {e.args[0]}") from None
        c = rat(t["coeff"])
        if w in terms:
            raise ValueError(f"terms[{i}]: duplicate word {t['word']}")
        terms[w] = c
    return Series(alpha, doc["maxdeg"], terms)
