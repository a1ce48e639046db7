"""Quadratically presented graded algebras and the morphism calculus.

A Presentation is a degree-1 alphabet plus homogeneous degree-2 relations in
the free lift.  A QuotientAlgebra carries, per degree d, the set of normal
monomials and a left-multiplication table (letter, normal word) -> normal
combination; these are built by one sparse row reduction per degree over the
space letter (x) A_{d-1}, which is exact and deterministic under the
degree-lex order of the alphabet.

The infinitesimal-braid families t_n and their cyclotomic versions t_{n,N}
(and the variants without the generator coupling strand 1 to strand n) are
constructed here, together with the three flavors of insertion morphisms and
the level-changing projections.
"""

import hashlib
import itertools

from penta import cache
from penta.kernels import echelonize, merge_scaled
from penta.ncseries import Alphabet, Series, concat_mul, substitute
from penta.ratio import QQ


def commutator(a: Series, b: Series) -> Series:
    return concat_mul(a, b) - concat_mul(b, a)


class Presentation:
    """Degree-1 generators and homogeneous degree-2 relations."""

    def __init__(self, name, alphabet, relations):
        self.name = name
        self.alphabet = alphabet
        rels = []
        seen = set()
        for r in relations:
            if r.is_zero():
                continue
            for w in r.terms:
                if alphabet.word_degree(w) != 2:
                    raise ValueError(f"relation not homogeneous of degree 2: {r}")
            key = self._canon_key(r)
            if key in seen:
                continue
            seen.add(key)
            rels.append(r)
        self.relations = tuple(rels)

    @staticmethod
    def _canon_key(r):
        lead = min(r.terms)
        inv = 1 / r.terms[lead]
        return tuple(sorted((w, str(c * inv)) for w, c in r.terms.items()))

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(repr(self.alphabet.letters).encode())
        h.update(repr(self.alphabet.degrees).encode())
        for key in sorted(self._canon_key(r) for r in self.relations):
            h.update(repr(key).encode())
        return h.hexdigest()[:16]

    def free(self):
        return len(self.relations) == 0

    def letter_series(self, name, maxdeg=2):
        return Series.letter(self.alphabet, name, maxdeg)

    def __repr__(self):
        return (
            f"Presentation({self.name!r}, {len(self.alphabet)} gens, "
            f"{len(self.relations)} rels)"
        )


# -- the t_{n,N} family -------------------------------------------------------


def _gen_name(i, j, a, N):
    """Canonical generator name; resolves t(a)^{ji} = t(-a)^{ij} at i<j."""
    if i == j:
        raise ValueError("strands must differ")
    if i > j:
        i, j = j, i
        a = -a
    if i == 1:
        return f"t1{j}"
    return f"t{i}{j}_{a % N}"


def _t_letters(n, N, skip_1n=False):
    letters = [f"t1{i}" for i in range(2, n + 1)]
    if skip_1n:
        letters = letters[:-1] if n >= 2 else letters
    for i in range(2, n + 1):
        for j in range(i + 1, n + 1):
            letters.extend(f"t{i}{j}_{a}" for a in range(N))
    return letters


def _t_relations(pres_alpha, n, N, allowed):
    """Relation list of t_{n,N}, restricted to words over `allowed` letters."""
    D = 2

    def gen(i, j, a=0):
        name = _gen_name(i, j, a, N)
        if name not in allowed:
            return None
        return Series.letter(pres_alpha, name, D)

    def lin(*parts):
        out = Series.zero(pres_alpha, D)
        for p in parts:
            if p is None:
                return None
            out = out + p
        return out

    rels = []

    def add(x, y):
        if x is None or y is None:
            return
        rels.append(commutator(x, y))

    rng = range(2, n + 1)
    # [t(a)^{ij}, t(a+b)^{ik} + t(b)^{jk}] = 0
    for i, j, k in itertools.permutations(rng, 3):
        for a in range(N):
            for b in range(N):
                add(gen(i, j, a), lin(gen(i, k, a + b), gen(j, k, b)))
    # [t^{1i} + t^{1j} + sum_c t(c)^{ij}, t(a)^{ij}] = 0
    for i, j in itertools.permutations(rng, 2):
        csum = lin(*(gen(i, j, c) for c in range(N)))
        for a in range(N):
            add(lin(gen(1, i), gen(1, j), csum), gen(i, j, a))
    # [t^{1i}, t^{1j} + sum_c t(c)^{ij}] = 0
    for i, j in itertools.permutations(rng, 2):
        add(gen(1, i), lin(gen(1, j), *(gen(i, j, c) for c in range(N))))
    # [t^{1i}, t(a)^{jk}] = 0
    for i in rng:
        for j, k in itertools.combinations(rng, 2):
            if i in (j, k):
                continue
            for a in range(N):
                add(gen(1, i), gen(j, k, a))
    # [t(a)^{ij}, t(b)^{kl}] = 0, four distinct strands >= 2
    for (i, j), (k, l) in itertools.combinations(itertools.combinations(rng, 2), 2):
        if len({i, j, k, l}) == 4:
            for a in range(N):
                for b in range(N):
                    add(gen(i, j, a), gen(k, l, b))
    return rels


def build_t(n, N=1) -> Presentation:
    """Cyclotomic infinitesimal-braid presentation on n strands, level N."""
    if n < 2 or N < 1:
        raise ValueError("need n >= 2 and N >= 1")
    letters = _t_letters(n, N)
    alpha = Alphabet(f"t{n}_N{N}", letters, level=N)
    rels = _t_relations(alpha, n, N, set(letters))
    return Presentation(f"t({n},{N})", alpha, rels)


def build_t0(n, N=1) -> Presentation:
    """Same generators except the one coupling strands 1 and n."""
    if n < 2 or N < 1:
        raise ValueError("need n >= 2 and N >= 1")
    letters = _t_letters(n, N, skip_1n=True)
    alpha = Alphabet(f"t0{n}_N{N}", letters, level=N)
    rels = _t_relations(alpha, n, N, set(letters))
    return Presentation(f"t0({n},{N})", alpha, rels)


def free_presentation(alphabet) -> Presentation:
    return Presentation(f"free({alphabet.kind})", alphabet, [])


def central_element(pres: Presentation, n, N, maxdeg) -> Series:
    """z = sum of all t^{ij} (with the level sum over a for i,j >= 2)."""
    out = Series.zero(pres.alphabet, maxdeg)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if i == 1:
                out = out + Series.letter(pres.alphabet, f"t1{j}", maxdeg)
            else:
                for a in range(N):
                    out = out + Series.letter(pres.alphabet, f"t{i}{j}_{a}", maxdeg)
    return out


# -- quotient algebras ---------------------------------------------------------


class QuotientAlgebra:
    """Per-degree normal monomials and left-multiplication tables.

    Normal monomials at degree d are words x*m with m normal at degree d-1
    (the set of normal words is suffix-closed), chosen as the non-pivot
    coordinates of the reduced row echelon form of the degree-d relation
    span inside letter (x) A_{d-1}.
    """

    _registry = {}

    def __init__(self, pres: Presentation):
        self.pres = pres
        self.alphabet = pres.alphabet
        self.nletters = len(pres.alphabet)
        self.normal = {0: [()], 1: [(i,) for i in range(self.nletters)]}
        self.npos = {0: {(): 0}, 1: {(i,): i for i in range(self.nletters)}}
        # lmul[d][(x, m)] -> {normal word of degree d: coeff}; entries exist
        # only where x*m is not itself normal.
        self.lmul = {}
        self.maxdeg_built = 1
        self._ideal = {}
        self._nf_cache = {}
        # relation terms as (x, y, coeff) triples for the kernel assembly
        self._rel_rows = [
            [(w[0], w[1], c) for w, c in r.terms.items()] for r in pres.relations
        ]

    @classmethod
    def get(cls, pres: Presentation, maxdeg=0) -> "QuotientAlgebra":
        key = pres.fingerprint()
        obj = cls._registry.get(key)
        if obj is None:
            obj = cls(pres)
            cls._registry[key] = obj
        obj.ensure_degree(maxdeg)
        return obj

    # -- table construction ----------------------------------------------

    def ensure_degree(self, maxdeg):
        while self.maxdeg_built < maxdeg:
            self._build_degree(self.maxdeg_built + 1)

    def _cache_key(self, d):
        return f"lmul_{self.pres.fingerprint()}_d{d}"

    def _build_degree(self, d):
        got = cache.load(self._cache_key(d))
        if got is not None:
            self.normal[d], self.lmul[d] = got
            self.npos[d] = {w: i for i, w in enumerate(self.normal[d])}
            self.maxdeg_built = d
            return
        prev = self.normal[d - 1]
        prev_pos = self.npos[d - 1]
        stride = len(prev)
        rows = []
        if self._rel_rows:
            for m in self.normal[d - 2]:
                for rel in self._rel_rows:
                    row = {}
                    for x, y, c in rel:
                        if d == 2:
                            ym = {(y,): QQ(1)}
                        else:
                            ym = self._lmul_word(y, m, d - 1)
                        base = x * stride
                        for w, v in ym.items():
                            k = base + prev_pos[w]
                            nv = row.get(k)
                            nv = c * v if nv is None else nv + c * v
                            if nv:
                                row[k] = nv
                            elif k in row:
                                del row[k]
                    if row:
                        rows.append(row)
        pivots = echelonize(rows)
        normal_d = []
        pos_d = {}
        coord_word = {}
        for x in range(self.nletters):
            base = x * stride
            for i, m in enumerate(prev):
                k = base + i
                w = (x,) + m
                coord_word[k] = w
                if k not in pivots:
                    pos_d[w] = len(normal_d)
                    normal_d.append(w)
        lmul_d = {}
        for k, row in pivots.items():
            x, i = divmod(k, stride)
            tail = {}
            for k2, v in row.items():
                if k2 != k:
                    tail[coord_word[k2]] = -v
            lmul_d[(x, prev[i])] = tail
        self.normal[d] = normal_d
        self.npos[d] = pos_d
        self.lmul[d] = lmul_d
        self.maxdeg_built = d
        cache.save(self._cache_key(d), (normal_d, lmul_d))

    # -- reduction --------------------------------------------------------

    def dim(self, d):
        self.ensure_degree(d)
        return len(self.normal[d])

    def normal_words(self, d):
        self.ensure_degree(d)
        return self.normal[d]

    def lmul_apply(self, x, combo, d_from):
        """Left-multiply a degree-d_from normal combination by letter x."""
        d = d_from + 1
        self.ensure_degree(d)
        table = self.lmul.get(d, {})
        out = {}
        for m, c in combo.items():
            hit = table.get((x, m))
            if hit is None:
                w = (x,) + m
                prev = out.get(w)
                nc = c if prev is None else prev + c
                if nc:
                    out[w] = nc
                elif w in out:
                    del out[w]
            else:
                merge_scaled(out, hit, c)
        return out

    def _lmul_word(self, x, m, d):
        """Normal combination of x*m for a normal word m (degree d result)."""
        table = self.lmul.get(d, {})
        hit = table.get((x, m))
        if hit is None:
            return {(x,) + m: QQ(1)}
        return hit

    def nf_word(self, w):
        """Normal combination of an arbitrary free word."""
        got = self._nf_cache.get(w)
        if got is not None:
            return got
        if len(w) <= 1:
            combo = {w: QQ(1)}
        else:
            self.ensure_degree(len(w))
            combo = self.lmul_apply(w[0], self.nf_word(w[1:]), len(w) - 1)
        self._nf_cache[w] = combo
        return combo

    def normal_form(self, x: Series) -> Series:
        if x.alphabet != self.alphabet:
            raise ValueError("series not in this algebra's free lift")
        D = x.maxdeg
        self.ensure_degree(min(D, max((len(w) for w in x.terms), default=0)))
        out = {}
        for w, c in x.terms.items():
            merge_scaled(out, self.nf_word(w), c)
        return Series(self.alphabet, D, out, coerce=False)

    def is_zero_in_quotient(self, x: Series) -> bool:
        return self.normal_form(x).is_zero()

    # -- the explicit ideal (small degrees; used by certification/tests) ---

    def ideal_component(self, d):
        """Echelon basis of the degree-d ideal in free-word coordinates."""
        if d in self._ideal:
            return self._ideal[d]
        if d < 2 or not self.pres.relations:
            self._ideal[d] = {}
            return self._ideal[d]
        words = [
            w
            for w in itertools.product(range(self.nletters), repeat=d)
        ]
        pos = {w: i for i, w in enumerate(words)}
        rows = []
        for r in self.pres.relations:
            for i in range(d - 1):
                for u in itertools.product(range(self.nletters), repeat=i):
                    for v in itertools.product(
                        range(self.nletters), repeat=d - 2 - i
                    ):
                        row = {}
                        for w, c in r.terms.items():
                            k = pos[u + w + v]
                            nv = row.get(k)
                            nv = c if nv is None else nv + c
                            if nv:
                                row[k] = nv
                            elif k in row:
                                del row[k]
                        if row:
                            rows.append(row)
        pivots = echelonize(rows)
        basis = {}
        for k, row in pivots.items():
            basis[words[k]] = {words[k2]: v for k2, v in row.items()}
        self._ideal[d] = basis
        return basis

    def ideal_spanning_words(self, d):
        """Yield (u, relation, v) index triples spanning the degree-d ideal."""
        for r in self.pres.relations:
            for i in range(d - 1):
                for u in itertools.product(range(self.nletters), repeat=i):
                    for v in itertools.product(
                        range(self.nletters), repeat=d - 2 - i
                    ):
                        yield u, r, v


# -- morphisms -----------------------------------------------------------------


class Morphism:
    """Generator images (homogeneous Series in the target free lift)."""

    def __init__(self, source: Presentation, target: Presentation, images: dict):
        self.source = source
        self.target = target
        missing = [n for n in source.alphabet.letters if n not in images]
        if missing:
            raise KeyError(f"missing images: {missing}")
        self.images = {n: images[n] for n in source.alphabet.letters}

    def apply(self, x: Series, maxdeg=None) -> Series:
        D = maxdeg if maxdeg is not None else x.maxdeg
        imgs = {
            n: (s if s.maxdeg == D else Series(self.target.alphabet, D, s.terms, coerce=False))
            for n, s in self.images.items()
        }
        return substitute(x, imgs)

    def __repr__(self):
        return f"Morphism({self.source.name} -> {self.target.name})"


def check_morphism(m: Morphism) -> bool:
    """True iff every source relation maps into the target ideal."""
    Q = QuotientAlgebra.get(m.target, 2)
    for r in m.source.relations:
        if not Q.is_zero_in_quotient(m.apply(r, 2)):
            return False
    return True


def identity_morphism(pres: Presentation) -> Morphism:
    return Morphism(
        pres,
        pres,
        {n: Series.letter(pres.alphabet, n, 1) for n in pres.alphabet.letters},
    )


def parse_strand_pattern(pattern):
    """'1,23,4' -> f with f(1)=1, f(2)=2, f(3)=2, f(4)=3 (partial map)."""
    f = {}
    for gi, group in enumerate(pattern.split(","), start=1):
        for ch in group.strip():
            s = int(ch)
            if s in f:
                raise ValueError(f"strand {s} repeated in {pattern!r}")
            f[s] = gi
    return f


def build_xf(m, n, f, variant, N=1, sub0=False) -> Morphism:
    """Insertion morphism x -> x^f for a partial map f: {1..m} -> {1..n}.

    variant 't':     t_n -> t_m        (level 1 on both sides)
    variant 'tN':    t_{n,N} -> t_{m,N}, requires f(1) = 1
    variant 't>tN':  t_n -> t_{m,N}, f defined on {2..m}
    With sub0=True both presentations drop the strand-(1,last) generator.
    """
    build = build_t0 if sub0 else build_t
    if variant == "t":
        source, target, Ns, Nt = build(n, 1), build(m, 1), 1, 1
    elif variant == "tN":
        if f.get(1) != 1:
            raise ValueError("variant tN needs f(1) = 1")
        source, target, Ns, Nt = build(n, N), build(m, N), N, N
    elif variant == "t>tN":
        if 1 in f:
            raise ValueError("variant t>tN is defined on strands {2..m}")
        source, target, Ns, Nt = build(n, 1), build(m, N), 1, N
    else:
        raise ValueError(f"unknown variant {variant!r}")
    pre = {}
    for s, i in f.items():
        pre.setdefault(i, []).append(s)
    for i in pre:
        pre[i].sort()
    images = {}

    def tgt(i, j, a=0):
        return Series.letter(target.alphabet, _gen_name(i, j, a, Nt), 1)

    def zero():
        return Series.zero(target.alphabet, 1)

    for name in source.alphabet.letters:
        if name.startswith("t1") and "_" not in name:
            j = int(name[2:])
            img = zero()
            if variant == "t":
                for ip in pre.get(1, []):
                    for jp in pre.get(j, []):
                        img = img + tgt(ip, jp)
            elif variant == "tN":
                js = pre.get(j, [])
                for jp in js:
                    img = img + tgt(1, jp)
                for jp, jpp in itertools.combinations(js, 2):
                    for c in range(N):
                        img = img + tgt(jp, jpp, c)
                for ip in pre.get(1, []):
                    if ip == 1:
                        continue
                    for jp in js:
                        for c in range(N):
                            img = img + tgt(ip, jp, c)
            else:  # t>tN: i = 1 case of the uniform rule below
                for ip in pre.get(1, []):
                    for jp in pre.get(j, []):
                        img = img + tgt(ip, jp, 0)
            images[name] = img
        else:
            body, a = name[1:].split("_")
            i, j = int(body[0]), int(body[1])
            a = int(a)
            img = zero()
            for ip in pre.get(i, []):
                for jp in pre.get(j, []):
                    img = img + tgt(ip, jp, a if variant != "t>tN" else 0)
            images[name] = img
    return Morphism(source, target, images)


def pi_NN(n, N, Nprime, sub0=False) -> Morphism:
    """Level projection: t^{1i} -> d t^{1i}, t(a)^{ij} -> t(a mod N')^{ij}."""
    if N % Nprime:
        raise ValueError("need N' | N")
    d = N // Nprime
    build = build_t0 if sub0 else build_t
    source, target = build(n, N), build(n, Nprime)
    images = {}
    for name in source.alphabet.letters:
        if "_" not in name:
            images[name] = Series.letter(target.alphabet, name, 1).scale(d)
        else:
            body, a = name[1:].split("_")
            images[name] = Series.letter(
                target.alphabet, f"t{body}_{int(a) % Nprime}", 1
            )
    return Morphism(source, target, images)


def delta_NN(n, N, Nprime, sub0=False) -> Morphism:
    """Level thinning: t(a)^{ij} -> t(a/d)^{ij} if d | a, else 0."""
    if N % Nprime:
        raise ValueError("need N' | N")
    d = N // Nprime
    build = build_t0 if sub0 else build_t
    source, target = build(n, N), build(n, Nprime)
    images = {}
    for name in source.alphabet.letters:
        if "_" not in name:
            images[name] = Series.letter(target.alphabet, name, 1)
        else:
            body, a = name[1:].split("_")
            a = int(a)
            if a % d:
                images[name] = Series.zero(target.alphabet, 1)
            else:
                images[name] = Series.letter(target.alphabet, f"t{body}_{a // d}", 1)
    return Morphism(source, target, images)
