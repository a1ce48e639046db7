"""Exact rational coefficients.

All symbolic modules compute over arbitrary-precision rationals.  gmpy2.mpq is
used as the working type (it is several times faster than fractions.Fraction
on the row reductions that dominate runtime); fractions.Fraction is accepted
everywhere on input and used as a fallback if gmpy2 is ever unavailable.
"""

from fractions import Fraction

try:
    from gmpy2 import mpq as QQ

    HAVE_GMPY2 = True
except ImportError:  # pragma: no cover
    QQ = Fraction
    HAVE_GMPY2 = False

ZERO = QQ(0)
ONE = QQ(1)


def rat(x) -> "QQ":
    """Coerce ints, Fractions, mpqs and 'p/q' strings to the working type."""
    if isinstance(x, str):
        return QQ(x.replace("−", "-"))
    return QQ(x)


def rat_str(x) -> str:
    """Canonical 'p/q' (or integer) string, ASCII minus."""
    return str(QQ(x))


def to_fraction(x) -> Fraction:
    q = QQ(x)
    return Fraction(int(q.numerator), int(q.denominator))


def is_exact(x) -> bool:
    """True for the coefficient types that support exact zero tests."""
    return isinstance(x, (int, Fraction)) or type(x) is type(ZERO)
