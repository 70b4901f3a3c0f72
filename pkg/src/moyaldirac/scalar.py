"""Exact Gaussian-rational scalars (a + b*i with a, b rational)."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["Scalar", "as_scalar"]


class Scalar:
    """Immutable Gaussian rational.

    Both parts are :class:`fractions.Fraction`, so they are always kept in
    lowest terms with a positive denominator.
    """

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re: int | Fraction = 0, im: int | Fraction = 0) -> None:
        self.re = Fraction(re)
        self.im = Fraction(im)
        self._hash = hash((self.re, self.im))

    # construction helpers
    @classmethod
    def i(cls) -> Scalar:
        return cls(0, 1)

    @classmethod
    def parse(cls, text: str) -> Scalar:
        """Parse ``"3/2"``, ``"-1"``, ``"i"``, ``"2/3*i"`` or ``"(1/2+3*i)"``."""
        s = text.strip().replace(" ", "")
        if s.startswith("(") and s.endswith(")"):
            s = s[1:-1]
        if not s.endswith("i"):
            return cls(Fraction(s))
        body = s[:-1].rstrip("*")
        # split a trailing imaginary part off a leading real part
        cut = max(body.rfind("+"), body.rfind("-"))
        if cut > 0:
            re, im = body[:cut], body[cut:]
        else:
            re, im = "0", body
        if im in ("", "+"):
            im = "1"
        elif im == "-":
            im = "-1"
        return cls(Fraction(re), Fraction(im))

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def conjugate(self) -> Scalar:
        return Scalar(self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Rational)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        return self._hash

    def __neg__(self) -> Scalar:
        return Scalar(-self.re, -self.im)

    def __add__(self, other: Scalar | int | Fraction) -> Scalar:
        o = as_scalar(other)
        return Scalar(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: Scalar | int | Fraction) -> Scalar:
        o = as_scalar(other)
        return Scalar(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: Scalar | int | Fraction) -> Scalar:
        return as_scalar(other) - self

    def __mul__(self, other: Scalar | int | Fraction) -> Scalar:
        o = as_scalar(other)
        if not self.im and not o.im:
            return Scalar(self.re * o.re)
        return Scalar(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar | int | Fraction) -> Scalar:
        o = as_scalar(other)
        if not o:
            raise ZeroDivisionError("division by zero scalar")
        if not o.im:
            return Scalar(self.re / o.re, self.im / o.re)
        norm = o.re * o.re + o.im * o.im
        num = self * o.conjugate()
        return Scalar(num.re / norm, num.im / norm)

    def __rtruediv__(self, other: Scalar | int | Fraction) -> Scalar:
        return as_scalar(other) / self

    def __pow__(self, k: int) -> Scalar:
        if k < 0:
            return Scalar(1) / (self ** (-k))
        out = Scalar(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        return f"Scalar({self})"

    def __str__(self) -> str:
        """Canonical text: ``3/2``, ``-i``, ``2*i``, ``(1/2+3*i)``."""
        if not self.im:
            return str(self.re)
        if not self.re:
            return _imag_text(self.im)
        sign = "-" if self.im < 0 else "+"
        return f"({self.re}{sign}{_imag_text(abs(self.im))})"


def _imag_text(im: Fraction) -> str:
    if im == 1:
        return "i"
    if im == -1:
        return "-i"
    return f"{im}*i"


def as_scalar(x: Scalar | int | Fraction) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Rational)):
        return Scalar(Fraction(x))
    if isinstance(x, complex):
        raise TypeError("floating complex values are not exact; build a Scalar explicitly")
    raise TypeError(f"cannot convert {type(x).__name__} to Scalar")
