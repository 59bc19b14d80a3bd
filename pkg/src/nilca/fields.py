"""Exact scalar arithmetic over F_p, F_{p^m} and Q.

A :class:`Field` describes the coefficient field and performs arithmetic on
*raw* canonical values:

* ``Q``        -- :class:`fractions.Fraction` (gcd-reduced, denominator > 0),
* ``F_p``      -- ``int`` in ``0..p-1``,
* ``F_{p^m}``  -- ``tuple`` of ``m`` ints, coefficients of the residue
  polynomial ``c_0 + c_1 t + ... + c_{m-1} t^{m-1}`` modulo a stored monic
  irreducible of degree ``m``.

The raw representation keeps the linear-algebra kernels fast; :class:`Scalar`
wraps a raw value together with its field for API boundaries (parsing, the
CLI, operator overloading).  The modulus is part of the field's identity, so
two copies of F_4 built over different irreducibles are distinct fields.

Text syntax (used by ``.lla`` files): an integer for ``m = 1``, ``a/b`` for
rationals, and a coefficient list ``[c0,c1,...]`` for ``m > 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

from .errors import EmbeddingError, FieldMismatchError, FormatError

Raw = Union[int, "tuple[int, ...]", Fraction]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


# ---------------------------------------------------------------------------
# dense polynomial helpers over F_p (coefficient lists, little-endian)


def poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return poly_trim(out)


def poly_divmod(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    inv_lead = pow(b[-1], -1, p)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        coeff = a[-1] * inv_lead % p
        q[shift] = coeff
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - coeff * bi) % p
        poly_trim(a)
    return poly_trim(q), a


def poly_mod(a: list[int], b: list[int], p: int) -> list[int]:
    return poly_divmod(a, b, p)[1]


def poly_inv_mod(a: list[int], modulus: list[int], p: int) -> list[int]:
    """Inverse of a modulo `modulus` in F_p[x], by extended Euclid."""
    if not a:
        raise ZeroDivisionError("inverse of zero polynomial")
    r0, r1 = list(modulus), list(a)
    s0, s1 = [], [1]
    while r1:
        q, r = poly_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, poly_trim([(x - y) % p for x, y in itertools.zip_longest(s0, poly_mul(q, s1, p), fillvalue=0)])
    # r0 = gcd, a unit since modulus is irreducible and a != 0
    if len(r0) != 1:
        raise ZeroDivisionError("element not invertible (modulus not irreducible?)")
    c = pow(r0[0], -1, p)
    return poly_trim([x * c % p for x in s0])


def poly_is_irreducible(mod: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    deg = len(mod) - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    for d in range(1, deg // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            divisor = list(tail) + [1]
            if not poly_mod(mod, divisor, p):
                return False
    return True


def default_modulus(p: int, m: int) -> tuple[int, ...]:
    """First monic irreducible of degree m over F_p in counting order."""
    for tail in itertools.product(range(p), repeat=m):
        cand = list(reversed(tail)) + [1]  # count low coefficients fastest
        if poly_is_irreducible(cand, p):
            return tuple(cand)
    raise AssertionError("no irreducible polynomial found")  # unreachable


# ---------------------------------------------------------------------------


class Field:
    """An exact field F_p, F_{p^m} or Q operating on raw values."""

    __slots__ = ("p", "m", "modulus", "_red", "_hash")

    def __init__(self, p: int, m: int = 1, modulus: tuple[int, ...] | None = None):
        if p == 0:
            if m != 1 or modulus is not None:
                raise ValueError("the rationals take p=0, m=1 and no modulus")
        else:
            if not is_prime(p):
                raise ValueError(f"characteristic {p} is not prime")
            if m < 1:
                raise ValueError("extension degree must be >= 1")
            if m == 1:
                if modulus is not None:
                    raise ValueError("prime fields store no modulus")
            else:
                if modulus is None:
                    modulus = default_modulus(p, m)
                modulus = tuple(c % p for c in modulus)
                if len(modulus) != m + 1 or modulus[-1] != 1:
                    raise ValueError("modulus must be monic of degree m")
                if not poly_is_irreducible(list(modulus), p):
                    raise ValueError("modulus is reducible over F_p")
        self.p = p
        self.m = m
        self.modulus = modulus
        # reduction table: x^(m+k) mod modulus for k = 0..m-2
        if p and m > 1:
            red = []
            cur = [(-c) % p for c in modulus[:-1]]  # x^m
            for _ in range(m - 1):
                red.append(tuple(cur))
                cur = [0] + cur  # multiply by x
                if len(cur) > m:
                    lead = cur.pop()
                    if lead:
                        cur = [(ci + lead * ri) % p for ci, ri in zip(cur, red[0])]
            self._red = tuple(red)
        else:
            self._red = ()
        self._hash = hash((p, m, modulus))

    # -- identity ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Field)
            and self.p == other.p
            and self.m == other.m
            and self.modulus == other.modulus
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if self.p == 0:
            return "Q"
        if self.m == 1:
            return f"F{self.p}"
        return f"F{self.p}^{self.m}(mod={list(self.modulus)})"

    @property
    def is_rational(self) -> bool:
        return self.p == 0

    @property
    def order(self) -> int:
        if self.p == 0:
            raise ValueError("Q is infinite")
        return self.p**self.m

    # -- constants and conversions ------------------------------------------

    @property
    def zero(self) -> Raw:
        if self.p == 0:
            return Fraction(0)
        if self.m == 1:
            return 0
        return (0,) * self.m

    @property
    def one(self) -> Raw:
        if self.p == 0:
            return Fraction(1)
        if self.m == 1:
            return 1
        return (1,) + (0,) * (self.m - 1)

    @property
    def gen(self) -> Raw:
        """Residue class of the indeterminate (m > 1 only)."""
        if self.p == 0 or self.m == 1:
            raise ValueError("gen is defined for proper extensions only")
        return (0, 1) + (0,) * (self.m - 2)

    def from_int(self, n: int) -> Raw:
        if self.p == 0:
            return Fraction(n)
        if self.m == 1:
            return n % self.p
        return (n % self.p,) + (0,) * (self.m - 1)

    def element_from_index(self, i: int) -> Raw:
        """i-th element in the canonical counting order (finite fields)."""
        if self.p == 0:
            raise ValueError("Q has no counting order")
        if self.m == 1:
            return i % self.p
        digits = []
        for _ in range(self.m):
            digits.append(i % self.p)
            i //= self.p
        return tuple(digits)

    def elements(self) -> Iterator[Raw]:
        for i in range(self.order):
            yield self.element_from_index(i)

    def random(self, rng) -> Raw:
        if self.p == 0:
            return Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        return self.element_from_index(rng.randrange(self.order))

    def random_nonzero(self, rng) -> Raw:
        while True:
            a = self.random(rng)
            if not self.is_zero(a):
                return a

    # -- arithmetic on raw values --------------------------------------------

    def is_zero(self, a: Raw) -> bool:
        if self.p == 0:
            return a == 0
        if self.m == 1:
            return a == 0
        return not any(a)

    def add(self, a: Raw, b: Raw) -> Raw:
        if self.p == 0:
            return a + b
        if self.m == 1:
            return (a + b) % self.p
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def sub(self, a: Raw, b: Raw) -> Raw:
        if self.p == 0:
            return a - b
        if self.m == 1:
            return (a - b) % self.p
        p = self.p
        return tuple((x - y) % p for x, y in zip(a, b))

    def neg(self, a: Raw) -> Raw:
        if self.p == 0:
            return -a
        if self.m == 1:
            return (-a) % self.p
        p = self.p
        return tuple((-x) % p for x in a)

    def mul(self, a: Raw, b: Raw) -> Raw:
        if self.p == 0:
            return a * b
        if self.m == 1:
            return (a * b) % self.p
        p, m = self.p, self.m
        out = [0] * (2 * m - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] = (out[i + j] + ai * bj) % p
        # fold x^(m+k) terms back using the reduction table
        for k in range(m - 2, -1, -1):
            hi = out[m + k]
            if hi:
                red = self._red[k]
                for idx in range(m):
                    out[idx] = (out[idx] + hi * red[idx]) % p
        return tuple(out[:m])

    def inv(self, a: Raw) -> Raw:
        if self.is_zero(a):
            raise ZeroDivisionError("division by zero")
        if self.p == 0:
            return 1 / a
        if self.m == 1:
            return pow(a, -1, self.p)
        res = poly_inv_mod(poly_trim(list(a)), list(self.modulus), self.p)
        return tuple(res) + (0,) * (self.m - len(res))

    def div(self, a: Raw, b: Raw) -> Raw:
        return self.mul(a, self.inv(b))

    def pow(self, a: Raw, n: int) -> Raw:
        if n < 0:
            a, n = self.inv(a), -n
        result = self.one
        while n:
            if n & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            n >>= 1
        return result

    def frobenius(self, a: Raw, k: int = 1) -> Raw:
        """a^(p^k), the k-th Frobenius power (finite fields)."""
        if self.p == 0:
            return a
        return self.pow(a, self.p ** (k % self.m))

    # -- text syntax -----------------------------------------------------------

    def format(self, a: Raw) -> str:
        if self.p == 0:
            return str(a) if a.denominator != 1 else str(a.numerator)
        if self.m == 1:
            return str(a)
        return "[" + ",".join(str(c) for c in a) + "]"

    def parse(self, text: str) -> Raw:
        text = text.strip()
        try:
            if self.p == 0:
                return Fraction(text)
            if self.m == 1:
                return int(text) % self.p
            if not (text.startswith("[") and text.endswith("]")):
                # allow plain integers (prime-subfield values) in extensions
                return self.from_int(int(text))
            coeffs = [int(c) % self.p for c in text[1:-1].split(",") if c.strip() != ""]
        except ValueError as exc:
            raise FormatError(f"bad scalar {text!r} for {self}") from exc
        if len(coeffs) > self.m:
            raise FormatError(f"scalar {text!r} has too many coefficients for {self}")
        return tuple(coeffs) + (0,) * (self.m - len(coeffs))

    def scalar(self, value) -> "Scalar":
        if isinstance(value, Scalar):
            if value.field != self:
                raise FieldMismatchError(f"scalar belongs to {value.field}, not {self}")
            return value
        if isinstance(value, str):
            return Scalar(self, self.parse(value))
        if isinstance(value, int):
            return Scalar(self, self.from_int(value))
        return Scalar(self, self.canonical(value))

    def canonical(self, raw: Raw) -> Raw:
        """Validate and canonicalize a raw value."""
        if self.p == 0:
            if isinstance(raw, int):
                return Fraction(raw)
            if isinstance(raw, Fraction):
                return raw
            raise TypeError(f"bad rational value {raw!r}")
        if self.m == 1:
            if not isinstance(raw, int):
                raise TypeError(f"bad F_{self.p} value {raw!r}")
            return raw % self.p
        if not (isinstance(raw, tuple) and len(raw) == self.m):
            raise TypeError(f"bad {self} value {raw!r}")
        return tuple(c % self.p for c in raw)


# Shared instances for the common cases.
QQ = Field(0)


def GF(p: int, m: int = 1, modulus: tuple[int, ...] | None = None) -> Field:
    return Field(p, m, modulus)


@dataclass(frozen=True)
class Scalar:
    """A raw field value paired with its field; supports operators."""

    field: Field
    value: Raw

    def _coerce(self, other) -> Raw:
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise FieldMismatchError(
                    f"cannot combine scalars over {self.field} and {other.field}"
                )
            return other.value
        if isinstance(other, int):
            return self.field.from_int(other)
        raise TypeError(f"cannot combine Scalar with {type(other).__name__}")

    def __add__(self, other):
        return Scalar(self.field, self.field.add(self.value, self._coerce(other)))

    def __sub__(self, other):
        return Scalar(self.field, self.field.sub(self.value, self._coerce(other)))

    def __mul__(self, other):
        return Scalar(self.field, self.field.mul(self.value, self._coerce(other)))

    def __truediv__(self, other):
        return Scalar(self.field, self.field.div(self.value, self._coerce(other)))

    def __neg__(self):
        return Scalar(self.field, self.field.neg(self.value))

    def inverse(self) -> "Scalar":
        return Scalar(self.field, self.field.inv(self.value))

    def is_zero(self) -> bool:
        return self.field.is_zero(self.value)

    def __str__(self) -> str:
        return self.field.format(self.value)

    __radd__ = __add__
    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# embeddings between finite fields (and the identity on Q)


@dataclass(frozen=True)
class FieldEmbedding:
    """A field homomorphism small -> big.

    For F_{p^m} -> F_{p^m'} with m | m' the map is determined by the image of
    the small field's generator, which must be a root of the small modulus in
    the big field.  The identity on Q and the prime-subfield inclusion are the
    degenerate cases.
    """

    small: Field
    big: Field
    gen_image: Raw | None = None

    def __post_init__(self):
        s, b = self.small, self.big
        if s.is_rational:
            if not b.is_rational:
                raise EmbeddingError("Q embeds only into Q here")
            return
        if b.is_rational or s.p != b.p:
            raise EmbeddingError(f"no embedding {s} -> {b}: characteristic mismatch")
        if b.m % s.m != 0:
            raise EmbeddingError(f"no embedding {s} -> {b}: {s.m} does not divide {b.m}")
        if s.m == 1:
            if self.gen_image is not None:
                raise EmbeddingError("prime-subfield inclusion takes no generator image")
            return
        if self.gen_image is None:
            raise EmbeddingError("extension embedding needs a generator image")
        # checked on the generator: the image must satisfy the small modulus
        img = b.canonical(self.gen_image)
        acc = b.zero
        for c in reversed(self.small.modulus):
            acc = b.add(b.mul(acc, img), b.from_int(c))
        if not b.is_zero(acc):
            raise EmbeddingError("generator image is not a root of the small modulus")

    def apply(self, a: Raw) -> Raw:
        s, b = self.small, self.big
        if s.is_rational:
            return a
        if s.m == 1:
            return b.from_int(a)
        acc = b.zero
        for c in reversed(a):
            acc = b.add(b.mul(acc, self.gen_image), b.from_int(c))
        return acc

    def compose(self, outer: "FieldEmbedding") -> "FieldEmbedding":
        """outer o self : small -> outer.big."""
        if self.big != outer.small:
            raise EmbeddingError("embeddings do not compose")
        if self.small.is_rational or self.small.m == 1:
            return FieldEmbedding(self.small, outer.big)
        return FieldEmbedding(self.small, outer.big, outer.apply(self.gen_image))


def find_embedding(small: Field, big: Field) -> FieldEmbedding:
    """Deterministic embedding: least root of the small modulus in big."""
    if small.is_rational or small.m == 1:
        return FieldEmbedding(small, big)
    if big.is_rational or small.p != big.p or big.m % small.m != 0:
        raise EmbeddingError(f"no embedding {small} -> {big}")
    for i in range(big.order):
        cand = big.element_from_index(i)
        acc = big.zero
        for c in reversed(small.modulus):
            acc = big.add(big.mul(acc, cand), big.from_int(c))
        if big.is_zero(acc):
            return FieldEmbedding(small, big, cand)
    raise EmbeddingError(f"no root of the modulus of {small} in {big}")  # unreachable
