"""Exact arithmetic in real quadratic fields and simplest quartic fields.

Elements are stored as rational coordinate vectors over the power basis
``1, beta, ..., beta^(n-1)`` of the field generator ``beta``.  For
``Q(sqrt(D))`` the generator is ``sqrt(D)`` when ``D != 1 (mod 4)`` and
``(1 + sqrt(D))/2`` otherwise, so the power basis is always an integral
basis.  For the simplest quartic field ``F_m`` the generator is the
largest root ``r_m`` of ``x^4 - m x^3 - 6 x^2 + m x + 1``.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import mpmath

from .exact import rational_det, solve

QUADRATIC = "quadratic"
SIMPLEST_QUARTIC = "simplest_quartic"

MIN_PRECISION_BITS = 64
_SQUAREFREE_LIMIT = 1 << 64


class FieldError(ValueError):
    """Invalid field parameter or incompatible operands."""


# ---------------------------------------------------------------------------
# integer helpers


def squarefree_and_odd_part(n: int) -> tuple[bool, int]:
    """Return ``(n is squarefree, odd part of n)`` by trial division."""
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    if n >= _SQUAREFREE_LIMIT:
        raise OverflowError(f"{n} exceeds the supported 64-bit range")
    return _square_factor(n) is None, _odd_part(n)


def _odd_part(n: int) -> int:
    while n % 2 == 0:
        n //= 2
    return n


def _square_factor(n: int) -> int | None:
    """Smallest prime ``p`` with ``p^2 | n``, or None when n is squarefree."""
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return p
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    return None


def v2(n: int) -> int:
    """2-adic valuation of a nonzero integer."""
    return (n & -n).bit_length() - 1


@dataclass(frozen=True)
class PellSolution:
    D: int
    x: int
    y: int

    def __post_init__(self):
        if self.x * self.x - self.D * self.y * self.y != -1:
            raise ValueError(f"({self.x}, {self.y}) does not solve x^2 - {self.D} y^2 = -1")


def negative_pell(D: int) -> PellSolution | None:
    """Fundamental solution of ``x^2 - D y^2 = -1``, or None if unsolvable.

    Uses the continued fraction of ``sqrt(D)``; the equation is solvable
    exactly when the period is odd, in which case the convergent just before
    the end of the first period is the fundamental solution.
    """
    if D <= 1:
        raise ValueError(f"D must exceed 1, got {D}")
    a0 = math.isqrt(D)
    if a0 * a0 == D:
        raise ValueError(f"D={D} is a perfect square")
    m, d, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    period = 0
    while True:
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        period += 1
        if a == 2 * a0:
            break
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    if period % 2 == 0:
        return None
    return PellSolution(D, p, q)


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class RealField:
    """A totally real field with a fixed power-basis generator.

    ``min_poly`` lists the monic minimal polynomial's coefficients from the
    constant term upward.  ``integral_basis`` holds power-basis coordinates
    of a Z-basis of the ring of integers.
    """

    kind: str
    parameter: int
    degree: int
    min_poly: tuple[int, ...]
    field_disc: int
    integral_basis: tuple[tuple[Fraction, ...], ...]
    index: int
    delta: int | None = None

    def __eq__(self, other):
        if not isinstance(other, RealField):
            return NotImplemented
        return (self.kind, self.parameter) == (other.kind, other.parameter)

    def __hash__(self):
        return hash((self.kind, self.parameter))

    def __repr__(self):
        if self.kind == QUADRATIC:
            return f"RealField(Q(sqrt({self.parameter})))"
        return f"RealField(F_{self.parameter})"

    def __reduce__(self):
        ctor = make_quadratic if self.kind == QUADRATIC else make_simplest_quartic
        return ctor, (self.parameter,)

    # construction of elements

    def element(self, coords: Iterable) -> "FieldElement":
        c = tuple(Fraction(v) for v in coords)
        if len(c) != self.degree:
            raise FieldError(f"expected {self.degree} coordinates, got {len(c)}")
        return FieldElement(self, c)

    def __call__(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field != self:
                raise FieldError("element belongs to a different field")
            return value
        return FieldElement(self, (Fraction(value),) + (Fraction(0),) * (self.degree - 1))

    def zero(self) -> "FieldElement":
        return self(0)

    def one(self) -> "FieldElement":
        return self(1)

    def gen(self) -> "FieldElement":
        """The power-basis generator ``beta``."""
        return self.element([0, 1] + [0] * (self.degree - 2))

    def sqrt_radicand(self) -> "FieldElement":
        """``sqrt(D)`` in ``Q(sqrt(D))`` (positive under the first embedding)."""
        if self.kind != QUADRATIC:
            raise FieldError("sqrt_radicand is only defined for quadratic fields")
        if self.parameter % 4 == 1:
            return self.element([-1, 2])
        return self.element([0, 1])

    def from_integral(self, coords: Sequence) -> "FieldElement":
        """Element with the given coordinates over ``integral_basis``."""
        out = [Fraction(0)] * self.degree
        for c, b in zip(coords, self.integral_basis):
            for k in range(self.degree):
                out[k] += Fraction(c) * b[k]
        return FieldElement(self, tuple(out))

    def integral_basis_elements(self) -> list["FieldElement"]:
        return [FieldElement(self, b) for b in self.integral_basis]

    # cached tables

    @cached_property
    def _reduction(self) -> tuple[tuple[Fraction, ...], ...]:
        # power-basis coordinates of beta^n, ..., beta^(2n-2)
        n = self.degree
        low = [Fraction(-c) for c in self.min_poly[:n]]
        table = [tuple(low)]
        cur = low
        for _ in range(n - 2):
            lead = cur[-1]
            cur = [Fraction(0)] + cur[:-1]
            cur = [cur[k] + lead * low[k] for k in range(n)]
            table.append(tuple(cur))
        return tuple(table)

    @cached_property
    def _power_traces(self) -> tuple[int, ...]:
        # Tr(beta^k), k < n, via Newton's identities
        n = self.degree
        coeff = self.min_poly
        p = [Fraction(n)]
        for k in range(1, n):
            s = Fraction(0)
            for i in range(1, k):
                s += coeff[n - i] * p[k - i]
            p.append(-s - k * coeff[n - k])
        return tuple(int(v) for v in p)

    @cached_property
    def _integral_inverse(self) -> tuple[tuple[Fraction, ...], ...]:
        n = self.degree
        cols = [list(b) for b in self.integral_basis]
        mat = [[cols[j][i] for j in range(n)] for i in range(n)]
        inv_cols = [solve(mat, [Fraction(int(i == k)) for i in range(n)]) for k in range(n)]
        return tuple(tuple(inv_cols[k][i] for k in range(n)) for i in range(n))

    def integral_coords(self, x: "FieldElement") -> tuple[Fraction, ...]:
        """Coordinates of ``x`` over ``integral_basis``."""
        inv = self._integral_inverse
        return tuple(sum((inv[i][k] * x.coords[k] for k in range(self.degree)), Fraction(0))
                     for i in range(self.degree))

    def in_ring_of_integers(self, x: "FieldElement") -> bool:
        return all(c.denominator == 1 for c in self.integral_coords(x))

    @cached_property
    def _real_roots_cache(self) -> dict:
        return {}

    def real_roots(self, precision_bits: int) -> tuple[list, object]:
        """Roots of ``min_poly`` in decreasing order plus a certified radius."""
        cache = self._real_roots_cache
        if precision_bits not in cache:
            cache[precision_bits] = _isolate_real_roots(self.min_poly, precision_bits)
        return cache[precision_bits]


def make_quadratic(D: int) -> RealField:
    """The real quadratic field ``Q(sqrt(D))`` for squarefree ``D > 1``."""
    D = int(D)
    if D <= 1:
        raise FieldError(f"D must be a squarefree integer > 1, got {D}")
    p = _square_factor(D)
    if p is not None:
        raise FieldError(f"D not squarefree: {p}^2 divides {D}")
    if D % 4 == 1:
        min_poly = ((1 - D) // 4, -1, 1)
        disc = D
    else:
        min_poly = (-D, 0, 1)
        disc = 4 * D
    basis = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    return RealField(QUADRATIC, D, 2, min_poly, disc, basis, 1)


def _quartic_basis(m: int) -> tuple[tuple[Fraction, ...], ...]:
    # m = 2, 4 are monogenic, but not via r_m: (1 + r^2)/2 is integral there too
    F = Fraction
    k = v2(m)
    if k == 0:
        rows = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (F(1, 2), 0, 0, F(1, 2))]
    elif k == 1:
        rows = [(1, 0, 0, 0), (0, 1, 0, 0), (F(1, 2), 0, F(1, 2), 0), (0, F(1, 2), 0, F(1, 2))]
    elif k == 2:
        rows = [(1, 0, 0, 0), (0, 1, 0, 0), (F(1, 2), 0, F(1, 2), 0),
                (F(1, 4), F(1, 4), F(1, 4), F(1, 4))]
    else:
        rows = [(1, 0, 0, 0), (0, 1, 0, 0), (F(1, 4), F(1, 2), F(-1, 4), 0),
                (F(1, 4), F(1, 4), F(1, 4), F(1, 4))]
    return tuple(tuple(F(v) for v in r) for r in rows)


def make_simplest_quartic(m: int) -> RealField:
    """The simplest quartic field ``F_m`` defined by ``x^4 - m x^3 - 6 x^2 + m x + 1``."""
    m = int(m)
    if m < 1:
        raise FieldError(f"m must be a positive integer, got {m}")
    if m == 3:
        raise FieldError("m = 3 is excluded from the simplest quartic family")
    delta = m * m + 16
    odd = _odd_part(delta)
    p = _square_factor(odd)
    if p is not None:
        raise FieldError(f"odd part {odd} of m^2+16 = {delta} not squarefree: {p}^2 divides it")
    basis = _quartic_basis(m)
    det = rational_det([list(b) for b in basis])
    index = Fraction(1) / abs(det)
    if index.denominator != 1:
        raise FieldError(f"integral basis for m={m} has non-integral index {index}")
    index = int(index)
    disc_f = 4 * delta ** 3
    if disc_f % (index * index):
        raise FieldError(f"index {index} incompatible with disc(f_m) = {disc_f}")
    field = RealField(SIMPLEST_QUARTIC, m, 4, (1, m, -6, -m, 1), disc_f // (index * index),
                      basis, index, delta)
    for b in field.integral_basis_elements():
        if not is_algebraic_integer(b):
            raise FieldError(f"basis element {b} of F_{m} is not an algebraic integer")
    return field


# ---------------------------------------------------------------------------
# elements


class FieldElement:
    """An element of a :class:`RealField`, exact rational coordinates."""

    __slots__ = ("field", "coords")

    def __init__(self, field: RealField, coords: tuple[Fraction, ...]):
        self.field = field
        self.coords = coords

    def _coerce(self, other) -> "FieldElement | None":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldError(f"field mismatch: {self.field!r} vs {other.field!r}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.field, tuple(a - b for a, b in zip(self.coords, o.coords)))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, tuple(a * other for a in self.coords))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = self.field.degree
        prod = [Fraction(0)] * (2 * n - 1)
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(o.coords):
                    if b:
                        prod[i + j] += a * b
        out = prod[:n]
        for k, row in enumerate(self.field._reduction):
            c = prod[n + k]
            if c:
                for i in range(n):
                    out[i] += c * row[i]
        return FieldElement(self.field, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        mat = multiplication_matrix(self)
        n = self.field.degree
        return FieldElement(self.field, tuple(solve(mat, [Fraction(int(i == 0)) for i in range(n)])))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return FieldElement(self.field, tuple(a / other for a in self.coords))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.coords[0] == other and not any(self.coords[1:])
        if isinstance(other, FieldElement):
            return self.field == other.field and self.coords == other.coords
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coords):
            if c:
                mono = "" if k == 0 else ("b" if k == 1 else f"b^{k}")
                terms.append(f"{c}" if not mono else f"({c})*{mono}")
        return " + ".join(terms) if terms else "0"


def field_arith(op: str, a: FieldElement, b: FieldElement | None = None) -> FieldElement:
    """Dispatch ``add``, ``sub``, ``mul``, ``inv``, ``neg`` by name."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "neg":
        return -a
    raise ValueError(f"unknown field operation {op!r}")


def multiplication_matrix(x: FieldElement) -> list[list[Fraction]]:
    """Matrix of multiplication by ``x`` on the power basis (columns = x*beta^j)."""
    f = x.field
    n = f.degree
    cols = []
    cur = x
    beta = f.gen()
    for _ in range(n):
        cols.append(cur.coords)
        cur = cur * beta
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def trace(x: FieldElement) -> Fraction:
    pt = x.field._power_traces
    return sum((c * t for c, t in zip(x.coords, pt)), Fraction(0))


def norm(x: FieldElement) -> Fraction:
    return rational_det(multiplication_matrix(x))


def char_poly(x: FieldElement) -> list[Fraction]:
    """Characteristic polynomial of ``x``, constant term first, monic."""
    mat = multiplication_matrix(x)
    n = len(mat)
    # Faddeev-LeVerrier
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    m_k = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        m_k = [[sum((mat[i][l] * m_k[l][j] for l in range(n)), Fraction(0))
                + (coeffs[n - k + 1] if i == j else 0) for j in range(n)] for i in range(n)]
        am = [[sum((mat[i][l] * m_k[l][j] for l in range(n)), Fraction(0)) for j in range(n)]
              for i in range(n)]
        coeffs[n - k] = -sum((am[i][i] for i in range(n)), Fraction(0)) / k
    return coeffs


def is_algebraic_integer(x: FieldElement) -> bool:
    return all(c.denominator == 1 for c in char_poly(x))


def different_generator(field: RealField) -> FieldElement:
    """``f'(beta)`` for the minimal polynomial ``f`` of the power-basis generator."""
    n = field.degree
    beta = field.gen()
    out = field.zero()
    for k in range(1, n + 1):
        out = out + beta ** (k - 1) * (k * field.min_poly[k])
    return out


def sigma(x: FieldElement) -> FieldElement:
    """Generator of the cyclic Galois group of ``F_m``: ``r -> (r-1)/(r+1)``.

    For quadratic fields this is the nontrivial conjugation.
    """
    f = x.field
    beta = f.gen()
    if f.kind == QUADRATIC:
        image = -beta + (-f.min_poly[1])  # other root of x^2 + c1 x + c0
    else:
        image = (beta - 1) / (beta + 1)
    out = f.zero()
    power = f.one()
    for c in x.coords:
        if c:
            out = out + power * c
        power = power * image
    return out


# ---------------------------------------------------------------------------
# embeddings


@dataclass(frozen=True)
class EmbeddingVector:
    """Real embeddings ``sigma_1(x) > ...`` ordered like the roots of ``min_poly``.

    Every true value lies within ``radius`` of the stored approximation.
    """

    values: tuple
    radius: object
    precision_bits: int

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


@contextlib.contextmanager
def _iv_precision(bits: int):
    """Interval-context counterpart of ``mpmath.workprec``."""
    saved = mpmath.iv.prec
    mpmath.iv.prec = bits
    try:
        yield
    finally:
        mpmath.iv.prec = saved


def _poly_eval(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _isolate_real_roots(min_poly: tuple[int, ...], precision_bits: int):
    n = len(min_poly) - 1
    work = precision_bits + 32
    with mpmath.workprec(work):
        roots = mpmath.polyroots(list(reversed(min_poly)), maxsteps=200, extraprec=2 * work)
        roots = sorted((mpmath.re(r) for r in roots), reverse=True)
        # Newton polish, then certify: some root of f lies within n|f(x)/f'(x)| of x
        dpoly = [k * min_poly[k] for k in range(1, n + 1)]
        polished = []
        for r in roots:
            for _ in range(4):
                r = r - _poly_eval(min_poly, r) / _poly_eval(dpoly, r)
            polished.append(r)
    with mpmath.workprec(work), _iv_precision(work):
        radius = mpmath.mpf(0)
        for r in polished:
            ir = mpmath.iv.mpf(r)
            fv = _poly_eval([mpmath.iv.mpf(c) for c in min_poly], ir)
            dv = _poly_eval([mpmath.iv.mpf(c) for c in dpoly], ir)
            bound = n * abs(fv) / abs(dv)
            radius = max(radius, mpmath.mpf(bound.b))
        radius = max(radius, mpmath.ldexp(1, -work))
        seps = [polished[i] - polished[i + 1] for i in range(n - 1)]
        if seps and min(seps) <= 2 * radius:
            raise ArithmeticError("root isolation failed; increase precision")
    return polished, radius


def embeddings(x: FieldElement, precision_bits: int = 128) -> EmbeddingVector:
    """All real embeddings of ``x`` with a certified common error radius."""
    if precision_bits < MIN_PRECISION_BITS:
        raise ValueError(f"precision_bits must be >= {MIN_PRECISION_BITS}, got {precision_bits}")
    roots, rad = x.field.real_roots(precision_bits)
    work = precision_bits + 32
    with mpmath.workprec(work), _iv_precision(work):
        coeffs = [mpmath.iv.mpf(c.numerator) / c.denominator for c in x.coords]
        values = []
        radius = mpmath.mpf(0)
        for r in roots:
            box = mpmath.iv.mpf([r, r]) + mpmath.iv.mpf([-rad, rad])
            v = _poly_eval(coeffs, box)
            lo, hi = mpmath.mpf(v.a), mpmath.mpf(v.b)
            mid = (lo + hi) / 2
            values.append(mid)
            radius = max(radius, (hi - lo) / 2)
        radius = max(radius, mpmath.ldexp(1, -precision_bits))
    return EmbeddingVector(tuple(values), radius, precision_bits)


def is_totally_positive(x: FieldElement, start_bits: int = 128, max_bits: int = 4096) -> bool:
    """True iff every real embedding of ``x`` is positive."""
    if x.is_zero():
        raise ValueError("total positivity is undefined for 0")
    f = x.field
    if f.kind == QUADRATIC:
        a, b = quadratic_parts(x)
        return a > 0 and a * a > b * b * f.parameter
    bits = start_bits
    while bits <= max_bits:
        emb = embeddings(x, bits)
        if all(abs(v) > emb.radius for v in emb.values):
            return all(v > 0 for v in emb.values)
        bits *= 2
    raise ArithmeticError(f"could not resolve embedding signs of {x} within {max_bits} bits")


def quadratic_parts(x: FieldElement) -> tuple[Fraction, Fraction]:
    """``(a, b)`` with ``x = a + b sqrt(D)``."""
    f = x.field
    if f.kind != QUADRATIC:
        raise FieldError("quadratic_parts needs a quadratic field")
    c0, c1 = x.coords
    if f.parameter % 4 == 1:
        return c0 + c1 / 2, c1 / 2
    return c0, c1
