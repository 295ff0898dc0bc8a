"""Arithmetic in ``B = (-1, -1 / F)`` and explicit maximal orders.

Discriminant ideals are tracked only through their absolute norms: every
discriminant that occurs for the supported fields is ``Z_F`` or ``2 Z_F``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import field_det, solve
from .field_core import (
    QUADRATIC,
    SIMPLEST_QUARTIC,
    FieldElement,
    RealField,
    norm,
    v2,
)


class OrderError(ValueError):
    """Raised for invalid order bases or unsupported maximal-order cases."""


class QuaternionElement:
    """``x + y i + z j + t k`` with ``i^2 = j^2 = -1`` and ``ij = -ji = k``."""

    __slots__ = ("field", "coords")

    def __init__(self, field: RealField, coords: Sequence):
        if len(coords) != 4:
            raise ValueError("a quaternion needs four coordinates")
        self.field = field
        self.coords = tuple(field(c) for c in coords)

    @classmethod
    def basis_unit(cls, field: RealField, which: str) -> "QuaternionElement":
        pos = "1ijk".index(which)
        return cls(field, [int(k == pos) for k in range(4)])

    def _check(self, other: "QuaternionElement"):
        if other.field != self.field:
            raise ValueError(f"field mismatch: {self.field!r} vs {other.field!r}")

    def __add__(self, other):
        if not isinstance(other, QuaternionElement):
            other = QuaternionElement(self.field, [other, 0, 0, 0])
        self._check(other)
        return QuaternionElement(self.field, [a + b for a, b in zip(self.coords, other.coords)])

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, QuaternionElement):
            other = QuaternionElement(self.field, [other, 0, 0, 0])
        self._check(other)
        return QuaternionElement(self.field, [a - b for a, b in zip(self.coords, other.coords)])

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return QuaternionElement(self.field, [-a for a in self.coords])

    def __mul__(self, other):
        if not isinstance(other, QuaternionElement):
            # scalar from F or Q
            return QuaternionElement(self.field, [a * other for a in self.coords])
        self._check(other)
        return quat_mul(self, other)

    def __rmul__(self, other):
        return QuaternionElement(self.field, [other * a for a in self.coords])

    def __truediv__(self, other):
        if isinstance(other, QuaternionElement):
            raise TypeError("divide by a quaternion via multiplication with its inverse")
        return QuaternionElement(self.field, [a / other for a in self.coords])

    def __eq__(self, other):
        if not isinstance(other, QuaternionElement):
            return NotImplemented
        return self.field == other.field and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        x, y, z, t = self.coords
        return f"Quat({x!r}; {y!r}; {z!r}; {t!r})"


def quat_mul(a: QuaternionElement, b: QuaternionElement) -> QuaternionElement:
    """Hamilton product in ``(-1, -1 / F)``."""
    if a.field != b.field:
        raise ValueError(f"field mismatch: {a.field!r} vs {b.field!r}")
    x1, y1, z1, t1 = a.coords
    x2, y2, z2, t2 = b.coords
    return QuaternionElement(a.field, [
        x1 * x2 - y1 * y2 - z1 * z2 - t1 * t2,
        x1 * y2 + y1 * x2 + z1 * t2 - t1 * z2,
        x1 * z2 - y1 * t2 + z1 * x2 + t1 * y2,
        x1 * t2 + y1 * z2 - z1 * y2 + t1 * x2,
    ])


def conj(q: QuaternionElement) -> QuaternionElement:
    x, y, z, t = q.coords
    return QuaternionElement(q.field, [x, -y, -z, -t])


def reduced_trace(q: QuaternionElement) -> FieldElement:
    return q.coords[0] * 2


def reduced_norm(q: QuaternionElement) -> FieldElement:
    x, y, z, t = q.coords
    return x * x + y * y + z * z + t * t


def trace_pairing(a: QuaternionElement, b: QuaternionElement) -> FieldElement:
    """``Tr_B(a * conj(b))``, computed without forming the product."""
    return sum((p * q for p, q in zip(a.coords, b.coords)), a.field.zero()) * 2


@dataclass(frozen=True)
class IdealNormDescriptor:
    """An ideal of ``Z_F`` recorded by its absolute norm."""

    value: int

    def __post_init__(self):
        if self.value < 1:
            raise ValueError(f"ideal norm must be positive, got {self.value}")

    def label(self, degree: int) -> str:
        if self.value == 1:
            return "Z_F"
        if self.value == 2 ** degree:
            return "2Z_F"
        return f"ideal of norm {self.value}"


@dataclass(frozen=True)
class QuaternionOrder:
    field: RealField
    generators: tuple[QuaternionElement, ...]
    provenance: str = "user"


def algebra_discriminant(field: RealField | int, n2: int | None = None) -> IdealNormDescriptor:
    """Norm of the reduced discriminant of ``(-1, -1 / F)``.

    ``field`` may also be a bare degree for fields outside the supported
    families; when the degree is neither odd nor a power of two the local
    degree ``n2`` above 2 must be supplied.
    """
    if isinstance(field, RealField):
        n = field.degree
        if field.kind == QUADRATIC:
            return IdealNormDescriptor(2 ** n if field.field_disc % 8 == 1 else 1)
    else:
        n = int(field)
        if n == 2:
            raise ValueError("degree-2 fields need the discriminant: pass a RealField")
    if n < 1:
        raise ValueError(f"invalid degree {n}")
    if n & (n - 1) == 0:
        return IdealNormDescriptor(1)
    if n % 2 == 1:
        return IdealNormDescriptor(2 ** n)
    if n2 is None:
        raise ValueError(f"degree {n} is neither odd nor a power of two: "
                         "case (d) needs local degree n2 of a prime above 2")
    return IdealNormDescriptor(2 ** n if n2 % 2 else 1)


def _coordinate_matrix(basis: Sequence[QuaternionElement]):
    # columns = basis elements
    return [[basis[c].coords[r] for c in range(4)] for r in range(4)]


def _express(basis: Sequence[QuaternionElement], q: QuaternionElement) -> list[FieldElement]:
    return solve(_coordinate_matrix(basis), list(q.coords))


def is_order(basis: Sequence[QuaternionElement]) -> bool:
    """Check that the ``Z_F``-span of ``basis`` is an order.

    Raises :class:`OrderError` if the four elements are dependent over F.
    """
    if len(basis) != 4:
        raise OrderError("an order basis has exactly four elements")
    field = basis[0].field
    if field_det(_coordinate_matrix(basis)).is_zero():
        raise OrderError("order generators are linearly dependent over F")
    ok = field.in_ring_of_integers
    for q in basis:
        if not (ok(reduced_trace(q)) and ok(reduced_norm(q))):
            return False
    one = QuaternionElement(field, [1, 0, 0, 0])
    if not all(ok(c) for c in _express(basis, one)):
        return False
    for a in basis:
        for b in basis:
            if not all(ok(c) for c in _express(basis, a * b)):
                return False
    return True


def discriminant_matrix(O: QuaternionOrder) -> list[list[FieldElement]]:
    g = O.generators
    return [[reduced_trace(a * b) for b in g] for a in g]


def order_disc_norm(O: QuaternionOrder) -> IdealNormDescriptor:
    """Absolute norm of the reduced discriminant of ``O``."""
    d = field_det(discriminant_matrix(O))
    nd = abs(norm(d))
    if nd.denominator != 1:
        raise OrderError(f"discriminant norm {nd} is not an integer; basis is not an order")
    root = math.isqrt(nd.numerator)
    if root * root != nd.numerator:
        raise OrderError(f"|Nm(det)| = {nd} is not a square; invalid order basis")
    return IdealNormDescriptor(root)


def is_maximal(O: QuaternionOrder) -> bool:
    return order_disc_norm(O) == algebra_discriminant(O.field)


def order_generators(field: RealField) -> tuple[list[QuaternionElement], str]:
    """Explicit generators of a maximal order, with a tag naming the case."""
    Q = lambda *c: QuaternionElement(field, c)  # noqa: E731
    half = Fraction(1, 2)
    if field.kind == QUADRATIC:
        D = field.parameter
        rt = field.sqrt_radicand()
        if D == 2:
            gens = [Q(1, 0, 0, 0), Q(rt / 2, rt / 2, 0, 0), Q(rt / 2, 0, rt / 2, 0),
                    Q(half, half, half, half)]
            return gens, "quadratic D=2"
        if D % 4 == 3:
            gens = [Q(1, 0, 0, 0), Q(0, 1, 0, 0), Q(0, rt / 2, half, 0), Q(rt / 2, 0, 0, half)]
            return gens, "quadratic D=3 mod 4"
        if D % 8 == 1:
            gens = [Q(1, 0, 0, 0), Q(0, 1, 0, 0), Q(0, 0, 1, 0), Q(half, half, half, half)]
            return gens, "quadratic D=1 mod 8"
        if D % 4 == 1:
            a = (rt + 1) / 4
            b = (rt + 3) / 4
            gens = [Q(1, 0, 0, 0), Q(0, 1, 0, 0), Q(a, b, half, 0), Q(b, a, 0, half)]
            return gens, "quadratic D=5 mod 8"
        # D = 2 mod 4, D > 2: both new generators have reduced norm (D+2)/4
        gens = [Q(1, 0, 0, 0), Q(0, 1, 0, 0), Q(0, half, half, rt / 2), Q(half, rt / 2, 0, half)]
        return gens, "quadratic D=2 mod 4"
    if field.kind == SIMPLEST_QUARTIC:
        m = field.parameter
        if m % 2:
            raise OrderError(f"no basis known: maximal order over F_{m} needs even m")
        r = field.gen()
        c = (1 + r) / 2
        gens = [Q(1, 0, 0, 0), Q(c, c, 0, 0), Q(c, 0, c, 0), Q(half, half, half, half)]
        return gens, f"simplest quartic v2(m)={v2(m)}"
    raise OrderError(f"unsupported field kind {field.kind!r}")


def maximal_order(field: RealField) -> QuaternionOrder:
    """The explicit maximal order for ``field``, re-verified before returning."""
    gens, tag = order_generators(field)
    if not is_order(gens):
        raise OrderError(f"{tag}: generators do not span an order over {field!r}")
    O = QuaternionOrder(field, tuple(gens), tag)
    got, want = order_disc_norm(O), algebra_discriminant(field)
    if got != want:
        raise OrderError(f"{tag}: discriminant norm {got.value} != algebra discriminant {want.value}")
    return O
