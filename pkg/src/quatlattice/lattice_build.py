"""Twisted lattices ``Lambda_(O, alpha)`` from maximal orders.

The lattice has Z-basis ``omega_r * gamma_s`` (``omega_r`` running over the
integral basis of F, ``gamma_s`` over the order generators, generator index
outer) and inner product ``<x, y> = Tr_{F/Q}(alpha * Tr_B(x * conj(y)))``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import mpmath

from .exact import rational_det
from .field_core import (
    MIN_PRECISION_BITS,
    QUADRATIC,
    SIMPLEST_QUARTIC,
    FieldElement,
    RealField,
    different_generator,
    embeddings,
    is_totally_positive,
    negative_pell,
    norm,
    sigma,
    trace,
    v2,
)
from .quat_algebra import (
    QuaternionElement,
    QuaternionOrder,
    algebra_discriminant,
    is_maximal,
    maximal_order,
)

log = logging.getLogger(__name__)

DEFAULT_PRECISION_BITS = 128

E8 = "E8"
E8xE8 = "E8xE8"
BARNES_WALL16 = "BarnesWall16"


class TwistError(ValueError):
    """No admissible twist element exists for the requested construction."""


class TwistValidationError(TwistError):
    """Every candidate twist failed exact validation."""

    def __init__(self, message: str, diagnostics: list[dict]):
        super().__init__(message)
        self.diagnostics = diagnostics


ExactGram = list  # 4n x 4n list of lists of Fraction


@dataclass(frozen=True)
class FloatGenerator:
    rows: tuple  # tuple of tuples of mpmath.mpf
    precision_bits: int

    def gram(self):
        """``M M^T`` evaluated at the generator's working precision."""
        with mpmath.workprec(self.precision_bits):
            return [[mpmath.fsum(a * b for a, b in zip(u, v)) for v in self.rows] for u in self.rows]

    def to_numpy(self):
        import numpy as np

        return np.array([[float(v) for v in r] for r in self.rows])


@dataclass
class TwistedLattice:
    field: RealField
    order: QuaternionOrder
    alpha: FieldElement
    z_basis: list[QuaternionElement] = dc_field(default_factory=list)
    selection_log: list[dict] = dc_field(default_factory=list)
    expected_class: str | None = None

    def gram(self) -> ExactGram:
        return exact_gram(self.order, self.alpha, basis=self.z_basis)

    def generator_matrix(self, precision_bits: int = DEFAULT_PRECISION_BITS) -> FloatGenerator:
        return generator_matrix(self.order, self.alpha, precision_bits, basis=self.z_basis)


def z_basis(O: QuaternionOrder) -> list[QuaternionElement]:
    ints = O.field.integral_basis_elements()
    return [g * w for g in O.generators for w in ints]


def exact_gram(O: QuaternionOrder, alpha: FieldElement, *, check_positive: bool = True,
               basis: Sequence[QuaternionElement] | None = None) -> ExactGram:
    """Exact Gram matrix of the trace form twisted by ``alpha``."""
    if check_positive and not is_totally_positive(alpha):
        raise TwistError(f"alpha = {alpha!r} is not totally positive")
    basis = list(basis) if basis else z_basis(O)
    n = len(basis)
    two_alpha = alpha * 2
    G = [[Fraction(0)] * n for _ in range(n)]
    for u in range(n):
        bu = basis[u].coords
        for v in range(u, n):
            bv = basis[v].coords
            s = bu[0] * bv[0] + bu[1] * bv[1] + bu[2] * bv[2] + bu[3] * bv[3]
            G[u][v] = G[v][u] = trace(two_alpha * s)
    return G


def generator_matrix(O: QuaternionOrder, alpha: FieldElement,
                     precision_bits: int = DEFAULT_PRECISION_BITS,
                     basis: Sequence[QuaternionElement] | None = None) -> FloatGenerator:
    """Rows ``sqrt(2 sigma_i(alpha)) sigma_i(c)`` over coordinates c = x, y, z, t."""
    if precision_bits < MIN_PRECISION_BITS:
        raise ValueError(f"precision_bits must be >= {MIN_PRECISION_BITS}")
    if not is_totally_positive(alpha):
        raise TwistError(f"alpha = {alpha!r} is not totally positive")
    basis = list(basis) if basis else z_basis(O)
    with mpmath.workprec(precision_bits):
        scale = [mpmath.sqrt(2 * a) for a in embeddings(alpha, precision_bits).values]
        rows = []
        for q in basis:
            row = []
            for c in q.coords:
                emb = embeddings(c, precision_bits).values
                row.extend(s * e for s, e in zip(scale, emb))
            rows.append(tuple(row))
    return FloatGenerator(tuple(rows), precision_bits)


def det_via_formula(O: QuaternionOrder, alpha: FieldElement) -> Fraction:
    """``Nm(alpha)^2 d_F^2 Nm(D_O)`` with ``I = O``; requires ``O`` maximal."""
    if not is_maximal(O):
        raise ValueError("det_via_formula needs a maximal order (D_O = D_B)")
    dO = algebra_discriminant(O.field).value
    return norm(alpha) ** 2 * O.field.field_disc ** 2 * dO


def gram_det_via_formula(O: QuaternionOrder, alpha: FieldElement) -> Fraction:
    """Gram determinant implied by the formula: its square (covolume squared)."""
    return det_via_formula(O, alpha) ** 2


def exact_det(G: ExactGram) -> Fraction:
    return rational_det(G)


# ---------------------------------------------------------------------------
# twists


def twist_E8(field: RealField, method: str = "auto") -> FieldElement:
    """Totally positive ``alpha`` of norm ``1/d_F`` giving an even unimodular lattice.

    ``method="family"`` uses ``alpha = eps / sqrt(D)`` with ``eps = (s + sqrt D)/2``
    for ``D = s^2 + 4`` (or ``eps = s + sqrt D``, ``alpha = eps/(2 sqrt D)`` for
    ``D = s^2 + 1``).  ``method="pell"`` uses ``alpha = 1/(eps * t)`` where
    ``eps = x + y sqrt D`` solves the negative Pell equation and ``t`` generates
    the different.  ``"auto"`` prefers the Pell route.
    """
    if field.kind != QUADRATIC:
        raise TwistError("twist_E8 needs a real quadratic field")
    D = field.parameter
    if algebra_discriminant(field).value != 1:
        raise TwistError(f"D={D} = 1 (mod 8): D_B = 2Z_F, so no unimodular twist of a maximal order")
    rt = field.sqrt_radicand()
    if method in ("auto", "pell"):
        sol = negative_pell(D)
        if sol is not None:
            eps = rt * sol.y + sol.x
            t = rt if D % 4 == 1 else rt * 2
            return _positive(1 / (eps * t), field)
        if method == "pell":
            raise TwistError(f"no unit of norm -1 from x^2 - {D} y^2 = -1; D={D} admits no E8 twist")
    if method in ("auto", "family"):
        s4 = _isqrt_exact(D - 4)
        if s4 is not None and D % 4 == 1:
            eps = (rt + s4) / 2
            return _positive(eps / rt, field)
        s1 = _isqrt_exact(D - 1)
        if s1 is not None and D % 4 != 1:
            eps = rt + s1
            return _positive(eps / (rt * 2), field)
        raise TwistError(f"D={D} is not of the form s^2+4 or s^2+1 and has no norm -1 unit")
    raise ValueError(f"unknown method {method!r}")


def _isqrt_exact(n: int) -> int | None:
    if n < 0:
        return None
    import math

    r = math.isqrt(n)
    return r if r * r == n else None


def _positive(alpha: FieldElement, field: RealField) -> FieldElement:
    if is_totally_positive(alpha):
        return alpha
    if is_totally_positive(-alpha):
        return -alpha
    raise TwistError(f"{alpha!r} has mixed signs; the unit has norm +1")


def quartic_s(field: RealField, denominator: int) -> FieldElement:
    """``(r^3 - m r^2 - 5 r + m) / denominator``."""
    r = field.gen()
    m = field.parameter
    return (r ** 3 - r * r * m - r * 5 + m) / denominator


def _unit_adjustments(field: RealField, reach: int = 3):
    r = field.gen()
    sr = sigma(r)
    for a, b in sorted(itertools.product(range(-reach, reach + 1), repeat=2),
                       key=lambda ab: (abs(ab[0]) + abs(ab[1]), ab)):
        yield (a, b), r ** a * sr ** b


def _positive_adjustment(alpha: FieldElement):
    """First ``±r^a sigma(r)^b * alpha`` that is totally positive, in search order."""
    for (a, b), u in _unit_adjustments(alpha.field):
        for sign in (1, -1):
            cand = alpha * u * sign
            if is_totally_positive(cand):
                return cand, {"sign": sign, "r_power": a, "sigma_r_power": b}
    return None, None


def _validate(O: QuaternionOrder, alpha: FieldElement, basis, want_det: int) -> dict:
    G = exact_gram(O, alpha, check_positive=False, basis=basis)
    integral = all(v.denominator == 1 for row in G for v in row)
    even = integral and all(G[i][i] % 2 == 0 for i in range(len(G)))
    det = exact_det(G)
    return {"integral": integral, "even": even, "det": det, "ok": even and det == want_det}


def twist_quartic(field: RealField) -> tuple[FieldElement, str, list[dict]]:
    """Twist for ``F_m``: E8xE8 when ``v2(m) = 1``, Barnes-Wall when ``v2(m) = 2``.

    Returns ``(alpha, expected_class, selection_log)``.  Candidates are
    validated exactly (even integral Gram with the target determinant); the
    log records every candidate tried.
    """
    if field.kind != SIMPLEST_QUARTIC:
        raise TwistError("twist_quartic needs a simplest quartic field")
    m = field.parameter
    if m % 2:
        raise TwistError(f"m={m} is odd; the quartic constructions need even m")
    k = v2(m)
    if k not in (1, 2):
        raise TwistError(f"v2(m)={k}: only v2(m) in {{1, 2}} is supported")
    O = maximal_order(field)
    basis = z_basis(O)
    fp = different_generator(field)
    s2 = quartic_s(field, 2)
    s4 = quartic_s(field, 4)
    if k == 1:
        candidates = [("2/(s f') with s=(...)/2", Fraction(2), s2)]
        want, cls = 1, E8xE8
    else:
        candidates = [
            # A, B, C are the three published scalings; the rest complete the grid
            ("A: 1/(s f') with s=(...)/2", Fraction(1), s2),
            ("B: 2/(s f') with s=(...)/4", Fraction(2), s4),
            ("C: 4/(s f') with s=(...)/4", Fraction(4), s4),
            ("2/(s f') with s=(...)/2", Fraction(2), s2),
            ("4/(s f') with s=(...)/2", Fraction(4), s2),
            ("1/(s f') with s=(...)/4", Fraction(1), s4),
        ]
        want, cls = 2 ** 8, BARNES_WALL16
    selection: list[dict] = []
    chosen = None
    seen = set()
    for label, c, s in candidates:
        base = (s * fp).inverse() * c
        entry = {"candidate": label, "norm_times_dF": norm(base) * field.field_disc}
        if base in seen:
            entry["status"] = "duplicate value"
            selection.append(entry)
            continue
        seen.add(base)
        alpha, adj = _positive_adjustment(base)
        if alpha is None:
            entry["status"] = "no totally positive unit adjustment"
            selection.append(entry)
            continue
        entry["adjustment"] = adj
        res = _validate(O, alpha, basis, want)
        entry.update({"integral": res["integral"], "even": res["even"], "det": str(res["det"]),
                      "status": "validated" if res["ok"] else "rejected"})
        selection.append(entry)
        if res["ok"] and chosen is None:
            chosen = alpha
    if chosen is None:
        raise TwistValidationError(f"F_{m}: no candidate twist gives an even lattice of det {want}",
                                   selection)
    return chosen, cls, selection


def build_quadratic(D: int, method: str = "auto") -> TwistedLattice:
    from .field_core import make_quadratic

    field = make_quadratic(D)
    O = maximal_order(field)
    alpha = twist_E8(field, method)
    return TwistedLattice(field, O, alpha, z_basis(O), expected_class=E8)


def build_quartic(m: int) -> TwistedLattice:
    from .field_core import make_simplest_quartic

    field = make_simplest_quartic(m)
    O = maximal_order(field)
    alpha, cls, selection = twist_quartic(field)
    return TwistedLattice(field, O, alpha, z_basis(O), selection, cls)
