"""Invariants of integral lattices given by an exact Gram matrix.

Floating point only ever appears as a preconditioner (LLL) or as a pruning
bound during enumeration; every reported number is recomputed exactly from
integer Gram entries.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .exact import rank, rational_det

E8 = "E8"
E8xE8 = "E8xE8"
D16PLUS = "D16plus"
BARNES_WALL16 = "BarnesWall16"
EVEN_UNIMODULAR_OTHER = "EvenUnimodularOther"
OTHER = "Other"

DEFAULT_TIME_BUDGET = 60.0
MAX_THETA_BOUND = 12
# refuse enumerations whose Gaussian-heuristic size exceeds this
MAX_ENUMERATED_VECTORS = 3_000_000


class LatticeError(ValueError):
    pass


class BudgetExceeded(LatticeError):
    pass


def exact_det(G: Sequence[Sequence]) -> Fraction:
    return rational_det(G)


def is_integral(G) -> bool:
    return all(Fraction(v).denominator == 1 for row in G for v in row)


def is_even(G) -> bool:
    return is_integral(G) and all(int(G[i][i]) % 2 == 0 for i in range(len(G)))


def _int_gram(G) -> list[list[int]]:
    if not is_integral(G):
        raise LatticeError("Gram matrix is not integral")
    n = len(G)
    out = [[int(v) for v in row] for row in G]
    for i in range(n):
        if len(out[i]) != n:
            raise LatticeError("Gram matrix is not square")
        for j in range(i):
            if out[i][j] != out[j][i]:
                raise LatticeError("Gram matrix is not symmetric")
    return out


def _cholesky(G: list[list[int]]) -> np.ndarray:
    try:
        return np.linalg.cholesky(np.array(G, dtype=float))
    except np.linalg.LinAlgError:
        raise LatticeError("Gram matrix is not positive definite") from None


def lll_reduce(G, delta: float = 0.99) -> tuple[list[list[int]], list[list[int]]]:
    """LLL-reduce an integral Gram matrix.

    Returns ``(G_red, U)`` with ``G_red = U^T G U`` exactly and ``U``
    unimodular (columns are the new basis in old coordinates).
    """
    B = _int_gram(G)
    n = len(B)
    U = [[int(i == j) for j in range(n)] for i in range(n)]

    def gso():
        L = _cholesky(B)
        d = np.diag(L)
        return L / d, d * d

    mu, bstar = gso()
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            raise LatticeError("LLL failed to converge")
        for j in range(k - 1, -1, -1):
            q = int(round(mu[k, j]))
            if q:
                _size_step(B, U, k, j, q)
                mu, bstar = gso()
        if bstar[k] >= (delta - mu[k, k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            _swap(B, U, k)
            mu, bstar = gso()
            k = max(k - 1, 1)
    return B, U


def _size_step(B, U, k, j, q):
    # b_k <- b_k - q b_j: column operation, then the same row operation
    n = len(B)
    for row in U:
        row[k] -= q * row[j]
    for i in range(n):
        B[i][k] -= q * B[i][j]
    row_k, row_j = B[k], B[j]
    for i in range(n):
        row_k[i] -= q * row_j[i]


def _swap(B, U, k):
    for row in U:
        row[k - 1], row[k] = row[k], row[k - 1]
    B[k - 1], B[k] = B[k], B[k - 1]
    for row in B:
        row[k - 1], row[k] = row[k], row[k - 1]


def short_vectors(G, bound: int, time_budget: float | None = None) -> Iterator[tuple[tuple[int, ...], int]]:
    """Yield ``(x, x^T G x)`` for nonzero ``x`` with norm ``<= bound``, one per ``±x`` pair.

    ``G`` must be integral positive definite; reduce it first for speed.
    """
    B = _int_gram(G)
    n = len(B)
    L = _cholesky(B)
    # Q(x) = sum_i d_i (x_i + sum_{j>i} r_ij x_j)^2 with R = L^T / diag
    d = np.diag(L) ** 2
    R = (L / np.diag(L)).T
    r = [[float(R[i, j]) for j in range(n)] for i in range(n)]
    dd = [float(v) for v in d]
    slack = 1e-6 * max(1.0, bound)
    cap = bound + slack
    deadline = None if time_budget is None else time.monotonic() + time_budget

    x = [0] * n
    partial = [0.0] * (n + 1)  # partial[i] = contribution of coordinates >= i
    center = [0.0] * n
    # canonical sign: first nonzero coordinate from the top is positive
    nonzero_above = [False] * (n + 1)
    steps = 0

    def compute_center(i):
        s = 0.0
        ri = r[i]
        for j in range(i + 1, n):
            if x[j]:
                s += ri[j] * x[j]
        return -s

    i = n - 1
    center[i] = 0.0
    # iterate coordinates from the top with explicit ranges
    lo = [0] * n
    hi = [0] * n

    def set_range(i):
        rem = cap - partial[i + 1]
        if rem < 0:
            lo[i], hi[i] = 1, 0
            return
        c = compute_center(i)
        center[i] = c
        w = math.sqrt(rem / dd[i])
        a = math.ceil(c - w)
        b = math.floor(c + w)
        if not nonzero_above[i + 1]:
            a = max(a, 0)
        lo[i], hi[i] = a, b
        x[i] = a - 1

    set_range(i)
    while True:
        x[i] += 1
        if x[i] > hi[i]:
            i += 1
            if i == n:
                return
            continue
        steps += 1
        if deadline is not None and (steps & 0xFFF) == 0 and time.monotonic() > deadline:
            raise BudgetExceeded("enumeration exceeded the time budget")
        t = x[i] - center[i]
        partial[i] = partial[i + 1] + dd[i] * t * t
        nonzero_above[i] = nonzero_above[i + 1] or x[i] != 0
        if partial[i] > cap:
            continue
        if i == 0:
            if nonzero_above[0]:
                v = _qf(B, x)
                if v <= bound:
                    yield tuple(x), v
            continue
        i -= 1
        set_range(i)


def _qf(B, x) -> int:
    total = 0
    n = len(x)
    for a in range(n):
        xa = x[a]
        if xa:
            row = B[a]
            s = 0
            for b in range(n):
                if x[b]:
                    s += row[b] * x[b]
            total += xa * s
    return total


def _estimated_count(G, bound: int) -> float:
    n = len(G)
    det = float(exact_det(G))
    vol_ball = math.pi ** (n / 2) / math.gamma(n / 2 + 1) * bound ** (n / 2)
    return vol_ball / math.sqrt(det)


def minimum_and_kissing(G, time_budget: float | None = DEFAULT_TIME_BUDGET) -> tuple[int, int]:
    """Exact minimum and number of minimal vectors (both signs counted)."""
    Gr, _ = lll_reduce(G)
    bound = min(Gr[i][i] for i in range(len(Gr)))
    best = bound
    count = 0
    for _, v in short_vectors(Gr, bound, time_budget):
        if v < best:
            best, count = v, 1
        elif v == best:
            count += 1
    return best, 2 * count


def theta_coeffs(G, bound: int = 8, time_budget: float | None = DEFAULT_TIME_BUDGET,
                 max_vectors: int = MAX_ENUMERATED_VECTORS) -> dict[int, int]:
    """Counts ``N(k) = #{x : x^T G x = k}`` for ``k <= bound`` (zero vector included).

    Even norms always appear (possibly with count 0); odd norms only when hit.
    """
    if bound > MAX_THETA_BOUND:
        raise BudgetExceeded(f"theta bound {bound} exceeds the supported maximum {MAX_THETA_BOUND}")
    Gr, _ = lll_reduce(G)
    est = _estimated_count(Gr, bound)
    if est > max_vectors:
        raise BudgetExceeded(f"~{est:.3g} vectors of norm <= {bound}; over the {max_vectors} budget")
    counts = {k: 0 for k in range(0, bound + 1, 2)}
    counts[0] = 1
    for _, v in short_vectors(Gr, bound, time_budget):
        counts[v] = counts.get(v, 0) + 2
    return dict(sorted(counts.items()))


def center_density(min_norm: int, det, dimension: int):
    """``lambda1^(n/2) / (2^n sqrt(det))``: a Fraction when exact, else an mpf."""
    det = Fraction(det)
    sq = Fraction(min_norm) ** dimension / (Fraction(4) ** dimension * det)
    num = math.isqrt(sq.numerator)
    den = math.isqrt(sq.denominator)
    if num * num == sq.numerator and den * den == sq.denominator:
        return Fraction(num, den)
    with mpmath.workprec(128):
        return mpmath.sqrt(mpmath.mpf(sq.numerator) / sq.denominator)


def root_components(G, time_budget: float | None = DEFAULT_TIME_BUDGET) -> list[tuple[int, int]]:
    """``(rank, root count)`` of each connected component of the norm-2 vectors.

    Two roots are joined when their inner product is nonzero.  Components are
    sorted by decreasing rank.
    """
    Gr, _ = lll_reduce(G)
    if not is_even(Gr):
        raise LatticeError("root_components needs an even lattice")
    half = [x for x, v in short_vectors(Gr, 2, time_budget)]
    if not half or min(_qf(Gr, x) for x in half) != 2:
        raise LatticeError("root_components needs minimum 2")
    roots = half + [tuple(-c for c in x) for x in half]
    arr = np.array(roots, dtype=np.int64)
    ip = arr @ np.array(Gr, dtype=np.int64) @ arr.T
    parent = list(range(len(roots)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    nz = np.argwhere(ip != 0)
    for a, b in nz:
        if a < b:
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[ra] = rb
    comps: dict[int, list[int]] = {}
    for idx in range(len(roots)):
        comps.setdefault(find(idx), []).append(idx)
    out = [(rank([roots[i] for i in members]), len(members)) for members in comps.values()]
    return sorted(out, key=lambda rc: (-rc[0], -rc[1]))


def brute_force_min(G, box: int, max_points: int = 50_000_000) -> int:
    """Exhaustive minimum over coefficient vectors in ``[-box, box]^n``."""
    if box < 1:
        raise LatticeError("box must be >= 1 (box 0 is an empty search)")
    B = np.array(_int_gram(G), dtype=np.int64)
    n = len(B)
    if n > 8 and box > 2:
        raise LatticeError("brute force supports dimension <= 8 or box <= 2")
    if (2 * box + 1) ** n > max_points:
        raise BudgetExceeded(f"{(2 * box + 1) ** n} points exceed the brute-force budget")
    rng = np.arange(-box, box + 1, dtype=np.int64)
    split = min(n, 6)
    tail = np.array(list(itertools.product(rng, repeat=split)), dtype=np.int64)
    best = None
    for head in itertools.product(rng, repeat=n - split):
        head = np.array(head, dtype=np.int64)
        X = np.hstack([np.broadcast_to(head, (len(tail), n - split)), tail])
        vals = np.einsum("ij,jk,ik->i", X, B, X)
        vals = vals[np.any(X != 0, axis=1)]
        if len(vals):
            m = int(vals.min())
            best = m if best is None else min(best, m)
    return best


@dataclass
class LatticeReport:
    dimension: int
    det: Fraction
    integral: bool
    even: bool
    min_norm: int | None
    kissing: int | None
    theta: dict[int, int] = dc_field(default_factory=dict)
    center_density: object = None
    classification: str = OTHER
    extremal: bool = False
    root_components: list[tuple[int, int]] | None = None

    def to_dict(self) -> dict:
        cd = self.center_density
        if isinstance(cd, Fraction):
            cd_s = str(cd)
        elif cd is None:
            cd_s = None
        else:
            cd_s = mpmath.nstr(cd, 30)
        return {
            "dimension": self.dimension,
            "det": str(self.det),
            "integral": self.integral,
            "even": self.even,
            "min_norm": self.min_norm,
            "kissing": self.kissing,
            "theta": {str(k): v for k, v in self.theta.items()},
            "center_density": cd_s,
            "classification": self.classification,
            "extremal": self.extremal,
            "root_components": [list(rc) for rc in self.root_components] if self.root_components else None,
        }


def extremal_bound(dimension: int) -> int:
    return 2 + 2 * (dimension // 24)


def classify(G, theta_bound: int | None = None,
             time_budget: float | None = DEFAULT_TIME_BUDGET) -> LatticeReport:
    """Full report; names E8, E8xE8, D16plus and BarnesWall16 when they apply.

    ``theta_bound`` defaults to 8 in dimension <= 8 and to the minimum
    otherwise (larger shells of 16-dimensional lattices are too big to count
    by enumeration at desk scale).
    """
    n = len(G)
    det = exact_det(G)
    integral = is_integral(G)
    even = is_even(G)
    report = LatticeReport(n, det, integral, even, None, None)
    if not integral:
        return report
    lam, kiss = minimum_and_kissing(G, time_budget)
    report.min_norm, report.kissing = lam, kiss
    report.center_density = center_density(lam, det, n)
    if theta_bound is None:
        theta_bound = 8 if n <= 8 else lam
    report.theta = theta_coeffs(G, theta_bound, time_budget)
    unimodular = det == 1
    if even and unimodular:
        if n % 8:
            raise LatticeError(f"even unimodular lattice in dimension {n} (not a multiple of 8)")
        report.extremal = lam == extremal_bound(n)
    if even and unimodular and n == 8:
        if lam != 2:
            raise LatticeError(f"even unimodular 8-dimensional lattice with minimum {lam}")
        report.classification = E8
    elif even and unimodular and n == 16 and lam == 2:
        comps = root_components(G, time_budget)
        report.root_components = comps
        if [c[0] for c in comps] == [8, 8]:
            report.classification = E8xE8
        elif [c[0] for c in comps] == [16]:
            report.classification = D16PLUS
        else:
            report.classification = EVEN_UNIMODULAR_OTHER
    elif even and n == 16 and det == 256 and lam == 4:
        report.classification = BARNES_WALL16
    elif even and unimodular:
        report.classification = EVEN_UNIMODULAR_OTHER
    return report
