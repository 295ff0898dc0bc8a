"""Bulk construction over the parameter families, and the Pell census."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field

import mpmath
import numpy as np

from .field_core import FieldError, _odd_part, _square_factor, negative_pell, v2
from .lattice_analyze import BARNES_WALL16, E8, E8xE8, classify
from .lattice_build import TwistError, TwistValidationError, build_quadratic, build_quartic
from .quat_algebra import OrderError

log = logging.getLogger(__name__)

E8_QUADRATIC = "E8_quadratic"
DIM16_QUARTIC = "dim16_quartic"

CENSUS_MAX_X = 10 ** 7


@dataclass
class CatalogEntry:
    family: str
    parameter: int
    D_or_m: int
    d_F: int
    alpha: list[str]
    det: str
    even: bool
    min_norm: int
    kissing: int
    classification: str
    root_components: list | None = None
    selection: list | None = None
    build_time: float = 0.0

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("build_time")
        return d


@dataclass
class Skipped:
    family: str
    parameter: int
    reason: str
    detail: str = ""
    diagnostics: list = dc_field(default_factory=list)

    def to_dict(self, timing: bool = True) -> dict:
        return asdict(self)


def _entry(family, parameter, lattice, report, elapsed) -> CatalogEntry:
    return CatalogEntry(
        family=family,
        parameter=parameter,
        D_or_m=lattice.field.parameter,
        d_F=lattice.field.field_disc,
        alpha=[str(c) for c in lattice.alpha.coords],
        det=str(report.det),
        even=report.even,
        min_norm=report.min_norm,
        kissing=report.kissing,
        classification=report.classification,
        root_components=[list(c) for c in report.root_components] if report.root_components else None,
        selection=_jsonable(lattice.selection_log) or None,
        build_time=round(elapsed, 4),
    )


def _jsonable(log_entries):
    out = []
    for e in log_entries:
        out.append({k: (str(v) if not isinstance(v, (bool, int, str, dict, type(None))) else v)
                    for k, v in e.items()})
    return out


def _quadratic_item(args):
    s, D, method, family_tag = args
    t0 = time.perf_counter()
    try:
        lat = build_quadratic(D, method)
        rep = classify(lat.gram(), theta_bound=2)
    except (FieldError, OrderError, TwistError) as exc:
        return Skipped(family_tag, s, "twist search failure", str(exc))
    entry = _entry(family_tag, s, lat, rep, time.perf_counter() - t0)
    if not (rep.det == 1 and rep.even and rep.min_norm == 2 and rep.kissing == 240
            and rep.classification == E8):
        return Skipped(family_tag, s, "verification failed", f"report {rep.to_dict()}")
    return entry


def _quartic_item(m):
    t0 = time.perf_counter()
    try:
        lat = build_quartic(m)
    except TwistValidationError as exc:
        return Skipped(DIM16_QUARTIC, m, "twist search failure", str(exc), _jsonable(exc.diagnostics))
    except (FieldError, OrderError, TwistError) as exc:
        return Skipped(DIM16_QUARTIC, m, "precondition", str(exc))
    rep = classify(lat.gram())
    entry = _entry(DIM16_QUARTIC, m, lat, rep, time.perf_counter() - t0)
    if lat.expected_class == E8xE8:
        ok = (rep.det == 1 and rep.even and rep.min_norm == 2 and rep.kissing == 480
              and rep.classification == E8xE8)
    else:
        ok = (rep.det == 256 and rep.even and rep.min_norm == 4 and rep.kissing == 4320
              and rep.classification == BARNES_WALL16)
    if not ok:
        return Skipped(DIM16_QUARTIC, m, "verification failed", f"report {rep.to_dict()}")
    return entry


def _run(func, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def scan_quadratic(s_max: int, include_s2_plus_1: bool = False, jobs: int = 1):
    """E8 lattices over ``Q(sqrt(s^2 + 4))`` for odd ``s <= s_max``.

    Returns results in parameter order: :class:`CatalogEntry` for verified
    lattices, :class:`Skipped` (with a reason) otherwise.  With
    ``include_s2_plus_1`` the ``D = s^2 + 1`` variant (odd s) follows.
    """
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    results: list = []
    work = []
    slots = []
    variants = [(E8_QUADRATIC, 4)] + ([(E8_QUADRATIC + "_s2+1", 1)] if include_s2_plus_1 else [])
    for tag, c in variants:
        for s in range(1, s_max + 1, 2):
            D = s * s + c
            p = _square_factor(D)
            if p is not None:
                results.append(Skipped(tag, s, "non-squarefree", f"{p}^2 divides D={D}"))
                continue
            if D % 8 == 1:
                results.append(Skipped(tag, s, "wrong congruence", f"D={D} = 1 (mod 8)"))
                continue
            slots.append(len(results))
            results.append(None)
            work.append((s, D, "family", tag))
    for slot, res in zip(slots, _run(_quadratic_item, work, jobs)):
        results[slot] = res
    return results


def scan_quartic(m_max: int, jobs: int = 1):
    """E8xE8 (``m = 2k``) and Barnes-Wall (``m = 4k``) lattices, ``k`` odd, ``m <= m_max``."""
    if m_max < 2:
        raise ValueError("m_max must be >= 2")
    results: list = []
    slots, work = [], []
    for m in range(1, m_max + 1):
        if m == 3:
            results.append(Skipped(DIM16_QUARTIC, m, "excluded", "m = 3 is excluded by definition"))
            continue
        if m % 2:
            results.append(Skipped(DIM16_QUARTIC, m, "wrong congruence", "odd m"))
            continue
        if v2(m) > 2:
            results.append(Skipped(DIM16_QUARTIC, m, "wrong congruence", f"v2(m) = {v2(m)} > 2"))
            continue
        if m in (2, 4):
            results.append(Skipped(DIM16_QUARTIC, m, "excluded", "exceptional monogenic field"))
            continue
        odd = _odd_part(m * m + 16)
        p = _square_factor(odd)
        if p is not None:
            results.append(Skipped(DIM16_QUARTIC, m, "non-squarefree",
                                   f"{p}^2 divides odd part {odd} of m^2+16"))
            continue
        slots.append(len(results))
        results.append(None)
        work.append(m)
    for slot, res in zip(slots, _run(_quartic_item, work, jobs)):
        results[slot] = res
    return results


# ---------------------------------------------------------------------------
# density constants and the Pell census


@dataclass(frozen=True)
class DensityConstants:
    c1_truncated: float
    truncation_bound: int
    tau: float
    beta: float


def _primes_upto(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0]


def constants(P: int = 100_000, factors: int = 60) -> DensityConstants:
    """``c1`` truncated at primes ``<= P``; ``beta = prod_{j odd}(1 - 2^-j)``, ``tau = beta/9``."""
    if P < 100:
        raise ValueError("P must be >= 100")
    with mpmath.workprec(128):
        primes = _primes_upto(P)
        prod = mpmath.mpf(1)
        for p in primes[primes % 4 == 1]:
            prod *= 1 - mpmath.mpf(1) / (int(p) * int(p))
        c1 = 9 / (8 * mpmath.pi) * mpmath.sqrt(prod)
        beta = mpmath.mpf(1)
        for j in range(factors):
            beta *= 1 - mpmath.mpf(2) ** -(2 * j + 1)
        tau = beta / 9
    return DensityConstants(float(c1), P, float(tau), float(beta))


def _smallest_prime_factor(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if spf[p] == 0:
            spf[p::p] = np.where(spf[p::p] == 0, p, spf[p::p])
    return spf


def _admissible(n: int, spf) -> bool:
    """Squarefree with every odd prime factor = 1 (mod 4)."""
    while n > 1:
        p = int(spf[n])
        n //= p
        if n % p == 0:
            return False
        if p % 4 == 3:
            return False
    return True


def pell_census(X: int) -> dict:
    """Counts over fundamental discriminants ``d <= X`` with no prime factor ``= 3 (mod 4)``.

    Negative Pell solvability uses the integral equation ``x^2 - D y^2 = -1``
    on the radicand ``D`` (``d`` or ``d/4``).
    """
    if X > CENSUS_MAX_X:
        raise OverflowError(f"X={X} exceeds the census limit {CENSUS_MAX_X}")
    if X < 5:
        raise ValueError("X must be >= 5")
    spf = _smallest_prime_factor(X)
    odd, even = [], []
    odd_pell = even_pell = 0
    for d in range(5, X + 1, 4):
        if _admissible(d, spf):
            odd.append(d)
            if negative_pell(d) is not None:
                odd_pell += 1
    for d in range(8, X + 1, 16):
        # d = 8 D'' with D'' odd, radicand 2 D''
        if _admissible(d // 8, spf):
            even.append(d)
            if negative_pell(d // 4) is not None:
                even_pell += 1
    logx = math.log(X)
    c = constants(max(100, min(X, 10 ** 6)))
    ref = c.c1_truncated * X / math.sqrt(logx)
    n2 = len(odd) + len(even)
    return {
        "X": X,
        "note": ("negative Pell solvability is tested on the integral equation x^2 - D y^2 = -1; "
                 "fields whose only norm -1 unit is half-integral are not counted in N-"),
        "D2": n2,
        "D_even": len(even),
        "D_odd": len(odd),
        "D_even_members_head": even[:10],
        "D_even_negative_pell": even_pell,
        "D_odd_negative_pell": odd_pell,
        "D_even_pell_fraction": even_pell / len(even) if even else None,
        "D_odd_pell_fraction": odd_pell / len(odd) if odd else None,
        "reference_c1_X_over_sqrt_logX": ref,
        "ratio_D2_to_reference": n2 / ref,
        "ratio_D_even_to_reference_over_9": len(even) / (ref / 9),
        "tau": c.tau,
        "beta": c.beta,
    }
