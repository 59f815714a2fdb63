"""Adaptive penalty decider.

A crisp-partition fuzzy controller: every input is mapped to one of four
grades by fixed interval boundaries, three 4x4 composition tables combine the
grades, and the resulting adjustment quotient is defuzzified to the midpoint
of its crisp range.  The new reputation is the old one scaled by that
midpoint.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional


class CrispRangeError(ValueError):
    pass


class Grade(enum.IntEnum):
    a = 0
    b = 1
    c = 2
    d = 3

    def __str__(self) -> str:
        return self.name


class Kind(str, enum.Enum):
    E = "E"
    RAQ = "RAQ"
    C = "C"
    Z_LINK = "Z_link"
    Z_DELAY = "Z_delay"
    P = "P"


def f_phi(phi_size: int) -> float:
    return 2.0 * phi_size / (2.0 * phi_size + 1.0)


def boundaries(kind: Kind, phi_size: int = 100, hop_limit: int = 10) -> tuple[float, ...]:
    """The five ascending boundary values splitting ``kind``'s domain."""
    kind = Kind(kind)
    if kind in (Kind.E, Kind.RAQ, Kind.Z_DELAY):
        return (0.0, 0.25, 0.50, 0.75, 1.00)
    if kind is Kind.Z_LINK:
        return (0.0, 0.50, 0.65, 0.85, 1.00)
    if kind is Kind.C:
        f = f_phi(phi_size)
        return (0.0, f / 4.0, f / 2.0, 3.0 * f / 4.0, 1.00)
    h = float(hop_limit)
    return (1.0 / h, (1.0 + 3.0 / h) / 4.0, (1.0 + 1.0 / h) / 2.0, (3.0 + 1.0 / h) / 4.0, 1.00)


def fuzzify(kind: Kind, value: float, phi_size: int = 100, hop_limit: int = 10) -> Grade:
    """Grade of the half-open interval holding ``value``; the top one is closed."""
    bounds = boundaries(kind, phi_size, hop_limit)
    if math.isnan(value) or value < bounds[0] or value > bounds[-1]:
        raise CrispRangeError(f"crisp value out of range for {Kind(kind).value}: {value}")
    for g in (Grade.d, Grade.c, Grade.b):
        if value >= bounds[g]:
            return g
    return Grade.a


_a, _b, _c, _d = Grade.a, Grade.b, Grade.c, Grade.d

# rows: E grade, columns: C grade
RHO1_TABLE = (
    (_b, _b, _a, _a),
    (_c, _b, _b, _b),
    (_d, _c, _c, _c),
    (_d, _d, _d, _d),
)

# rows: rho1 grade, columns: Z grade
RHO2_TABLE = (
    (_a, _b, _b, _c),
    (_a, _b, _c, _c),
    (_a, _b, _c, _d),
    (_b, _c, _d, _d),
)

# rows: rho2 grade, columns: P grade
RAQ_TABLE = (
    (_b, _a, _a, _a),
    (_c, _b, _b, _b),
    (_d, _c, _c, _c),
    (_d, _d, _d, _d),
)


def lookup_rho1(e: Grade, c: Grade) -> Grade:
    return RHO1_TABLE[e][c]


def lookup_rho2(rho1: Grade, z: Grade) -> Grade:
    return RHO2_TABLE[rho1][z]


def lookup_raq(rho2: Grade, p: Grade) -> Grade:
    return RAQ_TABLE[rho2][p]


def defuzzify_kappa(raq: Grade) -> float:
    lo, hi = boundaries(Kind.RAQ)[raq], boundaries(Kind.RAQ)[raq + 1]
    return (lo + hi) / 2.0


def correctness_link(x_in_range: int, x_collected: int, y_expected: int) -> float:
    """Confidence that a silent router was reachable while it stayed silent."""
    if not 0 <= x_in_range <= x_collected <= y_expected:
        raise CrispRangeError(
            f"inconsistent HELLO counts: x''={x_in_range}, x'={x_collected}, y={y_expected}"
        )
    return 1.0 - (1.0 - x_in_range / (x_collected + 1.0)) * (1.0 - x_collected / (y_expected + 1.0))


def correctness_delay(t2: float, t1: float, queue_size: int, tau: float, tau_prime: float) -> float:
    if t2 < t1:
        raise CrispRangeError("forward time precedes send time")
    if queue_size < 1:
        raise CrispRangeError("queue size must be at least 1")
    denom = (queue_size - 1) * tau + 3.0 * tau_prime
    if denom <= 0:
        raise CrispRangeError("degenerate delay denominator")
    return min(1.0, max(0.0, (t2 - t1) / denom))


def path_fraction(q: int, p: int) -> float:
    if q < 1 or p < 1 or q > p:
        raise CrispRangeError(f"invalid path position q={q}, p={p}")
    return q / p


@dataclass(frozen=True)
class ApdInputs:
    c: float
    e: float
    z: float
    p: Optional[float] = None  # None selects the delay variant


@dataclass(frozen=True)
class ApdResult:
    """Full evaluation record; the CLI prints it verbatim."""

    c_grade: Grade
    e_grade: Grade
    z_grade: Grade
    p_grade: Optional[Grade]
    rho1: Grade
    rho2: Grade
    raq: Grade
    kappa: float
    new_score: float
    forced_minimum: bool


def evaluate(
    old_rep: float,
    inputs: ApdInputs,
    suspicion_count: int,
    max_suspicions: int,
    phi_size: int,
    hop_limit: int = 10,
    penalty_mode: str = "literal",
) -> ApdResult:
    if suspicion_count < 1:
        raise CrispRangeError("suspicion count must be at least 1")
    z_kind = Kind.Z_LINK if inputs.p is not None else Kind.Z_DELAY
    cg = fuzzify(Kind.C, inputs.c, phi_size, hop_limit)
    eg = fuzzify(Kind.E, inputs.e)
    zg = fuzzify(z_kind, inputs.z)
    pg = fuzzify(Kind.P, inputs.p, phi_size, hop_limit) if inputs.p is not None else None
    rho1 = lookup_rho1(eg, cg)
    rho2 = lookup_rho2(rho1, zg)
    raq = lookup_raq(rho2, pg) if pg is not None else rho2
    kappa = defuzzify_kappa(raq)
    bound = float(phi_size)
    if suspicion_count >= max_suspicions:
        return ApdResult(cg, eg, zg, pg, rho1, rho2, raq, kappa, -bound, True)
    if penalty_mode == "magnitude" and old_rep < 0:
        new = max(-bound, old_rep / kappa)
    elif penalty_mode in ("literal", "magnitude"):
        new = old_rep * kappa
    else:
        raise CrispRangeError(f"unknown penalty_mode {penalty_mode!r}")
    return ApdResult(cg, eg, zg, pg, rho1, rho2, raq, kappa, new, False)


def apd_update(
    old_rep: float,
    inputs: ApdInputs,
    suspicion_count: int,
    max_suspicions: int,
    phi_size: int,
    hop_limit: int = 10,
    penalty_mode: str = "literal",
) -> float:
    return evaluate(
        old_rep, inputs, suspicion_count, max_suspicions, phi_size, hop_limit, penalty_mode
    ).new_score
