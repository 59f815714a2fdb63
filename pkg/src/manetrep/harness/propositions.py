"""Closed-form reputation gains of honest versus dishonest play, and the
worst-case damage one silent attacker can cause before it is isolated."""

from __future__ import annotations

from dataclasses import dataclass


class PropositionError(ValueError):
    pass


@dataclass(frozen=True)
class PropositionReport:
    psi1: float
    psi2: float
    alpha: float
    phi_size: int
    theta_h: float
    theta_d: float
    margin: float

    @property
    def difference(self) -> float:
        return self.theta_h - self.theta_d


def _check(alpha: float, phi_size: int, *psis: float) -> None:
    if phi_size <= 3 or not alpha > 1 or any(not 0.0 <= p <= 1.0 for p in psis):
        raise PropositionError("proposition precondition violated")


def proposition_gains_link(psi1: float, psi2: float, alpha: float, phi_size: int) -> PropositionReport:
    """A responder asked about a suspected link breakage.

    ``psi1`` is the chance an alternate route exists and ``psi2`` the chance
    the investigation ends in an allegation.
    """
    _check(alpha, phi_size, psi1, psi2)
    a2 = alpha * alpha
    theta_h = psi1 * (psi2 * a2 * (phi_size - 2) + (1.0 - psi2) * a2)
    theta_d = psi1 * a2
    margin = psi1 * psi2 * a2 * (phi_size - 3)
    return PropositionReport(psi1, psi2, alpha, phi_size, theta_h, theta_d, margin)


def proposition_gains_collusion(alpha: float, phi_size: int) -> PropositionReport:
    """A node invited to collude: reporting the request versus joining it."""
    _check(alpha, phi_size)
    a2 = alpha * alpha
    return PropositionReport(1.0, 1.0, alpha, phi_size, a2 * (phi_size - 2), a2, a2 * (phi_size - 3))


def damage_bound(H: float, M: float, sigma: float, phi_size: int) -> float:
    """Energy one silent attacker can waste across the whole network."""
    return H * M * sigma * (phi_size - 1)
