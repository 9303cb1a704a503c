"""Slow-manifold reduction by oblique projection.

For a perturbed field ``z' = w(z) + eps*G(z)`` whose unperturbed part factors
as ``w(z) = P(z) f(z)`` with critical manifold ``M = {f = 0}``, the reduced
flow on ``M`` is ``z' = Pi(z) G(z)`` with

    Pi = I - P (Df P)^{-1} Df.

Three factorizations are catalogued:

* ``pi1``: ``e_T`` and ``k0`` small. ``M = {c = 0}``; projection gives the sQSSA.
* ``pi3``: ``k2`` and ``k0`` small. ``M = {c = e_T s/(K_S + s)}``; gives the QEA.
* ``reverse_closed``: closed reaction with ``k_m1`` and ``k2`` small. The
  critical set is ``{c = e_T} | {s = 0}``; on the compact piece
  ``{s = 0, 0 <= c <= e_T - delta}`` projection gives the reverse QSSA.

The perturbation parameter is absorbed into ``G``, so ``w + G`` is the
original field evaluated at the actual parameter values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import HyperbolicityError, ManifoldDomainError, MMQSSAError
from .model import Parameters

__all__ = [
    "TFPV",
    "Factorization",
    "ProjectionData",
    "factorization_for",
    "projector_at",
    "reduced_field",
]

Vec = np.ndarray
_HYPERBOLICITY_TOL = 1e-12
_MANIFOLD_TOL = 1e-9


class TFPV(str, Enum):
    PI1 = "pi1"
    PI3 = "pi3"
    REVERSE_CLOSED = "reverse_closed"


@dataclass(frozen=True)
class Factorization:
    """Pointwise evaluators of ``P``, ``f``, ``Df`` and ``G`` for one singular limit.

    ``chart`` maps the manifold coordinate (``s`` for pi1/pi3, ``c`` for
    reverse_closed) to a point on ``M``. ``f_scale`` sets the absolute
    tolerance for manifold membership.
    """

    tfpv: TFPV
    params: Parameters
    P_eval: Callable[[Vec], Vec]
    f_eval: Callable[[Vec], Vec]
    Df_eval: Callable[[Vec], Vec]
    G_eval: Callable[[Vec], Vec]
    chart: Callable[[float], Vec]
    target_eval: Callable[[Vec], Vec]
    f_scale: float
    delta: float = 0.0

    def w(self, z) -> Vec:
        """Unperturbed field ``P(z) f(z)``."""
        z = np.asarray(z, dtype=float)
        return self.P_eval(z) @ self.f_eval(z)

    def reconstruction_residual(self, z) -> Vec:
        """``w + G`` minus the field it is meant to reproduce."""
        z = np.asarray(z, dtype=float)
        return self.w(z) + self.G_eval(z) - self.target_eval(z)

    def on_manifold(self, z) -> bool:
        z = np.asarray(z, dtype=float)
        if np.max(np.abs(self.f_eval(z))) > _MANIFOLD_TOL * self.f_scale:
            return False
        if self.tfpv is TFPV.REVERSE_CLOSED:
            c = z[1]
            return -_MANIFOLD_TOL * self.params.e_T <= c <= self.params.e_T - self.delta
        return True


@dataclass(frozen=True)
class ProjectionData:
    point: Vec
    pi_matrix: Vec
    dfp: Vec
    nontrivial_eigenvalues: Vec
    attracting: bool


def _full_field(p: Parameters, k0: float) -> Callable[[Vec], Vec]:
    def field(z: Vec) -> Vec:
        s, c = z
        bind = p.k1 * (p.e_T - c) * s
        return np.array([k0 - bind + p.k_m1 * c, bind - (p.k_m1 + p.k2) * c])

    return field


def _pi1(p: Parameters) -> Factorization:
    k0, eT, k1, k2, km1 = p.k0, p.e_T, p.k1, p.k2, p.k_m1
    return Factorization(
        tfpv=TFPV.PI1,
        params=p,
        P_eval=lambda z: np.array([[k1 * z[0] + km1], [-k1 * z[0] - km1 - k2]]),
        f_eval=lambda z: np.array([z[1]]),
        Df_eval=lambda z: np.array([[0.0, 1.0]]),
        G_eval=lambda z: np.array([k0 - k1 * eT * z[0], k1 * eT * z[0]]),
        chart=lambda s: np.array([float(s), 0.0]),
        target_eval=_full_field(p, k0),
        f_scale=eT,
    )


def _pi3(p: Parameters) -> Factorization:
    k0, eT, k1, k2, km1 = p.k0, p.e_T, p.k1, p.k2, p.k_m1
    K_S = km1 / k1
    return Factorization(
        tfpv=TFPV.PI3,
        params=p,
        P_eval=lambda z: np.array([[1.0], [-1.0]]),
        f_eval=lambda z: np.array([km1 * z[1] - k1 * (eT - z[1]) * z[0]]),
        Df_eval=lambda z: np.array([[-k1 * (eT - z[1]), km1 + k1 * z[0]]]),
        G_eval=lambda z: np.array([k0, -k2 * z[1]]),
        chart=lambda s: np.array([float(s), eT * s / (K_S + s)]),
        target_eval=_full_field(p, k0),
        f_scale=(km1 + k2) * eT,
    )


def _reverse_closed(p: Parameters, delta: float | None) -> Factorization:
    eT, k1, k2, km1 = p.e_T, p.k1, p.k2, p.k_m1
    delta = 0.05 * eT if delta is None else float(delta)
    if not 0 < delta < eT:
        raise ValueError(f"delta must lie in (0, e_T), got {delta!r}")
    return Factorization(
        tfpv=TFPV.REVERSE_CLOSED,
        params=p,
        P_eval=lambda z: np.array([[-k1 * (eT - z[1])], [k1 * (eT - z[1])]]),
        f_eval=lambda z: np.array([z[0]]),
        Df_eval=lambda z: np.array([[1.0, 0.0]]),
        G_eval=lambda z: np.array([km1 * z[1], -(km1 + k2) * z[1]]),
        chart=lambda c: np.array([0.0, float(c)]),
        target_eval=_full_field(p, 0.0),
        f_scale=eT,
        delta=delta,
    )


def factorization_for(tfpv: TFPV | str, params: Parameters, *, delta: float | None = None) -> Factorization:
    """Factorization ``w = P f`` and perturbation ``G`` for a catalogued limit.

    ``delta`` only applies to ``reverse_closed`` (default ``0.05*e_T``).
    """
    try:
        tfpv = TFPV(tfpv)
    except ValueError:
        raise MMQSSAError(f"unknown TFPV {tfpv!r}; expected one of {[t.value for t in TFPV]}") from None
    if tfpv is TFPV.PI1:
        return _pi1(params)
    if tfpv is TFPV.PI3:
        return _pi3(params)
    return _reverse_closed(params, delta)


def _dfp_scale(fact: Factorization, z: Vec) -> float:
    """Largest rate present at ``z``; DfP is a rate in every catalogued limit."""
    p = fact.params
    return p.k1 * (p.e_T + abs(z[0])) + p.k_m1 + p.k2


def projector_at(fact: Factorization, point) -> ProjectionData:
    """Oblique projector onto the tangent space of ``M`` at ``point``.

    Raises:
        ManifoldDomainError: ``point`` is not on the (compact part of the)
            critical manifold.
        HyperbolicityError: ``DfP`` is numerically singular.
    """
    z = np.asarray(point, dtype=float)
    if not fact.on_manifold(z):
        raise ManifoldDomainError(f"{z.tolist()} is not on the critical manifold of {fact.tfpv.value}")
    P = fact.P_eval(z)
    Df = fact.Df_eval(z)
    dfp = Df @ P
    if abs(np.linalg.det(dfp)) < _HYPERBOLICITY_TOL * _dfp_scale(fact, z) ** dfp.shape[0]:
        raise HyperbolicityError(f"DfP is singular at {z.tolist()} for {fact.tfpv.value}")
    n = z.shape[0]
    pi = np.eye(n) - P @ np.linalg.solve(dfp, Df)

    # Sanity of the construction; these can only fail on a broken factorization.
    tol = 1e-9 * max(1.0, np.abs(pi).max())
    if (
        np.abs(pi @ pi - pi).max() > tol
        or np.abs(pi @ P).max() > tol * np.abs(P).max()
        or np.abs(Df @ pi).max() > tol * np.abs(Df).max()
    ):
        raise MMQSSAError(f"projector invariants violated at {z.tolist()}")

    eig = np.linalg.eigvals(dfp)
    return ProjectionData(
        point=z,
        pi_matrix=pi,
        dfp=dfp,
        nontrivial_eigenvalues=eig,
        attracting=bool(np.all(eig.real < 0)),
    )


def reduced_field(fact: Factorization, point) -> Vec:
    """Leading-order slow flow ``Pi(z) G(z)`` at a point of the critical manifold."""
    data = projector_at(fact, point)
    return data.pi_matrix @ fact.G_eval(data.point)
