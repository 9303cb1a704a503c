"""Stationary linear-noise variances of the substrate copy number.

Closed forms for the full and the reduced (sQSSA) master equations, the
relative discrepancy between them, and an independent check that solves the
2x2 Lyapunov equation ``J S + S J^T + D = 0`` directly.

Variances are in copy-number units (variance of ``n_S``) unless
``units="concentration"`` is requested, which divides by ``omega**2``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .deterministic import State2, jacobian
from .errors import LyapunovError, NoStationaryPointError
from .model import Parameters, derive, fixed_point

__all__ = [
    "LnaResult",
    "sigma2_full",
    "sigma2_red",
    "sigma2_red_lyapunov",
    "stationary_covariance",
    "lyapunov_cross_check",
    "discrepancy",
    "discrepancy_from_variances",
    "lna_result",
]

# (n_S, n_C) change vectors of influx, binding, unbinding, catalysis
_CHANGES = np.array([[1, 0], [-1, 1], [1, -1], [0, -1]], dtype=float)


def _scale(params: Parameters, units: str) -> float:
    if units == "count":
        return 1.0
    if units == "concentration":
        return 1.0 / params.omega**2
    raise ValueError(f"units must be 'count' or 'concentration', got {units!r}")


def sigma2_full(params: Parameters, *, units: str = "count", eps: float | None = None) -> float:
    """Stationary variance of ``n_S`` under the full CME.

    ``eps`` overrides ``(e_T - nu)/(K_M + gamma)``; passing ``0`` gives the
    limit used to derive the discrepancy formula.
    """
    d = derive(params)
    gamma = fixed_point(params).gamma
    e = d.eps if eps is None else eps
    bracket = 1 + (gamma / d.K_M) * ((d.K_S + gamma) / (d.K_M + gamma)) / (1 + e)
    return params.omega * gamma * bracket * _scale(params, units)


def sigma2_red(params: Parameters, *, units: str = "count") -> float:
    """Stationary variance of ``n_S`` under the reduced (sQSSA) CME."""
    d = derive(params)
    gamma = fixed_point(params).gamma
    return params.omega * gamma * (1 + gamma / d.K_M) * _scale(params, units)


def sigma2_red_lyapunov(params: Parameters) -> float:
    """Scalar balance ``2|J_red| var = D_red`` for the one-species reduction."""
    d = derive(params)
    gamma = fixed_point(params).gamma
    j_red = d.v * d.K_M / (d.K_M + gamma) ** 2
    # influx and consumption propensities are equal at the fixed point
    d_red = 2 * params.omega * params.k0
    return d_red / (2 * j_red)


def stationary_covariance(params: Parameters) -> np.ndarray:
    """2x2 stationary LNA covariance of ``(n_S, n_C)``.

    Solves the three independent entries of ``J S + S J^T + D = 0`` as one
    3x3 linear system.
    """
    fp = fixed_point(params)
    p = params
    J = jacobian(State2(fp.gamma, fp.nu), p)
    om = p.omega
    flux = np.array(
        [
            om * p.k0,
            om * p.k1 * (p.e_T - fp.nu) * fp.gamma,
            om * p.k_m1 * fp.nu,
            om * p.k2 * fp.nu,
        ]
    )
    D = (_CHANGES.T * flux) @ _CHANGES
    (a, b), (c, d) = J
    # unknowns (S11, S12, S22)
    A = np.array(
        [
            [2 * a, 2 * b, 0.0],
            [c, a + d, b],
            [0.0, 2 * c, 2 * d],
        ]
    )
    rhs = -np.array([D[0, 0], D[0, 1], D[1, 1]])
    if np.any(np.linalg.eigvals(J).real >= 0) or abs(np.linalg.det(A)) <= 1e-14 * np.abs(A).max() ** 3:
        raise LyapunovError("Lyapunov system is singular: Jacobian is not Hurwitz")
    s11, s12, s22 = np.linalg.solve(A, rhs)
    return np.array([[s11, s12], [s12, s22]])


def lyapunov_cross_check(params: Parameters) -> float:
    """Substrate variance from the numeric Lyapunov solve (count units)."""
    return float(stationary_covariance(params)[0, 0])


def discrepancy(params: Parameters) -> float:
    """Relative gap between full and reduced variances with ``eps`` set to zero.

    Defined for ``0 <= alpha <= 1``; vanishes at both ends.

    Raises:
        NoStationaryPointError: if ``alpha > 1``.
    """
    d = derive(params)
    if d.alpha > 1:
        raise NoStationaryPointError(d.alpha)
    x = d.alpha * (1 - d.alpha)
    return x * d.beta / (1 + d.beta * (1 - x))


def discrepancy_from_variances(params: Parameters) -> float:
    """Same quantity computed from the two variance formulas (needs ``alpha < 1``)."""
    full0 = sigma2_full(params, eps=0.0)
    return abs(full0 - sigma2_red(params)) / full0


@dataclass(frozen=True)
class LnaResult:
    sigma2_full: float
    sigma2_red: float
    sigma2_full_lyapunov: float
    discrepancy: float

    def to_dict(self) -> dict[str, float]:
        out = asdict(self)
        out["sigma2_lyapunov"] = out.pop("sigma2_full_lyapunov")
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def lna_result(params: Parameters) -> LnaResult:
    return LnaResult(
        sigma2_full=sigma2_full(params),
        sigma2_red=sigma2_red(params),
        sigma2_full_lyapunov=lyapunov_cross_check(params),
        discrepancy=discrepancy(params),
    )
