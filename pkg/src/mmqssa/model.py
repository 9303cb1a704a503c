"""Parameters, derived constants and regime classification for the open
Michaelis-Menten mechanism

    0 --k0--> S,    S + E <==k1 / k_m1==> C --k2--> E + P.

All quantities here are in concentration units. Conversion to copy numbers
happens only in :mod:`mmqssa.ssa`, through the volume ``omega``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Mapping

from .errors import InvalidParameterError, NoStationaryPointError

__all__ = [
    "Parameters",
    "DerivedConstants",
    "FixedPoint",
    "Thresholds",
    "RegimeReport",
    "Regime",
    "NearestTFPV",
    "derive",
    "fixed_point",
    "classify_regime",
    "beta_sweep_parameters",
    "SET_A",
]

# JSON key <-> attribute name
_JSON_KEYS = {"k0": "k0", "eT": "e_T", "k1": "k1", "k2": "k2", "km1": "k_m1", "omega": "omega"}


@dataclass(frozen=True)
class Parameters:
    """Rate constants of the open mechanism plus the system volume.

    Attributes:
        k0: substrate influx rate (concentration/time). ``k0 == 0`` is the
            closed reaction.
        e_T: total enzyme concentration.
        k1: binding rate constant (1/(concentration*time)).
        k2: catalytic rate constant (1/time).
        k_m1: dissociation rate constant (1/time).
        omega: system volume, i.e. copy numbers per unit concentration.
    """

    k0: float
    e_T: float
    k1: float
    k2: float
    k_m1: float
    omega: float = 1.0

    def __post_init__(self) -> None:
        for name in ("e_T", "k1", "k2", "k_m1", "omega"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be finite and > 0, got {value!r}")
        if not (math.isfinite(self.k0) and self.k0 >= 0):
            raise InvalidParameterError(f"k0 must be finite and >= 0, got {self.k0!r}")

    def replace(self, **changes: float) -> "Parameters":
        return Parameters(**{**asdict(self), **changes})

    def to_dict(self) -> dict[str, float]:
        return {key: float(getattr(self, attr)) for key, attr in _JSON_KEYS.items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Parameters":
        missing = [key for key in _JSON_KEYS if key not in data]
        extra = [key for key in data if key not in _JSON_KEYS]
        if missing or extra:
            raise InvalidParameterError(
                f"parameter object needs exactly the keys {sorted(_JSON_KEYS)}; "
                f"missing={missing} unexpected={extra}"
            )
        values = {}
        for key, attr in _JSON_KEYS.items():
            raw = data[key]
            if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                raise InvalidParameterError(f"{key} must be a number, got {raw!r}")
            values[attr] = float(raw)
        return cls(**values)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Parameters":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DerivedConstants:
    """Every dimensional constant and dimensionless qualifier of a parameter set.

    ``eps`` is ``None`` when ``alpha >= 1`` because it needs the fixed point.
    """

    K_M: float
    K_S: float
    v: float
    alpha: float
    beta: float
    lam: float
    eps_ss: float
    eps: float | None
    t_C: float
    t_S: float


@dataclass(frozen=True)
class FixedPoint:
    gamma: float
    nu: float


def derive(params: Parameters) -> DerivedConstants:
    p = params
    K_M = (p.k_m1 + p.k2) / p.k1
    K_S = p.k_m1 / p.k1
    v = p.k2 * p.e_T
    alpha = p.k0 / v
    eps = None
    if alpha < 1:
        gamma = alpha * K_M / (1 - alpha)
        nu = alpha * p.e_T
        eps = (p.e_T - nu) / (K_M + gamma)
    return DerivedConstants(
        K_M=K_M,
        K_S=K_S,
        v=v,
        alpha=alpha,
        beta=p.k2 / p.k_m1,
        lam=p.k0 / (p.k_m1 * p.e_T),
        eps_ss=p.e_T / K_M,
        eps=eps,
        t_C=1.0 / (p.k_m1 + p.k2),
        t_S=1.0 / (p.k1 * p.e_T),
    )


def fixed_point(params: Parameters) -> FixedPoint:
    """Stationary point ``(gamma, nu)`` of the mass-action equations.

    Raises:
        NoStationaryPointError: if ``alpha = k0/v >= 1``.
    """
    d = derive(params)
    if d.alpha >= 1:
        raise NoStationaryPointError(d.alpha)
    return FixedPoint(gamma=d.alpha * d.K_M / (1 - d.alpha), nu=d.alpha * params.e_T)


class NearestTFPV(str, Enum):
    PI1_SQSSA = "pi1_sqssa"
    PI3_QEA = "pi3_qea"
    NONE = "none"


class Regime(str, Enum):
    SINGULAR_PERTURBATION_SQSSA = "singular_perturbation_sqssa"
    SINGULAR_PERTURBATION_QEA = "singular_perturbation_qea"
    NEAR_INVARIANCE_ONLY = "near_invariance_only"
    NO_REDUCTION = "no_reduction"


@dataclass(frozen=True)
class Thresholds:
    """Cutoffs below which a qualifier counts as small (inclusive)."""

    eps_ss: float = 0.1
    alpha: float = 0.1
    beta: float = 0.1
    lam: float = 0.1


@dataclass(frozen=True)
class RegimeReport:
    eps_ss: float
    alpha: float
    beta: float
    lam: float
    discrepancy: float | None
    nearest_tfpv: NearestTFPV
    classification: Regime

    @property
    def qualifiers(self) -> dict[str, float | None]:
        return {
            "eps_ss": self.eps_ss,
            "alpha": self.alpha,
            "beta": self.beta,
            "lambda": self.lam,
            "discrepancy": self.discrepancy,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.qualifiers,
            "nearest_tfpv": self.nearest_tfpv.value,
            "classification": self.classification.value,
        }


def _discrepancy(alpha: float, beta: float) -> float:
    x = alpha * (1 - alpha)
    return x * beta / (1 + beta * (1 - x))


def classify_regime(params: Parameters, thresholds: Thresholds | None = None) -> RegimeReport:
    """Locate a parameter set relative to the sQSSA and QEA singular limits.

    Decision order:

    1. ``eps_ss`` and ``alpha`` small: close to pi1 (e_T, k0 -> 0), sQSSA.
    2. ``beta`` and ``lambda`` small: close to pi3 (k2, k0 -> 0), QEA.
    3. ``eps_ss`` small only: the QSS manifold is nearly invariant, but no
       critical manifold exists nearby.
    4. otherwise no reduction is supported.

    The discrepancy entry is ``None`` when ``alpha > 1``.
    """
    th = thresholds or Thresholds()
    d = derive(params)
    eps_small = d.eps_ss <= th.eps_ss
    alpha_small = d.alpha <= th.alpha
    qea_small = d.beta <= th.beta and d.lam <= th.lam

    if eps_small and alpha_small:
        nearest, regime = NearestTFPV.PI1_SQSSA, Regime.SINGULAR_PERTURBATION_SQSSA
    elif qea_small:
        nearest, regime = NearestTFPV.PI3_QEA, Regime.SINGULAR_PERTURBATION_QEA
    elif eps_small:
        nearest, regime = NearestTFPV.NONE, Regime.NEAR_INVARIANCE_ONLY
    else:
        nearest, regime = NearestTFPV.NONE, Regime.NO_REDUCTION

    return RegimeReport(
        eps_ss=d.eps_ss,
        alpha=d.alpha,
        beta=d.beta,
        lam=d.lam,
        discrepancy=_discrepancy(d.alpha, d.beta) if d.alpha <= 1 else None,
        nearest_tfpv=nearest,
        classification=regime,
    )


def beta_sweep_parameters(
    beta: float,
    *,
    K_M: float = 1000.0,
    e_T: float = 10.0,
    k1: float = 1.0,
    alpha: float = 0.5,
    omega: float = 1.0,
) -> Parameters:
    """Parameter set for the beta sweep with K_M, e_T, k1, alpha held fixed.

    ``k_m1 + k2 = k1*K_M`` is split so that ``k2/k_m1 = beta``; the influx is
    ``k0 = alpha*k2*e_T``. With the defaults ``e_T/K_M = 0.01`` and, at
    ``omega = 1``, the enzyme copy number is 10.
    """
    if beta <= 0:
        raise InvalidParameterError(f"beta must be > 0, got {beta!r}")
    total = k1 * K_M
    k2 = total * beta / (1 + beta)
    k_m1 = total / (1 + beta)
    return Parameters(k0=alpha * k2 * e_T, e_T=e_T, k1=k1, k2=k2, k_m1=k_m1, omega=omega)


SET_A = Parameters(k0=2500.0, e_T=10.0, k1=1.0, k2=500.0, k_m1=500.0, omega=1.0)
