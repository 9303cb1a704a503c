"""Vector fields of the full mass-action system and its reductions, plus a
fixed-step RK4 integrator.

One-dimensional reductions are fields in ``s`` alone; their ``c`` component
is reported as zero and ``c`` is recovered from the matching manifold when
needed (for instance to advance the product, ``dp/dt = k2*c``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import NamedTuple

import numba as nb
import numpy as np

from .errors import DivergenceError
from .model import Parameters, derive

__all__ = [
    "VectorFieldKind",
    "State2",
    "Trajectory",
    "eval_vf",
    "qss_manifold",
    "qea_manifold",
    "jacobian",
    "integrate",
]


class VectorFieldKind(str, Enum):
    FULL_MASS_ACTION = "full_mass_action"
    SQSSA = "sqssa"
    LINEAR_SQSSA = "linear_sqssa"
    QEA = "qea"
    QEA_SPECIAL = "qea_special"
    REVERSE_CLOSED = "reverse_closed"
    ZERO_ENZYME = "zero_enzyme"

    @property
    def code(self) -> int:
        return _KIND_CODES[self]

    @property
    def is_reduced(self) -> bool:
        return self in _REDUCED


_KIND_CODES = {kind: i for i, kind in enumerate(VectorFieldKind)}
_REDUCED = {
    VectorFieldKind.SQSSA,
    VectorFieldKind.LINEAR_SQSSA,
    VectorFieldKind.QEA,
    VectorFieldKind.QEA_SPECIAL,
}


class State2(NamedTuple):
    """Concentrations of substrate, complex and (optionally tracked) product."""

    s: float
    c: float
    p: float = 0.0


def _param_array(params: Parameters) -> np.ndarray:
    return np.array([params.k0, params.e_T, params.k1, params.k2, params.k_m1])


@nb.njit(cache=True)
def _rhs(kind, prm, s, c):
    k0, eT, k1, k2, km1 = prm[0], prm[1], prm[2], prm[3], prm[4]
    if kind == 0:  # full mass action
        bind = k1 * (eT - c) * s
        return k0 - bind + km1 * c, bind - (km1 + k2) * c, k2 * c
    if kind == 1:  # sQSSA
        KM = (km1 + k2) / k1
        cq = eT * s / (KM + s)
        return k0 - k2 * cq, 0.0, k2 * cq
    if kind == 2:  # small-s linear sQSSA
        KM = (km1 + k2) / k1
        cq = eT * s / KM
        return k0 - k2 * cq, 0.0, k2 * cq
    if kind == 3:  # QEA
        q = km1 + k1 * s
        ds = q * (k0 * q - k2 * k1 * eT * s) / (k1 * km1 * eT + q * q)
        return ds, 0.0, k2 * k1 * eT * s / q
    if kind == 4:  # special-case QEA
        KS = km1 / k1
        cq = eT * s / (KS + s)
        return k0 - k2 * cq, 0.0, k2 * cq
    if kind == 5:  # reverse QSSA of the closed reaction
        return 0.0, -k2 * c, k2 * c
    # zero enzyme: full field with eT = 0
    return k0 + k1 * c * s + km1 * c, -k1 * c * s - (km1 + k2) * c, k2 * c


@nb.njit(cache=True)
def _rk4(kind, prm, y0, times, clamp_c):
    n = times.shape[0]
    out = np.empty((n, 3))
    out[0, :] = y0
    s, c, p = y0[0], y0[1], y0[2]
    eT = prm[1]
    n_clamped = 0
    worst = 0.0
    for i in range(n - 1):
        h = times[i + 1] - times[i]
        a1, b1, d1 = _rhs(kind, prm, s, c)
        a2, b2, d2 = _rhs(kind, prm, s + 0.5 * h * a1, c + 0.5 * h * b1)
        a3, b3, d3 = _rhs(kind, prm, s + 0.5 * h * a2, c + 0.5 * h * b2)
        a4, b4, d4 = _rhs(kind, prm, s + h * a3, c + h * b3)
        s = s + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        c = c + h * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0
        p = p + h * (d1 + 2.0 * d2 + 2.0 * d3 + d4) / 6.0
        if not (np.isfinite(s) and np.isfinite(c) and np.isfinite(p)):
            return out, i + 1, n_clamped, worst
        if s < 0.0:
            worst = max(worst, -s)
            s = 0.0
            n_clamped += 1
        if c < 0.0:
            worst = max(worst, -c)
            c = 0.0
            n_clamped += 1
        if clamp_c and c > eT:
            worst = max(worst, c - eT)
            c = eT
            n_clamped += 1
        out[i + 1, 0] = s
        out[i + 1, 1] = c
        out[i + 1, 2] = p
    return out, -1, n_clamped, worst


def eval_vf(kind: VectorFieldKind | str, state: State2, params: Parameters) -> State2:
    """Time derivative of ``state`` under the chosen field.

    The third component is ``dp/dt = k2*c`` with ``c`` taken from the state
    (two-dimensional fields) or from the reduction's manifold (1-D fields).
    """
    kind = VectorFieldKind(kind)
    ds, dc, dp = _rhs(kind.code, _param_array(params), float(state[0]), float(state[1]))
    return State2(ds, dc, dp)


def qss_manifold(s, params: Parameters):
    """c-nullcline of the full system, ``c = e_T*s/(K_M + s)``."""
    K_M = (params.k_m1 + params.k2) / params.k1
    return params.e_T * s / (K_M + s)


def qea_manifold(s, params: Parameters):
    """Critical manifold of the QEA limit, ``c = e_T*s/(K_S + s)``."""
    K_S = params.k_m1 / params.k1
    return params.e_T * s / (K_S + s)


def jacobian(state: State2, params: Parameters) -> np.ndarray:
    """2x2 Jacobian of the full mass-action field with respect to ``(s, c)``."""
    s, c = float(state[0]), float(state[1])
    k1, k2, km1, eT = params.k1, params.k2, params.k_m1, params.e_T
    return np.array(
        [
            [-k1 * (eT - c), k1 * s + km1],
            [k1 * (eT - c), -k1 * s - km1 - k2],
        ]
    )


@dataclass(frozen=True)
class Trajectory:
    """Samples of a fixed-step integration.

    ``n_clamped`` counts how many times a negative concentration (or a complex
    concentration above ``e_T``) was reset to the boundary, and
    ``max_clamp`` is the largest such correction.
    """

    times: np.ndarray
    states: np.ndarray
    kind: VectorFieldKind
    step: float
    n_clamped: int = 0
    max_clamp: float = 0.0
    params: Parameters | None = field(default=None, compare=False)

    @property
    def s(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def c(self) -> np.ndarray:
        """Complex concentration; for 1-D reductions taken from their manifold."""
        if not self.kind.is_reduced or self.params is None:
            return self.states[:, 1]
        if self.kind in (VectorFieldKind.QEA, VectorFieldKind.QEA_SPECIAL):
            return qea_manifold(self.s, self.params)
        if self.kind is VectorFieldKind.LINEAR_SQSSA:
            return self.params.e_T * self.s / derive(self.params).K_M
        return qss_manifold(self.s, self.params)

    @property
    def p(self) -> np.ndarray:
        return self.states[:, 2]

    def __len__(self) -> int:
        return len(self.times)

    def to_csv(self, path: str | Path | None = None, *, with_product: bool = False) -> str:
        """Write ``t,s,c[,p]`` with 17 significant digits; returns the text."""
        header = ["t", "s", "c"] + (["p"] if with_product else [])
        columns = [self.times, self.s, self.c] + ([self.p] if with_product else [])
        lines = [",".join(header)]
        for row in zip(*columns):
            lines.append(",".join(f"{x:.17g}" for x in row))
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def integrate(
    kind: VectorFieldKind | str,
    initial: State2,
    t_end: float,
    step: float,
    params: Parameters,
) -> Trajectory:
    """Classical RK4 with a fixed step, sampling every step.

    The last step is shortened so that the final sample lands on ``t_end``.
    For the full field the step must resolve the fast transient:
    ``step <= t_C/10``.

    Raises:
        ValueError: on a non-positive step or end time, or a step too coarse
            for the full field.
        DivergenceError: if the state stops being finite.
    """
    kind = VectorFieldKind(kind)
    if not (step > 0 and math.isfinite(step)):
        raise ValueError(f"step must be > 0, got {step!r}")
    if not (t_end > 0 and math.isfinite(t_end)):
        raise ValueError(f"t_end must be > 0, got {t_end!r}")
    if kind is VectorFieldKind.FULL_MASS_ACTION:
        t_C = derive(params).t_C
        if step > t_C / 10 * (1 + 1e-12):
            raise ValueError(f"step {step:g} exceeds t_C/10 = {t_C / 10:g} for the full field")

    n_full = int(math.floor(t_end / step + 1e-9))
    times = step * np.arange(n_full + 1, dtype=float)
    if t_end - times[-1] > 1e-9 * step:
        times = np.append(times, t_end)
    else:
        times[-1] = t_end

    y0 = np.array([initial[0], initial[1], initial[2] if len(initial) > 2 else 0.0], dtype=float)
    if kind.is_reduced:
        y0[1] = 0.0
    clamp_c = kind in (VectorFieldKind.FULL_MASS_ACTION, VectorFieldKind.REVERSE_CLOSED)
    states, bad, n_clamped, worst = _rk4(kind.code, _param_array(params), y0, times, clamp_c)
    if bad >= 0:
        raise DivergenceError(float(times[bad]))
    return Trajectory(
        times=times,
        states=states,
        kind=kind,
        step=step,
        n_clamped=int(n_clamped),
        max_clamp=float(worst),
        params=params,
    )
