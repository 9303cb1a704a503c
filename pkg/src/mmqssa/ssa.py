"""Exact stochastic simulation of the open Michaelis-Menten master equations.

Two networks are provided: the full four-reaction mechanism and the
two-reaction reduction whose consumption propensity is the sQSSA rate law,
``k2*e_T*n_S/(K_M + n_S/omega)``.

Random numbers come from numpy's Philox4x64 (a counter-based generator) keyed
by a ``SeedSequence``; replica or sweep-point ``i`` uses
``SeedSequence(seed, spawn_key=(i, ...))``. Each simulation owns its
generator, so results do not depend on how work is spread over threads.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .deterministic import State2, jacobian
from .errors import AbsorbingStateWarning, DomainError, InsufficientBudgetError, InvalidParameterError
from .model import Parameters, derive, fixed_point

__all__ = [
    "CountState",
    "Reaction",
    "ReactionNetwork",
    "SsaTrajectory",
    "MomentEstimate",
    "build_full_network",
    "build_reduced_network",
    "make_generator",
    "simulate",
    "stationary_moments",
    "ensemble_moments",
    "slow_eigenvalue",
]

_CHUNK = 1 << 16
_NO_LIMIT = np.iinfo(np.int64).max


@dataclass(frozen=True)
class CountState:
    n_S: int
    n_C: int = 0
    n_P: int = 0
    E_T: int = 0

    def __post_init__(self) -> None:
        if min(self.n_S, self.n_C, self.n_P, self.E_T) < 0:
            raise InvalidParameterError(f"copy numbers must be >= 0: {self}")
        if self.n_C > self.E_T:
            raise InvalidParameterError(f"n_C = {self.n_C} exceeds E_T = {self.E_T}")

    def as_array(self) -> np.ndarray:
        return np.array([self.n_S, self.n_C, self.n_P], dtype=np.int64)


@dataclass(frozen=True)
class Reaction:
    name: str
    change: tuple[int, int, int]


@dataclass(frozen=True)
class ReactionNetwork:
    """Change vectors on ``(n_S, n_C, n_P)`` plus compiled propensities."""

    label: str
    params: Parameters
    E_T: int
    reactions: tuple[Reaction, ...]
    rates: np.ndarray = field(repr=False)

    @property
    def kind(self) -> int:
        return K.FULL if self.label == "full" else K.REDUCED

    @property
    def changes(self) -> np.ndarray:
        return np.array([rx.change for rx in self.reactions], dtype=np.int64)

    def propensities(self, state: CountState) -> np.ndarray:
        a = np.empty(len(self.reactions))
        K.propensities(self.kind, self.rates, state.n_S, state.n_C, a)
        return a

    def fixed_point_state(self) -> CountState:
        """Deterministic stationary point rounded to copy numbers."""
        fp = fixed_point(self.params)
        om = self.params.omega
        n_c = min(round(fp.nu * om), self.E_T) if self.label == "full" else 0
        return CountState(round(fp.gamma * om), n_c, 0, self.E_T)


def _enzyme_copies(params: Parameters) -> int:
    raw = params.e_T * params.omega
    E_T = round(raw)
    if abs(raw - E_T) > 1e-9:
        warnings.warn(f"e_T*omega = {raw!r} is not an integer; using E_T = {E_T}", stacklevel=3)
    if E_T < 1:
        raise InvalidParameterError(f"e_T*omega = {raw!r} rounds to fewer than one enzyme molecule")
    return E_T


def build_full_network(params: Parameters) -> ReactionNetwork:
    E_T = _enzyme_copies(params)
    om = params.omega
    return ReactionNetwork(
        label="full",
        params=params,
        E_T=E_T,
        reactions=(
            Reaction("influx", (1, 0, 0)),
            Reaction("binding", (-1, 1, 0)),
            Reaction("unbinding", (1, -1, 0)),
            Reaction("catalysis", (0, -1, 1)),
        ),
        rates=np.array([om * params.k0, params.k1 / om, params.k_m1, params.k2, float(E_T)]),
    )


def build_reduced_network(params: Parameters) -> ReactionNetwork:
    E_T = _enzyme_copies(params)
    d = derive(params)
    return ReactionNetwork(
        label="reduced",
        params=params,
        E_T=E_T,
        reactions=(
            Reaction("influx", (1, 0, 0)),
            Reaction("consumption", (-1, 0, 1)),
        ),
        rates=np.array([params.omega * params.k0, d.v, d.K_M, params.omega, 0.0]),
    )


def make_generator(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for stream ``key`` under master ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def slow_eigenvalue(params: Parameters) -> float:
    """Eigenvalue of the full Jacobian at the fixed point closest to zero."""
    fp = fixed_point(params)
    eig = np.linalg.eigvals(jacobian(State2(fp.gamma, fp.nu), params))
    return float(eig[np.argmin(np.abs(eig))].real)


@dataclass(frozen=True)
class SsaTrajectory:
    """Every event of one SSA run; row 0 is the initial state at t = 0."""

    times: np.ndarray
    counts: np.ndarray
    channels: np.ndarray
    t_end: float
    absorbed_at: float | None = None

    @property
    def events(self) -> int:
        return len(self.channels)

    def sample(self, grid) -> np.ndarray:
        """Copy numbers at the given times (the state is piecewise constant)."""
        idx = np.searchsorted(self.times, np.asarray(grid, dtype=float), side="right") - 1
        return self.counts[idx]

    def to_csv(self, path: str | Path | None = None, grid=None) -> str:
        """``t,n_S,n_C,n_P`` at every event, or on ``grid`` when given."""
        if grid is None:
            times, counts = self.times, self.counts
        else:
            times, counts = np.asarray(grid, dtype=float), self.sample(grid)
        lines = ["t,n_S,n_C,n_P"]
        lines += [f"{t:.17g},{x[0]},{x[1]},{x[2]}" for t, x in zip(times, counts)]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def simulate(
    network: ReactionNetwork,
    initial: CountState,
    t_end: float,
    seed: int,
    *,
    max_events: int | None = None,
) -> SsaTrajectory:
    """Direct-method SSA from ``initial`` until ``t_end`` (or ``max_events``).

    Emits an :class:`AbsorbingStateWarning` if every propensity vanishes first.
    """
    if network.label == "full" and initial.E_T != network.E_T:
        raise InvalidParameterError(f"initial E_T = {initial.E_T} but network has E_T = {network.E_T}")
    gen = make_generator(seed)
    x = initial.as_array()
    changes = network.changes
    limit = _NO_LIMIT if max_events is None else int(max_events)
    t = 0.0
    times, states, chans = [np.zeros(1)], [x[None, :].copy()], [np.zeros(0, dtype=np.int64)]
    counts = np.zeros(len(network.reactions), dtype=np.int64)
    acc = np.zeros(3)
    absorbed_at = None
    done = 0
    while done < limit:
        n = min(_CHUNK, limit - done)
        rec_t, rec_x, rec_ch = np.empty(n), np.empty((n, 3), dtype=np.int64), np.empty(n, dtype=np.int64)
        fired, t, status = K.advance(
            network.kind, network.rates, changes, x, t, float(t_end), n, gen, acc, counts, rec_t, rec_x, rec_ch
        )
        times.append(rec_t[:fired])
        states.append(rec_x[:fired])
        chans.append(rec_ch[:fired])
        done += fired
        if status == K.ABSORBED:
            absorbed_at = t
            warnings.warn(
                f"absorbing state {x.tolist()} reached at t = {t!r} before t_end = {t_end!r}",
                AbsorbingStateWarning,
                stacklevel=2,
            )
            break
        if status == K.REACHED:
            break
    return SsaTrajectory(
        times=np.concatenate(times),
        counts=np.concatenate(states),
        channels=np.concatenate(chans),
        t_end=float(t),
        absorbed_at=absorbed_at,
    )


@dataclass(frozen=True)
class MomentEstimate:
    """Stationary mean and variance of ``n_S`` with standard errors.

    For the long-trajectory estimator the errors are batch means over
    ``len(batch_means)`` consecutive, equally sized event batches; for the
    replica estimator they are the usual i.i.d. sample errors.
    """

    mean: float
    variance: float
    se_mean: float
    se_variance: float
    events: int
    burn_in: float
    seed: int
    label: str = ""
    duration: float = 0.0
    channel_counts: np.ndarray = field(default=None, repr=False)
    batch_means: np.ndarray = field(default=None, repr=False)
    batch_variances: np.ndarray = field(default=None, repr=False)
    batch_durations: np.ndarray = field(default=None, repr=False)
    batch_channel_counts: np.ndarray = field(default=None, repr=False)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def channel_rate_se(self, i: int, j: int) -> tuple[float, float]:
        """Difference of the firing rates of channels ``i`` and ``j`` and its batch SE."""
        diff = (self.batch_channel_counts[:, i] - self.batch_channel_counts[:, j]) / self.batch_durations
        total = (self.channel_counts[i] - self.channel_counts[j]) / self.duration
        return float(total), float(diff.std(ddof=1) / math.sqrt(len(diff)))

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "std": self.std,
            "se_mean": self.se_mean,
            "se_variance": self.se_variance,
            "events": int(self.events),
            "burn_in": self.burn_in,
            "seed": int(self.seed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _burn_in_time(params: Parameters, burn_in: float | None, relaxations: float) -> float:
    if burn_in is not None:
        return float(burn_in)
    return relaxations / abs(slow_eigenvalue(params))


def stationary_moments(
    network: ReactionNetwork,
    budget: int = 10**7,
    seed: int = 0,
    *,
    burn_in: float | None = None,
    burn_in_relaxations: float = 20.0,
    n_batches: int = 32,
    stream: tuple[int, ...] = (),
) -> MomentEstimate:
    """Time-averaged stationary moments of ``n_S`` from one long trajectory.

    Starts at the rounded fixed point, discards ``burn_in`` time units
    (default ``burn_in_relaxations/|slow eigenvalue|``), then spends the rest
    of ``budget`` events in ``n_batches`` equal batches.

    Raises:
        NoStationaryPointError: if ``alpha >= 1``.
        InsufficientBudgetError: if burn-in does not fit in the budget.
    """
    params = network.params
    burn = _burn_in_time(params, burn_in, burn_in_relaxations)
    gen = make_generator(seed, *stream)
    x = network.fixed_point_state().as_array()
    changes = network.changes
    m = len(network.reactions)
    empty_t, empty_x, empty_ch = np.empty(0), np.empty((0, 3), dtype=np.int64), np.empty(0, dtype=np.int64)

    scratch_acc, scratch_counts = np.zeros(3), np.zeros(m, dtype=np.int64)
    burn_events, t, status = K.advance(
        network.kind, network.rates, changes, x, 0.0, burn, int(budget), gen,
        scratch_acc, scratch_counts, empty_t, empty_x, empty_ch,
    )  # fmt: skip
    if status == K.ABSORBED:
        raise DomainError("absorbing state reached during burn-in")
    per_batch = (int(budget) - burn_events) // n_batches
    if status != K.REACHED or per_batch < 1:
        raise InsufficientBudgetError(
            f"budget of {budget} events leaves no room after burn-in "
            f"({burn_events} events to reach t = {burn:.6g})"
        )

    acc = np.zeros((n_batches, 3))
    counts = np.zeros((n_batches, m), dtype=np.int64)
    for b in range(n_batches):
        fired, t, status = K.advance(
            network.kind, network.rates, changes, x, t, math.inf, per_batch, gen,
            acc[b], counts[b], empty_t, empty_x, empty_ch,
        )  # fmt: skip
        if status == K.ABSORBED:
            raise DomainError("absorbing state reached during measurement")

    T, S1, S2 = acc.sum(axis=0)
    mean = S1 / T
    variance = S2 / T - mean * mean
    bm = acc[:, 1] / acc[:, 0]
    bv = acc[:, 2] / acc[:, 0] - 2 * mean * bm + mean * mean
    root_b = math.sqrt(n_batches)
    return MomentEstimate(
        mean=float(mean),
        variance=float(variance),
        se_mean=float(bm.std(ddof=1) / root_b),
        se_variance=float(bv.std(ddof=1) / root_b),
        events=burn_events + n_batches * per_batch,
        burn_in=burn,
        seed=seed,
        label=network.label,
        duration=float(T),
        channel_counts=counts.sum(axis=0),
        batch_means=bm,
        batch_variances=bv,
        batch_durations=acc[:, 0],
        batch_channel_counts=counts,
    )


def _replica(network: ReactionNetwork, burn: float, seed: int, stream: tuple[int, ...], r: int):
    gen = make_generator(seed, *stream, r)
    x = network.fixed_point_state().as_array()
    m = len(network.reactions)
    fired, _, status = K.advance(
        network.kind, network.rates, network.changes, x, 0.0, burn, _NO_LIMIT, gen,
        np.zeros(3), np.zeros(m, dtype=np.int64),
        np.empty(0), np.empty((0, 3), dtype=np.int64), np.empty(0, dtype=np.int64),
    )  # fmt: skip
    if status == K.ABSORBED:
        raise DomainError(f"replica {r} reached an absorbing state")
    return int(x[0]), fired


def ensemble_moments(
    network: ReactionNetwork,
    replicas: int,
    seed: int = 0,
    *,
    burn_in: float | None = None,
    burn_in_relaxations: float = 20.0,
    workers: int = 1,
    stream: tuple[int, ...] = (),
) -> MomentEstimate:
    """Moments of ``n_S`` across independent replicas observed at ``burn_in``.

    Replica ``r`` draws from stream ``(*stream, r)``; results are combined in
    replica order, so ``workers`` does not change the output.
    """
    if replicas < 2:
        raise InvalidParameterError("need at least two replicas")
    burn = _burn_in_time(network.params, burn_in, burn_in_relaxations)

    def run(r: int):
        return _replica(network, burn, seed, stream, r)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(run, range(replicas)))
    else:
        out = [run(r) for r in range(replicas)]
    samples = np.array([o[0] for o in out], dtype=float)
    events = sum(o[1] for o in out)
    mean = samples.mean()
    var = samples.var(ddof=1)
    m4 = np.mean((samples - mean) ** 4)
    return MomentEstimate(
        mean=float(mean),
        variance=float(var),
        se_mean=float(math.sqrt(var / replicas)),
        se_variance=float(math.sqrt(max(m4 - var * var, 0.0) / replicas)),
        events=int(events),
        burn_in=burn,
        seed=seed,
        label=network.label,
    )
