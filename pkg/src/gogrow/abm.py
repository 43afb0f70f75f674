"""On-lattice go-or-grow agent-based model.

Motile agents move to a random nearest neighbour (aborted if occupied) and
switch to the proliferative phenotype at rate ``r``.  A proliferative
agent stays put for exactly ``tau``, then tries to place a motile daughter
on a random neighbour (aborted if occupied) and reverts to motile itself.

Markov events are drawn with a single exponential clock of total rate
``(motility_rate + r) * n_motile``; the deterministic division completions
are kept in a FIFO queue (all delays are equal, so completion order equals
switching order).
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np
from numba import njit

from .dde import IntegratorConfig, MeanFieldParams, mean_field_integrate
from .model import InvalidInputError

EMPTY, MOTILE, PROLIFERATIVE = 0, 1, 2


class ConsistencyError(RuntimeError):
    """Queue and lattice occupancy disagree (indicates a bug)."""


@dataclass(frozen=True)
class LatticeParams:
    n_dims: int = 2
    side: int = 100
    spacing: float = 1.0
    seeding: float = 0.05
    switch_rate: float = 1.0
    cycle_delay: float = 1.0
    motility_rate: float | None = None
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_dims not in (1, 2, 3):
            raise InvalidInputError("n_dims must be 1, 2 or 3")
        if int(self.side) != self.side or self.side < 1:
            raise InvalidInputError("side must be a positive integer")
        if not 0.0 <= self.seeding <= 1.0:
            raise InvalidInputError("seeding probability must lie in [0, 1]")
        if not (self.switch_rate > 0 and self.cycle_delay > 0):
            raise InvalidInputError("switch_rate and cycle_delay must be positive")
        if self.motility_rate is None:
            object.__setattr__(self, "motility_rate", 10.0 * self.switch_rate)
        if self.motility_rate < 0:
            raise InvalidInputError("motility_rate must be nonnegative")
        if self.boundary != "periodic":
            raise InvalidInputError("only periodic boundaries are supported")
        if self.spacing <= 0:
            raise InvalidInputError("spacing must be positive")

    @property
    def n_sites(self) -> int:
        return int(self.side) ** self.n_dims


_CASTS = {f.name: f.type for f in fields(LatticeParams)}


def load_lattice_params(path) -> LatticeParams:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    kwargs = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in _CASTS:
                raise InvalidInputError(f"{path}:{lineno}: unknown key {key!r}")
            if key in ("n_dims", "side"):
                kwargs[key] = int(value)
            elif key == "boundary":
                kwargs[key] = value
            else:
                kwargs[key] = float(value)
    return LatticeParams(**kwargs)


@dataclass(eq=False)
class AbmState:
    """Mutable simulation state.

    ``motile`` holds the sites of motile agents in its first ``n_motile``
    entries and ``slot[site]`` is the index of that site in ``motile``
    (-1 otherwise).  The division queue is a ring buffer of
    ``(completion_time, site)`` starting at ``q_head`` with ``q_size`` items.
    """

    params: LatticeParams
    occupancy: np.ndarray
    motile: np.ndarray
    slot: np.ndarray
    n_motile: int
    q_time: np.ndarray
    q_site: np.ndarray
    q_head: int
    q_size: int
    t: float
    rng: np.random.Generator

    @property
    def counts(self) -> tuple[int, int]:
        return self.n_motile, self.q_size

    def queue(self):
        idx = (self.q_head + np.arange(self.q_size)) % self.q_time.size
        return self.q_time[idx], self.q_site[idx]


def init(lp: LatticeParams, seed=None) -> AbmState:
    """Seed each site with a motile agent independently with probability P_s."""
    rng = np.random.default_rng(seed)
    K = lp.n_sites
    occ = (rng.random(K) < lp.seeding).astype(np.int8)
    sites = np.flatnonzero(occ).astype(np.int64)
    motile = np.full(K, -1, dtype=np.int64)
    motile[:sites.size] = sites
    slot = np.full(K, -1, dtype=np.int64)
    slot[sites] = np.arange(sites.size)
    return AbmState(lp, occ, motile, slot, int(sites.size),
                    np.zeros(K), np.zeros(K, dtype=np.int64), 0, 0, 0.0, rng)


@njit(cache=True, nogil=True)
def _neighbour(site, direction, n_dims, side):
    dim = direction // 2
    stride = 1
    for _ in range(dim):
        stride *= side
    coord = (site // stride) % side
    if direction % 2 == 0:
        new = coord + 1 if coord + 1 < side else 0
    else:
        new = coord - 1 if coord > 0 else side - 1
    return site + (new - coord) * stride


@njit(cache=True, nogil=True)
def _run_kernel(occ, motile, slot, n_motile, q_time, q_site, q_head, q_size, t,
                t_end, rec_times, out_m, out_p, rng, move_rate, switch_rate, tau,
                n_dims, side):
    K = occ.size
    rate_per_agent = move_rate + switch_rate
    p_switch = switch_rate / rate_per_agent if rate_per_agent > 0 else 0.0
    n_dirs = 2 * n_dims
    rec = 0
    n_rec = rec_times.size
    # the clock lives in an array: a plain loop-carried float is reset
    # between iterations under numba 0.66 in this loop
    clock = np.empty(1)
    clock[0] = t
    while True:
        t = clock[0]
        if n_motile > 0 and rate_per_agent > 0:
            t_markov = t + rng.exponential(1.0 / (rate_per_agent * n_motile))
        else:
            t_markov = np.inf
        t_queue = q_time[q_head] if q_size > 0 else np.inf
        t_next = min(t_markov, t_queue)
        # record the piecewise-constant state up to the next event
        while rec < n_rec and rec_times[rec] < t_next and rec_times[rec] <= t_end:
            out_m[rec] = n_motile
            out_p[rec] = q_size
            rec += 1
        if t_next > t_end:
            clock[0] = t_end
            break
        t = t_next
        clock[0] = t
        if t_queue <= t_markov:
            # division attempt; the pending exponential is discarded (memoryless)
            site = q_site[q_head]
            q_head = q_head + 1 if q_head + 1 < K else 0
            q_size -= 1
            occ[site] = 1
            motile[n_motile] = site
            slot[site] = n_motile
            n_motile += 1
            nb = _neighbour(site, rng.integers(0, n_dirs), n_dims, side)
            if occ[nb] == 0:
                occ[nb] = 1
                motile[n_motile] = nb
                slot[nb] = n_motile
                n_motile += 1
        else:
            i = rng.integers(0, n_motile)
            site = motile[i]
            if rng.random() < p_switch:
                last = motile[n_motile - 1]
                motile[i] = last
                slot[last] = i
                slot[site] = -1
                n_motile -= 1
                occ[site] = 2
                tail = q_head + q_size
                if tail >= K:
                    tail -= K
                q_time[tail] = t + tau
                q_site[tail] = site
                q_size += 1
            else:
                nb = _neighbour(site, rng.integers(0, n_dirs), n_dims, side)
                if occ[nb] == 0:
                    occ[nb] = 1
                    occ[site] = 0
                    motile[i] = nb
                    slot[nb] = i
                    slot[site] = -1
    return n_motile, q_head, q_size, clock[0]


@dataclass(frozen=True, eq=False)
class DensitySeries:
    t: np.ndarray
    m_density: np.ndarray
    p_density: np.ndarray

    @property
    def total_density(self) -> np.ndarray:
        return self.m_density + self.p_density


def record_times(t0: float, t_end: float, record_dt: float) -> np.ndarray:
    n = int(math.floor((t_end - t0) / record_dt + 1e-9))
    return t0 + record_dt * np.arange(n + 1)


def run(state: AbmState, t_end: float, record_dt: float, check: bool = False) -> DensitySeries:
    """Advance ``state`` to ``t_end`` and return densities every ``record_dt``."""
    if not t_end > state.t:
        raise InvalidInputError("t_end must exceed the current time")
    if not record_dt > 0:
        raise InvalidInputError("record_dt must be positive")
    lp = state.params
    times = record_times(state.t, t_end, record_dt)
    out_m = np.zeros(times.size, dtype=np.int64)
    out_p = np.zeros(times.size, dtype=np.int64)
    n_motile, q_head, q_size, t = _run_kernel(
        state.occupancy, state.motile, state.slot, state.n_motile, state.q_time,
        state.q_site, state.q_head, state.q_size, state.t, float(t_end), times,
        out_m, out_p, state.rng, float(lp.motility_rate), float(lp.switch_rate),
        float(lp.cycle_delay), lp.n_dims, int(lp.side))
    state.n_motile, state.q_head, state.q_size, state.t = int(n_motile), int(q_head), int(q_size), t
    if check:
        check_consistency(state)
    K = lp.n_sites
    return DensitySeries(times, out_m / K, out_p / K)


def check_consistency(state: AbmState) -> None:
    """Verify counts, slot bookkeeping and queue discipline."""
    occ = state.occupancy
    motile_sites = np.flatnonzero(occ == MOTILE)
    prolif_sites = np.flatnonzero(occ == PROLIFERATIVE)
    if motile_sites.size != state.n_motile:
        raise ConsistencyError("motile count does not match occupancy")
    listed = state.motile[:state.n_motile]
    if not np.array_equal(np.sort(listed), motile_sites):
        raise ConsistencyError("motile list does not match occupancy")
    if np.any(state.slot[listed] != np.arange(state.n_motile)):
        raise ConsistencyError("slot index out of sync")
    qt, qs = state.queue()
    if not np.array_equal(np.sort(qs), prolif_sites):
        raise ConsistencyError("each proliferative site needs exactly one queue entry")
    if qt.size and (np.any(np.diff(qt) < 0) or qt[0] < state.t
                    or qt[-1] > state.t + state.params.cycle_delay):
        raise ConsistencyError("queue times out of order or outside (t, t + tau]")


def spawn_seeds(master: int, n: int) -> list[np.random.SeedSequence]:
    """Independent per-run streams derived from ``(master, run index)``."""
    return np.random.SeedSequence(master).spawn(n)


def simulate(lp: LatticeParams, seed, t_end: float, record_dt: float) -> DensitySeries:
    return run(init(lp, seed), t_end, record_dt)


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    t: np.ndarray
    mean: dict
    std: dict
    runs: list


def ensemble(lp: LatticeParams, seeds, t_end: float, record_dt: float,
             threads: int | None = None) -> EnsembleResult:
    """Pointwise mean and (sample) standard deviation over independent runs."""
    seeds = list(seeds)
    if len(seeds) < 2:
        raise InvalidInputError("an ensemble needs at least two seeds")
    threads = threads or min(len(seeds), os.cpu_count() or 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            runs = list(pool.map(lambda s: simulate(lp, s, t_end, record_dt), seeds))
    else:
        runs = [simulate(lp, s, t_end, record_dt) for s in seeds]
    mean, std = {}, {}
    for key in ("m_density", "p_density", "total_density"):
        data = np.array([getattr(r, key) for r in runs])
        mean[key] = data.mean(axis=0)
        std[key] = data.std(axis=0, ddof=1)
    return EnsembleResult(runs[0].t, mean, std, runs)


def mean_field_density(lp: LatticeParams, t_end: float, steps_per_delay: int = 200):
    """Mean-field prediction for a uniformly seeded lattice.

    Returns the ``MeanFieldSeries`` with ``K = n_sites`` and
    ``m0 = seeding * K``.
    """
    K = lp.n_sites
    mf = MeanFieldParams(lp.switch_rate, lp.cycle_delay, K, lp.seeding * K)
    return mean_field_integrate(mf, IntegratorConfig(steps_per_delay, t_end, False))
