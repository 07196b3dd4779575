"""Trajectory recording and chaos diagnostics for the similarity signal.

The solver state at step ``t`` is reduced to ``x_t = 1 - |L_t & L_final| / |L_final|``
where ``L_t`` is the candidate edge list after the t-th commit and
``L_final`` the edges of the solution.  ``x_t == 0`` means the state already
contains the whole solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class InsufficientDataError(ValueError):
    pass


class DegenerateSeriesError(ValueError):
    pass


class TraceRecorder:
    """Collects L_e membership deltas and cuts them into samples.

    Wire :meth:`on_le_change` to every edge insertion/removal and call
    :meth:`sample` once per committed step.  With ``decimation > 1`` only every
    k-th sample is kept; skipped deltas fold into the next kept one.
    """

    def __init__(self, decimation: int = 1):
        if decimation < 1:
            raise ValueError("decimation must be >= 1")
        self.decimation = decimation
        self.current: set[tuple[int, int]] = set()
        self.samples: list[tuple[tuple, tuple]] = []
        self.round_marks: list[int] = []
        self.seen = 0
        self._add: set = set()
        self._rm: set = set()

    def on_le_change(self, op: str, key: tuple[int, int]) -> None:
        if op == "add":
            self.current.add(key)
            if key in self._rm:
                self._rm.discard(key)
            else:
                self._add.add(key)
        else:
            self.current.discard(key)
            if key in self._add:
                self._add.discard(key)
            else:
                self._rm.add(key)

    def sample(self, *_args, force: bool = False) -> None:
        self.seen += 1
        if force or self.seen % self.decimation == 0:
            self.samples.append((tuple(sorted(self._add)), tuple(sorted(self._rm))))
            self._add.clear()
            self._rm.clear()

    def sample_edges(self, edges: Iterable[tuple[int, int]]) -> None:
        """Record a full edge set (used where no delta stream exists)."""
        new = set(edges)
        for key in sorted(self.current - new):
            self.on_le_change("remove", key)
        for key in sorted(new - self.current):
            self.on_le_change("add", key)
        self.sample()

    def mark_round(self) -> None:
        self.round_marks.append(len(self.samples))

    def flush(self) -> None:
        if self._add or self._rm:
            self.seen -= 1
            self.sample(force=True)

    def __len__(self) -> int:
        return len(self.samples)

    def finalize(self, final_edges: Iterable[tuple[int, int]]) -> np.ndarray:
        return difference_signal(self.samples, final_edges)


def difference_signal(snapshots, final_le) -> np.ndarray:
    """``1 - |S_t & F| / |F|`` for each snapshot.

    ``snapshots`` is either a sequence of edge collections or the delta stream
    of a :class:`TraceRecorder` (pairs of added/removed tuples).
    """
    final = {tuple(sorted(e)) for e in final_le}
    if not final:
        raise ValueError("final edge list is empty")
    size = len(final)
    out = np.empty(len(snapshots))
    if snapshots and _is_delta_stream(snapshots):
        cur: set = set()
        overlap = 0
        for t, (added, removed) in enumerate(snapshots):
            for e in removed:
                if e in cur:
                    cur.remove(e)
                    overlap -= e in final
            for e in added:
                if e not in cur:
                    cur.add(e)
                    overlap += e in final
            out[t] = 1.0 - overlap / size
        return out
    for t, snap in enumerate(snapshots):
        edges = {tuple(sorted(e)) for e in snap}
        out[t] = 1.0 - len(edges & final) / size
    return out


def _is_delta_stream(snapshots) -> bool:
    first = snapshots[0]
    return (
        isinstance(first, tuple)
        and len(first) == 2
        and all(isinstance(part, tuple) and all(isinstance(e, tuple) for e in part) for part in first)
    )


def _prepare(series, min_length: int) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if len(x) < min_length:
        raise InsufficientDataError(f"need at least {min_length} points, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    sd = x.std()
    if sd == 0 or sd < 1e-12 * max(1.0, abs(x.mean())):
        raise DegenerateSeriesError("series has zero variance")
    return (x - x.mean()) / sd


def first_acf_minimum(x: np.ndarray, max_lag: int | None = None) -> int:
    """Embedding delay: first local minimum (or first non-positive value) of the autocorrelation."""
    n = len(x)
    max_lag = max_lag or max(2, n // 10)
    y = x - x.mean()
    f = np.fft.rfft(y, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[: max_lag + 2]
    acf = acf / acf[0]
    for k in range(1, max_lag + 1):
        if acf[k] <= 0 or acf[k] < acf[k + 1]:
            return k
    return max_lag


def mean_period(x: np.ndarray) -> float:
    """Mean period from the power-spectrum-weighted mean frequency."""
    ps = np.abs(np.fft.rfft(x)) ** 2
    freqs = np.fft.rfftfreq(len(x))
    ps[0] = 0.0
    mf = float(np.sum(freqs * ps) / np.sum(ps))
    return 1.0 / mf if mf > 0 else float(len(x))


def delay_embed(x: np.ndarray, dim: int, lag: int) -> np.ndarray:
    m = len(x) - (dim - 1) * lag
    if m <= 0:
        raise InsufficientDataError("series too short for the embedding")
    return np.stack([x[i * lag: i * lag + m] for i in range(dim)], axis=1)


def divergence_curve(
    x: np.ndarray, emb_dim: int, lag: int, min_tsep: int, traj_len: int
) -> np.ndarray:
    """Mean log distance between nearest-neighbour trajectories, per step."""
    orbit = delay_embed(x, emb_dim, lag)
    m = len(orbit) - traj_len
    if m <= 2 * min_tsep + 1:
        raise InsufficientDataError("series too short for the requested trajectory length")
    pts = orbit[:m]
    sq = np.einsum("ij,ij->i", pts, pts)
    nn = np.empty(m, dtype=int)
    idx = np.arange(m)
    chunk = 512
    for s in range(0, m, chunk):
        block = pts[s: s + chunk]
        d = sq[s: s + chunk, None] + sq[None, :] - 2.0 * block @ pts.T
        rows = idx[s: s + chunk]
        d[np.abs(rows[:, None] - idx[None, :]) <= min_tsep] = np.inf
        nn[s: s + chunk] = np.argmin(d, axis=1)
    curve = np.empty(traj_len + 1)
    for k in range(traj_len + 1):
        dist = np.linalg.norm(orbit[idx + k] - orbit[nn + k], axis=1)
        dist = dist[dist > 0]
        curve[k] = np.mean(np.log(dist)) if len(dist) else -np.inf
    return curve


def _linear_region(curve: np.ndarray, frac: float) -> int:
    """Number of leading points to fit: up to where the curve covers ``frac`` of its rise."""
    finite = np.isfinite(curve)
    if not finite.all():
        curve = np.where(finite, curve, np.nanmin(curve[finite]) if finite.any() else 0.0)
    rise = curve.max() - curve[0]
    if rise <= 1e-9:
        return len(curve)
    target = curve[0] + frac * rise
    k = int(np.argmax(curve >= target))
    return max(k + 1, 3)


def lyapunov(
    series: Sequence[float],
    emb_dim: int = 3,
    lag: int | None = None,
    min_tsep: int | None = None,
    traj_len: int = 20,
    fit_fraction: float = 0.6,
    min_length: int = 500,
) -> float:
    """Largest Lyapunov exponent per sample step (Rosenstein et al.).

    The series is standardised, delay-embedded, each point is paired with its
    nearest neighbour outside a temporal exclusion window, and the slope of
    the mean log divergence is fitted over the initial linear rise.
    """
    x = _prepare(series, min_length)
    if lag is None:
        lag = first_acf_minimum(x)
    if min_tsep is None:
        min_tsep = int(math.ceil(mean_period(x)))
    curve = divergence_curve(x, emb_dim, lag, min_tsep, traj_len)
    k = _linear_region(curve, fit_fraction)
    ks = np.arange(k)
    slope = np.polyfit(ks, curve[:k], 1)[0]
    return float(slope)


def zero_one_test(
    series: Sequence[float],
    n_c: int = 100,
    seed: int = 0,
    ncut: int | None = None,
    min_length: int = 1000,
) -> float:
    """Gottwald-Melbourne 0-1 test, correlation method.

    Returns the median over ``n_c`` random frequencies ``c`` in
    ``(pi/5, 4pi/5)`` of ``corr(n, D_c(n))``, where ``D_c`` is the mean-square
    displacement of the translation variables minus its oscillatory term.
    """
    x = _prepare(series, min_length)
    n = len(x)
    ncut = ncut or n // 10
    rng = np.random.default_rng(seed)
    cs = rng.uniform(math.pi / 5, 4 * math.pi / 5, size=n_c)
    j = np.arange(1, n + 1)
    ex2 = x.mean() ** 2
    lags = np.arange(1, ncut + 1)
    size = 1 << int(math.ceil(math.log2(2 * n)))
    kc = np.empty(n_c)
    for i, c in enumerate(cs):
        msd = np.zeros(ncut)
        for trig in (np.cos, np.sin):
            p = np.cumsum(x * trig(j * c))
            sq = np.concatenate([[0.0], np.cumsum(p * p)])
            f = np.fft.rfft(p, size)
            cross = np.fft.irfft(f * np.conj(f), size)[1: ncut + 1]
            count = n - lags
            # sum_k p[k+n]^2 + p[k]^2 - 2 p[k] p[k+n] over k = 0..N-n-1
            tail = sq[n] - sq[lags]
            head = sq[n - lags]
            msd += (tail + head - 2.0 * cross) / count
        d = msd - ex2 * (1.0 - np.cos(lags * c)) / (1.0 - np.cos(c))
        if np.std(d) == 0:
            kc[i] = 0.0
        else:
            kc[i] = np.corrcoef(lags, d)[0, 1]
    return float(np.median(kc))


@dataclass
class ChaosStats:
    lyapunov: float | None
    k01: float | None
    datapoints: int
    status: str = "ok"


def analyze(
    series: Sequence[float],
    min_lyapunov: int = 500,
    min_zero_one: int = 1000,
    seed: int = 0,
) -> ChaosStats:
    """Both diagnostics, tolerating short or flat series (status says which)."""
    x = np.asarray(series, dtype=float)
    lam = k = None
    status = "ok"
    try:
        lam = lyapunov(x, min_length=min_lyapunov)
    except InsufficientDataError:
        status = "insufficient-data"
    except DegenerateSeriesError:
        status = "degenerate"
    try:
        k = zero_one_test(x, seed=seed, min_length=min_zero_one)
    except InsufficientDataError:
        status = "insufficient-data"
    except DegenerateSeriesError:
        status = "degenerate"
    return ChaosStats(lam, k, len(x), status)
