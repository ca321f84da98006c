"""Sample-level simulation of a link, used as an independent check on the variance recursion.

Each sample carries a signal amplitude and a noise value per quadrature.
A span with transmittance tau followed by an amplifier with gain G maps

    x_q -> sqrt(G*tau) x_q + sqrt(G*(1-tau)) xi_q
    x_i -> sqrt(tau/G) x_i + sqrt((1-tau)/G) xi_i

with fresh vacuum draws ``xi ~ N(0, 1/2)``. The signal amplitude only sees
the deterministic factor, so the signal and noise estimates come from
separate sample columns.

Random numbers come from numpy's SFC64 generator, picked over PCG64 for
speed. The sample set is cut into fixed-size chunks, each seeded from
``SeedSequence(seed).spawn``, and chunk moments are merged in chunk order. Results are therefore bit-identical for a
given (plan, state, count, seed) on one platform, whatever the worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .link import VACUUM, LinkPlan, SignalState

MIN_COUNT = 1000
CHUNK = 1 << 17


@dataclass(frozen=True)
class SampleBatch:
    """Output quadrature samples of one chunk."""

    count: int
    x_q: np.ndarray
    x_i: np.ndarray
    seed: int | None


@dataclass
class _Moments:
    """Count, mean and central moment sums M2..M4 of a sample, mergeable exactly."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def of(cls, x: np.ndarray) -> "_Moments":
        mu = float(x.mean())
        d = x - mu
        d2 = d * d
        return cls(x.size, mu, float(d2.sum()), float((d2 * d).sum()), float((d2 * d2).sum()))

    def merge(self, o: "_Moments") -> "_Moments":
        if self.n == 0:
            return o
        if o.n == 0:
            return self
        na, nb = self.n, o.n
        n = na + nb
        delta = o.mean - self.mean
        dn = delta / n
        mean = self.mean + nb * dn
        m2 = self.m2 + o.m2 + delta * dn * na * nb
        m3 = (self.m3 + o.m3 + delta * dn * dn * na * nb * (na - nb)
              + 3.0 * dn * (na * o.m2 - nb * self.m2))
        m4 = (self.m4 + o.m4 + delta * dn ** 3 * na * nb * (na * na - na * nb + nb * nb)
              + 6.0 * dn * dn * (na * na * o.m2 + nb * nb * self.m2)
              + 4.0 * dn * (na * o.m3 - nb * self.m3))
        return _Moments(n, mean, m2, m3, m4)

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1)

    @property
    def stderr(self) -> float:
        """Large-sample standard error of the variance estimate."""
        var = self.m2 / self.n
        return math.sqrt(max(self.m4 / self.n - var * var, 0.0) / self.n)


def _factors(plan: LinkPlan):
    taus = plan.taus
    gains = np.concatenate((plan.gains_array, [1.0]))
    return [(math.sqrt(g * t), math.sqrt(g * (1 - t)), math.sqrt(t / g), math.sqrt((1 - t) / g))
            for t, g in zip(taus, gains)]


def _run_chunk(factors, state: SignalState, n: int, seq: np.random.SeedSequence):
    rng = np.random.Generator(np.random.SFC64(seq))
    sig_q = rng.standard_normal(n) * math.sqrt(state.s_q)
    sig_i = rng.standard_normal(n) * math.sqrt(state.s_i)
    noi_q = rng.standard_normal(n) * math.sqrt(state.n_q)
    noi_i = rng.standard_normal(n) * math.sqrt(state.n_i)
    vac = math.sqrt(VACUUM)
    amp_q = amp_i = 1.0
    xi = np.empty(n)
    for aq, bq, ai, bi in factors:
        amp_q *= aq
        amp_i *= ai
        rng.standard_normal(out=xi)
        noi_q *= aq
        noi_q += (bq * vac) * xi
        rng.standard_normal(out=xi)
        noi_i *= ai
        noi_i += (bi * vac) * xi
    sig_q *= amp_q
    sig_i *= amp_i
    return tuple(_Moments.of(x) for x in (sig_q, sig_i, noi_q, noi_i))


def simulate_link(plan: LinkPlan, state: SignalState, count: int, seed: int,
                  workers: int | None = None) -> tuple[SignalState, SignalState]:
    """Estimate output ``(s_q, s_i, n_q, n_i)`` and their standard errors by sampling.

    Input signal amplitudes are zero-mean Gaussian with variances ``(s_q, s_i)``
    and input noise has variances ``(n_q, n_i)``.
    """
    if count < MIN_COUNT:
        raise PreconditionError(f"count must be >= {MIN_COUNT}, got {count}")
    factors = _factors(plan)
    sizes = [CHUNK] * (count // CHUNK)
    if count % CHUNK:
        sizes.append(count % CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    workers = workers or min(len(sizes), os.cpu_count() or 1)
    if workers <= 1:
        parts = [_run_chunk(factors, state, n, s) for n, s in zip(sizes, seqs)]
    else:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda a: _run_chunk(factors, state, *a), zip(sizes, seqs)))
    total = [_Moments() for _ in range(4)]
    for part in parts:
        total = [t.merge(p) for t, p in zip(total, part)]
    est = SignalState(*(m.variance for m in total))
    err = SignalState(*(m.stderr for m in total))
    return est, err


def sample_link(plan: LinkPlan, state: SignalState, count: int, seed: int) -> SampleBatch:
    """Raw output quadratures (signal plus noise) for one seeded batch."""
    if count < 1:
        raise PreconditionError("count must be >= 1")
    factors = _factors(plan)
    rng = np.random.Generator(np.random.SFC64(seed))
    x_q = rng.standard_normal(count) * math.sqrt(state.s_q + state.n_q)
    x_i = rng.standard_normal(count) * math.sqrt(state.s_i + state.n_i)
    vac = math.sqrt(VACUUM)
    for aq, bq, ai, bi in factors:
        x_q = aq * x_q + bq * vac * rng.standard_normal(count)
        x_i = ai * x_i + bi * vac * rng.standard_normal(count)
    return SampleBatch(count, x_q, x_i, seed)
