"""Signal and noise variances through alternating loss spans and phase-sensitive amplifiers.

Quadrature Q is the amplified one for G > 1. Vacuum variance is 1/2 per
quadrature. Amplifiers are assumed phase-aligned with the modulation basis,
so the two quadratures never mix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DomainError

VACUUM = 0.5


@dataclass(frozen=True)
class SignalState:
    """Ensemble signal powers and noise variances, per quadrature, in photon units."""

    s_q: float
    s_i: float
    n_q: float
    n_i: float

    def __post_init__(self):
        for name in ("s_q", "s_i", "n_q", "n_i"):
            v = getattr(self, name)
            if not v >= 0.0:
                raise DomainError(f"{name} must be >= 0, got {v!r}")

    @classmethod
    def coherent_q(cls, nbar: float) -> "SignalState":
        """Coherent states with the whole budget ``2*nbar`` on quadrature Q."""
        return cls(2.0 * nbar, 0.0, VACUUM, VACUUM)

    @classmethod
    def coherent_split(cls, nbar: float) -> "SignalState":
        """Coherent states with the budget shared equally by both quadratures."""
        return cls(nbar, nbar, VACUUM, VACUUM)

    @classmethod
    def vacuum(cls) -> "SignalState":
        return cls(0.0, 0.0, VACUUM, VACUUM)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.s_q, self.s_i, self.n_q, self.n_i)

    @property
    def nbar(self) -> float:
        """Mean signal photon number implied by the signal powers."""
        return 0.5 * (self.s_q + self.s_i)


@dataclass(frozen=True)
class EnergyBudget:
    nbar: float

    def __post_init__(self):
        if not self.nbar >= 0.0:
            raise DomainError(f"nbar must be >= 0, got {self.nbar!r}")

    @property
    def total_power(self) -> float:
        """Largest total power allowed anywhere in the link, ``2*nbar + 1``."""
        return 2.0 * self.nbar + 1.0


@dataclass(frozen=True)
class LinkPlan:
    """Physical layout of a link.

    Parameters
    ----------
    alpha : float
        Attenuation coefficient in 1/km.
    total_length : float
        Link length L in km.
    amp_positions : sequence of float
        Amplifier offsets from the input in km, strictly increasing in (0, L].
    amp_gains : sequence of float
        Positive gain of each amplifier (Q multiplied, I divided).
    """

    alpha: float
    total_length: float
    amp_positions: tuple[float, ...] = ()
    amp_gains: tuple[float, ...] = ()
    _taus: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "amp_positions", tuple(float(x) for x in self.amp_positions))
        object.__setattr__(self, "amp_gains", tuple(float(x) for x in self.amp_gains))
        if not self.alpha >= 0.0 or not math.isfinite(self.alpha):
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not self.total_length > 0.0 or not math.isfinite(self.total_length):
            raise DomainError(f"total_length must be finite and > 0, got {self.total_length!r}")
        if len(self.amp_positions) != len(self.amp_gains):
            raise DomainError("amp_positions and amp_gains must have the same length")
        prev = 0.0
        for x in self.amp_positions:
            if not (prev < x <= self.total_length):
                raise DomainError(
                    f"amplifier positions must be strictly increasing in (0, {self.total_length}], got {self.amp_positions}"
                )
            prev = x
        for g in self.amp_gains:
            if not (g > 0.0 and math.isfinite(g)):
                raise DomainError(f"gains must be finite and > 0, got {g!r}")
        edges = np.array((0.0,) + self.amp_positions + (self.total_length,))
        taus = np.exp(-self.alpha * np.diff(edges))
        taus.setflags(write=False)
        object.__setattr__(self, "_taus", np.ascontiguousarray(taus))

    @classmethod
    def equally_spaced(cls, alpha: float, total_length: float, count: int,
                       gains: Sequence[float] | float = 1.0) -> "LinkPlan":
        """``count`` amplifiers at ``i*L/(count+1)``, so all spans have equal length."""
        if count < 0:
            raise DomainError("amplifier count must be >= 0")
        positions = [total_length * (i + 1) / (count + 1) for i in range(count)]
        if np.isscalar(gains):
            gains = [float(gains)] * count
        return cls(alpha, total_length, tuple(positions), tuple(gains))

    @property
    def amp_count(self) -> int:
        return len(self.amp_gains)

    @property
    def span_lengths(self) -> np.ndarray:
        edges = np.array((0.0,) + self.amp_positions + (self.total_length,))
        return np.diff(edges)

    @property
    def taus(self) -> np.ndarray:
        """Span transmittances, ``amp_count + 1`` entries (the last is the final span)."""
        return self._taus

    @property
    def gains_array(self) -> np.ndarray:
        return np.ascontiguousarray(self.amp_gains, dtype=float)

    @property
    def tau_total(self) -> float:
        return math.exp(-self.alpha * self.total_length)

    @property
    def gain_total(self) -> float:
        return float(np.prod(self.amp_gains)) if self.amp_gains else 1.0

    def with_gains(self, gains: Sequence[float]) -> "LinkPlan":
        return LinkPlan(self.alpha, self.total_length, self.amp_positions, tuple(gains))

    def split(self, at: float) -> tuple["LinkPlan", "LinkPlan"]:
        """Cut the link at an interior point ``at`` into two consecutive plans.

        An amplifier located exactly at ``at`` stays with the first part.
        """
        if not 0.0 < at < self.total_length:
            raise DomainError("split point must lie strictly inside the link")
        first = [(p, g) for p, g in zip(self.amp_positions, self.amp_gains) if p <= at]
        second = [(p - at, g) for p, g in zip(self.amp_positions, self.amp_gains) if p > at]
        a = LinkPlan(self.alpha, at, tuple(p for p, _ in first), tuple(g for _, g in first))
        b = LinkPlan(self.alpha, self.total_length - at,
                     tuple(p for p, _ in second), tuple(g for _, g in second))
        return a, b


def span_transmittance(alpha: float, length: float) -> float:
    if alpha < 0 or length < 0:
        raise DomainError(f"alpha and length must be >= 0, got alpha={alpha!r}, length={length!r}")
    return math.exp(-alpha * length)


def propagate_span(state: SignalState, tau: float) -> SignalState:
    """Pure loss: signals scale by tau, noise relaxes towards vacuum."""
    if not 0.0 < tau <= 1.0:
        raise DomainError(f"transmittance must lie in (0, 1], got {tau!r}")
    vac = VACUUM * (1.0 - tau)
    return SignalState(tau * state.s_q, tau * state.s_i, tau * state.n_q + vac, tau * state.n_i + vac)


def apply_psa(state: SignalState, gain: float) -> SignalState:
    """Noiseless phase-sensitive gain: Q powers times G, I powers divided by G."""
    if not gain > 0.0:
        raise DomainError(f"gain must be > 0, got {gain!r}")
    return SignalState(gain * state.s_q, state.s_i / gain, gain * state.n_q, state.n_i / gain)


_EMPTY = np.zeros(0)


def propagate_link(plan: LinkPlan, state: SignalState) -> SignalState:
    out = kernels.fold_link(plan.taus, plan.gains_array, *state.as_tuple(), _EMPTY)
    return SignalState(*(max(float(v), 0.0) for v in out))


def node_powers(plan: LinkPlan, state: SignalState) -> np.ndarray:
    """Total power after each amplifier and at the output (``amp_count + 1`` values)."""
    buf = np.zeros(plan.amp_count + 1)
    kernels.fold_link(plan.taus, plan.gains_array, *state.as_tuple(), buf)
    return buf


def additive_noise_of_link(plan: LinkPlan) -> tuple[float, float]:
    """Noise the link adds on its own, i.e. the output noise for a noiseless input."""
    _, _, n_q, n_i = kernels.fold_link(plan.taus, plan.gains_array, 0.0, 0.0, 0.0, 0.0, _EMPTY)
    return float(n_q), float(n_i)


def power_gains(plan: LinkPlan) -> tuple[float, float]:
    """Net variance multipliers ``(tau_tot*G_tot, tau_tot/G_tot)`` of the two quadratures.

    Computed by folding unit signal powers so that large intermediate gain
    products never form.
    """
    s_q, s_i, _, _ = kernels.fold_link(plan.taus, plan.gains_array, 1.0, 1.0, 0.0, 0.0, _EMPTY)
    return float(s_q), float(s_i)


def total_power(state: SignalState) -> float:
    return state.s_q + state.s_i + state.n_q + state.n_i
