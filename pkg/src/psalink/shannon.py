"""Classical capacities from output signal-to-noise ratios, in bits per channel use."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .link import SignalState


@dataclass(frozen=True)
class SnrPair:
    snr_q: float
    snr_i: float

    def __post_init__(self):
        if not (self.snr_q >= 0.0 and self.snr_i >= 0.0):
            raise DomainError(f"SNRs must be >= 0, got {self.snr_q!r}, {self.snr_i!r}")

    @property
    def snr_q_db(self) -> float:
        return 10.0 * math.log10(self.snr_q) if self.snr_q > 0 else -math.inf


def snr(state: SignalState) -> SnrPair:
    if not (state.n_q > 0.0 and state.n_i > 0.0):
        raise DomainError("noise variance must be > 0 in both quadratures to form an SNR")
    return SnrPair(state.s_q / state.n_q, state.s_i / state.n_i)


def _half_log2_1p(x: float) -> float:
    return 0.5 * math.log1p(x) / math.log(2.0)


def capacity_homodyne(snr_q: float) -> float:
    """Single-quadrature Shannon-Hartley capacity ``0.5*log2(1 + snr_q)``.

    The caller is expected to have put the whole budget on Q.
    """
    if not snr_q >= 0.0:
        raise DomainError(f"snr_q must be >= 0, got {snr_q!r}")
    return _half_log2_1p(snr_q)


def capacity_dual_quadrature(pair: SnrPair) -> float:
    """Both quadratures used as independent Gaussian channels.

    No extra vacuum unit is added for heterodyne detection; the sum of the two
    single-quadrature terms is returned as is.
    """
    return _half_log2_1p(pair.snr_q) + _half_log2_1p(pair.snr_i)
