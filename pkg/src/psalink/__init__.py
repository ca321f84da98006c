"""Classical capacity of fiber links with noiseless phase-sensitive amplifiers."""
__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateChannelError, DomainError, InfeasibleError, NumericalFailure,
                     PreconditionError, PsaLinkError)
from .kernels import BACKEND
from .link import (EnergyBudget, LinkPlan, SignalState, additive_noise_of_link, apply_psa, node_powers,
                   power_gains, propagate_link, propagate_span, span_transmittance, total_power)
from .shannon import SnrPair, capacity_dual_quadrature, capacity_homodyne, snr
from .holevo import (ChannelMatrices, FiducialParams, GhResult, capacity_above_threshold,
                     capacity_below_threshold, capacity_coherent, compute_fiducial, g_function,
                     gh_capacity, threshold_energy, transcendental_residual)
from .continuous import (GainProfile, asymptotic_capacity_amplitude, asymptotic_capacity_power,
                         capacity_power_approx, exact_state_power, gain_profile_amplitude,
                         gain_profile_power, large_n_state_power, ode_integrate,
                         state_amplitude_restoration)
from .optimize import (OptimizationProblem, OptimizationResult, feasibility_check,
                       gains_amplitude_restoration, link_capacity, optimize)
from .montecarlo import SampleBatch, simulate_link
