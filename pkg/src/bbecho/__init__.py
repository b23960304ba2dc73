"""Loschmidt echo of a qubit dephasing against a transverse-field Ising bath,
free and under bang-bang pulse control.

Exact free-fermion (determinant) evaluation at arbitrary N, analytic
spin-star closed forms, and a 2^N exact-diagonalization oracle that
pins every numerical convention.
"""

__version__ = "0.1.0"

from .model import (ChainSpec, PulseSchedule, QubitSpec, SpecError, TimeGrid,
                    shifted_field, validate)
from .freefermion import (BdGMatrix, CorrelationMatrix, DegenerateFillingError,
                          Propagator, SpectralDecomp, build_bdg, diagonalize,
                          gaussian_overlap, ground_correlation, ground_energy,
                          propagator)
from .echo import (EchoPoint, EchoSeries, EffectiveGenerator, SweepRow,
                   coherence_offdiagonal, effective_bdg, loschmidt_effective,
                   loschmidt_free, loschmidt_pulsed, sweep, time_average)
from .spinstar import (EffectiveCoupling, MomentumMode, amplitude_closed_form,
                       effective_coupling, gamma_coefficient, gaussian_envelope,
                       modes)
from . import conventions, oracle

__all__ = [
    "__version__",
    "ChainSpec", "QubitSpec", "PulseSchedule", "TimeGrid", "SpecError",
    "validate", "shifted_field",
    "BdGMatrix", "SpectralDecomp", "CorrelationMatrix", "Propagator",
    "DegenerateFillingError", "build_bdg", "diagonalize", "ground_correlation",
    "ground_energy", "propagator", "gaussian_overlap",
    "EchoPoint", "EchoSeries", "EffectiveGenerator", "SweepRow",
    "loschmidt_free", "loschmidt_pulsed", "effective_bdg", "loschmidt_effective",
    "coherence_offdiagonal", "time_average", "sweep",
    "MomentumMode", "EffectiveCoupling", "modes", "effective_coupling",
    "amplitude_closed_form", "gamma_coefficient", "gaussian_envelope",
    "conventions", "oracle",
]
