"""Exact and Monte-Carlo density of states of finite quantum systems.

The volume of the constant-energy surface on the manifold of pure
states is an exact piecewise polynomial in the energy; this package
builds it from a spectrum, derives microcanonical thermodynamics
(entropy, temperature, specific heat, critical points, two-system
equilibration), connects to the canonical ensemble through the Laplace
transform, covers the three-level grand ensemble, and verifies it all
against Monte-Carlo sampling of random pure states.
"""

from .errors import (
    ConvergenceError,
    InvalidInputError,
    NoSolutionError,
    QmceError,
    ResourceLimitError,
    SpectrumParseError,
)
from .spectrum import (
    IsingChainSpec,
    Spectrum,
    format_spectrum,
    ising_spectrum,
    load_spectrum,
    make_spectrum,
)
from .piecewise import PiecewisePolynomial
from .dos import (
    PiecewiseDos,
    build_dos,
    eval_dos,
    eval_dos_derivative,
    eval_eq7_direct,
    integrate_dos,
)
from .grand import (
    GrandDos,
    grand_dos,
    grand_dos_general,
    marginalize_to_energy,
)
from .montecarlo import (
    McConfig,
    McEstimate,
    McEstimate2D,
    estimate_dos,
    estimate_grand,
    sample_state,
)
from .canonical import (
    CanonicalEval,
    beta_temperature_consistency,
    canonical_eval,
    nfold_dos,
    partition_closed,
    partition_stable,
    solve_thermal_energy,
    thermal_energy,
)
from .thermo import (
    CriticalPoint,
    EquilibrationResult,
    ThermoCurve,
    critical_points,
    energy_of_temperature,
    equilibrate,
    specific_heat_at_E,
    temperature,
    thermo_curve,
)

__all__ = [
    "CanonicalEval",
    "ConvergenceError",
    "CriticalPoint",
    "EquilibrationResult",
    "GrandDos",
    "InvalidInputError",
    "IsingChainSpec",
    "McConfig",
    "McEstimate",
    "McEstimate2D",
    "NoSolutionError",
    "PiecewiseDos",
    "PiecewisePolynomial",
    "QmceError",
    "ResourceLimitError",
    "Spectrum",
    "SpectrumParseError",
    "ThermoCurve",
    "beta_temperature_consistency",
    "build_dos",
    "canonical_eval",
    "critical_points",
    "energy_of_temperature",
    "equilibrate",
    "estimate_dos",
    "estimate_grand",
    "eval_dos",
    "eval_dos_derivative",
    "eval_eq7_direct",
    "format_spectrum",
    "grand_dos",
    "grand_dos_general",
    "integrate_dos",
    "ising_spectrum",
    "load_spectrum",
    "make_spectrum",
    "marginalize_to_energy",
    "nfold_dos",
    "partition_closed",
    "partition_stable",
    "sample_state",
    "solve_thermal_energy",
    "specific_heat_at_E",
    "temperature",
    "thermal_energy",
    "thermo_curve",
]
