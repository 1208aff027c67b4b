"""Potentials with equidistant spectra: finite-difference eigensolvers,
shift-operator potentials from an ODE, exact perturbation theory and the
thin-film thickness fit."""

__version__ = "0.1.0"

from .exceptions import (
    BranchInfeasibleError,
    DatasetError,
    EigenSolveError,
    EquispecError,
    GridError,
    IntegrationError,
    NonFiniteError,
    ResidualError,
    SingularityError,
    StepUnderflowError,
    UnsupportedFamilyError,
)
from .numerics import Grid1D, RKControls, build_hamiltonian, eigensolve, fd_derivative, integrate_rk
from .potentials import PotentialModel, UnitScale, evaluate, reference_spectrum
from .shift_ode import PRESETS, GeneratedPotential, ShiftOdeProblem, generate, preset
from .spectral import (
    SchrodingerSolver,
    apply_shift_operator,
    classify_states,
    solve_potential,
    spacing_report,
)
from .perturbation import correction_series, equidistance_verdict
from .expfit import FilmDataset, InverseLawRegressor, cross_validate_truncated, fit_inverse_law, load_dataset
