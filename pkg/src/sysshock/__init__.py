"""Default dependence under a systemic shock.

Lifetimes T_j = min(X_j, X_0) where the systemic shock X_0 is the first of
Y_0, ..., Y_d and each Y_j may depend on the idiosyncratic X_j through an
Archimedean copula.
"""
__version__ = "0.1.0"

from ._accel import BACKEND
from .archimedean import ArchimedeanGenerator, DomainError, Family, PairCopula
from .calibration import CalibrationOptions, CalibrationResult, TauMatrix, calibrate, objective, riskiness_report
from .dependence import (
    KhoudrajiSpec,
    M2Copula,
    improper_tail_integral,
    kendall_fn_generic_pair,
    kendall_fn_khoudraji,
    kendall_fn_lifetimes,
    pair_tau,
    tau_khoudraji,
    tau_lifetimes,
    tau_matrix,
    tau_systemic,
)
from .market_data import extract_intensities, load_spreads, yearly_empirical_taus
from .montecarlo import SimulationConfig, empirical_simultaneous, empirical_tau, sample_model
from .shock_model import (
    ModelParams,
    ValidationError,
    from_intensities,
    joint_survival_T,
    marginal_survival_X,
    pair_survival_copula,
    simultaneous_default_prob,
    survival_copula_T,
)
