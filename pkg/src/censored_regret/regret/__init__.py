from censored_regret.regret.bsaa import bsaa_action_cdf, bsaa_objective, psi_curves, worst_case_regret_bsaa
from censored_regret.regret.certificate import MonotonePoint, RegretCertificate
from censored_regret.regret.km import (
    CountProfile,
    KMActionModel,
    km_action_cdf,
    km_total_mass,
    psi_km,
    sample_complexity_km,
    worst_case_regret_km,
)

__all__ = [
    "CountProfile",
    "KMActionModel",
    "MonotonePoint",
    "RegretCertificate",
    "bsaa_action_cdf",
    "bsaa_objective",
    "km_action_cdf",
    "km_total_mass",
    "psi_curves",
    "psi_km",
    "sample_complexity_km",
    "worst_case_regret_bsaa",
    "worst_case_regret_km",
]
