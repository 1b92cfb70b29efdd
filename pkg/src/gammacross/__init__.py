"""Distributions of weighted sums of independent gamma variables, and
numerical certification of how two such distribution functions cross.
"""

from ._version import ENGINE_VERSION, __version__
from .counterexample import (
    CounterexampleCertificate,
    VerificationReport,
    build_counterexample,
    verify_certificate,
)
from .crossing import (
    Classification,
    Crossing,
    CrossingReport,
    Sign,
    h_diff,
    lemma2_residual,
    near_zero_sign,
    perturbation_root_window,
    sign_profile,
    tail_sign,
    u_star,
)
from .densities import SmoothDensity, from_convolution, gamma_unit, mix
from .errors import (
    ConvergenceError,
    DomainError,
    GammaCrossError,
    SearchExhaustedError,
    UndecidedError,
)
from .gconv import (
    EcdfBand,
    GammaComponent,
    GammaConvolution,
    ecdf_band,
    h1_closed,
    h2_closed,
    make_convolution,
)
from .mixtures import (
    ModeStructure,
    StationaryPoint,
    bimodal_mixture,
    bimodality_window,
    exp_pair_logconcavity_sides,
    lemma3_lambda,
    logconcavity_check,
    mixcond_check,
    mixture_family_unimodal,
    mode_structure,
)
from .orders import (
    VMajWitness,
    log_majorizes,
    majorizes,
    slr_check,
    st_dominates,
    star_order_check,
    v_majorizes,
    v_majorizes_brute,
)

__all__ = [
    "__version__",
    "ENGINE_VERSION",
    "GammaCrossError",
    "DomainError",
    "ConvergenceError",
    "UndecidedError",
    "SearchExhaustedError",
    "GammaComponent",
    "GammaConvolution",
    "make_convolution",
    "EcdfBand",
    "ecdf_band",
    "h1_closed",
    "h2_closed",
    "SmoothDensity",
    "from_convolution",
    "gamma_unit",
    "mix",
    "majorizes",
    "log_majorizes",
    "VMajWitness",
    "v_majorizes",
    "v_majorizes_brute",
    "st_dominates",
    "star_order_check",
    "slr_check",
    "Sign",
    "Classification",
    "Crossing",
    "CrossingReport",
    "sign_profile",
    "near_zero_sign",
    "tail_sign",
    "perturbation_root_window",
    "u_star",
    "h_diff",
    "lemma2_residual",
    "ModeStructure",
    "StationaryPoint",
    "lemma3_lambda",
    "bimodality_window",
    "bimodal_mixture",
    "mode_structure",
    "logconcavity_check",
    "mixcond_check",
    "mixture_family_unimodal",
    "exp_pair_logconcavity_sides",
    "CounterexampleCertificate",
    "VerificationReport",
    "build_counterexample",
    "verify_certificate",
]
