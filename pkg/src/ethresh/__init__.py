"""Improved rejection thresholds for e-values under distributional assumptions."""

from .ebh import (
    BoostResult,
    DiscoverySet,
    boost_generic_ad,
    boost_generic_pr,
    boost_lcs_ad,
    boost_lcs_pr,
    ebh_reject,
    fdp,
    t_transform,
)
from .merging import FactorSpec, WeightVector, avg_tail_bound, avg_threshold, lambda_transform_class, product_class
from .models import (
    EProcessState,
    ExpFamSpec,
    GammaRegion,
    em_fit_gaussian_mixture,
    expfam_comonotone,
    gamma_constrained_mle,
    gamma_lr_evalue,
    gamma_sup_stat,
    gaussian_lr_evalue,
    gaussian_mixture_evalue,
    gaussian_sup_stat,
    gaussian_sup_type1,
    ui_split_lrt,
)
from .numerics import Bracket, BracketError, NumericError, RngStream, find_root, sample
from .thresholds import BoundedValue, EClass, calibrate, threshold, threshold_by_inversion, worst_case_error

__version__ = "0.1.0"
