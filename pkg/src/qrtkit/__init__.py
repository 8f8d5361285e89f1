"""qrtkit: resource measures for quantum channels under affine free sets."""

from . import channels, divergences, hypothesis, linalg, measures, sdp, smoothing, theories
from .channels import ChoiChannel, LinearMap, Superchannel, apply, hadamard_channel, random_channel
from .divergences import dmax, entropy, petz_renyi, rel_entropy
from .errors import QrtError
from .hypothesis import beta_opt, chernoff_lower, neyman_pearson, stein_scan
from .measures import (MeasureOptions, MeasureResult, amortized_d_f, amortized_e_f, d_f,
                       d_state_resource, e_f, evaluate, lr_f, product_regularized, r_f,
                       thermo_capacity, tilde_r_f, underline_lr_f)
from .sdp import diamond_norm
from .smoothing import diamond_smoothed_lr, lr_eps, underline_lr_eps
from .theories import (AthermalityTheory, CoherenceTheory, ResourceTheory, stein_closure_check,
                       theory_from_json, validate_axioms)

__version__ = "0.1.0"
