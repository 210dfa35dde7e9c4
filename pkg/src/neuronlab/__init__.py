"""neuronlab: numerical verification of neuron linear-independence criteria."""

from .expr import (
    EvalFlag,
    ScalarExpr,
    SignedLogValue,
    compose,
    const,
    differentiate,
    eval_expr,
    eval_grid,
    eval_log_domain,
    exp_,
    ipow,
    log_,
    parse_text,
    rpow,
    sigmoid_,
    snorm,
    tanh_,
    to_text,
    var,
    X,
)
from .bump import BumpSpec, build_bump, iterate_f, solve_tangency, verify_bump
from .blend import blend_activations, build_tanh_approx, snorm_distance
from .growth import Curve, arclength, classify_growth, order_by_growth, predict_neuron_order
from .indep import dimension_reduce, numeric_independent
from .network import (
    NetworkStructure,
    ParamVector,
    embed_params,
    forward,
    forward_grid,
    leading_order_at_zero,
    network_l2,
)
from .zeroset import (
    enumerate_zero_subspaces,
    in_minimal_zero_set,
    predict_three_layer_tanh,
    predict_two_layer,
)
from .fourier import even_schwartz_check, fourier_transform, ft_decay_test, trig_sum_lower
from .complexcurves import blowup_curve, curve_decay_profile, sigmoid_pole

__version__ = "0.1.0"
