"""Rate regions and coding-scheme simulation for two-way wiretap channels
with one-sided secrecy and key feedback."""

__version__ = "0.1.0"

from .channels import (
    TwoWayChannel,
    builtin_adder,
    builtin_bmc,
    builtin_xor,
    has_common_output,
    load_channel,
)
from .info import (
    InputPolicy,
    Pmf,
    conditional_entropy,
    entropy,
    joint_from_policy,
    mutual_info,
)
from .regions import (
    GridSpec,
    PolicyBounds,
    RatePoint,
    RateRegion,
    convex_hull,
    inner_point,
    nofeedback_point,
    outer_common_output_point,
    outer_general_point,
    region_contains,
    sweep,
)
from .sim import (
    CodebookPair,
    SimConfig,
    SimReport,
    build_codebooks,
    exact_leakage,
    lemma1_bound_check,
    run_experiment,
)
