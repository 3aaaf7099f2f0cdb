"""weakfrac: numerical fractional calculus in one dimension.

Classical Riemann-Liouville, Caputo, Grunwald-Letnikov and spectral
derivative backends, singularity-exact fractional integrals, weak fractional
derivatives defined through integration-by-parts pairings, distributional
derivatives, and a verification harness that machine-checks the calculus
identities relating them all.

Everything is pure-functional over immutable inputs and safe to call from
concurrent workers.
"""

from .errors import (
    DomainError,
    InputError,
    NonConvergenceError,
    PoleError,
    UsageError,
    WeakfracError,
)
from .grid import Grid, GridFunction, GridKind, Interval, make_grid, read_csv, sample, write_csv
from .special import Direction, FracOrder, KernelSpec, frac_binomial, gamma, gl_coefficient, kappa
from .integrals import rl_integral, rl_integral_at, truncation_tail_bound
from .derivatives import caputo_derivative, fourier_derivative, gl_derivative, rl_derivative
from .weak import (
    MollifierSpec,
    StepFunction,
    TestFunction,
    TestFunctionSum,
    default_test_family,
    mollify,
    pollution_tail,
    step_weak_derivative,
    test_deriv,
    verify_weak_derivative,
    weak_derivative_compute,
)
from .rules import (
    FtfcConstant,
    ProductRuleExpansion,
    chain_rule_expand,
    decompose_high_order,
    ftfc_constant,
    ftfc_reconstruct,
    ftwfc_verify,
    general_kernel_check,
    integration_by_parts_check,
    product_rule_expand,
    semigroup_check,
)
from .distributions import (
    DeltaDistribution,
    DerivedDistribution,
    PartitionOfUnity,
    RegularDistribution,
    SmoothCutoff,
    dist_apply,
    dist_consistency_limit,
    dist_fourier_derivative,
    dist_frac_derivative_compact,
    dist_frac_derivative_general,
)
from .report import CaseResult, SuiteReport

__version__ = "0.1.0"
