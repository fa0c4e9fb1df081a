"""Certified bounded normal generation for unitary groups at finite truncation.

The package builds explicit certificates that a unitary target is a product
of boundedly many conjugates of a base unitary and its inverse, and checks
them independently of how they were built.
"""

from .certify import (
    BlockPlan,
    Certificate,
    Report,
    arrange_gap_blocks,
    calkin_dim,
    calkin_m,
    certify_calkin,
    certify_diag,
    certify_matrix,
    infsim_generate,
    ng_bound,
    verify,
)
from .core import (
    ClusteredModel,
    DiagonalUnitary,
    diagonalize,
    ell,
    ell_ess,
    ell_unitary,
    hs_dist,
    materialize,
    normalize_phase,
    proj_dist,
)
from .decomp import (
    AngleNormalization,
    FactorSequence,
    angle_normalize,
    greedy_order,
    product_decomposition,
    split_angles,
    torus_decomposition,
)
from .errors import BngError, InfeasibleError, PreconditionError, SchemaError, VerificationError
from .su2 import ConjugateChain, su2_chain, su2_pair_solve
from .typeiii import (
    FiniteSpectrumUnitary,
    commutator,
    commutator_witness,
    doubled_commutator,
    ng_bound_typeiii,
)

__version__ = "0.1.0"
