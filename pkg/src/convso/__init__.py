"""Spectrahedral representations of conv SO(n), conv O(n) and their polars."""
from .clifford import (CliffordEvenElement, DimensionError, NotARotationError,
                       a_family, a_matrix, pencil, quad_map, spin_lift, spin_sample)
from .geometry import (BodyKind, member_conv_son, member_polar, special_svd,
                       support_conv_on, support_conv_son)
from .hull_reps import (conv_on_rep, conv_son_rep, evaluate_lmi, export_sdpa,
                        nuclear_lift, on_polar_rep, psd_lift_conv_son, son_polar_rep)
from .kernels import BACKEND
from .solver import maximize_linear_over_lmi, project_conv_son, symmetric_eig
from .estimation import joint_solve, sample_vmf, synthesize_scenario, wahba_solve

__version__ = "0.1.0"
