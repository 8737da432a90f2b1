"""Maximum-rank PSD stress matrices for lateration frameworks and anchored sensor networks."""
from .anchored import (AnchoredReport, AnchoredStress, anchored_prestress, anchored_purify_column,
                       anchored_stress, verify_anchored_stress, z_matrix)
from .exceptions import (BudgetExhausted, DegenerateSpan, DimensionMismatch, NotFound,
                         NotSymmetric, NumericalBreakdown, ParseError, SingularMatrix, StressError,
                         VerificationFailed, VertexIndexError)
from .framework import (AnchoredNetwork, Framework, check_general_position,
                        extended_position_matrix, read_framework, read_framework_file,
                        write_framework, write_framework_file)
from .generate import random_framework, random_network
from .graph import (LaterationOrder, find_lateration_order, is_dplus1_tree, lateration_order,
                    validate_lateration_order)
from .numerics import FLOAT, RATIONAL, Tolerances
from .sdp import (SdpProblem, check_certificate, export_anchored_sdp, export_realization_sdp,
                  read_matrix_text, read_sdpa, write_matrix_text, write_sdpa)
from .stress import (compute_stress_matrix, gale_matrix, pre_stress, purify, purify_column,
                     verify_stress)

__version__ = "0.1.0"
