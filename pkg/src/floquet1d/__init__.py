"""Spectral theory of 1-D periodic self-adjoint operators of order 2n:
multiplier branches, band structure, Floquet solutions, the
eigenfunction-expansion transform pair, and the spectral matrix.
"""

from .errors import (ConfigError, ComputationError, RangeRefusal,
                     StiffFailure, AmbiguousLabeling)
from .operator import (TrigPoly, OperatorSpec, StandardForm,
                       expand_standard_form, parse_operator,
                       mathieu_spec, free_spec, zero_poly)
from .monodromy import (monodromy, MonodromyData, FundamentalSolution,
                        char_poly, CharPoly, spectral_decomposition,
                        discriminant, growth_exponent)
from .multipliers import (omega_order, OmegaOrder, eigen_multipliers,
                          label_asymptotic, track_branches, TrackOptions,
                          BranchTable, CollisionEvent, involution_check)
from .bands import (Band, BandAtlas, BandMesh, EdgePoint, detect_bands,
                    parametrize_band, spectrum_union)
from .expansion import (FloquetSolution, floquet_vector, cofactor_vector,
                        eval_E, weights, BandNodes, band_nodes,
                        forward_transform, inverse_transform, parseval,
                        TransformVector, bloch_eigs, gelfand_forward,
                        gelfand_inverse, spectral_matrix, reconstruct_U,
                        hill_compare)
from .profiles import bump, indicator, make_profile
from . import oracles

__version__ = "0.1.0"
