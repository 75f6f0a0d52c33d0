"""Principal cross fields, umbilic loci and certified topological indices
for saddle graphs in R^3 and S^3, plus the smooth saddle-sphere construction
showing why analyticity matters for the equatorial rigidity of such spheres.
"""

from .errors import (AnalysisError, CertificationFailure, ConfigError,
                     CurvatureViolation, DegenerateMatrix, DegeneratePoint,
                     HemisphereViolation, LowOrder, NearZeroSample,
                     NoDirectionFound, NoStabilization, NotAPower, OrderTooLow,
                     OriginQuery, SaddleFieldsError, UmbilicPoint,
                     UnclassifiedZeros, ZeroFunction)
from .poly import (Disk, Jet2, JetEvaluator, LinearPowerFactor, Poly2,
                   SaddleReport, SegmentFactorization, X, Y, evaluate_jet,
                   hessian_det, linear_power_factor, lowest_homogeneous_part,
                   saddle_check, segment_factorization)
from .geometry import (CrossSample, FundamentalForms, Point4, ShapeNumerator,
                       cross4, extrinsic_curvature_sign, fundamental_forms,
                       gnomonic, gnomonic_inverse, gnomonic_inverse_many,
                       gnomonic_many, graph_immersion, principal_cross,
                       shape_numerator)
from .umbilics import (LocusReport, UmbilicStratum, detect_segments,
                       straightness_check, umbilic_locus)
from .fields import (ExtendedCrossField, ExtendedVectorField, HomotopyField,
                     LineBranch, admissible_direction, circle_path,
                     continue_branch, extended_cross, extended_grad_field,
                     extended_z_field, grad_directional, homotopy_cross,
                     z_field)
from .indexing import (DoublingReport, HomotopyInvarianceReport, IndexReport,
                       homotopy_invariance_check, index_doubling_check,
                       line_index, poincare_hopf_sum, vector_index)
from .sphere import (AnnulusParams, DEFAULT_PARAMS, FlatJoin, MeridianProfile,
                     RevolutionAnnulus, SphereAtlas, assemble_saddle_annulus,
                     flat_join_profile, lift_to_sphere,
                     verify_smooth_saddle_sphere)
from .catalog import CatalogEntry, harmonic_im, harmonic_re, origin_umbilic_entries, saddle_catalog
from .ellipsoid import poincare_hopf_ellipsoid, umbilic_chart_poly, umbilic_positions
from .scenario import export_field_grid, run_scenario

__version__ = "0.1.0"
