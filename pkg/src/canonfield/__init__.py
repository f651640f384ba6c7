"""Canonical vector fields of Euclidean submanifolds, checked numerically.

An immersion is written in a small expression language (or taken from the
catalog), its Taylor jets are computed exactly, and the tangential part of the
position vector is tested for conformality, umbilicity and related identities.
"""

__version__ = "0.1.0"

from .applications import (IdentityLedger, SelfSimilarReport, SolitonReport, curvature_identity_check,
                           hessian_obata_check, laplacian_gradient_check, ricci_identity_checks,
                           self_similar_check, self_similar_ricci_identity, yamabe_check)
from .canonical import (ConformalVerdict, FieldClass, UmbilicVerdict, classify_field,
                        conformal_umbilic_equivalence, conformality_test, lie_derivative_metric,
                        parallel_normal_direction_test, umbilicity_test)
from .catalog import catalog, catalog_source, list_catalog
from .classifiers import (ContainmentVerdict, conformal_flatness_test, containment_test,
                          corollary_dichotomy)
from .dsl import ExprNode, ImmersionSpec, parse, to_source
from .errors import (CanonFieldError, CheckSkipped, ConfigError, DimensionMismatch, DimensionTooLow,
                     DomainError, EvalError, MissingParameter, NotNormal, OrderTooLow, RankDeficient,
                     SkippedMissingPrereq, SkippedNonconstantPhi, SkippedNotConformal, SpecSyntaxError,
                     TooFewPoints, UnknownCatalogEntry, UnknownIdentifier)
from .geometry import (GeometryFrame, PositionSplit, build_frame, curvature, mean_curvature,
                       position_split, shape_operator)
from .jets import JetPoint, eval_jet, fd_jet
from .report import AnalysisReport, RunConfig, analyze
from .sampling import Sample, grid_points, sample_grid, sample_points
