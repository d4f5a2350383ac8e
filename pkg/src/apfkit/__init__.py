"""Accumulated persistence functions for planar point patterns.

Alpha-complex persistent homology, accumulated persistence functions and
the functional-data statistics built on them: rank envelope tests,
functional boxplots, bootstrap bands, two-sample tests, clustering and
classification.
"""

__version__ = "0.1.0"

from .apf import (APF, DEFAULT_N_GRID, RRPD, CurveSample, Norm, apf_eval, apf_from_diagram,
                  apf_from_rrpd, curve_distance, discretize, to_rrpd)
from .bootstrap import (BandResult, Statistic, TwoSampleResult, bottleneck_radius, mean_band,
                        pd_confidence_band, quantile_hat, two_sample)
from .envelope import (EnvelopeResult, bounding_curves, combine_envelopes, extreme_ranks,
                       rank_envelope_test)
from .errors import (AllCollinear, APFError, BadK, BadRank, DuplicatePoints, GeometryError,
                     GridMismatch, LengthMismatch, NumericFailure, ParseError,
                     UnknownVertexInEdge, WindowOutOfRange)
from .fda import BoxplotResult, classify, functional_boxplot, kmeans_curves, mbd, trimmed_mean
from .geometry import Filtration, Triangulation, alpha_filtration, delaunay
from .persistence import (DETERMINISTIC, HeightGraph, PersistenceDiagram, Seeded, bottleneck,
                          diagrams, ph_pointcloud, ph_sublevel)
from .pointprocess import (CircleSpec, Window, baddeley_silverman, matern_cluster,
                           matern_hardcore, poisson, sample_on_circles)
