"""smoothlink: smooth polygonal links into curves with no parallel tangents.

The pipeline replaces each edge by a round bend, connects the tangent arcs
into a closed admissible curve on the sphere, confines the leftover corner
arcs to tiny balls by synthesizing speed functions, cancels the end-to-end
drift by rescaling three bends, and certifies every claimed property
numerically.
"""

from .assemble import BuildOptions, SmoothLinkBuild, build_smooth_link, \
    closure_ball_radius, solve_closure, ClosureProblem
from .errors import (AmplitudeSolveError, CannotCertifyError, ClosureError,
                     GeneralPositionError, InvalidLinkError, PlannerError,
                     QuadratureError, SchemaError, SmoothLinkError,
                     SpeedPositivityError, StageError)
from .geom import (Cone, ProjPoint, Slab, cone_contains, cones_disjoint,
                   normalize, proj_distance, rotation_to_pole, sphere_distance)
from .indicatrix import (AdmissibilityReport, CircleArc, ForbiddenRegion,
                         FunctionArc, IndicatrixLoop, PiecewiseArc,
                         SphericalArc, SplineArc, admissibility_check,
                         assemble_indicatrix, plan_connector)
from .kernels import (Bump, SampledCurve, SpeedFunction, Step, integrate_curve,
                      speed_positivity_certify)
from .linkio import fixture_link, generic_4gon, read_curves, read_link, \
    write_curves, write_link
from .linkmodel import (Budgets, GeneralPositionReport, PolygonalLink,
                        chamfer_corners, compute_budgets,
                        general_position_check, min_nonadjacent_distance,
                        perturb_to_general_position, rescale_min_edge)
from .arcsynth import (AllowableArcResult, GapProblem, choose_gap_frame,
                       find_equator_crossings, slab_crossing_speed,
                       solve_radial_amplitude, synthesize_gap_arc)
from .suspension import RoundSuspension, build_round_suspension, \
    stretch_to_factor, suspension_plane_normal
from .verify import (Certificate, certify_build, certify_curves,
                     verify_embedding, verify_structure, verify_tangents,
                     verify_tube)

__version__ = "0.1.0"
