"""Quantitative direct sampling for inverse medium scattering from backscattering data."""

from .errors import (AccuracyError, ConfigError, DomainError, QDSMError, SingularityError,
                     SolverError, StageError)
from .geometry import (DirectionSet, FieldKind, MeasurementGeometry, SamplingGrid,
                       WavenumberSet, fibonacci_sphere_directions, make_wavenumbers,
                       uniform_circle_directions, wavenumbers_from_step)
from .specialfun import fundamental_solution, gamma_n, hankel0_h1, hankel1_h1
from .phantoms import (ComplexField, ContrastPhantom, blocks_sparse_2d, complex_mountain_2d,
                       cross_3d, gaussian_bump, make_phantom, rasterize, shepp_logan_2d,
                       smooth_3d, zero_phantom)
from .forward import (LSDiscretization, MeasurementSet, PlaneWave, PointSource, add_noise,
                      born_far_backscatter, born_near_backscatter, ls_backscatter,
                      ls_total_field, synthesize)
from .inversion import continuous_indicator_oracle, indicator, indicator_far, indicator_near
from .analysis import (ErrorReport, MomentEstimate, h2_norm, l2_norm, low_freq_moments,
                       rel_errors, truncation_bound, uniqueness_moment_check)

__version__ = "0.1.0"
