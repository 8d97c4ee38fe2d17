"""Nonlinear inverse scattering toolbox.

Forward model: the total field under multiple scattering is computed as a
convergent accelerated-gradient expansion of the Lippmann-Schwinger equation.
Inverse problem: TV-regularized FISTA driven by the exact reverse-mode
gradient of the data fit through that expansion, with first-Born and Rytov
linearizations available as baselines, and closed-form cylinder/sphere
solutions for validation.
"""

from .adjoint import (apply_Sk, apply_Tk, data_fidelity, gradient_data_fidelity,
                      gradient_from_trace)
from .analytic import (AnalyticScene, analytic_field_2d, analytic_field_3d,
                       helmholtz_residual, radial_coeffs_2d, radial_coeffs_3d)
from .errors import (ConfigError, ConvergenceWarning, DimensionError,
                     MeasurementParseError, NumericalError, ResonanceError,
                     SingularityError, StepDegeneracyError, TransformError)
from .forward import (ForwardConfig, ForwardTrace, estimate_fixed_step,
                      forward_solve, objective_gradient, predict_scattered,
                      scattering_objective)
from .greens import (DomainGreensOperator, MaskedSensorOperator,
                     SensorGreensOperator, apply_A, apply_AH,
                     build_domain_operator, build_sensor_operator, green_2d,
                     green_3d, self_interaction)
from .grid import DomainGrid, SensorSet, centered_grid, ring_sensors
from .metrics import (normalized_data_fit, normalized_error,
                      normalized_recon_error, snr_db)
from .phantoms import contrast, cylinders, shepp_logan
from .recon import (MeasurementSet, ReconConfig, ReconReport,
                    ScatteringProblem, Transmitter, born_gradient,
                    born_predict, fista_reconstruct, predict_all,
                    rytov_transform, total_gradient)
from .tv import (BoxConstraint, dual_objective, grad_adjoint, grad_op,
                 proj_box, proj_dual, prox_tv, tv_value)

__version__ = "0.1.0"
