"""Green kernels and norm-resolvent convergence for Sturm-Liouville
operators -y'' + q'y with q in L2, realized through the quasi-derivative
first-order system w = (y, y' - q y)."""
from .gridfn import (Grid, GridFunction, MatrixGridFunction, VectorGridFunction, antiderivative,
                     norm_l1_matrix, norm_l2, norm_sup)
from .potential import (BoundaryPair, PotentialFamily, boundary_preset, family_constant,
                        family_exp_osc, family_from_table, family_l2_perturb, family_scaled_exp_osc)
from .quasi_system import perturbation_matrix, quasi_derivatives, rhs_lift, system_matrix
from .odeint import cauchy_distance_to_identity, fundamental_matrix, solve_inhomogeneous
from .green import (GreenKernel, SingularBoundaryProblem, characteristic_matrix, green_matrix,
                    solve_bvp)
from .resolvent import (ConvergenceReport, apply_resolvent, convergence_sweep, estimate_rate,
                        kernel_sup_distance, operator_norm_bound, operator_norm_estimate)

__version__ = "0.1.0"
