"""Operator-splitting solvers built around partial inverses.

Solves monotone inclusions 0 in Ax + Bx + Cx + N_V(x) with a
Lipschitz-only B activated once per iteration, plus product-space,
composite and consensus derivations, two experiment families (constrained
fused lasso, desk-scale tomography) and a benchmark CLI.
"""

__version__ = "0.1.0"

from .linalg import (LinearMap, SpdSolveCache, adjoint_gap, as_vector, inner,
                     identity_map, operator_norm_estimate, spd_solve, zero_map)
from .operators import (ForwardOp, ResolventOp, SubspaceProjector,
                        affine_forward, affine_resolvent, box_project,
                        box_prox, discrete_gradient_1d, discrete_gradient_2d,
                        identity_projector, kernel_projector, l1_prox,
                        lifted_difference_map, make_operator,
                        partial_inverse_resolvent, point_prox, prox_conjugate,
                        register_operator, registry_keys, resolvent_of_inverse,
                        soft_threshold, span_projector, zero_forward,
                        zero_prox)
from .splitting import (ProblemSpec, SolverConfig, SolverTrace, StepSizeCheck,
                        condat_vu_solve, fhrb_solve, fpisdr_solve,
                        frpib_solve, fsdr_solve, step_size_frpib_max,
                        step_size_fsdr_max, validate_step_size)
from .multivariate import (ConsensusSpec, MultiProblemSpec, composite_fpisdr,
                           composite_frpib, consensus_fpisdr_solve,
                           consensus_frpib_solve, consensus_stacked_problem,
                           fpisdr_multi_solve, frpib_multi_solve,
                           lifted_constants, stacked_problem)
from .reporting import RunReport, report_from_trace
from .fused_lasso import (FusedLassoInstance, cmtpd_solve,
                          condat_vu_fused_solve, fhrb_fused_solve,
                          gen_fused_lasso, kkt_residual, load_instance,
                          mtpd_solve, objective, save_instance)
from .tomography import (TomoGeometry, TomoInstance, make_tomo_instance,
                         poisson_sinogram, psnr, radon_projector, shepp_logan,
                         tomo_objective, tomo_solve, write_pgm)
from .benchmark import (BenchmarkInterrupted, aggregate_reports, cell_seed,
                        run_benchmark)
