"""Least-squares solver for the Dirichlet Monge-Ampere problem
``det D^2 u = f`` in a planar domain, ``u = 0`` on its boundary.

The unknown is the source shift ``g >= 0`` in ``Laplace(u) = 2 sqrt(f) + g``;
it is found by conjugate-gradient minimization of the discrete residual
``1/2 integral (det D^2 u - f)^2`` with P1 finite elements.
"""

from .fem import FemContext, SolverError, assemble_directional_stiffness, assemble_stiffness, lumped_load, solve_poisson
from .hessian import DiscreteHessian, discrete_determinant, discrete_hessian
from .mesh import Mesh, MeshFormatError, MeshValidationError, dump_mesh, generate_disk_mesh, generate_square_mesh, load_mesh, vertex_areas
from .objective import LeastSquaresObjective, ObjectiveState, evaluate, fd_gradient, gradient
from .optimizer import ArmijoParams, BetaRule, Metric, OptimizerConfig, RunReport, Termination, armijo_search, fr_beta, minimize, prp_beta
from .problems import ProblemSpec, builtin_problem, custom_problem, l2_error
from .runner import SolveResult, run_bench, solve

__version__ = "0.1.0"
