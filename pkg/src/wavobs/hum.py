"""Discrete Hilbert Uniqueness Method: Gramian system, control synthesis, error norms.

The minimal-norm control is ``v(t) = row . exp(A t) a`` where ``W a = b``, W is the
observability Gramian of the observation row and b pairs the target data with the
trial bases (``b_pos = int y1 phi``, ``b_vel = -int y0 psi``).
"""
from dataclasses import dataclass
import logging
import warnings

import numpy as np
from scipy.integrate import simpson
from scipy.sparse.linalg import LinearOperator, cg

from .assembly import FormulationKind
from .basis import evaluate_expansion, gauss_legendre, moments
from .errors import NearSingularGramianError, NotSPDError, SingularMatrixError, WavobsError
from .kernels import get_tolerances, expm, solve
from .observability import constants, energy_matrix, gramian_chen

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ControlProblem:
    y0: object
    y1: object
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"control horizon must be > 0, got {self.T}")


@dataclass(frozen=True)
class ControlResult:
    u0_coeffs: np.ndarray
    u1_coeffs: np.ndarray
    times: np.ndarray
    v_samples: np.ndarray
    l2_norm_v: float
    residual: float
    c_NT: float
    # a^T W a versus a^T b, relative
    optimality_gap: float
    fallback: str = None

    @property
    def state(self):
        return np.concatenate([self.u0_coeffs, self.u1_coeffs])


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form adjoint data and control for given target data."""

    y0: object
    y1: object
    u0: object
    u0_dx: object
    u1: object
    v: object
    T: float

    def problem(self):
        return ControlProblem(self.y0, self.y1, self.T)


def _v_exact(t):
    t = np.asarray(t, dtype=float)
    out = np.where(t < 4.0, -t / 4.0 + 0.5, -t / 4.0 + 1.5)
    # the jump at t = 4 takes its midpoint value
    return np.where(t == 4.0, 0.0, out)


def exact_example():
    """Target ``y0 = x + 1, y1 = 0`` on T = 8: ``u0 = 0``, ``u1 = -x/4 - 1/4`` and the
    sawtooth control ``v(t) = -t/4 + 1/2`` on (0, 4), ``-t/4 + 3/2`` on (4, 8)."""
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    return ExactSolution(
        y0=lambda x: np.asarray(x, dtype=float) + 1.0,
        y1=zero,
        u0=zero,
        u0_dx=zero,
        u1=lambda x: -np.asarray(x, dtype=float) / 4.0 - 0.25,
        v=_v_exact,
        T=8.0,
    )


def control_row(system, obs_row):
    """Row producing the control from the adjoint state.

    This is the single place where the formulation decides the control's sign: for the
    non-symmetric Nitsche scheme the duality pairing is ``u_x(1) + gamma N^2 u(1)`` and the
    minimal-norm control is its negative. All other pipelines use the observation itself.
    """
    if system.formulation.kind is FormulationKind.NITSCHE_NONSYMMETRIC:
        return -np.asarray(obs_row, dtype=float)
    return np.asarray(obs_row, dtype=float)


def rhs_vector(problem, system, rule=None):
    rule = rule or gauss_legendre(2 * system.n_poly + 4)
    top = moments(problem.y1, system.position_basis, system.dof, rule)
    bottom = -moments(problem.y0, system.velocity_basis, system.dof, rule)
    return np.concatenate([top, bottom])


def _pcg(W, b):
    diag = np.diag(W).copy()
    diag[diag <= 0] = 1.0
    precond = LinearOperator(W.shape, matvec=lambda r: r / diag)
    with np.errstate(all="ignore"):
        x, info = cg(W, b, rtol=1e-12, atol=0.0, maxiter=20 * len(b), M=precond)
    return x, info


def solve_gramian_system(W, b):
    """Solve ``W a = b``; returns (a, relative residual, fallback label or None)."""
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b), 0.0, None
    fallback = None
    try:
        a = solve(W, b, spd_hint=True)
    except (NotSPDError, SingularMatrixError) as exc:
        log.info("Cholesky solve of the Gramian failed (%s); using preconditioned CG", exc)
        a, _ = _pcg(W, b)
        fallback = "pcg"
    residual = float(np.linalg.norm(W @ a - b) / bnorm)
    return a, residual, fallback


def solve_control(problem, system, obs_row=None, W=None, n_t=None, subspace=None):
    """Minimize the discrete HUM functional and synthesize the control on a uniform grid."""
    row = system.observation_row if obs_row is None else np.asarray(obs_row, dtype=float)
    if W is None:
        W = gramian_chen(system, problem.T, row)
    b = rhs_vector(problem, system)
    if subspace is not None:
        Wr, br = subspace.T @ W @ subspace, subspace.T @ b
        rhs_e = subspace.T @ energy_matrix(system)[0] @ subspace
    else:
        Wr, br = W, b
        rhs_e = energy_matrix(system)[0]
    try:
        c_NT, _ = constants(system, Wr, rhs_e)
    except WavobsError as exc:
        # an indefinite (numerically broken) Gramian still gets a solve attempt below
        log.info("constants pencil failed (%s); reporting c_NT = 0", exc)
        c_NT = 0.0
    if c_NT <= 1e-10:
        warnings.warn(f"observability constant c_NT = {c_NT:.3e}: the minimizer may be meaningless",
                      RuntimeWarning, stacklevel=2)
    ar, residual, fallback = solve_gramian_system(Wr, br)
    if not residual <= get_tolerances().hum_residual:
        raise NearSingularGramianError(f"Gramian system residual {residual:.3e}", c_NT)
    a = ar if subspace is None else subspace @ ar
    awa = float(ar @ Wr @ ar)
    ab = float(ar @ br)
    gap = abs(awa - ab) / abs(ab) if ab != 0 else abs(awa)

    n_t = n_t or 32 * system.n_poly
    n_t += n_t % 2
    times = np.linspace(0.0, problem.T, n_t + 1)
    step = expm(system.state_matrix, problem.T / n_t)
    crow = control_row(system, row)
    x = a.copy()
    v = np.empty(n_t + 1)
    for j in range(n_t + 1):
        v[j] = crow @ x
        x = step @ x
    pos, vel = system.split(a)
    return ControlResult(
        u0_coeffs=pos,
        u1_coeffs=vel,
        times=times,
        v_samples=v,
        l2_norm_v=float(np.sqrt(simpson(v**2, x=times))),
        residual=residual,
        c_NT=c_NT,
        optimality_gap=gap,
        fallback=fallback,
    )


def error_norms(result, system, exact, rule=None):
    """(|u0^N - u0|_{H^1_0}, ||u1^N - u1||_{L^2}, ||v^N - v||_{L^2(0,T)})."""
    rule = rule or gauss_legendre(2 * system.n_poly + 8)
    x = rule.nodes
    _, du0 = evaluate_expansion(system.position_basis, result.u0_coeffs, x)
    u1, _ = evaluate_expansion(system.velocity_basis, result.u1_coeffs, x)
    e_u0 = np.sqrt(rule.integrate((du0 - exact.u0_dx(x)) ** 2))
    e_u1 = np.sqrt(rule.integrate((u1 - exact.u1(x)) ** 2))
    dv = result.v_samples - exact.v(result.times)
    e_v = np.sqrt(simpson(dv**2, x=result.times))
    return float(e_u0), float(e_u1), float(e_v)
