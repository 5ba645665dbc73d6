"""Spectral diagnostics, observability Gramians and the constants c_{N,T}, C_{N,T}."""
from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg as sla

from .assembly import FormulationKind
from .basis import gauss_legendre
from .errors import UnsupportedFormulationError, WavobsError
from .kernels import get_tolerances, eig_sym_pencil, expm


@dataclass(frozen=True)
class SpectrumReport:
    N: int
    lambdas: np.ndarray
    # sqrt(lam_k) - sqrt(lam_{k-1}) with lam_0 = 0
    sqrt_gaps: np.ndarray
    deltas: np.ndarray
    eigvec_coeffs: np.ndarray

    @property
    def sqrt_lambdas(self):
        return np.sqrt(self.lambdas)


@dataclass(frozen=True)
class GramianResult:
    W: np.ndarray
    c_NT: float
    C_NT: float
    T: float
    filter_tag: str = ""
    ridge: float = 0.0
    asymmetry: float = 0.0


def continuous_sqrt_lambdas(k):
    """Square roots of the Dirichlet eigenvalues of -d^2/dx^2 on (-1, 1): k pi / 2."""
    return np.asarray(k, dtype=float) * math.pi / 2.0


def spectrum(system):
    """Discrete eigenvalues, square-root gaps and boundary ratios of the classical scheme."""
    if system.formulation.kind is not FormulationKind.CLASSICAL:
        raise UnsupportedFormulationError("spectrum diagnostics are defined for the classical scheme only")
    lam, vecs = eig_sym_pencil(system.energy_position, system.energy_velocity)
    roots = np.sqrt(lam)
    gaps = np.diff(np.concatenate([[0.0], roots]))
    slope = system.slope_row @ vecs
    seminorm = np.einsum("ik,ij,jk->k", vecs, system.energy_position, vecs)
    return SpectrumReport(
        N=system.n_poly,
        lambdas=lam,
        sqrt_gaps=gaps,
        deltas=slope**2 / seminorm,
        eigvec_coeffs=vecs,
    )


def _chen(A, obs_row, T):
    n = A.shape[0]
    c = np.asarray(obs_row, dtype=float)
    if c.shape != (n,):
        raise ValueError(f"observation row has shape {c.shape}, expected ({n},)")
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -A.T
    block[:n, n:] = np.outer(c, c)
    block[n:, n:] = A
    F = expm(block, T)
    W = F[n:, n:].T @ F[:n, n:]
    scale = np.linalg.norm(W)
    asym = np.linalg.norm(W - W.T) / scale if scale > 0 else 0.0
    return 0.5 * (W + W.T), asym


def gramian_chen(system, T, obs_row=None):
    """Observability Gramian over [0, T] from one exponential of the block matrix
    ``[[-A^T, c^T c], [0, A]]``: W = F22^T F12, symmetrized."""
    if T <= 0:
        raise ValueError(f"horizon T must be > 0, got {T}")
    row = system.observation_row if obs_row is None else obs_row
    return _chen(system.state_matrix, row, T)[0]


def gramian_quadrature(system, T, obs_row=None, n_t=1280, panel_length=0.25):
    """Gramian by composite Gauss-Legendre quadrature in time (independent check)."""
    if n_t < 64:
        raise ValueError(f"n_t must be >= 64, got {n_t}")
    A = system.state_matrix
    c = np.asarray(system.observation_row if obs_row is None else obs_row, dtype=float)
    n_panels = max(1, math.ceil(T / panel_length - 1e-12))
    h = T / n_panels
    rule = gauss_legendre(max(2, math.ceil(n_t / n_panels)))
    rows = []
    weights = []
    for p in range(n_panels):
        for x, w in zip(rule.nodes, rule.weights):
            t = h * (p + 0.5 * (x + 1.0))
            rows.append(c @ expm(A, t))
            weights.append(0.5 * h * w)
    R = np.array(rows)
    return (R * np.array(weights)[:, None]).T @ R


def energy_matrix(system):
    """Right-hand side of the constants pencil, ``blockdiag(Ke, Me) / 2``, and any ridge added.

    The non-symmetric Nitsche position energy is the continuous H^1 seminorm, which is
    poorly conditioned on Lh_k; a ridge of ``1e-12 trace(Ke) / dof`` keeps the pencil
    strictly definite.
    """
    Ke = np.array(system.energy_position)
    ridge = 0.0
    if system.formulation.kind is FormulationKind.NITSCHE_NONSYMMETRIC:
        ridge = get_tolerances().ridge * np.trace(Ke) / system.dof
        Ke = Ke + ridge * np.eye(system.dof)
    return 0.5 * sla.block_diag(Ke, system.energy_velocity), ridge


def constants(system, W, energy_rhs=None, subspace=None):
    """(c_NT, C_NT): extreme eigenvalues of the pencil (W, energy_rhs).

    ``subspace`` (columns spanning a subspace of the state space) restricts both forms.
    """
    if energy_rhs is None:
        energy_rhs = energy_matrix(system)[0]
    if subspace is not None:
        W = subspace.T @ W @ subspace
        energy_rhs = subspace.T @ energy_rhs @ subspace
    lam = eig_sym_pencil(0.5 * (W + W.T), 0.5 * (energy_rhs + energy_rhs.T))[0]
    c, C = float(lam[0]), float(lam[-1])
    if c < -get_tolerances().pencil_negativity * max(abs(C), 1.0):
        raise WavobsError(f"Gramian pencil has a negative eigenvalue {c:.3e} (largest {C:.3e})")
    return max(c, 0.0), C


def modal_subspace(report, M):
    """Columns spanning the first M discrete eigenmodes in both position and velocity."""
    if not 1 <= M <= len(report.lambdas):
        raise ValueError(f"truncation order must lie in [1, {len(report.lambdas)}], got {M}")
    V = report.eigvec_coeffs[:, :M]
    return sla.block_diag(V, V)


def truncated_observation(system, report, M):
    """Observation row of the Fourier truncation u^{N,M} (obs row composed with the
    M-mode spectral projector)."""
    V = modal_subspace(report, M)[: system.dof, :M]
    proj = V @ V.T @ system.energy_velocity
    P = sla.block_diag(proj, proj)
    return system.observation_row @ P


def observability_constants(system, T, obs_row=None, subspace=None, tag=""):
    row = system.observation_row if obs_row is None else np.asarray(obs_row, dtype=float)
    W, asym = _chen(system.state_matrix, row, T)
    rhs, ridge = energy_matrix(system)
    c, C = constants(system, W, rhs, subspace=subspace)
    return GramianResult(W=W, c_NT=c, C_NT=C, T=T, filter_tag=tag, ridge=ridge, asymmetry=asym)
