"""Assembly of the four Legendre semi-discretizations as first-order systems.

Indexing convention: formulas below use the 1-based mode index i (or j) of the
closed-form tables; storage row ``i - 1`` holds mode ``i``. For the plain Legendre
velocity basis of the mixed formulation, storage row ``k`` holds ``L_k`` (k >= 0).

Every system is written as ``d/dt state = A state`` with
``state = (position coefficients, velocity coefficients)``.
"""
from dataclasses import dataclass, field
from enum import Enum
import logging
import math

import numpy as np

from .basis import BasisKind, basis_matrix, endpoint_slope, endpoint_value, gauss_legendre
from .errors import UnsupportedFormulationError
from .kernels import expm, solve

log = logging.getLogger(__name__)


class FormulationKind(Enum):
    CLASSICAL = "classical"
    MIXED = "mixed"
    NITSCHE_SYMMETRIC = "nitsche-sym"
    NITSCHE_NONSYMMETRIC = "nitsche-nonsym"


@dataclass(frozen=True)
class Formulation:
    kind: FormulationKind
    gamma: float = None

    def __post_init__(self):
        kind = FormulationKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (FormulationKind.NITSCHE_SYMMETRIC, FormulationKind.NITSCHE_NONSYMMETRIC):
            if self.gamma is None or not math.isfinite(self.gamma) or self.gamma <= 0:
                raise ValueError(f"Nitsche penalty gamma must be finite and > 0, got {self.gamma}")
            object.__setattr__(self, "gamma", float(self.gamma))
        elif self.gamma is not None:
            raise ValueError(f"{kind.value} takes no gamma")

    @classmethod
    def classical(cls):
        return cls(FormulationKind.CLASSICAL)

    @classmethod
    def mixed(cls):
        return cls(FormulationKind.MIXED)

    @classmethod
    def nitsche_symmetric(cls, gamma):
        return cls(FormulationKind.NITSCHE_SYMMETRIC, gamma)

    @classmethod
    def nitsche_nonsymmetric(cls, gamma):
        return cls(FormulationKind.NITSCHE_NONSYMMETRIC, gamma)

    @property
    def is_nitsche(self):
        return self.gamma is not None

    def __str__(self):
        return self.kind.value if self.gamma is None else f"{self.kind.value}:{self.gamma:g}"


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SemiDiscreteSystem:
    """One assembled formulation.

    ``energy(state) = (pos^T Ke pos + vel^T Me vel) / 2`` with ``Ke = energy_position``
    and ``Me = energy_velocity``. ``observation_row`` maps the full state to the
    formulation's boundary observation at x = 1.
    """

    formulation: Formulation
    n_poly: int
    dof: int
    state_matrix: np.ndarray
    energy_position: np.ndarray
    energy_velocity: np.ndarray
    observation_row: np.ndarray
    mass: np.ndarray
    stiffness: np.ndarray
    # u_x(1) and u(1) as rows over the position block
    slope_row: np.ndarray
    value_row: np.ndarray
    position_basis: BasisKind
    velocity_basis: BasisKind
    blocks: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.state_matrix.shape[0]

    def split(self, state):
        state = np.asarray(state, dtype=float)
        if state.shape[-1] != self.size:
            raise ValueError(f"state has length {state.shape[-1]}, expected {self.size}")
        return state[..., : self.dof], state[..., self.dof:]

    def position_row(self, row):
        """Extend a row over position coefficients by zeros on the velocity block."""
        return np.concatenate([np.asarray(row, dtype=float), np.zeros(self.dof)])

    def to_dict(self):
        """JSON-friendly dump for debugging (matrices as nested row-major lists)."""
        out = {
            "formulation": self.formulation.kind.value,
            "gamma": self.formulation.gamma,
            "n_poly": self.n_poly,
            "dof": self.dof,
            "position_basis": self.position_basis.value,
            "velocity_basis": self.velocity_basis.value,
        }
        for name in ("state_matrix", "energy_position", "energy_velocity", "observation_row",
                     "mass", "stiffness", "slope_row", "value_row"):
            out[name] = getattr(self, name).tolist()
        out["blocks"] = {k: np.asarray(v).tolist() for k, v in self.blocks.items()}
        return out


def classical_mass(N):
    """Pentadiagonal mass matrix of Lt_1..Lt_{N-1}."""
    n = N - 1
    M = np.zeros((n, n))
    i = np.arange(1, n + 1)
    M[i - 1, i - 1] = 2.0 / ((2 * i - 1) * (2 * i + 3))
    r = np.arange(1, n - 1)
    off = -1.0 / ((2 * r + 3) * np.sqrt((2 * r + 1) * (2 * r + 5)))
    M[r - 1, r + 1] = off
    M[r + 1, r - 1] = off
    return M


def mixed_blocks(N):
    """(K, M, D) of the mixed formulation, all of size N - 1."""
    n = N - 1
    i = np.arange(1, n + 1)
    K = np.eye(n)
    M = np.diag(2.0 / (2 * i - 1))
    D = np.zeros((n, n))
    D[i - 1, i - 1] = math.sqrt(2.0) / (np.sqrt(2 * i + 1) * (2 * i - 1))
    j = np.arange(1, n - 1)
    D[j + 1, j - 1] = -math.sqrt(2.0) / (np.sqrt(2 * j + 1) * (2 * j + 3))
    return K, M, D


def nitsche_blocks(N):
    """Closed-form (M, P, Q, R) on Lh_1..Lh_N.

    Row index i is the test function, column j the trial function:
    ``M = (Lh_j, Lh_i)``, ``P = (Lh_j', Lh_i')``, ``Q = Lh_j'(1) Lh_i(1)``, ``R = Lh_j(1) Lh_i(1)``.
    """
    idx = np.arange(1, N + 1)
    I, J = np.meshgrid(idx, idx, indexing="ij")
    odd_sum = (I + J) % 2 == 1
    M = np.where(I == J, (4.0 * I + 4.0) / (2.0 * I + 1.0), np.where(odd_sum, -2.0, 2.0))
    r = np.minimum(I, J)
    P = np.where(~odd_sum, r * r + r, 0).astype(float)
    Q = np.where(I % 2 == 1, J * J + J, 0).astype(float)
    R = np.where((I % 2 == 1) & (J % 2 == 1), 4.0, 0.0)
    return M, P, Q, R


def nitsche_blocks_by_quadrature(N):
    """Same matrices as :func:`nitsche_blocks`, from Gauss quadrature and endpoint traces."""
    rule = gauss_legendre(N + 2)
    v, d = basis_matrix(BasisKind.LEFT_DIRICHLET, N, rule.nodes)
    w = rule.weights[:, None]
    M = (v * w).T @ v
    P = (d * w).T @ d
    val1 = endpoint_value(BasisKind.LEFT_DIRICHLET, N)
    slope1 = endpoint_slope(BasisKind.LEFT_DIRICHLET, N)
    Q = np.outer(val1, slope1)
    R = np.outer(val1, val1)
    return M, P, Q, R


def _checked_nitsche_blocks(N):
    closed = nitsche_blocks(N)
    quad = nitsche_blocks_by_quadrature(N)
    out = []
    for name, a, b in zip("MPQR", closed, quad):
        scale = max(1.0, np.max(np.abs(b)))
        err = np.max(np.abs(a - b)) / scale
        if err > 1e-10:
            log.warning("Nitsche %s_N closed form differs from quadrature by %.2e (N=%d); using quadrature",
                        name, err, N)
            out.append(b)
        else:
            out.append(a)
    return out


def _second_order_state_matrix(M, K):
    n = M.shape[0]
    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = np.eye(n)
    A[n:, :n] = -solve(M, K, spd_hint=True)
    return A


def assemble(formulation, N):
    """Build the semi-discrete system of polynomial degree N (N >= 4)."""
    if not isinstance(formulation, Formulation):
        formulation = Formulation(formulation)
    N = int(N)
    if N < 4:
        raise ValueError(f"polynomial degree N must be >= 4, got {N}")
    kind = formulation.kind
    blocks = {}

    if kind is FormulationKind.CLASSICAL:
        dof = N - 1
        M = classical_mass(N)
        K = np.eye(dof)
        A = _second_order_state_matrix(M, K)
        Ke, Me = K, M
        pos_basis = vel_basis = BasisKind.DIRICHLET_BOTH
        slope = endpoint_slope(BasisKind.DIRICHLET_BOTH, dof)
        value = np.zeros(dof)
        obs = slope

    elif kind is FormulationKind.MIXED:
        dof = N - 1
        K, M, D = mixed_blocks(N)
        blocks["D"] = D
        # blockdiag(D, D^T)^-1 [[0, M], [-K, 0]]
        A = np.zeros((2 * dof, 2 * dof))
        A[:dof, dof:] = solve(D, M)
        A[dof:, :dof] = -solve(D.T, K)
        Ke, Me = K, M
        pos_basis, vel_basis = BasisKind.DIRICHLET_BOTH, BasisKind.PLAIN_LEGENDRE
        slope = endpoint_slope(BasisKind.DIRICHLET_BOTH, dof)
        value = np.zeros(dof)
        obs = slope

    else:
        dof = N
        gamma = formulation.gamma
        M, P, Q, R = _checked_nitsche_blocks(N)
        blocks.update(P=P, Q=Q, R=R)
        penalty = gamma * N * N
        pos_basis = vel_basis = BasisKind.LEFT_DIRICHLET
        slope = endpoint_slope(BasisKind.LEFT_DIRICHLET, dof)
        value = endpoint_value(BasisKind.LEFT_DIRICHLET, dof)
        if kind is FormulationKind.NITSCHE_SYMMETRIC:
            K = P - Q - Q.T + penalty * R
            Ke = K
            obs = slope - penalty * value
        else:
            # Galerkin rows of the non-symmetric form are P - Q + Q^T + penalty R; the
            # dual (observed) dynamics use its transpose.
            K = (P - Q + Q.T + penalty * R).T
            Ke = P
            obs = slope + penalty * value
        Me = M
        A = _second_order_state_matrix(M, K)

    return SemiDiscreteSystem(
        formulation=formulation,
        n_poly=N,
        dof=dof,
        state_matrix=_frozen(A),
        energy_position=_frozen(Ke),
        energy_velocity=_frozen(Me),
        observation_row=_frozen(np.concatenate([obs, np.zeros(dof)])),
        mass=_frozen(M),
        stiffness=_frozen(K),
        slope_row=_frozen(slope),
        value_row=_frozen(value),
        position_basis=pos_basis,
        velocity_basis=vel_basis,
        blocks={k: _frozen(v) for k, v in blocks.items()},
    )


def energy(system, state):
    pos, vel = system.split(state)
    return 0.5 * (pos @ system.energy_position @ pos + vel @ system.energy_velocity @ vel)


def verify_energy_conservation(system, T, n_check, seed=0):
    """Maximum relative energy drift of a random unit-energy state over [0, T]."""
    if system.formulation.kind is FormulationKind.NITSCHE_NONSYMMETRIC:
        raise UnsupportedFormulationError("the non-symmetric Nitsche scheme does not conserve energy")
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal(system.size)
    x0 /= math.sqrt(energy(system, x0))
    e0 = energy(system, x0)
    drift = 0.0
    for t in np.linspace(0.0, T, n_check):
        xt = expm(system.state_matrix, t) @ x0
        drift = max(drift, abs(energy(system, xt) - e0) / e0)
    return drift
