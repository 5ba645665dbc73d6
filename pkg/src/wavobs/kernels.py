"""Dense linear algebra: matrix exponential, symmetric-definite pencils, linear solves."""
from dataclasses import dataclass, replace
import math

import numpy as np
import scipy.linalg as sla

from .errors import ExpmOverflowError, NotSPDError, SingularMatrixError


@dataclass(frozen=True)
class Tolerances:
    newton_step: float = 1e-14
    solve_residual: float = 1e-10
    singular_rcond: float = 1e-15
    gramian_symmetry: float = 1e-10
    pencil_negativity: float = 1e-9
    hum_residual: float = 1e-8
    ridge: float = 1e-12


TOLERANCES = Tolerances()


def get_tolerances():
    return TOLERANCES


def set_tolerances(**overrides):
    """Replace the process-wide tolerances (used by the CLI's tolerance overrides)."""
    global TOLERANCES
    TOLERANCES = replace(TOLERANCES, **overrides)
    return TOLERANCES


# Higham (2005) Pade coefficients and backward-error thresholds for degrees 3, 5, 7, 9, 13.
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
         33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0),
}
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}
_MAX_SQUARINGS = 1000


def _pade_uv(A, m):
    n = A.shape[0]
    b = _PADE[m]
    ident = np.eye(n)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident
        return U, V
    powers = [ident, A2]
    while len(powers) < (m + 1) // 2:
        powers.append(powers[-1] @ A2)
    U = sum(b[j] * powers[j // 2] for j in range(m, 0, -2))
    V = sum(b[j] * powers[j // 2] for j in range(m - 1, -1, -2))
    return A @ U, V


def expm(A, t=1.0):
    """``exp(A t)`` by scaling and squaring with a Pade approximant of degree at most 13."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {A.shape}")
    At = A * t
    norm = np.linalg.norm(At, 1) if At.size else 0.0
    if not np.isfinite(norm):
        raise ExpmOverflowError("matrix exponential argument has non-finite entries")
    s = 0
    for m in (3, 5, 7, 9):
        if norm <= _THETA[m]:
            break
    else:
        m = 13
        if norm > _THETA[13]:
            s = max(0, math.ceil(math.log2(norm / _THETA[13])))
            if s > _MAX_SQUARINGS:
                raise ExpmOverflowError(f"||A t||_1 = {norm:.3e} is too large to scale")
            At = At / 2.0**s
    U, V = _pade_uv(At, m)
    F = np.linalg.solve(V - U, V + U)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            F = F @ F
    if not np.all(np.isfinite(F)):
        raise ExpmOverflowError(f"matrix exponential overflowed (||A t||_1 = {norm:.3e})")
    return F


def cholesky(B):
    """Lower Cholesky factor of B; raises NotSPDError instead of LinAlgError."""
    try:
        return np.linalg.cholesky(np.asarray(B, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NotSPDError(f"matrix is not symmetric positive definite: {exc}") from None


def eig_sym_pencil(A, B):
    """Eigenpairs of ``A x = lam B x`` for symmetric A and SPD B.

    Reduces to the standard problem ``L^-1 A L^-T y = lam y`` with ``B = L L^T``.
    Eigenvalues are ascending; eigenvectors (columns) are B-orthonormal.
    """
    A = np.asarray(A, dtype=float)
    L = cholesky(B)
    X = sla.solve_triangular(L, A, lower=True)
    C = sla.solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    lam, Y = np.linalg.eigh(C)
    vecs = sla.solve_triangular(L.T, Y, lower=False)
    return lam, vecs


def _rcond(A):
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(A, 1)
    return cond if np.isfinite(cond) else float("inf")


def solve(A, b, spd_hint=False, tol=None):
    """Solve ``A x = b`` (b may be a matrix) via Cholesky or partially pivoted LU."""
    tol = tol or TOLERANCES
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"solve needs a square matrix, got shape {A.shape}")
    cond = _rcond(A)
    if cond * tol.singular_rcond > 1.0:
        raise SingularMatrixError("matrix is singular to working precision", cond)
    if spd_hint:
        try:
            factor = sla.cho_factor(A, lower=True, check_finite=False)
        except sla.LinAlgError as exc:
            raise NotSPDError(f"Cholesky factorization failed: {exc}") from None
        apply = lambda rhs: sla.cho_solve(factor, rhs, check_finite=False)
    else:
        try:
            with np.errstate(all="ignore"):
                factor = sla.lu_factor(A, check_finite=False)
        except sla.LinAlgError:
            raise SingularMatrixError("LU factorization failed", cond) from None
        apply = lambda rhs: sla.lu_solve(factor, rhs, check_finite=False)
    x = apply(b)
    # one step of iterative refinement
    x = x + apply(b - A @ x)
    bnorm = np.linalg.norm(b)
    if bnorm > 0:
        residual = np.linalg.norm(A @ x - b) / bnorm
        if residual > tol.solve_residual:
            raise SingularMatrixError(f"relative residual {residual:.3e} exceeds {tol.solve_residual:.0e}", cond)
    return x
