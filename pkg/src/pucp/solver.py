"""Dirichlet solvers for the drift and weighted p-Laplace equations.

    drift:     div(|grad v|^{p-2} grad v) + W . (|grad v|^{p-2} grad v) = 0
    weighted:  div(A |grad v|^{p-2} grad v) = 0

Discretisation is a five-point flux form on the grid samples inside the
domain mask; face fluxes use the normal difference and the averaged
tangential central difference. Every sample outside the mask carries
Dirichlet data. The degenerate factor is regularised to
``(|grad v|^2 + eps^2)^{(p-2)/2}``; each Picard step freezes it, solves
the resulting linear elliptic system with ILU-preconditioned BiCGStab
and is accepted only if the regularised residual decreases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import DiskGrid, RealField, VectorField2, fft_workers

log = logging.getLogger(__name__)

__all__ = [
    "PLaplaceProblem",
    "SolveReport",
    "solve_dirichlet",
    "weak_residual",
    "mollify_drift",
    "bump_kernel",
]

# H^1 seminorm of a P1 hat test function on a uniform five-point stencil
_HAT_SEMINORM = 2.0


@dataclass(frozen=True)
class PLaplaceProblem:
    variant: str
    p: float
    grid: DiskGrid
    boundary_data: np.ndarray
    drift: Optional[VectorField2] = None
    weight: Optional[RealField] = None
    epsilon: Optional[float] = None
    domain_mask: Optional[np.ndarray] = None
    reference: Optional[np.ndarray] = field(default=None, compare=False)
    description: str = ""

    def __post_init__(self):
        if self.variant not in ("drift", "weighted"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", self.grid.spacing)
        if not self.epsilon > 0:
            raise ValueError("regularisation epsilon must be positive")
        bd = np.asarray(self.boundary_data, dtype=float).reshape(self.grid.shape)
        object.__setattr__(self, "boundary_data", bd)
        if self.domain_mask is None:
            object.__setattr__(self, "domain_mask", self.grid.mask)
        if self.variant == "weighted":
            if self.weight is None:
                raise ValueError("weighted variant needs a weight field")
            if np.min(self.weight.samples[self.mask]) <= 0:
                raise ValueError("weight must be positive on the domain")
        if self.variant == "drift" and self.drift is None:
            object.__setattr__(self, "drift", VectorField2.zeros(self.grid))

    @property
    def mask(self) -> np.ndarray:
        return self.domain_mask

    def coefficient_field(self) -> np.ndarray:
        if self.variant == "weighted":
            return self.weight.samples
        return np.ones(self.grid.shape)


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    regularized_residual: float
    damping_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)  # RMS merit, one per accepted step
    achieved_tolerance: bool = False
    epsilon: float = 0.0


def _central(v, h):
    gx = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2 * h)
    gy = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2 * h)
    return gx, gy


def _kappa(s2, p, eps):
    if eps > 0:
        return (s2 + eps * eps) ** ((p - 2) / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(s2 > 0, s2 ** ((p - 2) / 2), 0.0)
    return out


def _face_coefficients(prob: PLaplaceProblem, v, eps, p=None):
    """kappa on east faces (i, j)-(i, j+1) and north faces (i, j)-(i+1, j)."""
    h = prob.grid.spacing
    p = prob.p if p is None else p
    gx, gy = _central(v, h)
    A = prob.coefficient_field()
    dx_e = (np.roll(v, -1, axis=1) - v) / h
    dy_e = 0.5 * (gy + np.roll(gy, -1, axis=1))
    dy_n = (np.roll(v, -1, axis=0) - v) / h
    dx_n = 0.5 * (gx + np.roll(gx, -1, axis=0))
    ke = _kappa(dx_e ** 2 + dy_e ** 2, p, eps) * 0.5 * (A + np.roll(A, -1, axis=1))
    kn = _kappa(dx_n ** 2 + dy_n ** 2, p, eps) * 0.5 * (A + np.roll(A, -1, axis=0))
    kc = _kappa(gx ** 2 + gy ** 2, p, eps)
    return ke, kn, kc, gx, gy


def _operator(prob: PLaplaceProblem, v, eps):
    h = prob.grid.spacing
    ke, kn, kc, gx, gy = _face_coefficients(prob, v, eps)
    fe = ke * (np.roll(v, -1, axis=1) - v)
    fn = kn * (np.roll(v, -1, axis=0) - v)
    div = (fe - np.roll(fe, 1, axis=1) + fn - np.roll(fn, 1, axis=0)) / (h * h)
    if prob.variant == "drift":
        W = prob.drift
        div = div + kc * (W.x_component * gx + W.y_component * gy)
    return div


def weak_residual(prob: PLaplaceProblem, v: np.ndarray, eps: float | None = None,
                  norm: str = "max") -> float:
    """Weak-form residual against hat test functions, scaled by ||grad eta||_{L^2}.

    ``norm="max"`` is the supremum over all hats (the convergence measure);
    ``norm="rms"`` averages their squares and serves as the damping merit,
    since the maximum can rise locally along a globally improving step.
    ``eps=0`` evaluates the unregularised form.
    """
    e = prob.epsilon if eps is None else eps
    R = _operator(prob, v, e)[prob.mask]
    h = prob.grid.spacing
    if not R.size:
        return 0.0
    scale = h * h / _HAT_SEMINORM
    if norm == "max":
        return float(np.max(np.abs(R)) * scale)
    if norm == "rms":
        return float(np.sqrt(np.mean(R * R)) * scale)
    raise ValueError(f"unknown residual norm {norm!r}")


def _assemble(prob: PLaplaceProblem, v, eps, index, rows_int, cols_int, p=None):
    """Frozen-coefficient linear system ``M u = b`` on the unknowns."""
    h = prob.grid.spacing
    n = prob.grid.n_per_side
    ke, kn, kc, _, _ = _face_coefficients(prob, v, eps, p)
    i, j = rows_int, cols_int
    nb = [  # (di, dj, coefficient of neighbour)
        (0, 1, ke[i, j]),
        (0, -1, ke[i, j - 1]),
        (1, 0, kn[i, j]),
        (-1, 0, kn[i - 1, j]),
    ]
    if prob.variant == "drift":
        W = prob.drift
        wx = kc[i, j] * W.x_component[i, j] * h / 2
        wy = kc[i, j] * W.y_component[i, j] * h / 2
        nb = [(0, 1, nb[0][2] + wx), (0, -1, nb[1][2] - wx),
              (1, 0, nb[2][2] + wy), (-1, 0, nb[3][2] - wy)]
    me = index[i, j]
    diag = -(ke[i, j] + ke[i, j - 1] + kn[i, j] + kn[i - 1, j])
    R = [me]
    C = [me]
    V = [diag]
    b = np.zeros(len(me))
    bd = prob.boundary_data
    for di, dj, c in nb:
        ii = (i + di) % n
        jj = (j + dj) % n
        other = index[ii, jj]
        known = other < 0
        R.append(me[~known])
        C.append(other[~known])
        V.append(c[~known])
        b[known] -= c[known] * bd[ii[known], jj[known]]
    M = sp.csr_matrix((np.concatenate(V), (np.concatenate(R), np.concatenate(C))),
                      shape=(len(me), len(me)))
    return M, b


def _linear_solve(M, b, x0, rtol: float, atol_inf: float | None = None):
    """BiCGStab solve; falls back to a direct solve when the Krylov result
    misses ``rtol`` or, if given, the max-norm residual target ``atol_inf``
    (relative tolerances alone fail for large boundary data)."""
    try:
        ilu = spla.spilu(M.tocsc(), drop_tol=1e-5, fill_factor=20)
        P = spla.LinearOperator(M.shape, ilu.solve)
    except RuntimeError:
        P = None
    # ILU breaks symmetry, so BiCGStab serves the symmetric case as well
    x, info = spla.bicgstab(M, b, x0=x0, rtol=rtol, atol=0.0, M=P, maxiter=500)
    ok = info == 0 and np.all(np.isfinite(x))
    if ok and atol_inf is not None:
        ok = float(np.max(np.abs(M @ x - b), initial=0.0)) <= atol_inf
    if not ok:
        log.debug("Krylov solve missed its target (info=%s); falling back to direct", info)
        x = spla.spsolve(M.tocsc(), b)
    return x


def solve_dirichlet(problem: PLaplaceProblem, tol: float = 1e-10, max_iter: int = 200,
                    initial: np.ndarray | None = None):
    """Damped Picard iteration for the regularised discrete problem.

    Returns ``(RealField, SolveReport)``. The report's ``final_residual`` is
    the unregularised weak residual; convergence is judged on the
    regularised one, which is the equation actually solved.
    """
    grid = problem.grid
    mask = problem.mask
    eps = problem.epsilon
    rows_int, cols_int = np.nonzero(mask)
    index = -np.ones(grid.shape, dtype=np.int64)
    index[rows_int, cols_int] = np.arange(len(rows_int))
    v = np.where(mask, 0.0, problem.boundary_data)
    if initial is not None:
        v[mask] = np.asarray(initial).reshape(grid.shape)[mask]
    else:
        # start from the p = 2 solution with the same data
        M, b = _assemble(problem, v, eps, index, rows_int, cols_int, p=2.0)
        v[mask] = _linear_solve(M, b, None, rtol=1e-10, atol_inf=tol)
    res = weak_residual(problem, v)
    merit = weak_residual(problem, v, norm="rms")
    report = SolveReport(0, 0.0, res, epsilon=eps)
    report.residual_history.append(merit)
    # Picard's error map has spectrum in [-|p-2|, 0] relative to the frozen
    # operator; relaxation 2/p balances its ends (rate |p-2|/p)
    lam0 = 2.0 / problem.p
    lam = lam0
    it = 0
    while res > tol and it < max_iter:
        it += 1
        M, b = _assemble(problem, v, eps, index, rows_int, cols_int)
        # the weak residual of an iterate is max|M v - b| / 2
        u = _linear_solve(M, b, v[mask], rtol=min(1e-6, max(1e-13, 1e-3 * res)),
                          atol_inf=max(tol, 2e-3 * res))
        step = u - v[mask]
        accepted = False
        while lam >= lam0 / 256:
            trial = v.copy()
            trial[mask] = v[mask] + lam * step
            m_trial = weak_residual(problem, trial, norm="rms")
            if m_trial < merit:
                accepted = True
                break
            lam /= 2
        if not accepted:
            log.info("Picard stagnated at residual %.3e after %d steps", res, it)
            break
        v, merit = trial, m_trial
        res = weak_residual(problem, v)
        report.damping_history.append(lam)
        report.residual_history.append(merit)
        lam = min(lam0, 2 * lam)
    report.iterations = it
    report.regularized_residual = res
    report.final_residual = weak_residual(problem, v, eps=0.0)
    report.achieved_tolerance = res <= tol
    return RealField(grid, v), report


def bump_kernel(grid: DiskGrid, radius: float) -> np.ndarray:
    """Normalised C^2 bump (1 - |z|^2/radius^2)^3 centred at sample 0, wrapped."""
    n = grid.n_per_side
    d = (np.arange(n) - n // 2) * grid.spacing
    r2 = (d[None, :] ** 2 + d[:, None] ** 2) / radius ** 2
    k = np.where(r2 < 1, (1 - r2) ** 3, 0.0)
    k /= k.sum() * grid.spacing ** 2
    return np.fft.ifftshift(k)


def mollify_drift(W: VectorField2, epsilon: float) -> VectorField2:
    """Componentwise convolution with a unit-mass C^2 bump of radius epsilon."""
    grid = W.grid
    if epsilon < 2 * grid.spacing:
        raise ValueError(f"epsilon={epsilon} is below resolution (needs >= 2 x spacing)")
    k = bump_kernel(grid, epsilon)
    K = sfft.rfft2(k, workers=fft_workers()) * grid.spacing ** 2
    out = []
    for comp in (W.x_component, W.y_component):
        out.append(sfft.irfft2(sfft.rfft2(comp, workers=fft_workers()) * K, s=grid.shape,
                               workers=fft_workers()))
    return VectorField2(grid, out[0], out[1])
