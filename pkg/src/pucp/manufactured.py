"""Problems with known exact solutions, for testing every downstream stage.

Kinds:

``affine``            v = x, any p, no drift.
``harmonic_monomial`` v = Re z^N, p = 2 only.
``radial``            v = |z|^{(p-2)/(p-1)} (log|z| at p = 2) on an annulus.
``drifted``           smooth v without critical points; W chosen so the
                      drift equation holds exactly.
``weighted``          ridge solution v = phi(s) of the weighted equation,
                      with A = c(t) / phi'(s)^{p-1} for the rotated
                      coordinates (s, t).

References solve the unregularised equation, so instances default to a
small regularisation ``epsilon = 1e-4`` (gradients here stay of order one)
instead of the solver's default of one grid spacing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy as sym

from .grid import DiskGrid, RealField, VectorField2
from .solver import PLaplaceProblem

__all__ = ["ManufacturedInstance", "manufactured_instance", "KINDS"]

KINDS = ("affine", "harmonic_monomial", "radial", "drifted", "weighted")

_x, _y = sym.symbols("x y", real=True)


@dataclass(frozen=True)
class ManufacturedInstance:
    kind: str
    problem: PLaplaceProblem
    reference: RealField
    exact: Callable[[np.ndarray, np.ndarray], np.ndarray]
    exact_gradient: Callable[[np.ndarray, np.ndarray], tuple]


def _lambdify(expr):
    f = sym.lambdify((_x, _y), expr, "numpy")
    return lambda X, Y: np.broadcast_to(np.asarray(f(X, Y), dtype=float), np.broadcast(X, Y).shape).copy()


def _symbolic_pieces(v_expr):
    vx, vy = sym.diff(v_expr, _x), sym.diff(v_expr, _y)
    return _lambdify(v_expr), (_lambdify(vx), _lambdify(vy)), vx, vy


def manufactured_instance(kind: str, p: float, grid: DiskGrid, *, N: int = 3,
                          epsilon: float = 1e-4, annulus: tuple = (1.0, 4.0),
                          amplitude: float = 0.3, wave: tuple = (0.4, 0.3),
                          angle: float = 0.3) -> ManufacturedInstance:
    if not p > 1:
        raise ValueError("p must exceed 1")
    X, Y = grid.x, grid.y
    mask = None
    drift = None
    weight = None
    variant = "drift"
    if kind == "affine":
        v_expr = _x
    elif kind == "harmonic_monomial":
        if p != 2:
            raise ValueError("harmonic monomials solve the equation only for p = 2")
        if N < 1:
            raise ValueError("N must be a positive integer")
        v_expr = sym.re(sym.expand((_x + sym.I * _y) ** N))
    elif kind == "radial":
        r_in, r_out = annulus
        if not 0 < r_in < r_out:
            raise ValueError("radial kind lives on an annulus r_in > 0 around the singular origin")
        if r_out > grid.domain_radius:
            raise ValueError("annulus must fit inside the domain disk")
        r = sym.sqrt(_x ** 2 + _y ** 2)
        v_expr = sym.log(r) if p == 2 else r ** sym.nsimplify((p - 2) / (p - 1))
        rho = grid.radius_from_center
        mask = (rho > r_in) & (rho < r_out)
    elif kind == "drifted":
        b1, b2 = wave
        v_expr = _x + amplitude * sym.sin(b1 * _x + b2 * _y)
        if amplitude * np.hypot(b1, b2) >= 1:
            raise ValueError("amplitude x wavenumber must stay below 1 to avoid critical points")
    elif kind == "weighted":
        variant = "weighted"
        c, s_ = np.cos(angle), np.sin(angle)
        s = c * _x + s_ * _y
        t = -s_ * _x + c * _y
        v_expr = s + amplitude * sym.sin(s)
        if amplitude >= 1:
            raise ValueError("amplitude must stay below 1 so the ridge profile is monotone")
        phi_prime = 1 + amplitude * sym.cos(s)
        A_expr = (1 + 0.25 * sym.sin(0.5 * t) ** 2) / phi_prime ** (p - 1)
        weight = RealField(grid, _lambdify(A_expr)(X, Y))
    else:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")

    v_num, grad_num, vx, vy = _symbolic_pieces(v_expr)
    if kind == "radial":
        # data is read only near the annulus; keep the hole finite
        rr = np.maximum(grid.radius_from_center, 0.5 * annulus[0])
        th = np.angle(grid.z - grid.center)
        vals = v_num(rr * np.cos(th), rr * np.sin(th))
    else:
        vals = v_num(X, Y)
    if kind == "drifted":
        eps = epsilon
        s2 = vx ** 2 + vy ** 2
        flux_div = sym.diff(s2 ** ((p - 2) / 2) * vx, _x) + sym.diff(s2 ** ((p - 2) / 2) * vy, _y)
        coef = -flux_div / s2 ** (p / 2)
        gx, gy = grad_num
        GX, GY = gx(X, Y), gy(X, Y)
        cval = _lambdify(coef)(X, Y)
        ok = np.hypot(GX, GY) >= 10 * eps
        drift = VectorField2(grid, np.where(ok, cval * GX, 0.0), np.where(ok, cval * GY, 0.0))
    ref = RealField(grid, vals)
    problem = PLaplaceProblem(variant=variant, p=p, grid=grid, boundary_data=vals, drift=drift,
                              weight=weight, epsilon=epsilon, domain_mask=mask,
                              reference=vals, description=f"{kind} p={p}")
    return ManufacturedInstance(kind, problem, ref, v_num, grad_num)
