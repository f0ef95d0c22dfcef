"""Three-circle, Harnack and Hölder checks, and vanishing-order estimation.

Every check accepts either a sampled field or a callable of complex points
(analytic fixtures). Sampled fields are read on grid samples where the
disc holds enough of them and through their trigonometric interpolant
below that scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .grid import DiskGrid, _Field, _check_disc, disc_samples, fourier_eval

__all__ = [
    "AnnulusNorms",
    "VanishingOrderFit",
    "circle_max",
    "disc_sup",
    "disc_lp",
    "annulus_norms",
    "three_circle_check",
    "fit_theta",
    "hadamard_theta",
    "upper_harnack_check",
    "holder_check_qc",
    "vanishing_order_fit",
]

_EPS = np.finfo(float).eps
_MIN_SAMPLES_RADIUS = 4  # discs below this many spacings are read through the interpolant


def _is_field(source) -> bool:
    return isinstance(source, _Field)


def _evaluate(source, pts: np.ndarray) -> np.ndarray:
    if _is_field(source):
        return fourier_eval(source, pts)
    return np.asarray(source(pts))


def circle_max(source, radius: float, center: complex = 0j, angles: int = 1024) -> float:
    """max |source| on the circle, sampled at equispaced angles from angle 0."""
    th = 2 * np.pi * np.arange(angles) / angles
    pts = complex(center) + radius * np.exp(1j * th)
    return float(np.abs(_evaluate(source, pts)).max())


def disc_sup(source, radius: float, center: complex = 0j, *, subtract: complex = 0.0,
             m: int = 96, angles: int = 512) -> float:
    """sup of |source - subtract| on the open disc.

    Grid fields with a disc of at least four spacings use their samples,
    smaller discs (and callables) a midpoint grid; both add the circle of
    radius ``radius (1 - 1e-12)`` through the interpolant, since the sup of
    a subharmonic modulus sits on the boundary.
    """
    center = complex(center)
    if _is_field(source):
        grid = source.grid
        _check_disc(grid, radius, center)
        if radius >= _MIN_SAMPLES_RADIUS * grid.spacing:
            sel = grid.disc_mask(radius, center)
            inner = float(np.abs(np.asarray(source.samples)[sel] - subtract).max())
            return max(inner, _ring_sup(source, radius, center, subtract, angles))
    vals, _, _ = disc_samples(source, radius, center, m)
    return max(float(np.abs(vals - subtract).max()), _ring_sup(source, radius, center, subtract, angles))


def _ring_sup(source, radius, center, subtract, angles) -> float:
    th = 2 * np.pi * np.arange(angles) / angles
    ring = _evaluate(source, center + radius * (1 - 1e-12) * np.exp(1j * th))
    return float(np.abs(ring - subtract).max())


def disc_lp(source, exponent: float, radius: float, center: complex = 0j, m: int = 96) -> float:
    """L^p norm over the open disc (grid midpoint rule or refined sampling)."""
    center = complex(center)
    if _is_field(source):
        grid = source.grid
        _check_disc(grid, radius, center)
        if radius >= _MIN_SAMPLES_RADIUS * grid.spacing:
            sel = grid.disc_mask(radius, center)
            a = np.abs(np.asarray(source.samples)[sel])
            if np.isinf(exponent):
                return float(a.max())
            return float((np.sum(a ** exponent) * grid.spacing ** 2) ** (1 / exponent))
    vals, pts, _ = disc_samples(source, radius, center, m)
    a = np.abs(vals)
    if np.isinf(exponent):
        return float(a.max())
    w = math.pi * radius ** 2 / len(pts)
    return float((np.sum(a ** exponent) * w) ** (1 / exponent))


def disc_mean(source, radius: float, center: complex = 0j, m: int = 96) -> float:
    return disc_lp(source, 1, radius, center, m) / (math.pi * radius ** 2)


@dataclass(frozen=True)
class AnnulusNorms:
    radii: tuple
    sup_norms: tuple
    l2_norms: tuple
    center: complex = 0j

    def __post_init__(self):
        r = np.asarray(self.radii)
        if np.any(np.diff(r) <= 0):
            raise ValueError("radii must be strictly increasing")


def annulus_norms(source, radii: Sequence[float], center: complex = 0j) -> AnnulusNorms:
    radii = tuple(float(r) for r in radii)
    sups = tuple(disc_sup(source, r, center) for r in radii)
    l2s = tuple(disc_lp(source, 2, r, center) for r in radii)
    return AnnulusNorms(radii, sups, l2s, complex(center))


def hadamard_theta(r1: float, r2: float, r3: float) -> float:
    """Exponent with M(r2) <= M(r1)^theta M(r3)^(1 - theta)."""
    if not 0 < r1 < r2 < r3:
        raise ValueError("radii must satisfy 0 < r1 < r2 < r3")
    return math.log(r3 / r2) / math.log(r3 / r1)


def three_circle_check(source, r=None, center: complex = 0j, mode: str = "holomorphic_exact", *,
                       radii: Sequence[float] | None = None, rel_tol: float = 1e-6,
                       fit_tol: float = 0.2, inner_scale: float = 1.0,
                       outer_radius: float | None = None, C: float = 1.0) -> dict:
    """Hadamard three-circle equality, or the fitted quasiregular form.

    ``holomorphic_exact``: ``radii = (r1, r2, r3)`` (``r`` alone means
    ``(r, 4r, 24r)``); compares M(r2) with M(r1)^theta M(r3)^(1-theta) on
    circles. Equality within ``rel_tol`` marks a monomial; ``<=`` must hold
    for every holomorphic map.

    ``quasiregular_fit``: ``radii`` is the sweep of r. For each r it forms
    a = ||phi||_{L2(B_{r/2})} / r, b = ||phi||_{L2(B_outer)} and
    c = ||phi||_{L_inf(B_inner)}, solves c = C a^theta b^(1-theta) for
    theta*, and fits theta* log(E'/r) = E by regressing 1/theta* on
    log(1/r). ``inner_scale`` and ``outer_radius`` default to the unit and
    seven-eighths of the domain (the B_1, B_7 pair on B_8).
    """
    center = complex(center)
    if mode == "holomorphic_exact":
        if radii is None:
            if r is None:
                raise ValueError("give r or radii")
            radii = (r, 4 * r, 24 * r)
        r1, r2, r3 = radii
        theta = hadamard_theta(r1, r2, r3)
        M1, M2, M3 = (circle_max(source, s, center) for s in (r1, r2, r3))
        rhs = M1 ** theta * M3 ** (1 - theta) if M1 > 0 else 0.0
        rel = abs(M2 - rhs) / max(abs(rhs), 1e-300)
        return {
            "mode": mode, "radii": [r1, r2, r3], "theta": theta,
            "M": [M1, M2, M3], "lhs": M2, "rhs": rhs, "relative_gap": rel,
            "equality": bool(rel <= rel_tol), "inequality": bool(M2 <= rhs * (1 + rel_tol)),
        }
    if mode != "quasiregular_fit":
        raise ValueError(f"unknown mode {mode!r}")
    if radii is None:
        radii = [2.0 ** -j for j in range(3, 9)]
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    if _is_field(source):
        R = source.grid.domain_radius
    else:
        R = 8.0
    outer = 7 * R / 8 if outer_radius is None else outer_radius
    scale = R / 8 * inner_scale
    b = disc_lp(source, 2, outer, center)
    c = disc_sup(source, scale, center)
    rows = []
    for rr in radii:
        a = disc_lp(source, 2, rr / 2, center) / rr
        if b == 0:
            rows.append((rr, a, math.nan))
            continue
        if a == 0:
            rows.append((rr, a, math.inf))
            continue
        denom = math.log(a) - math.log(b)
        theta = (math.log(c / C) - math.log(b)) / denom if denom != 0 else math.inf
        rows.append((rr, a, theta))
    thetas = np.array([t for _, _, t in rows])
    report = {"mode": mode, "radii": radii.tolist(), "inner_sup": c, "outer_l2": b,
              "inner_l2_scaled": [a for _, a, _ in rows], "theta_star": thetas.tolist(), "C": C}
    if not np.all(np.isfinite(thetas)) or np.any(thetas <= 0):
        report.update(infinite_order_signal=bool(np.any(np.isinf(thetas))), E=math.nan,
                      E_prime=math.nan, log_E_prime=math.nan, variation=math.inf, passed=False)
        return report
    fit = fit_theta(radii, thetas)
    report.update(fit, infinite_order_signal=False, passed=bool(fit["variation"] <= fit_tol))
    return report


def fit_theta(radii, theta_star, beta_floor: float = 1e-2) -> dict:
    """Fit theta(r) = E / log(E'/r) below measured equality exponents.

    Regresses 1/theta* on log(1/r), then raises the intercept until the
    fitted theta is at most theta* at every radius, so the three-circle
    inequality built from the fit holds wherever theta* does. theta* values
    above 1 constrain nothing (theta lives in (0, 1)) and are capped; +inf
    marks radii where every theta works. E' is returned in log form since it
    overflows for nearly constant theta*.
    """
    radii = np.asarray(radii, dtype=float)
    ts = np.asarray(theta_star, dtype=float)
    if np.any(np.isnan(ts)) or np.any(ts <= 0):
        raise ValueError("theta* must be positive; the three-circle inequality fails outright")
    capped = np.minimum(ts, 1.0)
    L = np.log(1 / radii)
    inv = 1 / capped
    beta, alpha = np.polyfit(L, inv, 1) if len(L) > 1 else (0.0, float(inv[0]))
    beta = max(float(beta), beta_floor)
    alpha_safe = max(float(alpha), float(np.max(inv - beta * L)))
    E = 1 / beta
    log_Ep = alpha_safe * E
    theta_fit = E / (log_Ep + L)
    finite = np.isfinite(ts)
    products = ts[finite] * (log_Ep + L[finite])
    variation = float((products.max() - products.min()) / products.mean()) if products.size else 0.0
    return {
        "E": E, "log_E_prime": log_Ep,
        "E_prime": math.exp(log_Ep) if log_Ep < 700 else math.inf,
        "E_prime_unshifted": math.exp(alpha * E) if alpha * E < 700 else math.inf,
        "theta_fit": theta_fit.tolist(), "products": products.tolist(), "variation": variation,
    }


def upper_harnack_check(source, r: float, center: complex = 0j, C_budget: float | None = None,
                        m: int = 96) -> dict:
    """sup over B_{r/2} divided by the mean of |phi| over B_r."""
    sup = disc_sup(source, r / 2, center, m=m)
    mean = disc_mean(source, r, center, m=m)
    if mean == 0:
        ratio = 0.0 if sup == 0 else math.inf
    else:
        ratio = sup / mean
    return {"r": r, "sup_half": sup, "mean": mean, "C_meas": ratio, "C_budget": C_budget,
            "passed": True if C_budget is None else bool(ratio <= C_budget)}


def holder_check_qc(source, alpha_expected: float, C0_expected: float, *, radius: float = 6.0,
                    center: complex = 0j, pairs: int = 10_000, seed: int = 0,
                    min_separation: float = 0.0) -> dict:
    """Two-sided Hölder bounds C0^{-1}|x-y|^{1/alpha} <= |f(x)-f(y)| <= C0 |x-y|^alpha.

    Pairs are drawn uniformly in the disc; for grid fields the draws snap
    to samples so no interpolation enters.
    """
    rng = np.random.default_rng(seed)
    center = complex(center)
    if _is_field(source):
        grid = source.grid
        _check_disc(grid, radius, center)
        idx = np.flatnonzero(grid.disc_mask(radius, center))
        i = rng.choice(idx, size=pairs)
        j = rng.choice(idx, size=pairs)
        zx, zy = grid.z.ravel()[i], grid.z.ravel()[j]
        fx, fy = np.asarray(source.samples).ravel()[i], np.asarray(source.samples).ravel()[j]
    else:
        def draw():
            rr = radius * np.sqrt(rng.random(pairs))
            return center + rr * np.exp(2j * np.pi * rng.random(pairs))
        zx, zy = draw(), draw()
        fx, fy = np.asarray(source(zx)), np.asarray(source(zy))
    d = np.abs(zx - zy)
    keep = d > max(min_separation, 0.0)
    d, df = d[keep], np.abs(fx - fy)[keep]
    upper = df / d ** alpha_expected
    with np.errstate(divide="ignore"):
        lower = d ** (1 / alpha_expected) / df
    C0_meas = float(max(upper.max(), lower.max())) if d.size else 0.0
    # isometries give ratios of exactly C0 up to rounding
    limit = C0_expected * (1 + 1e-9)
    violations = int(np.count_nonzero((upper > limit) | (lower > limit)))
    return {"alpha": alpha_expected, "C0_expected": C0_expected, "C0_measured": C0_meas,
            "upper_ratio_max": float(upper.max()) if d.size else 0.0,
            "lower_ratio_max": float(lower.max()) if d.size else 0.0,
            "pairs": int(d.size), "violations": violations, "passed": violations == 0}


@dataclass(frozen=True)
class VanishingOrderFit:
    radii: tuple
    norms: tuple
    slope: float
    residual: float
    local_slope: float
    verdict: str  # "finite_order" | "exceeds_N_max" | "constant"
    N_max: float
    center_value: float = 0.0
    extra: dict = dc_field(default_factory=dict)

    @property
    def beta(self) -> float:
        return self.slope


def vanishing_order_fit(source, center: complex = 0j, r_min: float = 2.0 ** -7,
                        r_max: float = 1.0, N_max: float = 50.0, *,
                        center_value: float | None = None) -> VanishingOrderFit:
    """Slope of log ||v - v(center)||_{L_inf(B_r)} against log r over dyadic r.

    The verdict is ``constant`` when every norm is below 10 eps max(1, |v(c)|),
    ``exceeds_N_max`` when the local slope over the smallest decade of radii
    is above ``N_max``, and ``finite_order`` otherwise.
    """
    center = complex(center)
    if _is_field(source):
        grid: DiskGrid = source.grid
        if r_min < 4 * grid.spacing * (1 - 1e-12):
            raise ValueError(f"r_min={r_min} is below 4 spacings ({4 * grid.spacing})")
        _check_disc(grid, r_max, center)
    radii = []
    r = r_max
    while r >= r_min * (1 - 1e-12):
        radii.append(r)
        r /= 2
    if len(radii) < 6:
        raise ValueError("need at least 6 dyadic radii between r_min and r_max")
    radii = np.array(radii[::-1])
    if center_value is None:
        center_value = complex(_evaluate(source, np.array([center]))[0])
        if _is_field(source):
            i, j = source.grid.index_of(center)
            if abs(source.grid.z[i, j] - center) < 1e-12:
                center_value = complex(np.asarray(source.samples)[i, j])
    cv = center_value.real if abs(complex(center_value).imag) == 0 else center_value
    norms = np.array([disc_sup(source, rr, center, subtract=cv) for rr in radii])
    floor = 10 * _EPS * max(1.0, abs(cv))
    if _is_field(source):
        # constancy is judged on samples; the rim interpolant adds FFT rounding
        sel = source.grid.disc_mask(radii[-1], center)
        on_samples = float(np.abs(np.asarray(source.samples)[sel] - cv).max())
        if on_samples <= floor:
            norms = np.minimum(norms, on_samples)
    if np.all(norms <= floor):
        return VanishingOrderFit(tuple(radii), tuple(norms), math.nan, 0.0, math.nan,
                                 "constant", N_max, float(np.real(cv)))
    pos = norms > 0
    L, Y = np.log(radii[pos]), np.log(norms[pos])
    coef, res, *_ = np.polyfit(L, Y, 1, full=True)
    slope = float(coef[0])
    resid = float(math.sqrt(res[0] / len(L))) if len(res) else 0.0
    dec = pos & (radii <= 10 * radii[0] * (1 + 1e-12))
    if np.count_nonzero(dec) >= 2:
        local = float(np.polyfit(np.log(radii[dec]), np.log(norms[dec]), 1)[0])
    elif not pos[0]:
        local = math.inf
    else:
        local = slope
    if not pos[0]:  # vanished to rounding at the smallest radius but not everywhere
        local = math.inf
    verdict = "exceeds_N_max" if local > N_max else "finite_order"
    return VanishingOrderFit(tuple(radii), tuple(norms), slope, resid, local, verdict, N_max,
                             float(np.real(cv)))
