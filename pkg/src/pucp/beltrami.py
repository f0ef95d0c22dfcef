"""Complex-gradient reduction of p-Laplace solutions to Beltrami equations.

For a solution v with complex gradient G = v_x - i v_y (G = A v_x - i A v_y
in the weighted case), F = |G|^a G with a = (p - 2)/2 satisfies

    F_zbar = q1 F_z + q2 conj(F_z) + q3 F.

With o1 = q1 + q2 conj(F_z)/F_z (so |o1| <= |q1| + |q2| = k) and o2 = q3 the
equation reads F_zbar = o1 F_z + o2 F. Solving (I - o1 S) g = o2 and setting
omega = T g, f = F exp(-omega) removes the zero-order term:
f_zbar = o1 f_z, so f is quasiregular with the same k.

The nonlinear variant works with F = v + i w instead, w the stream function
of A |grad v|^{p-2} grad v, and F_zbar = mu conj(F_z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.ndimage as ndi
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fieldio import write_field
from .textfmt import dumps
from .grid import ComplexField, DiskGrid, RealField, VectorField2, wirtinger_derivatives
from .singular import TransformPlan, beurling_transform, cauchy_transform, make_plan

__all__ = [
    "VARIANTS",
    "BeltramiSystem",
    "ReductionResult",
    "NeumannDivergence",
    "OmegaOverflow",
    "complex_gradient_F",
    "beltrami_constants",
    "general_a_coefficients",
    "choose_delta",
    "assemble_coefficients",
    "neumann_solve",
    "normalize_f",
    "reduce_solution",
    "quasiregularity_check",
    "w12_difference_quotient_check",
    "conjugate_function",
    "save_reduction",
]

VARIANTS = ("drift", "weighted_lipschitz", "weighted_nonlinear")
OMEGA_CAP = 50.0


class NeumannDivergence(RuntimeError):
    pass


class OmegaOverflow(OverflowError):
    def __init__(self, norm: float):
        super().__init__(f"||omega||_inf = {norm:.6g} exceeds the exponential guard {OMEGA_CAP}")
        self.norm = norm


def beltrami_constants(p: float) -> tuple[float, float, float]:
    """Closed-form (k, K, p0); p0 is ``inf`` when k = 0."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    k = (p - 2) / (p + 2) if p >= 2 else (2 - p) / (3 * p - 2)
    K = (1 + k) / (1 - k)
    p0 = math.inf if k == 0 else 1 + 1 / k
    return k, K, p0


def general_a_coefficients(p: float, a: float | None = None) -> dict:
    """Coefficient prefactors written in terms of a = (p-2)/2 and of p alone."""
    a = (p - 2) / 2 if a is None else a
    return {
        "general": ((p - 2 - a) / (p + a), a / (a + 2), 2 * (a + 1) / (a + p)),
        "closed": ((p - 2) / (3 * p - 2), (p - 2) / (p + 2), 2 * p / (3 * p - 2)),
    }


def choose_delta(p: float, q: float) -> float:
    """Integrability exponent: q below 1 + 1/k, else (3k + 1)/(2k)."""
    if q < max(2.0, p):
        raise ValueError("q must be at least max(2, p)")
    k, _, p0 = beltrami_constants(p)
    if k == 0 or q < p0:
        return float(q)
    return (3 * k + 1) / (2 * k)


def complex_gradient_F(v: RealField, p: float, *, weight: RealField | None = None,
                       method: str = "centered_difference") -> ComplexField:
    """F = |G|^a G with G = 2 dv/dz (times the weight if given); F = 0 where G = 0."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    dz, _ = wirtinger_derivatives(v, method)
    G = 2 * dz.samples
    if weight is not None:
        G = G * weight.samples
    return ComplexField(v.grid, _power_map(G, (p - 2) / 2))


def _power_map(G: np.ndarray, a: float) -> np.ndarray:
    mod = np.abs(G)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(mod > 0, mod ** a * G, 0.0)
    return out


@dataclass(frozen=True)
class BeltramiSystem:
    variant: str
    p: float
    a: float
    k: float
    K: float
    p0: float
    delta: float
    F: ComplexField
    q1: ComplexField
    q2: ComplexField
    q3: ComplexField
    o1: ComplexField
    o2: ComplexField
    unmasked: np.ndarray
    mask_tau: float
    masked_fraction: float
    M: float
    q3_norm_delta: float
    method: str = "centered_difference"

    @property
    def mu(self) -> ComplexField:
        """Second-kind coefficient of the nonlinear variant (stored in q2)."""
        return self.q2

    def summary(self) -> dict:
        return {
            "variant": self.variant,
            "p": self.p,
            "a": self.a,
            "k": self.k,
            "K": self.K,
            "p0": self.p0,
            "delta": self.delta,
            "mask_tau": self.mask_tau,
            "masked_fraction": self.masked_fraction,
            "M": self.M,
            "q3_norm_delta": self.q3_norm_delta,
        }


def _lp(grid: DiskGrid, vals: np.ndarray, exponent: float, where=None) -> float:
    m = grid.mask if where is None else where
    a = np.abs(vals[m])
    if np.isinf(exponent):
        return float(a.max()) if a.size else 0.0
    return float((np.sum(a ** exponent) * grid.spacing ** 2) ** (1 / exponent))


def assemble_coefficients(v: RealField, A, p: float, variant: str, *, q: float | None = None,
                          method: str = "centered_difference", mask_tau_rel: float = 1e-8,
                          domain: np.ndarray | None = None) -> BeltramiSystem:
    """Coefficient fields on the unmasked set, zero elsewhere.

    ``A`` is the drift (VectorField2, ``None`` for zero) for ``drift`` and
    the positive weight (RealField) for the two weighted variants. ``q``
    picks delta via :func:`choose_delta`; it defaults to max(2, p), or to
    the measured-norm exponent 2 when p <= 2.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    grid = v.grid
    dom = grid.mask if domain is None else domain
    a = (p - 2) / 2
    q = max(2.0, p) if q is None else q

    if variant == "drift":
        if A is None:
            A = VectorField2.zeros(grid)
        if not isinstance(A, VectorField2):
            raise TypeError("drift variant takes a VectorField2")
        F = complex_gradient_F(v, p, method=method)
        M = max(1.0, _lp(grid, A.modulus, q, dom))
    else:
        if not isinstance(A, RealField):
            raise TypeError("weighted variants take a RealField weight")
        if np.min(A.samples[dom]) <= 0:
            raise ValueError("weight must be positive on the domain")
        if variant == "weighted_lipschitz":
            F = complex_gradient_F(v, p, weight=A, method=method)
        else:
            F = ComplexField(grid, v.samples + 1j * conjugate_function(v, A, p, method=method,
                                                                     domain=dom).samples)
        M = max(1.0, float(np.max(A.samples[dom])))

    Fs = F.samples
    Fmax = float(np.abs(Fs[dom]).max()) if np.any(dom) else 0.0
    tau = mask_tau_rel * Fmax
    unmasked = dom & (np.abs(Fs) >= tau) & (np.abs(Fs) > 0)
    n_dom = int(np.count_nonzero(dom))
    masked_fraction = 1.0 - np.count_nonzero(unmasked) / n_dom if n_dom else 1.0

    zero = np.zeros(grid.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(unmasked, np.conj(Fs) / Fs, 0.0)  # conj(F)/F, unimodular

    Fz, _ = wirtinger_derivatives(F, method)
    Fz = Fz.samples
    if variant == "weighted_nonlinear":
        dvz, _ = wirtinger_derivatives(v, method)
        B = 2.0 ** (p - 2) * A.samples * np.abs(dvz.samples) ** (p - 2) if p != 2 else A.samples
        with np.errstate(divide="ignore", invalid="ignore"):
            mu = np.where(unmasked, (1 - B) / (1 + B), 0.0)
        q1 = zero
        q2 = mu.astype(complex)
        q3 = zero
        k = float(np.abs(mu[unmasked]).max()) if np.any(unmasked) else 0.0
        K = (1 + k) / (1 - k) if k < 1 else math.inf
        p0 = math.inf if k == 0 else 1 + 1 / k
    else:
        c1, c2, c3 = general_a_coefficients(p)["closed"]  # (p-2)/(3p-2), (p-2)/(p+2), 2p/(3p-2)
        q1 = -0.5 * (c2 + c1) * ratio
        with np.errstate(divide="ignore", invalid="ignore"):
            q2 = np.where(unmasked, -0.5 * (c1 - c2) / ratio, 0.0)
        if variant == "drift":
            # prefactor p/(2(3p-2)) = c3/4 is what F_zbar = 1/2 (d_x + i d_y) F requires
            q3 = -0.25 * c3 * (A.x_component * (1 + ratio) + 1j * A.y_component * (1 - ratio))
        else:
            q3 = _weighted_q3(A, p, ratio, method)
        q3 = np.where(unmasked, q3, 0.0)
        k, K, p0 = beltrami_constants(p)

    with np.errstate(divide="ignore", invalid="ignore"):
        rot = np.where(unmasked & (np.abs(Fz) > 0), np.conj(Fz) / Fz, 0.0)
    o1 = np.where(unmasked, q1 + q2 * rot, 0.0)
    delta = choose_delta(p, q) if variant != "weighted_nonlinear" else 2.0
    return BeltramiSystem(
        variant=variant, p=p, a=a, k=k, K=K, p0=p0, delta=delta, F=F,
        q1=ComplexField(grid, q1), q2=ComplexField(grid, q2), q3=ComplexField(grid, q3),
        o1=ComplexField(grid, o1), o2=ComplexField(grid, q3),
        unmasked=unmasked, mask_tau=tau, masked_fraction=float(masked_fraction), M=M,
        q3_norm_delta=_lp(grid, q3, delta, dom), method=method,
    )


def _weighted_q3(A: RealField, p: float, ratio: np.ndarray, method: str) -> np.ndarray:
    Av = A.samples
    inv1 = RealField(A.grid, 1.0 / Av)
    invp = RealField(A.grid, Av ** (2.0 - p))
    d1z, d1zb = (f.samples for f in wirtinger_derivatives(inv1, method))
    dpz, dpzb = (f.samples for f in wirtinger_derivatives(invp, method))
    return (Av * p / (p + 2) * (ratio * d1z - d1zb)
            - Av ** (p - 2) * p / (3 * p - 2) * (ratio * dpz + dpzb))


def neumann_solve(system: BeltramiSystem, plan: TransformPlan, tol: float | None = None,
                  max_iter: int = 500, rhs: ComplexField | None = None):
    """Fixed-point iteration g <- o2 + o1 S g in L^2 over the domain disk.

    Returns ``(g, info)``; ``info`` holds the iteration count, per-step
    contraction ratios, the residual certificate and ||g||_{L^delta}.
    ``rhs`` replaces o2 (used by manufactured-solution checks).
    """
    grid = system.F.grid
    o1 = system.o1.samples
    o2 = (system.o2 if rhs is None else rhs).samples
    o2 = np.where(grid.mask, o2, 0.0)
    nrm = lambda x: _lp(grid, x, 2)  # noqa: E731
    scale = max(nrm(o2), 1e-300)
    tol = 1e-13 * scale if tol is None else tol
    g = o2.copy()
    history = []
    prev_step = None
    it = 0
    for it in range(1, max_iter + 1):
        if not np.any(o1):
            break
        Sg = beurling_transform(plan, ComplexField(grid, g)).samples
        g_new = np.where(grid.mask, o2 + o1 * Sg, 0.0)
        step = nrm(g_new - g)
        g = g_new
        if prev_step is not None and prev_step > 0:
            history.append(step / prev_step)
            if len(history) >= 3 and min(history[-3:]) >= 1.0 and step > tol:
                raise NeumannDivergence(f"contraction estimate {history[-1]:.4g} >= 1")
        prev_step = step
        if step <= tol:
            break
    else:
        raise NeumannDivergence(f"no convergence in {max_iter} iterations (last step {prev_step:.3g})")
    Sg = beurling_transform(plan, ComplexField(grid, g)).samples
    resid = nrm(np.where(grid.mask, g - o1 * Sg - o2, 0.0))
    info = {
        "iterations": it,
        "contraction_history": history,
        "residual": resid,
        "tol": tol,
        "certificate_bound": tol * (1 + system.k) / (1 - system.k) if system.k < 1 else math.inf,
        "g_norm_delta": _lp(grid, g, system.delta),
        "g_norm_2": nrm(g),
    }
    return ComplexField(grid, g), info


def normalize_f(F: ComplexField, g: ComplexField, plan: TransformPlan):
    """omega = T g and f = F exp(-omega); raises :class:`OmegaOverflow` past the guard."""
    grid = F.grid
    omega = cauchy_transform(plan, g)
    w = omega.samples
    sup = _lp(grid, w, math.inf)
    if sup > OMEGA_CAP:
        raise OmegaOverflow(sup)
    Sg = beurling_transform(plan, g).samples
    gs = np.asarray(g.samples)
    # |grad omega|^2 = 2(|omega_z|^2 + |omega_zbar|^2)
    grad2 = 2 * (np.abs(Sg) ** 2 + np.abs(gs) ** 2)
    w12 = math.sqrt(_lp(grid, w, 2) ** 2 + _lp(grid, np.sqrt(grad2), 2) ** 2)
    f = ComplexField(grid, np.where(grid.mask | (np.abs(w) <= OMEGA_CAP),
                                    F.samples * np.exp(-np.clip(w.real, -OMEGA_CAP, OMEGA_CAP)
                                                       - 1j * w.imag), 0.0))
    return omega, f, {"omega_sup": sup, "omega_w12": w12}


@dataclass(frozen=True)
class ReductionResult:
    system: BeltramiSystem
    F: ComplexField
    g: ComplexField
    omega: ComplexField
    f: ComplexField
    measured_ratios: dict
    neumann_iterations: int
    contraction_history: list = field(default_factory=list)

    def summary(self) -> dict:
        out = self.system.summary()
        out.update(self.measured_ratios)
        out["neumann_iterations"] = self.neumann_iterations
        out["contraction_history"] = list(self.contraction_history)
        return out


def reduce_solution(v: RealField, A, p: float, variant: str = "drift", *,
                    q: float | None = None, plan: TransformPlan | None = None,
                    method: str = "centered_difference", tol: float | None = None,
                    omega_scale: float = 1.0) -> ReductionResult:
    """Coefficients, Neumann solve and normalisation in one pass.

    ``omega_scale`` inflates g before normalising; it exists only to build
    deliberately corrupted negative controls.
    """
    system = assemble_coefficients(v, A, p, variant, q=q, method=method)
    plan = make_plan(v.grid) if plan is None else plan
    g, info = neumann_solve(system, plan, tol=tol)
    if omega_scale != 1.0:
        g = ComplexField(g.grid, omega_scale * g.samples)
    omega, f, norms = normalize_f(system.F, g, plan)
    grid = v.grid
    Fs = system.F.samples
    recon = f.samples * np.exp(omega.samples)
    rep_err = _lp(grid, recon - Fs, 2) / max(_lp(grid, Fs, 2), 1e-300)
    q3n = system.q3_norm_delta
    ratios = {
        "g_over_q3_delta": info["g_norm_delta"] / q3n if q3n > 0 else 0.0,
        "g_norm_delta": info["g_norm_delta"],
        "g_norm_2": info["g_norm_2"],
        "omega_sup": norms["omega_sup"],
        "omega_w12": norms["omega_w12"],
        "omega_sup_over_g_delta": norms["omega_sup"] / info["g_norm_delta"]
        if info["g_norm_delta"] > 0 else 0.0,
        "neumann_residual": info["residual"],
        "representation_error": rep_err,
    }
    return ReductionResult(system, system.F, g, omega, f, ratios, info["iterations"],
                           info["contraction_history"])


def save_reduction(result: ReductionResult, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, fld in (("F", result.F), ("g", result.g), ("omega", result.omega), ("f", result.f)):
        write_field(d / f"{name}.pucp", fld)
    (d / "summary.json").write_text(dumps(result.summary()))
    return d


def quasiregularity_check(f: ComplexField, k_expected: float, *, unmasked: np.ndarray | None = None,
                          tolerance: float = 0.02, method: str = "centered_difference",
                          threshold_rel: float = 1e-6, quantile: float = 0.99,
                          margin: float | None = None) -> dict:
    """Distribution of |f_zbar| / |f_z| over unmasked samples.

    The ess-sup is estimated by the ``quantile`` (99th percentile by
    default), which discounts isolated samples at critical points where
    both derivatives vanish to rounding. ``margin`` trims a boundary layer
    of that width inside the domain disk; the default of four spacings
    keeps stencils clear of the jump of g (hence the kink of omega) at
    the domain boundary.
    """
    grid = f.grid
    sel = grid.mask if unmasked is None else unmasked
    margin = 4 * grid.spacing if margin is None else margin
    if margin > 0:
        sel = sel & (grid.radius_from_center < grid.domain_radius - margin)
    fz, fzb = wirtinger_derivatives(f, method)
    a, b = np.abs(fz.samples), np.abs(fzb.samples)
    if not np.any(sel):
        raise ValueError("unmasked set is empty")
    thr = threshold_rel * a[sel].max()
    sel = sel & (a >= thr)
    if not np.any(sel):
        raise ValueError("no unmasked sample has |f_z| above threshold")
    r = b[sel] / a[sel]
    qs = {str(qq): float(np.quantile(r, qq)) for qq in (0.5, 0.9, 0.99)}
    measured = float(np.quantile(r, quantile))
    return {
        "k_expected": k_expected,
        "measured": measured,
        "quantile": quantile,
        "quantiles": qs,
        "max": float(r.max()),
        "samples": int(r.size),
        "passed": bool(measured <= k_expected + tolerance),
    }


def _window(grid: DiskGrid) -> np.ndarray:
    """Smooth cutoff: 1 on B_{R/2}, 0 outside B_{3R/4}."""
    from .grid import smooth_step

    R = grid.domain_radius
    t = (grid.radius_from_center - R / 2) / (R / 4)
    return 1.0 - smooth_step(t)


def w12_difference_quotient_check(F: ComplexField, h_values, *, slope_floor: float = -0.1) -> dict:
    """Windowed L^2 difference quotients ||eta (F(. + h) - F)|| / |h|.

    Passes iff the log-log slope against |h| is at least ``slope_floor``.
    """
    grid = F.grid
    hs = np.atleast_1d(np.asarray(h_values, dtype=complex))
    if np.any(np.abs(hs) > grid.domain_radius / 8 + 1e-12):
        raise ValueError("offsets must satisfy |h| <= domain_radius / 8")
    eta = _window(grid)
    s = np.asarray(F.samples, dtype=complex)
    quotients = []
    for h in hs:
        jx = h.real / grid.spacing
        jy = h.imag / grid.spacing
        if abs(jx - round(jx)) > 1e-9 or abs(jy - round(jy)) > 1e-9:
            raise ValueError("offsets must be integer multiples of the spacing")
        shifted = np.roll(s, (-int(round(jy)), -int(round(jx))), axis=(0, 1))
        d = eta * (shifted - s)
        quotients.append(math.sqrt(np.sum(np.abs(d) ** 2) * grid.spacing ** 2) / abs(h))
    quotients = np.array(quotients)
    L = np.log(np.abs(hs))
    if len(hs) >= 2 and np.ptp(L) > 0:
        slope = float(np.polyfit(L, np.log(quotients), 1)[0])
    else:
        slope = 0.0
    return {
        "h": [abs(h) for h in hs],
        "quotients": quotients.tolist(),
        "slope": slope,
        "bound": float(quotients.max()),
        "passed": bool(slope >= slope_floor),
    }


def _cut_edges(mask: np.ndarray) -> np.ndarray:
    """Vertical edges to drop so every hole of ``mask`` gets a branch cut.

    Returns a boolean array over (row, row+1) pairs; True means the edge is
    removed. Each hole is joined to the outside by a cut running in -x.
    """
    cut = np.zeros(mask.shape, dtype=bool)
    labels, count = ndi.label(~mask)
    edge_labels = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])))
    for lab in range(1, count + 1):
        if lab in edge_labels:
            continue
        rows, cols = np.nonzero(labels == lab)
        r0 = int(round(rows.mean()))
        c0 = int(round(cols.mean()))
        cut[r0, :c0] = True
    return cut


def conjugate_function(v: RealField, A: RealField | None, p: float, *,
                       method: str = "centered_difference", domain: np.ndarray | None = None,
                       curl_tol: float = 0.25, return_report: bool = False):
    """Stream function w of A |grad v|^{p-2} grad v with w(0) = 0.

    Least-squares potential recovery over the grid edges of the domain,
    ``w_x = -A|grad v|^{p-2} v_y``, ``w_y = A|grad v|^{p-2} v_x``. Holes in
    the domain get a branch cut along -x so w is single valued. The
    normalisation point is the sample nearest the grid centre that lies in
    the domain.
    """
    grid = v.grid
    dom = grid.mask if domain is None else domain
    h = grid.spacing
    dz, _ = wirtinger_derivatives(v, method)
    G = 2 * dz.samples
    vx, vy = G.real, -G.imag
    Aw = np.ones(grid.shape) if A is None else A.samples
    with np.errstate(divide="ignore", invalid="ignore"):
        B = Aw * np.hypot(vx, vy) ** (p - 2) if p != 2 else Aw
    B = np.where(np.isfinite(B), B, 0.0)
    phi1, phi2 = -B * vy, B * vx

    # curl of (phi1, phi2) relative to its gradient size
    curl = np.gradient(phi2, h, axis=1) - np.gradient(phi1, h, axis=0)
    gscale = np.sqrt(sum(np.gradient(c, h, axis=ax) ** 2 for c in (phi1, phi2) for ax in (0, 1)))
    inner = ndi.binary_erosion(dom, iterations=2)
    curl_rel = float(np.sqrt(np.sum(curl[inner] ** 2)) / max(np.sqrt(np.sum(gscale[inner] ** 2)), 1e-300))
    if curl_rel > curl_tol:
        raise ValueError(f"curl residual {curl_rel:.3g} exceeds {curl_tol}: input is not a solution")

    idx = -np.ones(grid.shape, dtype=np.int64)
    rr, cc = np.nonzero(dom)
    idx[rr, cc] = np.arange(len(rr))
    cut = _cut_edges(dom)
    rows, cols, vals, rhs = [], [], [], []
    e = 0
    # horizontal edges: w[i, j+1] - w[i, j] = h (phi1[i, j] + phi1[i, j+1]) / 2
    hmask = dom[:, :-1] & dom[:, 1:]
    i, j = np.nonzero(hmask)
    m = len(i)
    rows += [np.arange(e, e + m)] * 2
    cols += [idx[i, j + 1], idx[i, j]]
    vals += [np.ones(m), -np.ones(m)]
    rhs.append(h * 0.5 * (phi1[i, j] + phi1[i, j + 1]))
    e += m
    vmask = dom[:-1, :] & dom[1:, :] & ~cut[:-1, :]
    i, j = np.nonzero(vmask)
    m = len(i)
    rows += [np.arange(e, e + m)] * 2
    cols += [idx[i + 1, j], idx[i, j]]
    vals += [np.ones(m), -np.ones(m)]
    rhs.append(h * 0.5 * (phi2[i, j] + phi2[i + 1, j]))
    e += m
    D = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(e, len(rr)))
    b = np.concatenate(rhs)
    # pin the normalisation sample by eliminating it
    d2 = np.where(dom, np.abs(grid.z - grid.center), np.inf)
    anchor = idx[np.unravel_index(np.argmin(d2), d2.shape)]
    keep = np.ones(len(rr), dtype=bool)
    keep[anchor] = False
    Dk = D[:, keep]
    L = (Dk.T @ Dk).tocsc()
    sol = spla.spsolve(L, Dk.T @ b)
    wv = np.zeros(len(rr))
    wv[keep] = sol
    w = np.zeros(grid.shape)
    w[rr, cc] = wv
    resid = float(np.sqrt(np.sum((D @ wv - b) ** 2)) / h)  # L^2 norm of grad w - phi
    out = RealField(grid, w)
    if return_report:
        return out, {"potential_residual": resid, "curl_relative": curl_rel,
                     "anchor": complex(grid.z[np.unravel_index(np.argmin(d2), d2.shape)])}
    return out
