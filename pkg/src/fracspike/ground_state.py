"""Ground-state profiles of (-Delta)^s w + lambda w = w^p and their spectra.

The profile is found by the stabilized fixed-point iteration

    w  <-  S^(p/(p-1)) * ((-Delta)^s + lambda)^(-1) [w^p],
    S  =  <w, ((-Delta)^s + lambda) w> / <w, w^p>,

seeded with a Gaussian, followed by a damped Newton polish once the
increments are small. Solutions at other lambda come from the exact scaling
w_lambda(x) = lambda^(1/(p-1)) w(lambda^(1/(2s)) x) applied through
band-limited dilation, so the discrete profile is only ever computed once
per (s, p, N) at lambda = 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh, gmres, lobpcg

from fracspike import kernels
from fracspike import spectral as sp
from fracspike.errors import ConfigError, SolverDivergence
from fracspike.grid import Field, FracParams, Grid

log = logging.getLogger(__name__)

__all__ = [
    "GroundState",
    "DecayFit",
    "SpectrumSummary",
    "solve_ground_state",
    "rescale",
    "energy",
    "energy_scaling_exponent",
    "decay_fit",
    "linearization_spectrum",
    "apply_linearization",
    "radial_profile",
]


def _power(u: np.ndarray, p: float) -> np.ndarray:
    """u^p, odd-extended for non-integer p so negative undershoots stay finite."""
    if float(p).is_integer():
        return u ** int(p)
    return np.sign(u) * np.abs(u) ** p


@dataclass
class DecayFit:
    """Far-field fit w(r) ~ c0 * r^exponent over the window (absolute radii).

    `contaminated` flags a box too small for the tail to be meaningful
    (profile still above 1e-3 of its peak at r = L/2).
    """

    c0: float
    exponent: float
    c0_raw: float
    exponent_raw: float
    variation: float
    window: tuple[float, float]
    ok: bool
    contaminated: bool
    coefficients: tuple[float, float, float] = (np.nan, np.nan, np.nan)
    exponents: tuple[float, float, float] = (np.nan, np.nan, np.nan)

    def tail_model(self, r):
        """Fitted free-space tail sum c_i * r^(-e_i)."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for c, e in zip(self.coefficients, self.exponents):
            out += c * r ** (-e)
        return out


@dataclass
class SpectrumSummary:
    """Lowest eigenvalues of L = (-Delta)^s + lambda - p w^(p-1).

    kernel_dim counts eigenvalues with |mu| <= kernel_tol; kernel_overlap is
    the smallest correlation of those eigenvectors with the span of the
    translation modes dw/dx_j; spectral_gap is the smallest |mu| outside the
    kernel set.
    """

    eigenvalues: np.ndarray
    lowest: float
    kernel_dim: int
    kernel_overlap: float
    spectral_gap: float
    kernel_tol: float


@dataclass
class GroundState:
    grid: Grid
    params: FracParams
    lam: float
    values: np.ndarray
    residual_norm: float
    iterations: int
    newton_steps: int
    energy: float
    decay: DecayFit
    spectrum: SpectrumSummary | None = None
    source: str = "solve"

    @property
    def field(self) -> Field:
        return Field(self.grid, self.values)


def _resolve_apply(grid: Grid, s: float, lam: float):
    sym = grid.symbol(2.0 * s)
    axes = tuple(range(grid.dim))

    def apply_A(u):
        return np.fft.irfftn(sym * np.fft.rfftn(u, axes=axes),
                             s=grid.shape, axes=axes) + lam * u

    def apply_T(u):
        return np.fft.irfftn(np.fft.rfftn(u, axes=axes) / (sym + lam),
                             s=grid.shape, axes=axes)

    return apply_A, apply_T


def energy(grid: Grid, params: FracParams, lam: float, values: np.ndarray) -> float:
    """J^lambda(v) = 1/2 <v, (-Delta)^s v> + lambda/2 <v, v> - 1/(p+1) sum (v_+)^(p+1)."""
    f = Field(grid, values)
    kin = 0.5 * sp.inner(f, sp.fractional_laplacian(f, params))
    quad = 0.5 * lam * sp.inner(f, f)
    pot = grid.cell_volume * float(
        np.sum(kernels.positive_power(values, params.p + 1.0))) / (params.p + 1.0)
    return kin + quad - pot


def energy_scaling_exponent(params: FracParams, dim: int) -> float:
    """theta with J^lambda(w_lambda) = lambda^theta J^1(w)."""
    return (params.p + 1.0) / (params.p - 1.0) - dim / (2.0 * params.s)


def radial_profile(grid: Grid, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bin a field into radial shells of width h about the origin."""
    if grid.dim == 1:
        r_all = np.abs(grid.axis)
    else:
        r_all = np.sqrt(grid.axis[:, None] ** 2 + grid.axis[None, :] ** 2)
    h, L = grid.spacing, grid.half_width
    nbins = int(L / h) + 2
    sums, counts = kernels.radial_bin(values, r_all, h, nbins)
    keep = counts > 0
    keep[-1] = False
    r = (np.arange(nbins)[keep] + 0.5) * h
    return r, sums[keep] / counts[keep]


def decay_fit(grid: Grid, params: FracParams, values: np.ndarray,
              window: tuple[float, float] = (0.2, 0.4)) -> DecayFit:
    """Fit the algebraic tail of a profile; target exponent is -(N+2s)."""
    r, v = radial_profile(grid, values)
    fit = sp.far_field_fit(r, v, grid.half_width, grid.dim, params.s, window)
    v_max = float(np.max(np.abs(values)))
    half = np.argmin(np.abs(r - grid.half_width / 2.0))
    contaminated = bool(np.abs(v[half]) > 1e-3 * v_max)
    L = grid.half_width
    return DecayFit(c0=fit.amplitude, exponent=fit.slope,
                    c0_raw=fit.amplitude_raw, exponent_raw=fit.slope_raw,
                    variation=fit.variation,
                    window=(window[0] * L, window[1] * L),
                    ok=fit.ok, contaminated=contaminated,
                    coefficients=fit.coefficients, exponents=fit.exponents)


def solve_ground_state(grid: Grid, params: FracParams, lam: float = 1.0,
                       tol: float = 1e-10, max_iter: int = 500,
                       newton_threshold: float = 1e-6,
                       with_spectrum: bool = False,
                       n_eigs: int = 6) -> GroundState:
    """Positive radial profile solving (-Delta)^s w + lambda w = w^p.

    Parameters
    ----------
    tol : float
        Convergence target for the relative sup-norm equation residual.
    newton_threshold : float
        Fixed-point increment below which the Newton polish takes over.
    with_spectrum : bool
        Also compute the linearization spectrum summary (adds an eigensolve).

    Raises
    ------
    SolverDivergence
        If the iteration exhausts max_iter without reaching tol, or the
        stabilizing factor S leaves (0, inf).
    """
    params.check_subcritical(grid.dim)
    if not lam > 0:
        raise ConfigError(f"lambda must be positive, got {lam}")
    p, s = params.p, params.s
    apply_A, apply_T = _resolve_apply(grid, s, lam)

    coords = grid.coords()
    r2 = sum(c ** 2 for c in coords)
    width = lam ** (-1.0 / (2.0 * s))
    u = 2.0 * lam ** (1.0 / (p - 1.0)) * np.exp(-r2 / width ** 2)

    gamma = p / (p - 1.0)
    residual = np.inf
    newton_steps = 0
    for it in range(1, max_iter + 1):
        up = _power(u, p)
        Au = apply_A(u)
        denom = float(np.sum(u * up))
        if denom == 0.0:
            raise SolverDivergence("fixed-point iterate collapsed to zero")
        S = float(np.sum(u * Au)) / denom
        if not (0.0 < S < np.inf):
            raise SolverDivergence(f"stabilizing factor left (0, inf): S = {S}")
        u_new = S ** gamma * apply_T(up)
        increment = float(np.max(np.abs(u_new - u)) / np.max(np.abs(u)))
        u = u_new
        residual = float(np.max(np.abs(apply_A(u) - _power(u, p))) / np.max(np.abs(u)))
        if residual <= tol:
            break
        if increment < newton_threshold:
            u, residual, newton_steps = _newton_polish(
                grid, params, lam, u, apply_A, apply_T, tol)
            break
    if residual > tol:
        raise SolverDivergence(
            f"ground state did not reach tol={tol} (residual {residual:.3e} "
            f"after {it} iterations)")

    gs = GroundState(
        grid=grid, params=params, lam=lam, values=u,
        residual_norm=residual, iterations=it, newton_steps=newton_steps,
        energy=energy(grid, params, lam, u),
        decay=decay_fit(grid, params, u),
    )
    if with_spectrum:
        gs.spectrum = linearization_spectrum(gs, n_eigs=n_eigs)
    return gs


def _newton_polish(grid, params, lam, u, apply_A, apply_T, tol, max_steps=8):
    """Damped Newton on F(u) = A u - u^p with resolvent-preconditioned GMRES."""
    p = params.p
    n = u.size
    steps = 0
    res = float(np.max(np.abs(apply_A(u) - _power(u, p))) / np.max(np.abs(u)))
    for _ in range(max_steps):
        if res <= tol:
            break
        F = apply_A(u) - _power(u, p)
        coeff = p * _power(u, p - 1.0)

        def jmv(v):
            vv = v.reshape(grid.shape)
            return (apply_A(vv) - coeff * vv).ravel()

        def pmv(v):
            return apply_T(v.reshape(grid.shape)).ravel()

        J = LinearOperator((n, n), matvec=jmv, dtype=float)
        M = LinearOperator((n, n), matvec=pmv, dtype=float)
        delta, info = gmres(J, F.ravel(), M=M, rtol=1e-10, atol=0.0, maxiter=400)
        if info != 0:
            log.debug("newton polish: gmres info=%s", info)
            break
        step = 1.0
        u_max = float(np.max(np.abs(u)))
        while step > 1e-4:
            u_try = u - step * delta.reshape(grid.shape)
            res_try = float(np.max(np.abs(apply_A(u_try) - _power(u_try, p))) / u_max)
            if res_try < res:
                u, res = u_try, res_try
                break
            step *= 0.5
        else:
            break
        steps += 1
    return u, res, steps


def _image_tail(decay: DecayFit, coords: list[np.ndarray], L: float,
                dim: int, n_images: int = 3) -> np.ndarray:
    """Estimated wrap-around contribution sum_{k != 0} w(|y - 2Lk|).

    Uses the fitted tail model, valid because the estimate is only consumed
    at points whose images all sit at radius >= 1.5 L, well inside the
    algebraic regime.
    """
    out = np.zeros(np.broadcast_shapes(*(c.shape for c in coords)))
    rng = range(-n_images, n_images + 1)
    if dim == 1:
        y = coords[0]
        for k in rng:
            if k != 0:
                out += decay.tail_model(np.maximum(np.abs(y - 2.0 * L * k), 1e-6))
    else:
        y0, y1 = coords
        for k0 in rng:
            for k1 in rng:
                if k0 == 0 and k1 == 0:
                    continue
                d = np.hypot(y0 - 2.0 * L * k0, y1 - 2.0 * L * k1)
                out += decay.tail_model(np.maximum(d, 1e-6))
    return out


def _dilate_free_space(gs: GroundState, scale: float) -> np.ndarray:
    """Samples of w(scale * x) for the free-space profile w.

    Band-limited dilation evaluates the periodic interpolant, which for
    scale > 1 wraps compressed copies of the core back into the box (the
    points scale * x sweep several periods). Inside |scale * x| <= 0.4 L the
    interpolant is kept minus the fitted image contribution; beyond 0.5 L the
    fitted algebraic tail takes over, with a cosine blend between.
    """
    grid = gs.grid
    L = grid.half_width
    w_t = sp.dilate(gs.field, scale).values
    coords = [scale * c for c in grid.coords()]
    y_r = np.sqrt(sum(c ** 2 for c in coords))
    lo, hi = 0.40 * L, 0.50 * L
    sigma = 0.5 * (1.0 + np.cos(np.pi * np.clip((y_r - lo) / (hi - lo), 0.0, 1.0)))
    if not np.all(np.isfinite(gs.decay.coefficients)):
        if scale <= 1.0:
            return w_t
        raise SolverDivergence(
            "rescale to lambda > 1 needs a converged far-field fit on the "
            "source profile to continue the tail across periods")
    inner = w_t - _image_tail(gs.decay, coords, L, grid.dim)
    outer = gs.decay.tail_model(np.maximum(y_r, 1e-6))
    return sigma * inner + (1.0 - sigma) * outer


def rescale(gs: GroundState, lam_new: float) -> GroundState:
    """Exact scaling to another lambda, w_lam(x) = lam^(1/(p-1)) w(lam^(1/(2s)) x).

    Requires the source profile solved at lambda = 1 and the rescaled core to
    stay resolvable (lambda^(1/(2s)) h <= 0.5). The dilation targets the
    free-space profile: outside the window where the band-limited interpolant
    is trustworthy the fitted algebraic tail is spliced in, so compressing
    (lambda > 1) does not drag periodic images of the core into the box.
    """
    if gs.lam != 1.0:
        raise ConfigError("rescale requires a ground state solved at lambda = 1")
    if not lam_new > 0:
        raise ConfigError(f"lambda must be positive, got {lam_new}")
    p, s = gs.params.p, gs.params.s
    scale = lam_new ** (1.0 / (2.0 * s))
    if scale * gs.grid.spacing > 0.5:
        raise ConfigError(
            f"rescaled core unresolvable: lambda^(1/2s) * h = "
            f"{scale * gs.grid.spacing:.3f} > 0.5; use a finer grid")
    amp = lam_new ** (1.0 / (p - 1.0))
    if scale == 1.0:
        vals = amp * gs.values.copy()
    else:
        vals = amp * _dilate_free_space(gs, scale)

    apply_A, _ = _resolve_apply(gs.grid, s, lam_new)
    residual = float(np.max(np.abs(apply_A(vals) - _power(vals, p))) / np.max(np.abs(vals)))
    return GroundState(
        grid=gs.grid, params=gs.params, lam=lam_new, values=vals,
        residual_norm=residual, iterations=gs.iterations,
        newton_steps=gs.newton_steps,
        energy=energy(gs.grid, gs.params, lam_new, vals),
        decay=decay_fit(gs.grid, gs.params, vals),
        spectrum=None, source="rescale")


def apply_linearization(gs: GroundState, v: np.ndarray) -> np.ndarray:
    """L v with L = (-Delta)^s + lambda - p w^(p-1) around the profile."""
    grid, params = gs.grid, gs.params
    apply_A, _ = _resolve_apply(grid, params.s, gs.lam)
    coeff = params.p * kernels.positive_power(gs.values, params.p - 1.0)
    return apply_A(v) - coeff * v


def linearization_spectrum(gs: GroundState, n_eigs: int = 6,
                           kernel_tol: float = 1e-3,
                           tol: float = 1e-9) -> SpectrumSummary:
    """Lowest eigenvalues of the linearized operator, matrix-free.

    ARPACK Lanczos (smallest-algebraic) with the profile as the starting
    vector; falls back to resolvent-preconditioned LOBPCG if ARPACK stalls.
    The translation modes dw/dx_j are computed spectrally and used to
    classify near-zero eigenvectors.
    """
    grid, params = gs.grid, gs.params
    n = gs.values.size
    apply_A, apply_T = _resolve_apply(grid, params.s, gs.lam)
    coeff = params.p * kernels.positive_power(gs.values, params.p - 1.0)

    def mv(v):
        vv = v.reshape(grid.shape)
        return (apply_A(vv) - coeff * vv).ravel()

    A = LinearOperator((n, n), matvec=mv, dtype=float)
    # mix the profile with its translation modes so the Krylov space is not
    # confined to the even-symmetry sector (degenerate kernel pairs would be
    # missed from a radial start)
    v0 = gs.values.ravel().copy()
    v0 /= np.linalg.norm(v0)
    for ax in range(grid.dim):
        dw = sp.spectral_derivative(gs.field, ax).values.ravel()
        nrm = np.linalg.norm(dw)
        if nrm > 0:
            v0 += dw / nrm
    v0 /= np.linalg.norm(v0)
    try:
        vals, vecs = eigsh(A, k=n_eigs, which="SA", v0=v0,
                           tol=tol, maxiter=50000,
                           ncv=min(n, max(40, 4 * n_eigs)))
    except Exception as exc:  # ArpackNoConvergence or breakdown
        log.debug("eigsh failed (%s); falling back to lobpcg", exc)

        def pmv(v):
            return apply_T(v.reshape(grid.shape)).ravel()

        M = LinearOperator((n, n), matvec=pmv, dtype=float)
        rng = np.random.default_rng(1234)
        cols = [gs.values.ravel()]
        for ax in range(grid.dim):
            cols.append(sp.spectral_derivative(gs.field, ax).values.ravel())
        while len(cols) < max(n_eigs + 2, 8):
            cols.append(rng.normal(size=n))
        X, _ = np.linalg.qr(np.column_stack(cols))
        vals, vecs = lobpcg(A, X[:, :n_eigs + 2], M=M, largest=False,
                            tol=tol, maxiter=4000)
        order = np.argsort(vals)[:n_eigs]
        vals, vecs = vals[order], vecs[:, order]

    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]

    # orthonormal basis of the translation modes
    dws = np.column_stack(
        [sp.spectral_derivative(gs.field, ax).values.ravel()
         for ax in range(grid.dim)])
    Q, _ = np.linalg.qr(dws)

    kernel_mask = np.abs(vals) <= kernel_tol
    overlaps = []
    for i in np.nonzero(kernel_mask)[0]:
        v = vecs[:, i] / np.linalg.norm(vecs[:, i])
        overlaps.append(float(np.linalg.norm(Q.T @ v)))
    kernel_dim = int(np.count_nonzero(kernel_mask))
    kernel_overlap = min(overlaps) if overlaps else 0.0
    outside = np.abs(vals[~kernel_mask])
    spectral_gap = float(np.min(outside)) if outside.size else np.inf

    return SpectrumSummary(eigenvalues=vals, lowest=float(vals[0]),
                           kernel_dim=kernel_dim, kernel_overlap=kernel_overlap,
                           spectral_gap=spectral_gap, kernel_tol=kernel_tol)
