"""Continuous-variable tomography.

Wigner convention: ``W(q, p) = ∫ rho(q + u/2, q - u/2) exp(-i p u) du``, so
``∬ W dq dp / (2π) = 1`` and the vacuum is ``2 exp(-q² - p²)``.  Other
conventions in the literature differ from this one by a factor 2π.

The tomogram ``w(X; mu, nu)`` is the probability density of the quadrature
``mu x + nu p``.  It is computed here along four routes that share no code
path beyond the grids:

* from the position-basis kernel ``rho(y, y')`` (double chirp integral),
* from a wave function (single chirp integral, squared),
* from a sampled Wigner function (line integrals, Radon-type),
* from a number-basis density matrix (rotated oscillator eigenfunctions).

plus closed forms for number and coherent states.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import ndimage
from scipy.interpolate import CubicSpline
from scipy.special import eval_hermite

from .exceptions import (
    GridMismatchError,
    ImaginaryResidueError,
    InputError,
    InsufficientDecayError,
    LineExitsGridError,
    NotHermitianError,
    UndersamplingError,
)
from .states import (
    DensityKernel,
    FockDensityMatrix,
    PositionGrid,
    SymplecticFrame,
    Wavefunction,
    hermite_functions,
    trapezoid_weights,
)

MAX_PHASE_STEP = math.pi / 4
SUPPORT_AMPLITUDE = 1e-10
WIGNER_EDGE_TOL = 1e-7
TOMOGRAM_EDGE_TOL = 1e-8


def _trapz_weights(axis: np.ndarray) -> np.ndarray:
    """Trapezoid weights for a (possibly non-uniform) increasing axis."""
    axis = np.asarray(axis, dtype=float)
    if axis.size == 1:
        return np.ones(1)
    d = np.diff(axis)
    w = np.zeros_like(axis)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


@dataclass(frozen=True, eq=False)
class WignerGrid:
    q: np.ndarray
    p: np.ndarray
    values: np.ndarray  # shape (len(q), len(p))

    def normalization(self) -> float:
        """``∬ W dq dp / (2π)`` by the trapezoid rule (1 for a state)."""
        return float(_trapz_weights(self.q) @ self.values @ _trapz_weights(self.p)) / (2 * math.pi)

    def at(self, q: float, p: float) -> float:
        i = int(np.argmin(np.abs(self.q - q)))
        j = int(np.argmin(np.abs(self.p - p)))
        return float(self.values[i, j])


@dataclass(frozen=True, eq=False)
class Tomogram:
    frame: SymplecticFrame
    X: np.ndarray
    values: np.ndarray

    def normalization(self) -> float:
        return float(_trapz_weights(self.X) @ self.values)

    def validate(self, norm_tol: float = 1e-6, neg_tol: float = 1e-9) -> None:
        """Raise unless ``w >= 0`` and ``∫ w dX = 1`` within tolerance."""
        from .exceptions import NormalizationError

        lo = float(np.min(self.values))
        if lo < -neg_tol:
            raise NormalizationError(f"tomogram takes negative value {lo:.3e}")
        total = self.normalization()
        if abs(total - 1.0) > norm_tol:
            raise NormalizationError(f"tomogram integrates to {total:.10f}")


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------


def frame_from_angles(squeeze: float, angle: float) -> SymplecticFrame:
    """Rotated-and-squeezed frame ``(e^λ cos φ, e^-λ sin φ)``."""
    return SymplecticFrame(
        math.exp(squeeze) * math.cos(angle), math.exp(-squeeze) * math.sin(angle), squeeze, angle
    )


def _as_frame(frame) -> SymplecticFrame:
    if isinstance(frame, SymplecticFrame):
        return frame
    mu, nu = frame
    return SymplecticFrame(mu, nu)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def oracle_tomogram_fock(n: int, X, frame) -> np.ndarray:
    """Closed-form tomogram of the number state ``|n>``."""
    frame = _as_frame(frame)
    s2 = frame.mu ** 2 + frame.nu ** 2
    s = math.sqrt(s2)
    X = np.asarray(X, dtype=float)
    h = eval_hermite(n, X / s)
    return h * h * np.exp(-X * X / s2) / (math.sqrt(math.pi) * 2.0 ** n * math.factorial(n) * s)


def oracle_tomogram_coherent(alpha: complex, X, frame) -> np.ndarray:
    """Closed-form tomogram of the coherent state ``|alpha>`` (a Gaussian)."""
    frame = _as_frame(frame)
    alpha = complex(alpha)
    s2 = frame.mu ** 2 + frame.nu ** 2
    mean = math.sqrt(2) * (alpha.real * frame.mu + alpha.imag * frame.nu)
    X = np.asarray(X, dtype=float)
    return np.exp(-((X - mean) ** 2) / s2) / math.sqrt(math.pi * s2)


# ---------------------------------------------------------------------------
# Wigner function from the position kernel
# ---------------------------------------------------------------------------


def _check_hermitian_kernel(kernel: DensityKernel):
    v = kernel.values
    defect = float(np.max(np.abs(v - v.conj().T)))
    if defect > 1e-10 * max(1.0, float(np.max(np.abs(v)))):
        raise NotHermitianError(f"kernel is not Hermitian (defect {defect:.3e})")


def _discard_imag(z: np.ndarray, tol: float, what: str) -> np.ndarray:
    resid = float(np.max(np.abs(np.imag(z)))) if np.size(z) else 0.0
    if resid > tol:
        raise ImaginaryResidueError(f"{what}: imaginary residue {resid:.3e} exceeds {tol:.1e}")
    return np.real(z).copy()


def _default_q_axis(grid: PositionGrid) -> np.ndarray:
    stride = max(1, (grid.n_points - 1) // 200)
    return grid.points[::stride]


def wigner_from_density(kernel, q=None, p=None) -> WignerGrid:
    """Wigner function of a position-basis density kernel.

    ``q`` must consist of grid nodes (the ``u`` integral then uses node pairs
    ``q ± kΔ`` with ``du = 2Δ``); ``p`` is arbitrary up to the Nyquist limit
    ``|p| < π / (2Δ)``.
    """
    if isinstance(kernel, Wavefunction):
        from .states import kernel_from_wavefunction

        kernel = kernel_from_wavefunction(kernel)
    _check_hermitian_kernel(kernel)
    grid = kernel.grid
    dy = grid.spacing
    q = _default_q_axis(grid) if q is None else np.atleast_1d(np.asarray(q, dtype=float))
    p = q.copy() if p is None else np.atleast_1d(np.asarray(p, dtype=float))
    if np.max(np.abs(p)) * 2 * dy >= math.pi:
        raise UndersamplingError(f"momentum {np.max(np.abs(p))} beyond the Nyquist limit of the grid")
    try:
        idx = [grid.index_of(x) for x in q]
    except InputError as exc:
        raise GridMismatchError(str(exc)) from exc

    n = grid.n_points
    rho = kernel.values
    out = np.empty((q.size, p.size), dtype=complex)
    for row, i in enumerate(idx):
        k_max = min(i, n - 1 - i)
        k = np.arange(-k_max, k_max + 1)
        vals = rho[i + k, i - k]
        wts = np.full(k.size, 2 * dy)
        wts[0] = wts[-1] = dy
        u = 2 * dy * k
        out[row] = np.exp(-1j * np.outer(p, u)) @ (vals * wts)
    values = _discard_imag(out, 1e-9 * max(1.0, float(np.max(np.abs(out)))), "Wigner function")
    return WignerGrid(q.copy(), p.copy(), values)


# ---------------------------------------------------------------------------
# Tomograms from kernels and wave functions (chirp integrals)
# ---------------------------------------------------------------------------


def _check_oscillation(y_support: np.ndarray, X: np.ndarray, frame: SymplecticFrame, dy: float):
    mu, nu = frame.mu, frame.nu
    if abs(nu) < 10 * dy * abs(mu):
        warnings.warn(
            f"|nu|={abs(nu):.3g} is small against 10*dy*|mu|; the chirp kernel may be undersampled",
            RuntimeWarning,
            stacklevel=3,
        )
    if y_support.size == 0:
        return
    ylo, yhi = float(y_support.min()), float(y_support.max())
    rates = [abs(mu * y / nu - x / nu) for y in (ylo, yhi) for x in (float(X.min()), float(X.max()))]
    step = max(rates) * dy
    if step >= MAX_PHASE_STEP:
        raise UndersamplingError(
            f"chirp phase advances {step:.3f} rad per grid step (limit π/4) for frame "
            f"({mu:.4g}, {nu:.4g}); refine the grid or use the ν=0 branch"
        )


def _support(density: np.ndarray, y: np.ndarray) -> np.ndarray:
    amp = np.sqrt(np.maximum(density, 0.0))
    return y[amp > SUPPORT_AMPLITUDE * amp.max()]


def _position_branch(grid: PositionGrid, density: np.ndarray, X: np.ndarray, mu: float) -> np.ndarray:
    """``nu = 0``: rescaled position density ``rho(X/mu, X/mu) / |mu|``."""
    spline = CubicSpline(grid.points, density)
    y = X / mu
    inside = (y >= grid.x_min) & (y <= grid.x_max)
    out = np.zeros_like(X)
    out[inside] = spline(y[inside])
    return out / abs(mu)


def _chirp(grid: PositionGrid, X: np.ndarray, frame: SymplecticFrame) -> np.ndarray:
    y = grid.points
    mu, nu = frame.mu, frame.nu
    phase = mu * y * y / (2 * nu) - np.outer(X, y) / nu
    return np.exp(1j * phase) * trapezoid_weights(grid.n_points, grid.spacing)


def tomogram_from_wavefunction(psi: Wavefunction, frame, X) -> Tomogram:
    """``w = |∫ psi(y) exp(i mu y²/2nu - i X y/nu) dy|² / (2π|nu|)``."""
    frame = _as_frame(frame)
    X = np.asarray(X, dtype=float)
    grid = psi.grid
    density = psi.density()
    if frame.nu == 0.0:
        return Tomogram(frame, X, _position_branch(grid, density, X, frame.mu))
    _check_oscillation(_support(density, grid.points), X, frame, grid.spacing)
    amp = _chirp(grid, X, frame) @ psi.values
    return Tomogram(frame, X, np.abs(amp) ** 2 / (2 * math.pi * abs(frame.nu)))


def tomogram_from_density(kernel, frame, X) -> Tomogram:
    """Double chirp integral of the position kernel ``rho(y, y')``."""
    if isinstance(kernel, Wavefunction):
        from .states import kernel_from_wavefunction

        kernel = kernel_from_wavefunction(kernel)
    _check_hermitian_kernel(kernel)
    frame = _as_frame(frame)
    X = np.asarray(X, dtype=float)
    grid = kernel.grid
    density = kernel.diagonal()
    if frame.nu == 0.0:
        return Tomogram(frame, X, _position_branch(grid, density, X, frame.mu))
    _check_oscillation(_support(density, grid.points), X, frame, grid.spacing)
    g = _chirp(grid, X, frame)
    total = np.sum((g @ kernel.values) * g.conj(), axis=1)
    total = _discard_imag(total, 1e-8, "tomogram from kernel")
    return Tomogram(frame, X, total / (2 * math.pi * abs(frame.nu)))


def tomogram_from_fock(rho: FockDensityMatrix, frame, X) -> Tomogram:
    """Tomogram of a number-basis density matrix via rotated eigenfunctions.

    ``mu x + nu p = s (cos φ x + sin φ p)`` and the rotated quadrature has
    eigenfunctions ``exp(-i φ n) psi_n``, so
    ``w(X) = (1/s) Σ rho_mn exp(-iφ(m-n)) psi_m(X/s) psi_n(X/s)``.
    """
    frame = _as_frame(frame)
    X = np.asarray(X, dtype=float)
    s, phi = frame.scale, frame.direction
    basis = hermite_functions(rho.dim - 1, X / s)
    phases = np.exp(-1j * phi * np.arange(rho.dim))
    amp = phases[:, None] * basis
    vals = np.einsum("mx,mn,nx->x", amp, rho.elements, amp.conj())
    return Tomogram(frame, X, _discard_imag(vals, 1e-10, "number-basis tomogram") / s)


# ---------------------------------------------------------------------------
# Tomogram from a sampled Wigner function (line integrals)
# ---------------------------------------------------------------------------


def _uniform_step(axis: np.ndarray) -> float:
    d = np.diff(axis)
    if not np.allclose(d, d[0], rtol=1e-9, atol=0):
        raise GridMismatchError("Wigner axes must be uniform")
    return float(d[0])


def _check_wigner_edges(w: WignerGrid):
    v = np.abs(w.values)
    edge = max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max())
    if edge > WIGNER_EDGE_TOL * v.max():
        raise LineExitsGridError(
            f"Wigner function is {edge:.2e} at the grid boundary; lines of integration leave its support"
        )


def wigner_projection(w: WignerGrid, angle: float, coeffs: np.ndarray | None = None):
    """Line integrals ``P(Y) = ∫ W(Y n + t n⊥) dt`` at direction ``angle``.

    Returns ``(Y, P)`` with ``Y`` uniform over the half-diagonal of the grid.
    """
    dq, dp = _uniform_step(w.q), _uniform_step(w.p)
    h = min(dq, dp)
    half = math.hypot(max(abs(w.q[0]), abs(w.q[-1])), max(abs(w.p[0]), abs(w.p[-1])))
    m = int(math.ceil(half / h))
    Y = h * np.arange(-m, m + 1)
    t = Y.copy()
    c, s = math.cos(angle), math.sin(angle)
    qq = Y[:, None] * c - t[None, :] * s
    pp = Y[:, None] * s + t[None, :] * c
    inside = (qq >= w.q[0]) & (qq <= w.q[-1]) & (pp >= w.p[0]) & (pp <= w.p[-1])
    if coeffs is None:
        coeffs = ndimage.spline_filter(w.values, order=3, mode="nearest")
    fi = (qq - w.q[0]) / dq
    fj = (pp - w.p[0]) / dp
    vals = ndimage.map_coordinates(coeffs, [fi.ravel(), fj.ravel()], order=3, prefilter=False, mode="nearest")
    vals = np.where(inside.ravel(), vals, 0.0).reshape(qq.shape)
    return Y, vals.sum(axis=1) * h


def tomogram_from_wigner(w: WignerGrid, frame, X, _coeffs=None) -> Tomogram:
    """``w(X) = ∬ W(q,p) δ(X - mu q - nu p) dq dp / (2π)``.

    Each line ``mu q + nu p = X`` sits at distance ``X/s`` from the origin
    along ``(mu, nu)/s``; the δ contributes the Jacobian ``1/s``.
    """
    frame = _as_frame(frame)
    X = np.asarray(X, dtype=float)
    _check_wigner_edges(w)
    s = frame.scale
    Y, P = wigner_projection(w, frame.direction, _coeffs)
    spline = CubicSpline(Y, P)
    y = X / s
    inside = (y >= Y[0]) & (y <= Y[-1])
    vals = np.zeros_like(X)
    vals[inside] = spline(y[inside])
    return Tomogram(frame, X, vals / (2 * math.pi * s))


# ---------------------------------------------------------------------------
# Families of tomograms and Wigner reconstruction
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TomogramFamily:
    """Tomograms on a rectangular ``(mu, nu, X)`` grid; ``values[i, j, k] = w(X_k; mu_i, nu_j)``."""

    mu: np.ndarray
    nu: np.ndarray
    X: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = (len(self.mu), len(self.nu), len(self.X))
        if np.shape(self.values) != shape:
            raise InputError(f"family values must have shape {shape}")

    def tomogram(self, i: int, j: int) -> Tomogram:
        return Tomogram(SymplecticFrame(self.mu[i], self.nu[j]), self.X, self.values[i, j])


def reconstruction_axis(half_width: float = 7.0, step: float = 0.5) -> np.ndarray:
    """Cell-centred nodes covering ``[-L, L]``; never contains 0 (the degenerate frame)."""
    n = int(round(2 * half_width / step))
    return -half_width + step * (np.arange(n) + 0.5)


def tomogram_family(route: Callable[[SymplecticFrame, np.ndarray], Tomogram], mu, nu, X) -> TomogramFamily:
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    X = np.asarray(X, dtype=float)
    values = np.empty((mu.size, nu.size, X.size))
    for i, m in enumerate(mu):
        for j, n in enumerate(nu):
            values[i, j] = route(SymplecticFrame(m, n), X).values
    return TomogramFamily(mu, nu, X, values)


def tomogram_family_from_wigner(w: WignerGrid, mu, nu, X) -> TomogramFamily:
    """Batch version of :func:`tomogram_from_wigner` sharing one spline prefilter."""
    _check_wigner_edges(w)
    coeffs = ndimage.spline_filter(w.values, order=3, mode="nearest")
    return tomogram_family(lambda f, x: tomogram_from_wigner(w, f, x, coeffs), mu, nu, X)


def characteristic_samples(family: TomogramFamily) -> np.ndarray:
    """``∫ w(X; mu, nu) e^{iX} dX`` for every frame of the family."""
    v = family.values
    edge = np.maximum(np.abs(v[..., 0]), np.abs(v[..., -1])).max()
    if edge > TOMOGRAM_EDGE_TOL:
        raise InsufficientDecayError(f"tomograms are {edge:.2e} at the X-axis edges (need < 1e-8)")
    return v @ (_trapz_weights(family.X) * np.exp(1j * family.X))


def wigner_from_tomogram(family: TomogramFamily, q, p) -> WignerGrid:
    """``W(q,p) = (1/2π) ∭ w(X;mu,nu) e^{i(X - mu q - nu p)} dX dmu dnu``.

    The X integral is done first for every frame (a Fourier transform at unit
    frequency), then the ``(mu, nu)`` integral by the trapezoid rule.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    chi = characteristic_samples(family)
    eq = np.exp(-1j * np.outer(q, family.mu)) * _trapz_weights(family.mu)
    ep = np.exp(-1j * np.outer(family.nu, p)) * _trapz_weights(family.nu)[:, None]
    out = eq @ chi @ ep / (2 * math.pi)
    return WignerGrid(q, p, _discard_imag(out, 1e-3, "reconstructed Wigner function"))
