"""Dequantizer/quantizer pair and the star product of symplectic measures.

Symbols live on a grid of points ``(X, mu, nu)``:

    f_a(X, mu, nu) = Tr(a δ(X - mu x - nu p)),
    D(X, mu, nu)   = (1/2π) e^{iX} e^{-i(mu x + nu p)},
    a              = ∭ f_a D dX dmu dnu.

Operators of dimension ``N`` are embedded (zero padded) into a larger working
truncation ``M`` before the quadrature is diagonalized; reconstructions are
cropped back to ``N``.  The truncated ``mu x + nu p`` equals
``r e^{iφn} x e^{-iφn}`` exactly (``r, φ`` polar coordinates of ``(mu, nu)``),
so one diagonalization of ``x`` serves every frame.

δ is regularized as a normal density of width σ.  At unit frequency this
multiplies the X-Fourier transform by ``exp(-σ²/2)``, which the
reconstructions divide back out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import ndtr

from .ctomo import _as_frame, _trapz_weights, reconstruction_axis
from .exceptions import (
    BudgetExceededError,
    DimensionMismatchError,
    InputError,
    InsufficientDecayError,
    RankDeficientError,
)
from .measures import QuantumMeasureCDF, signed_measure_of_observable, spectral_measure
from .states import Observable, SymplecticFrame, ladder_operators, quadrature_operator

MIN_SMOOTHING = 0.05
DECAY_TOL = 1e-8
KERNEL_DECAY_TOL = 1e-4
MAX_TARGETS = 10
MAX_FRAMES = 21 * 21
INVERSION_MAX_COND = 1e8


def default_smoothing(X) -> float:
    """σ = max(2ΔX, 0.05)."""
    X = np.asarray(X, dtype=float)
    dx = float(np.max(np.diff(X))) if X.size > 1 else 0.0
    return max(2 * dx, MIN_SMOOTHING)


def default_work_dim(dim: int) -> int:
    return max(4 * dim, 32)


def default_frame_axis() -> np.ndarray:
    return reconstruction_axis(10.0, 0.5)


@dataclass(frozen=True)
class PhasePoint:
    X: float
    mu: float
    nu: float


def _matrix(a) -> np.ndarray:
    m = np.asarray(getattr(a, "elements", a), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError("operator must be a square matrix")
    return m


def embed(a, work_dim: int) -> np.ndarray:
    """Zero-pad an ``N x N`` operator to ``work_dim``."""
    m = _matrix(a)
    if work_dim < m.shape[0]:
        raise DimensionMismatchError(f"working dimension {work_dim} below operator dimension {m.shape[0]}")
    out = np.zeros((work_dim, work_dim), dtype=complex)
    out[: m.shape[0], : m.shape[0]] = m
    return out


@lru_cache(maxsize=16)
def _position_spectrum(work_dim: int) -> tuple[np.ndarray, np.ndarray]:
    lam, vecs = np.linalg.eigh(ladder_operators(work_dim)[0].elements)
    return lam, np.real(vecs)


def frame_spectrum(mu: float, nu: float, work_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of the truncated ``mu x + nu p``."""
    if mu == 0 and nu == 0:
        raise InputError("frame (mu, nu) = (0, 0) is degenerate")
    lam, vecs = _position_spectrum(work_dim)
    r, phi = math.hypot(mu, nu), math.atan2(nu, mu)
    phase = np.exp(1j * phi * np.arange(work_dim))
    return r * lam, phase[:, None] * vecs


def _diag_weights(a: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """``<v_k| a |v_k>`` for every column of ``vecs``."""
    return np.einsum("ik,ij,jk->k", vecs.conj(), a, vecs)


# ---------------------------------------------------------------------------
# Dequantizer / quantizer
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SymbolGrid:
    """``values[i, j, k] = f(X_k; mu_i, nu_j)`` of an operator of dimension ``dim``."""

    X: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    values: np.ndarray = field(repr=False)
    dim: int
    work_dim: int
    smoothing: float

    def __post_init__(self):
        shape = (len(self.mu), len(self.nu), len(self.X))
        if np.shape(self.values) != shape:
            raise InputError(f"symbol values must have shape {shape}")

    def __add__(self, other: "SymbolGrid") -> "SymbolGrid":
        return self._combine(other, self.values + other.values)

    def __mul__(self, c: float) -> "SymbolGrid":
        return self._same(self.values * c)

    __rmul__ = __mul__

    def _same(self, values) -> "SymbolGrid":
        return SymbolGrid(self.X, self.mu, self.nu, values, self.dim, self.work_dim, self.smoothing)

    def _combine(self, other, values) -> "SymbolGrid":
        same = (
            np.array_equal(self.X, other.X) and np.array_equal(self.mu, other.mu)
            and np.array_equal(self.nu, other.nu) and self.dim == other.dim
            and self.work_dim == other.work_dim and self.smoothing == other.smoothing
        )
        if not same:
            raise InputError("symbol grids differ")
        return self._same(values)

    def points(self):
        for i, m in enumerate(self.mu):
            for j, n in enumerate(self.nu):
                for k, x in enumerate(self.X):
                    yield PhasePoint(float(x), float(m), float(n)), self.values[i, j, k]


def dequantize(a, X, mu, nu, smoothing: float | None = None, work_dim: int | None = None) -> SymbolGrid:
    """``f(X; mu, nu) = Σ_k <k|a|k> δ_σ(X - λ_k)`` over eigenpairs of ``mu x + nu p``."""
    m = _matrix(a)
    X = np.asarray(X, dtype=float)
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    sigma = default_smoothing(X) if smoothing is None else float(smoothing)
    if sigma <= 0:
        raise InputError("smoothing width must be positive")
    M = work_dim or default_work_dim(m.shape[0])
    big = embed(m, M)
    values = np.empty((mu.size, nu.size, X.size), dtype=complex)
    for i, u in enumerate(mu):
        for j, v in enumerate(nu):
            lam, vecs = frame_spectrum(u, v, M)
            z = (X[:, None] - lam) / sigma
            values[i, j] = (np.exp(-0.5 * z * z) / (sigma * math.sqrt(2 * math.pi))) @ _diag_weights(big, vecs)
    return SymbolGrid(X, mu, nu, values, m.shape[0], M, sigma)


def quantizer(point: PhasePoint, dim: int) -> np.ndarray:
    """``(1/2π) e^{iX} exp(-i(mu x + nu p))`` in the truncated number basis."""
    if dim < 2:
        raise InputError("need at least two levels")
    A = quadrature_operator(point.mu, point.nu, dim).elements
    return np.exp(1j * point.X) * expm(-1j * A) / (2 * math.pi)


def _frame_exponential(mu: float, nu: float, work_dim: int) -> np.ndarray:
    lam, vecs = frame_spectrum(mu, nu, work_dim)
    return (vecs * np.exp(-1j * lam)) @ vecs.conj().T


def _check_frame_decay(c: np.ndarray, tol: float, what: str):
    scale = float(np.max(np.abs(c), initial=0.0))
    if scale == 0.0:
        return
    edge = max(np.abs(c[0]).max(), np.abs(c[-1]).max(), np.abs(c[:, 0]).max(), np.abs(c[:, -1]).max())
    if edge > tol * scale:
        raise InsufficientDecayError(f"{what} is {edge / scale:.2e} of its peak at the (mu, nu) edges (need < {tol:.0e})")


def _assemble(c: np.ndarray, mu: np.ndarray, nu: np.ndarray, dim: int, work_dim: int, decay_tol: float) -> np.ndarray:
    """``(1/2π) ∬ c(mu, nu) exp(-i(mu x + nu p)) dmu dnu`` cropped to ``dim``."""
    _check_frame_decay(c, decay_tol, "characteristic function")
    wm, wn = _trapz_weights(mu), _trapz_weights(nu)
    out = np.zeros((work_dim, work_dim), dtype=complex)
    for i, u in enumerate(mu):
        for j, v in enumerate(nu):
            if c[i, j] != 0:
                out += (c[i, j] * wm[i] * wn[j]) * _frame_exponential(u, v, work_dim)
    return out[:dim, :dim] / (2 * math.pi)


def _finish(out: np.ndarray):
    """Hermitian results come back as :class:`Observable`, others as arrays."""
    try:
        return Observable(out)
    except InputError:
        return out


def reconstruct_operator(f: SymbolGrid, decay_tol: float = DECAY_TOL):
    """``a = ∭ f(X; mu, nu) D(X; mu, nu) dX dmu dnu`` by the trapezoid rule.

    The X integral is done first (a Fourier transform at unit frequency, with
    the ``exp(-σ²/2)`` smoothing factor divided out).
    """
    v = f.values
    scale = float(np.max(np.abs(v), initial=0.0))
    if scale > 0:
        edge = max(np.abs(v[..., 0]).max(), np.abs(v[..., -1]).max())
        if edge > decay_tol * scale:
            raise InsufficientDecayError(f"symbol is {edge / scale:.2e} of its peak at the X edges (need < {decay_tol:.0e})")
    c = v @ (_trapz_weights(f.X) * np.exp(1j * f.X)) * math.exp(f.smoothing ** 2 / 2)
    return _finish(_assemble(c, f.mu, f.nu, f.dim, f.work_dim, decay_tol))


# ---------------------------------------------------------------------------
# Measures of operators and their families
# ---------------------------------------------------------------------------


def measure_from_operator(a, frame, X, smoothing: float | str | None = "auto", work_dim: int | None = None) -> QuantumMeasureCDF:
    """Symplectic measure ``F(X) = Tr(a θ(X - mu x - nu p))``.

    ``smoothing="auto"`` uses the same σ as :func:`dequantize`, so that
    ``dF/dX`` is the symbol; ``None`` gives the exact step function.
    Non-Hermitian operators give complex distribution functions.
    """
    frame = _as_frame(frame)
    X = np.asarray(X, dtype=float)
    m = _matrix(a)
    M = work_dim or default_work_dim(m.shape[0])
    sigma = default_smoothing(X) if smoothing == "auto" else smoothing
    big = embed(m, M)
    if np.allclose(big, big.conj().T, rtol=0, atol=1e-12 * max(1.0, np.abs(big).max())):
        return signed_measure_of_observable(Observable(big), frame, X, sigma)
    sm = spectral_measure(quadrature_operator(frame.mu, frame.nu, M))
    w = np.einsum("ij,kji->k", big, sm.projectors)
    z = X[:, None] - sm.eigenvalues
    steps = ndtr(z / sigma) if sigma else (z >= -1e-9).astype(float)
    return QuantumMeasureCDF(X, steps @ w, frame, (sm.eigenvalues, w), sigma or None)


@dataclass(frozen=True, eq=False)
class MeasureFamily:
    """Symplectic measures of one operator over a ``(mu, nu)`` grid.

    ``atoms[i, j]`` are the spectral weights ``<v_k|a|v_k>`` of frame
    ``(mu_i, nu_j)``; the eigenvalues follow from the frame.
    """

    mu: np.ndarray
    nu: np.ndarray
    X: np.ndarray
    F: np.ndarray = field(repr=False)  # (len(mu), len(nu), len(X))
    atoms: np.ndarray | None = field(repr=False)
    dim: int
    work_dim: int
    smoothing: float | None

    def cdf(self, i: int, j: int) -> QuantumMeasureCDF:
        frame = SymplecticFrame(self.mu[i], self.nu[j])
        atoms = None
        if self.atoms is not None:
            atoms = (frame_spectrum(frame.mu, frame.nu, self.work_dim)[0], self.atoms[i, j])
        return QuantumMeasureCDF(self.X, self.F[i, j], frame, atoms, self.smoothing)


def measure_family(a, mu, nu, X, smoothing: float | str | None = "auto", work_dim: int | None = None) -> MeasureFamily:
    m = _matrix(a)
    X = np.asarray(X, dtype=float)
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    M = work_dim or default_work_dim(m.shape[0])
    sigma = default_smoothing(X) if smoothing == "auto" else smoothing
    big = embed(m, M)
    F = np.empty((mu.size, nu.size, X.size), dtype=complex)
    atoms = np.empty((mu.size, nu.size, M), dtype=complex)
    for i, u in enumerate(mu):
        for j, v in enumerate(nu):
            lam, vecs = frame_spectrum(u, v, M)
            w = _diag_weights(big, vecs)
            z = X[:, None] - lam
            steps = ndtr(z / sigma) if sigma else (z >= -1e-9).astype(float)
            F[i, j] = steps @ w
            atoms[i, j] = w
    if np.abs(F.imag).max(initial=0.0) == 0.0:
        F = F.real
    return MeasureFamily(mu, nu, X, F, atoms, m.shape[0], M, sigma or None)


def _stieltjes_fourier(fam: MeasureFamily, decay_tol: float) -> np.ndarray:
    """``∫ e^{iX} dF(X)`` per frame.

    With atoms the integral is the exact sum over jumps.  Otherwise F is
    integrated as its piecewise-linear interpolant and the smoothing factor
    is divided out.
    """
    if fam.atoms is not None:
        lam = np.array([[frame_spectrum(u, v, fam.work_dim)[0] for v in fam.nu] for u in fam.mu])
        return np.sum(fam.atoms * np.exp(1j * lam), axis=-1)
    X, F = fam.X, fam.F
    scale = float(np.max(np.abs(F), initial=0.0))
    if scale > 0:
        left = np.abs(F[..., 0]).max()
        right = np.abs(F[..., -1] - F[..., -2]).max()
        if max(left, right) > decay_tol * scale:
            raise InsufficientDecayError("distribution functions are not flat at the X edges")
    kern = (np.exp(1j * X[1:]) - np.exp(1j * X[:-1])) / (1j * np.diff(X))
    c = np.diff(F, axis=-1) @ kern
    if fam.smoothing:
        c = c * math.exp(fam.smoothing ** 2 / 2)
    return c


def reconstruct_from_measures(fam: MeasureFamily, decay_tol: float = DECAY_TOL):
    """``a = ∬ [∫ D(X; mu, nu) dF_a(X)] dmu dnu``: Stieltjes integral first, then the frames."""
    c = _stieltjes_fourier(fam, decay_tol)
    return _finish(_assemble(c, fam.mu, fam.nu, fam.dim, fam.work_dim, decay_tol))


# ---------------------------------------------------------------------------
# Star product
# ---------------------------------------------------------------------------


def star_product_kernel(x1: PhasePoint, x2: PhasePoint, x: PhasePoint, dim: int, step: bool = False,
                        smoothing: float = MIN_SMOOTHING, work_dim: int | None = None) -> complex:
    """``K = Tr(D(x1) D(x2) δ_σ(X - mu x - nu p))``, or ``K̃`` with the spectral step θ when ``step``.

    With ``work_dim`` the quantizers are built in the larger truncation and
    compressed onto the first ``dim`` levels, and the target quadrature is
    diagonalized in ``work_dim`` (the conventions of the measure families).
    """
    M = work_dim or dim
    d1 = quantizer(x1, M)[:dim, :dim]
    d2 = quantizer(x2, M)[:dim, :dim]
    prod = embed(d1 @ d2, M)
    lam, vecs = frame_spectrum(x.mu, x.nu, M)
    if step:
        g = (lam <= x.X + 1e-9).astype(float)
    else:
        z = (x.X - lam) / smoothing
        g = np.exp(-0.5 * z * z) / (smoothing * math.sqrt(2 * math.pi))
    return complex(np.sum(_diag_weights(prod, vecs) * g))


def _check_budget(targets, *families: MeasureFamily):
    if len(targets) > MAX_TARGETS:
        raise BudgetExceededError(f"{len(targets)} target points requested, at most {MAX_TARGETS} allowed")
    for fam in families:
        n = fam.mu.size * fam.nu.size
        if n > MAX_FRAMES:
            raise BudgetExceededError(f"{n} frames in a measure family, at most {MAX_FRAMES} allowed")
    a, b = families
    if not (np.array_equal(a.mu, b.mu) and np.array_equal(a.nu, b.nu) and a.work_dim == b.work_dim):
        raise InputError("measure families must share the (mu, nu) grid and working dimension")


def _step_trace(op: np.ndarray, target: PhasePoint) -> complex:
    lam, vecs = frame_spectrum(target.mu, target.nu, op.shape[0])
    return complex(np.sum(_diag_weights(op, vecs)[lam <= target.X + 1e-9]))


def star_multiply_measures(Ma: MeasureFamily, Mb: MeasureFamily, targets: Sequence[PhasePoint],
                           decay_tol: float = KERNEL_DECAY_TOL) -> np.ndarray:
    """Kernel route: ``F_{a*b}(x) = ∫ K̃(x1, x2, x) dF_a(X1) dF_b(X2) dmu1 dnu1 dmu2 dnu2``.

    The kernel is a product of quantizers, so the six-fold integral
    separates: the Stieltjes integrals in ``X1`` and ``X2`` are done first for
    every frame, each family is then summed over its ``(mu, nu)`` grid into an
    operator (compressed onto the ``dim`` levels the measured operators live
    on), and the step function of the target frame closes the trace.
    The summation order is fixed, so results are reproducible bit for bit.
    """
    _check_budget(targets, Ma, Mb)
    if Ma.dim != Mb.dim:
        raise DimensionMismatchError("measure families of operators of different dimensions")
    M = Ma.work_dim
    ops = []
    for fam in (Ma, Mb):
        c = _stieltjes_fourier(fam, decay_tol)
        _check_frame_decay(c, decay_tol, "characteristic function")
        wm, wn = _trapz_weights(fam.mu), _trapz_weights(fam.nu)
        op = np.zeros((M, M), dtype=complex)
        for i, u in enumerate(fam.mu):
            for j, v in enumerate(fam.nu):
                op += (c[i, j] * wm[i] * wn[j] / (2 * math.pi)) * _frame_exponential(u, v, M)
        ops.append(embed(op[: fam.dim, : fam.dim], M))
    prod = ops[0] @ ops[1]
    return np.array([_step_trace(prod, t) for t in targets])


def recover_operator(fam: MeasureFamily) -> np.ndarray:
    """Invert ``w_k(mu, nu) = <v_k|a|v_k>`` for the ``N x N`` operator by least squares."""
    if fam.atoms is None:
        raise InputError("operator recovery needs the atoms of the measures")
    N, M = fam.dim, fam.work_dim
    rows, rhs = [], []
    for i, u in enumerate(fam.mu):
        for j, v in enumerate(fam.nu):
            vecs = frame_spectrum(u, v, M)[1][:N]
            rows.append(np.einsum("ik,jk->kij", vecs.conj(), vecs).reshape(M, N * N))
            rhs.append(fam.atoms[i, j])
    A = np.concatenate(rows)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > INVERSION_MAX_COND:
        raise RankDeficientError(f"frame set does not determine the operator (condition number {cond:.2e})")
    sol, *_ = np.linalg.lstsq(A, np.concatenate(rhs), rcond=None)
    return sol.reshape(N, N)


def star_multiply_operator_route(Ma: MeasureFamily, Mb: MeasureFamily, targets: Sequence[PhasePoint]) -> np.ndarray:
    """Recover both operators from their measures, multiply, and measure the product."""
    prod = embed(recover_operator(Ma) @ recover_operator(Mb), Ma.work_dim)
    return np.array([_step_trace(prod, t) for t in targets])
