"""Quantum probability measures and their distribution functions.

A state ``rho`` and an observable ``a`` with spectral measure ``M`` define the
classical measure ``Ω -> Tr(rho M(Ω))``.  Measures are represented by their
distribution functions ``F(X) = M((-∞, X])`` sampled on an axis; discrete
(spectral) measures additionally carry their atoms so that evaluation at
arbitrary points is exact.  Sets beyond half-lines are finite unions of
half-open intervals ``(a, b]``.

For the quadrature ``mu x + nu p`` the derivative of ``F`` is the tomogram.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import erf, ndtr

from .ctomo import Tomogram, _as_frame
from .exceptions import DimensionMismatchError, InputError, NormalizationError
from .states import Observable, SymplecticFrame, quadrature_operator

DEGENERACY_GAP = 1e-10
ATOM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Distinct eigenvalues (ascending) and the orthogonal projectors onto their eigenspaces."""

    eigenvalues: np.ndarray
    projectors: np.ndarray  # (k, d, d)

    def __len__(self):
        return len(self.eigenvalues)

    def weights(self, a) -> np.ndarray:
        """``Tr(a P_k)`` for every projector (real for Hermitian ``a``)."""
        a = np.asarray(getattr(a, "elements", a))
        if a.shape != self.projectors.shape[1:]:
            raise DimensionMismatchError(f"operator shape {a.shape} vs projectors {self.projectors.shape[1:]}")
        w = np.einsum("ij,kji->k", a, self.projectors)
        return np.real_if_close(w, tol=1e6)


def spectral_measure(a) -> SpectralMeasure:
    """Eigen-decomposition with eigenvalues closer than 1e-10 merged into one projector."""
    if not isinstance(a, Observable):
        a = Observable(np.asarray(getattr(a, "elements", a)))
    lam, vecs = np.linalg.eigh(a.elements)
    groups: list[list[int]] = [[0]]
    for k in range(1, lam.size):
        if lam[k] - lam[groups[-1][-1]] < DEGENERACY_GAP:
            groups[-1].append(k)
        else:
            groups.append([k])
    values = np.array([lam[g].mean() for g in groups])
    projectors = np.array([vecs[:, g] @ vecs[:, g].conj().T for g in groups])
    return SpectralMeasure(values, projectors)


@dataclass(frozen=True, eq=False)
class QuantumMeasureCDF:
    """Distribution function ``F(X) = M((-∞, X])`` sampled on ``X``.

    ``atoms`` holds ``(locations, weights)`` when the measure is discrete;
    ``smoothing`` is the width of the normal kernel each atom was spread into
    (``None`` for the exact step function).
    """

    X: np.ndarray
    F: np.ndarray
    frame: SymplecticFrame | None = None
    atoms: tuple[np.ndarray, np.ndarray] | None = None
    smoothing: float | None = None

    def __call__(self, x) -> np.ndarray:
        """Right-continuous evaluation at arbitrary points."""
        x = np.asarray(x, dtype=float)
        if self.atoms is not None:
            out = _step_values(*self.atoms, x, self.smoothing)
        else:
            out = np.interp(x, self.X, self.F)
        return out if np.ndim(out) else out.item()

    def measure(self, intervals: Iterable[tuple[float, float]]) -> float:
        """Mass of a finite union of half-open intervals ``(a, b]``."""
        merged: list[list[float]] = []
        for a, b in sorted((float(a), float(b)) for a, b in intervals):
            if b <= a:
                continue
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return float(sum(self(b) - self(a) for a, b in merged))

    @property
    def total(self) -> float:
        if self.atoms is not None:
            return float(np.sum(self.atoms[1]))
        return float(self.F[-1])

    def validate_probability(self, tol: float = 1e-6, mono_tol: float = 1e-9) -> None:
        """Raise unless F is a probability distribution function on its axis."""
        dec = float(np.max(-np.diff(self.F), initial=0.0))
        if dec > mono_tol:
            raise NormalizationError(f"distribution function decreases by {dec:.3e}")
        if self.F[0] > tol:
            raise NormalizationError(f"F(first) = {self.F[0]:.3e} > {tol}")
        if abs(self.F[-1] - 1.0) > tol:
            raise NormalizationError(f"F(last) = {self.F[-1]:.10f} != 1")


def _step_values(locations: np.ndarray, weights: np.ndarray, X: np.ndarray, smoothing: float | None):
    X = np.asarray(X, dtype=float)[..., None]
    if smoothing:
        return ndtr((X - locations) / smoothing) @ weights
    return (locations <= X + ATOM_TOL).astype(float) @ weights


def measure_from_observable(rho, a, X, frame: SymplecticFrame | None = None) -> QuantumMeasureCDF:
    """``F(X) = Σ_{λ_k ≤ X} Tr(rho P_k)`` for the spectral measure of ``a``."""
    X = np.asarray(X, dtype=float)
    r = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    sm = a if isinstance(a, SpectralMeasure) else spectral_measure(a)
    if r.shape != sm.projectors.shape[1:]:
        raise DimensionMismatchError(f"state is {r.shape}, observable is {sm.projectors.shape[1:]}")
    w = np.real(sm.weights(r)).astype(float)
    return QuantumMeasureCDF(X, _step_values(sm.eigenvalues, w, X, None), frame, (sm.eigenvalues, w))


def quadrature_measure(rho, frame, X) -> QuantumMeasureCDF:
    """Measure of the truncated quadrature ``mu x + nu p`` in the state ``rho``."""
    frame = _as_frame(frame)
    dim = np.asarray(getattr(rho, "elements", rho)).shape[0]
    return measure_from_observable(rho, quadrature_operator(frame.mu, frame.nu, dim), X, frame)


def signed_measure_of_observable(a, frame, X, smoothing: float | None = None) -> QuantumMeasureCDF:
    """``F(X) = Tr(a M((-∞, X]))`` with ``M`` the spectral measure of ``mu x + nu p``.

    For a general Hermitian ``a`` the result need not be monotone.  With
    ``smoothing = σ`` each atom is spread into a normal distribution of width
    σ (so ``dF/dX`` is the Gaussian-regularized symbol); atoms are kept either way.
    """
    frame = _as_frame(frame)
    X = np.asarray(X, dtype=float)
    a = a if isinstance(a, Observable) else Observable(np.asarray(getattr(a, "elements", a)))
    sm = spectral_measure(quadrature_operator(frame.mu, frame.nu, a.dim))
    w = np.real(sm.weights(a)).astype(float)
    F = _step_values(sm.eigenvalues, w, X, smoothing)
    return QuantumMeasureCDF(X, F, frame, (sm.eigenvalues, w), smoothing or None)


def cdf_from_tomogram(tomo: Tomogram, tol: float = 1e-6) -> QuantumMeasureCDF:
    """Running integral of a normalized tomogram (cumulative trapezoid)."""
    total = tomo.normalization()
    if abs(total - 1.0) > tol:
        raise NormalizationError(f"tomogram integrates to {total:.10f}, not 1")
    F = cumulative_trapezoid(tomo.values, tomo.X, initial=0.0)
    return QuantumMeasureCDF(tomo.X, F, tomo.frame)


def derivative_is_tomogram(cdf: QuantumMeasureCDF) -> Tomogram:
    """Central-difference derivative of a smooth distribution function."""
    if cdf.atoms is not None and not cdf.smoothing:
        raise InputError("distribution function of a discrete measure has no derivative")
    dF = np.diff(cdf.F)
    if dF.size >= 3 and cdf.atoms is None:
        neighbours = np.abs(np.concatenate([[0.0], dF[:-1]])) + np.abs(np.concatenate([dF[1:], [0.0]]))
        if np.any(np.abs(dF) > 1e-3 + 10 * neighbours):
            raise InputError("distribution function has jumps; derivative undefined")
    frame = cdf.frame if cdf.frame is not None else SymplecticFrame(1.0, 0.0)
    return Tomogram(frame, cdf.X, np.gradient(cdf.F, cdf.X, edge_order=2))


def vacuum_position_measure(X) -> QuantumMeasureCDF:
    """Gaussian measure of zero mean and variance 1/2 (position of the vacuum)."""
    X = np.asarray(X, dtype=float)
    return QuantumMeasureCDF(X, 0.5 * (1 + erf(X)), SymplecticFrame(1.0, 0.0))


# ---------------------------------------------------------------------------
# Closed form for number states from the generating function
# ---------------------------------------------------------------------------

MAX_ORACLE_N = 10


@lru_cache(maxsize=None)
def _hermite_coefficients(k: int) -> tuple[int, ...]:
    """Integer coefficients (ascending powers) of the physicists' H_k."""
    prev, cur = [1], [0, 2]
    if k == 0:
        return (1,)
    for j in range(1, k):
        nxt = [0] * (j + 2)
        for i, c in enumerate(cur):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(prev):
            nxt[i] -= 2 * j * c
        prev, cur = cur, nxt
    return tuple(cur)


@lru_cache(maxsize=None)
def cdf_fock_polynomial(n: int) -> tuple[Fraction, ...]:
    """Rational polynomial ``P_n`` with ``F_n(z) = (1 + erf z)/2 - e^{-z²} P_n(z)/√π``.

    Obtained by extracting the ``α^n β^n`` coefficient of
    ``½ e^{αβ} (1 + erf(z - (α+β)/√2))``: the erf Taylor series contributes
    ``-(2/√π) H_{2m-1}(z) e^{-z²} / (2^m (m!)²)`` at order ``α^m β^m`` and the
    exponential contributes ``1/(n-m)!``; the result is scaled by ``n!``.
    """
    if not 0 <= n <= MAX_ORACLE_N:
        raise InputError(f"generating-function oracle supports 0 <= n <= {MAX_ORACLE_N}")
    coeffs = [Fraction(0)] * (2 * n)
    for m in range(1, n + 1):
        scale = Fraction(math.factorial(n), math.factorial(n - m) * 2 ** m * math.factorial(m) ** 2)
        for i, c in enumerate(_hermite_coefficients(2 * m - 1)):
            coeffs[i] += scale * c
    return tuple(coeffs)


def oracle_cdf_fock(n: int, X, frame) -> np.ndarray:
    """Distribution function of ``mu x + nu p`` in the number state ``|n>``."""
    frame = _as_frame(frame)
    z = np.asarray(X, dtype=float) / frame.scale
    poly = np.array([float(c) for c in cdf_fock_polynomial(n)][::-1] or [0.0])
    return 0.5 * (1 + erf(z)) - np.exp(-z * z) * np.polyval(poly, z) / math.sqrt(math.pi)
