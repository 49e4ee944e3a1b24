"""Tomogram and measure evolution for quadratic Hamiltonians.

For ``H = p²/2 + a2 q² + a1 q + a0`` the Heisenberg equations are affine,

    d/dt (q, p, 1) = G (q, p, 1),   G = [[0, 1, 0], [-2 a2, 0, -a1], [0, 0, 0]],

so ``mu q(t) + nu p(t) = mu' q + nu' p + c`` with ``S = exp(tG)``:

    mu' = mu S11 + nu S21,  nu' = mu S12 + nu S22,  c = mu S13 + nu S23.

The tomogram therefore moves along characteristics,
``w(X, mu, nu, t) = w0(X - c, mu', nu')``, and satisfies

    ∂t w - mu ∂nu w + 2 a2 nu (∂X)^-1 ∂mu ∂X w - a1 nu ∂X w = 0.

The signs are pinned by agreement with the von Neumann evolution of the
density matrix in the number basis.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import expm

from .ctomo import TomogramFamily, _trapz_weights
from .exceptions import (
    ConsistencyError,
    DimensionMismatchError,
    FrameOutOfRangeError,
    GridMismatchError,
    GridTooSmallError,
    InputError,
    NormalizationError,
)
from .states import FockDensityMatrix, Observable, ladder_operators

log = logging.getLogger(__name__)

NORM_TOL = 1e-5
NEGATIVITY_TOL = 1e-6
COMMUTATION_TOL = 1e-4


@dataclass(frozen=True)
class QuadraticPotential:
    """``V(q) = a2 q² + a1 q + a0``."""

    a2: float = 0.0
    a1: float = 0.0
    a0: float = 0.0

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        return self.a2 * q * q + self.a1 * q + self.a0


HARMONIC = QuadraticPotential(0.5)
FREE = QuadraticPotential()


def flow_matrix(V: QuadraticPotential, t: float) -> np.ndarray:
    """``S = exp(tG)`` acting on ``(q, p, 1)``."""
    G = np.array([[0.0, 1.0, 0.0], [-2.0 * V.a2, 0.0, -V.a1], [0.0, 0.0, 0.0]])
    return expm(t * G)


def pulled_back_frame(mu, nu, V: QuadraticPotential, t: float):
    """``(mu', nu', c)`` with ``w(X, mu, nu, t) = w0(X - c, mu', nu')``."""
    S = flow_matrix(V, t)
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    return mu * S[0, 0] + nu * S[1, 0], mu * S[0, 1] + nu * S[1, 1], mu * S[0, 2] + nu * S[1, 2]


def _uniform(axis: np.ndarray, name: str) -> float:
    if axis.size < 4:
        raise GridTooSmallError(f"{name} axis needs at least 4 nodes")
    d = np.diff(axis)
    if np.max(np.abs(d - d[0])) > 1e-9 * abs(d[0]):
        raise GridMismatchError(f"{name} axis must be uniform")
    return float(d[0])


def _transport(values: np.ndarray, mu0, nu0, X, V: QuadraticPotential, t: float, mu, nu, outside: float | str):
    """Sample ``values(X - c, mu', nu')`` on the target frames.

    Cubic B-spline interpolation on the ``(mu, nu, X)`` grid; points within one
    cell of the ``(mu, nu)`` boundary use linear interpolation instead.  X
    beyond the axis takes ``outside`` (a number, or ``"edge"`` to hold the
    boundary value, used for distribution functions).
    """
    hm, hn, hx = _uniform(mu0, "mu"), _uniform(nu0, "nu"), _uniform(X, "X")
    mm, nn = np.meshgrid(mu, nu, indexing="ij")
    mp, np_, c = pulled_back_frame(mm, nn, V, t)
    im = (mp - mu0[0]) / hm
    jn = (np_ - nu0[0]) / hn
    slack = 1e-9
    bad = (im < -slack) | (im > mu0.size - 1 + slack) | (jn < -slack) | (jn > nu0.size - 1 + slack)
    if np.any(bad):
        k = np.argmax(bad)
        raise FrameOutOfRangeError(
            f"frame ({mm.flat[k]:.4g}, {nn.flat[k]:.4g}) pulls back to ({mp.flat[k]:.4g}, {np_.flat[k]:.4g}), outside the sampled grid"
        )
    im, jn = np.clip(im, 0, mu0.size - 1), np.clip(jn, 0, nu0.size - 1)
    kx = (X[None, None, :] - c[..., None] - X[0]) / hx
    shape = mm.shape + (X.size,)
    coords = np.array([np.broadcast_to(im[..., None], shape), np.broadcast_to(jn[..., None], shape), np.broadcast_to(kx, shape)])
    out = ndimage.map_coordinates(values, coords.reshape(3, -1), order=3, mode="nearest").reshape(shape)
    near = (im < 1) | (im > mu0.size - 2) | (jn < 1) | (jn > nu0.size - 2)
    if np.any(near):
        log.warning("%d target frames pull back within one cell of the grid edge; using linear interpolation there", int(near.sum()))
        lin = ndimage.map_coordinates(values, coords[:, near].reshape(3, -1), order=1, mode="nearest")
        out[near] = lin.reshape(-1, X.size)
    if outside != "edge":
        out[(kx < 0) | (kx > X.size - 1)] = outside
    return out


def characteristics_propagator(w0: TomogramFamily, V: QuadraticPotential, t: float, mu=None, nu=None) -> TomogramFamily:
    """Tomograms at time ``t`` on frames ``(mu, nu)`` (default: those of ``w0``)."""
    mu = w0.mu if mu is None else np.atleast_1d(np.asarray(mu, dtype=float))
    nu = w0.nu if nu is None else np.atleast_1d(np.asarray(nu, dtype=float))
    values = _transport(w0.values, w0.mu, w0.nu, w0.X, V, t, mu, nu, 0.0)
    return TomogramFamily(mu, nu, w0.X, values)


def quadratic_hamiltonian(V: QuadraticPotential, dim: int) -> Observable:
    """``p²/2 + V(q)`` in the number basis; squares taken before truncating."""
    x, p = ladder_operators(dim + 2)
    x, p = x.elements, p.elements
    h = p @ p / 2 + V.a2 * x @ x + V.a1 * x + V.a0 * np.eye(dim + 2)
    return Observable(h[:dim, :dim])


def von_neumann_oracle(rho0: FockDensityMatrix, H, t: float) -> FockDensityMatrix:
    """``rho(t) = e^{-iHt} rho0 e^{iHt}`` by diagonalizing ``H``."""
    h = H if isinstance(H, Observable) else Observable(np.asarray(H))
    if h.dim != rho0.dim:
        raise DimensionMismatchError(f"Hamiltonian is {h.dim}-dimensional, state {rho0.dim}")
    e, v = np.linalg.eigh(h.elements)
    u = (v * np.exp(-1j * e * t)) @ v.conj().T
    r = u @ rho0.elements @ u.conj().T
    return FockDensityMatrix((r + r.conj().T) / 2)


# ---------------------------------------------------------------------------
# Trajectories and residuals
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TomogramTrajectory:
    """``values[n, i, j, k] = w(X_k; mu_i, nu_j, t_n)``."""

    times: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    X: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = (len(self.times), len(self.mu), len(self.nu), len(self.X))
        if np.shape(self.values) != shape:
            raise InputError(f"trajectory values must have shape {shape}")

    def frame(self, n: int) -> TomogramFamily:
        return TomogramFamily(self.mu, self.nu, self.X, self.values[n])

    def validate(self, norm_tol: float = NORM_TOL, neg_tol: float = NEGATIVITY_TOL) -> None:
        norms = self.values @ _trapz_weights(self.X)
        bad = float(np.max(np.abs(norms - 1.0)))
        if bad > norm_tol:
            raise NormalizationError(f"trajectory normalization off by {bad:.2e}")
        low = float(self.values.min())
        if low < -neg_tol:
            raise NormalizationError(f"trajectory has negative values down to {low:.2e}")


def trajectory(w0: TomogramFamily, V: QuadraticPotential, times: Sequence[float], mu=None, nu=None) -> TomogramTrajectory:
    fams = [characteristics_propagator(w0, V, t, mu, nu) for t in times]
    return TomogramTrajectory(np.asarray(times, dtype=float), fams[0].mu, fams[0].nu, w0.X, np.array([f.values for f in fams]))


def _spectral_antiderivative(f: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Periodic antiderivative along the last axis, zero-frequency component dropped."""
    k = 2 * math.pi * np.fft.rfftfreq(X.size, d=X[1] - X[0])
    fk = np.fft.rfft(f, axis=-1)
    inv = np.zeros_like(k)
    inv[1:] = 1.0 / k[1:]
    return np.fft.irfft(fk * (-1j * inv), n=X.size, axis=-1)


def _grid_steps(traj: TomogramTrajectory):
    return (_uniform(traj.times, "t"), _uniform(traj.mu, "mu"), _uniform(traj.nu, "nu"), _uniform(traj.X, "X"))


def _central(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Central difference along ``axis`` at every node except the two ends, then cropped to the interior of all axes."""
    n = f.shape[axis]
    d = (np.take(f, range(2, n), axis=axis) - np.take(f, range(n - 2), axis=axis)) / (2 * h)
    idx = [slice(1, -1)] * f.ndim
    idx[axis] = slice(None)
    return d[tuple(idx)]


def pde_residual_field(traj: TomogramTrajectory, V: QuadraticPotential) -> np.ndarray:
    """Left side of the evolution equation at interior ``(t, mu, nu, X)`` nodes (central differences)."""
    dt, dm, dn, dx = _grid_steps(traj)
    w = traj.values
    w_X = (np.roll(w, -1, axis=-1) - np.roll(w, 1, axis=-1)) / (2 * dx)
    w_muX = (w_X[:, 2:] - w_X[:, :-2]) / (2 * dm)
    term = _spectral_antiderivative(w_muX, traj.X)[1:-1, :, 1:-1, 1:-1]
    mu = traj.mu[1:-1][None, :, None, None]
    nu = traj.nu[1:-1][None, None, :, None]
    core = (slice(1, -1),) * 4
    return _central(w, 0, dt) - mu * _central(w, 2, dn) + 2 * V.a2 * nu * term - V.a1 * nu * w_X[core]


def pde_residual(traj: TomogramTrajectory, V: QuadraticPotential) -> float:
    """Sup-norm of :func:`pde_residual_field`."""
    return float(np.max(np.abs(pde_residual_field(traj, V))))


def convergence_order(coarse: TomogramTrajectory, fine: TomogramTrajectory, V: QuadraticPotential) -> float:
    """``log2(r_coarse / r_fine)`` for a grid and its halving.

    Raises when the residual does not shrink, i.e. the coarse grid does not
    resolve the trajectory.
    """
    rc, rf = pde_residual(coarse, V), pde_residual(fine, V)
    if not rf < rc:
        raise GridTooSmallError(f"residual does not decrease under halving ({rc:.3e} -> {rf:.3e})")
    return math.log2(rc / rf)


# ---------------------------------------------------------------------------
# Distribution functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CDFFamily:
    """Distribution functions on a ``(mu, nu, X)`` grid; ``F[i, j, k] = F(X_k; mu_i, nu_j)``."""

    mu: np.ndarray
    nu: np.ndarray
    X: np.ndarray
    F: np.ndarray = field(repr=False)

    def derivative(self) -> TomogramFamily:
        return TomogramFamily(self.mu, self.nu, self.X, np.gradient(self.F, self.X, axis=-1, edge_order=2))


def cdf_family(w: TomogramFamily) -> CDFFamily:
    """Running X-integral of every tomogram of the family."""
    return CDFFamily(w.mu, w.nu, w.X, cumulative_trapezoid(w.values, w.X, axis=-1, initial=0.0))


def measure_evolution(F0: CDFFamily, V: QuadraticPotential, t: float, mu=None, nu=None,
                      tol: float = COMMUTATION_TOL) -> CDFFamily:
    """Transport distribution functions along the same characteristics as tomograms.

    Also transports ``dF0/dX`` and checks that it matches ``dF(t)/dX`` within
    ``tol`` (relative to the peak density), i.e. that X-differentiation commutes
    with the evolution on this grid.
    """
    mu = F0.mu if mu is None else np.atleast_1d(np.asarray(mu, dtype=float))
    nu = F0.nu if nu is None else np.atleast_1d(np.asarray(nu, dtype=float))
    F = _transport(F0.F, F0.mu, F0.nu, F0.X, V, t, mu, nu, "edge")
    out = CDFFamily(mu, nu, F0.X, F)
    w0 = F0.derivative()
    wt = characteristics_propagator(w0, V, t, mu, nu)
    dev = float(np.max(np.abs(out.derivative().values - wt.values)))
    scale = max(float(np.max(np.abs(wt.values))), 1e-300)
    if dev > tol * scale:
        raise ConsistencyError(f"d/dX does not commute with the evolution: deviation {dev:.2e}")
    return out


def measure_residual_field(F: Sequence[CDFFamily], times, V: QuadraticPotential) -> np.ndarray:
    """Integrated evolution equation for distribution functions at interior nodes:

    ``∂t F - mu ∂nu F + 2 a2 nu ∂mu F - a1 nu ∂X F``.
    """
    times = np.asarray(times, dtype=float)
    f = np.array([g.F for g in F])
    ref = F[0]
    dt, dm, dn, dx = _uniform(times, "t"), _uniform(ref.mu, "mu"), _uniform(ref.nu, "nu"), _uniform(ref.X, "X")
    mu = ref.mu[1:-1][None, :, None, None]
    nu = ref.nu[1:-1][None, None, :, None]
    return (_central(f, 0, dt) - mu * _central(f, 2, dn) + 2 * V.a2 * nu * _central(f, 1, dm)
            - V.a1 * nu * _central(f, 3, dx))
