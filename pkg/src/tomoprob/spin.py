"""Spin tomography.

Basis convention: index ``k`` of a ``(2j+1)``-vector is the ``J_z`` eigenstate
with ``m = -j + k``, so ``J_z = diag(-j, ..., j)``.  With this ordering the
two-level rotation below is exactly

    R(φ, ψ, θ) = [[cos(θ/2) e^{i(φ+ψ)/2},   i sin(θ/2) e^{-i(φ-ψ)/2}],
                  [i sin(θ/2) e^{i(φ-ψ)/2},  cos(θ/2) e^{-i(φ+ψ)/2}]]

and the state ``(1, 0)`` yields the atom ``cos²(θ/2)`` at ``m = -1/2``.
For general ``j`` the same product ``exp(-iψJ_z) exp(iθJ_x) exp(-iφJ_z)``
is used, which reduces to the matrix above at ``j = 1/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .exceptions import (
    ConsistencyError,
    DimensionMismatchError,
    InputError,
    NormalizationError,
    RankDeficientError,
)
from .measures import QuantumMeasureCDF, measure_from_observable
from .states import Observable, StateSpec, complex_matrix, validate_state

MAX_SPIN = 20
RECONSTRUCTION_MAX_COND = 1e8


def _dim(j: float) -> int:
    d = 2 * j + 1
    if j < 0 or abs(d - round(d)) > 1e-12:
        raise InputError(f"spin must be a non-negative half-integer, got {j}")
    return int(round(d))


def as_spin(j) -> float:
    _dim(float(j))
    return float(j)


@dataclass(frozen=True)
class EulerAngles:
    phi: float = 0.0
    psi: float = 0.0
    theta: float = 0.0


@dataclass(frozen=True, eq=False)
class SpinState:
    """Density matrix of a spin ``j`` in the ascending-``m`` basis."""

    j: float
    elements: np.ndarray

    def __post_init__(self):
        d = _dim(self.j)
        a = np.asarray(self.elements, dtype=complex)
        if a.shape != (d, d):
            raise DimensionMismatchError(f"spin {self.j} needs a {d}x{d} matrix, got {a.shape}")
        object.__setattr__(self, "elements", a)
        diag = validate_state(a)
        if not diag.passed:
            raise NormalizationError(f"not a valid spin state: {diag.report()}")

    @property
    def dim(self) -> int:
        return self.elements.shape[0]


def spin_basis_state(j: float, index: int = 0) -> SpinState:
    """Projector onto basis vector ``index`` (``m = -j + index``)."""
    d = _dim(j)
    rho = np.zeros((d, d), dtype=complex)
    rho[index, index] = 1.0
    return SpinState(j, rho)


def maximally_mixed(j: float) -> SpinState:
    d = _dim(j)
    return SpinState(j, np.eye(d) / d)


def random_spin_state(j: float, rng: np.random.Generator, rank: int | None = None) -> SpinState:
    d = _dim(j)
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = g @ g.conj().T
    return SpinState(j, rho / np.trace(rho).real)


def spin_state_from_spec(spec: StateSpec) -> SpinState:
    """``state: "up"`` is the first basis vector ``(1, 0, ...)``, ``"down"`` the last."""
    if spec.type != "spin":
        raise InputError(f"expected a spin state, got {spec.type!r}")
    j = as_spin(spec.params["j"])
    if "matrix" in spec.params:
        return SpinState(j, complex_matrix(spec.params["matrix"]))
    label = str(spec.params["state"]).lower()
    if label not in ("up", "down"):
        raise InputError(f"spin state label must be 'up' or 'down', got {label!r}")
    return spin_basis_state(j, 0 if label == "up" else _dim(j) - 1)


def spin_matrices(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(J_x, J_y, J_z)`` in the ascending-``m`` basis."""
    d = _dim(j)
    m = -j + np.arange(d)
    jp = np.zeros((d, d), dtype=complex)
    for k in range(d - 1):
        jp[k + 1, k] = math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    return jx, jy, np.diag(m).astype(complex)


def rotation_matrix(j: float, angles: EulerAngles) -> np.ndarray:
    """SU(2) representation matrix ``exp(-iψJ_z) exp(iθJ_x) exp(-iφJ_z)``."""
    if j > MAX_SPIN:
        raise InputError(f"spin above {MAX_SPIN} is not supported")
    jx, _, jz = spin_matrices(j)
    m = np.real(np.diag(jz))
    left = np.exp(-1j * angles.psi * m)
    right = np.exp(-1j * angles.phi * m)
    return left[:, None] * expm(1j * angles.theta * jx) * right[None, :]


def rotated_jz(j: float, angles: EulerAngles) -> Observable:
    r = rotation_matrix(j, angles)
    return Observable(r @ spin_matrices(j)[2] @ r.conj().T)


@dataclass(frozen=True, eq=False)
class SpinTomogram:
    j: float
    angles: EulerAngles
    probs: np.ndarray  # indexed by m = -j..j

    @property
    def m(self) -> np.ndarray:
        return -self.j + np.arange(len(self.probs))


def _elements(rho, j: float | None = None) -> np.ndarray:
    a = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    if j is not None and a.shape != (_dim(j),) * 2:
        raise DimensionMismatchError(f"state of shape {a.shape} does not match spin {j}")
    return a


def spin_tomogram(rho: SpinState, angles: EulerAngles) -> SpinTomogram:
    """``w(m) = <m| R† rho R |m>``, the weight of eigenvalue ``m`` of ``R J_z R†``."""
    j = rho.j
    r = rotation_matrix(j, angles)
    probs = np.real(np.einsum("im,ij,jm->m", r.conj(), _elements(rho, j), r))
    return SpinTomogram(j, angles, probs)


def spin_measure_relation(rho: SpinState, angles: EulerAngles, tol: float = 1e-10):
    """Spin tomogram and the distribution function of ``R J_z R†``.

    Checks ``w(m) = M((m-1, m])`` for every ``m`` and returns ``(cdf, tomogram)``.
    """
    j = rho.j
    tomo = spin_tomogram(rho, angles)
    m = tomo.m
    X = np.concatenate([[m[0] - 1], m])
    cdf = measure_from_observable(rho, rotated_jz(j, angles), X)
    for k, mk in enumerate(m):
        mass = cdf.measure([(mk - 1, mk)])
        if abs(mass - tomo.probs[k]) > tol:
            raise ConsistencyError(f"w({mk}) = {tomo.probs[k]:.15f} but M((m-1, m]) = {mass:.15f}")
    return cdf, tomo


def spin_atoms(cdf: QuantumMeasureCDF) -> list[tuple[float, float]]:
    loc, w = cdf.atoms
    return [(float(x), float(p)) for x, p in zip(loc, w)]


def reconstruct_spin_density(tomograms: Sequence[SpinTomogram]) -> SpinState:
    """Least-squares inversion of ``w(m, angles) = Tr(rho P_m(angles))``."""
    if not tomograms:
        raise InputError("no tomograms given")
    j = tomograms[0].j
    d = _dim(j)
    rows, rhs = [], []
    for t in tomograms:
        if t.j != j:
            raise DimensionMismatchError("tomograms of different spins")
        r = rotation_matrix(j, t.angles)
        for k in range(d):
            v = r[:, k]
            # Tr(rho P) = Σ_ab rho_ab P_ba = vec(rho)·vec(P^T), with P = v v†
            rows.append(np.outer(v, v.conj()).T.ravel())
            rhs.append(t.probs[k])
    A = np.array(rows)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > RECONSTRUCTION_MAX_COND:
        raise RankDeficientError(f"angle set does not determine the state (condition number {cond:.2e})")
    sol, *_ = np.linalg.lstsq(A, np.asarray(rhs, dtype=complex), rcond=None)
    rho = sol.reshape(d, d)
    rho = (rho + rho.conj().T) / 2
    return SpinState(j, rho / np.trace(rho).real)
