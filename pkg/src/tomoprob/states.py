"""Quantum states and canonical operators.

Units are dimensionless with hbar = m = omega = 1, so the vacuum wave function
is ``pi**-0.25 * exp(-x**2 / 2)`` and ``x = (a + a^dagger) / sqrt(2)``.

Continuous-variable states live either on a :class:`PositionGrid` (wave
functions, position-basis kernels) or in a truncated number basis
(:class:`FockDensityMatrix`).  Spin states are in :mod:`tomoprob.spin`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    GridTooSmallError,
    InputError,
    NormalizationError,
    NotHermitianError,
)

DEFAULT_DIM = 32
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
EIGEN_TOL = 1e-10
WAVEFUNCTION_NORM_TOL = 1e-8
COEFFICIENT_NORM_TOL = 1e-6
MAX_FOCK_INDEX = 200


@dataclass(frozen=True)
class PositionGrid:
    """Uniform grid on ``[x_min, x_max]`` with ``n_points`` nodes."""

    x_min: float = -10.0
    x_max: float = 10.0
    n_points: int = 1001

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InputError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise InputError("x_max must exceed x_min")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def covers(self, lo: float, hi: float) -> bool:
        return self.x_min <= lo and self.x_max >= hi

    def index_of(self, x: float, tol: float = 1e-9) -> int:
        """Index of the node at ``x``; raises if ``x`` is not a node."""
        k = (x - self.x_min) / self.spacing
        i = int(round(k))
        if abs(k - i) > tol / self.spacing or not 0 <= i < self.n_points:
            raise InputError(f"{x!r} is not a node of {self}")
        return i


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """Unit-normalized amplitude sampled on a position grid."""

    grid: PositionGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise DimensionMismatchError("values must have one entry per grid node")
        object.__setattr__(self, "values", values)
        if abs(self.norm() - 1.0) > WAVEFUNCTION_NORM_TOL:
            raise NormalizationError(f"wave function norm {self.norm():.3e} != 1")

    def norm(self) -> float:
        """Squared norm by trapezoid quadrature."""
        w = trapezoid_weights(self.grid.n_points, self.grid.spacing)
        return float(np.sum(w * np.abs(self.values) ** 2))

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def normalized(grid: PositionGrid, values) -> Wavefunction:
    values = np.asarray(values, dtype=complex)
    w = trapezoid_weights(grid.n_points, grid.spacing)
    n2 = float(np.sum(w * np.abs(values) ** 2))
    if not n2 > 0:
        raise NormalizationError("cannot normalize a zero wave function")
    return Wavefunction(grid, values / math.sqrt(n2))


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Oscillator eigenfunctions psi_0..psi_{n_max} evaluated at ``x``.

    Uses the three-term recurrence on the normalized functions,
    ``psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}``,
    which does not overflow the way raw ``H_n(x)`` does.
    Returns an array of shape ``(n_max + 1,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-x * x / 2)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _require_support(grid: PositionGrid, lo: float, hi: float, what: str):
    if not grid.covers(lo, hi):
        raise GridTooSmallError(
            f"{what} needs the grid to span [{lo:.3g}, {hi:.3g}], got [{grid.x_min}, {grid.x_max}]"
        )


def fock_wavefunction(n: int, grid: PositionGrid | None = None) -> Wavefunction:
    """Number state ``|n>`` in position representation, renormalized on the grid."""
    grid = grid or PositionGrid()
    if n < 0 or n > MAX_FOCK_INDEX:
        raise InputError(f"Fock index must lie in [0, {MAX_FOCK_INDEX}], got {n}")
    half = math.sqrt(2 * n + 1) + 4
    _require_support(grid, -half, half, f"Fock state n={n}")
    return normalized(grid, hermite_functions(n, grid.points)[n])


def coherent_wavefunction(alpha: complex, grid: PositionGrid | None = None) -> Wavefunction:
    """Coherent state ``|alpha>``; its density is centred at ``sqrt(2) Re(alpha)``."""
    grid = grid or PositionGrid()
    alpha = complex(alpha)
    centre = math.sqrt(2) * alpha.real
    margin = 4 / math.sqrt(2) + 4  # 4 sigma of |psi|^2 plus the vacuum tail
    _require_support(grid, centre - margin, centre + margin, f"coherent state alpha={alpha}")
    x = grid.points
    exponent = -x * x / 2 + math.sqrt(2) * alpha * x - alpha * alpha / 2 - abs(alpha) ** 2 / 2
    return normalized(grid, np.pi ** -0.25 * np.exp(exponent))


def coherent_coefficients(alpha: complex, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Number-basis amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)`` for n < dim."""
    alpha = complex(alpha)
    c = np.empty(dim, dtype=complex)
    c[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


@dataclass(frozen=True)
class SymplecticFrame:
    """Coefficients of the measured quadrature ``X = mu q + nu p``.

    ``squeeze`` and ``angle`` are kept when the frame was built from them
    (``mu = e^squeeze cos(angle)``, ``nu = e^-squeeze sin(angle)``).
    """

    mu: float
    nu: float
    squeeze: float | None = None
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "nu", float(self.nu))
        if self.mu == 0.0 and self.nu == 0.0:
            raise InputError("frame (mu, nu) = (0, 0) is degenerate")

    @property
    def scale(self) -> float:
        """``sqrt(mu^2 + nu^2)``."""
        return math.hypot(self.mu, self.nu)

    @property
    def direction(self) -> float:
        """Polar angle of ``(mu, nu)``."""
        return math.atan2(self.nu, self.mu)

    def scaled(self, s: float) -> "SymplecticFrame":
        return SymplecticFrame(self.mu * s, self.nu * s)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian matrix in a truncated number (or spin) basis."""

    elements: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.elements, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatchError("observable must be a square matrix")
        defect = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
        if defect > HERMITIAN_TOL * max(1.0, np.max(np.abs(a))):
            raise NotHermitianError(f"Hermiticity defect {defect:.3e}")
        object.__setattr__(self, "elements", (a + a.conj().T) / 2)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]


@dataclass(frozen=True)
class StateDiagnostics:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    passed: bool

    def report(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}: hermiticity defect {self.hermiticity_defect:.3e}, "
            f"trace defect {self.trace_defect:.3e}, min eigenvalue {self.min_eigenvalue:.6g}"
        )


def validate_state(rho) -> StateDiagnostics:
    """Check Hermiticity, unit trace and positivity of a density matrix."""
    a = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError("density matrix must be square")
    herm = float(np.max(np.abs(a - a.conj().T)))
    trace = float(abs(np.trace(a) - 1.0))
    min_eig = float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])
    passed = herm <= HERMITIAN_TOL and trace <= TRACE_TOL and min_eig >= -EIGEN_TOL
    return StateDiagnostics(herm, trace, min_eig, passed)


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    """Density matrix in the number basis truncated to ``dim`` levels."""

    elements: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.elements, dtype=complex)
        object.__setattr__(self, "elements", a)
        diag = validate_state(a)
        if not diag.passed:
            raise NormalizationError(f"not a valid state: {diag.report()}")

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def padded(self, dim: int) -> "FockDensityMatrix":
        if dim < self.dim:
            raise DimensionMismatchError("cannot pad to a smaller dimension")
        out = np.zeros((dim, dim), dtype=complex)
        out[: self.dim, : self.dim] = self.elements
        return FockDensityMatrix(out)


def fock_density(n: int, dim: int = DEFAULT_DIM) -> FockDensityMatrix:
    if not 0 <= n < dim:
        raise InputError(f"Fock index {n} outside truncation {dim}")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return FockDensityMatrix(rho)


def density_from_wavefunction(psi, dim: int = DEFAULT_DIM) -> FockDensityMatrix:
    """Pure-state projector ``|psi><psi|`` in the truncated number basis.

    ``psi`` is either a :class:`Wavefunction` (projected onto the first
    ``dim`` number states by quadrature) or a vector of number-basis
    amplitudes.  The retained norm must be 1 within 1e-6; the projector is
    then renormalized so that its trace is 1 to rounding.
    """
    if isinstance(psi, Wavefunction):
        grid = psi.grid
        basis = hermite_functions(dim - 1, grid.points)
        w = trapezoid_weights(grid.n_points, grid.spacing)
        c = basis @ (w * psi.values)
    else:
        c = np.asarray(psi, dtype=complex).ravel()
        if c.size > dim:
            if np.sum(np.abs(c[dim:]) ** 2) > COEFFICIENT_NORM_TOL:
                raise NormalizationError("amplitudes beyond the truncation carry weight")
            c = c[:dim]
        elif c.size < dim:
            c = np.concatenate([c, np.zeros(dim - c.size, dtype=complex)])
    n2 = float(np.sum(np.abs(c) ** 2))
    if abs(n2 - 1.0) > COEFFICIENT_NORM_TOL:
        raise NormalizationError(f"retained norm {n2:.8f} differs from 1 by more than 1e-6")
    c = c / math.sqrt(n2)
    return FockDensityMatrix(np.outer(c, c.conj()))


def mixture(weights: Sequence[float], states: Sequence[FockDensityMatrix]) -> FockDensityMatrix:
    dim = max(s.dim for s in states)
    out = sum(w * s.padded(dim).elements for w, s in zip(weights, states))
    return FockDensityMatrix(out)


def ladder_operators(dim: int = DEFAULT_DIM) -> tuple[Observable, Observable]:
    """Position and momentum matrices ``x = (a + a†)/√2``, ``p = (a - a†)/(i√2)``.

    The truncation spoils ``[x, p] = i`` only in the last diagonal entry.
    """
    if dim < 2:
        raise InputError("need at least two levels")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    x = (a + a.conj().T) / math.sqrt(2)
    p = (a - a.conj().T) / (1j * math.sqrt(2))
    return Observable(x), Observable(p)


def quadrature_operator(mu: float, nu: float, dim: int = DEFAULT_DIM) -> Observable:
    """Truncated ``mu x + nu p``."""
    x, p = ladder_operators(dim)
    return Observable(mu * x.elements + nu * p.elements)


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


@dataclass(frozen=True)
class DensityKernel:
    """Position-basis density matrix ``rho(y, y')`` sampled on ``grid x grid``."""

    grid: PositionGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        n = self.grid.n_points
        if v.shape != (n, n):
            raise DimensionMismatchError(f"kernel must be {n}x{n}, got {v.shape}")
        object.__setattr__(self, "values", v)

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.values))


def kernel_from_wavefunction(psi: Wavefunction) -> DensityKernel:
    return DensityKernel(psi.grid, np.outer(psi.values, psi.values.conj()))


def kernel_from_fock(rho: FockDensityMatrix, grid: PositionGrid | None = None) -> DensityKernel:
    """``rho(y, y') = sum_mn rho_mn psi_m(y) psi_n(y')`` on the grid."""
    grid = grid or PositionGrid()
    half = math.sqrt(2 * rho.dim + 1) + 4
    _require_support(grid, -half, half, f"number-basis state of dimension {rho.dim}")
    basis = hermite_functions(rho.dim - 1, grid.points)
    return DensityKernel(grid, basis.T @ rho.elements @ basis)


# ---------------------------------------------------------------------------
# State specification documents
# ---------------------------------------------------------------------------

STATE_TYPES = ("fock", "coherent", "superposition", "mixed", "spin")


@dataclass(frozen=True)
class StateSpec:
    """Parsed state description; see README for the document schema."""

    type: str
    params: dict = field(default_factory=dict)

    def fock_density(self, dim: int = DEFAULT_DIM) -> FockDensityMatrix:
        p = self.params
        if self.type == "fock":
            return fock_density(int(p["n"]), dim)
        if self.type == "coherent":
            return density_from_wavefunction(coherent_coefficients(self.alpha, dim), dim)
        if self.type == "superposition":
            c = complex_vector(p["coefficients"])
            norm = float(np.linalg.norm(c))
            if norm == 0:
                raise InputError("superposition coefficients are all zero")
            return density_from_wavefunction(c / norm, dim)
        if self.type == "mixed":
            m = complex_matrix(p["matrix"])
            if m.shape[0] > dim:
                raise DimensionMismatchError("mixed-state matrix exceeds the truncation")
            out = np.zeros((dim, dim), dtype=complex)
            out[: m.shape[0], : m.shape[1]] = m
            return FockDensityMatrix(out)
        raise InputError(f"state type {self.type!r} has no number-basis form")

    def raw_matrix(self) -> np.ndarray:
        """Matrix exactly as given (no validation), for diagnostics."""
        if "matrix" in self.params:
            return complex_matrix(self.params["matrix"])
        return self.fock_density().elements

    @property
    def alpha(self) -> complex:
        return complex(float(self.params.get("alpha_re", 0.0)), float(self.params.get("alpha_im", 0.0)))

    def wavefunction(self, grid: PositionGrid | None = None) -> Wavefunction:
        if self.type == "fock":
            return fock_wavefunction(int(self.params["n"]), grid)
        if self.type == "coherent":
            return coherent_wavefunction(self.alpha, grid)
        if self.type == "superposition":
            grid = grid or PositionGrid()
            c = complex_vector(self.params["coefficients"])
            basis = hermite_functions(len(c) - 1, grid.points)
            return normalized(grid, c @ basis)
        raise InputError(f"state type {self.type!r} is not a pure continuous-variable state")


def _complex_entry(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InputError(f"complex entries are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def complex_vector(data) -> np.ndarray:
    """List of entries; each entry is a number or an ``[re, im]`` pair."""
    if not isinstance(data, (list, tuple)) or not data:
        raise InputError("expected a non-empty list of entries")
    return np.array([_complex_entry(e) for e in data], dtype=complex)


def complex_matrix(data) -> np.ndarray:
    """List of rows of entries."""
    if not isinstance(data, (list, tuple)) or not data:
        raise InputError("expected a non-empty list of rows")
    rows = [complex_vector(r) for r in data]
    if any(len(r) != len(rows) for r in rows):
        raise InputError("matrix must be square")
    return np.array(rows)


def _parse_shorthand(text: str) -> StateSpec:
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind == "fock":
        return StateSpec("fock", {"n": int(arg)})
    if kind == "coherent":
        a = complex(arg.replace(" ", "").replace("i", "j")) if arg else 0j
        return StateSpec("coherent", {"alpha_re": a.real, "alpha_im": a.imag})
    if kind in ("up", "down"):
        return StateSpec("spin", {"j": 0.5, "state": kind})
    raise InputError(f"unrecognized state shorthand {text!r}")


def parse_state_spec(text: str) -> StateSpec:
    """Parse a JSON state document or a shorthand such as ``fock:2``."""
    text = text.strip()
    if not text.startswith("{"):
        return _parse_shorthand(text)
    try:
        doc: dict[str, Any] = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed state document: {exc}") from exc
    kind = doc.get("type")
    if kind not in STATE_TYPES:
        raise InputError(f"state type must be one of {STATE_TYPES}, got {kind!r}")
    required = {
        "fock": ("n",),
        "coherent": (),
        "superposition": ("coefficients",),
        "mixed": ("matrix",),
        "spin": ("j",),
    }[kind]
    missing = [k for k in required if k not in doc]
    if missing:
        raise InputError(f"{kind} state is missing {missing}")
    if kind == "spin" and "state" not in doc and "matrix" not in doc:
        raise InputError("spin state needs either 'state' or 'matrix'")
    params = {k: v for k, v in doc.items() if k != "type"}
    return StateSpec(kind, params)


def load_state_spec(path) -> StateSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_state_spec(fh.read())
