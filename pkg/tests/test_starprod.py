import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from tomoprob.ctomo import oracle_tomogram_fock, reconstruction_axis
from tomoprob.exceptions import BudgetExceededError, InputError, InsufficientDecayError
from tomoprob.starprod import (
    MAX_TARGETS,
    PhasePoint,
    dequantize,
    frame_spectrum,
    measure_family,
    measure_from_operator,
    quantizer,
    reconstruct_from_measures,
    reconstruct_operator,
    recover_operator,
    star_multiply_measures,
    star_multiply_operator_route,
    star_product_kernel,
)
from tomoprob.states import (
    coherent_coefficients,
    density_from_wavefunction,
    fock_density,
    ladder_operators,
    quadrature_operator,
)

from conftest import random_hermitian, random_pure

AX_OP = reconstruction_axis(1.5, 0.5)  # 6 x 6 frames: enough to recover an N <= 12 operator
AX_KERNEL = reconstruction_axis(7.5, 0.75)  # 20 x 20 frames, the coarse kernel budget
TARGETS = [PhasePoint(0.3, 1.0, 0.2), PhasePoint(-0.5, 0.4, 0.9), PhasePoint(1.0, -0.7, 0.5), PhasePoint(0.0, 1.0, 0.0)]


def _direct(op, targets):
    return np.array([measure_from_operator(op, (t.mu, t.nu), [t.X], smoothing=None).F[0] for t in targets])


def _families(a, b, ax):
    X = np.array([0.0])
    return measure_family(a, ax, ax, X, smoothing=None), measure_family(b, ax, ax, X, smoothing=None)


# --- dequantizer ----------------------------------------------------------


def test_frame_spectrum_matches_direct_diagonalization():
    lam, vecs = frame_spectrum(0.6, -1.3, 20)
    A = quadrature_operator(0.6, -1.3, 20).elements
    assert np.allclose(A @ vecs, vecs * lam, atol=1e-12)
    assert np.allclose(np.sort(lam), np.linalg.eigvalsh(A), atol=1e-12)


def test_dequantize_identity_integrates_to_dim():
    X = np.linspace(-25, 25, 5001)
    f = dequantize(np.eye(6), X, [0.8], [0.6], smoothing=0.1)
    lam = frame_spectrum(0.8, 0.6, f.work_dim)[0]
    assert np.trapezoid(f.values[0, 0].real, X) == pytest.approx(6.0, abs=1e-9)
    # only N of the working-dimension atoms carry weight, spread as normal densities
    assert np.max(f.values[0, 0].real) > 0 and lam.size == f.work_dim


def test_dequantize_hermitian_is_real(rng):
    f = dequantize(random_hermitian(rng, 5), np.linspace(-6, 6, 121), [1.0, -0.5], [0.3, 0.7])
    assert np.max(np.abs(f.values.imag)) < 1e-10


def test_dequantize_vacuum_smoothed_oracle():
    # The regularized symbol is the tomogram convolved with a normal density of width σ:
    # for the vacuum a Gaussian of variance s²/2 + σ².  σ = 0.5 makes the truncated
    # spectrum's discreteness invisible at N = 32.
    sigma = 0.5
    X = np.linspace(-6, 6, 241)
    for mu, nu in [(1.0, 0.0), (0.6, 0.8), (1.2, -0.5)]:
        f = dequantize(fock_density(0, 32), X, [mu], [nu], smoothing=sigma)
        var = (mu * mu + nu * nu) / 2 + sigma * sigma
        oracle = np.exp(-X ** 2 / (2 * var)) / math.sqrt(2 * math.pi * var)
        assert np.max(np.abs(f.values[0, 0].real - oracle)) < 2e-3


def test_dequantize_vacuum_narrow_smoothing_resolves_atoms():
    # With σ = 0.05 the symbol is a comb of the truncated spectrum's atoms, not
    # the continuous tomogram; its mass and mean are still those of the tomogram.
    X = np.linspace(-8, 8, 3201)
    f = dequantize(fock_density(0, 32), X, [0.6], [0.8], smoothing=0.05).values[0, 0].real
    assert np.trapezoid(f, X) == pytest.approx(1.0, abs=1e-9)
    assert np.trapezoid(X * f, X) == pytest.approx(0.0, abs=1e-9)
    assert np.max(np.abs(f - oracle_tomogram_fock(0, X, (0.6, 0.8)))) > 0.1


def test_quantizer_examples():
    assert np.allclose(quantizer(PhasePoint(0, 0, 0), 4), np.eye(4) / (2 * math.pi))
    assert np.allclose(quantizer(PhasePoint(math.pi, 0, 0), 4), -np.eye(4) / (2 * math.pi))


def test_reconstruct_zero():
    X = np.linspace(-10, 10, 201)
    ax = reconstruction_axis(2, 0.5)
    f = dequantize(np.zeros((4, 4)), X, ax, ax)
    assert np.all(np.asarray(getattr(reconstruct_operator(f), "elements", reconstruct_operator(f))) == 0)


@pytest.mark.slow
def test_reconstruct_vacuum_roundtrip():
    X = np.arange(-80, 80.0001, 0.1)
    ax = reconstruction_axis(10, 0.5)
    rho = fock_density(0, 16)
    f = dequantize(rho, X, ax, ax)
    out = reconstruct_operator(f).elements
    assert np.max(np.abs(out - rho.elements)) < 1e-2


def test_reconstruct_linear():
    X = np.arange(-20, 20.0001, 0.1)
    ax = reconstruction_axis(3, 0.5)
    p0, p1 = fock_density(0, 4).elements, fock_density(1, 4).elements
    f0, f1 = dequantize(p0, X, ax, ax), dequantize(p1, X, ax, ax)
    # linearity holds for any quadrature grid, so the decay precondition is waived here
    both = reconstruct_operator(f0 + f1, decay_tol=np.inf).elements
    parts = reconstruct_operator(f0, decay_tol=np.inf).elements + reconstruct_operator(f1, decay_tol=np.inf).elements
    assert np.max(np.abs(both - parts)) < 1e-12


def test_reconstruct_requires_decay():
    X = np.linspace(-2, 2, 41)  # tomogram is still large at ±2
    ax = reconstruction_axis(2, 0.5)
    with pytest.raises(InsufficientDecayError):
        reconstruct_operator(dequantize(fock_density(0, 4), X, ax, ax))


# --- measures of operators ------------------------------------------------


def test_measure_of_pure_state_monotone(rng):
    X = np.linspace(-10, 10, 401)
    F = measure_from_operator(random_pure(rng, 6, 3), (0.7, 0.4), X).F
    assert np.min(np.diff(F)) > -1e-12
    assert F[-1] == pytest.approx(1.0, abs=1e-9)


def test_measure_of_position_operator_traceless():
    x, _ = ladder_operators(10)
    F = measure_from_operator(x, (1, 0), np.linspace(-30, 30, 61)).F
    assert F[-1] == pytest.approx(0.0, abs=1e-10)


def test_measure_of_non_hermitian_is_complex():
    a = np.zeros((4, 4))
    a[0, 1] = 1.0
    F = measure_from_operator(a, (0.6, 0.8), np.linspace(-5, 5, 101)).F
    assert np.max(np.abs(F.imag)) > 1e-3
    assert abs(F[-1]) < 1e-10  # Tr a = 0


@pytest.mark.parametrize(
    "name, op, dx",
    [
        ("rho0", fock_density(0, 8).elements, 0.002),
        ("rho1", fock_density(1, 8).elements, 0.002),
        ("x", ladder_operators(8)[0].elements, 0.001),
    ],
)
def test_measure_derivative_is_symbol(name, op, dx):
    X = np.arange(-6, 6 + dx / 2, dx)
    for frame in [(1.0, 0.0), (0.6, 0.8)]:
        F = measure_from_operator(op, frame, X).F
        f = dequantize(op, X, [frame[0]], [frame[1]]).values[0, 0].real
        assert np.max(np.abs(np.gradient(F, X) - f)) < 1e-3


def test_reconstruct_from_measures_zero():
    ax = reconstruction_axis(2, 0.5)
    fam = measure_family(np.zeros((3, 3)), ax, ax, np.array([0.0]), smoothing=None)
    out = reconstruct_from_measures(fam)
    assert np.all(np.asarray(getattr(out, "elements", out)) == 0)


@pytest.mark.slow
def test_reconstruct_from_measures_vacuum():
    ax = reconstruction_axis(10, 0.5)
    fam = measure_family(fock_density(0, 16), ax, ax, np.arange(-80, 80.0001, 0.1))
    assert np.max(np.abs(reconstruct_from_measures(fam).elements - fock_density(0, 16).elements)) < 1e-2


def test_reconstruct_from_smoothed_cdf_without_atoms():
    # Integrating the sampled distribution function (piecewise linear) agrees with the exact atoms
    ax = reconstruction_axis(7.5, 0.75)
    X = np.arange(-60, 60.0001, 0.05)
    rho = fock_density(1, 6)
    fam = measure_family(rho, ax, ax, X)
    exact = reconstruct_from_measures(fam, decay_tol=1e-2).elements
    from dataclasses import replace

    sampled = reconstruct_from_measures(replace(fam, atoms=None), decay_tol=1e-2).elements
    assert np.max(np.abs(sampled - exact)) < 5e-4


# --- kernel ---------------------------------------------------------------


def test_kernel_step_saturates_to_trace():
    x1, x2 = PhasePoint(0.3, 0.5, -0.2), PhasePoint(-0.4, 0.1, 0.7)
    K = star_product_kernel(x1, x2, PhasePoint(1e3, 0.6, 0.8), 6, step=True)
    assert K == pytest.approx(np.trace(quantizer(x1, 6) @ quantizer(x2, 6)), abs=1e-12)


def test_kernel_at_origin_counts_eigenvalues():
    o = PhasePoint(0, 0, 0)
    lam = np.linalg.eigvalsh(quadrature_operator(1, 0, 7).elements)
    for X in (-1.3, 0.0, 0.9, 5.0):
        K = star_product_kernel(o, o, PhasePoint(X, 1, 0), 7, step=True)
        assert K == pytest.approx(np.sum(lam <= X) / (4 * math.pi ** 2), abs=1e-14)


def test_kernel_is_derivative_of_step_kernel():
    x1, x2 = PhasePoint(0.3, 0.5, -0.2), PhasePoint(-0.4, 0.1, 0.7)
    lam = np.sort(frame_spectrum(0.6, 0.8, 6)[0])
    a, b = (lam[1] + lam[2]) / 2, (lam[3] + lam[4]) / 2
    Xs = np.linspace(a, b, 801)
    K = [star_product_kernel(x1, x2, PhasePoint(x, 0.6, 0.8), 6, smoothing=0.05) for x in Xs]
    Kt = [star_product_kernel(x1, x2, PhasePoint(x, 0.6, 0.8), 6, step=True) for x in (a, b)]
    assert np.trapezoid(K, Xs) == pytest.approx(Kt[1] - Kt[0], abs=2e-3)


def test_kernel_route_matches_brute_force_loop(rng):
    # Six-fold sum of the step kernel over atoms and frames on a tiny grid,
    # against the factorized evaluation.
    N, M = 3, 8
    ax = np.array([-0.6, 0.6])
    a, b = random_hermitian(rng, N), random_hermitian(rng, N)
    Ma = measure_family(a, ax, ax, [0.0], smoothing=None, work_dim=M)
    Mb = measure_family(b, ax, ax, [0.0], smoothing=None, work_dim=M)
    target = PhasePoint(0.2, 0.7, -0.4)
    w = (0.6 * 0.6)  # each node carries half a cell in each direction
    total = 0j
    for i1, mu1 in enumerate(ax):
        for j1, nu1 in enumerate(ax):
            lam1 = frame_spectrum(mu1, nu1, M)[0]
            for i2, mu2 in enumerate(ax):
                for j2, nu2 in enumerate(ax):
                    lam2 = frame_spectrum(mu2, nu2, M)[0]
                    for k in range(M):
                        for m in range(M):
                            K = star_product_kernel(
                                PhasePoint(lam1[k], mu1, nu1), PhasePoint(lam2[m], mu2, nu2), target, N, step=True, work_dim=M
                            )
                            total += w * w * Ma.atoms[i1, j1, k] * Mb.atoms[i2, j2, m] * K
    fast = star_multiply_measures(Ma, Mb, [target], decay_tol=np.inf)[0]
    assert fast == pytest.approx(total, abs=1e-10)


# --- star product ---------------------------------------------------------


@pytest.mark.parametrize("N", [8, 12])
def test_operator_route_homomorphism(N, rng):
    a, b = random_hermitian(rng, N), random_hermitian(rng, N)
    Ma, Mb = _families(a, b, AX_OP)
    assert np.max(np.abs(star_multiply_operator_route(Ma, Mb, TARGETS) - _direct(a @ b, TARGETS))) < 1e-10


@pytest.mark.parametrize("N", [8, 12])
def test_operator_route_idempotent(N, rng):
    rho = random_pure(rng, N)
    assert np.max(np.abs(_direct(rho @ rho, TARGETS) - _direct(rho, TARGETS))) < 1e-10
    M, _ = _families(rho, rho, AX_OP)
    assert np.max(np.abs(star_multiply_operator_route(M, M, TARGETS) - _direct(rho, TARGETS))) < 1e-10


def test_operator_route_associative(rng):
    a, b, c = (random_hermitian(rng, 8) for _ in range(3))
    Ma, Mb = _families(a, b, AX_OP)
    Mc, _ = _families(c, c, AX_OP)
    A, B, C = (recover_operator(m) for m in (Ma, Mb, Mc))
    assert np.max(np.abs(_direct((A @ B) @ C, TARGETS) - _direct(A @ (B @ C), TARGETS))) < 1e-10
    assert np.max(np.abs(_direct((A @ B) @ C, TARGETS) - _direct(a @ b @ c, TARGETS))) < 1e-10


def test_recover_operator_exact(rng):
    a = random_hermitian(rng, 10)
    M, _ = _families(a, a, AX_OP)
    assert np.max(np.abs(recover_operator(M) - a)) < 1e-12


def test_kernel_route_against_operator_route():
    N = 12
    a = density_from_wavefunction(coherent_coefficients(0.5, N), N).elements
    v = np.zeros(N, complex)
    v[:2] = 2 ** -0.5
    b = np.outer(v, v.conj())
    Ma, Mb = _families(a, b, AX_KERNEL)
    kernel = star_multiply_measures(Ma, Mb, TARGETS[:3])
    exact = _direct(a @ b, TARGETS[:3])
    assert np.all(np.abs(kernel - exact) <= 0.05 * np.abs(exact))
    # pure-state idempotency through the kernel
    Mr, _ = _families(a, a, AX_KERNEL)
    kernel = star_multiply_measures(Mr, Mr, TARGETS[:3])
    assert np.all(np.abs(kernel - _direct(a, TARGETS[:3])) <= 0.05 * np.abs(_direct(a, TARGETS[:3])))


def test_zero_operator_gives_zero_measure():
    N = 6
    rho = fock_density(0, N).elements
    Ma, Mz = _families(rho, np.zeros((N, N)), AX_OP)
    assert np.all(star_multiply_operator_route(Ma, Mz, TARGETS) == 0)
    Mk, Mzk = _families(rho, np.zeros((N, N)), AX_KERNEL)
    assert np.all(star_multiply_measures(Mk, Mzk, TARGETS) == 0)


def test_budget_limits():
    rho = fock_density(0, 4).elements
    Ma, _ = _families(rho, rho, AX_OP)
    with pytest.raises(BudgetExceededError):
        star_multiply_measures(Ma, Ma, [TARGETS[0]] * (MAX_TARGETS + 1))
    big = reconstruction_axis(11, 1.0)  # 22 x 22 frames
    Mb, _ = _families(rho, rho, big)
    with pytest.raises(BudgetExceededError):
        star_multiply_measures(Mb, Mb, TARGETS[:1])
    Mc, _ = _families(rho, rho, reconstruction_axis(2, 0.5))
    with pytest.raises(InputError):
        star_multiply_measures(Ma, Mc, TARGETS[:1])


def test_kernel_route_requires_decay():
    rho = fock_density(0, 4).elements
    Ma, _ = _families(rho, rho, reconstruction_axis(1, 0.5))
    with pytest.raises(InsufficientDecayError):
        star_multiply_measures(Ma, Ma, TARGETS[:1])


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000))
def test_operator_route_bilinear(N, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_hermitian(rng, N) for _ in range(3))
    Ma, Mb = _families(a, b, AX_OP)
    Mc, _ = _families(c, c, AX_OP)
    Mbc = measure_family(b + c, AX_OP, AX_OP, [0.0], smoothing=None)
    lhs = star_multiply_operator_route(Ma, Mbc, TARGETS)
    rhs = star_multiply_operator_route(Ma, Mb, TARGETS) + star_multiply_operator_route(Ma, Mc, TARGETS)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10_000), st.floats(-2, 2), st.floats(0.2, 2), st.floats(-math.pi, math.pi))
def test_quantizer_unitary_up_to_scale(N, seed, X, r, phi):
    D = quantizer(PhasePoint(X, r * math.cos(phi), r * math.sin(phi)), N) * 2 * math.pi
    assert np.allclose(D @ D.conj().T, np.eye(N), atol=1e-10)
    A = quadrature_operator(r * math.cos(phi), r * math.sin(phi), N).elements
    assert np.allclose(D, np.exp(1j * X) * expm(-1j * A), atol=1e-12)
