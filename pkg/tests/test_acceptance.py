"""Acceptance criteria, one test (and one printed PASS/FAIL line) each.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``;
the lines are also collected into the pytest terminal summary.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES, random_hermitian, random_pure  # noqa: E402

from tomoprob.ctomo import (  # noqa: E402
    Tomogram,
    oracle_tomogram_coherent,
    oracle_tomogram_fock,
    reconstruction_axis,
    tomogram_family,
    tomogram_family_from_wigner,
    tomogram_from_density,
    tomogram_from_fock,
    tomogram_from_wavefunction,
    tomogram_from_wigner,
    wigner_from_density,
    wigner_from_tomogram,
)
from tomoprob.evolution import (  # noqa: E402
    FREE,
    HARMONIC,
    QuadraticPotential,
    TomogramTrajectory,
    characteristics_propagator,
    pde_residual,
    pulled_back_frame,
    quadratic_hamiltonian,
    von_neumann_oracle,
)
from tomoprob.measures import cdf_from_tomogram, derivative_is_tomogram, oracle_cdf_fock, quadrature_measure  # noqa: E402
from tomoprob.spin import (  # noqa: E402
    EulerAngles,
    random_spin_state,
    reconstruct_spin_density,
    spin_atoms,
    spin_basis_state,
    spin_measure_relation,
    spin_tomogram,
)
from tomoprob.starprod import (  # noqa: E402
    PhasePoint,
    dequantize,
    measure_family,
    measure_from_operator,
    reconstruct_operator,
    star_multiply_measures,
    star_multiply_operator_route,
)
from tomoprob.states import (  # noqa: E402
    PositionGrid,
    coherent_coefficients,
    coherent_wavefunction,
    density_from_wavefunction,
    fock_density,
    fock_wavefunction,
    kernel_from_wavefunction,
)

FRAMES = [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8), (2.0, 1.0)]
GRID = PositionGrid(-10.0, 10.0, 1001)


def report(label, checks, runtime=None, limit=None):
    """Record one line; ``checks`` is a list of (name, measured, tolerance)."""
    ok = all(m <= tol for _, m, tol in checks)
    parts = [f"{name} {m:.2e} (tol {tol:.0e})" for name, m, tol in checks]
    if limit is not None:
        ok = ok and runtime < limit
        parts.append(f"runtime {runtime:.1f}s (limit {limit:g}s)")
    line = f"{'PASS' if ok else 'FAIL'}  criterion {label}: " + "; ".join(parts)
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def sup(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def test_01_fock_oracle():
    t0 = time.perf_counter()
    X = np.linspace(-8, 8, 321)
    err = 0.0
    for n in range(6):
        psi = fock_wavefunction(n, GRID)
        for f in FRAMES:
            err = max(err, sup(tomogram_from_wavefunction(psi, f, X).values, oracle_tomogram_fock(n, X, f)))
    assert report("1 (Fock tomogram vs closed form)", [("sup-norm", err, 1e-6)], time.perf_counter() - t0, 10)


def test_02_coherent_oracle():
    t0 = time.perf_counter()
    X = np.linspace(-8, 8, 321)
    errs = {"wavefunction": 0.0, "density": 0.0, "wigner": 0.0}
    for alpha in (0, 1, 1j, 1 + 1j):
        psi = coherent_wavefunction(alpha, GRID)
        kernel = kernel_from_wavefunction(psi)
        W = wigner_from_density(kernel)
        for f in FRAMES:
            exact = oracle_tomogram_coherent(alpha, X, f)
            errs["wavefunction"] = max(errs["wavefunction"], sup(tomogram_from_wavefunction(psi, f, X).values, exact))
            errs["density"] = max(errs["density"], sup(tomogram_from_density(kernel, f, X).values, exact))
            errs["wigner"] = max(errs["wigner"], sup(tomogram_from_wigner(W, f, X).values, exact))
    checks = [(f"{k} route", v, 1e-4) for k, v in errs.items()]
    assert report("2 (coherent tomogram, three routes)", checks, time.perf_counter() - t0, 30)


def _qt1_states():
    return {"vacuum": fock_wavefunction(0, GRID), "n=1": fock_wavefunction(1, GRID), "coherent 1": coherent_wavefunction(1, GRID)}


def test_03a_derivative_of_cdf_is_tomogram():
    X = np.linspace(-12, 12, 12001)
    err = 0.0
    for psi in _qt1_states().values():
        for f in FRAMES + [(0.8, -0.6)]:
            t = tomogram_from_wavefunction(psi, f, X)
            err = max(err, sup(derivative_is_tomogram(cdf_from_tomogram(t)).values, t.values))
    assert report("3a (d/dX of the tomogram CDF is the tomogram)", [("sup-norm", err, 1e-5)])


@pytest.mark.xfail(
    strict=True,
    reason="the N=32 truncated quadrature has a discrete spectrum; its CDF is a staircase with steps near 0.1 "
    "and cannot approach a continuous CDF to 1e-3 in sup-norm (see the decisions ledger)",
)
def test_03b_truncated_operator_cdf_matches_tomogram_cdf():
    X = np.linspace(-12, 12, 4801)
    states = {
        "vacuum": fock_density(0, 32),
        "n=1": fock_density(1, 32),
        "coherent 1": density_from_wavefunction(coherent_coefficients(1, 32), 32),
    }
    waves = _qt1_states()
    checks = []
    for name, rho in states.items():
        err = 0.0
        for f in FRAMES:
            op = quadrature_measure(rho, f, X)
            tomo = cdf_from_tomogram(tomogram_from_wavefunction(waves[name], f, X))
            err = max(err, sup(op.F, tomo.F))
        checks.append((f"{name} sup-norm", err, 1e-3))
    assert report("3b (N=32 operator CDF vs tomogram CDF)", checks)


def test_04_vacuum_measure():
    X = np.linspace(-8, 8, 8001)
    psi = fock_wavefunction(0, GRID)
    err = 0.0
    for f in FRAMES:
        cdf = cdf_from_tomogram(tomogram_from_wavefunction(psi, f, X))
        err = max(err, sup(cdf.F, 0.5 * (1 + erf(X / math.hypot(*f)))))
    # moments of the measure through its density, the tomogram
    w = tomogram_from_wavefunction(psi, (1, 0), X).values
    mean = float(np.trapezoid(X * w, X))
    var = float(np.trapezoid((X - mean) ** 2 * w, X))
    checks = [("CDF sup-norm", err, 1e-6), ("|mean|", abs(mean), 1e-6), ("|var - 1/2|", abs(var - 0.5), 1e-6)]
    assert report("4 (vacuum measure)", checks)


def test_05_generating_function_oracle():
    Xs = np.linspace(-5, 5, 50)
    err = 0.0
    for n in range(6):
        for f in [(1.0, 0.0), (0.6, 0.8), (2.0, 1.0)]:
            s = math.hypot(*f)
            ref = [quad(lambda y: oracle_tomogram_fock(n, [y], f)[0], -np.inf, x * s, epsabs=1e-14, limit=200)[0] for x in Xs]
            err = max(err, sup(oracle_cdf_fock(n, Xs * s, f), ref))
    assert report("5 (generating-function CDF vs quadrature)", [("sup-norm", err, 1e-8)])


def test_06_spin_bernoulli():
    up = spin_basis_state(0.5, 0)
    err = 0.0
    for theta in (0.0, 0.7, math.pi / 2, math.pi):
        cdf, _ = spin_measure_relation(up, EulerAngles(0.0, 0.0, theta))
        atoms = dict(spin_atoms(cdf))
        err = max(err, abs(atoms[-0.5] - math.cos(theta / 2) ** 2), abs(atoms[0.5] - math.sin(theta / 2) ** 2))
    rng = np.random.default_rng(6)
    rel = 0.0
    for j in (0.5, 1.0, 1.5):
        for _ in range(20):
            rho = random_spin_state(j, rng)
            angles = EulerAngles(*rng.uniform([-np.pi, -np.pi, 0], [np.pi, np.pi, np.pi]))
            cdf, tomo = spin_measure_relation(rho, angles, tol=1e-12)
            rel = max(rel, max(abs(cdf.measure([(m - 1, m)]) - p) for m, p in zip(tomo.m, tomo.probs)))
    assert report("6 (spin Bernoulli and measure relation)", [("Bernoulli atoms", err, 1e-12), ("relation", rel, 1e-12)])


def test_07_spin_reconstruction():
    rng = np.random.default_rng(7)
    err = 0.0
    for j in (0.5, 1.0):
        for _ in range(10):
            rho = random_spin_state(j, rng)
            angles = [EulerAngles(*rng.uniform([-np.pi, -np.pi, 0], [np.pi, np.pi, np.pi])) for _ in range(12)]
            est = reconstruct_spin_density([spin_tomogram(rho, a) for a in angles])
            err = max(err, sup(est.elements, rho.elements))
    assert report("7 (spin reconstruction roundtrip)", [("max entry", err, 1e-8)])


def test_08_wigner_roundtrip():
    t0 = time.perf_counter()
    ax = reconstruction_axis(7, 0.5)
    X = np.arange(-60, 60.0001, 0.1)
    checks, origin = [], None
    for name, psi in _qt1_states().items():
        W = wigner_from_density(kernel_from_wavefunction(psi))
        R = wigner_from_tomogram(tomogram_family_from_wigner(W, ax, ax, X), W.q, W.p)
        # the (mu, nu) step of 0.5 makes the reconstruction 4π-periodic; compare on the alias-free window
        win = (np.abs(W.q) <= 6)[:, None] & (np.abs(W.p) <= 6)[None, :]
        checks.append((f"{name} sup-norm", float(np.max(np.abs(R.values - W.values)[win])), 1e-3))
        if name == "n=1":
            origin = R.at(0, 0)
    ok = origin < 0
    checks.append(("n=1 W(0,0) (must be < 0)", 0.0 if ok else 1.0, 0.0))
    assert report(f"8 (Wigner roundtrip; n=1 W(0,0) = {origin:.4f})", checks, time.perf_counter() - t0, 120)


def test_09_star_product():
    rng = np.random.default_rng(9)
    targets = [PhasePoint(0.3, 1.0, 0.2), PhasePoint(-0.5, 0.4, 0.9), PhasePoint(1.0, -0.7, 0.5), PhasePoint(0.0, 1.0, 0.0)]

    def direct(op):
        return np.array([measure_from_operator(op, (t.mu, t.nu), [t.X], smoothing=None).F[0] for t in targets])

    def fams(a, b, ax):
        return (measure_family(a, ax, ax, [0.0], smoothing=None), measure_family(b, ax, ax, [0.0], smoothing=None))

    ax_op = reconstruction_axis(1.5, 0.5)
    hom = idem = 0.0
    for N in (8, 12):
        a, b = random_hermitian(rng, N), random_hermitian(rng, N)
        hom = max(hom, sup(star_multiply_operator_route(*fams(a, b, ax_op), targets), direct(a @ b)))
        rho = random_pure(rng, N)
        idem = max(idem, sup(direct(rho @ rho), direct(rho)), sup(star_multiply_operator_route(*fams(rho, rho, ax_op), targets), direct(rho)))

    t0 = time.perf_counter()
    N = 12
    a = density_from_wavefunction(coherent_coefficients(0.5, N), N).elements
    v = np.zeros(N, complex)
    v[:2] = 2 ** -0.5
    b = np.outer(v, v.conj())
    ax_k = reconstruction_axis(7.5, 0.75)
    kernel = star_multiply_measures(*fams(a, b, ax_k), targets[:3])
    exact = direct(a @ b)[:3]
    rel = float(np.max(np.abs(kernel - exact) / np.abs(exact)))
    kernel_time = time.perf_counter() - t0

    Xr = np.arange(-80, 80.0001, 0.1)
    axr = reconstruction_axis(10, 0.5)
    rho0 = fock_density(0, 16).elements
    rt = sup(reconstruct_operator(dequantize(rho0, Xr, axr, axr)).elements, rho0)
    checks = [
        ("operator-route homomorphism", hom, 1e-10),
        ("idempotency", idem, 1e-10),
        ("kernel route, relative (3 points)", rel, 5e-2),
        ("quantizer/dequantizer roundtrip N=16", rt, 1e-2),
    ]
    assert report("9 (star product)", checks, kernel_time, 300)


def test_10_evolution():
    X = np.arange(-14, 14.0001, 0.05)
    ax = reconstruction_axis(5, 0.1)
    w0 = tomogram_family(lambda f, x: Tomogram(f, x, oracle_tomogram_coherent(1.0, x, f)), ax, ax, X)
    route = 0.0
    for V, dim in ((FREE, 100), (HARMONIC, 40)):
        rho0 = density_from_wavefunction(coherent_coefficients(1.0, dim), dim)
        H = quadratic_hamiltonian(V, dim)
        for t in (0.3, 1.0, math.pi):
            rho = von_neumann_oracle(rho0, H, t)
            for m, n in FRAMES[:3] + [(1.0, 1.0)]:
                a = characteristics_propagator(w0, V, t, [m], [n]).values[0, 0]
                route = max(route, sup(a, tomogram_from_fock(rho, (m, n), X).values))
    period = sup(characteristics_propagator(w0, HARMONIC, 2 * math.pi).values, w0.values)

    def exact(h, t_max=0.32):
        n = int(round(t_max / h)) + 1
        times, mu, nu, Xs = h * np.arange(n), 0.8 + h * np.arange(n), 0.3 + h * np.arange(n), np.arange(-8, 8, h)
        vals = np.empty((n, n, n, Xs.size))
        for a_, t in enumerate(times):
            for i, m in enumerate(mu):
                for j, v in enumerate(nu):
                    mp, vp, c = pulled_back_frame(m, v, HARMONIC, t)
                    vals[a_, i, j] = oracle_tomogram_coherent(1.0, Xs - c, (float(mp), float(vp)))
        return TomogramTrajectory(times, mu, nu, Xs, vals)

    r_coarse, r_fine = pde_residual(exact(0.04), HARMONIC), pde_residual(exact(0.02), HARMONIC)
    order = math.log2(r_coarse / r_fine)
    checks = [
        ("route equivalence", route, 1e-3),
        ("period-2π return", period, 1e-6),
        (f"residual order {order:.2f} (shortfall below 1.8)", max(0.0, 1.8 - order), 0.0),
    ]
    assert report("10 (evolution)", checks)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
