"""Star product of measure symbols and tomogram transport under a quadratic Hamiltonian."""
import numpy as np

from tomoprob.ctomo import Tomogram, oracle_tomogram_coherent, reconstruction_axis, tomogram_family, tomogram_from_fock
from tomoprob.evolution import HARMONIC, characteristics_propagator, quadratic_hamiltonian, von_neumann_oracle
from tomoprob.starprod import PhasePoint, measure_family, measure_from_operator, star_multiply_operator_route
from tomoprob.states import coherent_coefficients, density_from_wavefunction

rng = np.random.default_rng(3)
N = 8
a = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
a = a + a.conj().T
b = np.diag(np.arange(N, dtype=float))
ax = reconstruction_axis(1.5, 0.5)
targets = [PhasePoint(0.3, 1.0, 0.2), PhasePoint(-0.5, 0.4, 0.9)]
fa = measure_family(a, ax, ax, [0.0], smoothing=None)
fb = measure_family(b, ax, ax, [0.0], smoothing=None)
star = star_multiply_operator_route(fa, fb, targets)
direct = [measure_from_operator(a @ b, (t.mu, t.nu), [t.X], smoothing=None).F[0] for t in targets]
print("symbol of a*b vs symbol of the operator product:")
for t, s, d in zip(targets, star, direct):
    print(f"  X={t.X:+.1f} mu={t.mu:+.1f} nu={t.nu:+.1f}: {complex(s):.6f}  {complex(d):.6f}")

X = np.arange(-10, 10.0001, 0.05)
ax = reconstruction_axis(3, 0.1)
w0 = tomogram_family(lambda f, x: Tomogram(f, x, oracle_tomogram_coherent(1.0, x, f)), ax, ax, X)
rho0 = density_from_wavefunction(coherent_coefficients(1.0, 40), 40)
H = quadratic_hamiltonian(HARMONIC, 40)
for t in (0.5, np.pi / 2, np.pi):
    moved = characteristics_propagator(w0, HARMONIC, t, [1.0], [0.0]).values[0, 0]
    ref = tomogram_from_fock(von_neumann_oracle(rho0, H, t), (1.0, 0.0), X).values
    print(f"oscillator, t = {t:.3f}: mean position {np.trapezoid(X * moved, X):+.4f}, "
          f"distance to von Neumann {np.max(np.abs(moved - ref)):.1e}")
