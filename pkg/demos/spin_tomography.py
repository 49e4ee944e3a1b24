"""Spin tomograms, their atomic measures and reconstruction."""
import numpy as np

from tomoprob.spin import (
    EulerAngles,
    random_spin_state,
    reconstruct_spin_density,
    spin_atoms,
    spin_basis_state,
    spin_measure_relation,
    spin_tomogram,
)

up = spin_basis_state(0.5, 0)
for theta in (0.0, np.pi / 3, np.pi / 2, np.pi):
    cdf, _ = spin_measure_relation(up, EulerAngles(0.0, 0.0, theta))
    atoms = ", ".join(f"P({m:+.1f}) = {p:.4f}" for m, p in spin_atoms(cdf))
    print(f"spin-1/2 up, theta = {theta:.3f}: {atoms}")

rng = np.random.default_rng(1)
rho = random_spin_state(1.0, rng)
angles = [EulerAngles(*rng.uniform([-np.pi, -np.pi, 0], [np.pi, np.pi, np.pi])) for _ in range(12)]
est = reconstruct_spin_density([spin_tomogram(rho, a) for a in angles])
print(f"spin-1 reconstruction from 12 random directions: max error {np.max(np.abs(est.elements - rho.elements)):.2e}")
