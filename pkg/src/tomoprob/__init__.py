"""Tomographic probability densities and quantum probability measures.

Modules: ``states`` (states and operators), ``ctomo`` (symplectic tomograms
and Wigner functions), ``measures`` (distribution functions of quantum
measures), ``spin`` (spin tomograms), ``starprod`` (dequantizer/quantizer and
the star product of measures), ``evolution`` (quadratic Hamiltonians), and
``cli``.
"""
from .exceptions import InputError, NumericalContractError, TomoprobError
from .states import FockDensityMatrix, Observable, PositionGrid, SymplecticFrame, Wavefunction

__version__ = "0.1.0"

__all__ = [
    "FockDensityMatrix",
    "InputError",
    "NumericalContractError",
    "Observable",
    "PositionGrid",
    "SymplecticFrame",
    "TomoprobError",
    "Wavefunction",
]
