"""Modelling and differential-evolution synthesis of super-directive
linear dipole arrays."""

__version__ = "0.1.0"

from .emcore import (ArrayDesign, Dipole, Excitation, PhysicalConstants,
                     CONSTANTS, directivity, gain, radiation_intensity)
from .impedance import ImpedanceMatrix, impedance_matrix
from .network import realized_gain, total_efficiency
from .optimizer import DEConfig, de_optimize, optimize_array, sweep_max_elements
from .experiments import evaluate_paper_design, compare_configs, paper_design
