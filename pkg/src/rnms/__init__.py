"""Random noble means substitutions: words, entropy, frequencies, windows and diffraction."""

__version__ = "0.1.0"

from .algebra import FourierModulePoint, QuadInt, frac_turns, lambda_conjugate, lambda_power, lambda_value, star
from .diffraction import (
    amplitude_det,
    density_det,
    monte_carlo_moments,
    moment_recursion,
    phi,
    phi_partial,
    pp_intensity,
    psi,
    spectrum_scan,
)
from .entropy import entropy_empirical, entropy_series
from .geometry import PointSet, Window, deterministic_window, model_set, realize, superwindow, window_check
from .induced import induced_matrix, pf_frequencies
from .words import ProbVector, TwoSidedPatch, apply_random, exact_words, iterate_seed_patch, legal_words
