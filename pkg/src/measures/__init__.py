from src.measures.levy import (
    LevyMeasure, excursion_mean_duration, levy_from_spectral, mean_duration_from_coefficients,
    mean_local_time, moment_n,
)
from src.measures.quadrature import AtomLaw, PowerLaw, fit_atom_law, fit_power_law, integrate_samples
from src.measures.spectral import (
    PerronDiagnostics, SpectralMeasure, atom_at_zero, laplace_exponent, locate_atoms, spectral_measure,
    stieltjes_perron_invert, zoo_evaluator,
)
