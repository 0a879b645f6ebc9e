from src.sim.hierarchy import (
    SDEConfig, fokker_planck_residual, gamma_law, gig_cdf_quadrature, gig_law, gig_normalization,
    gig_reciprocal_mean, sample_random_cfrac, simulate_U, simulate_hierarchy,
)
from src.sim.paths import (
    ABSORB, REFLECT_FOLD, PathConfig, escape_level, hitting_time, laplace_closed_form, laplace_estimate,
    occupation_below, return_probability,
)
from src.sim.pool import SamplePool, config_hash, histogram_export
from src.sim.rng import block_rng, block_slices, generator_id, map_blocks
from src.sim.stats import correlation, ecdf, ks_one_sample, ks_two_sample, standard_error
