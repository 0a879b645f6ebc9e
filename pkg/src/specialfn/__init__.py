from src.specialfn.bessel import (
    bessel_i, bessel_i_scaled, bessel_j, bessel_j_zero, bessel_k, bessel_k_scaled, bessel_y,
)
from src.specialfn.contracts import AccuracyContract, CONTRACTS
from src.specialfn.gamma import erf, gamma_fn, reg_inc_gamma_lower
