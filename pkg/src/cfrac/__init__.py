from src.cfrac.evaluate import coefficient_source, constant_source, eval_cf_adaptive, eval_cf_fixed
from src.cfrac.fractions import (
    CFCoefficients, KreinString, SFraction, branch_sign, convergent_series, series_to_u,
    sfraction_to_u, string_of, u_to_sfraction,
)
from src.cfrac.series import PowerSeries
