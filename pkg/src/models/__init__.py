from src.models.diffusion import (
    BoundaryBehavior, DiffusionSpec, EndpointClass, NEG_INF, POS_INF, classify_endpoint, potential,
    scale_density, scale_function, scale_limit, spec_from_json, spec_to_json, speed_density,
    speed_mass, validate_boundaries,
)
from src.models.functions import RealFunction, from_expression
from src.models.zoo import (
    ZooModel, bessel, brownian_drift, endpoint_class, identify_zoo, riccati_at_zero, zoo_parameters,
    zoo_phi0, zoo_riccati, zoo_taylor_coefficients,
)
