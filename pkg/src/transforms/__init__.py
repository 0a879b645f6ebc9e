from src.transforms.ciesielski_taylor import ct_pair
from src.transforms.maps import (
    H_TRANSFORM, KREIN_DUAL, T_H, TransformRecord, check_grid, expansion_chain, h_transform, krein_dual,
    riccati_map, t_h,
)
from src.transforms.table import expected_images, image_table_rows
