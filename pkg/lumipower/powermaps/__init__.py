from .cells import CellGrid, CellLossTable, integrate_cells, row_label
from .export import encode_png, export_map, read_map_csv, upsample_nearest, write_map_csv
from .localization import count_defective_cells, localization_score
