from .benchmark import (FLOP_CONVENTION, benchmark_model, count_flops,
                        count_macs, count_params, measure_fps,
                        render_table_json, render_table_markdown)
from .tiling import image_to_tensor, predict_full, predict_tiled, tile_starts
from .visualize import render_change_map, save_change_map

__all__ = [
    "FLOP_CONVENTION", "benchmark_model", "count_flops", "count_macs",
    "count_params", "measure_fps", "render_table_json",
    "render_table_markdown", "image_to_tensor", "predict_full",
    "predict_tiled", "tile_starts", "render_change_map", "save_change_map",
]
