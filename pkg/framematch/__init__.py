"""
帧匹配模块
"""
from .metrics import (
    block_flow,
    block_means,
    center_of_mass,
    composite_similarity,
    edge_map,
    sim_flow,
    sim_geo,
    sim_pos,
    ssim,
    to_gray,
)
from .tracker import tracker_update

__all__ = [
    "block_flow",
    "block_means",
    "center_of_mass",
    "composite_similarity",
    "edge_map",
    "sim_flow",
    "sim_geo",
    "sim_pos",
    "ssim",
    "to_gray",
    "tracker_update",
]
