"""Python bindings for the hoiplan C++ library."""

from ._core import (
    HoiplanError,
    astar,
    check_layout,
    default_weights,
    dependency_order,
    energy_reward,
    extract_sections,
    geodesic_angle,
    hand_alpha,
    parse_relations,
    plan,
    postprocess,
    render_prompt,
    render_relations,
    rot6d_decode,
    rot6d_encode,
    score,
    segment_hand,
    solve_layout,
)

__all__ = [
    "HoiplanError",
    "astar",
    "check_layout",
    "default_weights",
    "dependency_order",
    "energy_reward",
    "extract_sections",
    "geodesic_angle",
    "hand_alpha",
    "parse_relations",
    "plan",
    "postprocess",
    "render_prompt",
    "render_relations",
    "rot6d_decode",
    "rot6d_encode",
    "score",
    "segment_hand",
    "solve_layout",
]
