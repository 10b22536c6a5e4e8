"""Arrangements of lines built from order types, with point location."""

from .dcel import ArrangementDCEL, build_dcel_from_order_type
from .levels import LevelsPL, LineRealization, Location, brute_force_sign_vector, levels_build, levels_query
from .ordertype import OrderTypeLines, build_order_type_direct

__all__ = [
    "ArrangementDCEL",
    "LevelsPL",
    "LineRealization",
    "Location",
    "OrderTypeLines",
    "brute_force_sign_vector",
    "build_dcel_from_order_type",
    "build_order_type_direct",
    "levels_build",
    "levels_query",
]
