from qsc.product.modes import (
    Mode,
    ModeTable,
    SinkKind,
    analyze_sinks,
    classify_modes,
)
from qsc.product.product import ProductModel, RefinedCommand, compose

__all__ = [
    "Mode",
    "ModeTable",
    "ProductModel",
    "RefinedCommand",
    "SinkKind",
    "analyze_sinks",
    "classify_modes",
    "compose",
]
