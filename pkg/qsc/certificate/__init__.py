from qsc.certificate.instance import (
    CertificateInstance,
    instantiate,
    parse_certificate,
    trivial_instance,
)
from qsc.certificate.templates import (
    ExponentialAtom,
    InvariantPiece,
    InvariantSpec,
    PieceKind,
    TemplateOptions,
    TemplateSet,
    ValueTemplate,
    apply_sink_heuristics,
    build_templates,
)

__all__ = [
    "CertificateInstance",
    "ExponentialAtom",
    "InvariantPiece",
    "InvariantSpec",
    "PieceKind",
    "TemplateOptions",
    "TemplateSet",
    "ValueTemplate",
    "apply_sink_heuristics",
    "build_templates",
    "instantiate",
    "parse_certificate",
    "trivial_instance",
]
