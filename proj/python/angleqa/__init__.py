"""Multi-angle question answering: slot encoding, metrics, sampling and a toy backend."""

from ._angleqa import (
    AngleError,
    ToyBackend,
    encode_input,
    encode_output,
    exact_match,
    mc_select,
    normalize_answer,
    parse_angle,
    parse_input,
    parse_output,
    rank_candidates,
    risk_coverage,
    rouge_l,
    sample_pairs,
    slots,
    token_f1,
)

__all__ = [
    "AngleError",
    "ToyBackend",
    "encode_input",
    "encode_output",
    "exact_match",
    "mc_select",
    "normalize_answer",
    "parse_angle",
    "parse_input",
    "parse_output",
    "rank_candidates",
    "risk_coverage",
    "rouge_l",
    "sample_pairs",
    "slots",
    "token_f1",
]
