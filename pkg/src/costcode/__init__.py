"""Variable-length lossless coding with unequal codeword-symbol costs.

Library surface: cost models and their capacity, i.i.d./mixed sources,
information-spectrum tail curves, certified cost-aware prefix codes, overflow
probabilities, and first/second-order overflow thresholds.
"""

from .analysis import (
    AnalysisError,
    CostCertificate,
    FixedLengthCode,
    LemmaBounds,
    ThresholdResult,
    first_order_threshold,
    fl_to_vl,
    lemma_bounds,
    second_order_threshold,
    vl_to_fl,
)
from .codec import (
    CodecError,
    OverflowQuery,
    OverflowResult,
    PrecisionExhausted,
    PrefixCode,
    build_exact_code,
    decode,
    encode,
    kraft_sum,
    overflow,
    random_prefix_code,
)
from .cost_model import (
    ConditionalCapacityError,
    CostCapacity,
    CostModel,
    CostModelError,
    cost_model_from_dict,
    load_cost_model,
    solve_cost_capacity,
    symbol_measure,
    validate_conditional_model,
)
from .sources import (
    IIDSource,
    MixedSource,
    SequenceDist,
    SourceError,
    entropy,
    enumerate_support,
    load_source,
    log_prob,
    sample_self_info,
    source_from_dict,
    varentropy,
)
from .spectrum import (
    DiagnosticReport,
    SpectrumCurve,
    SpectrumError,
    SpectrumQuery,
    first_order_spectrum,
    gaussian_cdf,
    gaussian_quantile,
    second_order_spectrum,
    strong_converse_diagnostic,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "ConditionalCapacityError",
    "CostCapacity",
    "CostCertificate",
    "CostModel",
    "CostModelError",
    "CodecError",
    "DiagnosticReport",
    "FixedLengthCode",
    "IIDSource",
    "LemmaBounds",
    "MixedSource",
    "OverflowQuery",
    "OverflowResult",
    "PrecisionExhausted",
    "PrefixCode",
    "SequenceDist",
    "SourceError",
    "SpectrumCurve",
    "SpectrumError",
    "SpectrumQuery",
    "ThresholdResult",
    "build_exact_code",
    "cost_model_from_dict",
    "decode",
    "encode",
    "entropy",
    "enumerate_support",
    "first_order_spectrum",
    "first_order_threshold",
    "fl_to_vl",
    "gaussian_cdf",
    "gaussian_quantile",
    "kraft_sum",
    "lemma_bounds",
    "load_cost_model",
    "load_source",
    "log_prob",
    "overflow",
    "random_prefix_code",
    "sample_self_info",
    "second_order_spectrum",
    "second_order_threshold",
    "solve_cost_capacity",
    "source_from_dict",
    "strong_converse_diagnostic",
    "symbol_measure",
    "validate_conditional_model",
    "varentropy",
    "vl_to_fl",
]
