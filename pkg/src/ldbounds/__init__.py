"""Tools for studying how small a model can answer database queries.

Subpackages by theme: `data` (datasets and samplers), `queryfn` (rank,
cardinality and range-sum query functions), `norms` (distances between
query functions), `bounds` (storage lower/upper bound formulas and their
inversion), `constructions` (packing families, the cover codec and the
pigeonhole argument), `models` (small trainable predictors), `harness`
(the measurement grid) and `cli` (command-line front end).
"""

from .bounds import (
    LOWER,
    NORM_INF,
    NORM_L1,
    NORM_MU,
    UPPER,
    BoundRequest,
    BoundResult,
    EpsStarResult,
    covering_count_log2,
    eps_star,
    lower_bound_bits,
    upper_bound_bits,
)
from .constructions import (
    CoverCode,
    PackingFamily,
    PigeonholeWitness,
    SeparationCertificate,
    certify,
    cover_decode,
    cover_encode,
    cover_error_bound,
    packing_l1_ce,
    packing_l1_index,
    packing_linf,
    packing_mu_index,
    pigeonhole_witness,
    read_cover,
    write_cover,
)
from .data import (
    Dataset,
    GmmParams,
    GridSpec,
    empty_dataset,
    load_csv,
    make_dataset,
    quantize,
    sample_gmm,
    sample_uniform,
    save_csv,
    sort_dataset_1d,
)
from .errors import LdboundsError, RuntimeFailure, ValidationError
from .harness import (
    DistSpec,
    ExperimentConfig,
    ExperimentRun,
    ModelTemplate,
    ResultRow,
    emit_csv,
    emit_plot_data,
    parse_config,
    run_experiment,
)
from .models import (
    ModelSpec,
    TrainConfig,
    TrainedModel,
    grad_check,
    init_model,
    load_model,
    model_bits,
    nn_s1,
    nn_s2,
    param_count,
    predict,
    save_model,
    train,
)
from .norms import (
    DistanceEstimate,
    EvalConfig,
    card1d_l1,
    card1d_linf,
    mc_l1,
    mc_mu,
    model_error,
    rank_l1,
    rank_linf,
    rank_mu,
)
from .queryfn import OpKind, RangeQuery, RankQuery, cardinality, range_sum, rank

__version__ = "0.1.0"

__all__ = [
    "LOWER",
    "NORM_INF",
    "NORM_L1",
    "NORM_MU",
    "UPPER",
    "BoundRequest",
    "BoundResult",
    "CoverCode",
    "Dataset",
    "DistSpec",
    "DistanceEstimate",
    "EpsStarResult",
    "EvalConfig",
    "ExperimentConfig",
    "ExperimentRun",
    "GmmParams",
    "GridSpec",
    "LdboundsError",
    "ModelSpec",
    "ModelTemplate",
    "OpKind",
    "PackingFamily",
    "PigeonholeWitness",
    "RangeQuery",
    "RankQuery",
    "ResultRow",
    "RuntimeFailure",
    "SeparationCertificate",
    "TrainConfig",
    "TrainedModel",
    "ValidationError",
    "card1d_l1",
    "card1d_linf",
    "cardinality",
    "certify",
    "cover_decode",
    "cover_encode",
    "cover_error_bound",
    "covering_count_log2",
    "emit_csv",
    "emit_plot_data",
    "empty_dataset",
    "eps_star",
    "grad_check",
    "init_model",
    "load_csv",
    "load_model",
    "lower_bound_bits",
    "make_dataset",
    "mc_l1",
    "mc_mu",
    "model_bits",
    "model_error",
    "nn_s1",
    "nn_s2",
    "packing_l1_ce",
    "packing_l1_index",
    "packing_linf",
    "packing_mu_index",
    "param_count",
    "parse_config",
    "pigeonhole_witness",
    "predict",
    "quantize",
    "range_sum",
    "rank",
    "rank_l1",
    "rank_linf",
    "rank_mu",
    "read_cover",
    "run_experiment",
    "sample_gmm",
    "sample_uniform",
    "save_csv",
    "sort_dataset_1d",
    "train",
    "upper_bound_bits",
    "write_cover",
]
