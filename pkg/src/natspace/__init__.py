"""Exact real computation over natural spaces of basic dots.

Countable sets of finite-information "dots" with decidable apartness and
refinement; points as lazy refining streams with choice moduli; morphisms
on dots that act on points; genetic bars, inductive covers and finite
subcovers; separating functions and the induced metric; plus a batch CLI.
"""

from .dots import (
    Ball,
    Dot,
    DyadicInterval,
    Isolated,
    MAX,
    MaxDot,
    NaryInterval,
    RatInterval,
    Seq,
    Trail,
    TupleDot,
    dot_from_json,
    dot_to_json,
    endpoints,
    interval_contains,
    interval_gap,
    intervals_apart,
)
from .spaces import (
    DistanceOracle,
    InfiniteFactors,
    Space,
    SpaceDefect,
    SpraidInfo,
    Successors,
    ValidationReport,
    direct_limit_Romega,
    extend_with_isolated_point,
    metric_to_spread,
    product,
    rational_enum,
    rational_points_oracle,
    seq_interval,
    std_space,
    unit_interval_dense_points,
    validate_space,
)
from .points import (
    Apart,
    Point,
    PointDefect,
    Unknown,
    Yes,
    approximate,
    canonical_point,
    point_apart,
    point_from_prefix,
    point_in_dot,
    point_to_rational_bounds,
    rational_to_point,
    successor_normalize,
)
from .morphisms import (
    CodedBaireMorphism,
    Morphism,
    MorphismDefect,
    MorphismReport,
    apply_point,
    arith,
    cantor_function,
    check_morphism,
    code_point_of,
    compose,
    constant_code_morphism,
    diagonalize,
    doubling,
    identity,
    line_call,
    nary_codec,
    pair_point,
    round_hull,
    seq_rank,
)
from .encodings import (
    BaireEncoding,
    EncodingDefect,
    baire_encode,
    cantor_surjection,
    cantor_witness,
    compress_sigmaR,
    cover_trails,
    id_str,
    trail_space,
    unglue,
    unglue_projection,
)
from .induction import (
    BarDefect,
    Cover,
    GeneticBar,
    Leaf,
    Split,
    bar_contains,
    bar_depth,
    bar_from_json,
    bar_to_json,
    descends,
    expand_bar,
    finite_subcover,
    flatten,
    formal_from_genetic,
    genetic_uniform,
    inductive_preimage,
    min_bars,
    product_bar,
    reduce_bar,
    separation_bar,
    verify_derivation,
)
from .metric import (
    MetricDefect,
    MetricEvaluator,
    StarReport,
    UrysohnFunction,
    check_splitting,
    evaluate_metric,
    is_star_finite,
    metric_digit_goal,
    splitting_depth,
    star_dots,
    star_relation,
    star_set,
    subfan_Wx,
    urysohn_fan,
    urysohn_spread,
)
