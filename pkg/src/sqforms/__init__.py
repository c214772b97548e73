"""Perfect-square linear forms: lattice sieves, strip geometry, measure and
dimension experiments, and a periodic wave-equation spectral solver."""

from sqforms.lattice import (
    AngleClass,
    AnglePair,
    CoeffVector,
    SieveConfig,
    ZeroVectorError,
    angle_between,
    classify_angle,
    count_sieved_dyadic,
    enumerate_sieved,
    height,
    passes_sieve,
    totient_identity_dyadic,
    totient_sieve,
    totient_summatory,
)
from sqforms.strips import (
    Ball,
    CInterval,
    PowerLaw,
    Region,
    ShavedCube,
    StepTable,
    Strip,
    UnitCube,
    admissible_c_interval,
    load_table_csv,
    lower_order,
    make_strip,
    parse_psi_spec,
    psi_eval,
    solutions_at_point,
    strip_contains,
)
from sqforms.measure import (
    BCStatistics,
    BoxCountResult,
    CellCenter,
    DichotomyReport,
    GridSpec,
    MeasureEstimate,
    Subsample,
    UnionMeasureResult,
    bc_statistics,
    box_counting_dimension,
    box_counting_strips,
    estimate_measure,
    hausdorff_sum,
    hausdorff_term_exponent,
    khintchine_sum,
    pairwise_intersection_measure,
    predicted_dimension,
    union_measure_over_c,
    windowed_union_measure,
)
from sqforms.wave import (
    FourierField,
    NearResonanceError,
    NonZeroMeanSourceError,
    ResonanceScanConfig,
    ResonantModeError,
    ScanHit,
    WaveParams,
    apply_operator,
    denominator,
    evaluate_field,
    residual_check,
    resonance_scan,
    solve_wave,
)

__version__ = "0.1.0"
