"""predlab: a laboratory for non-probabilistic prediction games.

Experiments emit single bits; extractors tap finite, scope-limited
information from each trial's hidden parameter; total predictors answer
0, 1, or withheld; the evaluator scores repeated runs with a
REFUTED / ATTAINED_K / INCONCLUSIVE verdict.  Bundled systems: the
dyadic-shift experiment with its precision-limited adversary, a
complementarity-constrained Mealy black box, and a toy qubit measurement
in Born and hidden-script modes, plus periodicity and block-frequency
diagnostics for the sequences they produce.
"""

__version__ = "0.1.0"

from .bitstreams import (
    BitStream,
    BitString,
    bbp_hex_digit,
    file_stream,
    fresh_noise_seeds,
    make_rule_stream,
    make_seeded_noise_stream,
    nth_prime,
    periodic_stream,
    splitmix64_value,
)
from .core import (
    Classification,
    EvaluationReport,
    Experiment,
    Extractor,
    ExtractorSet,
    FreshSeedRepetition,
    FuelMeter,
    Prediction,
    Predictor,
    RepetitionProcedure,
    Scope,
    TrialRecord,
    TrialView,
    Verdict,
    classify,
    constant_predictor,
    default_fuel,
    null_extractor,
    run_trials,
    single_trial,
    trial_index_extractor,
    withhold_predictor,
)
from .dyadic import (
    AdversarialRepetition,
    DyadicExperiment,
    adversarial_repetition,
    dyadic_experiment,
    identity_predictor,
    majority_predictor,
    precision_limited_family,
    window_extractor,
)
from .mealy import (
    BlackBox,
    MealyAutomaton,
    MealyExperiment,
    PredicateReport,
    SameBoxRepetition,
    canonical_example,
    complementary_restricted,
    complementary_strict,
    complementary_witnessed,
    eigenstates,
    em_experiment,
    enumerate_automata,
    format_automaton,
    io_log_extractor,
    mealy_automaton,
    negate_previous_predictor,
    output_stable,
    parse_automaton,
    run_em,
)
from .quantum import (
    BornSource,
    ECExperiment,
    ProjectiveMeasurement,
    QubitState,
    ScriptedSource,
    ec_experiment,
    is_noncommuting_pair,
    measure,
    overlap,
    preparation_extractor,
    script_reader_extractor,
)
from .analysis import (
    CycleReport,
    NormalityReport,
    block_frequencies,
    borel_normality_check,
    default_epsilon,
    detect_cycle,
)
