"""Projective toy measurement: overlap geometry, collapse, script mode."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predlab import (
    FreshSeedRepetition,
    Verdict,
    constant_predictor,
    make_rule_stream,
    make_seeded_noise_stream,
    null_extractor,
    periodic_stream,
    run_trials,
    single_trial,
)
from predlab.dyadic import identity_predictor
from predlab.errors import NotNormalised, ScopeViolation
from predlab.mealy import io_log_extractor
from predlab.quantum import (
    ONE,
    PLUS,
    ZERO,
    BornSource,
    ProjectiveMeasurement,
    QubitState,
    ScriptedSource,
    complementarity_extractor_set,
    ec_experiment,
    is_noncommuting_pair,
    measure,
    overlap,
    preparation_extractor,
    script_reader_extractor,
)

PHI_QUARTER = QubitState(0.5 + 0j, complex(math.sqrt(3) / 2))  # overlap(ZERO, .)^2 = 1/4

# golden tally for BornSource(12345): frequency 0.25039 at overlap^2 = 0.25
BORN_GOLDEN_SEED = 12345
BORN_GOLDEN_ONES = 25039
BORN_GOLDEN_PREFIX = [0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0]


@st.composite
def qubit_states(draw):
    theta = draw(st.floats(0.0, math.pi, allow_nan=False))
    phase = draw(st.floats(0.0, 2 * math.pi, allow_nan=False))
    return QubitState(
        complex(math.cos(theta / 2)),
        complex(math.cos(phase), math.sin(phase)) * math.sin(theta / 2),
    )


class TestQubitState:
    def test_norm_enforced(self):
        with pytest.raises(NotNormalised):
            QubitState(1.0 + 0j, 1.0 + 0j)

    def test_normalized_constructor(self):
        s = QubitState.normalized(3.0, 4.0)
        assert abs(abs(s.amp0) ** 2 + abs(s.amp1) ** 2 - 1) < 1e-12

    def test_zero_vector_rejected(self):
        with pytest.raises(NotNormalised):
            QubitState.normalized(0.0, 0.0)


class TestOverlap:
    def test_identical_states(self):
        assert overlap(PLUS, PLUS) == pytest.approx(1.0, abs=1e-12)
        assert not is_noncommuting_pair(PLUS, PLUS)

    def test_orthogonal_states(self):
        assert overlap(ZERO, ONE) == pytest.approx(0.0, abs=1e-12)
        assert not is_noncommuting_pair(ZERO, ONE)

    def test_equal_superposition(self):
        phi = QubitState(complex(math.cos(math.pi / 4)), complex(math.sin(math.pi / 4)))
        assert overlap(ZERO, phi) == pytest.approx(0.7071067811865476, abs=1e-12)
        assert is_noncommuting_pair(ZERO, phi)

    @given(psi=qubit_states(), phi=qubit_states())
    def test_symmetry(self, psi, phi):
        assert overlap(psi, phi) == pytest.approx(overlap(phi, psi), abs=1e-12)

    @given(psi=qubit_states(), phi=qubit_states())
    def test_range(self, psi, phi):
        assert 0.0 <= overlap(psi, phi) <= 1.0


class TestMeasure:
    def test_prepared_in_target(self):
        m = ProjectiveMeasurement(PLUS)
        for draw in (0.0, 0.5, 0.999999):
            outcome, post = measure(PLUS, m, draw)
            assert outcome == 1
            assert post == PLUS

    def test_orthogonal_to_target(self):
        m = ProjectiveMeasurement(ONE)
        for draw in (0.0, 0.7):
            outcome, post = measure(ZERO, m, draw)
            assert outcome == 0
            assert post == ZERO

    def test_threshold_at_quarter(self):
        m = ProjectiveMeasurement(PHI_QUARTER)
        assert [measure(ZERO, m, d)[0] for d in (0.1, 0.3, 0.9)] == [1, 0, 0]

    def test_draw_domain(self):
        with pytest.raises(ValueError):
            measure(ZERO, ProjectiveMeasurement(PLUS), 1.0)

    @given(psi=qubit_states(), phi=qubit_states(), draw=st.floats(0, 0.999999))
    @settings(max_examples=300)
    def test_repeat_measurement_is_certain(self, psi, phi, draw):
        m = ProjectiveMeasurement(phi)
        outcome, post = measure(psi, m, draw)
        for second_draw in (0.0, 0.5, 0.999999):
            again, after = measure(post, m, second_draw)
            assert again == outcome


class TestEcExperiment:
    def test_aligned_projector_always_fires(self):
        exp = ec_experiment(PLUS, PLUS, BornSource(1))
        report = run_trials(
            exp, FreshSeedRepetition(), null_extractor(), constant_predictor(1),
            k=50, n_max=50,
        )
        assert report.verdict is Verdict.ATTAINED_K
        assert exp.degenerate

    def test_orthogonal_projector_never_fires(self):
        exp = ec_experiment(ZERO, ONE, BornSource(1))
        report = run_trials(
            exp, FreshSeedRepetition(), null_extractor(), constant_predictor(0),
            k=50, n_max=50,
        )
        assert report.verdict is Verdict.ATTAINED_K
        assert exp.degenerate

    def test_noncommuting_pair_not_degenerate(self):
        assert not ec_experiment(ZERO, PHI_QUARTER, BornSource(1)).degenerate

    def test_born_golden_run(self):
        exp = ec_experiment(ZERO, PHI_QUARTER, BornSource(BORN_GOLDEN_SEED))
        outcomes = [exp.run_trial() for _ in range(100_000)]
        assert outcomes[:16] == BORN_GOLDEN_PREFIX
        assert sum(outcomes) == BORN_GOLDEN_ONES

    def test_born_frequency_tracks_overlap(self):
        exp = ec_experiment(ZERO, PHI_QUARTER, BornSource(BORN_GOLDEN_SEED))
        n = 100_000
        freq = sum(exp.run_trial() for _ in range(n)) / n
        assert abs(freq - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / n)

    @pytest.mark.parametrize(
        "rule", ["champernowne-binary", "pi-prime-index", "alternating"]
    )
    def test_scripted_transcript_equals_script(self, rule):
        script = make_rule_stream(rule)
        exp = ec_experiment(ZERO, PHI_QUARTER, ScriptedSource(script))
        got = [exp.run_trial() for _ in range(64)]
        assert got == list(script.prefix(64))

    def test_scripted_noise_transcript(self):
        script = make_seeded_noise_stream(99)
        exp = ec_experiment(ZERO, PHI_QUARTER, ScriptedSource(script))
        assert [exp.run_trial() for _ in range(64)] == list(script.prefix(64))

    def test_scripted_collapse_consistent(self):
        exp = ec_experiment(ZERO, PHI_QUARTER, ScriptedSource(periodic_stream("10", "0")))
        exp.run_trial()
        assert exp.last_state == PHI_QUARTER  # scripted 1 collapses onto the target
        exp.run_trial()
        post = exp.last_state  # scripted 0: orthogonal complement
        inner = (
            post.amp0.conjugate() * PHI_QUARTER.amp0
            + post.amp1.conjugate() * PHI_QUARTER.amp1
        )
        assert abs(inner) < 1e-12


class TestVisibilityPolicies:
    def test_preparation_extractor_reads_the_public_record(self):
        exp = ec_experiment(ZERO, PHI_QUARTER, BornSource(5))
        record = single_trial(exp, preparation_extractor(), constant_predictor(1))
        assert len(record.extracted) > 0

    def test_io_log_extractor_is_inadmissible(self):
        exp = ec_experiment(ZERO, PHI_QUARTER, BornSource(5))
        with pytest.raises(ScopeViolation):
            single_trial(exp, io_log_extractor(), constant_predictor(1))

    def test_restricted_set_excludes_script_readers(self):
        family = complementarity_extractor_set()
        assert not family.admits(script_reader_extractor())
        assert family.admits(preparation_extractor())

    def test_script_reader_makes_the_scripted_box_predictable(self):
        """Outside the restriction, the definite values are simply read off."""
        script = make_rule_stream("pi-prime-index")
        exp = ec_experiment(ZERO, PHI_QUARTER, ScriptedSource(script))
        report = run_trials(
            exp,
            FreshSeedRepetition(),
            script_reader_extractor(),
            identity_predictor(),
            k=200,
            n_max=200,
        )
        assert report.verdict is Verdict.ATTAINED_K
        assert report.counts == (200, 0, 0)

    def test_script_is_hidden_from_born_mode_views(self):
        exp = ec_experiment(ZERO, PHI_QUARTER, BornSource(5))
        with pytest.raises(ScopeViolation):
            single_trial(exp, script_reader_extractor(), identity_predictor())
