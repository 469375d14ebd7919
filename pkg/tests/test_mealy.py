"""Automaton predicates, the boxed E_M protocol, enumeration, file format.

The independent oracle for traces is a dictionary-table simulator written
out here from the canonical example's definition, not the library tables.
"""

import itertools
import json
from pathlib import Path

import pytest

from predlab import (
    Verdict,
    constant_predictor,
    run_trials,
)
from predlab.errors import EnumerationTooLarge
from predlab.mealy import (
    BlackBox,
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

GOLDEN = json.loads((Path(__file__).parent / "data" / "enumeration_q3.json").read_text())

# the canonical 4-state box, written out longhand as the oracle's table
ORACLE_DELTA = {
    ("p0", "x"): "p0", ("p0", "z"): "q0",
    ("p1", "x"): "p1", ("p1", "z"): "q1",
    ("q0", "x"): "p1", ("q0", "z"): "q0",
    ("q1", "x"): "p0", ("q1", "z"): "q1",
}
ORACLE_OMEGA = {
    ("p0", "x"): 0, ("p0", "z"): 0,
    ("p1", "x"): 1, ("p1", "z"): 1,
    ("q0", "x"): 1, ("q0", "z"): 0,
    ("q1", "x"): 0, ("q1", "z"): 1,
}


def oracle_trace(start: str, symbols: str):
    """Hand simulator over the longhand tables."""
    state, outputs = start, []
    for symbol in symbols:
        outputs.append(ORACLE_OMEGA[(state, symbol)])
        state = ORACLE_DELTA[(state, symbol)]
    return outputs, state


def oracle_em_sequence(start: str, repetitions: int):
    state, outs = start, []
    for _ in range(repetitions):
        trace, state = oracle_trace(state, "xxz")
        outs.append(trace[-1])
    return outs


def swap_swap_automaton():
    """2-state example: both inputs swap the states, outputs distinguish."""
    return mealy_automaton(
        delta=((1, 1), (0, 0)),
        omega=((0, 0), (1, 1)),
        state_names=("q0", "q1"),
    )


def identity_delta_automaton(n=2, z_output=0):
    return mealy_automaton(
        delta=tuple((q, q) for q in range(n)),
        omega=tuple((q % 2, z_output) for q in range(n)),
    )


class TestOutputStable:
    def test_canonical(self):
        assert output_stable(canonical_example()).holds

    def test_single_state_always_stable(self):
        for ox, oz in itertools.product((0, 1), repeat=2):
            assert output_stable(mealy_automaton([(0, 0)], [(ox, oz)])).holds

    def test_unstable_two_state(self):
        m = mealy_automaton(
            delta=((1, 0), (1, 1)),
            omega=((0, 0), (1, 0)),
            state_names=("q0", "q1"),
        )
        report = output_stable(m)
        assert not report.holds
        assert report.witness == ("q0", "x")


class TestComplementaryWitnessed:
    def test_canonical_z_after_x(self):
        report = complementary_witnessed(canonical_example(), "z", "x")
        assert report.holds
        assert report.witness == ("q0",)

    def test_identity_delta_never_witnesses(self):
        assert not complementary_witnessed(identity_delta_automaton(), "z", "x").holds

    def test_single_state_never_witnesses(self):
        assert not complementary_witnessed(mealy_automaton([(0, 0)], [(1, 0)]), "x", "z").holds

    def test_distinct_inputs_required(self):
        with pytest.raises(ValueError):
            complementary_witnessed(canonical_example(), "x", "x")


class TestComplementaryStrict:
    def test_canonical_fails_at_fixed_point(self):
        report = complementary_strict(canonical_example())
        assert not report.holds
        assert report.witness == ("p0", "x")

    def test_single_state_impossible(self):
        assert not complementary_strict(mealy_automaton([(0, 0)], [(0, 1)])).holds

    def test_swap_swap_holds(self):
        report = complementary_strict(swap_swap_automaton())
        assert report.holds


class TestComplementaryRestricted:
    def test_canonical_holds(self):
        assert complementary_restricted(canonical_example()).holds

    def test_identity_delta_is_vacuous(self):
        report = complementary_restricted(identity_delta_automaton())
        assert not report.holds
        assert report.witness == ("x",)
        assert "vacuous" in report.equation

    def test_strict_example_also_restricted(self):
        assert complementary_restricted(swap_swap_automaton()).holds


class TestEigenstates:
    def test_canonical(self):
        m = canonical_example()
        assert eigenstates(m, "x") == {"p0", "p1"}
        assert eigenstates(m, "z") == {"q0", "q1"}

    def test_strict_forbids_fixed_points(self):
        m = swap_swap_automaton()
        assert eigenstates(m, "x") == frozenset()
        assert eigenstates(m, "z") == frozenset()


class TestCounterexamplesRecheck:
    """A failing report's witness must reproduce the violation in the tables."""

    def recheck(self, automaton, report):
        if report.holds or report.witness is None:
            return
        if report.predicate == "output-stable":
            state, symbol = report.witness
            q = automaton.state_index(state)
            i = automaton.input_index(symbol)
            assert automaton.omega[q][i] != automaton.omega[automaton.delta[q][i]][i]
        elif report.predicate == "complementary-strict":
            state, measured = report.witness
            q = automaton.state_index(state)
            mi = automaton.input_index(measured)
            other = "z" if measured == "x" else "x"
            oi = automaton.input_index(other)
            assert automaton.omega[q][oi] == automaton.omega[automaton.delta[q][mi]][oi]
        elif report.predicate == "complementary-restricted":
            if len(report.witness) == 1:
                (symbol,) = report.witness
                i = automaton.input_index(symbol)
                assert all(
                    automaton.delta[q][i] == q for q in range(automaton.n_states)
                )
            else:
                state, measured = report.witness
                q = automaton.state_index(state)
                mi = automaton.input_index(measured)
                other = "z" if measured == "x" else "x"
                oi = automaton.input_index(other)
                nxt = automaton.delta[q][mi]
                assert nxt != q
                assert automaton.omega[q][oi] == automaton.omega[nxt][oi]

    def test_exhaustive_recheck_two_states(self):
        for delta_flat in itertools.product(range(2), repeat=4):
            for omega_flat in itertools.product((0, 1), repeat=4):
                m = mealy_automaton(
                    delta=[delta_flat[0:2], delta_flat[2:4]],
                    omega=[omega_flat[0:2], omega_flat[2:4]],
                )
                self.recheck(m, output_stable(m))
                self.recheck(m, complementary_strict(m))
                self.recheck(m, complementary_restricted(m))


class TestBlackBox:
    def test_feed_logs_and_hides(self):
        box = BlackBox(canonical_example(), "q0")
        assert box.feed("x") == 1
        assert box.io_log == (("x", 1),)

    def test_default_start_is_lowest_labelled(self):
        box = BlackBox(canonical_example())
        assert box.feed("x") == 0  # p0 answers x with 0

    def test_canonical_trace_from_q0(self):
        # prepare 'x' then trial 'xz': outputs 1 then 1,1; lands in q1
        expected, end = oracle_trace("q0", "xxz")
        box = BlackBox(canonical_example(), "q0")
        got = [box.feed(s) for s in "xxz"]
        assert got == expected == [1, 1, 1]
        assert end == "q1"
        assert box.feed("z") == 1  # q1's z answer confirms the end state


class TestRunEm:
    def test_from_q0_matches_oracle(self):
        box = BlackBox(canonical_example(), "q0")
        assert run_em(box, 6) == oracle_em_sequence("q0", 6) == [1, 0, 1, 0, 1, 0]

    def test_from_q1_is_phase_shifted(self):
        box = BlackBox(canonical_example(), "q1")
        assert run_em(box, 4) == oracle_em_sequence("q1", 4) == [0, 1, 0, 1]

    def test_frozen_box_is_constant(self):
        box = BlackBox(identity_delta_automaton(z_output=0), 0)
        assert run_em(box, 5) == [0, 0, 0, 0, 0]

    def test_needs_a_repetition(self):
        with pytest.raises(ValueError):
            run_em(BlackBox(canonical_example()), 0)


class TestEmExperiment:
    def test_constant_one_refuted_at_second_trial(self):
        exp = em_experiment(BlackBox(canonical_example(), "q0"))
        report = run_trials(
            exp, SameBoxRepetition(), io_log_extractor(), constant_predictor(1),
            k=3, n_max=10,
        )
        assert report.verdict is Verdict.REFUTED
        assert report.n_used == 2
        assert report.trials[1].outcome == 0

    def test_history_reader_predicts_the_period(self):
        """The log is fair game for Xi_C: one observation, then all correct."""
        exp = em_experiment(BlackBox(canonical_example(), "q0"))
        report = run_trials(
            exp, SameBoxRepetition(), io_log_extractor(), negate_previous_predictor(),
            k=100, n_max=200,
        )
        assert report.verdict is Verdict.ATTAINED_K
        assert report.n_used == 101
        assert report.counts == (100, 0, 1)

    def test_frozen_box_with_matching_constant(self):
        exp = em_experiment(BlackBox(identity_delta_automaton(z_output=0), 0))
        report = run_trials(
            exp, SameBoxRepetition(), io_log_extractor(), constant_predictor(0),
            k=20, n_max=30,
        )
        assert report.verdict is Verdict.ATTAINED_K


class TestEnumeration:
    def test_single_state_counts_exactly(self):
        summary = enumerate_automata(1, ["output-stable", "complementary-strict"])
        assert summary.totals[1] == 4
        assert summary.counts[1]["output-stable"] == 4
        assert summary.counts[1]["complementary-strict"] == 0

    def test_two_state_strict_count_is_four(self):
        # hand count: both delta columns must swap (1 way), each omega
        # column must distinguish the states (2 ways each): 2 * 2 = 4
        summary = enumerate_automata(2, ["complementary-strict"])
        assert summary.counts[2]["complementary-strict"] == 4

    def test_two_state_stable_count_is_hundred(self):
        # 10 stable (delta, omega) columns per input, two inputs: 10^2
        summary = enumerate_automata(2, ["output-stable"])
        assert summary.counts[2]["output-stable"] == 100

    def test_stability_and_strictness_conflict(self):
        summary = enumerate_automata(2, ["output-stable", "complementary-strict"])
        assert summary.conjunction[2] == 0

    def test_matches_golden_run(self):
        summary = enumerate_automata(3, GOLDEN["predicates"])
        assert summary.to_dict() == GOLDEN

    def test_exemplars_satisfy_the_conjunction(self):
        summary = enumerate_automata(2, ["complementary-strict"], max_exemplars=2)
        assert len(summary.exemplars) == 2
        for text in summary.exemplars:
            assert complementary_strict(parse_automaton(text)).holds

    def test_refuses_large_tables(self):
        with pytest.raises(EnumerationTooLarge):
            enumerate_automata(5, ["output-stable"])


class TestStructuralInvariants:
    def test_strict_implies_no_eigenstates_and_restricted(self):
        for n in (1, 2, 3):
            for delta_flat in itertools.product(range(n), repeat=2 * n):
                for omega_flat in itertools.product((0, 1), repeat=2 * n):
                    m = mealy_automaton(
                        delta=[delta_flat[2 * q : 2 * q + 2] for q in range(n)],
                        omega=[omega_flat[2 * q : 2 * q + 2] for q in range(n)],
                    )
                    if complementary_strict(m).holds:
                        assert eigenstates(m, "x") == frozenset()
                        assert eigenstates(m, "z") == frozenset()
                        assert complementary_restricted(m).holds

    def test_canonical_satisfies_the_working_combination(self):
        m = canonical_example()
        assert output_stable(m).holds
        assert complementary_restricted(m).holds
        seq = run_em(BlackBox(m, "q0"), 16)
        assert seq == [1, 0] * 8


class TestFileFormat:
    def test_round_trip_canonical(self):
        m = canonical_example()
        text = format_automaton(m)
        assert parse_automaton(text) == m
        assert format_automaton(parse_automaton(text)) == text

    def test_round_trip_survives_comments_and_blanks(self):
        text = format_automaton(swap_swap_automaton())
        noisy = "# header comment\n\n" + text.replace(
            "q0 x -> q1 0", "q0 x -> q1 0   # swap"
        )
        assert parse_automaton(noisy) == swap_swap_automaton()

    @pytest.mark.parametrize(
        "text,match",
        [
            ("states: a b\na x -> b 0\n", "inputs"),
            ("inputs: x z\nstates: a\na x -> a 0\n", "missing entry"),
            ("inputs: x z\nstates: a\na x -> b 0\na z -> a 1\n", "unknown target"),
            ("inputs: x z\nstates: a\na x -> a 2\na z -> a 0\n", "output must be"),
            ("inputs: x z\nstates: a\na x a 0\na z -> a 0\n", "expected"),
            (
                "inputs: x z\nstates: a\na x -> a 0\na x -> a 1\na z -> a 0\n",
                "duplicate",
            ),
        ],
    )
    def test_parse_errors(self, text, match):
        with pytest.raises(ValueError, match=match):
            parse_automaton(text)
