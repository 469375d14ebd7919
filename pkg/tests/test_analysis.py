"""Cycle detection and block-frequency normality diagnostics."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predlab import make_rule_stream, make_seeded_noise_stream
from predlab.analysis import (
    block_frequencies,
    borel_normality_check,
    default_epsilon,
    detect_cycle,
)
from predlab.errors import InsufficientLength
from predlab.mealy import BlackBox, canonical_example, run_em


class TestDetectCycle:
    def test_pure_alternation(self):
        report = detect_cycle([1, 0, 1, 0, 1, 0], 6)
        assert (report.found, report.transient, report.period) == (True, 0, 2)

    def test_constant(self):
        report = detect_cycle([0, 0, 0, 0], 4)
        assert (report.found, report.transient, report.period) == (True, 0, 1)

    def test_single_step_transient(self):
        report = detect_cycle([0, 1, 1, 1, 1], 5)
        assert (report.found, report.transient, report.period) == (True, 1, 1)

    def test_period_three_with_matching_tail(self):
        # ends with two equal symbols; the bogus (transient 10, period 1)
        # reading must lose to the true (0, 3)
        report = detect_cycle([1, 0, 0] * 4, 12)
        assert (report.transient, report.period) == (0, 3)

    def test_no_cycle_in_budget(self):
        report = detect_cycle([0, 0, 0, 0, 1], 5)
        assert not report.found

    def test_accepts_strings_and_bitstrings(self):
        assert detect_cycle("0101", 4).period == 2

    def test_preconditions(self):
        with pytest.raises(ValueError):
            detect_cycle([0, 1], 1)
        with pytest.raises(ValueError):
            detect_cycle([0, 1], 5)

    def test_canonical_em_sequence(self):
        seq = run_em(BlackBox(canonical_example(), "q0"), 8)
        report = detect_cycle(seq, 8)
        assert (report.transient, report.period) == (0, 2)

    @settings(max_examples=300)
    @given(bits=st.lists(st.integers(0, 1), min_size=4, max_size=40))
    def test_reported_pair_satisfies_the_matching_invariant(self, bits):
        report = detect_cycle(bits, len(bits))
        if report.found:
            t, p, bound = report.transient, report.period, report.bound
            assert all(bits[i] == bits[i + p] for i in range(t, bound - p))
            assert t + 2 * p <= bound

    @settings(max_examples=300)
    @given(
        transient=st.lists(st.integers(0, 1), max_size=4),
        cycle=st.lists(st.integers(0, 1), min_size=1, max_size=5),
        reps=st.integers(3, 6),
    )
    def test_reported_period_divides_longer_valid_periods(self, transient, cycle, reps):
        bits = transient + cycle * reps
        report = detect_cycle(bits, len(bits))
        assert report.found
        t, p, bound = report.transient, report.period, report.bound
        assert t <= len(transient)
        # every other fully-covered valid period at the same transient is a multiple
        for q in range(1, bound // 2 + 1):
            if q == p:
                continue
            if all(bits[i] == bits[i + q] for i in range(t, bound - q)) and (
                t + 2 * q <= bound
            ):
                assert q % p == 0, (bits, report, q)


class TestBlockFrequencies:
    def test_all_blocks_equal(self):
        freqs = block_frequencies("010101", 2)
        assert freqs["01"] == 1.0
        assert freqs["00"] == freqs["10"] == freqs["11"] == 0.0

    def test_balanced_single_bits(self):
        freqs = block_frequencies("0011", 1)
        assert freqs["0"] == freqs["1"] == 0.5

    def test_constant_blocks(self):
        assert block_frequencies("1111", 2)["11"] == 1.0

    def test_truncates_partial_block(self):
        freqs = block_frequencies("11111", 2)  # 2 blocks, trailing bit dropped
        assert freqs["11"] == 1.0

    def test_frequencies_sum_to_one(self):
        bits = make_seeded_noise_stream(5).prefix(4096).bits
        for block_len in (1, 2, 3):
            assert sum(block_frequencies(bits, block_len).values()) == pytest.approx(1.0)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            block_frequencies("0101", 0)
        with pytest.raises(ValueError):
            block_frequencies("01", 3)


class TestBorelNormality:
    def test_alternating_fails_at_pairs(self):
        bits = make_rule_stream("alternating").prefix(2**14).bits
        report = borel_normality_check(bits, 2)
        assert not report.passed
        by_len = {r.block_len: r for r in report.results}
        assert by_len[1].passed  # single bits are perfectly balanced
        assert not by_len[2].passed  # freq("01") = 1 >> 1/4 + eps

    def test_constant_fails_immediately(self):
        bits = make_rule_stream("constant", bit=0).prefix(2**14).bits
        report = borel_normality_check(bits, 1)
        assert not report.passed
        assert report.results[0].max_deviation == pytest.approx(0.5)

    def test_seeded_noise_passes_at_large_n(self):
        bits = make_seeded_noise_stream(42).prefix(2**18).bits
        report = borel_normality_check(bits, 3)
        assert report.passed

    def test_champernowne_fails_at_large_n(self):
        """The ones-density of the numeral concatenation converges like
        1/log n: at 2^18 bits it still sits ~0.52, far outside eps."""
        bits = make_rule_stream("champernowne-binary").prefix(2**18).bits
        report = borel_normality_check(bits, 2)
        assert not report.passed
        ones_dev = report.results[0].max_deviation
        assert 0.015 < ones_dev < 0.03
        assert ones_dev > report.results[0].epsilon

    def test_champernowne_passes_at_small_n(self):
        bits = make_rule_stream("champernowne-binary").prefix(2**10).bits
        report = borel_normality_check(bits, 2)
        assert report.passed

    def test_threshold_formula(self):
        assert default_epsilon(2, 2**18) == pytest.approx(
            math.sqrt(2 * 18 / 2**18)
        )

    def test_insufficient_length(self):
        with pytest.raises(InsufficientLength):
            borel_normality_check("01" * 8, 2)  # 8 blocks of length 2 < 16

    def test_report_serialises(self):
        bits = make_seeded_noise_stream(1).prefix(1024).bits
        payload = borel_normality_check(bits, 2).to_dict()
        assert payload["n"] == 1024
        assert len(payload["per_block_len"]) == 2
        assert set(payload["per_block_len"][1]["frequencies"]) == {"00", "01", "10", "11"}
