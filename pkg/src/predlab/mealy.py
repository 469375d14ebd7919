"""Mealy transducers as value-definite toy measurement boxes.

An automaton (Q, {x,z,...}, {0,1}, delta, omega) answers each input
symbol with a bit and moves to a new state.  Three table predicates
matter here:

* output stability: repeating an input repeats its answer,
  omega(q,a) = omega(delta(q,a),a) for every q, a;
* strict complementarity: measuring one symbol always flips the other's
  answer, omega(q,z) != omega(delta(q,x),z) for every q (and
  symmetrically) - incompatible with fixed points by construction;
* restricted complementarity: the same disturbance requirement imposed
  only where the state actually moves, plus non-vacuity (some state must
  move in each direction).

The strict form contradicts the existence of eigenstates (states fixed
by an input), which the boxed-measurement story needs for preparation,
so the shipped 4-state example is judged by the restricted form.

The E_M protocol on a black box: prepare by feeding x (answer discarded),
then run the trial "x z" and record the z answer, always on the same box.
State-space pigeonhole makes the recorded sequence eventually periodic
with transient + period at most |Q|.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .bitstreams import BitString
from .core import (
    Experiment,
    Extractor,
    ExtractorSet,
    FuelMeter,
    Prediction,
    Predictor,
    RepetitionProcedure,
    Scope,
    default_fuel,
    trial_index_extractor,
    null_extractor,
)
from .errors import EnumerationTooLarge


@dataclass(frozen=True)
class MealyAutomaton:
    """Finite transducer with total transition/output tables.

    ``delta[q][i]`` / ``omega[q][i]`` give next state and output bit for
    state ``q`` under input ``inputs[i]``.
    """

    n_states: int
    inputs: tuple[str, ...]
    delta: tuple[tuple[int, ...], ...]
    omega: tuple[tuple[int, ...], ...]
    state_names: tuple[str, ...]

    def __post_init__(self):
        if self.n_states < 1:
            raise ValueError("automaton needs at least one state")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError("duplicate input symbols")
        if not {"x", "z"} <= set(self.inputs):
            raise ValueError("input alphabet must contain the symbols x and z")
        if len(self.state_names) != self.n_states or len(
            set(self.state_names)
        ) != self.n_states:
            raise ValueError("state names must be unique, one per state")
        for table, rng, what in ((self.delta, self.n_states, "delta"), (self.omega, 2, "omega")):
            if len(table) != self.n_states:
                raise ValueError(f"{what} must have one row per state")
            for row in table:
                if len(row) != len(self.inputs):
                    raise ValueError(f"{what} rows must cover every input")
                if any(not 0 <= v < rng for v in row):
                    raise ValueError(f"{what} entry out of range")

    def input_index(self, symbol: str) -> int:
        try:
            return self.inputs.index(symbol)
        except ValueError:
            raise ValueError(f"unknown input symbol {symbol!r}") from None

    def state_index(self, state) -> int:
        if isinstance(state, int):
            if not 0 <= state < self.n_states:
                raise ValueError(f"state {state} out of range")
            return state
        try:
            return self.state_names.index(state)
        except ValueError:
            raise ValueError(f"unknown state {state!r}") from None

    def step(self, q: int, symbol: str) -> tuple[int, int]:
        i = self.input_index(symbol)
        return self.delta[q][i], self.omega[q][i]

    def flat_tables(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (
            tuple(itertools.chain.from_iterable(self.delta)),
            tuple(itertools.chain.from_iterable(self.omega)),
        )


def mealy_automaton(delta, omega, inputs=("x", "z"), state_names=None) -> MealyAutomaton:
    delta = tuple(tuple(row) for row in delta)
    n = len(delta)
    if state_names is None:
        state_names = tuple(f"s{i}" for i in range(n))
    return MealyAutomaton(
        n_states=n,
        inputs=tuple(inputs),
        delta=delta,
        omega=tuple(tuple(row) for row in omega),
        state_names=tuple(state_names),
    )


def canonical_example() -> MealyAutomaton:
    """4-state box behaving like idealised qubit measurements.

    p0, p1 are fixed by x and answer x with their label; q0, q1 are fixed
    by z likewise.  Measuring z on p_a lands in q_a (answer a); measuring
    x on q_b lands in p_{1-b} (answer 1-b).
    """
    return mealy_automaton(
        delta=(
            (0, 2),  # p0: x -> p0, z -> q0
            (1, 3),  # p1: x -> p1, z -> q1
            (1, 2),  # q0: x -> p1, z -> q0
            (0, 3),  # q1: x -> p0, z -> q1
        ),
        omega=(
            (0, 0),  # p0
            (1, 1),  # p1
            (1, 0),  # q0
            (0, 1),  # q1
        ),
        state_names=("p0", "p1", "q0", "q1"),
    )


# --- table predicates --------------------------------------------------------

# Core checks operate on flattened tables (index = q * n_inputs + input_idx)
# so the exhaustive enumeration can share them without building objects.


def _stable_counterexample(n, ni, delta, omega):
    for q in range(n):
        base = q * ni
        for ai in range(ni):
            if omega[base + ai] != omega[delta[base + ai] * ni + ai]:
                return (q, ai)
    return None


def _strict_counterexample(n, ni, delta, omega, xi, zi):
    for q in range(n):
        base = q * ni
        if omega[base + zi] == omega[delta[base + xi] * ni + zi]:
            return (q, xi)
        if omega[base + xi] == omega[delta[base + zi] * ni + xi]:
            return (q, zi)
    return None


def _restricted_verdict(n, ni, delta, omega, xi, zi):
    """(holds, violating (q, measured_input) or None, vacuous input or None)."""
    for measured, other in ((xi, zi), (zi, xi)):
        moved = False
        for q in range(n):
            nxt = delta[q * ni + measured]
            if nxt != q:
                moved = True
                if omega[q * ni + other] == omega[nxt * ni + other]:
                    return False, (q, measured), None
        if not moved:
            return False, None, measured
    return True, None, None


def _witness_state(n, ni, delta, omega, ai, bi):
    for s in range(n):
        if omega[s * ni + ai] != omega[delta[s * ni + bi] * ni + ai]:
            return s
    return None


@dataclass(frozen=True)
class PredicateReport:
    predicate: str
    holds: bool
    witness: tuple | None
    equation: str

    def __bool__(self) -> bool:
        return self.holds


def output_stable(automaton: MealyAutomaton) -> PredicateReport:
    """Repeated measurement of any symbol repeats its answer."""
    delta, omega = automaton.flat_tables()
    ni = len(automaton.inputs)
    ce = _stable_counterexample(automaton.n_states, ni, delta, omega)
    if ce is None:
        return PredicateReport(
            "output-stable", True, None, "omega(q,a) = omega(delta(q,a),a) for all q,a"
        )
    q, ai = ce
    a = automaton.inputs[ai]
    name = automaton.state_names
    nxt = automaton.delta[q][ai]
    return PredicateReport(
        "output-stable",
        False,
        (name[q], a),
        f"omega({name[q]},{a})={automaton.omega[q][ai]} but "
        f"omega(delta({name[q]},{a})={name[nxt]},{a})={automaton.omega[nxt][ai]}",
    )


def complementary_witnessed(automaton: MealyAutomaton, a: str, b: str) -> PredicateReport:
    """Some state loses its answer to ``a`` after ``b`` is measured."""
    if a == b:
        raise ValueError("witnessed complementarity needs two distinct inputs")
    delta, omega = automaton.flat_tables()
    ni = len(automaton.inputs)
    ai, bi = automaton.input_index(a), automaton.input_index(b)
    s = _witness_state(automaton.n_states, ni, delta, omega, ai, bi)
    if s is None:
        return PredicateReport(
            "complementary-witnessed",
            False,
            None,
            f"omega(s,{a}) = omega(delta(s,{b}),{a}) for every state s",
        )
    name = automaton.state_names
    nxt = automaton.delta[s][bi]
    return PredicateReport(
        "complementary-witnessed",
        True,
        (name[s],),
        f"omega({name[s]},{a})={automaton.omega[s][ai]} != "
        f"omega(delta({name[s]},{b})={name[nxt]},{a})={automaton.omega[nxt][ai]}",
    )


def complementary_strict(automaton: MealyAutomaton, x: str = "x", z: str = "z") -> PredicateReport:
    """Every state's answer to each symbol is flipped by measuring the other."""
    if x == z:
        raise ValueError("strict complementarity needs two distinct inputs")
    delta, omega = automaton.flat_tables()
    ni = len(automaton.inputs)
    xi, zi = automaton.input_index(x), automaton.input_index(z)
    ce = _strict_counterexample(automaton.n_states, ni, delta, omega, xi, zi)
    if ce is None:
        return PredicateReport(
            "complementary-strict",
            True,
            None,
            f"omega(q,{z}) != omega(delta(q,{x}),{z}) and symmetrically, for all q",
        )
    q, mi = ce
    measured = automaton.inputs[mi]
    other = z if measured == x else x
    name = automaton.state_names
    nxt = automaton.delta[q][mi]
    oi = automaton.input_index(other)
    return PredicateReport(
        "complementary-strict",
        False,
        (name[q], measured),
        f"omega({name[q]},{other})={automaton.omega[q][oi]} = "
        f"omega(delta({name[q]},{measured})={name[nxt]},{other})",
    )


def complementary_restricted(
    automaton: MealyAutomaton, x: str = "x", z: str = "z"
) -> PredicateReport:
    """Strict disturbance required only where the state actually moves."""
    if x == z:
        raise ValueError("restricted complementarity needs two distinct inputs")
    delta, omega = automaton.flat_tables()
    ni = len(automaton.inputs)
    xi, zi = automaton.input_index(x), automaton.input_index(z)
    holds, violation, vacuous = _restricted_verdict(
        automaton.n_states, ni, delta, omega, xi, zi
    )
    if holds:
        return PredicateReport(
            "complementary-restricted",
            True,
            None,
            f"omega(q,b) != omega(delta(q,a),b) wherever delta(q,a) != q, "
            f"for (a,b) in (({x},{z}), ({z},{x}))",
        )
    if vacuous is not None:
        symbol = automaton.inputs[vacuous]
        return PredicateReport(
            "complementary-restricted",
            False,
            (symbol,),
            f"vacuous: delta(q,{symbol}) = q for every state q",
        )
    q, mi = violation
    measured = automaton.inputs[mi]
    other = z if measured == x else x
    name = automaton.state_names
    nxt = automaton.delta[q][mi]
    oi = automaton.input_index(other)
    return PredicateReport(
        "complementary-restricted",
        False,
        (name[q], measured),
        f"delta({name[q]},{measured})={name[nxt]} moves but "
        f"omega({name[q]},{other})={automaton.omega[q][oi]} = omega({name[nxt]},{other})",
    )


def eigenstates(automaton: MealyAutomaton, symbol: str) -> frozenset[str]:
    """States fixed by the symbol: repeated measurement leaves them put."""
    i = automaton.input_index(symbol)
    return frozenset(
        automaton.state_names[q]
        for q in range(automaton.n_states)
        if automaton.delta[q][i] == q
    )


# --- the black box and the E_M protocol --------------------------------------


class BlackBox:
    """State-hiding wrapper: only the input/output log is observable."""

    def __init__(self, automaton: MealyAutomaton, start=None):
        self._automaton = automaton
        self._state = 0 if start is None else automaton.state_index(start)
        self._log: list[tuple[str, int]] = []

    @property
    def io_log(self) -> tuple[tuple[str, int], ...]:
        return tuple(self._log)

    def feed(self, symbol: str) -> int:
        nxt, out = self._automaton.step(self._state, symbol)
        self._state = nxt
        self._log.append((symbol, out))
        return out


def run_em(box: BlackBox, repetitions: int) -> list[int]:
    """Same-box protocol: feed x (discard), feed x then z, record the z bit."""
    if repetitions < 1:
        raise ValueError("need at least one repetition")
    outputs = []
    for _ in range(repetitions):
        box.feed("x")
        box.feed("x")
        outputs.append(box.feed("z"))
    return outputs


class MealyExperiment(Experiment):
    """One trial = the box's answer to the string xz (the z answer)."""

    id = "mealy-em"
    components = frozenset({"io_log"})

    def __init__(self, box: BlackBox):
        self.box = box

    def feed_preparation(self, symbol: str) -> None:
        self.box.feed(symbol)

    def _view_fields(self) -> dict:
        return {"io_log": self.box.io_log}

    def run_trial(self) -> int:
        self.box.feed("x")
        return self.box.feed("z")


def em_experiment(box: BlackBox) -> MealyExperiment:
    return MealyExperiment(box)


class SameBoxRepetition(RepetitionProcedure):
    """Prepare each trial by feeding the preparation symbol to the same box."""

    id = "same-box"

    def __init__(self, preparation: str = "x"):
        self.preparation = preparation

    def prepare(self, experiment, trial_index: int, history) -> None:
        experiment.feed_preparation(self.preparation)


def io_log_extractor(symbol: str = "z") -> Extractor:
    """Answers recorded so far for one input symbol, oldest first."""

    def fn(view) -> BitString:
        return BitString.from_ints(
            out for sym, out in view.io_log() if sym == symbol
        )

    return Extractor(f"io-log-{symbol}", Scope(io_log=True), fn, params=(symbol,))


def negate_previous_predictor(fuel: int | None = None) -> Predictor:
    """Bets against the most recent extracted bit; withholds with no history."""

    def fn(bits: BitString, meter: FuelMeter) -> Prediction:
        meter.tick()
        if len(bits) == 0:
            return Prediction.WITHHELD
        return Prediction.from_bit(1 - int(bits.bits[-1]))

    return Predictor("negate-previous", fn, default_fuel() if fuel is None else fuel)


def complementarity_extractor_set() -> ExtractorSet:
    """Extractors allowed at the box: the visible log and the trial index,
    never the current state or the tables."""
    return ExtractorSet(
        "Xi-C-mealy",
        [io_log_extractor("z"), io_log_extractor("x"), trial_index_extractor(), null_extractor()],
        policy=lambda e: e.scope.seed_bits == 0 and not e.scope.preparation,
        policy_doc="may read the I/O log and trial index only",
    )


# --- exhaustive enumeration ---------------------------------------------------

ENUMERATION_PREDICATES = (
    "output-stable",
    "complementary-strict",
    "complementary-restricted",
    "complementary-witnessed",
)

MAX_ENUMERATION_STATES = 4


def _flat_predicate(name: str):
    if name == "output-stable":
        return lambda n, ni, d, o, xi, zi: _stable_counterexample(n, ni, d, o) is None
    if name == "complementary-strict":
        return (
            lambda n, ni, d, o, xi, zi: _strict_counterexample(n, ni, d, o, xi, zi)
            is None
        )
    if name == "complementary-restricted":
        return lambda n, ni, d, o, xi, zi: _restricted_verdict(n, ni, d, o, xi, zi)[0]
    if name == "complementary-witnessed":
        return lambda n, ni, d, o, xi, zi: (
            _witness_state(n, ni, d, o, xi, zi) is not None
            or _witness_state(n, ni, d, o, zi, xi) is not None
        )
    raise ValueError(
        f"unknown predicate {name!r} (known: {', '.join(ENUMERATION_PREDICATES)})"
    )


@dataclass
class EnumerationSummary:
    q_max: int
    predicates: tuple[str, ...]
    totals: dict
    counts: dict
    conjunction: dict
    exemplars: list

    def to_dict(self) -> dict:
        return {
            "q_max": self.q_max,
            "predicates": list(self.predicates),
            "per_q": {
                str(q): {
                    "total": self.totals[q],
                    "counts": dict(self.counts[q]),
                    "conjunction": self.conjunction[q],
                }
                for q in sorted(self.totals)
            },
            "exemplars": list(self.exemplars),
        }


def enumerate_automata(
    q_max: int, predicates, max_exemplars: int = 0
) -> EnumerationSummary:
    """Count all raw (delta, omega) tables over inputs {x, z} by predicate.

    No isomorphism reduction is applied: totals are (2n)^(2n) candidates
    for n states, which keeps the counts trivially reproducible.  q_max=4
    means ~16.8M tables and minutes of runtime; larger is refused.
    """
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    if q_max > MAX_ENUMERATION_STATES:
        raise EnumerationTooLarge(
            f"enumeration over |Q| = {q_max} > {MAX_ENUMERATION_STATES} tables is unsupported"
        )
    predicates = tuple(predicates)
    checks = [(name, _flat_predicate(name)) for name in predicates]
    totals: dict[int, int] = {}
    counts: dict[int, dict[str, int]] = {}
    conjunction: dict[int, int] = {}
    exemplars: list[str] = []
    ni, xi, zi = 2, 0, 1
    for n in range(1, q_max + 1):
        totals[n] = 0
        counts[n] = {name: 0 for name in predicates}
        conjunction[n] = 0
        deltas = list(itertools.product(range(n), repeat=n * ni))
        omegas = list(itertools.product((0, 1), repeat=n * ni))
        for delta in deltas:
            for omega in omegas:
                totals[n] += 1
                all_hold = True
                for name, check in checks:
                    if check(n, ni, delta, omega, xi, zi):
                        counts[n][name] += 1
                    else:
                        all_hold = False
                if all_hold and predicates:
                    conjunction[n] += 1
                    if len(exemplars) < max_exemplars:
                        exemplars.append(format_automaton(_from_flat(n, delta, omega)))
    return EnumerationSummary(q_max, predicates, totals, counts, conjunction, exemplars)


def _from_flat(n: int, delta, omega) -> MealyAutomaton:
    return mealy_automaton(
        delta=[delta[q * 2 : q * 2 + 2] for q in range(n)],
        omega=[omega[q * 2 : q * 2 + 2] for q in range(n)],
    )


# --- plain-text table format --------------------------------------------------
#
# inputs: x z
# states: p0 p1 q0 q1
# p0 x -> p0 0
# ... one line per (state, input), state-major, input order as declared.


def format_automaton(automaton: MealyAutomaton) -> str:
    lines = [
        "inputs: " + " ".join(automaton.inputs),
        "states: " + " ".join(automaton.state_names),
    ]
    for q in range(automaton.n_states):
        for i, symbol in enumerate(automaton.inputs):
            lines.append(
                f"{automaton.state_names[q]} {symbol} -> "
                f"{automaton.state_names[automaton.delta[q][i]]} {automaton.omega[q][i]}"
            )
    return "\n".join(lines) + "\n"


def parse_automaton(text: str) -> MealyAutomaton:
    inputs: tuple[str, ...] | None = None
    names: tuple[str, ...] | None = None
    table: dict[tuple[str, str], tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("inputs:"):
            inputs = tuple(line[len("inputs:") :].split())
            continue
        if line.startswith("states:"):
            names = tuple(line[len("states:") :].split())
            continue
        parts = line.split()
        if len(parts) != 5 or parts[2] != "->":
            raise ValueError(f"line {lineno}: expected '<state> <input> -> <state> <bit>'")
        state, symbol, _, nxt, bit = parts
        if bit not in ("0", "1"):
            raise ValueError(f"line {lineno}: output must be 0 or 1")
        if (state, symbol) in table:
            raise ValueError(f"line {lineno}: duplicate entry for ({state}, {symbol})")
        table[(state, symbol)] = (nxt, int(bit))
    if inputs is None or names is None:
        raise ValueError("automaton text needs 'inputs:' and 'states:' header lines")
    index = {name: i for i, name in enumerate(names)}
    delta, omega = [], []
    for name in names:
        drow, orow = [], []
        for symbol in inputs:
            if (name, symbol) not in table:
                raise ValueError(f"missing entry for ({name}, {symbol})")
            nxt, bit = table[(name, symbol)]
            if nxt not in index:
                raise ValueError(f"unknown target state {nxt!r}")
            drow.append(index[nxt])
            orow.append(bit)
        delta.append(tuple(drow))
        omega.append(tuple(orow))
    extras = set(table) - {(s, a) for s in names for a in inputs}
    if extras:
        raise ValueError(f"entries for undeclared states/inputs: {sorted(extras)}")
    return mealy_automaton(delta, omega, inputs=inputs, state_names=names)
