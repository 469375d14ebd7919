"""Prediction games: experiments, extractors, predictors, evaluation.

The evaluator realises a finite approximation of the correctness
criterion: a predictor is judged at level (k, n_max) with a three-valued
verdict.  One incorrect committed prediction refutes immediately; k
correct ones with none incorrect attain the level; anything else is
inconclusive at the trial budget.

Extractors never touch experiment internals directly.  They receive a
read-only per-trial view whose accessors enforce the extractor's declared
visibility scope, so a mis-scoped read is an error rather than a silent
information leak.  Predictor totality is approximated by a fuel budget:
a predictor that exceeds it raises instead of hanging.
"""

from __future__ import annotations

import os
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

from .bitstreams import BitStream, BitString
from .errors import PolicyViolation, PredictorNontotal, ScopeViolation


class Prediction(Enum):
    ZERO = "0"
    ONE = "1"
    WITHHELD = "withheld"

    @classmethod
    def from_bit(cls, bit: int) -> "Prediction":
        return cls.ONE if bit else cls.ZERO


class Classification(Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    WITHHELD = "withheld"


class Verdict(Enum):
    REFUTED = "REFUTED"
    ATTAINED_K = "ATTAINED_K"
    INCONCLUSIVE = "INCONCLUSIVE"


def default_fuel() -> int:
    """Per-invocation step budget; PREDLAB_FUEL overrides the 10^6 default."""
    return int(os.environ.get("PREDLAB_FUEL", "1000000"))


class FuelMeter:
    """Step counter a predictor charges while it works."""

    __slots__ = ("budget", "used")

    def __init__(self, budget: int):
        self.budget = budget
        self.used = 0

    def tick(self, steps: int = 1) -> None:
        self.used += steps
        if self.used > self.budget:
            raise PredictorNontotal(
                f"predictor exceeded its fuel budget of {self.budget} steps"
            )


@dataclass(frozen=True)
class Scope:
    """Which components of the hidden parameter an extractor may read.

    ``seed_bits = l`` grants the seed window 1..l (0 grants nothing).
    """

    seed_bits: int = 0
    trial_index: bool = False
    io_log: bool = False
    preparation: bool = False

    def components(self) -> frozenset[str]:
        named = set()
        if self.seed_bits > 0:
            named.add("seed")
        if self.io_log:
            named.add("io_log")
        if self.preparation:
            named.add("preparation")
        return frozenset(named)


class TrialView:
    """Read-only, scope-enforced handle on one trial's hidden parameter."""

    __slots__ = ("_scope", "_trial_index", "_seed", "_io_log", "_preparation")

    def __init__(
        self,
        scope: Scope,
        trial_index: int,
        seed: BitStream | None = None,
        io_log: tuple | None = None,
        preparation: str | None = None,
    ):
        self._scope = scope
        self._trial_index = trial_index
        self._seed = seed
        self._io_log = io_log
        self._preparation = preparation

    def _rebind(self, trial_index: int, seed: BitStream | None) -> "TrialView":
        # hot-path reuse by the owning experiment/procedure; a view never
        # outlives the trial it was produced for
        self._trial_index = trial_index
        self._seed = seed
        return self

    @property
    def trial_index(self) -> int:
        if not self._scope.trial_index:
            raise ScopeViolation("trial index is outside this extractor's scope")
        return self._trial_index

    def seed_bit(self, j: int) -> int:
        if self._seed is None:
            raise ScopeViolation("this experiment exposes no seed component")
        if not 1 <= j <= self._scope.seed_bits:
            raise ScopeViolation(
                f"seed bit {j} outside declared window 1..{self._scope.seed_bits}"
            )
        return self._seed.bit(j)

    def seed_window(self, lo: int, hi: int) -> BitString:
        """Seed bits lo..hi inclusive, 1-based."""
        if self._seed is None:
            raise ScopeViolation("this experiment exposes no seed component")
        if lo < 1 or hi < lo:
            raise ValueError(f"bad window {lo}..{hi}")
        if hi > self._scope.seed_bits:
            raise ScopeViolation(
                f"seed bit {hi} outside declared window 1..{self._scope.seed_bits}"
            )
        return BitString._trusted(self._seed.window_bits(lo, hi))

    def io_log(self) -> tuple:
        if not self._scope.io_log:
            raise ScopeViolation("I/O log is outside this extractor's scope")
        if self._io_log is None:
            raise ScopeViolation("this experiment exposes no I/O log component")
        return self._io_log

    def preparation(self) -> str:
        if not self._scope.preparation:
            raise ScopeViolation("preparation record is outside this extractor's scope")
        if self._preparation is None:
            raise ScopeViolation("this experiment exposes no preparation component")
        return self._preparation


@dataclass(frozen=True)
class Extractor:
    """Passive finite-information tap on the hidden parameter."""

    id: str
    scope: Scope
    fn: Callable[[TrialView], BitString]
    params: tuple = ()

    def extract(self, view: TrialView) -> BitString:
        out = self.fn(view)
        if not isinstance(out, BitString):
            raise TypeError(f"extractor {self.id!r} must produce a BitString")
        return out


@dataclass(frozen=True)
class Predictor:
    """Total decision procedure: bits in, {0, 1, withheld} out."""

    id: str
    fn: Callable[[BitString, FuelMeter], Prediction]
    fuel: int = field(default_factory=default_fuel)
    params: tuple = ()

    def predict(self, bits: BitString) -> Prediction:
        out = self.fn(bits, FuelMeter(self.fuel))
        if not isinstance(out, Prediction):
            raise TypeError(f"predictor {self.id!r} must produce a Prediction")
        return out


class ExtractorSet:
    """Named catalogue of extractors with a membership policy."""

    def __init__(
        self,
        name: str,
        members: Sequence[Extractor],
        policy: Callable[[Extractor], bool],
        policy_doc: str = "",
    ):
        for member in members:
            if not policy(member):
                raise PolicyViolation(
                    f"extractor {member.id!r} violates the policy of set {name!r}"
                )
        self.name = name
        self.members = tuple(members)
        self.policy = policy
        self.policy_doc = policy_doc

    def admits(self, extractor: Extractor) -> bool:
        return self.policy(extractor)

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


class Experiment(ABC):
    """Repeatable single-bit-outcome process with hidden per-instance state.

    Instances are single-owner: one evaluation run at a time.  Reading a
    trial view never advances hidden state; ``run_trial`` advances it by
    exactly one trial.
    """

    id: str = "experiment"
    components: frozenset[str] = frozenset()

    def trial_view(self, scope: Scope, trial_index: int) -> TrialView:
        return TrialView(scope, trial_index, **self._view_fields())

    @abstractmethod
    def _view_fields(self) -> dict:
        """Current hidden-parameter components (seed/io_log/preparation)."""

    @abstractmethod
    def run_trial(self) -> int:
        """Execute one trial, returning its outcome bit."""


class RepetitionProcedure(ABC):
    """Algorithmic rule preparing the experiment for each next trial."""

    id: str = "repetition"

    @abstractmethod
    def prepare(self, experiment: Experiment, trial_index: int, history) -> None:
        """Reset/arrange the experiment for the given trial."""


class FreshSeedRepetition(RepetitionProcedure):
    """Give each trial its own seed; with no source, defer to the experiment's."""

    id = "fresh-seed"

    def __init__(self, seed_source=None):
        if seed_source is not None and not callable(seed_source):
            seeds = list(seed_source)

            def from_list(i: int) -> BitStream:
                if i > len(seeds):
                    raise ValueError(f"fresh-seed list exhausted at trial {i}")
                return seeds[i - 1]

            seed_source = from_list
        self.seed_source = seed_source

    def prepare(self, experiment, trial_index, history) -> None:
        if self.seed_source is None:
            # experiments without pinnable seeds (e.g. state resets built in)
            # need no action: freshness is inherent
            reset = getattr(experiment, "set_seed", None)
            if reset is not None:
                reset(None)
        else:
            experiment.set_seed(self.seed_source(trial_index))


@dataclass(frozen=True)
class TrialRecord:
    index: int
    extracted: BitString
    prediction: Prediction
    outcome: int
    classification: Classification


@dataclass(frozen=True)
class EvaluationReport:
    k: int
    n_max: int
    n_used: int
    correct: int
    incorrect: int
    withheld: int
    verdict: Verdict
    trials: Optional[tuple[TrialRecord, ...]] = None

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.correct, self.incorrect, self.withheld)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n_max": self.n_max,
            "n_used": self.n_used,
            "counts": {
                "correct": self.correct,
                "incorrect": self.incorrect,
                "withheld": self.withheld,
            },
            "verdict": self.verdict.value,
        }


def classify(prediction: Prediction, outcome: int) -> Classification:
    """Correct iff committed and equal; incorrect iff committed and different."""
    if prediction is Prediction.WITHHELD:
        return Classification.WITHHELD
    committed = 1 if prediction is Prediction.ONE else 0
    return Classification.CORRECT if committed == outcome else Classification.INCORRECT


def check_scope_admissible(experiment: Experiment, extractor: Extractor) -> None:
    missing = extractor.scope.components() - experiment.components
    if missing:
        raise ScopeViolation(
            f"extractor {extractor.id!r} needs {sorted(missing)} "
            f"but experiment {experiment.id!r} exposes {sorted(experiment.components)}"
        )


def single_trial(
    experiment: Experiment,
    extractor: Extractor,
    predictor: Predictor,
    trial_index: int = 1,
) -> TrialRecord:
    """Run one trial against the experiment's current hidden state."""
    check_scope_admissible(experiment, extractor)
    view = experiment.trial_view(extractor.scope, trial_index)
    extracted = extractor.extract(view)
    prediction = predictor.predict(extracted)
    outcome = experiment.run_trial()
    return TrialRecord(
        trial_index, extracted, prediction, outcome, classify(prediction, outcome)
    )


def run_trials(
    experiment: Experiment,
    repetition: RepetitionProcedure,
    extractor: Extractor,
    predictor: Predictor,
    k: int,
    n_max: int,
    record_trials: bool = True,
) -> EvaluationReport:
    """Evaluate the predictor/extractor pair at level (k, n_max).

    Stops at the first incorrect prediction (REFUTED) or the k-th correct
    one (ATTAINED_K); otherwise runs out the budget (INCONCLUSIVE).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if n_max < k:
        raise ValueError("n_max must be >= k")
    check_scope_admissible(experiment, extractor)

    records: list[TrialRecord] = []
    scope = extractor.scope
    prepare = repetition.prepare
    trial_view = experiment.trial_view
    run_one = experiment.run_trial
    # first trial goes through the validating wrappers; later trials take
    # the direct path (outputs are type-stable for deterministic callables)
    extract, extract_fast = extractor.extract, extractor.fn
    predict, predict_fn = predictor.predict, predictor.fn
    fuel = predictor.fuel
    w_prediction, w_class = Prediction.WITHHELD, Classification.WITHHELD
    one = Prediction.ONE
    correct = incorrect = withheld = 0
    n_used = 0
    verdict = Verdict.INCONCLUSIVE
    for i in range(1, n_max + 1):
        prepare(experiment, i, records)
        view = trial_view(scope, i)
        if i == 1:
            extracted = extract(view)
            prediction = predict(extracted)
        else:
            extracted = extract_fast(view)
            prediction = predict_fn(extracted, FuelMeter(fuel))
        outcome = run_one()
        n_used = i
        if prediction is w_prediction:
            cls = w_class
            withheld += 1
            stop = False
        elif (1 if prediction is one else 0) == outcome:
            cls = Classification.CORRECT
            correct += 1
            stop = correct >= k
            if stop:
                verdict = Verdict.ATTAINED_K
        else:
            cls = Classification.INCORRECT
            incorrect += 1
            stop = True
            verdict = Verdict.REFUTED
        if record_trials:
            records.append(TrialRecord(i, extracted, prediction, outcome, cls))
        if stop:
            break
    return EvaluationReport(
        k=k,
        n_max=n_max,
        n_used=n_used,
        correct=correct,
        incorrect=incorrect,
        withheld=withheld,
        verdict=verdict,
        trials=tuple(records) if record_trials else None,
    )


# --- generic extractors and predictors --------------------------------------


def null_extractor() -> Extractor:
    """Extracts nothing at all (the empty bit string)."""
    return Extractor("null", Scope(), lambda view: BitString(""))


def trial_index_extractor() -> Extractor:
    """Emits the 1-based trial number in binary."""
    return Extractor(
        "trial-index",
        Scope(trial_index=True),
        lambda view: BitString(format(view.trial_index, "b")),
    )


def constant_predictor(bit: int, fuel: int | None = None) -> Predictor:
    value = Prediction.from_bit(bit)

    def fn(bits: BitString, meter: FuelMeter) -> Prediction:
        meter.tick()
        return value

    return Predictor(
        f"constant-{bit}", fn, default_fuel() if fuel is None else fuel, params=(bit,)
    )


def withhold_predictor(fuel: int | None = None) -> Predictor:
    def fn(bits: BitString, meter: FuelMeter) -> Prediction:
        meter.tick()
        return Prediction.WITHHELD

    return Predictor("withhold", fn, default_fuel() if fuel is None else fuel)
