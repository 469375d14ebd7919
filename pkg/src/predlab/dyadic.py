"""Left-shift (dyadic map) experiments over infinite bit seeds.

A trial of the k-shift experiment reveals bit k+1 of that trial's seed:
the system evolves for k steps, then the leading bit is read off.  With a
window extractor that can see position k+1 the identity predictor wins
every trial; against extractors limited to the first l <= k positions a
constructive adversary forces every committing predictor wrong by fixing
bit k+1 to the negation of whatever the predictor answers.
"""

from __future__ import annotations

from .bitstreams import BitStream, BitString, PeriodicStream
from .core import (
    Experiment,
    Extractor,
    FuelMeter,
    Prediction,
    Predictor,
    RepetitionProcedure,
    Scope,
    TrialView,
    default_fuel,
    trial_index_extractor,
)
from .errors import ScopeTooWide


class DyadicExperiment(Experiment):
    """Outcome of trial i = bit k+1 of seed stream i."""

    components = frozenset({"seed"})

    def __init__(self, k: int, seed_source):
        if k < 1:
            raise ValueError("shift count k must be >= 1")
        self.k = k
        self.id = f"dyadic-{k}"
        if isinstance(seed_source, BitStream):
            stream = seed_source
            seed_source = lambda i: stream
        self._source = seed_source
        self._override: BitStream | None = None
        self._trials_run = 0

    def set_seed(self, stream: BitStream | None) -> None:
        """Pin (or clear) the seed used for the next trial."""
        self._override = stream

    def _current_seed(self) -> BitStream:
        if self._override is not None:
            return self._override
        return self._source(self._trials_run + 1)

    def _view_fields(self) -> dict:
        return {"seed": self._current_seed()}

    def trial_view(self, scope: Scope, trial_index: int) -> TrialView:
        return TrialView(scope, trial_index, seed=self._current_seed())

    def run_trial(self) -> int:
        outcome = self._current_seed().bit(self.k + 1)
        self._trials_run += 1
        self._override = None
        return outcome


def dyadic_experiment(k: int, seed_source) -> DyadicExperiment:
    """seed_source: a BitStream reused every trial, or a trial-index rule."""
    return DyadicExperiment(k, seed_source)


def window_extractor(lo: int, hi: int) -> Extractor:
    """Reads seed bits lo..hi (1-based, inclusive); scope is exactly 1..hi."""
    if lo < 1 or hi < lo:
        raise ValueError(f"bad window {lo}..{hi}")
    return Extractor(
        f"window-{lo}-{hi}",
        Scope(seed_bits=hi),
        lambda view: view.seed_window(lo, hi),
        params=(lo, hi),
    )


def identity_predictor(fuel: int | None = None) -> Predictor:
    """Passes the last input bit through; withholds on empty input."""

    def fn(bits: BitString, meter: FuelMeter) -> Prediction:
        meter.tick()
        if len(bits) == 0:
            return Prediction.WITHHELD
        return Prediction.from_bit(int(bits.bits[-1]))

    return Predictor("identity", fn, default_fuel() if fuel is None else fuel)


def majority_predictor(fuel: int | None = None) -> Predictor:
    """Majority bit of the window; withholds on ties and on empty input."""

    def fn(bits: BitString, meter: FuelMeter) -> Prediction:
        meter.tick(len(bits) + 1)
        if len(bits) == 0:
            return Prediction.WITHHELD
        ones = bits.bits.count("1")
        zeros = len(bits) - ones
        if ones == zeros:
            return Prediction.WITHHELD
        return Prediction.from_bit(int(ones > zeros))

    return Predictor("majority", fn, default_fuel() if fuel is None else fuel)


def precision_limited_family(l: int):
    """All window extractors confined to seed bits 1..l, plus the index tap."""
    from .core import ExtractorSet

    if l < 1:
        raise ValueError("precision bound must be >= 1")
    members = [
        window_extractor(lo, hi) for hi in range(1, l + 1) for lo in range(1, hi + 1)
    ]
    members.append(trial_index_extractor())
    return ExtractorSet(
        f"precision-limited-{l}",
        members,
        policy=lambda e: (
            e.scope.seed_bits <= l and not e.scope.io_log and not e.scope.preparation
        ),
        policy_doc=f"reads at most seed bits 1..{l} (plus the trial index)",
    )


class AdversarialRepetition(RepetitionProcedure):
    """Per trial: show the predictor the visible seed window, then pick the
    hidden outcome bit to contradict it.

    Seed bits 1..l carry a fixed base pattern (all zeros by default), bit
    k+1 is the negation of the predictor's committed answer (0 when it
    withholds), and everything else is 0.  The extractor's view is never
    tampered with: only a bit beyond its scope is chosen adversarially.
    """

    id = "adversarial"

    def __init__(
        self,
        predictor: Predictor,
        extractor: Extractor,
        l: int,
        k: int,
        base: str | BitString | None = None,
    ):
        if extractor.scope.seed_bits > l:
            raise ScopeTooWide(
                f"extractor {extractor.id!r} reads up to seed bit "
                f"{extractor.scope.seed_bits}, beyond the precision bound {l}"
            )
        if l > k:
            raise ScopeTooWide(
                f"precision bound {l} must not exceed the shift count {k}: "
                "the adversary may only choose bits the extractor cannot see"
            )
        base = "0" * l if base is None else str(base)
        if len(base) != l:
            raise ValueError(f"base pattern must supply exactly {l} bits")
        self.predictor = predictor
        self.extractor = extractor
        self.l = l
        self.k = k
        self.base = base
        self._candidate = PeriodicStream(head=base, cycle="0")
        self._constructed: dict[int, PeriodicStream] = {}
        self._view = TrialView(extractor.scope, 0, seed=self._candidate)
        # predictors are deterministic by contract, so answers to repeated
        # extraction results may be replayed
        self._answers: dict[str, Prediction] = {}
        # with the trial index outside the extractor's scope, its view of the
        # fixed candidate cannot change between trials (scope enforcement),
        # so the whole query collapses to one construction
        self._frozen: PeriodicStream | None = None

    def prepare(self, experiment, trial_index: int, history) -> None:
        if self._frozen is not None:
            experiment.set_seed(self._frozen)
            return
        view = self._view._rebind(trial_index, self._candidate)
        extracted = self.extractor.extract(view)
        answer = self._answers.get(extracted.bits)
        if answer is None:
            answer = self.predictor.predict(extracted)
            self._answers[extracted.bits] = answer
        if answer is Prediction.WITHHELD:
            forced = 0
        else:
            forced = 0 if answer is Prediction.ONE else 1
        stream = self._constructed.get(forced)
        if stream is None:
            head = self.base + "0" * (self.k - self.l) + str(forced)
            stream = PeriodicStream(head=head, cycle="0")
            self._constructed[forced] = stream
        if not self.extractor.scope.trial_index:
            self._frozen = stream
        experiment.set_seed(stream)


def adversarial_repetition(
    predictor: Predictor,
    extractor: Extractor,
    l: int,
    k: int,
    base: str | BitString | None = None,
) -> AdversarialRepetition:
    return AdversarialRepetition(predictor, extractor, l, k, base)
