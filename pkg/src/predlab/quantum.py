"""Two-dimensional projective measurement, Born and hidden-script modes.

The experiment prepares |psi>, projects onto |phi> and emits the bit.  In
Born mode outcome 1 is drawn with probability |<psi|phi>|^2 from the
splitmix64-derived uniform sequence of the experiment's seed.  In scripted
mode the outcomes are exactly the bits of a hidden computable stream --
the value-definite reading, with the script living inside the hidden
parameter where complementarity-restricted extractors may not reach.

A preparation/projection pair commutes exactly when the overlap is 0 or 1;
anything strictly between realises the complementarity scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bitstreams import BitStream, BitString, splitmix64_value
from .core import (
    Experiment,
    Extractor,
    ExtractorSet,
    Scope,
    null_extractor,
    trial_index_extractor,
)
from .errors import NotNormalised

NORM_TOLERANCE = 1e-12
COMMUTING_TOLERANCE = 1e-9


@dataclass(frozen=True)
class QubitState:
    """Pure state amplitudes over the computational basis; unit norm."""

    amp0: complex
    amp1: complex

    def __post_init__(self):
        norm_sq = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm_sq - 1.0) > NORM_TOLERANCE:
            raise NotNormalised(f"|amp0|^2 + |amp1|^2 = {norm_sq!r}, expected 1")

    @classmethod
    def normalized(cls, amp0: complex, amp1: complex) -> "QubitState":
        norm = math.sqrt(abs(amp0) ** 2 + abs(amp1) ** 2)
        if norm == 0.0:
            raise NotNormalised("cannot normalise the zero vector")
        return cls(amp0 / norm, amp1 / norm)


ZERO = QubitState(1.0 + 0j, 0.0 + 0j)
ONE = QubitState(0.0 + 0j, 1.0 + 0j)
PLUS = QubitState.normalized(1.0, 1.0)
MINUS = QubitState.normalized(1.0, -1.0)


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Projector onto a target state."""

    target: QubitState


def overlap(psi: QubitState, phi: QubitState) -> float:
    """|<psi|phi>| in [0, 1]; unit norms are enforced at construction."""
    inner = psi.amp0.conjugate() * phi.amp0 + psi.amp1.conjugate() * phi.amp1
    return min(1.0, abs(inner))


def is_noncommuting_pair(psi: QubitState, phi: QubitState) -> bool:
    """Projectors fail to commute iff the overlap is strictly inside (0, 1)."""
    ov = overlap(psi, phi)
    return COMMUTING_TOLERANCE < ov < 1.0 - COMMUTING_TOLERANCE


def _collapse(state: QubitState, target: QubitState, outcome: int) -> QubitState:
    if outcome == 1:
        return target
    inner = target.amp0.conjugate() * state.amp0 + target.amp1.conjugate() * state.amp1
    res0 = state.amp0 - inner * target.amp0
    res1 = state.amp1 - inner * target.amp1
    norm = math.sqrt(abs(res0) ** 2 + abs(res1) ** 2)
    if norm < 1e-9:
        # state ~ target yet outcome 0: fall back to the canonical complement
        return QubitState(-target.amp1.conjugate(), target.amp0.conjugate())
    return QubitState(res0 / norm, res1 / norm)


def measure(
    state: QubitState, m: ProjectiveMeasurement, draw: float
) -> tuple[int, QubitState]:
    """Outcome 1 iff draw < |<state|target>|^2; post-state collapses.

    Overlaps within the endpoint tolerance of 0 or 1 snap to certainty, so
    repeating a projector on its own post-state is deterministic despite
    float residue in the collapsed amplitudes.
    """
    if not 0.0 <= draw < 1.0:
        raise ValueError("draw must lie in [0, 1)")
    ov = overlap(state, m.target)
    if ov <= COMMUTING_TOLERANCE:
        p_one = 0.0
    elif ov >= 1.0 - COMMUTING_TOLERANCE:
        p_one = 1.0
    else:
        p_one = ov**2
    outcome = 1 if draw < p_one else 0
    return outcome, _collapse(state, m.target, outcome)


@dataclass(frozen=True)
class BornSource:
    """Outcomes drawn per the usual projection weights, seeded noise."""

    seed: int


@dataclass(frozen=True)
class ScriptedSource:
    """Outcomes read from a hidden, definite bit stream."""

    stream: BitStream


class ECExperiment(Experiment):
    """Prepare |psi>, project onto |phi>, output the bit; repeat from scratch."""

    id = "qubit-ec"

    def __init__(self, psi: QubitState, phi: QubitState, source):
        self.psi = psi
        self.phi = phi
        self.source = source
        self.overlap = overlap(psi, phi)
        self.degenerate = not is_noncommuting_pair(psi, phi)
        self._measurement = ProjectiveMeasurement(phi)
        self._trials_run = 0
        self.last_state: QubitState | None = None
        self._preparation = (
            f"prepare(amp0={psi.amp0!r}, amp1={psi.amp1!r}); "
            f"project(amp0={phi.amp0!r}, amp1={phi.amp1!r}); "
            f"overlap={self.overlap!r}; degenerate={self.degenerate}"
        )
        if isinstance(source, ScriptedSource):
            self.components = frozenset({"preparation", "seed"})
        elif isinstance(source, BornSource):
            self.components = frozenset({"preparation"})
        else:
            raise TypeError("source must be a BornSource or a ScriptedSource")

    def _view_fields(self) -> dict:
        fields = {"preparation": self._preparation}
        if isinstance(self.source, ScriptedSource):
            fields["seed"] = self.source.stream
        return fields

    def run_trial(self) -> int:
        i = self._trials_run + 1
        if isinstance(self.source, BornSource):
            draw = splitmix64_value(self.source.seed, i) / 2.0**64
            outcome, post = measure(self.psi, self._measurement, draw)
        else:
            outcome = self.source.stream.bit(i)
            post = _collapse(self.psi, self.phi, outcome)
        self.last_state = post
        self._trials_run = i
        return outcome


def ec_experiment(psi: QubitState, phi: QubitState, source) -> ECExperiment:
    """Degenerate pairs (overlap 0 or 1) are permitted but flagged."""
    return ECExperiment(psi, phi, source)


def preparation_extractor() -> Extractor:
    """UTF-8 bits of the public preparation record."""

    def fn(view) -> BitString:
        data = view.preparation().encode("utf-8")
        return BitString("".join(format(b, "08b") for b in data))

    return Extractor("preparation", Scope(preparation=True), fn)


def script_reader_extractor(max_bits: int = 1 << 20) -> Extractor:
    """Reads the hidden script at the current trial position.

    Deliberately outside any complementarity-restricted catalogue: it taps
    the definite values themselves, turning the scripted experiment into a
    predictable one.
    """

    def fn(view) -> BitString:
        i = view.trial_index
        return view.seed_window(i, i)

    return Extractor(
        "script-reader", Scope(seed_bits=max_bits, trial_index=True), fn
    )


def complementarity_extractor_set() -> ExtractorSet:
    """Extractors compatible with the complementarity restriction: the
    preparation record and trial index, never the script or noise seed."""
    return ExtractorSet(
        "Xi-complementarity-qubit",
        [preparation_extractor(), trial_index_extractor(), null_extractor()],
        policy=lambda e: e.scope.seed_bits == 0 and not e.scope.io_log,
        policy_doc="may read the preparation record and trial index only",
    )
