"""Monte-Carlo model of the repeat-until-bright phonon readout protocol.

Each round maps "one phonon" onto the internal spin (sideband transfer
plus carrier flip, both taken as perfect) and then reads the spin: the
true answer is "bright" exactly when the mode held zero phonons entering
the round, and each transfer removes one phonon while any remain.  The
readout lies with probability 1 - f, so a premature bright under-reports
and a missed bright over-reports (with every later round truthfully
bright).  A mode with n phonons and perfect readout therefore reports n
after exactly n dark rounds — the counting that makes the protocol a
number-resolving detector.

Preparation noise is a symmetric +/-1 phonon leak of total weight eps
around the target number.  All randomness flows from numpy SeedSequence
substreams assigned per mode index, so chains reproduce bit-for-bit from
one master seed regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DetectionParams",
    "ModeReadout",
    "prepare_mode_distribution",
    "sample_prepared_occupation",
    "measure_mode",
    "measure_chain",
    "readouts_to_csv",
]

CSV_HEADER = "trial,mode,true_n,reported_n,repetitions,overflow_flag"


@dataclass(frozen=True)
class DetectionParams:
    """Readout fidelity f, preparation leak eps, and the round cap."""

    readout_fidelity: float = 0.99
    prep_error: float = 0.01
    max_repetitions: int = 10

    def __post_init__(self):
        if not 0.5 < self.readout_fidelity <= 1.0:
            raise ValueError("readout_fidelity must be in (0.5, 1]")
        if not 0.0 <= self.prep_error < 1.0:
            raise ValueError("prep_error must be in [0, 1)")
        if self.max_repetitions < 1:
            raise ValueError("max_repetitions must be >= 1")


@dataclass(frozen=True)
class ModeReadout:
    """One mode's readout: the reported phonon number and the repeat count.

    ``repetitions`` counts the dark rounds preceding the terminating
    bright round, so it equals ``reported_n``; on overflow both saturate
    at the round cap and ``overflow`` is set.
    """

    reported_n: int
    repetitions: int
    overflow: bool = False


def prepare_mode_distribution(n_target: int, eps: float) -> dict[int, float]:
    """Phonon-number distribution after imperfect preparation of ``n_target``.

    Weight 1-eps stays on target and eps/2 leaks to each neighbour; leak
    below n=0 folds back onto 0.
    """
    if n_target < 0:
        raise ValueError("n_target must be >= 0")
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must be in [0, 1)")
    dist = {n_target: 1.0 - eps}
    if eps > 0.0:
        dist[n_target + 1] = eps / 2.0
        if n_target == 0:
            dist[0] += eps / 2.0
        else:
            dist[n_target - 1] = eps / 2.0
    return dict(sorted(dist.items()))


def sample_prepared_occupation(n_target: int, eps: float, rng: np.random.Generator) -> int:
    """Draw one phonon number from :func:`prepare_mode_distribution`."""
    u = rng.random()
    acc = 0.0
    for value, weight in prepare_mode_distribution(n_target, eps).items():
        acc += weight
        if u < acc:
            return value
    return value  # numerical tail: u landed within eps of 1


def measure_mode(true_n: int, params: DetectionParams, rng: np.random.Generator) -> ModeReadout:
    """Simulate the repeat-until-bright readout of one mode.

    Rounds run until the first *reported* bright or until
    ``params.max_repetitions`` rounds have elapsed (overflow).
    """
    if true_n < 0:
        raise ValueError("true_n must be >= 0")
    f = params.readout_fidelity
    remaining = true_n
    for rounds_before in range(params.max_repetitions):
        truly_bright = remaining == 0
        honest = rng.random() < f
        if truly_bright == honest:  # reported bright: truth and honesty agree
            return ModeReadout(reported_n=rounds_before, repetitions=rounds_before)
        if remaining > 0:
            remaining -= 1  # the transfer fires regardless of the readout
    cap = params.max_repetitions
    return ModeReadout(reported_n=cap, repetitions=cap, overflow=True)


def measure_chain(occupations, params: DetectionParams, seed) -> list[ModeReadout]:
    """Independent per-mode readouts with substreams spawned from one seed.

    Substream assignment is by mode index, so results are reproducible and
    modes could be simulated in any order (or in parallel) without
    changing the outcome.
    """
    occ = [int(x) for x in occupations]
    if any(n < 0 for n in occ):
        raise ValueError("occupations must be nonnegative")
    streams = np.random.SeedSequence(seed).spawn(len(occ))
    return [
        measure_mode(n, params, np.random.Generator(np.random.PCG64(sub)))
        for n, sub in zip(occ, streams)
    ]


def readouts_to_csv(records, fh) -> None:
    """Write (trial, mode, true_n, ModeReadout) records as CSV with header."""
    fh.write(CSV_HEADER + "\n")
    for trial, mode, true_n, readout in records:
        fh.write(
            f"{trial},{mode},{true_n},{readout.reported_n},"
            f"{readout.repetitions},{int(readout.overflow)}\n"
        )
