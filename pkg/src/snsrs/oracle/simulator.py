"""Event-level Monte Carlo of the protocol, used to check the analytic model.

Every trial samples both parties' intensity, mode and global phase, computes
the mean photon number at each of the 2m detectors, samples clicks and applies
the heralding and mode-rejection rules. Trials are grouped into fixed-size
shards; shard k draws from Philox seeded by SeedSequence(seed, spawn_key=(k,)),
so results do not depend on the number of workers.
"""

import logging
import math
from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from snsrs.config.models import (
    INTENSITIES,
    WINDOW_CLASSES,
    ChannelParams,
    Intensity,
    ProtocolParams,
    RunConfig,
    WindowClass,
    per_arm_transmittance,
)
from snsrs.config.settings import MC_SHARD_SIZE
from snsrs.model.analytic import ExpectedStats
from snsrs.model.detection import click_probability, error_port, port_intensities

logger = logging.getLogger(__name__)

# Detector cells (trials × modes × 2 ports) drawn per vectorized chunk
CHUNK_CELLS = 2**22
SIDES = ("left", "right")
CODE_BIT_CLASSES = frozenset({WindowClass.VV, WindowClass.VZ, WindowClass.ZV, WindowClass.ZZ})


class ConfigMismatchError(ValueError):
    """Raised when observed and expected statistics come from different configurations."""

    pass


@dataclass(frozen=True)
class SenderChoice:
    intensity: Intensity
    mode: int | None  # None for vacuum
    phase: float


@dataclass(frozen=True)
class TrialRecord:
    """One simulated time window."""

    alice: SenderChoice
    bob: SenderChoice
    heralded: tuple[str, int] | None  # (side, mode) of the single click
    accepted: bool
    bit_values: tuple[int, int] | None  # (Alice, Bob) for accepted code-bit windows

    @property
    def window_class(self) -> WindowClass:
        return WindowClass.of(self.alice.intensity, self.bob.intensity)


@dataclass(frozen=True)
class ObservedCounts:
    """Tallies of a Monte Carlo run, binned by window class and mode.

    One-sided and same-mode two-sided windows are binned by the senders' mode;
    vv heraldings by the clicked mode, with the vv window count repeated in
    every mode column. Two-sided windows whose senders picked different modes
    are tallied separately.
    """

    window_tally: np.ndarray  # (16, m)
    heralded_tally: np.ndarray  # (16, m)
    accepted_tally: np.ndarray  # (16, m)
    cross_windows: np.ndarray  # (16,)
    cross_heralded: np.ndarray  # (16,)
    cross_accepted: np.ndarray  # (16,)
    errors: np.ndarray  # (m,) accepted error clicks in the xx phase slice
    slice_windows: np.ndarray  # (m,)
    n_trials: int
    fingerprint: str

    @property
    def m(self) -> int:
        return int(self.window_tally.shape[1])

    @property
    def n_windows(self) -> int:
        return self.n_trials

    @property
    def w_tx(self) -> np.ndarray:
        return self.errors.astype(float)

    def accepted(self, cls: WindowClass) -> np.ndarray:
        return self.accepted_tally[cls.index].astype(float)

    def windows(self, cls: WindowClass) -> np.ndarray:
        return self.window_tally[cls.index].astype(float)

    def merge(self, other: "ObservedCounts") -> "ObservedCounts":
        """Sum two tallies of the same configuration."""
        if other.fingerprint != self.fingerprint or other.m != self.m:
            raise ConfigMismatchError("cannot merge tallies of different configurations")
        return ObservedCounts(
            window_tally=self.window_tally + other.window_tally,
            heralded_tally=self.heralded_tally + other.heralded_tally,
            accepted_tally=self.accepted_tally + other.accepted_tally,
            cross_windows=self.cross_windows + other.cross_windows,
            cross_heralded=self.cross_heralded + other.cross_heralded,
            cross_accepted=self.cross_accepted + other.cross_accepted,
            errors=self.errors + other.errors,
            slice_windows=self.slice_windows + other.slice_windows,
            n_trials=self.n_trials + other.n_trials,
            fingerprint=self.fingerprint,
        )

    def to_frame(self) -> pd.DataFrame:
        """Columns class, mode, windows, heralded, accepted, errors."""
        xx = WindowClass.XX.index
        rows = [
            {
                "class": cls.value,
                "mode": j,
                "windows": int(self.window_tally[cls.index, j]),
                "heralded": int(self.heralded_tally[cls.index, j]),
                "accepted": int(self.accepted_tally[cls.index, j]),
                "errors": int(self.errors[j]) if cls.index == xx else 0,
            }
            for cls in WINDOW_CLASSES
            for j in range(self.m)
        ]
        return pd.DataFrame(
            rows, columns=["class", "mode", "windows", "heralded", "accepted", "errors"]
        )


@dataclass(frozen=True)
class _Draws:
    """Raw samples and outcomes of one vectorized chunk."""

    alice_class: np.ndarray
    bob_class: np.ndarray
    alice_mode: np.ndarray
    bob_mode: np.ndarray
    alice_phase: np.ndarray
    bob_phase: np.ndarray
    cos_delta: np.ndarray
    heralded: np.ndarray
    click_mode: np.ndarray
    click_side: np.ndarray
    accepted: np.ndarray


def _shard_generator(seed: int, shard: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(shard,))))


def _draw_chunk(
    rng: np.random.Generator, n: int, params: ProtocolParams, channel: ChannelParams
) -> _Draws:
    m = params.m
    eta = per_arm_transmittance(channel)
    probs = np.array([params.probability(choice) for choice in INTENSITIES])
    probs = probs / probs.sum()
    weights = params.mode_weights / params.mode_weights.sum()
    mus = np.array([params.intensity(choice) for choice in INTENSITIES])

    alice_class = rng.choice(4, size=n, p=probs)
    bob_class = rng.choice(4, size=n, p=probs)
    alice_mode = rng.choice(m, size=n, p=weights)
    bob_mode = rng.choice(m, size=n, p=weights)
    alice_phase = rng.uniform(0.0, 2.0 * math.pi, size=n)
    bob_phase = rng.uniform(0.0, 2.0 * math.pi, size=n)
    cos_delta = np.cos(alice_phase - bob_phase)

    modes = np.arange(m)
    amp_alice = np.where(
        alice_mode[:, None] == modes, np.sqrt(eta * mus[alice_class])[:, None], 0.0
    )
    amp_bob = np.where(bob_mode[:, None] == modes, np.sqrt(eta * mus[bob_class])[:, None], 0.0)
    left, right = port_intensities(amp_alice, amp_bob, cos_delta[:, None], channel.e_mis)
    p_click = click_probability(np.stack([left, right], axis=2), channel.dark)
    clicks = (rng.random((n, m, 2)) < p_click).reshape(n, 2 * m)

    heralded = clicks.sum(axis=1) == 1
    flat = np.argmax(clicks, axis=1)
    click_mode = flat // 2
    click_side = flat % 2
    alice_ok = (alice_class == 0) | (alice_mode == click_mode)
    bob_ok = (bob_class == 0) | (bob_mode == click_mode)

    return _Draws(
        alice_class=alice_class,
        bob_class=bob_class,
        alice_mode=alice_mode,
        bob_mode=bob_mode,
        alice_phase=alice_phase,
        bob_phase=bob_phase,
        cos_delta=cos_delta,
        heralded=heralded,
        click_mode=click_mode,
        click_side=click_side,
        accepted=heralded & alice_ok & bob_ok,
    )


def _tally(draws: _Draws, params: ProtocolParams, fingerprint: str) -> ObservedCounts:
    m = params.m
    n_classes = len(WINDOW_CLASSES)
    class_index = draws.alice_class * 4 + draws.bob_class
    alice_vac = draws.alice_class == 0
    bob_vac = draws.bob_class == 0
    vacuum = alice_vac & bob_vac
    cross = ~alice_vac & ~bob_vac & (draws.alice_mode != draws.bob_mode)
    per_mode = ~cross

    window_mode = np.where(alice_vac, draws.bob_mode, draws.alice_mode)
    bin_mode = np.where(vacuum, draws.click_mode, window_mode)

    def binned(mask: np.ndarray, mode: np.ndarray) -> np.ndarray:
        keys = class_index[mask] * m + mode[mask]
        return np.bincount(keys, minlength=n_classes * m).reshape(n_classes, m)

    window_tally = binned(per_mode & ~vacuum, window_mode)
    window_tally[WindowClass.VV.index] = int(vacuum.sum())

    xx = class_index == WindowClass.XX.index
    in_slice = xx & ~cross & (1.0 - np.abs(draws.cos_delta) <= params.lambda_slice)
    error = in_slice & draws.accepted & (draws.click_side == error_port(draws.cos_delta))

    return ObservedCounts(
        window_tally=window_tally,
        heralded_tally=binned(per_mode & draws.heralded, bin_mode),
        accepted_tally=binned(per_mode & draws.accepted, bin_mode),
        cross_windows=np.bincount(class_index[cross], minlength=n_classes),
        cross_heralded=np.bincount(class_index[cross & draws.heralded], minlength=n_classes),
        cross_accepted=np.bincount(class_index[cross & draws.accepted], minlength=n_classes),
        errors=np.bincount(draws.alice_mode[error], minlength=m),
        slice_windows=np.bincount(draws.alice_mode[in_slice], minlength=m),
        n_trials=int(draws.alice_class.size),
        fingerprint=fingerprint,
    )


def _shard_sizes(n_trials: int) -> list[int]:
    full, rest = divmod(n_trials, MC_SHARD_SIZE)
    return [MC_SHARD_SIZE] * full + ([rest] if rest else [])


def _iter_draws(
    params: ProtocolParams, channel: ChannelParams, size: int, seed: int, shard: int
) -> Iterator[_Draws]:
    rng = _shard_generator(seed, shard)
    chunk = max(1, CHUNK_CELLS // (2 * params.m))
    done = 0
    while done < size:
        n = min(chunk, size - done)
        yield _draw_chunk(rng, n, params, channel)
        done += n


def _run_shard(task: tuple[ProtocolParams, ChannelParams, int, int, int]) -> ObservedCounts:
    params, channel, size, seed, shard = task
    fingerprint = RunConfig(params, channel).fingerprint()
    counts: ObservedCounts | None = None
    for draws in _iter_draws(params, channel, size, seed, shard):
        tally = _tally(draws, params, fingerprint)
        counts = tally if counts is None else counts.merge(tally)
    assert counts is not None
    return counts


def simulate(
    params: ProtocolParams,
    channel: ChannelParams,
    n_trials: int,
    seed: int,
    workers: int = 1,
) -> ObservedCounts:
    """Simulate ``n_trials`` time windows and tally the outcomes.

    Args:
        params: Source settings
        channel: Channel and detector settings
        n_trials: Number of windows, at least 1
        seed: Root seed
        workers: Worker processes; the result does not depend on it

    Returns:
        ObservedCounts for the run

    Raises:
        ValueError: If n_trials < 1
    """
    if n_trials < 1:
        raise ValueError(f"n_trials = {n_trials} must be >= 1")

    tasks = [
        (params, channel, size, seed, shard)
        for shard, size in enumerate(_shard_sizes(n_trials))
    ]
    logger.info(f"Simulating {n_trials} windows in {len(tasks)} shards (m={params.m})")
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            shards = list(pool.map(_run_shard, tasks))
    else:
        shards = [_run_shard(task) for task in tasks]

    counts = shards[0]
    for shard_counts in shards[1:]:
        counts = counts.merge(shard_counts)
    return counts


def _records_from(draws: _Draws) -> Iterator[TrialRecord]:
    for i in range(draws.alice_class.size):
        alice = INTENSITIES[int(draws.alice_class[i])]
        bob = INTENSITIES[int(draws.bob_class[i])]
        heralded = None
        if draws.heralded[i]:
            heralded = (SIDES[int(draws.click_side[i])], int(draws.click_mode[i]))
        accepted = bool(draws.accepted[i])
        bits = None
        if accepted and WindowClass.of(alice, bob) in CODE_BIT_CLASSES:
            bits = (int(alice is Intensity.Z), int(bob is not Intensity.Z))
        yield TrialRecord(
            alice=SenderChoice(
                intensity=alice,
                mode=None if alice is Intensity.V else int(draws.alice_mode[i]),
                phase=float(draws.alice_phase[i]),
            ),
            bob=SenderChoice(
                intensity=bob,
                mode=None if bob is Intensity.V else int(draws.bob_mode[i]),
                phase=float(draws.bob_phase[i]),
            ),
            heralded=heralded,
            accepted=accepted,
            bit_values=bits,
        )


def simulate_records(
    params: ProtocolParams, channel: ChannelParams, n_trials: int, seed: int
) -> list[TrialRecord]:
    """Per-window records drawn from the same streams as :func:`simulate`."""
    if n_trials < 1:
        raise ValueError(f"n_trials = {n_trials} must be >= 1")
    records: list[TrialRecord] = []
    for shard, size in enumerate(_shard_sizes(n_trials)):
        for draws in _iter_draws(params, channel, size, seed, shard):
            records.extend(_records_from(draws))
    return records


@dataclass(frozen=True)
class BinDeviation:
    quantity: str
    window_class: str
    mode: int
    observed: float
    expected: float
    z: float


def poisson_z(observed: float, expected: float) -> float:
    """Signed normal quantile of the exact Poisson tail beyond ``observed``.

    Counts above the mean use P(X ≥ observed), counts below it P(X ≤ observed);
    a tail probability above one half gives 0.
    """
    if expected <= 0.0:
        return 0.0 if observed == 0 else math.inf
    if observed > expected:
        return max(float(stats.norm.isf(stats.poisson.sf(observed - 1, expected))), 0.0)
    return min(float(stats.norm.ppf(stats.poisson.cdf(observed, expected))), 0.0)


def z_scores(observed: ObservedCounts, expected: ExpectedStats) -> list[BinDeviation]:
    """Exact Poisson z-score of every bin.

    Raises:
        ConfigMismatchError: If the two inputs describe different configurations
    """
    if observed.fingerprint != expected.fingerprint:
        raise ConfigMismatchError("observed and expected statistics use different configurations")
    if observed.m != expected.m:
        raise ConfigMismatchError(f"mode count differs: {observed.m} vs {expected.m}")
    if observed.n_trials != expected.n_windows:
        raise ConfigMismatchError(
            f"expected statistics are for N={expected.n_windows}, "
            f"observed run has {observed.n_trials} trials"
        )

    bins: list[BinDeviation] = []

    def add(quantity: str, label: str, mode: int, obs: float, exp: float) -> None:
        z = poisson_z(obs, exp)
        bins.append(BinDeviation(quantity, label, mode, float(obs), float(exp), z))

    for cls in WINDOW_CLASSES:
        row = cls.index
        expected_accepted = expected.accepted(cls)
        for j in range(observed.m):
            add("windows", cls.value, j, observed.window_tally[row, j], expected.n_lr[row, j])
            add("accepted", cls.value, j, observed.accepted_tally[row, j], expected_accepted[j])
        if cls.is_two_sided:
            add("windows", cls.value, -1, observed.cross_windows[row], expected.cross_windows[row])
            add("accepted", cls.value, -1, observed.cross_accepted[row], 0.0)
    xx = WindowClass.XX.value
    for j in range(observed.m):
        add("slice_windows", xx, j, observed.slice_windows[j], expected.n_delta[j])
        add("errors", xx, j, observed.errors[j], expected.w_tx[j])
    return bins


def compare(
    observed: ObservedCounts, expected: ExpectedStats, sigma_threshold: float
) -> list[BinDeviation]:
    """Bins whose |z| exceeds ``sigma_threshold``; an empty list means agreement."""
    report = [b for b in z_scores(observed, expected) if abs(b.z) > sigma_threshold]
    logger.info(f"Oracle comparison: {len(report)} bins beyond {sigma_threshold} sigma")
    return report


def report_frame(report: list[BinDeviation]) -> pd.DataFrame:
    return pd.DataFrame(
        [vars(b) for b in report],
        columns=["quantity", "window_class", "mode", "observed", "expected", "z"],
    )
