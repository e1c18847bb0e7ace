"""Monte Carlo bit-level simulation of the expanded AEN channel.

Signal and noise are held as fixed-point integers in units of
``2**l_min`` so that ``Y = X + N`` is computed with exact binary carries.
Two receivers are measured per level:

* ``carry_as_noise`` compares ``Y_l`` with ``X_l`` directly, so the carry
  from lower levels acts as extra noise;
* ``genie_strip`` removes the true carry into each level (as a receiver
  that has already decoded all lower levels would), leaving
  ``X_l xor N_l``.

Trials draw from independent substreams keyed by ``(seed, trial)`` and
return integer counts, so aggregation is exact and order-independent.
"""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .expansion import (
    BitWord,
    LevelRange,
    _check_word_width,
    make_rng,
    quantize_array,
    sample_words,
)
from .infotheory import DomainError, binary_entropy
from .rates import ChannelSpec, InputChoice, input_profile


class SimMode(enum.Enum):
    GENIE_STRIP = "genie_strip"
    CARRY_AS_NOISE = "carry_as_noise"


@dataclass(frozen=True)
class SimConfig:
    channel: ChannelSpec
    range: LevelRange
    input_choice: InputChoice = InputChoice.C1
    mode: SimMode = SimMode.GENIE_STRIP
    blocklength: int = 10_000
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "input_choice", InputChoice(self.input_choice))
        object.__setattr__(self, "mode", SimMode(self.mode))
        if self.blocklength < 1 or self.trials < 1:
            raise DomainError("blocklength and trials must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        _check_word_width(self.range)

    def shaped_input(self):
        return input_profile(self.channel, self.input_choice, self.range)

    @property
    def active_per_block(self):
        return math.ceil(self.shaped_input().duty * self.blocklength)


@dataclass
class _Counts:
    """Additive per-run tallies; every field is an integer count."""

    joint: np.ndarray          # (levels, 2, 2): [x_l, observed y_l]
    noise_ones: np.ndarray     # (levels,)
    carry_ones: np.ndarray     # (levels,)
    active: int = 0
    symbols: int = 0
    energy_sum: int = 0        # sum of X over all symbols, units 2**l_min
    energy_sq_sum: int = 0
    noise_overflow: int = 0
    carry_out: int = 0

    @classmethod
    def zeros(cls, levels):
        return cls(np.zeros((levels, 2, 2), dtype=np.int64),
                   np.zeros(levels, dtype=np.int64),
                   np.zeros(levels, dtype=np.int64))

    def __add__(self, other):
        return _Counts(
            self.joint + other.joint,
            self.noise_ones + other.noise_ones,
            self.carry_ones + other.carry_ones,
            self.active + other.active,
            self.symbols + other.symbols,
            self.energy_sum + other.energy_sum,
            self.energy_sq_sum + other.energy_sq_sum,
            self.noise_overflow + other.noise_overflow,
            self.carry_out + other.carry_out,
        )


@dataclass
class LevelStats:
    level: int
    empirical_crossover: float
    empirical_mi: float
    sample_count: int
    measured_carry_rate: float
    noise_rate: float


@dataclass
class SimReport:
    config: SimConfig = field(repr=False)
    per_level: list
    overflow_count: int
    noise_overflow_count: int
    carry_out_count: int
    active_symbols: int
    total_symbols: int
    energy_estimate: float
    energy_stderr: float
    duty: float

    def level(self, l):
        return self.per_level[self.config.range.index(l)]

    @property
    def crossovers(self):
        return np.array([s.empirical_crossover for s in self.per_level])

    @property
    def mutual_informations(self):
        return np.array([s.empirical_mi for s in self.per_level])

    @property
    def measured_carry(self):
        return np.array([s.measured_carry_rate for s in self.per_level])

    @property
    def rate_estimate(self):
        """Duty-scaled sum of the per-level empirical mutual informations."""
        return self.duty * float(np.sum(self.mutual_informations))


def empirical_mi(joint_counts):
    """Plug-in mutual information (bits) of a 2x2 table ``counts[x, y]``."""
    t = np.asarray(joint_counts, dtype=np.float64)
    if t.shape != (2, 2) or np.any(t < 0):
        raise DomainError("joint_counts must be a non-negative 2x2 table")
    total = t.sum()
    if total <= 0:
        raise DomainError("joint_counts is empty")
    pxy = t / total
    px = pxy.sum(axis=1)
    py = pxy.sum(axis=0)
    h_joint = -sum(v * math.log2(v) for v in pxy.ravel() if v > 0)
    mi = binary_entropy(px[1]) + binary_entropy(py[1]) - h_joint
    return float(min(max(mi, 0.0), 1.0))


def genie_strip_carries(x_word, n_word):
    """Carry bits into each level of the exact addition ``x + n``.

    Returns ``(carries, y_word)``; ``carries`` is a BitWord whose bit at
    level l is the carry from level l-1 (always 0 at ``l_min``) and
    ``y_word`` holds the sum's level bits with its overflow flag set when a
    carry leaves the top level. ``y_l xor carry_l == x_l xor n_l``.
    """
    if x_word.range != n_word.range:
        raise DomainError(f"word ranges differ: {x_word.range} vs {n_word.range}")
    rng = x_word.range
    carry = 0
    carries = []
    sums = []
    for xb, nb in zip(x_word.bits, n_word.bits):
        carries.append(carry)
        s = int(xb) + int(nb) + carry
        sums.append(s & 1)
        carry = s >> 1
    y = BitWord(rng, sums, overflow=bool(carry) or x_word.overflow or n_word.overflow)
    return BitWord(rng, carries), y


def _run_trial(config, inp, trial):
    rng_range = config.range
    levels = rng_range.count
    n = config.blocklength
    active = math.ceil(inp.duty * n)
    gen = make_rng(config.seed, trial)

    x = np.zeros(n, dtype=np.int64)
    x[:active] = sample_words(inp.profile, active, gen)
    noise = gen.exponential(config.channel.e_n, n)
    nw, n_over = quantize_array(noise, rng_range)

    total = x + nw
    mask = (1 << levels) - 1
    y = total & mask
    carry_out = total > mask
    # bit l of (x+n) ^ x ^ n is the carry into level l
    carries = (total ^ x ^ nw) & mask

    xa, ya, na, ca = x[:active], y[:active], nw[:active], carries[:active]
    observed = ya ^ ca if config.mode is SimMode.GENIE_STRIP else ya

    counts = _Counts.zeros(levels)
    for k in range(levels):
        xb = (xa >> k) & 1
        ob = (observed >> k) & 1
        counts.joint[k] = np.bincount(2 * xb + ob, minlength=4).reshape(2, 2)
        counts.noise_ones[k] = int(np.count_nonzero((na >> k) & 1))
        counts.carry_ones[k] = int(np.count_nonzero((ca >> k) & 1))
    counts.active = active
    counts.symbols = n
    xs = [int(v) for v in x[:active]]
    counts.energy_sum = sum(xs)
    counts.energy_sq_sum = sum(v * v for v in xs)
    counts.noise_overflow = int(np.count_nonzero(n_over))
    counts.carry_out = int(np.count_nonzero(carry_out & ~n_over))
    return counts


def simulate(config, workers=1):
    """Run ``config.trials`` blocks and aggregate per-level statistics.

    ``workers > 1`` runs trials on a thread pool; the report is identical
    for any worker count.
    """
    inp = config.shaped_input()
    levels = config.range.count

    def run(t):
        return _run_trial(config, inp, t)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(config.trials)))
    else:
        parts = [run(t) for t in range(config.trials)]
    counts = _Counts.zeros(levels)
    for part in parts:
        counts = counts + part

    per_level = []
    for k, l in enumerate(config.range):
        joint = counts.joint[k]
        m = int(joint.sum())
        per_level.append(LevelStats(
            level=int(l),
            empirical_crossover=(joint[0, 1] + joint[1, 0]) / m if m else 0.0,
            empirical_mi=empirical_mi(joint) if m else 0.0,
            sample_count=m,
            measured_carry_rate=counts.carry_ones[k] / m if m else 0.0,
            noise_rate=counts.noise_ones[k] / m if m else 0.0,
        ))

    scale = math.ldexp(1.0, config.range.l_min)
    n_sym = counts.symbols
    mean = counts.energy_sum / n_sym
    var = counts.energy_sq_sum / n_sym - mean * mean
    stderr = math.sqrt(max(var, 0.0) / n_sym)
    return SimReport(
        config=config,
        per_level=per_level,
        overflow_count=counts.noise_overflow + counts.carry_out,
        noise_overflow_count=counts.noise_overflow,
        carry_out_count=counts.carry_out,
        active_symbols=counts.active,
        total_symbols=n_sym,
        energy_estimate=mean * scale,
        energy_stderr=stderr * scale,
        duty=inp.duty,
    )
