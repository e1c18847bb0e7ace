"""Achievable rates of expansion coding over the AEN channel.

Two receivers are modelled. One treats the carry produced at each level
as extra Bernoulli noise on the next level (rate R1); the other decodes
levels from the least significant upward and cancels carries (rate R2).
Input bit profiles come from the binary expansion of an exponential law,
either with mean ``E_X + E_N`` on a duty-cycled fraction of symbols (C1)
or with mean ``E_X`` on every symbol (C2).
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .expansion import (
    BernoulliProfile,
    ExponentialSpec,
    LevelRange,
    level_profile,
    profile_mean,
)
from .infotheory import LOG2E, DomainError, aen_capacity, bernoulli_convolve, bsc_rate

# Lemma constants for the normalized noise profile 1/(1+e^(2^l))
C1_ENTROPY = 3.0 * LOG2E
C2_ENTROPY = LOG2E

_INTEGER_TOL = 1e-9


class PreconditionError(DomainError):
    pass


@dataclass(frozen=True)
class ChannelSpec:
    e_x: float
    e_n: float = 1.0

    def __post_init__(self):
        if not (self.e_x > 0.0 and self.e_n > 0.0):
            raise DomainError(f"energies must be positive, got E_X={self.e_x}, E_N={self.e_n}")

    @classmethod
    def from_snr(cls, snr, e_n=1.0):
        return cls(snr * e_n, e_n)

    @classmethod
    def from_gamma(cls, gamma, e_n=1.0):
        """Channel with ``SNR = 2**gamma - 1``."""
        return cls.from_snr(2.0 ** gamma - 1.0, e_n)

    @property
    def snr(self):
        return self.e_x / self.e_n

    @property
    def gamma(self):
        return math.log2(1.0 + self.snr)

    @property
    def capacity(self):
        return aen_capacity(self.snr)

    def integer_gamma(self):
        """``gamma`` as an int, or None when it is not integral."""
        g = self.gamma
        r = round(g)
        return int(r) if abs(g - r) <= _INTEGER_TOL else None


class InputChoice(enum.Enum):
    C1 = "c1"
    C2 = "c2"


@dataclass(frozen=True)
class ShapedInput:
    profile: BernoulliProfile
    duty: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.duty <= 1.0:
            raise DomainError(f"duty must lie in (0, 1], got {self.duty}")
        if np.any(self.profile.probs > 0.5):
            raise DomainError("input bit probabilities must not exceed 0.5")

    @property
    def energy(self):
        """Average input energy ``duty * sum 2**l p_l``."""
        return self.duty * profile_mean(self.profile)


@dataclass(frozen=True, eq=False)
class RateBreakdown:
    levels: np.ndarray
    rates: np.ndarray
    total: float
    capacity: float
    duty: float

    @property
    def gap(self):
        return self.capacity - self.total

    @property
    def per_level(self):
        return [(int(l), float(r)) for l, r in zip(self.levels, self.rates)]


@dataclass(frozen=True)
class GapCertificate:
    epsilon: float
    c_const: float
    gamma: int
    L: int
    achieved_gap: float
    c_hat: float

    @property
    def gamma_required(self):
        return 2.0 * self.c_const

    @property
    def l_required(self):
        return self.c_const

    @property
    def preconditions_met(self):
        return self.gamma >= self.gamma_required and self.L >= self.l_required

    @property
    def certified(self):
        """True when the preconditions hold and the computed gap is within epsilon.

        None when the preconditions fail (nothing is asserted then).
        """
        if not self.preconditions_met:
            return None
        return self.achieved_gap <= self.epsilon


def noise_profile(channel, rng):
    """Level profile of the channel's Exp(E_N) noise."""
    return level_profile(ExponentialSpec.from_mean(channel.e_n), rng)


def input_profile(channel, choice, rng):
    choice = InputChoice(choice)
    if choice is InputChoice.C1:
        total = channel.e_x + channel.e_n
        return ShapedInput(level_profile(ExponentialSpec.from_mean(total), rng),
                           duty=channel.e_x / total)
    return ShapedInput(level_profile(ExponentialSpec.from_mean(channel.e_x), rng), duty=1.0)


def effective_noise_profile(p, q):
    """Carry-inflated noise ``qt_l = q_l (*) (p_{l-1} qt_{l-1})``.

    No carry enters the lowest level, so ``qt_{l_min} = q_{l_min}``.
    """
    if p.range != q.range:
        raise DomainError(f"profile ranges differ: {p.range} vs {q.range}")
    qt = np.empty_like(q.probs)
    qt[0] = q.probs[0]
    for k in range(1, qt.size):
        qt[k] = bernoulli_convolve(q.probs[k], p.probs[k - 1] * qt[k - 1])
    return BernoulliProfile(q.range, qt)


def carry_profile(p, q):
    """Modelled carry probability ``c_l = p_{l-1} qt_{l-1}`` (0 at l_min)."""
    qt = effective_noise_profile(p, q)
    c = np.zeros_like(qt.probs)
    c[1:] = p.probs[:-1] * qt.probs[:-1]
    return BernoulliProfile(q.range, c)


def _breakdown(inp, noise, capacity):
    if inp.profile.range != noise.range:
        raise DomainError(f"profile ranges differ: {inp.profile.range} vs {noise.range}")
    rates = bsc_rate(inp.profile.probs, noise.probs)
    return RateBreakdown(
        levels=noise.range.levels,
        rates=rates,
        total=inp.duty * float(np.sum(rates)),
        capacity=float(capacity),
        duty=inp.duty,
    )


def rate_carryover_as_noise(inp, q, capacity):
    """R1: per-level BSC rates against the carry-inflated noise."""
    return _breakdown(inp, effective_noise_profile(inp.profile, q), capacity)


def rate_carryover_decoded(inp, q, capacity):
    """R2: per-level BSC rates against the bare noise digits."""
    return _breakdown(inp, q, capacity)


def channel_rates(channel, choice, rng):
    """(R1, R2) breakdowns for one channel, input choice and window."""
    inp = input_profile(channel, choice, rng)
    q = noise_profile(channel, rng)
    cap = channel.capacity
    return rate_carryover_as_noise(inp, q, cap), rate_carryover_decoded(inp, q, cap)


def entropy_bounds(level):
    """Tail bounds on H(q_l) for q_l = 1/(1+e^(2^l)).

    Returns ``(lower, upper)``; the upper bound is given for ``level >= 0``
    and the lower bound for ``level <= 0``, otherwise None.
    """
    level = int(level)
    upper = C1_ENTROPY * 2.0 ** -level if level >= 0 else None
    lower = 1.0 - C2_ENTROPY * 2.0 ** level if level <= 0 else None
    return lower, upper


def gap_constant(epsilon):
    """``c = log2(16 log2(e) / epsilon)``."""
    if not epsilon > 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    return math.log2(16.0 * LOG2E / epsilon)


def minimal_gap_parameters(epsilon):
    """Smallest integers ``(gamma, L)`` with ``gamma >= 2c`` and ``L >= c``."""
    c = gap_constant(epsilon)
    return max(1, math.ceil(2.0 * c)), max(1, math.ceil(c))


def gap_certificate(epsilon, channel, L):
    """Compute the high-SNR gap of the C1/decoded-carry scheme.

    Noise is normalized to unit mean, so only the channel's SNR matters and
    ``gamma = log2(1+SNR)`` must be an integer. The rate is summed over
    levels ``-L .. L+gamma`` and scaled by ``SNR/(1+SNR)``.
    """
    c = gap_constant(epsilon)
    gamma = channel.integer_gamma()
    if gamma is None or gamma < 1:
        raise PreconditionError(
            f"gamma = log2(1+SNR) = {channel.gamma!r} is not a positive integer; "
            "the level shift between input and noise profiles must be whole")
    L = int(L)
    if L < 1:
        raise PreconditionError(f"L must be at least 1, got {L}")
    normalized = ChannelSpec.from_gamma(gamma)
    rng = LevelRange(-L, L + gamma)
    inp = input_profile(normalized, InputChoice.C1, rng)
    r2 = rate_carryover_decoded(inp, noise_profile(normalized, rng), float(gamma))
    return GapCertificate(
        epsilon=float(epsilon), c_const=c, gamma=gamma, L=L,
        achieved_gap=r2.gap, c_hat=r2.total)


def optimal_input_spec(channel):
    """Mixture parameters of the capacity-achieving input.

    Returns ``(weight of the atom at 0, mean of the exponential part)``.
    """
    total = channel.e_x + channel.e_n
    return channel.e_n / total, total


def default_window(channel, total_levels):
    """Window ``[-L_lo, gamma_up + L_hi]`` holding ``total_levels`` levels.

    ``gamma_up = ceil(log2(1+SNR))``; the remaining levels are split evenly
    around the noise and signal scales, any odd one going below.
    """
    total_levels = int(total_levels)
    g = channel.integer_gamma()
    g = g if g is not None else math.ceil(channel.gamma)
    spare = total_levels - 1 - g
    if spare < 0:
        raise DomainError(
            f"{total_levels} levels cannot cover gamma={g}; use at least {g + 1}")
    lo = (spare + 1) // 2
    hi = spare - lo
    return LevelRange(-lo, g + hi)
