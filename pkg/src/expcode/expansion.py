"""Binary expansion of exponential random variables.

An exponential variable with rate ``lam`` has independent binary digits:
the digit of weight ``2**l`` is 1 with probability ``1 / (1 + exp(lam * 2**l))``.
This module builds those per-level profiles, maps reals to and from
fixed-point level words, draws expansions, and provides the reference
quantities (MGF, KS distance) used to check the digit model empirically.

Level ``l`` is stored at array offset ``l - l_min``.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import expit

from .infotheory import DomainError

# int64 fixed-point words; one bit of headroom for X + N before overflow
MAX_WORD_LEVELS = 62


@dataclass(frozen=True)
class LevelRange:
    """Integer window of levels ``l_min..l_max`` (inclusive)."""

    l_min: int
    l_max: int

    def __post_init__(self):
        if int(self.l_min) != self.l_min or int(self.l_max) != self.l_max:
            raise DomainError("level bounds must be integers")
        object.__setattr__(self, "l_min", int(self.l_min))
        object.__setattr__(self, "l_max", int(self.l_max))
        if self.l_min > self.l_max:
            raise DomainError(f"empty level range [{self.l_min}, {self.l_max}]")

    @classmethod
    def symmetric(cls, l1, l2):
        """Range ``[-l1, l2]`` in the L1/L2 convention."""
        return cls(-l1, l2)

    @property
    def count(self):
        return self.l_max - self.l_min + 1

    @property
    def levels(self):
        return np.arange(self.l_min, self.l_max + 1)

    @property
    def weights(self):
        return np.ldexp(1.0, self.levels)

    def index(self, level):
        if not self.l_min <= level <= self.l_max:
            raise DomainError(f"level {level} outside [{self.l_min}, {self.l_max}]")
        return level - self.l_min

    def __contains__(self, level):
        return self.l_min <= level <= self.l_max

    def __iter__(self):
        return iter(range(self.l_min, self.l_max + 1))


@dataclass(frozen=True)
class ExponentialSpec:
    lam: float

    def __post_init__(self):
        if not self.lam > 0.0 or not np.isfinite(self.lam):
            raise DomainError(f"rate lam must be positive and finite, got {self.lam}")

    @classmethod
    def from_mean(cls, mean):
        if not mean > 0.0:
            raise DomainError(f"mean must be positive, got {mean}")
        return cls(1.0 / mean)

    @property
    def mean(self):
        return 1.0 / self.lam

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(x > 0.0, -np.expm1(-self.lam * np.maximum(x, 0.0)), 0.0)


@dataclass(frozen=True, eq=False)
class BernoulliProfile:
    """Per-level Bernoulli parameters over a level range."""

    range: LevelRange
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        if probs.shape != (self.range.count,):
            raise DomainError(
                f"expected {self.range.count} probabilities, got shape {probs.shape}")
        if np.any(np.isnan(probs)) or np.any(probs < 0.0) or np.any(probs > 1.0):
            raise DomainError("profile probabilities must lie in [0, 1]")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def constant(cls, rng, value):
        return cls(rng, np.full(rng.count, float(value)))

    def __getitem__(self, level):
        return float(self.probs[self.range.index(level)])

    def as_dict(self):
        return {int(l): float(p) for l, p in zip(self.range.levels, self.probs)}

    def perturbed(self, level, delta):
        """Copy with ``probs[level] += delta`` (used for negative controls)."""
        probs = self.probs.copy()
        probs[self.range.index(level)] += delta
        return BernoulliProfile(self.range, np.clip(probs, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class BitWord:
    range: LevelRange
    bits: np.ndarray = field(repr=False)
    overflow: bool = False

    def __post_init__(self):
        bits = np.array(self.bits, dtype=np.uint8)
        if bits.shape != (self.range.count,) or np.any(bits > 1):
            raise DomainError("bits must be a 0/1 vector covering the level range")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_dict(cls, rng, ones, overflow=False):
        bits = np.zeros(rng.count, dtype=np.uint8)
        for level, b in ones.items():
            bits[rng.index(level)] = b
        return cls(rng, bits, overflow)

    def __getitem__(self, level):
        return int(self.bits[self.range.index(level)])

    def as_dict(self):
        return {int(l): int(b) for l, b in zip(self.range.levels, self.bits)}

    def to_int(self):
        """Fixed-point integer value in units of ``2**l_min``."""
        return sum(int(b) << k for k, b in enumerate(self.bits))

    @classmethod
    def from_int(cls, rng, value, overflow=False):
        bits = [(value >> k) & 1 for k in range(rng.count)]
        return cls(rng, bits, overflow)


def level_profile(spec, rng):
    """Digit probabilities ``1 / (1 + exp(lam * 2**l))`` for every level.

    ``lam * 2**l`` is formed with ldexp so it is exact, which makes the
    shift identity (level l+k at rate lam equals level l at rate lam*2**k)
    hold bit-for-bit. Large arguments underflow to an exact 0.
    """
    return BernoulliProfile(rng, expit(-np.ldexp(spec.lam, rng.levels)))


def profile_mean(profile):
    """Expected value ``sum_l 2**l * probs[l]`` of the represented real."""
    return float(np.dot(profile.range.weights, profile.probs))


def truncation_diagnostics(spec, rng):
    """How much of the exponential law a level window loses.

    Returns a dict with the mean deficit ``1/lam - profile_mean`` and the
    probability that a draw reaches ``2**(l_max+1)`` (overflow).
    """
    mean = profile_mean(level_profile(spec, rng))
    return {
        "mean_deficit": spec.mean - mean,
        "overflow_prob": float(np.exp(-np.ldexp(spec.lam, rng.l_max + 1))),
        "resolution": float(np.ldexp(1.0, rng.l_min)),
    }


def quantize(x, rng):
    """Level digits of ``x >= 0``, floor-truncated below ``2**l_min``.

    Inputs at or above ``2**(l_max+1)`` set ``overflow`` and saturate
    every bit to 1.
    """
    if not x >= 0.0:
        raise DomainError(f"quantize needs x >= 0, got {x}")
    if x >= np.ldexp(1.0, rng.l_max + 1):
        return BitWord(rng, np.ones(rng.count, dtype=np.uint8), overflow=True)
    value = math.floor(Fraction(float(x)) * Fraction(2) ** (-rng.l_min))
    return BitWord.from_int(rng, value)


def dequantize(word):
    return float(np.dot(word.range.weights, word.bits))


def quantize_array(x, rng):
    """Vectorized :func:`quantize` to fixed-point integers.

    Returns ``(words, overflow)`` where ``words`` is int64 in units of
    ``2**l_min`` (saturated to all ones on overflow) and ``overflow`` is a
    boolean mask.
    """
    _check_word_width(rng)
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x >= 0.0)):
        raise DomainError("quantize needs x >= 0")
    top = (1 << rng.count) - 1
    overflow = x >= np.ldexp(1.0, rng.l_max + 1)
    scaled = np.floor(np.ldexp(np.where(overflow, 0.0, x), -rng.l_min))
    words = np.where(overflow, top, scaled.astype(np.int64))
    return words.astype(np.int64), overflow


def dequantize_array(words, rng):
    return np.ldexp(np.asarray(words, dtype=np.float64), rng.l_min)


def bits_of(words, rng):
    """Unpack int64 words to a ``(len(words), count)`` uint8 bit matrix."""
    words = np.asarray(words, dtype=np.int64)
    shifts = np.arange(rng.count, dtype=np.int64)
    return ((words[:, None] >> shifts) & 1).astype(np.uint8)


def _check_word_width(rng):
    if rng.count > MAX_WORD_LEVELS:
        raise DomainError(
            f"vectorized words support at most {MAX_WORD_LEVELS} levels, got {rng.count}")


def make_rng(seed, *stream):
    """Generator for substream ``stream`` of a 64-bit ``seed``.

    Distinct stream keys give statistically independent generators, so
    per-trial results do not depend on execution order.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))


def sample_bits(profile, size, rng):
    """``size`` independent expansions as a ``(size, count)`` bit matrix.

    Draws one uniform vector per level, lowest level first.
    """
    out = np.empty((size, profile.range.count), dtype=np.uint8)
    for k, p in enumerate(profile.probs):
        out[:, k] = rng.random(size) < p
    return out


def sample_words(profile, size, rng):
    """Like :func:`sample_bits` but packed to int64 fixed-point words."""
    _check_word_width(profile.range)
    words = np.zeros(size, dtype=np.int64)
    for k, p in enumerate(profile.probs):
        words |= (rng.random(size) < p).astype(np.int64) << k
    return words


def sample_expansion(profile, rng):
    """One expansion drawn level by level; never overflows."""
    return BitWord(profile.range, sample_bits(profile, 1, rng)[0])


def mgf_reference(spec, t):
    """MGF ``lam / (lam - t)`` of Exp(lam), defined for ``t < lam``."""
    if not t < spec.lam:
        raise DomainError(f"MGF of Exp({spec.lam}) undefined at t={t}")
    return spec.lam / (spec.lam - t)


def ks_distance(samples, spec):
    """One-sample Kolmogorov-Smirnov statistic against Exp(lam)."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = x.size
    if n == 0:
        raise DomainError("ks_distance needs at least one sample")
    cdf = spec.cdf(x)
    d_plus = np.max(np.arange(1, n + 1) / n - cdf)
    d_minus = np.max(cdf - np.arange(0, n) / n)
    return float(max(d_plus, d_minus))
