"""Statistical checks that sampled level bits reproduce an exponential law."""

from dataclasses import dataclass

import numpy as np

from .expansion import (
    bits_of,
    dequantize_array,
    ks_distance,
    level_profile,
    make_rng,
    mgf_reference,
    sample_words,
)
from .infotheory import DomainError

KS_THRESHOLD = 0.002
# 1.95/sqrt(N) is the KS critical value at p ~ 0.001; samples are floored to
# the 2**l_min grid, which shifts the CDF by at most lam * 2**l_min
KS_CRITICAL = 1.95
MARGINAL_Z = 4.0
CORRELATION_Z = 4.0
MGF_Z = 3.0
MGF_POINTS = (0.25, 0.5)
MIN_SAMPLES = 10_000
# a level needs this many expected minority outcomes before its sample
# correlation is close enough to normal for the 4/sqrt(N) bound
MIN_EXPECTED_MINORITY = 10.0

# validate draws from its own stream namespace, apart from the simulator's
_STREAM = 0x76616C


@dataclass(frozen=True)
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool


def ks_threshold_for(n, spec, rng):
    """Calibrated KS acceptance threshold for ``n`` floored samples."""
    return KS_CRITICAL / np.sqrt(n) + spec.lam * np.ldexp(1.0, rng.l_min)


def draw_expansion_words(profile, trials, blocklength, seed):
    """Concatenate ``trials`` blocks of sampled words, one substream each."""
    return np.concatenate([
        sample_words(profile, blocklength, make_rng(seed, _STREAM, t))
        for t in range(trials)
    ])


def max_level_correlation(bits, include=None, chunk=1 << 17):
    """Largest |Pearson correlation| between any two non-constant levels.

    ``include`` optionally masks which levels take part.
    """
    n, k = bits.shape
    gram = np.zeros((k, k), dtype=np.int64)
    for start in range(0, n, chunk):
        block = bits[start:start + chunk].astype(np.float32)
        gram += np.rint(block.T @ block).astype(np.int64)
    ones = np.diag(gram).astype(np.float64)
    mean = ones / n
    cov = gram / n - np.outer(mean, mean)
    var = mean * (1.0 - mean)
    live = var > 0.0
    if include is not None:
        live &= np.asarray(include, dtype=bool)
    if live.sum() < 2:
        return 0.0
    sub = cov[np.ix_(live, live)] / np.sqrt(np.outer(var[live], var[live]))
    np.fill_diagonal(sub, 0.0)
    return float(np.max(np.abs(sub)))


def validate_expansion(spec, rng, trials=1, blocklength=1_000_000, seed=0,
                       profile=None, ks_threshold=None):
    """Run KS, per-level marginal, pairwise independence and MGF checks.

    Samples come from ``profile`` (default: the exact level profile of
    ``spec``) and are always judged against ``spec``'s exponential law, so
    a perturbed profile acts as a negative control. The KS threshold
    defaults to :func:`ks_threshold_for`, about 0.00195 at a million samples.
    """
    n = trials * blocklength
    if n < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {n}")
    if ks_threshold is None:
        ks_threshold = float(ks_threshold_for(n, spec, rng))
    reference = level_profile(spec, rng)
    profile = reference if profile is None else profile
    words = draw_expansion_words(profile, trials, blocklength, seed)
    values = dequantize_array(words, rng)
    bits = bits_of(words, rng)
    results = []

    ks = ks_distance(values, spec)
    results.append(CheckResult("ks", ks, ks_threshold, ks < ks_threshold))

    freq = bits.sum(axis=0) / n
    q = reference.probs
    se = np.sqrt(q * (1.0 - q) / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, np.abs(freq - q) / se, np.where(freq == q, 0.0, np.inf))
    worst = float(np.max(z))
    results.append(CheckResult("marginal_max_z", worst, MARGINAL_Z, bool(worst <= MARGINAL_Z)))

    minority = n * np.minimum(q, 1.0 - q)
    corr = max_level_correlation(bits, include=minority >= MIN_EXPECTED_MINORITY)
    limit = CORRELATION_Z / np.sqrt(n)
    results.append(CheckResult("pairwise_max_abs_corr", corr, float(limit), bool(corr <= limit)))

    for frac in MGF_POINTS:
        t = frac * spec.lam
        e = np.exp(t * values)
        mean = float(e.mean())
        stderr = float(e.std(ddof=1) / np.sqrt(n))
        zz = abs(mean - mgf_reference(spec, t)) / stderr
        results.append(CheckResult(f"mgf_z_t{frac:g}lam", zz, MGF_Z, bool(zz <= MGF_Z)))
    return results
