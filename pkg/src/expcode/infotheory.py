"""Binary information-theoretic primitives.

All logarithms are base 2, so entropies and rates are in bits.
Functions accept scalars or numpy arrays and return the same shape.
"""

import numpy as np

LOG2E = float(np.log2(np.e))


class DomainError(ValueError):
    """Raised when an argument falls outside an operation's domain."""


def _as_prob(p, upper=1.0, name="p"):
    arr = np.asarray(p, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > upper):
        raise DomainError(f"{name} must lie in [0, {upper}], got {p!r}")
    return arr


def _scalarize(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def binary_entropy(p):
    """H(p) = -p log2 p - (1-p) log2 (1-p), with 0 log 0 = 0.

    The (1-p) term goes through log1p so that the result keeps full
    relative precision for p close to 0; for p close to 1 the roles swap
    via symmetry. No explicit linearization threshold is needed.
    """
    p = _as_prob(p)
    # fold onto [0, 0.5] so the log1p branch always handles the large mass
    a = np.minimum(p, 1.0 - p)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(a * np.log2(a) + (1.0 - a) * np.log1p(-a) / np.log(2.0))
    h = np.where(a > 0.0, h, 0.0)
    return _scalarize(np.clip(h, 0.0, 1.0))


def bernoulli_convolve(a, b):
    """Crossover of two cascaded BSCs: a(1-b) + b(1-a)."""
    a = _as_prob(a, name="a")
    b = _as_prob(b, name="b")
    return _scalarize(a + b - 2.0 * a * b)


def bsc_rate(p, q):
    """I(X;Y) of a BSC(q) driven by Bernoulli(p) input: H(p*q) - H(q).

    Both parameters are restricted to [0, 0.5].
    """
    p = _as_prob(p, upper=0.5, name="p")
    q = _as_prob(q, upper=0.5, name="q")
    r = binary_entropy(bernoulli_convolve(p, q)) - binary_entropy(q)
    # H(p*q) >= H(q) holds exactly; clip the last-ulp noise
    return _scalarize(np.maximum(r, 0.0))


def aen_capacity(snr):
    """Capacity log2(1 + SNR) of the additive exponential noise channel."""
    snr = np.asarray(snr, dtype=np.float64)
    if np.any(~(snr > 0.0)):
        raise DomainError(f"snr must be positive, got {snr!r}")
    return _scalarize(np.log2(1.0 + snr))


def db_to_linear(db):
    return _scalarize(10.0 ** (np.asarray(db, dtype=np.float64) / 10.0))


def linear_to_db(x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0.0)):
        raise DomainError("linear value must be positive")
    return _scalarize(10.0 * np.log10(x))
