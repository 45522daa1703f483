"""Deterministic keyed random numbers.

All stochastic ingredients (coefficient perturbations, data samples, Brownian
increments) are derived from integer keys through a splitmix64-style hash,
never from a shared stateful generator.  Two properties follow:

* identical keys give bitwise identical draws, independent of call order,
  thread count, or how many other draws happened before;
* draws keyed by structural labels (Fourier mode, bisection node) are stable
  under refinement: enlarging the lattice or halving the time step extends a
  realization instead of resampling it.

Everything works on uint64 ndarrays; wraparound on multiply/add is the
intended semantics.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_FOLD_SEED = np.uint64(0x51AFD54FF9E48D7B)

_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U30)) * _MIX_A
    z = (z ^ (z >> _U27)) * _MIX_B
    return z ^ (z >> _U31)


def _as_u64(x) -> np.ndarray:
    a = np.asarray(x)
    if a.dtype == np.uint64:
        return a
    # negative ints wrap two's-complement, matching a C cast
    return a.astype(np.int64).astype(np.uint64)


def combine(*parts) -> np.ndarray:
    """Hash an ordered tuple of integer arrays into one uint64 array.

    Parts broadcast against each other.  Order matters: combine(a, b) and
    combine(b, a) are unrelated streams.
    """
    # keep everything at least 1-d: numpy warns on scalar uint64 overflow
    # but wraps silently (as intended) for arrays
    arrs = [np.atleast_1d(_as_u64(p)) for p in parts]
    shape = np.broadcast_shapes(*[a.shape for a in arrs])
    out = np.full(shape, _FOLD_SEED, dtype=np.uint64)
    for p in arrs:
        out = _mix(out ^ (p * _GOLDEN + _MIX_B))
    scalar = all(np.ndim(p) == 0 for p in parts)
    return out.reshape(()) if scalar and out.size == 1 else out


def derive_key(*parts) -> int:
    """Scalar convenience wrapper around combine(); returns a Python int."""
    return int(combine(*parts).ravel()[0])


def _uniform(bits: np.ndarray) -> np.ndarray:
    # strictly inside (0, 1): top 53 bits, offset by half an ulp
    return ((bits >> _U11).astype(np.float64) + 0.5) * (2.0 ** -53)


def uniforms(key, labels, salt=0) -> np.ndarray:
    """Uniform(0,1) numbers, one per label, for the given (key, salt)."""
    return _uniform(combine(key, salt, _as_u64(labels)))


def normals(key, labels, salt=0) -> np.ndarray:
    """Standard normal numbers, one per label, via Box-Muller."""
    lab = _as_u64(labels)
    u1 = _uniform(combine(key, 2 * salt, lab))
    u2 = _uniform(combine(key, 2 * salt + 1, lab))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
