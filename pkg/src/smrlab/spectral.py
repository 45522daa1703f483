"""Fourier representation of periodic fields and fractional norms.

The domain is the unit torus [-1/2, 1/2]^d with the convention

    f(x) = sum_k c_k exp(2 pi i k.x),    k integer vector,

so the Laplacian acts as multiplication by -4 pi^2 |k|^2.  A Lattice with
per-axis cutoff K carries (2K)^d uniform grid points x_j = -1/2 + j/(2K)
and the same number of modes, k in {0,...,K-1, -K,...,-1} per axis; the
-K row is the Nyquist row.  Real fields correspond to Hermitian spectra
c(-k) = conj(c(k)).

Fields may be vector valued (m components) and additionally sequence
valued (a truncated l^2 index), which is how Hilbert-space-valued
functions are represented throughout.  Pointwise magnitudes always take
the Euclidean norm over components and the l^2 norm over the sequence
index first; L^q integrals use the rectangle rule on the grid, which for
q = 2 coincides with Parseval.

Products of band-limited fields are evaluated on an enlarged grid (the
3/2 zero-padding rule) so that every retained mode of the product is
alias-free; see multiply().

Fractional smoothness is measured three ways, all from the same dyadic
partition of unity on the frequency lattice:

* bessel_norm:  L^q norm after the multiplier (1 + 4 pi^2 |k|^2)^(s/2);
* besov_norm:   l^p over blocks j of 2^(j s) ||psi_j(D) f||_{L^q};
* holder_norm:  sup_j 2^(j t) ||psi_j(D) f||_{L^inf}, t positive and
                non-integer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import LatticeMismatchError, ParameterError

__all__ = [
    "Lattice",
    "SpectralField",
    "LPPartition",
    "LPDecomposition",
    "dft",
    "idft",
    "constant_field",
    "derivative",
    "bessel_potential",
    "multiply",
    "eval_at",
    "lq_norm",
    "lp_blocks",
    "bessel_norm",
    "besov_norm",
    "holder_norm",
    "hermitian_defect",
    "partition_for",
    "smoothstep5",
    "radial_cutoff",
]


def smoothstep5(t):
    """Quintic smoothstep 6t^5 - 15t^4 + 10t^3, clamped to [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def radial_cutoff(r):
    """Radial low-pass profile: 1 for r <= 1, 0 for r >= 3/2, quintic blend."""
    return 1.0 - smoothstep5((np.asarray(r, dtype=np.float64) - 1.0) * 2.0)


class Lattice:
    """Uniform grid / frequency lattice of cutoff K on the torus [-1/2,1/2]^d."""

    def __init__(self, d: int, K: int):
        if d < 1:
            raise ParameterError("lattice dimension d must be >= 1")
        if K < 1:
            raise ParameterError("lattice cutoff K must be >= 1")
        self.d = int(d)
        self.K = int(K)
        self.N = 2 * self.K
        # per-axis integer frequencies in FFT order: 0..K-1, -K..-1
        self.k1 = np.fft.fftfreq(self.N, d=1.0 / self.N).astype(np.int64)
        axes = np.meshgrid(*([self.k1] * self.d), indexing="ij")
        self.ksq = sum(a.astype(np.float64) ** 2 for a in axes)
        self.kabs = np.sqrt(self.ksq)
        self.x1 = -0.5 + np.arange(self.N) / self.N
        self._grid_points = None
        self._pad_maps = None

    @property
    def shape(self):
        return (self.N,) * self.d

    @property
    def n_modes(self):
        return self.N ** self.d

    def grid_points(self) -> np.ndarray:
        """All grid points as an (N^d, d) array, C order."""
        if self._grid_points is None:
            mesh = np.meshgrid(*([self.x1] * self.d), indexing="ij")
            self._grid_points = np.stack([m.ravel() for m in mesh], axis=-1)
        return self._grid_points

    def __eq__(self, other):
        return isinstance(other, Lattice) and (self.d, self.K) == (other.d, other.K)

    def __hash__(self):
        return hash((self.d, self.K))

    def __repr__(self):
        return f"Lattice(d={self.d}, K={self.K})"

    # -- padding bookkeeping for dealiased products ------------------------

    def _padding(self):
        if self._pad_maps is None:
            Np = 3 * self.K
            if Np % 2:
                Np += 1
            keep = np.concatenate(
                [np.arange(self.K), np.arange(self.K + 1, self.N)]
            )  # Nyquist row dropped
            pad = np.concatenate([np.arange(self.K), Np - self.N + np.arange(self.K + 1, self.N)])
            self._pad_maps = (Np, keep, pad)
        return self._pad_maps


def _check_same_lattice(a: "SpectralField", b: "SpectralField"):
    if a.lattice != b.lattice:
        raise LatticeMismatchError(
            f"fields live on different lattices: {a.lattice} vs {b.lattice}"
        )


@dataclass(frozen=True)
class SpectralField:
    """A field given by its Fourier coefficients.

    coeffs has shape (m, max(n_seq,1), *spatial) complex128.  n_seq = 0
    flags a plain (non sequence valued) field; the storage axis still has
    length one.
    """

    lattice: Lattice
    coeffs: np.ndarray
    n_seq: int = 0

    def __post_init__(self):
        c = self.coeffs
        expected_tail = self.lattice.shape
        if c.ndim != 2 + self.lattice.d or c.shape[2:] != expected_tail:
            raise ParameterError(
                f"coefficient array shape {c.shape} does not match lattice {self.lattice}"
            )
        if self.n_seq < 0:
            raise ParameterError("n_seq must be >= 0")
        if c.shape[1] != max(self.n_seq, 1):
            raise ParameterError("sequence axis length must equal max(n_seq, 1)")
        if c.dtype != np.complex128:
            object.__setattr__(self, "coeffs", c.astype(np.complex128))
        if not np.isfinite(self.coeffs.view(np.float64)).all():
            raise ParameterError("field coefficients must be finite")

    @property
    def m(self):
        return self.coeffs.shape[0]

    def with_coeffs(self, coeffs):
        return replace(self, coeffs=coeffs)

    def __add__(self, other):
        _check_same_lattice(self, other)
        return replace(self, coeffs=self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same_lattice(self, other)
        return replace(self, coeffs=self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return replace(self, coeffs=self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return replace(self, coeffs=-self.coeffs)


# ---------------------------------------------------------------------------
# transforms


def _apply_phase(arr: np.ndarray, d: int):
    """Multiply by (-1)^(j_1+...+j_d) along the trailing d axes, in place safe."""
    out = arr
    for ax in range(arr.ndim - d, arr.ndim):
        n = arr.shape[ax]
        sign = np.ones(n)
        sign[1::2] = -1.0
        shape = [1] * arr.ndim
        shape[ax] = n
        out = out * sign.reshape(shape)
    return out


def dft(values: np.ndarray, lattice: Lattice, n_seq: int | None = None) -> SpectralField:
    """Fourier coefficients of grid samples.

    values may have shape (*grid), (m, *grid) or (m, n_seq_axis, *grid);
    the trailing d axes must match the lattice.  Pass n_seq to mark the
    result as sequence valued.
    """
    v = np.asarray(values, dtype=np.complex128)
    d = lattice.d
    if v.ndim == d:
        v = v[None, None]
    elif v.ndim == d + 1:
        v = v[:, None]
    elif v.ndim != d + 2:
        raise ParameterError("values must have d, d+1 or d+2 axes")
    if v.shape[2:] != lattice.shape:
        raise ParameterError(f"grid shape {v.shape[2:]} does not match {lattice}")
    axes = tuple(range(2, 2 + d))
    c = np.fft.fftn(v, axes=axes) / lattice.n_modes
    c = _apply_phase(c, d)
    ns = v.shape[1] if n_seq is None and v.shape[1] > 1 else (n_seq or 0)
    return SpectralField(lattice, np.ascontiguousarray(c), ns)


def idft(field: SpectralField) -> np.ndarray:
    """Grid samples of a field; shape (m, max(n_seq,1), *grid), complex."""
    d = field.lattice.d
    axes = tuple(range(2, 2 + d))
    c = _apply_phase(field.coeffs, d)
    return np.fft.ifftn(c, axes=axes) * field.lattice.n_modes


def constant_field(lattice: Lattice, value, m: int = 1, n_seq: int = 0) -> SpectralField:
    """Field equal to a constant; value broadcasts over (m, max(n_seq,1))."""
    c = np.zeros((m, max(n_seq, 1)) + lattice.shape, dtype=np.complex128)
    origin = (slice(None), slice(None)) + (0,) * lattice.d
    c[origin] = np.broadcast_to(np.asarray(value, dtype=np.complex128), (m, max(n_seq, 1)))
    return SpectralField(lattice, c, n_seq)


# ---------------------------------------------------------------------------
# multipliers


def _axis_view(vec, ax, ndim):
    shape = [1] * ndim
    shape[ax] = len(vec)
    return vec.reshape(shape)


def derivative(field: SpectralField, axis: int) -> SpectralField:
    """Spectral partial derivative along a spatial axis.

    The Nyquist row has no conjugate partner on the lattice, so an odd
    multiplier would break Hermitian symmetry there; it is zeroed, the
    usual pseudo-spectral convention.
    """
    lat = field.lattice
    if not 0 <= axis < lat.d:
        raise ParameterError(f"axis must be in [0, {lat.d})")
    mult = 2j * np.pi * lat.k1.astype(np.float64)
    mult[lat.K] = 0.0
    full_ax = 2 + axis
    return field.with_coeffs(field.coeffs * _axis_view(mult, full_ax, field.coeffs.ndim))


def bessel_potential(field: SpectralField, s: float) -> SpectralField:
    """Apply the multiplier (1 + 4 pi^2 |k|^2)^(s/2)."""
    mult = (1.0 + 4.0 * np.pi**2 * field.lattice.ksq) ** (s / 2.0)
    return field.with_coeffs(field.coeffs * mult)


def hermitian_defect(field: SpectralField) -> float:
    """max |c(-k) - conj(c(k))| over the lattice; 0 for real fields."""
    c = field.coeffs
    d = field.lattice.d
    rev = c
    for ax in range(2, 2 + d):
        rev = np.roll(np.flip(rev, axis=ax), 1, axis=ax)
    return float(np.abs(c - np.conj(rev)).max())


# ---------------------------------------------------------------------------
# dealiased products


def _pad_values(coeffs: np.ndarray, lattice: Lattice) -> np.ndarray:
    """Evaluate a coefficient array on the enlarged (3/2-rule) grid."""
    Np, keep, pad = lattice._padding()
    d = lattice.d
    lead = coeffs.shape[:-d]
    padded = np.zeros(lead + (Np,) * d, dtype=np.complex128)
    src = (Ellipsis,) + np.ix_(*([keep] * d))
    dst = (Ellipsis,) + np.ix_(*([pad] * d))
    padded[dst] = coeffs[src]
    padded = _apply_phase(padded, d)
    axes = tuple(range(padded.ndim - d, padded.ndim))
    return np.fft.ifftn(padded, axes=axes) * (Np**d)


def _values_to_coeffs(values: np.ndarray, lattice: Lattice) -> np.ndarray:
    """Inverse of _pad_values followed by truncation back to the lattice."""
    Np, keep, pad = lattice._padding()
    d = lattice.d
    axes = tuple(range(values.ndim - d, values.ndim))
    cpad = np.fft.fftn(values, axes=axes) / (Np**d)
    cpad = _apply_phase(cpad, d)
    lead = values.shape[:-d]
    out = np.zeros(lead + lattice.shape, dtype=np.complex128)
    dst = (Ellipsis,) + np.ix_(*([keep] * d))
    src = (Ellipsis,) + np.ix_(*([pad] * d))
    out[dst] = cpad[src]
    return out


def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product computed on the dealiased grid.

    Both factors are evaluated on a grid of >= 3K points per axis, so
    every mode retained on the original lattice is free of aliasing for
    band-limited inputs.  Content on the Nyquist row is discarded.  At
    least one factor must be scalar (m = 1, not sequence valued); the
    product keeps the shape of the other factor.
    """
    _check_same_lattice(f, g)
    if f.m != 1 or f.coeffs.shape[1] != 1:
        if g.m == 1 and g.coeffs.shape[1] == 1:
            f, g = g, f
        else:
            raise ParameterError("multiply needs at least one scalar factor")
    vf = _pad_values(f.coeffs[0, 0], f.lattice)
    vg = _pad_values(g.coeffs, g.lattice)
    prod = _values_to_coeffs(vf * vg, g.lattice)
    return SpectralField(g.lattice, prod, g.n_seq)


# ---------------------------------------------------------------------------
# evaluation off the grid


def eval_at(field: SpectralField, points: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric polynomial at arbitrary points.

    points: (n, d).  Returns (m, max(n_seq,1), n) complex values.  Direct
    mode summation; meant for probes and small point sets, not bulk work.
    """
    lat = field.lattice
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != lat.d:
        raise ParameterError(f"points must have {lat.d} columns")
    mats = [np.exp(2j * np.pi * np.outer(pts[:, a], lat.k1)) for a in range(lat.d)]
    c = field.coeffs
    if lat.d == 1:
        return np.einsum("msk,pk->msp", c, mats[0])
    if lat.d == 2:
        return np.einsum("mskl,pk,pl->msp", c, mats[0], mats[1])
    if lat.d == 3:
        return np.einsum("msklr,pk,pl,pr->msp", c, mats[0], mats[1], mats[2])
    out = np.empty(c.shape[:2] + (len(pts),), dtype=np.complex128)
    for i, p in enumerate(pts):
        phase = mats[0][i]
        for a in range(1, lat.d):
            phase = np.multiply.outer(phase, mats[a][i])
        out[:, :, i] = np.tensordot(c, phase, axes=lat.d)
    return out


# ---------------------------------------------------------------------------
# norms


def _point_magnitude(field: SpectralField) -> np.ndarray:
    """sqrt(sum over components and sequence entries of |f|^2) on the grid."""
    v = idft(field)
    return np.sqrt(np.sum(np.abs(v) ** 2, axis=(0, 1)))


def lq_norm(field: SpectralField, q) -> float:
    """L^q norm by grid quadrature (rectangle rule, cell volume 1/N^d)."""
    if q != np.inf and q < 1:
        raise ParameterError("L^q norm requires q >= 1 or q = inf")
    mag = _point_magnitude(field)
    if q == np.inf:
        return float(mag.max())
    return float(np.mean(mag**q) ** (1.0 / q))


class LPPartition:
    """Dyadic partition of unity on the frequency lattice.

    psi_0 supported in the ball |k| <= 3/2, psi_j (j >= 1) in the annulus
    2^(j-1) <= |k| <= (3/2) 2^j, and sum_j psi_j = 1 at every lattice
    frequency.  Blocks two apart have disjoint supports.
    """

    def __init__(self, lattice: Lattice):
        self.lattice = lattice
        r = lattice.kabs
        rmax = float(r.max())
        self.j_top = max(int(np.ceil(np.log2(max(rmax, 1.0)))), 0)
        chi = [radial_cutoff(r / 2.0**j) for j in range(self.j_top + 1)]
        psi = [chi[0]]
        for j in range(1, self.j_top + 1):
            psi.append(chi[j] - chi[j - 1])
        self.psi = np.stack(psi)  # (j_top+1, *grid)
        self.Psi = np.cumsum(self.psi, axis=0)

    @property
    def n_blocks(self):
        return self.j_top + 1


_PARTITIONS: dict[tuple[int, int], LPPartition] = {}


def partition_for(lattice: Lattice) -> LPPartition:
    key = (lattice.d, lattice.K)
    part = _PARTITIONS.get(key)
    if part is None:
        part = _PARTITIONS[key] = LPPartition(lattice)
    return part


@dataclass(frozen=True)
class LPDecomposition:
    """Blocks psi_j(D) f for j = 0..j_top; sums back to f exactly."""

    lattice: Lattice
    blocks: np.ndarray  # (j_top+1, m, max(n_seq,1), *grid)
    n_seq: int

    def field(self, j: int) -> SpectralField:
        return SpectralField(self.lattice, self.blocks[j], self.n_seq)

    @property
    def n_blocks(self):
        return self.blocks.shape[0]

    def reconstruct(self) -> SpectralField:
        return SpectralField(self.lattice, self.blocks.sum(axis=0), self.n_seq)


def lp_blocks(field: SpectralField, partition: LPPartition | None = None) -> LPDecomposition:
    part = partition or partition_for(field.lattice)
    if part.lattice != field.lattice:
        raise LatticeMismatchError("partition built for a different lattice")
    blocks = field.coeffs[None] * part.psi[:, None, None]
    return LPDecomposition(field.lattice, blocks, field.n_seq)


def bessel_norm(field: SpectralField, s: float, q) -> float:
    """Fractional Sobolev (Bessel potential) norm H^{s,q}."""
    return lq_norm(bessel_potential(field, s), q)


def besov_norm(field: SpectralField, s: float, q, p) -> float:
    """Besov norm: l^p over j of 2^(j s) ||psi_j(D) f||_{L^q}."""
    if p != np.inf and p < 1:
        raise ParameterError("Besov norm requires p >= 1 or p = inf")
    dec = lp_blocks(field)
    vals = np.array(
        [2.0 ** (j * s) * lq_norm(dec.field(j), q) for j in range(dec.n_blocks)]
    )
    if p == np.inf:
        return float(vals.max())
    return float(np.sum(vals**p) ** (1.0 / p))


def holder_norm(field: SpectralField, t: float) -> float:
    """Zygmund-Holder norm sup_j 2^(j t) ||psi_j(D) f||_{L^inf}.

    Defined for positive non-integer t only; at integer t this quantity
    does not describe the classical space, so it is rejected.
    """
    if t <= 0:
        raise ParameterError("Holder exponent t must be positive")
    if abs(t - round(t)) < 1e-9:
        raise ParameterError("Holder exponent t must be non-integer")
    dec = lp_blocks(field)
    return float(
        max(2.0 ** (j * t) * lq_norm(dec.field(j), np.inf) for j in range(dec.n_blocks))
    )
