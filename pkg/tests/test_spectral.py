"""Tests for lattices, transforms, multipliers, and the fractional norms."""

import numpy as np
import pytest

from smrlab import (
    Lattice,
    LatticeMismatchError,
    ParameterError,
    SpectralField,
    besov_norm,
    bessel_norm,
    bessel_potential,
    constant_field,
    derivative,
    dft,
    eval_at,
    hermitian_defect,
    holder_norm,
    idft,
    lp_blocks,
    lq_norm,
    multiply,
    partition_for,
    radial_cutoff,
    smoothstep5,
)


def simple_field(lattice, seed, decay=2.0):
    """Random real scalar field with power-law spectral decay."""
    rng = np.random.default_rng(seed)
    f = dft(rng.standard_normal((1,) + lattice.shape), lattice)
    w = (1.0 + 4.0 * np.pi**2 * lattice.ksq) ** (-decay / 2)
    return f.with_coeffs(f.coeffs * w)


def grid_sin(lattice, axis=0):
    pts = lattice.grid_points().reshape(lattice.shape + (lattice.d,))
    return np.sin(2 * np.pi * pts[..., axis])[None]


# -- lattice ----------------------------------------------------------------


def test_lattice_counts():
    lat = Lattice(d=2, K=8)
    assert lat.N == 16
    assert lat.shape == (16, 16)
    assert lat.n_modes == 256
    pts = lat.grid_points()
    assert pts.shape == (256, 2)
    assert pts.min() == -0.5
    assert pts.max() == 0.5 - 1.0 / 16


def test_lattice_validation():
    with pytest.raises(ParameterError):
        Lattice(d=0, K=4)
    with pytest.raises(ParameterError):
        Lattice(d=1, K=0)


def test_frequencies_span_cutoff_range():
    lat = Lattice(d=1, K=4)
    k = np.sort(lat.k1)
    assert k.min() == -4 and k.max() == 3
    assert len(k) == lat.N


# -- dft / idft -------------------------------------------------------------


def test_constant_spectrum():
    lat = Lattice(d=2, K=4)
    f = dft(np.full((1,) + lat.shape, 2.5), lat)
    c = f.coeffs.copy()
    origin = (0, 0) + (0,) * lat.d
    assert abs(c[origin] - 2.5) < 1e-13
    c[origin] = 0.0
    assert np.max(np.abs(c)) < 1e-13


def test_sin_spectrum_modes():
    lat = Lattice(d=1, K=8)
    f = dft(grid_sin(lat), lat)
    k = lat.k1
    c = f.coeffs[0, 0]
    # sin(2 pi x) = (e^{2 pi i x} - e^{-2 pi i x}) / 2i
    assert abs(c[k == 1][0] - 1.0 / (2j)) < 1e-13
    assert abs(c[k == -1][0] + 1.0 / (2j)) < 1e-13
    assert np.max(np.abs(c[np.abs(k) != 1])) < 1e-13


@pytest.mark.parametrize("d,K", [(1, 1), (1, 8), (1, 32), (2, 8), (3, 4)])
def test_roundtrip(d, K):
    lat = Lattice(d=d, K=K)
    rng = np.random.default_rng(d * 100 + K)
    vals = rng.standard_normal((2,) + lat.shape)
    back = idft(dft(vals, lat))[:, 0].real
    assert np.max(np.abs(back - vals)) <= 1e-12 * max(1.0, np.max(np.abs(vals)))


def test_dft_shape_mismatch():
    lat = Lattice(d=1, K=8)
    with pytest.raises(ParameterError):
        dft(np.zeros((1, 7)), lat)


def test_field_rejects_nonfinite():
    lat = Lattice(d=1, K=4)
    c = np.zeros((1, 1, 8), dtype=np.complex128)
    c[0, 0, 2] = np.nan
    with pytest.raises(ParameterError):
        SpectralField(lat, c)


def test_real_field_hermitian():
    lat = Lattice(d=2, K=8)
    assert hermitian_defect(simple_field(lat, 3)) < 1e-12


# -- multipliers ------------------------------------------------------------


def test_derivative_of_sin():
    lat = Lattice(d=2, K=16)
    pts = lat.grid_points().reshape(lat.shape + (2,))
    f = dft(np.sin(2 * np.pi * pts[..., 0])[None], lat)
    df = idft(derivative(f, 0))[0, 0].real
    expect = 2 * np.pi * np.cos(2 * np.pi * pts[..., 0])
    assert np.max(np.abs(df - expect)) < 1e-10


def test_derivative_axis_range():
    lat = Lattice(d=2, K=4)
    with pytest.raises(ParameterError):
        derivative(constant_field(lat, 1.0), 2)


def test_bessel_on_eigenfunction():
    lat = Lattice(d=1, K=16)
    f = dft(grid_sin(lat), lat)
    base = idft(f)[0, 0].real
    for s in (-1.0, 0.5, 2.0):
        g = idft(bessel_potential(f, s))[0, 0].real
        assert np.max(np.abs(g - (1 + 4 * np.pi**2) ** (s / 2) * base)) < 1e-10


def test_bessel_inverse_composition():
    lat = Lattice(d=2, K=16)
    f = simple_field(lat, 7)
    g = bessel_potential(bessel_potential(f, 1.3), -1.3)
    rel = np.max(np.abs(g.coeffs - f.coeffs)) / np.max(np.abs(f.coeffs))
    assert rel <= 1e-12


def test_bessel_constant_identity():
    lat = Lattice(d=1, K=8)
    out = idft(bessel_potential(constant_field(lat, 4.0), 1.7))[0, 0].real
    assert np.max(np.abs(out - 4.0)) < 1e-12


def test_multiplier_preserves_hermitian():
    lat = Lattice(d=2, K=8)
    f = simple_field(lat, 11)
    assert hermitian_defect(bessel_potential(f, 0.7)) < 1e-11
    assert hermitian_defect(derivative(f, 1)) < 1e-11


# -- lq_norm ----------------------------------------------------------------


def test_lq_norm_constant():
    lat = Lattice(d=2, K=8)
    c = constant_field(lat, -3.0)
    for q in (1, 2, 4, np.inf):
        assert abs(lq_norm(c, q) - 3.0) < 1e-12


def test_lq_norm_sin():
    lat = Lattice(d=1, K=64)
    f = dft(grid_sin(lat), lat)
    assert abs(lq_norm(f, 2) - 1 / np.sqrt(2)) < 1e-12
    assert abs(lq_norm(f, np.inf) - 1.0) < 1e-3


def test_lq_norm_rejects_small_q():
    lat = Lattice(d=1, K=4)
    with pytest.raises(ParameterError):
        lq_norm(constant_field(lat, 1.0), 0.5)


def test_lq_norm_l2_sequence():
    # two sequence channels whose pointwise l2 magnitude is constant one
    lat = Lattice(d=1, K=16)
    vals = np.zeros((1, 2) + lat.shape)
    pts = lat.grid_points()[:, 0]
    vals[0, 0] = np.sin(2 * np.pi * pts)
    vals[0, 1] = np.cos(2 * np.pi * pts)
    f = dft(vals, lat, n_seq=2)
    for q in (2, 3, np.inf):
        assert abs(lq_norm(f, q) - 1.0) < 1e-12


# -- Littlewood-Paley -------------------------------------------------------


def test_cutoff_profile():
    r = np.array([0.0, 0.5, 1.0, 1.2, 1.5, 2.0])
    chi = radial_cutoff(r)
    assert np.all(chi[r <= 1.0] == 1.0)
    assert np.all(chi[r >= 1.5] == 0.0)
    assert 0.0 < chi[3] < 1.0


def test_smoothstep_endpoints():
    assert smoothstep5(np.array([0.0]))[0] == 0.0
    assert smoothstep5(np.array([1.0]))[0] == 1.0
    assert abs(smoothstep5(np.array([0.5]))[0] - 0.5) < 1e-14


def test_partition_sums_to_one():
    for d, K in [(1, 32), (2, 16), (3, 8)]:
        part = partition_for(Lattice(d=d, K=K))
        assert np.max(np.abs(np.sum(part.psi, axis=0) - 1.0)) < 1e-14


def test_partition_annulus_support():
    lat = Lattice(d=1, K=64)
    part = partition_for(lat)
    r = lat.kabs
    for j in range(1, part.j_top + 1):
        on = part.psi[j] > 0
        assert np.all(r[on] >= 2 ** (j - 1))
        assert np.all(r[on] <= 1.5 * 2**j)


def test_adjacent_blocks_only_overlap():
    part = partition_for(Lattice(d=1, K=64))
    J = part.j_top
    for j in range(J + 1):
        for k in range(j + 2, J + 1):
            assert np.max(np.abs(part.psi[j] * part.psi[k])) == 0.0


def test_lp_reconstruction():
    lat = Lattice(d=2, K=16)
    f = simple_field(lat, 23)
    total = np.sum(lp_blocks(f).blocks, axis=0)
    rel = np.max(np.abs(total - f.coeffs)) / np.max(np.abs(f.coeffs))
    assert rel <= 1e-12


def test_lp_constant():
    lat = Lattice(d=1, K=16)
    dec = lp_blocks(constant_field(lat, 3.0))
    assert abs(dec.blocks[(0, 0, 0) + (0,) * lat.d] - 3.0) < 1e-13
    assert np.max(np.abs(dec.blocks[1:])) < 1e-13


def test_lp_single_mode_neighbors():
    lat = Lattice(d=1, K=64)
    k0, j0 = 16, 4  # |k| = 2^4
    vals = np.cos(2 * np.pi * k0 * lat.grid_points()[:, 0])[None]
    dec = lp_blocks(dft(vals, lat))
    for j in range(dec.blocks.shape[0]):
        if abs(j - j0) > 1:
            assert np.max(np.abs(dec.blocks[j])) < 1e-13
    assert np.max(np.abs(dec.blocks[j0])) > 0.1


def test_distant_blocks_l2_orthogonal():
    lat = Lattice(d=1, K=64)
    dec = lp_blocks(simple_field(lat, 31, decay=1.0))
    J = dec.blocks.shape[0]
    for j in range(J):
        for k in range(j + 2, J):
            assert abs(np.vdot(dec.blocks[j], dec.blocks[k])) == 0.0


def test_lp_lattice_mismatch():
    f = simple_field(Lattice(d=1, K=16), 1)
    part = partition_for(Lattice(d=1, K=32))
    with pytest.raises(LatticeMismatchError):
        lp_blocks(f, part)


# -- fractional norms -------------------------------------------------------


def test_bessel_norm_zero_order_is_l2():
    lat = Lattice(d=2, K=16)
    f = simple_field(lat, 5)
    a, b = bessel_norm(f, 0.0, 2), lq_norm(f, 2)
    assert abs(a - b) <= 1e-10 * b


def test_bessel_norm_single_mode():
    lat = Lattice(d=1, K=32)
    f = dft(grid_sin(lat), lat)
    for s in (-1.0, 0.0, 1.5):
        expect = (1 + 4 * np.pi**2) ** (s / 2) / np.sqrt(2)
        assert abs(bessel_norm(f, s, 2) - expect) < 1e-12


def test_bessel_norm_monotone_in_s():
    lat = Lattice(d=2, K=16)
    for seed in range(5):
        f = simple_field(lat, seed, decay=1.5)
        prev = -1.0
        for s in (-2.0, -0.5, 0.0, 0.5, 2.0):
            cur = bessel_norm(f, s, 2)
            assert cur >= prev
            prev = cur
    f = simple_field(lat, 77, decay=1.5)
    for q in (2, 3, np.inf):
        assert bessel_norm(f, 0.5, q) <= bessel_norm(f, 1.5, q)


def test_besov_equals_bessel_on_low_band():
    # below the first transition ring every LP weight is exactly one, so
    # the s = 0 Besov(2,2) and Bessel norms agree to roundoff
    lat = Lattice(d=1, K=32)
    rng = np.random.default_rng(8)
    pts = lat.grid_points()[:, 0]
    vals = np.zeros((1,) + lat.shape)
    for k in range(4):
        vals[0] += rng.standard_normal() * np.cos(2 * np.pi * k * pts)
        vals[0] += rng.standard_normal() * np.sin(2 * np.pi * (k + 1) * pts)
    f = dft(vals, lat)
    a, b = besov_norm(f, 0.0, 2, 2), bessel_norm(f, 0.0, 2)
    assert abs(a - b) <= 0.1 * b
    assert abs(a - b) <= 1e-10 * b


def test_besov_bessel_envelope():
    # mode-wise comparison for general s: the squared-norm ratio lies
    # between the extremes of sum_j 4^{js} psi_j(k)^2 / (1+4pi^2|k|^2)^s
    lat = Lattice(d=1, K=64)
    part = partition_for(lat)
    k2 = 4 * np.pi**2 * lat.ksq
    for s in (-1.0, 0.0, 0.5, 1.0):
        weights = 4.0 ** (s * np.arange(part.j_top + 1))
        rho = np.tensordot(weights, part.psi**2, axes=(0, 0)) / (1.0 + k2) ** s
        for seed in (1, 2, 3):
            f = simple_field(lat, seed, decay=1.2)
            ratio = (besov_norm(f, s, 2, 2) / bessel_norm(f, s, 2)) ** 2
            assert rho.min() - 1e-9 <= ratio <= rho.max() + 1e-9


def test_besov_p_monotone():
    # l^p over the block index is non-increasing in p
    lat = Lattice(d=1, K=64)
    f = simple_field(lat, 13, decay=1.0)
    n1 = besov_norm(f, 0.5, 2, 1)
    n2 = besov_norm(f, 0.5, 2, 2)
    ninf = besov_norm(f, 0.5, 2, np.inf)
    assert n1 >= n2 >= ninf > 0


def test_holder_norm_constant():
    lat = Lattice(d=1, K=16)
    for t in (0.5, 1.3, 2.7):
        assert abs(holder_norm(constant_field(lat, -2.0), t) - 2.0) < 1e-12


def test_holder_norm_rejects_integer_order():
    f = constant_field(Lattice(d=1, K=16), 1.0)
    for t in (1.0, 2, 0.0, -0.5):
        with pytest.raises(ParameterError):
            holder_norm(f, t)


def test_holder_norm_scaling_with_frequency():
    # a single mode at |k| = 2^j has holder norm about 2^{jt}
    lat = Lattice(d=1, K=64)
    pts = lat.grid_points()[:, 0]
    t = 0.5
    f8 = dft(np.cos(2 * np.pi * 8 * pts)[None], lat)
    f32 = dft(np.cos(2 * np.pi * 32 * pts)[None], lat)
    ratio = holder_norm(f32, t) / holder_norm(f8, t)
    assert 2 ** (2 * t) * 0.8 < ratio < 2 ** (2 * t) * 1.25


# -- products ---------------------------------------------------------------


def test_multiply_exact_on_trig():
    # sin * cos = sin(2.)/2, reproduced exactly when the product fits
    lat = Lattice(d=1, K=32)
    pts = lat.grid_points()[:, 0]
    f = dft(np.sin(2 * np.pi * 3 * pts)[None], lat)
    g = dft(np.cos(2 * np.pi * 3 * pts)[None], lat)
    prod = idft(multiply(f, g))[0, 0].real
    assert np.max(np.abs(prod - 0.5 * np.sin(2 * np.pi * 6 * pts))) < 1e-13


def test_multiply_no_aliasing():
    # an aliased product of mode 6 with itself would fold mode 12 back
    # onto mode -4; the dealiased product truncates it instead
    lat = Lattice(d=1, K=8)
    pts = lat.grid_points()[:, 0]
    f = dft(np.cos(2 * np.pi * 6 * pts)[None], lat)
    c = multiply(f, f).coeffs[0, 0]
    k = lat.k1
    assert abs(c[k == 0][0] - 0.5) < 1e-13
    assert np.max(np.abs(c[k != 0])) < 1e-13


def test_multiply_bilinear():
    lat = Lattice(d=2, K=8)
    f, g, h = (simple_field(lat, s) for s in (1, 2, 3))
    lhs = multiply(f, g).coeffs + multiply(h, g).coeffs
    rhs = multiply(f + h, g).coeffs
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_multiply_lattice_mismatch():
    f = simple_field(Lattice(d=1, K=8), 1)
    g = simple_field(Lattice(d=1, K=16), 1)
    with pytest.raises(LatticeMismatchError):
        multiply(f, g)


def test_eval_at_matches_grid():
    lat = Lattice(d=2, K=8)
    f = simple_field(lat, 17)
    interp = eval_at(f, lat.grid_points())[0, 0].real
    direct = idft(f)[0, 0].real.ravel()
    assert np.max(np.abs(interp - direct)) < 1e-11


def test_eval_at_single_mode():
    lat = Lattice(d=1, K=16)
    f = dft(grid_sin(lat), lat)
    pts = np.array([[0.13], [-0.37], [0.25]])
    vals = eval_at(f, pts)[0, 0].real
    assert np.max(np.abs(vals - np.sin(2 * np.pi * pts[:, 0]))) < 1e-12
