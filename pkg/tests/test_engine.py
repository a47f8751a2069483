import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpnfft.core import OversampledGrid, dft_direct_equispaced, make_index_set, ndft_direct_forward
from hpnfft.engine import (
    NFFT,
    NfftConfig,
    fft_oversampled,
    interpolate,
    nfft_adjoint,
    nfft_forward,
    scale,
    spread,
    subdivide,
)
from hpnfft.errors import ShapeError
from hpnfft.windows import WindowKind, fourier_weights, window_spatial

from conftest import rel


def naive_spread(x, f, cfg):
    """Gather oracle: loop over lattice sites, summing every point's window."""
    n = cfg.grid_shape
    grid = np.zeros(n, dtype=complex)
    for l in np.ndindex(*n):
        w = np.ones(len(f))
        for t in range(cfg.d):
            diff = x[:, t] - l[t] / n[t]
            diff -= np.rint(diff)  # nearest periodic image
            w = w * window_spatial(cfg.window, t, diff)
        grid[l] = np.dot(w, f)
    return grid


def random_points(rng, M, d):
    return rng.uniform(-0.5, 0.5, (M, d)), rng.normal(size=M) + 1j * rng.normal(size=M)


def test_config_create_and_grid_shape():
    cfg = NfftConfig.create((16, 8), "gaussian", 2.0, 4)
    assert cfg.grid_shape == (32, 16)
    assert cfg.window.kind is WindowKind.GAUSSIAN
    assert cfg.same_transform(NfftConfig.create((16, 8), "gaussian", 2.0, 4, workers=3))
    assert not cfg.same_transform(NfftConfig.create((16, 8), "gaussian", 2.0, 5))


def test_spread_no_points():
    cfg = NfftConfig.create((8, 8), m=3)
    g = spread(np.zeros((0, 2)), np.zeros(0), cfg)
    assert g.layout == "spatial" and not np.any(g.values)


def test_spread_point_on_node_is_stencil():
    cfg = NfftConfig.create((8,), "b_spline", 2.0, 3)
    n = cfg.grid_shape[0]
    x = np.array([[5 / n]])
    g = spread(x, [1.0], cfg).values
    expected = np.zeros(n)
    for j in range(-3, 4):
        expected[(5 + j) % n] = window_spatial(cfg.window, 0, -j / n)
    assert np.allclose(g, expected, rtol=0, atol=1e-16)


@pytest.mark.parametrize("kind", list(WindowKind))
def test_spread_matches_gather_oracle(kind):
    rng = np.random.default_rng(21)
    cfg = NfftConfig.create((8, 6), kind, 2.0, 3)
    x, f = random_points(rng, 64, 2)
    assert rel(spread(x, f, cfg).values, naive_spread(x, f, cfg)) < 1e-13


def test_spread_three_dim_matches_gather_oracle():
    rng = np.random.default_rng(22)
    cfg = NfftConfig.create((4, 6, 4), "kaiser_bessel", 2.0, 2)
    x, f = random_points(rng, 64, 3)
    assert rel(spread(x, f, cfg).values, naive_spread(x, f, cfg)) < 1e-13


def test_fft_constant_grid():
    out = fft_oversampled(OversampledGrid(np.ones((4, 4, 4))), "forward")
    expected = np.zeros((4, 4, 4))
    expected[0, 0, 0] = 64
    assert out.layout == "frequency"
    assert np.allclose(out.values, expected, atol=1e-12)


@pytest.mark.parametrize("shape", [(8, 8, 8), (6, 10)])
def test_fft_matches_direct_dft(shape):
    rng = np.random.default_rng(23)
    g = OversampledGrid(rng.normal(size=shape) + 1j * rng.normal(size=shape))
    for direction in ("forward", "inverse"):
        assert rel(fft_oversampled(g, direction).values, dft_direct_equispaced(g, direction).values) < 1e-10
    back = fft_oversampled(fft_oversampled(g, "forward"), "inverse")
    assert rel(back.values, g.values) < 1e-12


def test_fft_is_bit_deterministic():
    rng = np.random.default_rng(24)
    g = OversampledGrid(rng.normal(size=(16, 16)) + 0j)
    assert np.array_equal(fft_oversampled(g).values, fft_oversampled(g).values)


def test_fft_rejects_bad_direction():
    with pytest.raises(ValueError):
        fft_oversampled(OversampledGrid(np.ones(4)), "sideways")


def test_scale_zero_and_exact_division():
    cfg = NfftConfig.create((8, 4), "gaussian", 2.0, 4)
    assert not np.any(scale(OversampledGrid(np.zeros(cfg.grid_shape), "frequency"), cfg))
    # place prod_t n_t c_{k_t} on I_N; scaling must return ones
    g = np.zeros(cfg.grid_shape, dtype=complex)
    c0 = fourier_weights(cfg.window, 0) * cfg.grid_shape[0]
    c1 = fourier_weights(cfg.window, 1) * cfg.grid_shape[1]
    k0 = np.arange(-4, 4) % cfg.grid_shape[0]
    k1 = np.arange(-2, 2) % cfg.grid_shape[1]
    g[np.ix_(k0, k1)] = np.outer(c0, c1)
    assert np.allclose(scale(OversampledGrid(g, "frequency"), cfg), 1.0, rtol=1e-15, atol=0)


def test_scale_requires_frequency_layout():
    cfg = NfftConfig.create((4,), m=1)
    with pytest.raises(ShapeError):
        scale(OversampledGrid(np.zeros(8), "spatial"), cfg)


def test_subdivide_division_and_padding():
    cfg = NfftConfig.create((8, 4), "sinc_power", 2.0, 4)
    rng = np.random.default_rng(25)
    coeffs = rng.normal(size=(8, 4)) + 1j * rng.normal(size=(8, 4))
    g = subdivide(coeffs, cfg)
    assert g.layout == "frequency"
    k0 = np.arange(-4, 4) % cfg.grid_shape[0]
    k1 = np.arange(-2, 2) % cfg.grid_shape[1]
    inner = g.values[np.ix_(k0, k1)]
    w = np.outer(fourier_weights(cfg.window, 0), fourier_weights(cfg.window, 1))
    assert np.allclose(inner, coeffs / w, rtol=1e-15, atol=0)
    mask = np.ones(cfg.grid_shape, bool)
    mask[np.ix_(k0, k1)] = False
    assert np.all(g.values[mask] == 0)
    assert not np.any(subdivide(np.zeros((8, 4)), cfg).values)


def test_interpolate_zero_grid():
    cfg = NfftConfig.create((4, 4), m=2)
    x = np.random.default_rng(0).uniform(-0.5, 0.5, (10, 2))
    assert not np.any(interpolate(OversampledGrid(np.zeros(cfg.grid_shape)), x, cfg))


def test_interpolate_single_point_stencil_dot():
    cfg = NfftConfig.create((8, 8), "gaussian", 2.0, 2)
    rng = np.random.default_rng(26)
    g = rng.normal(size=cfg.grid_shape) + 1j * rng.normal(size=cfg.grid_shape)
    x = np.array([0.123, -0.377])
    n = cfg.grid_shape
    total = 0j
    c = np.rint(np.array(n) * x).astype(int)
    for a in range(-2, 3):
        for b in range(-2, 3):
            la, lb = c[0] + a, c[1] + b
            w = window_spatial(cfg.window, 0, x[0] - la / n[0]) * window_spatial(cfg.window, 1, x[1] - lb / n[1])
            total += g[la % n[0], lb % n[1]] * w
    out = interpolate(OversampledGrid(g), x[None, :], cfg)
    assert out[0] == pytest.approx(total, rel=1e-14)


def test_forward_zero_input():
    cfg = NfftConfig.create((8, 8, 8), m=4)
    x = np.random.default_rng(0).uniform(-0.5, 0.5, (20, 3))
    assert not np.any(nfft_forward(x, np.zeros(20), cfg))
    assert not np.any(nfft_adjoint(np.zeros((8, 8, 8)), x, cfg))


def test_adjoint_flat_coefficient():
    cfg = NfftConfig.create((8, 8), "kaiser_bessel", 2.0, 6)
    coeffs = np.zeros((8, 8))
    coeffs[4, 4] = 1.0  # k = 0
    x = np.random.default_rng(1).uniform(-0.5, 0.5, (30, 2))
    assert np.allclose(nfft_adjoint(coeffs, x, cfg), 1.0, atol=1e-10)


@pytest.mark.parametrize("kind", list(WindowKind))
def test_error_decreases_with_cutoff(kind, bench_instance):
    x, f = bench_instance["x"][:1024], bench_instance["f"][:1024]
    iset = make_index_set((8, 8, 8))
    ref = ndft_direct_forward(x, f, iset)
    e2 = rel(nfft_forward(x, f, NfftConfig.create(iset.dims, kind, 2.0, 2)), ref)
    e8 = rel(nfft_forward(x, f, NfftConfig.create(iset.dims, kind, 2.0, 8)), ref)
    assert e2 > e8


def test_worker_counts_agree_and_repeat_exactly():
    rng = np.random.default_rng(27)
    x, f = random_points(rng, 5000, 3)
    coeffs = rng.normal(size=(8, 8, 8)) + 0j
    one = NfftConfig.create((8, 8, 8), m=4, workers=1)
    three = NfftConfig.create((8, 8, 8), m=4, workers=3)
    a1, a3 = nfft_forward(x, f, one), nfft_forward(x, f, three)
    assert np.array_equal(a3, nfft_forward(x, f, three))
    assert rel(a3, a1) < 1e-12
    b1, b3 = nfft_adjoint(coeffs, x, one), nfft_adjoint(coeffs, x, three)
    assert np.array_equal(b1, b3)  # interpolation writes disjoint outputs


def test_chunk_size_is_not_semantic():
    rng = np.random.default_rng(28)
    x, f = random_points(rng, 700, 2)
    a = nfft_forward(x, f, NfftConfig.create((8, 8), m=3))
    cfg = NfftConfig(make_index_set((8, 8)), NfftConfig.create((8, 8), m=3).window, 1, 37)
    assert rel(nfft_forward(x, f, cfg), a) < 1e-14


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 3), m=st.integers(1, 6),
       kind=st.sampled_from(list(WindowKind)))
def test_spread_interpolate_duality(seed, d, m, kind):
    rng = np.random.default_rng(seed)
    dims = tuple(int(v) for v in rng.choice([4, 6, 8], size=d))
    cfg = NfftConfig.create(dims, kind, 2.0, m)
    x, f = random_points(rng, 40, d)
    g = rng.normal(size=cfg.grid_shape) + 1j * rng.normal(size=cfg.grid_shape)
    lhs = np.vdot(g.ravel(), spread(x, f, cfg).values.ravel())
    rhs = np.vdot(interpolate(OversampledGrid(g), x, cfg), f)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_pipeline_linearity(seed):
    rng = np.random.default_rng(seed)
    cfg = NfftConfig.create((8, 4), "gaussian", 2.0, 5)
    x, f = random_points(rng, 50, 2)
    _, g = random_points(rng, 50, 2)
    a = complex(*rng.normal(size=2))
    lhs = nfft_forward(x, a * f + g, cfg)
    assert rel(lhs, a * nfft_forward(x, f, cfg) + nfft_forward(x, g, cfg)) < 1e-12
    c1 = rng.normal(size=(8, 4)) + 0j
    c2 = rng.normal(size=(8, 4)) + 0j
    lhs = nfft_adjoint(a * c1 + c2, x, cfg)
    assert rel(lhs, a * nfft_adjoint(c1, x, cfg) + nfft_adjoint(c2, x, cfg)) < 1e-12


def test_plan_wraps_config():
    plan = NFFT((8, 8), window="gaussian", m=6)
    rng = np.random.default_rng(29)
    x, f = random_points(rng, 30, 2)
    assert np.array_equal(plan.forward(x, f), nfft_forward(x, f, plan.config))
