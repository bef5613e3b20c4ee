"""Unit tests for fBm covariance, Volterra kernel and samplers."""

import numpy as np
import pytest

from fracsde.fbm import (fbm_covariance, fgn_autocovariance, sample_fgn_exact,
                         sample_path_batch, sample_path_pair, volterra_kernel,
                         volterra_matrix)
from fracsde.grids import TimeGrid


def test_covariance_values():
    assert fbm_covariance(1.0, 1.0, 0.5) == pytest.approx(1.0)
    assert fbm_covariance(2.0, 1.0, 0.5) == pytest.approx(1.0)
    h = 0.7
    assert fbm_covariance(1.0, 1.0, h) == pytest.approx(1.0)
    assert fbm_covariance(3.0, 1.0, h) == pytest.approx(
        0.5 * (3.0 ** 1.4 + 1.0 - 2.0 ** 1.4))


def test_covariance_rejects_negative_times():
    with pytest.raises(ValueError):
        fbm_covariance(-1.0, 1.0, 0.5)


def test_kernel_requires_interior_argument():
    with pytest.raises(ValueError):
        volterra_kernel(1.0, 1.0, 0.7)
    with pytest.raises(ValueError):
        volterra_kernel(1.0, 0.0, 0.3)


def test_kernel_brownian_is_one():
    assert volterra_kernel(1.0, 0.3, 0.5) == pytest.approx(1.0)


@pytest.mark.parametrize("h", [0.3, 0.7])
def test_kernel_self_similarity(h):
    # K_H(lam t, lam s) = lam^{H-1/2} K_H(t, s)
    t, s, lam = 1.3, 0.4, 2.5
    left = volterra_kernel(lam * t, lam * s, h)
    right = lam ** (h - 0.5) * volterra_kernel(t, s, h)
    assert left == pytest.approx(right, rel=1e-10)


@pytest.mark.parametrize("h", [0.3, 0.7])
def test_kernel_reproduces_covariance(h):
    # R_H(t, s) = int_0^s K_H(t,u) K_H(s,u) du for s < t, by fine quadrature
    t, s = 1.0, 0.6
    u = np.linspace(1e-9, s - 1e-9, 200001)
    vals = volterra_kernel(t, u, h) * volterra_kernel(s, u, h)
    integral = np.trapezoid(vals, u)
    # trapezoid converges slowly near the endpoint singularities
    assert integral == pytest.approx(fbm_covariance(t, s, h), rel=5e-3)


def test_volterra_matrix_shape_and_triangularity():
    grid = TimeGrid(1.0, 16)
    L = volterra_matrix(grid, 0.7)
    assert L.shape == (17, 16)
    for i in range(17):
        assert np.all(L[i, max(i, 0):] == 0.0)


def test_sampler_deterministic_and_coupled():
    grid = TimeGrid(1.0, 64)
    a = sample_path_pair(grid, 2, 0.7, 123)
    b = sample_path_pair(grid, 2, 0.7, 123)
    assert np.array_equal(a.fbm_values, b.fbm_values)
    assert np.array_equal(a.w_increments, b.w_increments)
    assert a.fbm_values.shape == (65, 2)
    assert np.all(a.fbm_values[0] == 0.0)


def test_sampler_brownian_degeneracy():
    grid = TimeGrid(1.0, 128)
    pp = sample_path_pair(grid, 1, 0.5, 7)
    cum = np.concatenate([[0.0], np.cumsum(pp.w_increments[:, 0])])
    assert np.abs(pp.fbm_values[:, 0] - cum).max() < 1e-10


def test_batch_matches_single():
    grid = TimeGrid(1.0, 32)
    dw, bh = sample_path_batch(grid, 1, 0.3, 99, 3)
    pp = sample_path_pair(grid, 1, 0.3, 99)
    assert np.allclose(bh[0], pp.fbm_values)


def test_fgn_autocovariance_closed_form():
    h = 0.7
    g = fgn_autocovariance(np.arange(4), h)
    assert g[0] == pytest.approx(1.0)
    assert g[1] == pytest.approx(0.5 * (2.0 ** 1.4 - 2.0))


def test_fgn_exact_shapes_and_determinism():
    a = sample_fgn_exact(0.3, 64, 1.0, 5, n_paths=4)
    b = sample_fgn_exact(0.3, 64, 1.0, 5, n_paths=4)
    assert a.shape == (4, 64)
    assert np.array_equal(a, b)
    c = sample_fgn_exact(0.3, 64, 1.0, 5)
    assert c.shape == (64,)


@pytest.mark.parametrize("h", [0.3, 0.7])
def test_fgn_exact_variance(h):
    x = sample_fgn_exact(h, 256, 1.0, 11, n_paths=400)
    var = x.var()
    assert var == pytest.approx(1.0, rel=0.05)
