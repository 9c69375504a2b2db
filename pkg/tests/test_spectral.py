import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fracap import InvalidGrid, InvalidOrder, SampleError, SpectralField, hs_seminorm, make_grid, mean, norms, sample
from fracap.spectral import holder_quotient, periodic_distance

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_grid_nodes_n8():
    g = make_grid(8)
    assert np.allclose(g.nodes, np.arange(8) * np.pi / 4, atol=1e-15)


@pytest.mark.parametrize("n", [7, 6, 0, 9])
def test_grid_rejects_bad_n(n):
    with pytest.raises(InvalidGrid):
        make_grid(n)


def test_grid_spacing_and_monotone():
    g = make_grid(128)
    assert g.spacing == 2 * np.pi / 128
    assert np.all(np.diff(g.nodes) > 0)
    assert np.allclose(np.diff(g.nodes), g.spacing, rtol=0, atol=1e-14)


def test_grid_wavenumber_layout():
    g = make_grid(8)
    assert list(g.wavenumbers) == [-4, -3, -2, -1, 0, 1, 2, 3]


def test_sample_cos_coeffs():
    g = make_grid(16)
    c = sample(np.cos, g).coeffs
    k = g.wavenumbers
    expected = np.where(np.abs(k) == 1, 0.5, 0.0)
    assert np.max(np.abs(c - expected)) <= 1e-14


def test_sample_constant_and_string():
    g = make_grid(16)
    c = sample(3, g).coeffs
    assert abs(c[g.n // 2] - 3) < 1e-15
    assert np.max(np.abs(np.delete(c, g.n // 2))) < 1e-15
    assert np.allclose(sample("2 + cos(3*x)", g).values, 2 + np.cos(3 * g.nodes))


def test_sample_nonfinite():
    g = make_grid(16)
    with pytest.raises(SampleError):
        sample(lambda x: 1 / x, g)
    with pytest.raises(SampleError):
        sample("1/x", g)


def test_values_read_only():
    f = sample(np.cos, make_grid(8))
    with pytest.raises(ValueError):
        f.values[0] = 2.0


@pytest.mark.parametrize("expr,val", [(np.cos, 0.0), (3.0, 3.0), ("2 + cos(3*x)", 2.0)])
def test_mean_examples(expr, val):
    assert abs(mean(sample(expr, make_grid(32))) - val) < 1e-14


def test_norms_examples():
    g = make_grid(32)
    nc = norms(sample(np.cos, g))
    assert nc["sup"] == pytest.approx(1.0)
    assert nc["l2"] == pytest.approx(np.sqrt(np.pi), rel=1e-14)
    assert nc["l2_deriv"] == pytest.approx(np.sqrt(np.pi), rel=1e-14)
    assert norms(sample(0.0, g)) == {"sup": 0.0, "l2": 0.0, "l2_deriv": 0.0}
    assert norms(sample(lambda x: np.sin(2 * x), g))["l2_deriv"] == pytest.approx(2 * np.sqrt(np.pi), rel=1e-14)


@pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
def test_hs_seminorm_examples(s):
    g = make_grid(32)
    assert hs_seminorm(sample(np.cos, g), s) == pytest.approx(np.sqrt(np.pi), rel=1e-14)
    assert hs_seminorm(sample(4.0, g), s) == 0.0


def test_hs_seminorm_sin2x():
    g = make_grid(32)
    assert hs_seminorm(sample(lambda x: np.sin(2 * x), g), 0.5) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-14)


@pytest.mark.parametrize("s", [0.0, 1.0, -0.2, 1.5])
def test_hs_seminorm_order_range(s):
    with pytest.raises(InvalidOrder):
        hs_seminorm(sample(np.cos, make_grid(8)), s)


def test_holder_quotient_examples():
    g = make_grid(64)
    assert holder_quotient(sample(1.0, g), 0.5) == 0.0
    q = holder_quotient(sample(np.cos, g), 1.0)
    assert 0.9 <= q <= 1.0
    q2 = holder_quotient(sample(lambda x: 2 * np.cos(x), g), 1.0)
    assert q2 == pytest.approx(2 * q, rel=1e-14)


def test_periodic_distance_wraps():
    assert periodic_distance(0.1, 2 * np.pi - 0.1) == pytest.approx(0.2)


@given(arrays(np.float64, 32, elements=finite))
def test_round_trip(vals):
    g = make_grid(32)
    f = SpectralField(g, vals)
    back = SpectralField.from_coeffs(g, f.coeffs)
    assert np.max(np.abs(back.values - vals)) <= 1e-12 * max(1.0, np.max(np.abs(vals)))


@given(arrays(np.float64, 32, elements=finite))
def test_hermitian_and_parseval(vals):
    g = make_grid(32)
    f = SpectralField(g, vals)
    c = f.coeffs
    # c[j] pairs k = j - n/2 with -k at index n - j (k = -n/2 is its own partner)
    for j in range(1, g.n):
        assert abs(c[j] - np.conj(c[g.n - j])) <= 1e-12 * (1 + np.abs(c).max())
    l2sq = norms(f)["l2"] ** 2
    nodal = 2 * np.pi * np.mean(vals ** 2)
    assert l2sq == pytest.approx(nodal, rel=1e-12, abs=1e-300)
    assert abs(mean(f) - c[g.n // 2].real) <= 1e-13 * max(1.0, np.abs(vals).max())


@given(arrays(np.float64, 16, elements=finite), st.floats(0.05, 0.9), st.floats(0.01, 0.09))
def test_hs_monotone_in_s(low_modes, s, ds):
    g = make_grid(32)
    c = np.zeros(32, complex)
    c[17:25] = low_modes[:8] + 1j * low_modes[8:]
    c[15:7:-1] = np.conj(c[17:25])
    f = SpectralField.from_coeffs(g, c)
    assert hs_seminorm(f, s) <= hs_seminorm(f, s + ds) * (1 + 1e-12) + 1e-300


def test_hs_tends_to_l2_deriv():
    g = make_grid(64)
    f = sample(lambda x: np.cos(x) + 0.5 * np.sin(7 * x) - 0.2 * np.cos(20 * x), g)
    assert hs_seminorm(f, 0.999) == pytest.approx(norms(f)["l2_deriv"], rel=1e-2)


def test_field_arithmetic():
    g = make_grid(8)
    a, b = sample(1.0, g), sample(np.cos, g)
    assert np.allclose((a + b).values, 1 + np.cos(g.nodes))
    assert np.allclose((2 * b - a).values, 2 * np.cos(g.nodes) - 1)
    assert np.allclose((-b).values, -np.cos(g.nodes))
