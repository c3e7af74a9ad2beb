import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nysfilter import box_filter, gaussian_fir, gaussian_recursive
from nysfilter.spatial import SpatialKernel, apply_planes, fir_mass, gaussian_weights


def naive_box(plane, S):
    """Independent oracle: direct double-loop window summation."""
    H, W = plane.shape
    padded = np.pad(plane, S, mode="edge")
    out = np.empty_like(plane)
    for y in range(H):
        for x in range(W):
            acc = 0.0
            for dy in range(2 * S + 1):
                row = 0.0
                for dx in range(2 * S + 1):
                    row += padded[y + dy, x + dx]
                acc += row
            out[y, x] = acc
    return out


def naive_gaussian_2d(plane, sigma, S):
    """Independent oracle: non-separable direct 2-D weighted sum."""
    H, W = plane.shape
    padded = np.pad(plane, S, mode="edge")
    w1 = gaussian_weights(sigma, S)
    w2 = np.outer(w1, w1)
    out = np.zeros_like(plane)
    for dy in range(2 * S + 1):
        for dx in range(2 * S + 1):
            out += w2[dy, dx] * padded[dy:dy + H, dx:dx + W]
    return out


def test_box_constant():
    for S in (0, 1, 3):
        plane = np.full((6, 5), 2.5)  # dyadic value: window sums are exact
        assert np.array_equal(box_filter(plane, S), np.full((6, 5), 2.5 * (2 * S + 1) ** 2))


def test_box_impulse():
    plane = np.zeros((7, 7))
    plane[3, 3] = 1.0
    out = box_filter(plane, 1)
    expected = np.zeros((7, 7))
    expected[2:5, 2:5] = 1.0
    assert np.array_equal(out, expected)


def test_box_matches_naive_exactly_on_integer_raster():
    # 8-bit-valued data: every partial sum is an exactly representable
    # integer, so sliding sums equal the direct double loop bit for bit
    rng = np.random.default_rng(3)
    plane = rng.integers(0, 256, (9, 9)).astype(np.float64)
    assert np.array_equal(box_filter(plane, 2), naive_box(plane, 2))


@settings(deadline=None, max_examples=20)
@given(seed=st.integers(0, 2**31), S=st.integers(0, 4))
def test_box_matches_naive_on_reals(seed, S):
    rng = np.random.default_rng(seed)
    plane = rng.uniform(0, 255, (9, 9))
    ref = naive_box(plane, S)
    got = box_filter(plane, S)
    assert np.abs(got - ref).max() <= 1e-12 * np.abs(ref).max()


def test_gaussian_fir_constant():
    mass = fir_mass(1.5, 4)
    out = gaussian_fir(np.full((5, 8), 3.0), 1.5, 4)
    np.testing.assert_allclose(out, 3.0 * mass * mass, rtol=1e-12)


def test_gaussian_fir_impulse_ratio():
    plane = np.zeros((9, 9))
    plane[4, 4] = 1.0
    out = gaussian_fir(plane, 1.0, 3)
    assert out[4, 4] == pytest.approx(1.0, rel=1e-12)
    assert out[4, 5] / out[4, 4] == pytest.approx(np.exp(-0.5), rel=1e-12)


def test_gaussian_fir_matches_direct_2d():
    rng = np.random.default_rng(4)
    plane = rng.uniform(0, 1, (11, 11))
    ref = naive_gaussian_2d(plane, 1.3, 3)
    got = gaussian_fir(plane, 1.3, 3)
    assert np.abs(got - ref).max() < 1e-12


def test_recursive_preserves_constants():
    mass = fir_mass(4.0)
    out = gaussian_recursive(np.full((32, 32), 2.0), 4.0)
    np.testing.assert_allclose(out, 2.0 * mass * mass, rtol=1e-6)


def test_recursive_impulse_matches_fir():
    plane = np.zeros((64, 64))
    plane[32, 32] = 1.0
    rec = gaussian_recursive(plane, 4.0)
    fir = gaussian_fir(plane, 4.0, 12)
    assert np.abs(rec - fir).max() < 1e-2 * fir.max()


def test_recursive_small_sigma_delegates_to_fir():
    rng = np.random.default_rng(5)
    plane = rng.uniform(0, 255, (16, 16))
    assert np.array_equal(gaussian_recursive(plane, 0.5), gaussian_fir(plane, 0.5, 2))


@pytest.mark.parametrize(
    "kernel",
    [SpatialKernel.box(2), SpatialKernel.gaussian(1.5, 4), SpatialKernel.recursive(2.0)],
    ids=["box", "fir", "recursive"],
)
def test_linearity(kernel):
    rng = np.random.default_rng(6)
    u = rng.uniform(-1, 1, (1, 20, 20))
    v = rng.uniform(-1, 1, (1, 20, 20))
    a, b = 1.7, -0.4
    lhs = apply_planes(a * u + b * v, kernel)
    rhs = a * apply_planes(u, kernel) + b * apply_planes(v, kernel)
    scale = np.abs(rhs).max()
    assert np.abs(lhs - rhs).max() <= 1e-10 * scale


@pytest.mark.parametrize(
    "kernel,tol",
    [
        (SpatialKernel.box(2), 0.0),
        (SpatialKernel.gaussian(1.5, 4), 0.0),
        (SpatialKernel.recursive(2.0), 1e-6),
    ],
    ids=["box", "fir", "recursive"],
)
def test_impulse_symmetry(kernel, tol):
    plane = np.zeros((65, 65))
    plane[32, 32] = 1.0
    out = apply_planes(plane[np.newaxis], kernel)[0]
    peak = out.max()
    for flipped in (out[::-1, :], out[:, ::-1]):
        if tol == 0.0:
            assert np.array_equal(out, flipped)
        else:
            assert np.abs(out - flipped).max() <= tol * peak


@pytest.mark.parametrize(
    "kernel",
    [SpatialKernel.box(2), SpatialKernel.gaussian(2.0, 6), SpatialKernel.recursive(2.0)],
    ids=["box", "fir", "recursive"],
)
def test_shift_covariance_away_from_borders(kernel):
    # interior of the impulse response is translation invariant
    a = np.zeros((81, 81))
    b = np.zeros((81, 81))
    a[40, 40] = 1.0
    b[42, 37] = 1.0
    ra = apply_planes(a[np.newaxis], kernel)[0]
    rb = apply_planes(b[np.newaxis], kernel)[0]
    wa = ra[40 - 12:40 + 13, 40 - 12:40 + 13]
    wb = rb[42 - 12:42 + 13, 37 - 12:37 + 13]
    assert np.abs(wa - wb).max() <= 1e-9 * ra.max()


def test_kernel_validation():
    with pytest.raises(ValueError):
        SpatialKernel.box(-1)
    with pytest.raises(ValueError):
        SpatialKernel.gaussian(0.0, 3)
    with pytest.raises(ValueError):
        SpatialKernel.recursive(-2.0)
    assert SpatialKernel.recursive(5.0).effective_radius() == 15
    assert SpatialKernel.gaussian(5.0).radius == 15
