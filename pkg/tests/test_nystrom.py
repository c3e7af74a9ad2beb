import math

import numpy as np
import pytest

from nysfilter import (
    DegenerateKernelError,
    RangeKernel,
    RangeList,
    build_A,
    build_B,
    fit,
    kernel_error,
    kmeans_landmarks,
    uniform_landmarks,
)


def direct_kernel(left, right, theta):
    """Independent oracle: elementwise scalar evaluation of the kernel."""
    out = np.empty((len(left), len(right)))
    for i, t in enumerate(left):
        for j, s in enumerate(right):
            d2 = float(((np.asarray(t) - np.asarray(s)) ** 2).sum())
            out[i, j] = math.exp(-d2 / (2.0 * theta * theta))
    return out


def as_range_list(points):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 1 and points.shape[1] > 1:
        points = points.T
    return RangeList(vectors=points, index_map=np.arange(len(points)))


def khat_of(model):
    return (model.extrapolated * model.alphas) @ model.extrapolated.T


def test_build_A_single_landmark():
    A = build_A(np.array([[3.5, 1.0]]), RangeKernel(theta=10.0))
    assert A.entries.tolist() == [[1.0]]


def test_build_A_analytic_offdiagonal():
    theta = 7.0
    lms = np.array([[0.0], [theta * math.sqrt(2.0)]])
    A = build_A(lms, RangeKernel(theta=theta))
    assert A.entries[0, 1] == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert A.entries[0, 0] == A.entries[1, 1] == 1.0


def test_build_A_matches_direct_oracle():
    rng = np.random.default_rng(0)
    lms = rng.uniform(0, 255, (5, 3))
    A = build_A(lms, RangeKernel(theta=45.0))
    assert np.abs(A.entries - direct_kernel(lms, lms, 45.0)).max() < 1e-12


def test_build_B_full_sampling_is_K():
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 255, (9, 2))
    rl = as_range_list(pts)
    kernel = RangeKernel(theta=30.0)
    B = build_B(pts, rl, kernel)
    assert np.abs(B - direct_kernel(pts, pts, 30.0)).max() < 1e-12


def test_build_B_unit_entry_for_shared_point():
    pts = np.array([[1.0], [5.0], [9.0]])
    rl = as_range_list(pts)
    B = build_B(np.array([[5.0]]), rl, RangeKernel(theta=2.0))
    assert B[0, 1] == 1.0
    assert np.all(B > 0.0) and np.all(B <= 1.0)


def test_build_B_matches_direct_oracle():
    rng = np.random.default_rng(2)
    lms = rng.uniform(0, 10, (3, 2))
    pts = rng.uniform(0, 10, (7, 2))
    B = build_B(lms, as_range_list(pts), RangeKernel(theta=3.0))
    assert np.abs(B - direct_kernel(lms, pts, 3.0)).max() < 1e-12


def test_build_B_dim_mismatch():
    with pytest.raises(ValueError):
        build_B(np.zeros((2, 3)), as_range_list(np.zeros((4, 2))), RangeKernel(theta=1.0))


def test_fit_exact_at_full_sampling():
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 255, (40, 3))
    rl = as_range_list(pts)
    kernel = RangeKernel(theta=40.0)
    lm = kmeans_landmarks(pts, 40, seed=0)
    model = fit(rl, lm, kernel)
    K = direct_kernel(pts, pts, 40.0)
    assert np.abs(khat_of(model) - K).max() < 1e-8


def test_fit_rank_one_closed_form():
    rng = np.random.default_rng(4)
    pts = rng.uniform(0, 1, (12, 2))
    rl = as_range_list(pts)
    kernel = RangeKernel(theta=0.5)
    lm = kmeans_landmarks(pts, 1, seed=0)
    model = fit(rl, lm, kernel)
    mu = lm.centroids[0]
    col = direct_kernel(pts, [mu], 0.5).ravel()
    expected = np.outer(col, col)  # K_hat(i,j) = k(mu,r_i) k(mu,r_j)
    assert np.abs(khat_of(model) - expected).max() < 1e-10


def test_fit_bound_constants_reused_across_trials():
    # |K - K_hat|_F <= c1 sqrt(e) + c2 e with constants calibrated once on
    # disjoint seeds, then reused for 20 fresh trials
    kernel = RangeKernel(theta=0.4)

    def trial(seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 2, (50, 1))
        rl = as_range_list(pts)
        lm = kmeans_landmarks(pts, 8, seed=seed)
        model = fit(rl, lm, kernel)
        K = kernel.gram(pts, pts)
        err = float(np.linalg.norm(K - khat_of(model)))
        return lm.quant_error, err

    calib = np.array([trial(100 + s) for s in range(20)])
    X = np.stack([np.sqrt(calib[:, 0]), calib[:, 0]], axis=1)
    (c1, c2), *_ = np.linalg.lstsq(X, calib[:, 1], rcond=None)
    c1, c2 = 2.0 * max(c1, 0.0) + 1e-9, 2.0 * max(c2, 0.0) + 1e-9
    for seed in range(20):
        e, err = trial(seed)
        assert err <= c1 * math.sqrt(e) + c2 * e


def test_kernel_error_zero_at_full_sampling():
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 255, (30, 2))
    rl = as_range_list(pts)
    kernel = RangeKernel(theta=35.0)
    model = fit(rl, kmeans_landmarks(pts, 30, seed=1), kernel)
    assert kernel_error(model, rl, kernel) <= 1e-8


def test_kernel_error_rank_one_worse_than_full():
    rng = np.random.default_rng(6)
    pts = rng.uniform(0, 255, (25, 2))
    rl = as_range_list(pts)
    kernel = RangeKernel(theta=40.0)
    err_1 = kernel_error(fit(rl, kmeans_landmarks(pts, 1, seed=0), kernel), rl, kernel)
    err_m = kernel_error(fit(rl, kmeans_landmarks(pts, 25, seed=0), kernel), rl, kernel)
    assert err_1 >= err_m


def test_kernel_error_refuses_large_m():
    rng = np.random.default_rng(7)
    pts = rng.uniform(0, 1, (80, 1))
    rl = as_range_list(pts)
    kernel = RangeKernel(theta=0.3)
    model = fit(rl, kmeans_landmarks(pts, 4, seed=0), kernel)
    with pytest.raises(ValueError):
        kernel_error(model, rl, kernel, max_points=50)


def test_kernel_error_non_increasing_with_finer_clusterings():
    rng = np.random.default_rng(8)
    centers = rng.uniform(0, 4, (8, 2))
    pts = np.concatenate([c + 0.08 * rng.standard_normal((30, 2)) for c in centers])
    rl = as_range_list(pts)
    kernel = RangeKernel(theta=0.5)
    errors, quants = [], []
    for m0 in (2, 4, 8, 16, 32):
        best = min(
            (kmeans_landmarks(pts, m0, seed=s) for s in range(5)),
            key=lambda lm: lm.quant_error,
        )
        quants.append(best.quant_error)
        errors.append(kernel_error(fit(rl, best, kernel), rl, kernel))
    assert all(q2 <= q1 for q1, q2 in zip(quants, quants[1:]))
    for prev, nxt in zip(errors, errors[1:]):
        assert nxt <= 1.05 * prev  # up to 5% jitter


def test_khat_symmetric():
    # structural symmetry: every term alpha_k v_k v_k^T is exactly symmetric
    rng = np.random.default_rng(9)
    pts = rng.uniform(0, 255, (40, 3))
    rl = as_range_list(pts)
    kernel = RangeKernel(theta=50.0)
    model = fit(rl, kmeans_landmarks(pts, 6, seed=2), kernel)
    khat = np.zeros((rl.m, rl.m))
    for k in range(model.retained_rank):
        khat += model.alphas[k] * np.outer(model.extrapolated[:, k], model.extrapolated[:, k])
    assert np.array_equal(khat, khat.T)


def test_clustering_beats_uniform_median_kernel_error():
    rng = np.random.default_rng(10)
    centers = rng.uniform(0, 100, (10, 3))
    pts = np.concatenate([c + 2.0 * rng.standard_normal((25, 3)) for c in centers])
    rl = as_range_list(pts)
    kernel = RangeKernel(theta=20.0)
    km, un = [], []
    for seed in range(20):
        km.append(kernel_error(fit(rl, kmeans_landmarks(pts, 6, seed=seed), kernel), rl, kernel))
        un.append(kernel_error(fit(rl, uniform_landmarks(pts, 6, seed=seed), kernel), rl, kernel))
    assert np.median(km) < np.median(un)


def test_retained_rank_and_drop_rule():
    # coincident landmarks make A singular: rank must drop below m0
    pts = np.array([[0.0], [0.0], [10.0], [10.0]])
    rl = as_range_list(pts)
    kernel = RangeKernel(theta=5.0)
    lm = uniform_landmarks(pts, 4, seed=0)
    model = fit(rl, lm, kernel)
    assert model.retained_rank < 4
    assert np.all(model.alphas > 1e-8 * model.alphas[0])


def test_fit_rejects_bad_eps():
    pts = np.array([[0.0], [1.0]])
    rl = as_range_list(pts)
    with pytest.raises(ValueError):
        fit(rl, kmeans_landmarks(pts, 1, seed=0), RangeKernel(theta=1.0), eps_drop=1.0)


def test_degenerate_error_is_signalled():
    with pytest.raises((DegenerateKernelError, ValueError)):
        RangeKernel(theta=-1.0)
