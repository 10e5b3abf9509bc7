import numpy as np
import pytest

from conftest import rand_herm, rand_herm_psd
from irsjam.numerics import (
    check_hermitian,
    herm_eig,
    psd_project,
    symmetrize,
    trace_inner,
    unit_phases,
)


class TestHermEig:
    def test_identity(self):
        w, v = herm_eig(np.eye(2))
        assert np.allclose(w, [1.0, 1.0])
        assert np.allclose(v @ v.conj().T, np.eye(2), atol=1e-12)

    def test_diagonal(self):
        w, v = herm_eig(np.diag([3.0, 1.0]))
        assert np.allclose(w, [3.0, 1.0])
        # columns are signed unit vectors picking out the diagonal order
        assert np.allclose(np.abs(v), np.eye(2), atol=1e-12)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(1)
        a = rand_herm(4, rng)
        w, v = herm_eig(a)
        assert np.abs((v * w) @ v.conj().T - a).max() <= 1e-9

    def test_reconstruction_up_to_dim_32(self):
        rng = np.random.default_rng(2)
        for n in (1, 3, 8, 17, 32):
            a = rand_herm(n, rng)
            w, v = herm_eig(a)
            scale = max(np.abs(a).max(), 1.0)
            assert np.abs((v * w) @ v.conj().T - a).max() <= 1e-9 * scale
            assert np.all(np.diff(w) <= 1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestTraceInner:
    def test_identity_times_diagonal(self):
        assert trace_inner(np.eye(2), np.diag([2.0, 3.0])) == pytest.approx(5.0)

    def test_rank_one_pair(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        y = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        got = trace_inner(np.outer(x, x.conj()), np.outer(y, y.conj()))
        assert got == pytest.approx(abs(x.conj() @ y) ** 2, abs=1e-10)

    def test_matches_entrywise_sum(self):
        rng = np.random.default_rng(4)
        a, x = rand_herm(4, rng), rand_herm(4, rng)
        ref = sum(
            (a[i, j] * x[j, i]).real for i in range(4) for j in range(4)
        )
        assert trace_inner(a, x) == pytest.approx(ref, abs=1e-10)

    def test_symmetric_and_bilinear(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            a, b, x = (rand_herm(3, rng) for _ in range(3))
            assert trace_inner(a, x) == pytest.approx(trace_inner(x, a), abs=1e-10)
            assert trace_inner(a + 2.0 * b, x) == pytest.approx(
                trace_inner(a, x) + 2.0 * trace_inner(b, x), abs=1e-10
            )

    def test_rejects_mismatched_shapes(self):
        with pytest.raises(ValueError):
            trace_inner(np.eye(2), np.eye(3))


class TestPsdProject:
    def test_clamps_negative_eigenvalue(self):
        assert np.allclose(
            psd_project(np.diag([2.0, -1.0])), np.diag([2.0, 0.0]), atol=1e-12
        )

    def test_psd_fixed_point(self):
        rng = np.random.default_rng(6)
        a = rand_herm_psd(4, rng)
        assert np.abs(psd_project(a) - a).max() <= 1e-10

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        p = psd_project(rand_herm(5, rng))
        assert np.abs(psd_project(p) - p).max() <= 1e-10

    def test_distance_minimal_among_sampled_psd(self):
        rng = np.random.default_rng(8)
        a = rand_herm(3, rng)
        p = psd_project(a)
        w, _ = herm_eig(p)
        assert w[-1] >= -1e-12
        dist = np.linalg.norm(a - p)
        for _ in range(1000):
            q = psd_project(p + rand_herm(3, rng, scale=0.3))
            assert dist <= np.linalg.norm(a - q) + 1e-12


class TestHermitianChecks:
    def test_symmetrize(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        s = symmetrize(a)
        assert np.abs(s - s.conj().T).max() == 0.0

    def test_check_accepts_rounding_noise(self):
        a = np.eye(3) + 1e-14 * np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]])
        out = check_hermitian(a)
        assert np.abs(out - out.conj().T).max() == 0.0

    def test_check_rejects_gross_asymmetry(self):
        with pytest.raises(ValueError):
            check_hermitian(np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestUnitPhases:
    def test_exact_magnitude_vectorized(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            theta = rng.uniform(-20.0, 20.0, size=200)
            v = unit_phases(theta)
            assert np.all(np.abs(v) == 1.0)

    def test_angles_barely_move(self):
        rng = np.random.default_rng(11)
        theta = rng.uniform(0.0, 2.0 * np.pi, size=1000)
        v = unit_phases(theta)
        assert np.abs(v - np.exp(1j * theta)).max() <= 1e-14

    def test_scalar_input(self):
        v = unit_phases(0.7)
        assert np.isscalar(v) or v.ndim == 0 or v.shape == ()
        assert np.abs(np.asarray([v]))[0] == 1.0

    def test_zero_angles_are_exact_ones(self):
        assert np.array_equal(unit_phases(np.zeros(5)), np.ones(5))
