import numpy as np
import pytest

from conftest import crandn, rand_channels
from irsjam.numerics import unit_phases
from irsjam.secrecy import (
    ReflectVector,
    TxSolution,
    passive_off_row,
    rate,
    secrecy_objective,
    secrecy_value,
    sinr,
)


class TestReflectVector:
    def test_extended_appends_exact_one(self):
        v = ReflectVector(unit_phases(np.array([0.3, -1.2])))
        ext = v.extended
        assert ext.shape == (3,)
        assert ext[2] == 1.0 + 0.0j

    def test_rejects_non_unit_modulus(self):
        with pytest.raises(ValueError):
            ReflectVector(np.array([0.5 + 0.5j]))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ReflectVector(np.array([]))

    def test_accepts_tiny_rounding(self):
        v = np.exp(1j * np.linspace(0.0, 3.0, 6))
        ReflectVector(v)  # raw exp entries are within the 1e-9 gate


class TestPassiveOffRow:
    def test_shape_and_values(self):
        row = passive_off_row(4)
        assert np.array_equal(row, np.array([0, 0, 0, 0, 1], dtype=complex))


class TestSinr:
    def test_no_jamming(self):
        H = np.array([[2.0], [0.0]], dtype=complex)  # v_ext @ H @ f1 = 2 f1
        v_ext = np.array([1.0, 1.0], dtype=complex)
        got = sinr(H, np.array([1.0]), np.array([0.0]), v_ext, 1.0)
        assert got == pytest.approx(4.0, abs=1e-12)

    def test_with_jamming(self):
        H = np.eye(2, dtype=complex)
        v_ext = np.array([1.0, 1.0], dtype=complex)
        f1 = np.array([2.0, 0.0])
        f2 = np.array([0.0, 1.0])
        got = sinr(H, f1, f2, v_ext, 1.0)
        assert got == pytest.approx(2.0, abs=1e-12)

    def test_zero_signal(self):
        rng = np.random.default_rng(0)
        H = crandn(rng, 3, 2)
        v_ext = np.concatenate([unit_phases(rng.uniform(0, 6, 2)), [1.0]])
        f2 = crandn(rng, 2)
        assert sinr(H, np.zeros(2), f2, v_ext, 2.0) == 0.0

    def test_rejects_nonpositive_gamma0(self):
        with pytest.raises(ValueError):
            sinr(np.eye(2), np.ones(2), np.ones(2), np.ones(2), 0.0)


class TestRate:
    def test_known_points(self):
        assert rate(0.0) == 0.0
        assert rate(1.0) == pytest.approx(1.0)
        assert rate(3.0) == pytest.approx(2.0)


class TestSecrecyValue:
    def test_identical_channels_give_zero(self):
        rng = np.random.default_rng(1)
        H = crandn(rng, 3, 2)
        v_ext = np.concatenate([unit_phases(rng.uniform(0, 6, 2)), [1.0]])
        f1 = crandn(rng, 2)
        assert secrecy_value(H, [H], f1, np.zeros(2), v_ext, 1.5) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_log_ratio_point(self):
        # gamma_b = 3 against worst gamma_e = 1: one bit of secrecy
        H_b = np.array([[0.0], [np.sqrt(3.0)]], dtype=complex)
        H_e1 = np.array([[0.0], [1.0]], dtype=complex)
        H_e2 = np.array([[0.0], [0.5]], dtype=complex)
        v_ext = np.array([0.0, 1.0], dtype=complex)
        got = secrecy_value(H_b, [H_e1, H_e2], np.ones(1), np.zeros(1), v_ext, 1.0)
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_matches_signal_form_recomputation(self):
        rng = np.random.default_rng(2)
        ch = rand_channels(rng, m=3, n=4, k=2)
        f1, f2 = crandn(rng, 3), 0.5 * crandn(rng, 3)
        v = unit_phases(rng.uniform(0.0, 2.0 * np.pi, 4))
        v_ext = np.concatenate([v, [1.0]])
        gamma0 = 2.7

        def link(h_ai, h_ri, f):
            return h_ai.conj() @ f + h_ri.conj() @ (np.diag(v) @ ch.H_ar @ f)

        def g(h_ai, h_ri):
            sig = abs(link(h_ai, h_ri, f1)) ** 2
            jam = abs(link(h_ai, h_ri, f2)) ** 2
            return gamma0 * sig / (gamma0 * jam + 1.0)

        ref = np.log2(1.0 + g(ch.h_ab, ch.h_rb)) - max(
            np.log2(1.0 + g(ch.h_ae[k], ch.h_re[k])) for k in range(2)
        )
        got = secrecy_value(ch.H_b, ch.H_e, f1, f2, v_ext, gamma0)
        assert got == pytest.approx(ref, abs=1e-10)


class TestPhaseInvariances:
    def test_global_surface_rotation(self):
        rng = np.random.default_rng(3)
        ch = rand_channels(rng, m=2, n=3, k=2)
        f1, f2 = crandn(rng, 2), crandn(rng, 2)
        v_ext = np.concatenate([unit_phases(rng.uniform(0, 6, 3)), [1.0]])
        base = sinr(ch.H_b, f1, f2, v_ext, 1.0)
        for w in rng.uniform(0.0, 2.0 * np.pi, 10):
            rot = np.exp(1j * w) * v_ext
            assert sinr(ch.H_b, f1, f2, rot, 1.0) == pytest.approx(base, abs=1e-10)

    def test_beam_scaling_raises_all_links(self):
        rng = np.random.default_rng(4)
        ch = rand_channels(rng, m=2, n=2, k=2)
        f1, f2 = crandn(rng, 2), crandn(rng, 2)
        v_ext = np.concatenate([unit_phases(rng.uniform(0, 6, 2)), [1.0]])
        for H in [ch.H_b, *ch.H_e]:
            lo = sinr(H, f1, f2, v_ext, 1.0)
            hi = sinr(H, 1.5 * f1, f2, v_ext, 1.0)
            assert hi > lo

    def test_per_beam_phase_rotation(self):
        rng = np.random.default_rng(5)
        ch = rand_channels(rng, m=3, n=2, k=1)
        f1, f2 = crandn(rng, 3), crandn(rng, 3)
        v_ext = np.concatenate([unit_phases(rng.uniform(0, 6, 2)), [1.0]])
        base = secrecy_value(ch.H_b, ch.H_e, f1, f2, v_ext, 1.0)
        got = secrecy_value(
            ch.H_b, ch.H_e, np.exp(0.9j) * f1, np.exp(-1.7j) * f2, v_ext, 1.0
        )
        assert got == pytest.approx(base, abs=1e-10)


class TestSecrecyObjective:
    def test_clamps_at_zero(self):
        rng = np.random.default_rng(6)
        ch = rand_channels(rng, m=1, n=1, k=1, scale=1.0)
        # eavesdropper channel deliberately much stronger
        ch.H_e[0] *= 10.0
        tx = TxSolution(np.ones(1), np.zeros(1))
        raw, clamped = secrecy_objective(ch, tx, passive_off_row(1), 1.0)
        assert raw < 0.0
        assert clamped == 0.0

    def test_accepts_reflect_vector_and_raw_row(self):
        rng = np.random.default_rng(7)
        ch = rand_channels(rng, m=2, n=2, k=1)
        tx = TxSolution(crandn(rng, 2), crandn(rng, 2))
        v = ReflectVector(unit_phases(rng.uniform(0, 6, 2)))
        raw_a, _ = secrecy_objective(ch, tx, v, 1.0)
        raw_b, _ = secrecy_objective(ch, tx, v.extended, 1.0)
        assert raw_a == raw_b

    def test_passive_row_removes_reflection(self):
        rng = np.random.default_rng(8)
        ch = rand_channels(rng, m=2, n=3, k=1)
        tx = TxSolution(crandn(rng, 2), np.zeros(2))
        raw, _ = secrecy_objective(ch, tx, passive_off_row(3), 1.0)
        gb = abs(ch.h_ab.conj() @ tx.f1) ** 2
        ge = abs(ch.h_ae[0].conj() @ tx.f1) ** 2
        ref = np.log2(1.0 + gb) - np.log2(1.0 + ge)
        assert raw == pytest.approx(ref, abs=1e-10)


class TestTxSolution:
    def test_total_power(self):
        tx = TxSolution(np.array([3.0, 4.0]), np.array([0.0, 0.0]))
        assert tx.total_power == pytest.approx(25.0)

    def test_validate_power(self):
        tx = TxSolution(np.array([1.0]), np.array([1.0]))
        tx.validate_power(2.0)
        with pytest.raises(ValueError):
            tx.validate_power(1.9)

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            TxSolution(np.ones(2), np.ones(3))
