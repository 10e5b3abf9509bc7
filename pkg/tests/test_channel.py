import numpy as np
import pytest

from irsjam.channel import (
    C_LIGHT,
    assemble_composite,
    build_scenario,
    db_to_linear,
    dbm_to_watt,
    default_ura_rows,
    eve_positions,
    los_component,
    path_loss,
    sample_channel,
    ula_offsets,
    ura_offsets,
)
from irsjam.harness import ScenarioConfig


class TestConversions:
    def test_db_to_linear(self):
        assert db_to_linear(0.0) == pytest.approx(1.0)
        assert db_to_linear(-30.0) == pytest.approx(1e-3)

    def test_dbm_roundtrip(self):
        for dbm in (-105.0, 0.0, 40.0, 61.7):
            watt = float(dbm_to_watt(dbm))
            back = 10.0 * np.log10(watt) + 30.0
            assert abs(back - dbm) <= 1e-12 * max(abs(dbm), 1.0)

    def test_dbm_reference_points(self):
        assert float(dbm_to_watt(30.0)) == pytest.approx(1.0, rel=1e-12)
        assert float(dbm_to_watt(40.0)) == pytest.approx(10.0, rel=1e-12)


class TestPathLoss:
    def test_square_law_100m(self):
        assert path_loss(100.0, 2.0, 1e-3) == pytest.approx(1e-7)

    def test_fifth_power_10m(self):
        assert path_loss(10.0, 5.0, 1e-3) == pytest.approx(1e-8)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            path_loss(0.0, 2.0, 1e-3)
        with pytest.raises(ValueError):
            path_loss(1.0, 2.0, 0.0)


class TestArrayLayouts:
    def test_default_rows_prefers_five(self):
        assert default_ura_rows(20) == 5
        assert default_ura_rows(5) == 5

    def test_default_rows_near_square_fallback(self):
        assert default_ura_rows(8) == 2
        assert default_ura_rows(16) == 4
        assert default_ura_rows(7) == 1

    def test_ura_centered_row_major(self):
        off = ura_offsets(6, 2, 1.0)
        assert off.shape == (6, 3)
        assert np.allclose(off.mean(axis=0), 0.0)
        # element 4 = row 1, column 1 of a 2 x 3 grid
        assert np.allclose(off[4], [0.0, 0.0, 0.5])

    def test_ula_centered(self):
        off = ula_offsets(4, 0.5)
        assert np.allclose(off[:, 0], [-0.75, -0.25, 0.25, 0.75])
        assert np.allclose(off[:, 1:], 0.0)


class TestSteering:
    def test_single_elements_give_unit_scalar(self):
        a = los_component((0.0, 0.0, 0.0), (10.0, 0.0, 0.0), 0.3)
        assert a.shape == (1, 1)
        assert abs(abs(a[0, 0]) - 1.0) <= 1e-12

    def test_broadside_is_all_ones(self):
        # x-z plane array looking along +y: zero phase progression
        lam = 0.3997
        off = ura_offsets(10, 5, 3.0 * lam / 8.0)
        a = los_component(
            (0.0, 0.0, 0.0), (0.0, 50.0, 0.0), lam, tx_offsets=off
        )
        assert np.allclose(a, 1.0, atol=1e-12)

    def test_oblique_matches_per_element_recomputation(self):
        lam = 0.3997
        spacing = 0.15
        off = ura_offsets(10, 5, spacing)
        tx = np.array([0.0, 0.0, 0.0])
        rx = np.array([30.0, 30.0, 0.0])  # 45 degrees in the x-y plane
        a = los_component(tx, rx, lam, tx_offsets=off).ravel()
        assert np.allclose(np.abs(a), 1.0, atol=1e-12)
        u = (rx - tx) / np.linalg.norm(rx - tx)
        for n in range(10):
            phase = 2.0 * np.pi / lam * float(off[n] @ u)
            assert abs(a[n] - np.exp(1j * phase)) <= 1e-12

    def test_receive_side_uses_opposite_direction(self):
        lam = 0.4
        off = ula_offsets(3, lam / 2.0)
        fwd = los_component(
            (0.0, 0.0, 0.0), (20.0, 5.0, 0.0), lam, rx_offsets=off
        )
        back = los_component(
            (0.0, 0.0, 0.0), (-20.0, -5.0, 0.0), lam, rx_offsets=off
        )
        assert np.allclose(fwd.ravel(), back.ravel().conj(), atol=1e-12)


class TestSampleChannel:
    def test_los_limit_is_deterministic(self):
        rng = np.random.default_rng(0)
        los = np.exp(1j * np.linspace(0.0, 1.0, 4))
        state = rng.bit_generator.state
        h = sample_channel(4.0, np.inf, los, rng)
        assert np.array_equal(h, 2.0 * los)
        # no draws consumed
        assert rng.bit_generator.state == state

    def test_rayleigh_second_moment(self):
        rng = np.random.default_rng(1)
        h = sample_channel(1.0, 0.0, np.ones(100000), rng)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.02)

    def test_rician_mean(self):
        rng = np.random.default_rng(2)
        los = np.exp(1j * 0.3) * np.ones(100000)
        h = sample_channel(4.0, 1.0, los, rng)
        assert np.abs(np.mean(h) - np.sqrt(2.0) * los[0]) <= 0.02 * np.sqrt(2.0)

    def test_power_law_scaling_monte_carlo(self):
        rng = np.random.default_rng(3)
        l0 = 1e-3
        g1 = path_loss(50.0, 2.0, l0)
        g2 = path_loss(100.0, 2.0, l0)
        assert g2 / g1 == pytest.approx(0.25, rel=1e-12)
        h1 = sample_channel(g1, 0.0, np.ones(100000), rng)
        h2 = sample_channel(g2, 0.0, np.ones(100000), rng)
        assert np.mean(np.abs(h1) ** 2) == pytest.approx(g1, rel=0.02)
        assert np.mean(np.abs(h2) ** 2) == pytest.approx(g2, rel=0.02)

    def test_rejects_negative_parameters(self):
        rng = np.random.default_rng(4)
        with pytest.raises(ValueError):
            sample_channel(-1.0, 0.0, np.ones(2), rng)
        with pytest.raises(ValueError):
            sample_channel(1.0, -0.5, np.ones(2), rng)


class TestComposite:
    def test_scalar_case(self):
        h = assemble_composite(
            np.array([[2.0 + 1j]]), np.array([1.0 - 2j]), np.array([3.0 + 4j])
        )
        assert np.allclose(h[0, 0], (1.0 + 2j) * (2.0 + 1j))
        assert np.allclose(h[1, 0], 3.0 - 4j)

    def test_zero_reflection_path(self):
        h_ai = np.array([1.0 + 1j, 2.0])
        h = assemble_composite(np.ones((3, 2)), np.zeros(3), h_ai)
        assert np.all(h[:3] == 0.0)
        assert np.allclose(h[3], h_ai.conj())

    def test_matches_direct_evaluation(self):
        rng = np.random.default_rng(5)
        n, m = 3, 2
        H_ar = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        h_ri = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        h_ai = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        H = assemble_composite(H_ar, h_ri, h_ai)
        for _ in range(100):
            v = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))
            f = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            v_ext = np.concatenate([v, [1.0]])
            direct = h_ai.conj() @ f + h_ri.conj() @ (np.diag(v) @ H_ar @ f)
            assert abs(v_ext @ H @ f - direct) <= 1e-10

    def test_rejects_mismatched_dims(self):
        with pytest.raises(ValueError):
            assemble_composite(np.ones((3, 2)), np.zeros(2), np.zeros(2))


class TestEvePositions:
    def test_single_eve_at_midpoint(self):
        (p,) = eve_positions("a", 1)
        assert np.allclose(p, [2.0, 100.0, 0.0])

    def test_two_eves_at_endpoints(self):
        p = eve_positions("b", 2)
        assert np.allclose(p[0], [2.0, -105.0, 0.0])
        assert np.allclose(p[1], [2.0, -95.0, 0.0])

    def test_uniform_spacing(self):
        p = np.stack(eve_positions("a", 5))
        assert np.allclose(np.diff(p[:, 1]), 2.5)

    def test_rejects_unknown_setup(self):
        with pytest.raises(ValueError):
            eve_positions("c", 2)


class TestBuildScenario:
    def test_shapes(self):
        cfg = ScenarioConfig(n_tx=3, n_elements=10, n_eves=2)
        ch = build_scenario(cfg, np.random.SeedSequence([0, 0]))
        assert ch.H_ar.shape == (10, 3)
        assert ch.h_ab.shape == (3,)
        assert ch.h_ae.shape == (2, 3)
        assert ch.h_rb.shape == (10,)
        assert ch.h_re.shape == (2, 10)
        assert ch.H_b.shape == (11, 3)
        assert ch.H_e.shape == (2, 11, 3)
        assert (ch.n_tx, ch.n_elements, ch.n_eves) == (3, 10, 2)

    def test_same_seed_reproduces_exactly(self):
        cfg = ScenarioConfig()
        a = build_scenario(cfg, np.random.SeedSequence([1, 2]))
        b = build_scenario(cfg, np.random.SeedSequence([1, 2]))
        for name in ("H_ar", "h_ab", "h_ae", "h_rb", "h_re"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_substreams_isolate_tensor_draws(self):
        # growing K must not disturb the other tensors' realizations
        a = build_scenario(ScenarioConfig(n_eves=1), np.random.SeedSequence([0, 3]))
        b = build_scenario(ScenarioConfig(n_eves=4), np.random.SeedSequence([0, 3]))
        assert np.array_equal(a.h_ab, b.h_ab)
        assert np.array_equal(a.H_ar, b.H_ar)
        assert np.array_equal(a.h_rb, b.h_rb)

    def test_mirrored_setups_share_transmit_side(self):
        a = build_scenario(ScenarioConfig(setup="a"), np.random.SeedSequence([0, 4]))
        b = build_scenario(ScenarioConfig(setup="b"), np.random.SeedSequence([0, 4]))
        assert np.array_equal(a.h_ab, b.h_ab)
        assert np.array_equal(a.H_ar, b.H_ar)
        assert np.array_equal(a.h_rb, b.h_rb)
        assert not np.array_equal(a.h_re, b.h_re)

    def test_mirrored_midpoint_eve_is_identical(self):
        # K = 1 puts the eavesdropper at the segment midpoint, which sits at
        # the same distance from Alice in both setups; with K > 1 the index
        # order runs along the segment, so mirroring reverses the distances
        a = build_scenario(
            ScenarioConfig(setup="a", n_eves=1), np.random.SeedSequence([0, 4])
        )
        b = build_scenario(
            ScenarioConfig(setup="b", n_eves=1), np.random.SeedSequence([0, 4])
        )
        assert np.array_equal(a.h_ae, b.h_ae)

    def test_pure_los_bob_link(self):
        # beta_rb = inf: per-element magnitude is exactly the path gain
        cfg = ScenarioConfig()
        ch = build_scenario(cfg, np.random.SeedSequence([0, 5]))
        lam = C_LIGHT / cfg.carrier_hz
        d = np.linalg.norm(np.asarray(cfg.bob_pos) - np.asarray(cfg.rose_pos))
        amp = np.sqrt(path_loss(d, cfg.c_rb, db_to_linear(cfg.l0_db)))
        assert np.allclose(np.abs(ch.h_rb), amp, rtol=1e-12)
        assert lam > 0

    def test_composites_match_assembly(self):
        ch = build_scenario(ScenarioConfig(n_eves=2), np.random.SeedSequence([0, 6]))
        assert np.array_equal(
            ch.H_b, assemble_composite(ch.H_ar, ch.h_rb, ch.h_ab)
        )
        for k in range(2):
            assert np.array_equal(
                ch.H_e[k], assemble_composite(ch.H_ar, ch.h_re[k], ch.h_ae[k])
            )

    def test_eve_position_count_mismatch_raises(self):
        cfg = ScenarioConfig(n_eves=2, eve_positions=((2.0, 100.0, 0.0),))
        with pytest.raises(ValueError):
            build_scenario(cfg, np.random.SeedSequence([0, 7]))
