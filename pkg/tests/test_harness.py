import numpy as np
import pytest
from scipy import stats

from ofdmtr import ConfigError
from ofdmtr.harness import (
    ExperimentConfig,
    config_hash,
    empirical_ccdf,
    parse,
    preset,
    qpsk,
    run_ccdf_experiment,
    run_detection_experiment,
    run_envelope_experiment,
    seeded_rng,
    serialize,
    uniform_phase,
)
from ofdmtr.harness.experiments import build_detection_waveforms, ccdf_grid_db, draw_instance


class TestConfig:
    @pytest.mark.parametrize("name", ["envelope", "ccdf", "detect"])
    def test_round_trip(self, name):
        cfg = preset(name)
        text = serialize(cfg)
        assert parse(text) == cfg
        assert serialize(parse(text)) == text

    def test_hash_tracks_content(self):
        a = preset("envelope")
        assert config_hash(a) == config_hash(preset("envelope"))
        assert config_hash(a) != config_hash(a.replace(seed=1))
        assert len(config_hash(a)) == 12

    def test_comment_and_order_do_not_matter(self):
        text = "[experiment]\n# note\nseed = 3\nn_bits = 1\n"
        assert parse(text) == ExperimentConfig(seed=3)

    def test_replace_rederives_freq_step(self):
        cfg = preset("ccdf").replace(n_carriers=10)
        assert cfg.freq_step_hz == pytest.approx(5e6)

    def test_complex_values(self):
        cfg = parse("[experiment]\nsymbol_values = 1+0j, -0.5-2j\n")
        assert cfg.symbol_values == (1 + 0j, -0.5 - 2j)

    def test_snr_grid(self):
        assert preset("detect").snr_grid_db == tuple(float(v) for v in range(-30, -9, 2))

    @pytest.mark.parametrize(
        "text",
        [
            "seed = 1\n",
            "[experiment]\nbogus = 1\n",
            "[experiment]\nn_bits = two\n",
            "[experiment]\nplan = everywhere\n",
            "[experiment]\nsolvers = tr-lp\n",
            "[experiment]\nplan_indices = 2, 9\n",
            "[experiment]\npfa = 1.5\n",
            "[experiment]\nsymbol_values = 1+0j\n",
            "[experiment]\nseed = -1\n",
        ],
    )
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse(text)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset("nope")


class TestRng:
    def test_streams_reproducible_and_distinct(self):
        a = seeded_rng(7, 3).standard_normal(5)
        np.testing.assert_array_equal(a, seeded_rng(7, 3).standard_normal(5))
        assert not np.allclose(a, seeded_rng(7, 4).standard_normal(5))
        assert not np.allclose(a, seeded_rng(8, 3).standard_normal(5))

    def test_first_thousand_draws_repeat(self):
        np.testing.assert_array_equal(seeded_rng(123).random(1000), seeded_rng(123).random(1000))

    def test_qpsk_equiprobable(self):
        draws = qpsk(seeded_rng(0, 0), 100_000)
        counts = [np.count_nonzero(draws == s) for s in (1, 1j, -1, -1j)]
        assert sum(counts) == draws.size
        assert stats.chisquare(counts).pvalue > 0.01

    def test_uniform_phase(self):
        n = 20000
        phase = np.mod(np.angle(uniform_phase(seeded_rng(0, 1), n)), 2 * np.pi)
        # uniform on [0, 2 pi): mean pi, standard deviation 2 pi / sqrt(12)
        assert abs(phase.mean() - np.pi) <= 3 * (2 * np.pi / np.sqrt(12)) / np.sqrt(n)
        assert stats.kstest(phase / (2 * np.pi), "uniform").pvalue > 1e-3

    def test_streams_uncorrelated(self):
        a = seeded_rng(5, 0).standard_normal(50000)
        b = seeded_rng(5, 1).standard_normal(50000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(50000)


class TestInstances:
    def test_explicit(self):
        plan, a = draw_instance(preset("envelope"), seeded_rng(0, 0))
        assert plan.informative == (2, 3)
        np.testing.assert_array_equal(a, [1, 1])

    def test_random_carriers_are_whole_carriers(self):
        cfg = preset("ccdf")
        plan, a = draw_instance(cfg, seeded_rng(0, 5))
        carriers = {i % cfg.n_carriers for i in plan.informative}
        assert len(carriers) == 2 and plan.n_informative == 2 * cfg.n_bits
        assert set(np.unique(a)) <= {1, 1j, -1, -1j}

    def test_chu_symbols(self):
        cfg = preset("detect")
        plan, a = draw_instance(cfg, seeded_rng(0, 0))
        codes = plan.symbols(a).codes
        np.testing.assert_allclose(codes[2], np.exp(1j * np.pi * np.arange(10) ** 2 / 10), atol=1e-12)
        np.testing.assert_allclose(codes[3], np.conj(codes[2]), atol=1e-12)


class TestExperiments:
    def test_envelope(self):
        res = run_envelope_experiment(preset("envelope"))
        p = res.pmeprs()
        assert p["initial"] == pytest.approx(2.0, abs=1e-9)
        assert p["tr-cve"] == pytest.approx(1.05, abs=0.01)

    def test_empirical_ccdf_is_strict(self):
        curve = empirical_ccdf([1.0, 2.0, 2.0, 4.0], 10 * np.log10([1.0, 2.0, 3.0]))
        np.testing.assert_array_equal(curve.exceedances, [3, 1, 1])
        np.testing.assert_allclose(curve.prob, [0.75, 0.25, 0.25])

    def test_ccdf_grid(self):
        grid = ccdf_grid_db(preset("ccdf"))
        assert grid[0] == 0.0 and grid[-1] == pytest.approx(10.0) and grid.size == 201

    def test_ccdf_matches_recomputation(self):
        res = run_ccdf_experiment(preset("ccdf", n_trials=25, max_iters=30))
        grid = ccdf_grid_db(preset("ccdf"))
        for name, values in res.per_trial.items():
            direct = [np.mean(values > 10 ** (g / 10)) for g in grid]
            np.testing.assert_array_equal(res.curves[name].prob, direct)

    def test_ccdf_independent_of_scheduling(self, monkeypatch):
        cfg = preset("ccdf", n_trials=30, max_iters=40)
        serial = run_ccdf_experiment(cfg)
        from ofdmtr.harness import experiments

        monkeypatch.setattr(experiments, "CHUNK_TRIALS", 7)
        chunked = run_ccdf_experiment(cfg)
        for name in cfg.solvers:
            np.testing.assert_array_equal(serial.per_trial[name], chunked.per_trial[name])
        parallel = run_ccdf_experiment(cfg.replace(workers=2))
        for name in cfg.solvers:
            np.testing.assert_array_equal(serial.per_trial[name], parallel.per_trial[name])

    def test_ccdf_solvers_beat_random(self):
        res = run_ccdf_experiment(preset("ccdf", n_trials=40, max_iters=100))
        med = {k: np.median(v) for k, v in res.per_trial.items()}
        assert max(med["tr-cve"], med["tr-max"], med["tr-e4"]) < med["none"]

    def test_detection_waveforms(self):
        cfg = preset("detect")
        waves = build_detection_waveforms(cfg)
        assert list(waves) == ["tr-cve", "tr-max", "tr-e4", "uniform"]
        for w in waves.values():
            assert w.energy / w.samples.size == pytest.approx(1.0, abs=1e-12)

    def test_detection_experiment_small(self):
        cfg = preset("detect", detect_trials=500, af_delays=21, af_dopplers=11)
        res = run_detection_experiment(cfg)
        assert set(res.pd) == set(res.ambiguity) == set(res.waveforms)
        for grid in res.ambiguity.values():
            assert grid.magnitudes.shape == (21, 11)


def test_sidelobe_regression():
    # frozen from the default detect configuration on the 201 x 201 grid
    cfg = preset("detect")
    res = run_detection_experiment(cfg, detection=False)
    side = {
        k: g.peak_sidelobe(guard_delay=cfg.oversampling, guard_doppler=1.0) for k, g in res.ambiguity.items()
    }
    assert side["tr-cve"] <= side["tr-max"]
    expected = {"tr-cve": 0.37344504, "tr-max": 0.63113843, "tr-e4": 0.64285014, "uniform": 0.34403000}
    for name, value in expected.items():
        assert side[name] == pytest.approx(value, abs=1e-6)
