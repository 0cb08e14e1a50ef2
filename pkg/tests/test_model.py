import numpy as np
import pytest

from _oracles import dense_A, direct_synthesis
from ofdmtr import (
    BasebandSignal,
    DimensionError,
    FourierOperator,
    SymbolMatrix,
    UndefinedMetricError,
    WaveformParams,
    cve,
    papr_real,
    pmepr,
    pmepr_cve_bound,
    synthesize,
)
from ofdmtr.model import read_signal_csv, read_symbols_csv, write_signal_csv, write_symbols_csv


def two_carrier(oversampling):
    return synthesize(WaveformParams(2, 1, oversampling), SymbolMatrix([[1], [1]]))


class TestWaveformParams:
    def test_derived_quantities(self):
        p = WaveformParams(6, 10, 10)
        assert p.freq_step_hz == pytest.approx(50e6 / 6)
        assert p.samples_per_bit == 60
        assert p.n_samples == 600
        assert p.n_codes == 60
        assert p.bit_duration_s == pytest.approx(1 / p.freq_step_hz)
        assert p.pulse_width_s == pytest.approx(10 * p.bit_duration_s)
        assert p.sample_rate_hz == pytest.approx(10 * 6 * p.freq_step_hz)
        assert not p.is_coarse

    def test_coarse_flag(self):
        assert WaveformParams(4, 1, 2).is_coarse

    @pytest.mark.parametrize("bad", [dict(n_carriers=0), dict(n_bits=-1), dict(oversampling=1.5)])
    def test_rejects_bad_dimensions(self, bad):
        kw = dict(n_carriers=4, n_bits=2, oversampling=4) | bad
        with pytest.raises(DimensionError):
            WaveformParams(**kw)

    def test_rejects_nonpositive_step(self):
        with pytest.raises(DimensionError):
            WaveformParams(4, 2, 4, freq_step_hz=0.0)


class TestSymbolMatrix:
    def test_vector_round_trip_is_bit_major(self):
        p = WaveformParams(3, 2, 4)
        vec = np.arange(6) + 0j
        s = SymbolMatrix.from_vector(vec, p)
        # slot m*N + n holds carrier n, bit m
        assert s.codes[1, 0] == 1 and s.codes[0, 1] == 3
        np.testing.assert_array_equal(s.to_vector(), vec)

    def test_codes_are_read_only(self):
        s = SymbolMatrix.zeros(WaveformParams(2, 2, 4))
        with pytest.raises(ValueError):
            s.codes[0, 0] = 1

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            synthesize(WaveformParams(3, 2, 4), SymbolMatrix(np.ones((2, 2))))


class TestSynthesis:
    def test_single_dc_carrier(self):
        x = synthesize(WaveformParams(1, 1, 4), SymbolMatrix([[1]]))
        np.testing.assert_array_equal(x.samples, np.ones(4, complex))

    def test_two_equal_carriers(self):
        x = two_carrier(4).samples
        np.testing.assert_allclose(x, 1 + np.exp(1j * np.pi * np.arange(8) / 4), atol=1e-14)
        assert abs(x[0] - 2) < 1e-14

    @pytest.mark.parametrize("N,M,Os", [(1, 3, 1), (5, 3, 4), (8, 2, 3), (6, 4, 10)])
    def test_matches_double_sum(self, N, M, Os, rng):
        codes = rng.standard_normal((N, M)) + 1j * rng.standard_normal((N, M))
        fast = synthesize(WaveformParams(N, M, Os), SymbolMatrix(codes)).samples
        ref = direct_synthesis(codes, Os)
        assert np.linalg.norm(fast - ref) <= 1e-12 * np.linalg.norm(ref)

    def test_batched_forward_matches_single(self, rng):
        p = WaveformParams(4, 3, 4)
        op = FourierOperator(p)
        grids = rng.standard_normal((5, 3, 4)) + 0j
        batch = op.forward(grids).reshape(5, -1)
        for g, row in zip(grids, batch):
            np.testing.assert_allclose(row, op.apply(g.reshape(-1)), atol=1e-12)


class TestFourierOperator:
    @pytest.mark.parametrize("N,Os", [(1, 1), (4, 1), (5, 4), (16, 10)])
    def test_columns_orthogonal(self, N, Os):
        F = FourierOperator(WaveformParams(N, 1, Os)).matrix
        np.testing.assert_allclose(F.conj().T @ F, Os * N * np.eye(N), atol=1e-9)

    def test_adjoint_matches_dense(self, rng):
        N, M, Os = 3, 3, 4
        op = FourierOperator(WaveformParams(N, M, Os))
        x = rng.standard_normal(N * M * Os) + 1j * rng.standard_normal(N * M * Os)
        ref = dense_A(N, M, Os).conj().T @ x
        np.testing.assert_allclose(op.apply_adjoint(x), ref, atol=1e-10)


class TestMetrics:
    def test_constant_envelope(self, rng):
        x = np.exp(1j * rng.uniform(0, 2 * np.pi, 50))
        assert pmepr(x) == pytest.approx(1.0, abs=1e-14)
        assert cve(x) == pytest.approx(0.0, abs=1e-15)

    def test_two_carrier_pmepr(self):
        # brute force: peak |x|^2 = 4, mean |x|^2 = 2
        assert pmepr(two_carrier(10)) == pytest.approx(2.0, abs=1e-12)

    def test_cve_two_carrier_limit(self):
        # envelope 2|cos|; E|cos|^2 / (E|cos|)^2 - 1 = pi^2/8 - 1
        assert cve(two_carrier(64)) == pytest.approx(np.pi**2 / 8 - 1, abs=1e-3)

    def test_cve_scale_invariant(self):
        x = two_carrier(10)
        assert cve(x.scaled(2.0)) == pytest.approx(cve(x), rel=1e-12)
        assert cve(x.scaled(-3j)) == pytest.approx(cve(x), rel=1e-12)

    def test_papr_square_wave(self):
        assert papr_real(np.tile([1.0, -1.0], 8)) == 1.0

    def test_papr_cosine(self):
        t = np.arange(1000) / 1000
        assert papr_real(np.cos(2 * np.pi * t)) == pytest.approx(2.0, abs=0.01)

    def test_papr_two_carrier_real_part(self):
        x = two_carrier(10).samples.real
        ref = np.max(x**2) / np.mean(x**2)
        assert papr_real(x) == pytest.approx(ref, rel=1e-14)
        # Re x_k = 1 + cos(pi k / 10): peak 4, mean 1.5
        assert papr_real(x) == pytest.approx(4 / 1.5, rel=1e-12)

    @pytest.mark.parametrize("fn", [pmepr, cve, papr_real])
    def test_all_zero_raises(self, fn):
        with pytest.raises(UndefinedMetricError):
            fn(np.zeros(8))

    def test_design_instance_initial_pmepr(self):
        p = WaveformParams(6, 1, 10)
        codes = np.zeros((6, 1))
        codes[2, 0] = codes[3, 0] = 1
        assert pmepr(synthesize(p, SymbolMatrix(codes))) == pytest.approx(2.0, abs=1e-9)


class TestBound:
    def test_constant_envelope_attains_both_sides(self):
        x = synthesize(WaveformParams(1, 5, 8), SymbolMatrix([[1, 1j, -1, -1j, 1]]))
        bound = pmepr_cve_bound(x)
        assert bound.holds
        assert np.sqrt(pmepr(x)) == pytest.approx(1.0, abs=1e-10)
        assert bound.upper == pytest.approx(1.0, abs=1e-10)

    def test_holds_on_random_qpsk(self, rng):
        p = WaveformParams(8, 4, 4)
        for _ in range(50):
            codes = np.array([1, 1j, -1, -1j])[rng.integers(0, 4, (8, 4))]
            b = pmepr_cve_bound(synthesize(p, SymbolMatrix(codes)))
            assert b.holds and b.upper >= 1.0


class TestCsv:
    def test_signal_round_trip(self, tmp_path, rng):
        p = WaveformParams(3, 2, 4)
        x = BasebandSignal(rng.standard_normal(24) + 1j * rng.standard_normal(24), p)
        write_signal_csv(x, tmp_path / "x.csv")
        back = read_signal_csv(tmp_path / "x.csv", p)
        np.testing.assert_array_equal(back.samples, x.samples)
        header = (tmp_path / "x.csv").read_text().splitlines()[0]
        assert header == "index,re,im,abs"

    def test_symbols_round_trip(self, tmp_path, rng):
        s = SymbolMatrix(rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3)))
        write_symbols_csv(s, tmp_path / "a.csv")
        np.testing.assert_array_equal(read_symbols_csv(tmp_path / "a.csv").codes, s.codes)
