import hashlib
import json

import numpy as np
import pytest

from ebthresh import bench
from ebthresh.bench import Method, SimulationReport, SimulationSpec, replication_noise, run_simulation, scaled_sse
from ebthresh.core import Rule
from ebthresh.denoise import Transform
from ebthresh.priors import Gaussian, Laplace, QuasiCauchy
from ebthresh.signals import SIGNAL_NAMES, grid, raw_signal
from ebthresh.signals import test_function as make_signal

# jump locations of the blocks signal
BLOCKS_JUMPS = (0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81)


class TestSignals:
    @pytest.mark.parametrize("name", SIGNAL_NAMES)
    @pytest.mark.parametrize("n", [16, 1000, 1024, 4096])
    def test_unit_sd(self, name, n):
        assert np.std(make_signal(name, n), ddof=1) == pytest.approx(1.0, abs=1e-12)

    def test_doppler_envelope_vanishes(self):
        t = grid(1 << 16)
        f = raw_signal("doppler", t.size)
        assert f[-1] == 0.0
        assert abs(f[0]) <= np.sqrt(t[0])

    @pytest.mark.parametrize("n", [16, 100, 1024, 5000])
    def test_blocks_piecewise_constant(self, n):
        d = np.diff(raw_signal("blocks", n))
        assert np.count_nonzero(np.abs(d) > 1e-12) <= 12
        # every jump sits at one of the published locations
        t = grid(n)
        for i in np.flatnonzero(np.abs(d) > 1e-12):
            assert any(t[i] <= p <= t[i + 1] for p in BLOCKS_JUMPS)

    def test_heavisine_closed_form(self):
        t = np.array([0.1, 0.5, 0.9])
        ref = 4 * np.sin(4 * np.pi * t) - np.sign(t - 0.3) - np.sign(0.72 - t)
        from ebthresh.signals import heavisine

        np.testing.assert_allclose(heavisine(t), ref)

    def test_bumps_peaks(self):
        from ebthresh.signals import bumps

        assert bumps(np.array([0.4]))[0] > 4.2
        assert np.all(bumps(grid(1024)) > 0)

    def test_errors(self):
        with pytest.raises(ValueError):
            make_signal("chirp", 64)
        with pytest.raises(ValueError):
            make_signal("bumps", 8)


class TestScaledSse:
    def test_examples(self):
        f = make_signal("bumps", 1024)
        assert scaled_sse(f, f, 1 / 3) == 0.0
        assert scaled_sse(f + 1 / 3, f, 1 / 3) == pytest.approx(1024, rel=1e-12)

    def test_scaling(self):
        rng = np.random.default_rng(0)
        f, e = rng.standard_normal(64), rng.standard_normal(64)
        assert scaled_sse(f + 2 * e, f, 0.6) == pytest.approx(scaled_sse(f + e, f, 0.3), rel=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            scaled_sse(np.zeros(3), np.zeros(4), 1.0)
        with pytest.raises(ValueError):
            scaled_sse(np.zeros(3), np.zeros(3), 0.0)


class TestMethod:
    def test_prior_methods(self):
        m = Method.parse("laplace-median")
        assert m.label == "ti:laplace-median"
        assert m.config.transform is Transform.TRANSLATION_INVARIANT
        assert m.config.prior == Laplace() and m.config.rule is Rule.MEDIAN and m.config.estimate_scale
        m = Method.parse("dwt:cauchy-mean", wavelet="db4", coarsest=3)
        assert m.label == "dwt:cauchy-mean"
        assert isinstance(m.config.prior, QuasiCauchy) and not m.config.estimate_scale
        assert m.config.wavelet == "db4" and m.config.coarsest_level == 3
        assert Method.parse("TI:Gaussian-Hard").config.prior == Gaussian()

    def test_baselines(self):
        assert Method.parse("sure4").config.baseline == "sure4"
        m = Method.parse("dwt:fdr0.05")
        assert m.label == "dwt:fdr0.05" and m.config.q == 0.05
        assert Method.parse("truth").config is None

    @pytest.mark.parametrize("text", ["", "laplace", "ti:", "foo-median", "laplace-mode", "sure5", "fdr", "fdr0.9",
                                      "swt:laplace-median"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            Method.parse(text)


class TestSpec:
    def test_defaults(self):
        s = SimulationSpec()
        assert s.n == 1024 and s.reps == 100 and s.sigma_e == pytest.approx(1 / 3)
        assert SimulationSpec(noise="low").sigma_e == pytest.approx(1 / 7)

    @pytest.mark.parametrize("kw", [dict(noise="medium"), dict(reps=0), dict(signals=("bumps", "sine")), dict(n=1000), dict(n=16)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SimulationSpec(**kw)

    def test_invalid_method_fails_at_run(self):
        with pytest.raises(ValueError):
            run_simulation(SimulationSpec(reps=1, n=64, methods=("laplace-mode",)))


class TestRunSimulation:
    def test_truth_gives_zeros(self):
        rep = run_simulation(SimulationSpec(reps=1, n=64, methods=("truth",)))
        np.testing.assert_array_equal(rep.mean, 0.0)

    def test_noise_substreams(self):
        a = replication_noise(3, 4, 32)
        b = replication_noise(3, 6, 32)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)
        assert not np.array_equal(a[0], a[1])

    def test_noise_shared_across_signals_and_methods(self, monkeypatch):
        seen = []
        real = bench.denoise

        def spy(y, cfg, fits=None):
            seen.append(y)
            return real(y, cfg, fits=fits)

        monkeypatch.setattr(bench, "denoise", spy)
        spec = SimulationSpec(reps=2, n=128, methods=("laplace-median", "dwt:sure4", "fdr0.05"),
                              signals=("bumps", "doppler"))
        run_simulation(spec)
        noise = replication_noise(spec.seed, spec.reps, spec.n)
        digests = []
        for i, y in enumerate(seen):
            r, k = divmod(i, 6)
            f = make_signal(spec.signals[k // 3], spec.n)
            e = (y - f) / spec.sigma_e
            np.testing.assert_allclose(e, noise[r], atol=1e-12)
            digests.append((r, hashlib.sha256(np.round(e, 9).tobytes()).hexdigest()))
        for r in range(spec.reps):
            assert len({h for rr, h in digests if rr == r}) == 1

    def test_mean_and_median_share_fits(self):
        spec = SimulationSpec(reps=2, n=256, methods=("laplace-median", "laplace-mean"), signals=("blocks",))
        rep = run_simulation(spec)
        assert rep.sse.shape == (2, 1, 2)
        assert not np.array_equal(rep.sse[0], rep.sse[1])

    def test_deterministic_and_parallel(self, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        spec = SimulationSpec(reps=3, n=128, seed=11, methods=("laplace-median", "sure6"))
        a, b = run_simulation(spec), run_simulation(spec)
        c = run_simulation(spec, jobs=2)
        assert a.to_csv() == b.to_csv() == c.to_csv()
        assert a.to_json() == b.to_json() == c.to_json()
        assert run_simulation(SimulationSpec(reps=3, n=128, seed=12, methods=spec.methods)).to_csv() != a.to_csv()

    def test_progress_callback(self):
        calls = []
        run_simulation(SimulationSpec(reps=3, n=64, methods=("truth",)), progress=lambda i, r: calls.append((i, r)))
        assert calls == [(1, 3), (2, 3), (3, 3)]


def _report(sse, methods=("a", "b"), signals=("bumps",)):
    spec = SimulationSpec(reps=sse.shape[2], signals=signals, methods=methods)
    return SimulationReport(spec, list(methods), list(signals), sse, reference=methods[0])


class TestReport:
    def test_mean_and_stderr(self):
        sse = np.array([[[1.0, 2.0, 3.0, 6.0]], [[2.0, 2.0, 2.0, 2.0]]])
        rep = _report(sse)
        np.testing.assert_allclose(rep.mean, [[3.0], [2.0]])
        np.testing.assert_allclose(rep.stderr[0, 0], np.std([1, 2, 3, 6], ddof=1) / 2)
        assert rep.value("b", "bumps") == 2.0

    def test_paired_uses_matched_replications(self):
        base = np.array([10.0, 20.0, 30.0, 40.0])
        sse = np.stack([base, base + np.array([1.0, 1.2, 0.8, 1.0])])[:, None, :]
        (row,) = _report(sse).paired()
        assert row["method"] == "b" and row["reference"] == "a"
        assert row["mean_diff"] == pytest.approx(1.0)
        d = np.array([1.0, 1.2, 0.8, 1.0])
        assert row["se"] == pytest.approx(d.std(ddof=1) / 2)
        # pooled variances would give a z near 0.1; pairing gives about 12
        assert row["z"] == pytest.approx(1.0 / row["se"])
        assert row["z"] > 10

    def test_csv_shape(self):
        rep = _report(np.ones((2, 2, 3)), signals=("bumps", "blocks"))
        assert rep.to_csv() == "method,bumps,blocks\na,1.000000,1.000000\nb,1.000000,1.000000\n"

    def test_json_schema(self, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
        doc = json.loads(_report(np.ones((2, 1, 3))).to_json())
        assert set(doc) >= {"spec", "table", "paired", "created"}
        assert doc["created"] == "1970-01-01T00:00:00+00:00"
        assert doc["table"][0] == {"method": "a", "signal": "bumps", "mean": 1.0, "stderr": 0.0}
        assert doc["spec"]["reps"] == 3
