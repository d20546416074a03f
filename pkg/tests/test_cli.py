import os

import numpy as np
import pytest

from spdclab import ConfigError, parse_scenario
from spdclab.cli import main
from spdclab.runner import read_curve_csv, run_compare, write_curve_csv

DESK_CONFIG = """
# desk-scale reference scenario
source.rate_hz         = 2e7
source.coherence_time_s = 1e-9
source.shape           = box
chain.eta_idler        = 1.0
chain.eta_signal       = 1.0
chain.splitter         = 0.5
chain.jitter_s         = 1e-9
window.tauc_s          = 5e-9
window.bin_s           = 5e-11
window.span_s          = 2e-8
run.duration_s         = 2e-3
run.seed               = 11
run.model              = poisson
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "desk.ini"
    path.write_text(DESK_CONFIG)
    return str(path)


class TestScenarioParsing:
    def test_parse_and_defaults(self):
        minimal = "\n".join(
            [
                "source.rate_hz = 1e6",
                "source.coherence_time_s = 1e-9",
                "window.tauc_s = 4e-9",
                "window.bin_s = 1e-10",
                "window.span_s = 1e-8",
                "run.duration_s = 0.1",
            ]
        )
        sc = parse_scenario(minimal)
        assert sc.source.shape == "box"
        assert sc.chain.splitter_ratio == 0.5
        assert sc.model == "poisson"
        assert sc.seed == 1

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            parse_scenario("source.rate_hz = 1e6\nsource.bandwidth = 2")

    def test_missing_key_rejected(self):
        with pytest.raises(ConfigError, match="missing"):
            parse_scenario("source.rate_hz = 1e6")

    def test_span_must_cover_window(self):
        text = DESK_CONFIG.replace("= 2e-8", "= 5e-9")
        with pytest.raises(ConfigError, match="span"):
            parse_scenario(text)

    def test_bad_model(self):
        with pytest.raises(ConfigError):
            parse_scenario(DESK_CONFIG.replace("poisson", "chaotic"))


class TestCliCommands:
    def test_analytic_products(self, config_path, tmp_path, capsys):
        out = tmp_path / "analytic"
        assert main(["analytic", config_path, "-o", str(out)]) == 0
        for name in ("auto_correlation", "cross_correlation", "g2_si",
                     "g2_ss", "p_ssi_diag", "g2_c_diag"):
            assert (out / f"{name}.csv").exists()
        text = (out / "g2_si.csv").read_text()
        assert text.startswith("# spdclab scenario")
        assert "# source.rate_hz = 2e7" in text
        assert "delay_s,value" in text
        d, v, _ = read_curve_csv(out / "g2_si.csv")
        assert v[np.argmin(np.abs(d))] == pytest.approx(51.0)

    def test_smear_products(self, config_path, tmp_path):
        out = tmp_path / "smear"
        assert main(["smear", config_path, "-o", str(out)]) == 0
        d, v, _ = read_curve_csv(out / "g2_si_smeared.csv")
        assert v[np.argmin(np.abs(d))] == pytest.approx(6.0, rel=1e-9)
        plateaus = (out / "plateaus.csv").read_text()
        assert "X,5.0" in plateaus

    def test_simulate_count_round_trip(self, config_path, tmp_path):
        sim = tmp_path / "sim"
        assert main(["simulate", config_path, "-o", str(sim)]) == 0
        evt = sim / "events.evt"
        assert evt.exists()
        cnt = tmp_path / "count"
        assert main(["count", config_path, str(evt), "-o", str(cnt)]) == 0
        d, v, e = read_curve_csv(cnt / "g2bar_si.csv")
        i0 = np.argmin(np.abs(d))
        assert abs(v[i0] - 6.0) < 4 * e[i0]
        assert (cnt / "gbar2_c.csv").exists()
        assert (cnt / "singles.csv").exists()

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("source.rate_hz = 1e6\n")
        assert main(["analytic", str(bad), "-o", str(tmp_path / "x")]) == 2

    def test_guard_exit_code(self, config_path, tmp_path):
        import warnings

        text = DESK_CONFIG.replace("run.model              = poisson",
                                   "run.model              = thermal")
        text = text.replace("source.rate_hz         = 2e7",
                            "source.rate_hz         = 2e9")
        bright = tmp_path / "bright.ini"
        bright.write_text(text)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            code = main(["simulate", str(bright), "-o", str(tmp_path / "y")])
        assert code == 3

    def test_reproducible_bodies(self, config_path, tmp_path):
        def body(path):
            lines = path.read_text().splitlines()
            return [ln for ln in lines if not ln.startswith("#")]

        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        main(["simulate", config_path, "-o", str(out1)])
        main(["count", config_path, str(out1 / "events.evt"), "-o", str(out1)])
        main(["simulate", config_path, "-o", str(out2)])
        main(["count", config_path, str(out2 / "events.evt"), "-o", str(out2)])
        for name in ("g2bar_si.csv", "gbar2_c.csv", "singles.csv"):
            assert body(out1 / name) == body(out2 / name)
        assert (out1 / "events.evt").read_bytes() == (out2 / "events.evt").read_bytes()

    def test_compare_command(self, tmp_path, capsys):
        delays = np.arange(-3, 4) * 1e-9
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        write_curve_csv(a, delays, np.ones(7), np.full(7, 0.1))
        write_curve_csv(b, delays, np.ones(7) + 0.05, np.full(7, 0.1))
        out = tmp_path / "z.csv"
        assert main(["compare", str(a), str(b), "-o", str(out)]) == 0
        captured = capsys.readouterr().out
        assert "max_abs_z" in captured
        result = run_compare(a, b)
        expected = -0.05 / np.hypot(0.1, 0.1)
        assert np.allclose(result.z, expected)
        assert result.max_abs_z == pytest.approx(abs(expected))

    def test_sweep_runs_each_value(self, config_path, tmp_path):
        out = tmp_path / "sweep"
        code = main([
            "sweep", config_path, "--key", "window.tauc_s",
            "--values", "4e-9,5e-9", "-o", str(out), "analytic",
        ])
        assert code == 0
        assert (out / "window_tauc_s=4e-9" / "g2_si.csv").exists()
        assert (out / "window_tauc_s=5e-9" / "g2_si.csv").exists()

    def test_sweep_parallel_env(self, config_path, tmp_path, monkeypatch):
        monkeypatch.setenv("SPDC_LAB_THREADS", "2")
        out = tmp_path / "psweep"
        code = main([
            "sweep", config_path, "--key", "source.rate_hz",
            "--values", "1e7,2e7", "-o", str(out), "analytic",
        ])
        assert code == 0
        assert (out / "source_rate_hz=1e7" / "g2_si.csv").exists()
