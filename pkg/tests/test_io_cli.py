import math

import numpy as np
import pytest

from soliton_tbp.cli import main
from soliton_tbp.darboux import auto_grid, synthesize
from soliton_tbp.errors import SpectrumFileError
from soliton_tbp.io import (
    format_signal_csv,
    format_spectrum_document,
    load_signal,
    load_spectrum,
    parse_spectrum_document,
    save_signal,
    save_spectrum,
)
from soliton_tbp.spectrum import DiscreteSpectrum, PhysicalScaling


class TestSpectrumFile:
    def test_round_trip(self, tmp_path):
        s = DiscreteSpectrum.from_arrays([1.0, 0.5], [0.2, -0.3], [2.0, 0.7], [1.0, 4.0])
        scaling = PhysicalScaling(beta2=-2.1e-26, gamma=1.3e-3, T0=1e-11)
        path = tmp_path / "spec.yaml"
        save_spectrum(path, s, scaling)
        s2, scaling2 = load_spectrum(path)
        assert np.array_equal(s2.sigmas, s.sigmas)
        assert np.array_equal(s2.etas, s.etas)
        assert np.array_equal(s2.phis, s.phis)
        assert scaling2 == scaling

    def test_write_is_deterministic(self):
        s = DiscreteSpectrum.from_arrays([1 / 3.0], [0.1], [math.e], [1.0])
        assert format_spectrum_document(s) == format_spectrum_document(s)

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("entries:\n- {sigma: 1.0, omega: 0, eta: 1, phi: 0}\n", "missing field 'n'"),
            ("n: 2\nentries:\n- {sigma: 1.0, omega: 0, eta: 1, phi: 0}\n", "does not match"),
            ("n: 1\nentries:\n- {sigma: 1.0, omega: 0, phi: 0}\n", "missing field 'eta'"),
            ("n: 1\nentries:\n- {sigma: oops, omega: 0, eta: 1, phi: 0}\n", "must be a number"),
            ("n: 1\nentries:\n- {sigma: 1.0, omega: 0, eta: 1, phi: 0, extra: 2}\n", "unknown fields"),
            ("n: 1\nentries: []\n", "non-empty list"),
            ("n: 1\nentries:\n- {sigma: -1.0, omega: 0, eta: 1, phi: 0}\n", "sigma"),
            ("n: [\n", "not valid YAML"),
        ],
    )
    def test_schema_violations(self, text, fragment):
        with pytest.raises(SpectrumFileError, match=fragment):
            parse_spectrum_document(text)


class TestSignalFile:
    def test_round_trip(self, tmp_path):
        s = DiscreteSpectrum.from_arrays([0.5])
        sig = synthesize(s, auto_grid(s, 1e-4))
        path = tmp_path / "sig.csv"
        save_signal(path, sig)
        back = load_signal(path)
        assert back.grid.n_samples == sig.grid.n_samples
        assert back.grid.dt == pytest.approx(sig.grid.dt, rel=1e-12)
        assert np.abs(back.samples - sig.samples).max() == 0.0

    def test_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,real\n0,1\n")
        with pytest.raises(SpectrumFileError, match="header"):
            load_signal(path)

    def test_power_of_two_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        rows = ["t,re,im,abs"] + [f"{i * 0.1},1.0,0.0,1.0" for i in range(100)]
        path.write_text("\n".join(rows) + "\n")
        with pytest.raises(SpectrumFileError, match="power of two"):
            load_signal(path)


@pytest.fixture
def one_soliton_file(tmp_path):
    path = tmp_path / "one.yaml"
    path.write_text("n: 1\nentries:\n- {sigma: 0.5, omega: 0.0, eta: 1.0, phi: 0.0}\n")
    return path


class TestCli:
    def test_synth_peak(self, one_soliton_file, tmp_path):
        out = tmp_path / "sig.csv"
        assert main(["synth", "--spectrum", str(one_soliton_file), "--out", str(out)]) == 0
        sig = load_signal(out)
        assert np.abs(sig.samples).max() == pytest.approx(1.0, abs=1e-4)

    def test_measure_signal_report(self, one_soliton_file, tmp_path, capsys):
        out = tmp_path / "sig.csv"
        main(["synth", "--spectrum", str(one_soliton_file), "--out", str(out)])
        assert main(["measure", "--signal", str(out), "--epsilon", "1e-4"]) == 0
        report = capsys.readouterr().out
        fields = dict(
            line.split(": ") for line in report.strip().splitlines() if ": " in line
        )
        assert float(fields["TB"]) == pytest.approx(9.94, abs=0.1)

    def test_nft_round_trip(self, one_soliton_file, tmp_path):
        sig_path = tmp_path / "sig.csv"
        rec_path = tmp_path / "rec.yaml"
        main(["synth", "--spectrum", str(one_soliton_file), "--out", str(sig_path)])
        assert main(["nft", "--signal", str(sig_path), "--out", str(rec_path)]) == 0
        rec, _ = load_spectrum(rec_path)
        assert rec.n == 1
        assert rec.sigmas[0] == pytest.approx(0.5, abs=1e-3)
        assert rec.etas[0] == pytest.approx(1.0, rel=1e-2)
        # re-synthesize from the recovered file agrees with the original pulse
        out2 = tmp_path / "sig2.csv"
        assert main(["synth", "--spectrum", str(rec_path), "--out", str(out2)]) == 0

    def test_propagate_cli(self, one_soliton_file, tmp_path):
        sig_path = tmp_path / "sig.csv"
        out_path = tmp_path / "out.csv"
        main(["synth", "--spectrum", str(one_soliton_file), "--out", str(sig_path)])
        rc = main([
            "propagate", "--signal", str(sig_path), "--z", "0.5",
            "--steps", "500", "--out", str(out_path),
        ])
        assert rc == 0
        before, after = load_signal(sig_path), load_signal(out_path)
        assert np.abs(np.abs(after.samples) - np.abs(before.samples)).max() < 1e-5

    def test_snapshots(self, one_soliton_file, tmp_path):
        sig_path = tmp_path / "sig.csv"
        main(["synth", "--spectrum", str(one_soliton_file), "--out", str(sig_path)])
        rc = main([
            "propagate", "--signal", str(sig_path), "--z", "0.4", "--steps", "400",
            "--out", str(tmp_path / "snap.csv"), "--snapshots", "4",
        ])
        assert rc == 0
        assert len(list(tmp_path.glob("snap_z*.csv"))) == 5

    def test_measure_spectrum_with_profile_csv(self, tmp_path):
        spec_path = tmp_path / "two.yaml"
        s = DiscreteSpectrum.from_delta_t([0.5, 0.5], [0.2, -0.2], [-0.5, 0.5])
        save_spectrum(spec_path, s)
        csv_path = tmp_path / "profile.csv"
        rc = main([
            "measure", "--spectrum", str(spec_path), "--phases", "4",
            "--L", "1.25", "--z-samples", "5", "--csv", str(csv_path),
        ])
        assert rc == 0
        rows = csv_path.read_text().strip().splitlines()
        assert rows[0] == "z,t_max,b_max"
        assert len(rows) == 6

    def test_measure_needs_exactly_one_input(self, one_soliton_file):
        assert main(["measure", "--epsilon", "1e-4"]) == 1
        assert main([
            "measure", "--signal", "x.csv", "--spectrum", str(one_soliton_file),
        ]) == 1

    def test_exit_codes(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("n: 2\nentries:\n- {sigma: 0.5, omega: 0, eta: 1, phi: 0}\n")
        assert main(["synth", "--spectrum", str(bad), "--out", str(tmp_path / "x.csv")]) == 1
        missing = tmp_path / "missing.yaml"
        assert main(["synth", "--spectrum", str(missing), "--out", str(tmp_path / "x.csv")]) == 1
        # degenerate spectrum -> numeric error -> 2
        degenerate = tmp_path / "deg.yaml"
        degenerate.write_text(
            "n: 2\nentries:\n"
            "- {sigma: 0.5, omega: 0.0, eta: 1.0, phi: 0.0}\n"
            "- {sigma: 0.5, omega: 1e-9, eta: 1.0, phi: 0.0}\n"
        )
        assert main(["synth", "--spectrum", str(degenerate), "--out", str(tmp_path / "x.csv")]) == 1

    def test_synth_determinism(self, one_soliton_file, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["synth", "--spectrum", str(one_soliton_file), "--out", str(a)])
        main(["synth", "--spectrum", str(one_soliton_file), "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_sweep_csv(self, tmp_path):
        spec_path = tmp_path / "two.yaml"
        save_spectrum(spec_path, DiscreteSpectrum.from_arrays([0.5, 1.0]))
        out = tmp_path / "sweep.csv"
        rc = main([
            "sweep", "--spectrum", str(spec_path), "--entry", "1",
            "--dt-min", "0", "--dt-max", "1", "--dt-step", "0.5",
            "--phases", "4", "--out", str(out),
        ])
        assert rc == 0
        rows = out.read_text().strip().splitlines()
        assert rows[0] == "dt,t_max,b_max" and len(rows) == 4

    def test_optimize_cli_tiny(self, tmp_path, monkeypatch):
        # shrink the desk grids so the CLI path stays fast
        import soliton_tbp.cli as cli
        import soliton_tbp.optimizer as opt

        def tiny(constellation, n, paper_fidelity=False, measure=None):
            from soliton_tbp.metrics import MeasureConfig

            return opt.SweepSpec(
                constellation="imaginary",
                n=2,
                ranges={"sigma_1": (0.54, 0.64, 0.1), "dt_1": (1.5, 2.0, 0.5)},
                measure=MeasureConfig(phase_points=4),
            )

        monkeypatch.setattr(cli, "default_sweep", tiny)
        trace = tmp_path / "trace.csv"
        spectrum_out = tmp_path / "opt.yaml"
        rc = main([
            "optimize", "--constellation", "imag", "--n", "2",
            "--trace", str(trace), "--out-spectrum", str(spectrum_out),
        ])
        assert rc == 0
        assert trace.exists() and spectrum_out.exists()
        rec, _ = load_spectrum(spectrum_out)
        assert rec.n == 2

    def test_figures_cli(self, tmp_path):
        out = tmp_path / "figs"
        rc = main([
            "figures", "--out-dir", str(out), "--phases", "4", "--n-max", "3",
        ])
        assert rc == 0
        fig3 = (out / "fig3.csv").read_text().strip().splitlines()
        assert fig3[0] == "case,dt,t_max,b_max"
        rows = [r.split(",") for r in fig3[1:] if r.startswith("imaginary")]
        dts = [float(r[1]) for r in rows]
        t_max = [float(r[2]) for r in rows]
        b_max = [float(r[3]) for r in rows]
        # zero shift: minimal duration, maximal bandwidth
        assert t_max[dts.index(0.0)] == min(t_max)
        assert b_max[dts.index(0.0)] == max(b_max)
        fig5 = (out / "fig5.csv").read_text().strip().splitlines()
        n2 = [r.split(",") for r in fig5[1:] if r.startswith("2,")]
        ts = [float(r[2]) for r in n2]
        assert ts[0] == pytest.approx(ts[-1], rel=0.02)
        for name in ("fig6_imaginary.csv", "fig6_real_axis.csv"):
            rows = (out / name).read_text().strip().splitlines()
            first_bound = rows[1].split(",")
            assert first_bound[0] == "bound" and float(first_bound[2]) == 1.0

    def test_bound_cli(self, tmp_path):
        out = tmp_path / "bound.csv"
        rc = main(["bound", "--n-max", "3", "--constellation", "imag", "--out", str(out)])
        assert rc == 0
        rows = out.read_text().strip().splitlines()
        assert rows[0] == "n,normalized_bound,converged,params"
        assert rows[1].startswith("1,1.0,")
        assert len(rows) == 4
