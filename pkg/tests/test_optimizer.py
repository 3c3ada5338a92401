import numpy as np
import pytest

from soliton_tbp.errors import DegenerateSpectrumError
from soliton_tbp.metrics import MeasureConfig, t_max_b_max
from soliton_tbp.optimizer import (
    RefineSpec,
    SweepSpec,
    TracePoint,
    default_sweep,
    evaluate_point,
    optimize_imaginary,
    optimize_real_axis,
    run_sweep,
    spectrum_for_point,
)

FAST = MeasureConfig(phase_points=4, epsilon=1e-4)


def tiny_imag_spec(refine=None):
    return SweepSpec(
        constellation="imaginary",
        n=2,
        ranges={"sigma_1": (0.54, 0.74, 0.1), "dt_1": (1.5, 2.5, 0.5)},
        refine=refine,
        measure=FAST,
    )


class TestSpecValidation:
    def test_bad_constellation(self):
        with pytest.raises(ValueError):
            SweepSpec("circle", 2, {"sigma_1": (0.5, 1.5, 0.1)})

    def test_bad_order(self):
        with pytest.raises(ValueError):
            SweepSpec("imaginary", 4, {"sigma_1": (0.5, 1.5, 0.1)})

    def test_bad_range(self):
        with pytest.raises(ValueError):
            SweepSpec("imaginary", 2, {"sigma_1": (1.5, 0.5, 0.1)})

    def test_constellation_guards(self):
        with pytest.raises(ValueError):
            optimize_real_axis(tiny_imag_spec())


class TestPointMapping:
    def test_imaginary_point(self):
        s, l_star = spectrum_for_point(
            "imaginary", 2, ("sigma_1", "dt_1"), (0.58, 2.0)
        )
        assert np.allclose(s.sigmas, [0.58, 0.5])
        assert np.allclose(s.delta_ts, [2.0, 0.0])
        assert l_star == 0.0

    def test_imaginary_unordered_rejected(self):
        with pytest.raises(DegenerateSpectrumError):
            spectrum_for_point("imaginary", 2, ("sigma_1", "dt_1"), (0.4, 1.0))

    def test_real_axis_point(self):
        s, l_star = spectrum_for_point(
            "real_axis", 2, ("omega_1", "dt_1"), (0.075, -0.9)
        )
        assert np.allclose(s.omegas, [0.075, -0.075])
        assert np.allclose(s.delta_ts, [-0.9, 0.9])
        assert l_star == pytest.approx(6.0)

    def test_real_axis_zero_omega_degenerate(self):
        with pytest.raises(DegenerateSpectrumError):
            spectrum_for_point("real_axis", 2, ("omega_1", "dt_1"), (0.0, -0.9))


class TestSweep:
    def test_objective_matches_direct_recomputation(self):
        res = run_sweep(tiny_imag_spec())
        point = res.trace[0] if res.trace[0].ok else res.best
        spectrum, _ = spectrum_for_point(
            "imaginary", 2, res.param_names, point.params
        )
        r = t_max_b_max(spectrum, FAST, at_z=0.0, reduce_by_conjugation=True)
        assert point.objective == pytest.approx(r.t_max * r.b_max, rel=1e-12)

    def test_best_is_trace_argmin(self):
        res = run_sweep(tiny_imag_spec())
        finite = [p.objective for p in res.trace if p.ok]
        assert res.best.objective == min(finite)

    def test_refinement_never_worse(self):
        coarse = run_sweep(tiny_imag_spec())
        refined = run_sweep(
            tiny_imag_spec(refine=RefineSpec(steps={"sigma_1": 0.05, "dt_1": 0.25}))
        )
        assert refined.best.objective <= coarse.best.objective + 1e-12

    def test_all_degenerate_grid_raises(self):
        spec = SweepSpec(
            constellation="imaginary",
            n=2,
            ranges={"sigma_1": (0.3, 0.5, 0.1), "dt_1": (0.0, 0.0, 1.0)},
            measure=FAST,
        )
        with pytest.raises(DegenerateSpectrumError):
            run_sweep(spec)

    def test_degenerate_points_logged_as_nan(self, tmp_path):
        spec = SweepSpec(
            constellation="imaginary",
            n=2,
            ranges={"sigma_1": (0.5, 0.6, 0.1), "dt_1": (0.0, 0.0, 1.0)},
            measure=FAST,
        )
        res = run_sweep(spec, trace_path=tmp_path / "trace.csv")
        rejected = [p for p in res.trace if not p.ok]
        assert len(rejected) == 1  # sigma_1 = 0.5 collides with the pinned 0.5
        text = (tmp_path / "trace.csv").read_text().splitlines()
        assert text[0] == "sigma_1,dt_1,T_hat,B_hat,objective"
        assert any("nan" in row for row in text[1:])

    def test_resume_skips_completed(self, tmp_path):
        trace = tmp_path / "trace.csv"
        first = run_sweep(tiny_imag_spec(), trace_path=trace)
        rows_before = trace.read_text().splitlines()
        second = run_sweep(tiny_imag_spec(), trace_path=trace)
        rows_after = trace.read_text().splitlines()
        assert rows_before == rows_after  # nothing re-evaluated or re-written
        assert second.best.params == first.best.params
        assert second.best.objective == first.best.objective

    def test_ratio_normalized_by_reference(self):
        res = run_sweep(tiny_imag_spec())
        assert res.tbp_per_ev_ratio == pytest.approx(
            res.best.objective / 2.0 / res.reference_tbp, rel=1e-12
        )
        assert res.tbp_per_ev_ratio > 0.0


class TestRealAxisSweep:
    def test_tiny_sweep_reports_l_star(self):
        spec = SweepSpec(
            constellation="real_axis",
            n=2,
            ranges={"omega_1": (0.1, 0.3, 0.1), "dt_1": (-1.0, -0.5, 0.5)},
            measure=FAST,
            z_samples=3,
        )
        res = run_sweep(spec)
        assert res.l_star is not None and res.l_star > 0.0
        w1, d1 = res.best_params["omega_1"], res.best_params["dt_1"]
        assert res.l_star == pytest.approx(abs(d1 / (2.0 * w1)))


class TestDefaults:
    def test_paper_fidelity_grids(self):
        spec = default_sweep("imaginary", 2, paper_fidelity=True)
        assert spec.ranges["sigma_1"] == (0.5, 1.5, 0.1)
        assert spec.ranges["dt_1"] == (0.0, 5.0, 0.25)
        assert spec.measure.phase_points == 128

    def test_desk_defaults_thinned(self):
        spec = default_sweep("imaginary", 2)
        assert spec.measure.phase_points == 16
        assert spec.ranges["dt_1"][2] == 0.5

    def test_real_axis_ranges(self):
        spec = default_sweep("real_axis", 3, paper_fidelity=True)
        assert spec.ranges["omega_1"] == (0.0, 1.0, 0.05)
        assert spec.ranges["dt_3"] == (-3.0, 0.0, 0.2)


class TestDirectEvaluation:
    def test_table_point_n2(self):
        point, ratio, _ = evaluate_point(
            "imaginary", 2, {"sigma_1": 0.58, "dt_1": 2.0},
            MeasureConfig(phase_points=16),
        )
        assert ratio == pytest.approx(0.89, abs=0.03)
