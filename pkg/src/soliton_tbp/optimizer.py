"""Brute-force minimization of the link-aware time-bandwidth product.

Two eigenvalue families are searched.  On the imaginary axis the amplitude
magnitudes are distance-invariant, so the objective is the phase-maximized
T*B at z = 0 over a grid of the free sigmas and temporal shifts (smallest
sigma pinned to 0.5, one shift pinned to 0, shift of the second-smallest
kept non-negative; these pins cost nothing by the invariance
transformations).  Parallel to the real axis the frequency offsets are
mirrored (omega_2 = -omega_1, dt_2 = -dt_1) with signs chosen so the
components drift together, collide, and separate; the link length is then
fixed by the precompensation, L = |dt_1 / (2*omega_1)|, and T is maximized
over [0, L].

Every evaluated grid point lands in an append-only trace (CSV), written in
enumeration order regardless of worker scheduling, so long sweeps are
resumable and the reported optimum is always the argmin over the full
trace.  Grid points whose spectra are degenerate (coinciding eigenvalues,
unordered sigmas) are recorded with NaN objectives.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateSpectrumError
from .metrics import MeasureConfig, single_soliton_tbp, t_hat_b_hat, t_max_b_max
from .spectrum import DiscreteSpectrum

CONSTELLATIONS = ("imaginary", "real_axis")

THREADS_ENV = "SOLITON_TBP_THREADS"


@dataclass(frozen=True)
class RefineSpec:
    """Local refinement box: +-radius coarse steps around the optimum."""

    radius_steps: float = 1.0
    steps: dict = field(default_factory=dict)  # param name -> fine step


@dataclass(frozen=True)
class SweepSpec:
    """Exhaustive sweep description.

    Attributes:
        constellation: "imaginary" or "real_axis".
        n: soliton order, 2 or 3 for exhaustive mode.
        ranges: ordered {param name: (lo, hi, step)}.
        refine: optional refinement around the coarse argmin.
        measure: measurement configuration (epsilon, definition, M, ...).
        z_samples: distance samples for the real-axis objective.
    """

    constellation: str
    n: int
    ranges: dict
    refine: RefineSpec | None = None
    measure: MeasureConfig = field(default_factory=MeasureConfig)
    z_samples: int | None = None

    def __post_init__(self):
        if self.constellation not in CONSTELLATIONS:
            raise ValueError(f"constellation must be one of {CONSTELLATIONS}")
        if self.n not in (2, 3):
            raise ValueError("exhaustive sweeps support n = 2 or 3")
        if not self.ranges:
            raise ValueError("ranges must not be empty")
        for name, (lo, hi, step) in self.ranges.items():
            if not (step > 0 and hi >= lo):
                raise ValueError(f"bad range for {name}: {(lo, hi, step)}")


def default_sweep(
    constellation: str,
    n: int,
    paper_fidelity: bool = False,
    measure: MeasureConfig | None = None,
) -> SweepSpec:
    """Published grids (paper_fidelity) or 2x-thinned desk-scale grids."""
    if measure is None:
        measure = MeasureConfig(phase_points=128 if paper_fidelity else 16)
    if constellation == "imaginary":
        s_step, d_step = (0.1, 0.25) if paper_fidelity else (0.2, 0.5)
        if n == 2:
            ranges = {"sigma_1": (0.5, 1.5, s_step), "dt_1": (0.0, 5.0, d_step)}
            if not paper_fidelity:
                ranges["sigma_1"] = (0.54, 1.5, s_step)
        else:
            ranges = {
                "sigma_1": (0.5, 1.5, s_step),
                "sigma_2": (0.5, 1.5, s_step),
                "dt_1": (-5.0, 5.0, 2 * d_step if not paper_fidelity else d_step),
                "dt_2": (0.0, 5.0, d_step),
            }
            if not paper_fidelity:
                # interleave the thinned grids with the pinned smallest sigma
                # so ordered pairs near it stay reachable
                ranges["sigma_1"] = (0.7, 1.5, s_step)
                ranges["sigma_2"] = (0.6, 1.4, s_step)
        refine = RefineSpec(steps={name: (0.02 if name.startswith("sigma") else 0.05)
                                   for name in ranges})
    else:
        w_step, d_step = (0.05, 0.2) if paper_fidelity else (0.1, 0.4)
        ranges = {"omega_1": (0.0, 1.0, w_step), "dt_1": (-4.0, 0.0, d_step)}
        if n == 3:
            ranges["omega_3"] = (-1.0, 1.0, 2 * w_step)
            ranges["dt_3"] = (-3.0, 0.0, d_step)
        refine = RefineSpec(steps={name: (0.01 if name.startswith("omega") else 0.05)
                                   for name in ranges})
    return SweepSpec(
        constellation=constellation,
        n=n,
        ranges=ranges,
        refine=refine if paper_fidelity or n == 2 else None,
        measure=measure,
        z_samples=None if paper_fidelity else 9,
    )


@dataclass(frozen=True)
class TracePoint:
    params: tuple[float, ...]
    t_hat: float
    b_hat: float
    objective: float

    @property
    def ok(self) -> bool:
        return math.isfinite(self.objective)


@dataclass(frozen=True)
class SweepResult:
    """Optimizer output with the full evaluation trace."""

    spec: SweepSpec
    param_names: tuple[str, ...]
    best: TracePoint
    best_spectrum: DiscreteSpectrum
    tbp_per_ev_ratio: float
    reference_tbp: float
    l_star: float | None
    trace: tuple[TracePoint, ...]

    @property
    def best_params(self) -> dict:
        return dict(zip(self.param_names, self.best.params))


def spectrum_for_point(constellation: str, n: int, names, values) -> tuple[DiscreteSpectrum, float]:
    """Map sweep parameters to a spectrum and its link length.

    Raises DegenerateSpectrumError (or ValueError) for invalid points so the
    sweep can log and skip them.
    """
    p = dict(zip(names, values))
    if constellation == "imaginary":
        sigmas = [p.get(f"sigma_{k}", None) for k in range(1, n)] + [0.5]
        if any(s is None for s in sigmas):
            raise ValueError("missing sigma parameter")
        for a, b in zip(sigmas, sigmas[1:]):
            if not a > b:  # enforce the sorted-eigenvalue convention
                raise DegenerateSpectrumError(f"sigmas not strictly decreasing: {sigmas}")
        dts = [p.get(f"dt_{k}", 0.0) for k in range(1, n)] + [0.0]
        return DiscreteSpectrum.from_delta_t(sigmas, None, dts), 0.0
    # real_axis: mirrored pair (+ optional third component for n = 3)
    w1, d1 = p["omega_1"], p["dt_1"]
    omegas = [w1, -w1]
    dts = [d1, -d1]
    if n == 3:
        omegas.append(p["omega_3"])
        dts.append(p["dt_3"])
    spec = DiscreteSpectrum.from_delta_t([0.5] * n, omegas, dts)
    l_star = abs(d1 / (2.0 * w1)) if w1 != 0.0 and d1 != 0.0 else 0.0
    return spec, l_star


def _grid_points(ranges: dict) -> list[tuple[float, ...]]:
    axes = []
    for lo, hi, step in ranges.values():
        count = int(round((hi - lo) / step)) + 1
        axes.append(np.round(lo + step * np.arange(count), 12))
    mesh = np.meshgrid(*axes, indexing="ij")
    return [tuple(float(v) for v in row) for row in np.stack([g.ravel() for g in mesh], axis=1)]


def _key(params) -> tuple:
    return tuple(round(float(v), 9) for v in params)


def _read_trace(path: Path, n_params: int) -> dict:
    done = {}
    if path is None or not path.exists():
        return done
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        for row in reader:
            params = tuple(float(v) for v in row[:n_params])
            done[_key(params)] = TracePoint(
                params, float(row[n_params]), float(row[n_params + 1]), float(row[n_params + 2])
            )
    return done


def _worker_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _run_points(spec: SweepSpec, names, points, done, writer):
    """Evaluate points not in `done`, appending rows in enumeration order."""

    def evaluate(params):
        key = _key(params)
        if key in done:
            return done[key]
        try:
            spectrum, l_star = spectrum_for_point(spec.constellation, spec.n, names, params)
        except (DegenerateSpectrumError, ValueError):
            return TracePoint(params, math.nan, math.nan, math.nan)
        try:
            if spec.constellation == "imaginary":
                r = t_max_b_max(spectrum, spec.measure, at_z=0.0, reduce_by_conjugation=True)
                t_hat, b_hat = r.t_max, r.b_max
            else:
                r = t_hat_b_hat(spectrum, spec.measure, l_star, z_samples=spec.z_samples)
                t_hat, b_hat = r.t_hat, r.b_hat
        except Exception:
            return TracePoint(params, math.nan, math.nan, math.nan)
        return TracePoint(params, float(t_hat), float(b_hat), float(t_hat * b_hat))

    results = []
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        for point in pool.map(evaluate, points):
            results.append(point)
            if _key(point.params) not in done:
                done[_key(point.params)] = point
                if writer is not None:
                    writer.writerow([repr(v) for v in point.params]
                                    + [repr(point.t_hat), repr(point.b_hat), repr(point.objective)])
    return results


def run_sweep(spec: SweepSpec, trace_path: str | os.PathLike | None = None) -> SweepResult:
    """Exhaustive sweep with optional refinement and resumable trace.

    The reported optimum is the argmin of the objective over every evaluated
    point (coarse and refined); ties resolve to the lexicographically
    smallest parameter vector.
    """
    names = tuple(spec.ranges.keys())
    points = _grid_points(spec.ranges)
    trace_path = Path(trace_path) if trace_path is not None else None
    done = _read_trace(trace_path, len(names))

    fh = writer = None
    if trace_path is not None:
        new_file = not trace_path.exists()
        fh = open(trace_path, "a", newline="")
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(list(names) + ["T_hat", "B_hat", "objective"])
    try:
        results = _run_points(spec, names, points, done, writer)
        if spec.refine is not None:
            best = _argmin(results)
            if best is not None:
                fine = {}
                for name, (lo, hi, step) in spec.ranges.items():
                    center = best.params[names.index(name)]
                    radius = spec.refine.radius_steps * step
                    fine_step = spec.refine.steps.get(name, step / 5.0)
                    fine[name] = (
                        max(lo, center - radius),
                        min(hi, center + radius),
                        fine_step,
                    )
                results += _run_points(spec, names, _grid_points(fine), done, writer)
    finally:
        if fh is not None:
            fh.close()

    best = _argmin(list(done.values()))
    if best is None:
        raise DegenerateSpectrumError("no evaluable grid point in the sweep")
    spectrum, l_star = spectrum_for_point(spec.constellation, spec.n, names, best.params)
    reference = single_soliton_tbp(spec.measure)
    ratio = best.objective / spec.n / reference
    return SweepResult(
        spec=spec,
        param_names=names,
        best=best,
        best_spectrum=spectrum,
        tbp_per_ev_ratio=ratio,
        reference_tbp=reference,
        l_star=l_star if spec.constellation == "real_axis" else None,
        trace=tuple(sorted(done.values(), key=lambda p: p.params)),
    )


def _argmin(points) -> TracePoint | None:
    best = None
    for p in points:
        if not p.ok:
            continue
        if best is None or (p.objective, p.params) < (best.objective, best.params):
            best = p
    return best


def optimize_imaginary(spec: SweepSpec, trace_path=None) -> SweepResult:
    """Sweep the imaginary-axis family (see `default_sweep`)."""
    if spec.constellation != "imaginary":
        raise ValueError("spec is not an imaginary-constellation sweep")
    return run_sweep(spec, trace_path)


def optimize_real_axis(spec: SweepSpec, trace_path=None) -> SweepResult:
    """Sweep the real-axis-parallel family (see `default_sweep`)."""
    if spec.constellation != "real_axis":
        raise ValueError("spec is not a real-axis sweep")
    return run_sweep(spec, trace_path)


def evaluate_point(
    constellation: str,
    n: int,
    params: dict,
    measure: MeasureConfig,
    z_samples: int | None = None,
) -> tuple[TracePoint, float, float]:
    """Objective at one parameter vector plus its normalized ratio.

    Used for direct checks of published optima without running a sweep.
    """
    names = tuple(params.keys())
    values = tuple(float(v) for v in params.values())
    spectrum, l_star = spectrum_for_point(constellation, n, names, values)
    if constellation == "imaginary":
        r = t_max_b_max(spectrum, measure, at_z=0.0)
        t_hat, b_hat = r.t_max, r.b_max
    else:
        r = t_hat_b_hat(spectrum, measure, l_star, z_samples=z_samples)
        t_hat, b_hat = r.t_hat, r.b_hat
    reference = single_soliton_tbp(measure)
    point = TracePoint(values, t_hat, b_hat, t_hat * b_hat)
    return point, t_hat * b_hat / n / reference, l_star
