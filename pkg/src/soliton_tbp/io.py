"""File formats: spectrum documents (YAML) and signal tables (CSV).

Spectrum file layout::

    n: 2
    entries:
    - {sigma: 1.0, omega: 0.0, eta: 1.0, phi: 0.0}
    - {sigma: 0.5, omega: 0.0, eta: 1.0, phi: 0.0}
    physical:            # optional
      beta2_s2_per_m: -2.1e-26
      gamma_per_W_m: 1.3e-3
      T0_s: 1.0e-11

``phi`` is in radians.  Signal files are CSV with header ``t,re,im,abs``,
one row per sample, time ascending.  Writers format floats with repr so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from .darboux import SampledSignal, TimeGrid
from .errors import SpectrumFileError
from .spectrum import DiscreteSpectrum, PhysicalScaling

ENTRY_FIELDS = ("sigma", "omega", "eta", "phi")
PHYSICAL_FIELDS = ("beta2_s2_per_m", "gamma_per_W_m", "T0_s")


def _require_number(mapping, field, where):
    if field not in mapping:
        raise SpectrumFileError(f"{where}: missing field {field!r}")
    value = mapping[field]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpectrumFileError(f"{where}: field {field!r} must be a number, got {value!r}")
    return float(value)


def parse_spectrum_document(text: str) -> tuple[DiscreteSpectrum, PhysicalScaling | None]:
    """Parse and validate a spectrum document.

    Raises SpectrumFileError naming the offending field; YAML syntax errors
    carry the line/column mark of the parser.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpectrumFileError(f"not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpectrumFileError("document root must be a mapping")
    if "n" not in doc:
        raise SpectrumFileError("missing field 'n'")
    n = doc["n"]
    entries = doc.get("entries")
    if not isinstance(entries, list) or not entries:
        raise SpectrumFileError("field 'entries' must be a non-empty list")
    if not isinstance(n, int) or n != len(entries):
        raise SpectrumFileError(f"field 'n' = {n!r} does not match {len(entries)} entries")
    rows = []
    for i, entry in enumerate(entries):
        where = f"entries[{i}]"
        if not isinstance(entry, dict):
            raise SpectrumFileError(f"{where}: must be a mapping")
        unknown = set(entry) - set(ENTRY_FIELDS)
        if unknown:
            raise SpectrumFileError(f"{where}: unknown fields {sorted(unknown)}")
        rows.append(tuple(_require_number(entry, f, where) for f in ENTRY_FIELDS))
    try:
        spectrum = DiscreteSpectrum.from_arrays(*(np.array(col) for col in zip(*rows)))
    except Exception as exc:
        raise SpectrumFileError(f"entries: {exc}") from exc

    scaling = None
    if "physical" in doc and doc["physical"] is not None:
        phys = doc["physical"]
        if not isinstance(phys, dict):
            raise SpectrumFileError("field 'physical' must be a mapping")
        unknown = set(phys) - set(PHYSICAL_FIELDS)
        if unknown:
            raise SpectrumFileError(f"physical: unknown fields {sorted(unknown)}")
        values = [_require_number(phys, f, "physical") for f in PHYSICAL_FIELDS]
        try:
            scaling = PhysicalScaling(beta2=values[0], gamma=values[1], T0=values[2])
        except Exception as exc:
            raise SpectrumFileError(f"physical: {exc}") from exc
    return spectrum, scaling


def _yaml_float(value: float) -> str:
    # YAML 1.1 floats need a dot: bare '1e-11' would load as a string
    text = repr(float(value))
    if "e" in text and "." not in text:
        mantissa, exponent = text.split("e")
        text = f"{mantissa}.0e{exponent}"
    return text


def format_spectrum_document(
    spectrum: DiscreteSpectrum, scaling: PhysicalScaling | None = None
) -> str:
    lines = [f"n: {spectrum.n}", "entries:"]
    for ev, amp in spectrum.entries:
        lines.append(
            f"- {{sigma: {_yaml_float(ev.sigma)}, omega: {_yaml_float(ev.omega)}, "
            f"eta: {_yaml_float(amp.eta)}, phi: {_yaml_float(amp.phi)}}}"
        )
    if scaling is not None:
        lines.append("physical:")
        lines.append(f"  beta2_s2_per_m: {_yaml_float(scaling.beta2)}")
        lines.append(f"  gamma_per_W_m: {_yaml_float(scaling.gamma)}")
        lines.append(f"  T0_s: {_yaml_float(scaling.T0)}")
    return "\n".join(lines) + "\n"


def load_spectrum(path) -> tuple[DiscreteSpectrum, PhysicalScaling | None]:
    return parse_spectrum_document(Path(path).read_text())


def save_spectrum(path, spectrum: DiscreteSpectrum, scaling: PhysicalScaling | None = None):
    Path(path).write_text(format_spectrum_document(spectrum, scaling))


def format_signal_csv(signal: SampledSignal) -> str:
    lines = ["t,re,im,abs"]
    times = signal.grid.times
    for t, q in zip(times, signal.samples):
        lines.append(f"{float(t)!r},{float(q.real)!r},{float(q.imag)!r},{float(abs(q))!r}")
    return "\n".join(lines) + "\n"


def save_signal(path, signal: SampledSignal):
    Path(path).write_text(format_signal_csv(signal))


def load_signal(path) -> SampledSignal:
    """Read a signal CSV back into a uniform power-of-two sampled signal."""
    rows = Path(path).read_text().strip().splitlines()
    if not rows or rows[0].strip() != "t,re,im,abs":
        raise SpectrumFileError(f"{path}: expected header 't,re,im,abs'")
    t, q = [], []
    for i, row in enumerate(rows[1:], start=2):
        parts = row.split(",")
        if len(parts) != 4:
            raise SpectrumFileError(f"{path}:{i}: expected 4 columns")
        try:
            t.append(float(parts[0]))
            q.append(complex(float(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise SpectrumFileError(f"{path}:{i}: {exc}") from exc
    t = np.asarray(t)
    n = len(t)
    if n < 2 or (n & (n - 1)) != 0:
        raise SpectrumFileError(f"{path}: sample count {n} is not a power of two")
    dt = (t[-1] - t[0]) / (n - 1)
    if dt <= 0 or not np.allclose(np.diff(t), dt, rtol=1e-6, atol=1e-12 * abs(dt)):
        raise SpectrumFileError(f"{path}: time axis is not uniformly ascending")
    grid = TimeGrid(t_start=float(t[0]), dt=float(dt), n_samples=n)
    return SampledSignal(grid=grid, samples=np.asarray(q))
