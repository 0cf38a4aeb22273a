"""Classical Michelson / OCT reference: fringes, autocorrelation, coherence time.

All spectra are held on an angular-frequency grid.  A path difference ``x``
enters as the phase ``w x / c``; with a delay ``tau`` the phase is ``w tau``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks

from qoct.errors import CoverageError, PreconditionError
from qoct.spectra import SpectralProfile, trapezoid_weights
from qoct.units import SI, Units

_BLOCK = 256


def monochromatic_intensity(I_s0, theta):
    """Detector intensity (1/2) I_s0 (1 + cos theta) for one wavelength."""
    if np.any(np.asarray(I_s0) < 0):
        raise PreconditionError("source intensity must be non-negative")
    return 0.5 * np.asarray(I_s0) * (1.0 + np.cos(theta))


@dataclass(frozen=True)
class PowerSpectrum:
    """Sampled source power density on an angular-frequency grid."""

    omegas: np.ndarray
    density: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        density = np.asarray(self.density, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if not (omegas.shape == density.shape == weights.shape) or omegas.ndim != 1:
            raise PreconditionError("omegas, density and weights must be 1-D arrays of equal length")
        if np.any(np.diff(omegas) <= 0):
            raise PreconditionError("spectrum frequencies must be strictly increasing")
        if np.any(density < 0):
            raise PreconditionError("power spectrum samples must be non-negative")
        for a in (omegas, density, weights):
            a.flags.writeable = False
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "density", density)
        object.__setattr__(self, "weights", weights)

    @property
    def total_power(self) -> float:
        return float(np.sum(self.weights * self.density))

    @classmethod
    def from_samples(cls, omegas: Sequence[float], density: Sequence[float]) -> "PowerSpectrum":
        """Uniformly spaced samples; trapezoidal weights."""
        omegas = np.asarray(omegas, dtype=float)
        if omegas.size < 2:
            raise PreconditionError("need at least two spectral samples")
        step = (omegas[-1] - omegas[0]) / (omegas.size - 1)
        if not np.allclose(np.diff(omegas), step, rtol=1e-9, atol=0):
            raise PreconditionError("from_samples expects a uniform grid")
        return cls(omegas, density, trapezoid_weights(omegas.size, step))

    @classmethod
    def from_wavenumbers(
        cls, wavenumbers: Sequence[float], density_k: Sequence[float], units: Units = SI
    ) -> "PowerSpectrum":
        """Convert I(k) samples to I(w) with w = c k, preserving total power."""
        k = np.asarray(wavenumbers, dtype=float)
        return cls.from_samples(units.c * k, np.asarray(density_k, dtype=float) / units.c)


def gaussian_power_spectrum(
    omega0: float,
    sigma: float,
    total_power: float = 1.0,
    n_bins: int = 4096,
    span_in_sigmas: float = 6.0,
) -> PowerSpectrum:
    """Gaussian source spectrum exp(-(w - w0)^2 / (2 sigma^2)) scaled to ``total_power``."""
    if not sigma > 0 or not omega0 > 0:
        raise PreconditionError("omega0 and sigma must be positive")
    lo = max(omega0 - span_in_sigmas * sigma, 0.0)
    omegas = np.linspace(lo, omega0 + span_in_sigmas * sigma, n_bins)
    shape = np.exp(-((omegas - omega0) ** 2) / (2.0 * sigma**2))
    spec = PowerSpectrum.from_samples(omegas, shape)
    return PowerSpectrum(spec.omegas, shape * (total_power / spec.total_power), spec.weights)


def _transform(spectrum: PowerSpectrum, phase_per_unit: np.ndarray) -> np.ndarray:
    """sum_j w_j I_j exp(i w_j s) for each s, carrier factored out for accuracy."""
    weights = spectrum.weights * spectrum.density
    centre = float(np.sum(weights * spectrum.omegas) / np.sum(weights))
    detuning = spectrum.omegas - centre
    out = np.empty(phase_per_unit.shape, dtype=complex)
    for start in range(0, phase_per_unit.size, _BLOCK):
        block = phase_per_unit[start : start + _BLOCK]
        out[start : start + _BLOCK] = np.sum(weights * np.exp(1j * np.outer(block, detuning)), axis=1)
    return out * np.exp(1j * centre * phase_per_unit)


def classical_G1(spectrum: PowerSpectrum, x, units: Units = SI, normalized: bool = False):
    """Autocorrelation integral of I(k) e^{ikx} over the sampled support.

    ``normalized=True`` divides by the total power (the complex degree of
    coherence for equal arm intensities).
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    g = _transform(spectrum, xs / units.c)
    if normalized:
        g = g / spectrum.total_power
    return g[0] if np.ndim(x) == 0 else g


def polychromatic_intensity(spectrum: PowerSpectrum, x, units: Units = SI):
    """(1/2) I_s0 + (1/2) Re G(x): the monochromatic fringe integrated over the spectrum."""
    G = classical_G1(spectrum, x, units)
    return 0.5 * spectrum.total_power + 0.5 * np.real(G)


def gaussian_g1(tau, omega0: float, sigma: float):
    """exp(-sigma^2 tau^2 / 2) exp(i omega0 tau)."""
    if not sigma > 0:
        raise PreconditionError("sigma must be positive")
    t = np.asarray(tau, dtype=float)
    g = np.exp(-0.5 * (sigma * t) ** 2) * np.exp(1j * omega0 * t)
    return complex(g) if g.ndim == 0 else g


def _tail_estimate(tau: np.ndarray, power: np.ndarray, end: int) -> float:
    """Integral of |g|^2 beyond one end, assuming exponential decay at the last two samples."""
    if end == 0:
        f0, f1, dt = power[0], power[1], tau[1] - tau[0]
    else:
        f0, f1, dt = power[-1], power[-2], tau[-1] - tau[-2]
    if f0 == 0:
        return 0.0
    if f1 <= f0:
        return math.inf
    rate = math.log(f1 / f0) / dt
    return f0 / rate


def coherence_time(tau, g1) -> float:
    """Power-equivalent width pi^(-1/2) * integral |g(tau)|^2 d tau (trapezoid).

    Raises :class:`CoverageError` when the estimated mass of |g|^2 beyond
    the sampled range exceeds 1e-6 of the total.
    """
    t = np.asarray(tau, dtype=float)
    power = np.abs(np.asarray(g1)) ** 2
    if t.ndim != 1 or t.shape != power.shape or t.size < 3:
        raise PreconditionError("tau and g1 must be 1-D arrays of equal length >= 3")
    if np.any(np.diff(t) <= 0):
        raise PreconditionError("tau samples must be strictly increasing")
    integral = float(np.sum(0.5 * (power[1:] + power[:-1]) * np.diff(t)))
    tail = _tail_estimate(t, power, 0) + _tail_estimate(t, power, -1)
    if not tail <= 1e-6 * integral:
        raise CoverageError(
            f"|g1|^2 is not resolved to zero at the sample edges (tail mass estimate {tail:.3g})"
        )
    return integral / math.sqrt(math.pi)


def coherence_length(t_c: float, units: Units = SI) -> float:
    if not t_c > 0:
        raise PreconditionError("coherence time must be positive")
    return units.c * t_c


@dataclass(frozen=True)
class Reflector:
    depth: float
    reflectivity: float

    def __post_init__(self):
        if not self.depth >= 0:
            raise PreconditionError(f"reflector depth must be non-negative, got {self.depth!r}")
        if not 0 <= self.reflectivity <= 1:
            raise PreconditionError(f"reflectivity must lie in [0, 1], got {self.reflectivity!r}")


@dataclass(frozen=True)
class Interferogram:
    tau: np.ndarray
    intensity: np.ndarray
    g1: np.ndarray | None = None
    envelope: np.ndarray | None = None

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        if tau.ndim != 1 or np.any(np.diff(tau) <= 0):
            raise PreconditionError("interferogram axis must be strictly increasing")
        for name in ("intensity", "g1", "envelope"):
            arr = getattr(self, name)
            if arr is not None and np.shape(arr) != tau.shape:
                raise PreconditionError(f"{name} has shape {np.shape(arr)}, axis has {tau.shape}")
        object.__setattr__(self, "tau", tau)

    def to_csv(self) -> str:
        """``tau,intensity[,g1_re,g1_im]`` with shortest round-trip decimals."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["tau", "intensity"]
        if self.g1 is not None:
            header += ["g1_re", "g1_im"]
        writer.writerow(header)
        for i, t in enumerate(self.tau):
            row = [repr(float(t)), repr(float(self.intensity[i]))]
            if self.g1 is not None:
                row += [repr(float(self.g1[i].real)), repr(float(self.g1[i].imag))]
            writer.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Interferogram":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        cols = {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}
        g1 = cols["g1_re"] + 1j * cols["g1_im"] if "g1_re" in cols else None
        return cls(cols["tau"], cols["intensity"], g1)


def layered_sample_interferogram(
    reflectors: Sequence[Reflector],
    profile: SpectralProfile,
    tau_grid,
    units: Units = SI,
    reference_power: float = 1.0,
    envelope_only: bool = False,
) -> Interferogram:
    """Detector trace for a stack of partial reflectors in the sample arm.

    I_D(tau) = I_r/2 + I_s/2 + sum_j sqrt(I_r R_j) Re g(tau - 2 d_j / c),
    with I_s = sum_j R_j.  The analytic envelope sum_j sqrt(I_r R_j) |g(...)|
    is always attached; ``envelope_only=True`` reports it as the intensity.
    """
    reflectors = [r if isinstance(r, Reflector) else Reflector(*r) for r in reflectors]
    tau = np.asarray(tau_grid, dtype=float)
    fringe = np.zeros(tau.shape)
    envelope = np.zeros(tau.shape)
    for r in reflectors:
        g = gaussian_g1(tau - 2.0 * r.depth / units.c, profile.omega0, profile.sigma)
        amp = math.sqrt(reference_power * r.reflectivity)
        fringe += amp * np.real(g)
        envelope += amp * np.abs(g)
    dc = 0.5 * reference_power + 0.5 * sum(r.reflectivity for r in reflectors)
    intensity = envelope if envelope_only else dc + fringe
    return Interferogram(tau, intensity, envelope=envelope)


def envelope_peaks(tau, envelope, rel_height: float = 1e-3) -> np.ndarray:
    """Locations of local envelope maxima above ``rel_height`` times the global maximum."""
    env = np.asarray(envelope, dtype=float)
    if env.size == 0 or env.max() <= 0:
        return np.empty(0)
    idx, _ = find_peaks(np.concatenate(([-np.inf], env, [-np.inf])), height=rel_height * env.max())
    return np.asarray(tau, dtype=float)[idx - 1]


def envelope_fwhm(tau, envelope) -> float:
    """Full width at half maximum of a single-peaked envelope, linearly interpolated."""
    t = np.asarray(tau, dtype=float)
    env = np.asarray(envelope, dtype=float)
    i = int(np.argmax(env))
    half = 0.5 * env[i]
    above = env >= half
    lo = i
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i
    while hi < env.size - 1 and above[hi + 1]:
        hi += 1
    if lo == 0 or hi == env.size - 1:
        raise CoverageError("envelope does not fall below half maximum inside the sampled range")
    left = np.interp(half, [env[lo - 1], env[lo]], [t[lo - 1], t[lo]])
    right = np.interp(half, [env[hi + 1], env[hi]], [t[hi + 1], t[hi]])
    return float(right - left)
