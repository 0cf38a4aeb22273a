"""Gaussian spectral amplitudes and discretised single-photon wavepackets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qoct.errors import BasisMismatchError, PreconditionError
from qoct.fock import ModeBasis, StateVector, make_basis, mode_sum_annihilation, vacuum_state
from qoct.units import SI, Units

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class SpectralProfile:
    """Gaussian amplitude centred at ``omega0`` (rad/s).

    ``sigma`` is the scale parameter of the amplitude: the power spectrum
    ``|eps|**2`` is a normal density with standard deviation ``sigma``.
    Use :func:`fwhm_to_sigma` when starting from a measured full width.
    """

    omega0: float
    sigma: float
    t0: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise PreconditionError(f"omega0 must be positive, got {self.omega0!r}")
        if not self.sigma > 0:
            raise PreconditionError(f"sigma must be positive, got {self.sigma!r}")


def fwhm_to_sigma(fwhm: float) -> float:
    """Power-spectrum FWHM -> amplitude scale parameter."""
    return fwhm / FWHM_PER_SIGMA


def sigma_to_fwhm(sigma: float) -> float:
    return sigma * FWHM_PER_SIGMA


def profile_from_wavelength(
    center_wavelength: float, bandwidth: float, t0: float = 0.0, units: Units = SI
) -> SpectralProfile:
    """Build a profile from a centre wavelength and a FWHM wavelength bandwidth.

    omega0 = 2 pi c / lambda0 and the FWHM in angular frequency is
    2 pi c dlambda / lambda0**2 (first order in dlambda / lambda0).
    """
    if not center_wavelength > 0 or not bandwidth > 0:
        raise PreconditionError("center wavelength and bandwidth must be positive")
    omega0 = 2.0 * math.pi * units.c / center_wavelength
    fwhm_omega = 2.0 * math.pi * units.c * bandwidth / center_wavelength**2
    return SpectralProfile(omega0, fwhm_to_sigma(fwhm_omega), t0)


def gaussian_amplitude(profile: SpectralProfile, omega):
    """(2 pi sigma^2)^(-1/4) exp(-((w - w0) / (2 sigma))^2) exp(-i w t0)."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise PreconditionError("spectral amplitude is only defined for omega > 0")
    s = profile.sigma
    value = (
        (2.0 * math.pi * s * s) ** -0.25
        * np.exp(-(((w - profile.omega0) / (2.0 * s)) ** 2))
        * np.exp(-1j * w * profile.t0)
    )
    return complex(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class FrequencyGrid:
    omegas: np.ndarray
    weights: np.ndarray
    # 1 - sum(w |eps|^2) before the weights were rescaled
    defect: float = 0.0

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float).reshape(-1)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if omegas.shape != weights.shape or omegas.size == 0:
            raise PreconditionError("omegas and weights must be non-empty and of equal length")
        if np.any(omegas <= 0):
            raise PreconditionError("grid frequencies must be positive")
        if omegas.size > 1 and np.any(np.diff(omegas) <= 0):
            raise PreconditionError("grid frequencies must be strictly increasing")
        if np.any(weights < 0):
            raise PreconditionError("quadrature weights must be non-negative")
        omegas.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.omegas.size

    def norm(self, profile: SpectralProfile) -> float:
        return float(np.sum(self.weights * np.abs(gaussian_amplitude(profile, self.omegas)) ** 2))


def trapezoid_weights(n: int, step: float) -> np.ndarray:
    w = np.full(n, step)
    w[0] = w[-1] = 0.5 * step
    return w


def make_grid(profile: SpectralProfile, n_bins: int = 4096, span_in_sigmas: float = 6.0) -> FrequencyGrid:
    """Uniform trapezoidal grid on omega0 +/- span*sigma, renormalised to unit norm."""
    if int(n_bins) != n_bins or n_bins < 16:
        raise PreconditionError(f"n_bins must be an integer >= 16, got {n_bins!r}")
    if not span_in_sigmas >= 4:
        raise PreconditionError(f"span must cover at least +/-4 sigma, got {span_in_sigmas!r}")
    lo = profile.omega0 - span_in_sigmas * profile.sigma
    hi = profile.omega0 + span_in_sigmas * profile.sigma
    if lo <= 0:
        raise PreconditionError(
            f"grid would reach omega <= 0 (omega0 - {span_in_sigmas} sigma = {lo:g})"
        )
    omegas = np.linspace(lo, hi, int(n_bins))
    weights = trapezoid_weights(int(n_bins), (hi - lo) / (n_bins - 1))
    raw = float(np.sum(weights * np.abs(gaussian_amplitude(profile, omegas)) ** 2))
    return FrequencyGrid(omegas, weights / raw, defect=1.0 - raw)


def single_bin_grid(profile: SpectralProfile) -> FrequencyGrid:
    """Degenerate one-bin grid at omega0: the monochromatic limit."""
    peak = abs(gaussian_amplitude(profile, profile.omega0)) ** 2
    return FrequencyGrid([profile.omega0], [1.0 / peak])


def wavepacket_basis(grid: FrequencyGrid, cutoff: int = 1) -> ModeBasis:
    """One mode per grid bin, truncated to the single-excitation sector."""
    return make_basis(len(grid), cutoff, grid.omegas, max_total=1)


def wavepacket_coefficients(profile: SpectralProfile, grid: FrequencyGrid) -> np.ndarray:
    return np.sqrt(grid.weights) * gaussian_amplitude(profile, grid.omegas)


def wavepacket_state(
    profile: SpectralProfile, grid: FrequencyGrid, basis: ModeBasis | None = None
) -> StateVector:
    """sum_k sqrt(w_k) eps(w_k) a_k^+ |0>, normalised."""
    if basis is None:
        basis = wavepacket_basis(grid)
    if basis.mode_count != len(grid):
        raise BasisMismatchError(
            f"basis has {basis.mode_count} modes but the grid has {len(grid)} bins"
        )
    coeffs = np.atleast_1d(wavepacket_coefficients(profile, grid))
    raising = mode_sum_annihilation(basis, np.conj(coeffs)).adjoint()
    return (raising @ vacuum_state(basis)).normalized()
