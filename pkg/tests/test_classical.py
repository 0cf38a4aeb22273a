import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from qoct.classical import (
    Interferogram,
    PowerSpectrum,
    Reflector,
    classical_G1,
    coherence_length,
    coherence_time,
    envelope_fwhm,
    envelope_peaks,
    gaussian_g1,
    gaussian_power_spectrum,
    layered_sample_interferogram,
    monochromatic_intensity,
    polychromatic_intensity,
)
from qoct.errors import CoverageError, PreconditionError
from qoct.spectra import SpectralProfile
from qoct.units import NATURAL, SI


def test_monochromatic_fringe():
    assert monochromatic_intensity(2.0, 0.0) == pytest.approx(2.0)
    assert monochromatic_intensity(2.0, math.pi) == pytest.approx(0.0, abs=1e-15)
    assert monochromatic_intensity(2.0, math.pi / 2) == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        monochromatic_intensity(-1.0, 0.0)


def test_gaussian_g1_closed_form():
    assert gaussian_g1(0.0, 5.0, 1.0) == 1.0
    tau = 2.0
    assert gaussian_g1(tau, 5.0, 0.5) == pytest.approx(math.exp(-0.5) * np.exp(10j), rel=1e-15)


def test_classical_G1_of_gaussian_spectrum():
    spec = gaussian_power_spectrum(1.0, 0.05, total_power=3.0)
    assert spec.total_power == pytest.approx(3.0, rel=1e-14)
    tau = np.linspace(-100, 100, 401)
    G = classical_G1(spec, tau, units=NATURAL)
    # truncating at +/-6 sigma and renormalising moves G by at most 2 P erfc(6/sqrt 2)
    bound = 2 * 3.0 * special.erfc(6 / math.sqrt(2))
    assert np.max(np.abs(G - 3.0 * gaussian_g1(tau, 1.0, 0.05))) < bound
    g = classical_G1(spec, tau, units=NATURAL, normalized=True)
    assert g[200] == pytest.approx(1.0, abs=1e-14)


def test_path_difference_maps_through_c():
    spec = gaussian_power_spectrum(2.4e15, 2.4e13)
    x = 3e-6
    assert classical_G1(spec, x, SI, normalized=True) == pytest.approx(
        gaussian_g1(x / SI.c, 2.4e15, 2.4e13), abs=1e-8
    )


def test_polychromatic_intensity_limits():
    spec = gaussian_power_spectrum(1.0, 0.05, total_power=2.0)
    assert polychromatic_intensity(spec, 0.0, NATURAL) == pytest.approx(2.0, rel=1e-12)
    # far beyond the coherence length only the incoherent half survives
    assert polychromatic_intensity(spec, 1e3, NATURAL) == pytest.approx(1.0, abs=1e-9)


def test_from_wavenumbers_preserves_power():
    k = np.linspace(4e6, 6e6, 201)
    dens = np.exp(-((k - 5e6) / 2e5) ** 2)
    spec_k = PowerSpectrum.from_samples(k, dens)
    spec_w = PowerSpectrum.from_wavenumbers(k, dens, SI)
    assert spec_w.total_power == pytest.approx(spec_k.total_power, rel=1e-12)
    with pytest.raises(PreconditionError):
        PowerSpectrum.from_samples([1.0, 2.0, 4.0], [1, 1, 1])


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 5.0])
def test_coherence_time_is_inverse_sigma(sigma):
    tau = np.linspace(-8 / sigma, 8 / sigma, 4001)
    t_c = coherence_time(tau, gaussian_g1(tau, 10.0, sigma))
    assert t_c == pytest.approx(1 / sigma, rel=1e-10)


def test_coherence_time_coverage_guard():
    tau = np.linspace(-1.0, 1.0, 101)
    with pytest.raises(CoverageError):
        coherence_time(tau, gaussian_g1(tau, 0.0, 1.0))


def test_coherence_length():
    assert coherence_length(1e-14, SI) == pytest.approx(2.99792458e-6)
    with pytest.raises(PreconditionError):
        coherence_length(0.0)


@settings(max_examples=30, deadline=None)
@given(sigma=st.floats(0.05, 50.0), omega0=st.floats(0.0, 100.0))
def test_coherence_time_property(sigma, omega0):
    tau = np.linspace(-7 / sigma, 7 / sigma, 2001)
    assert coherence_time(tau, gaussian_g1(tau, omega0, sigma)) * sigma == pytest.approx(1.0, rel=1e-8)


def test_envelope_fwhm_of_gaussian():
    sigma = 0.4
    tau = np.linspace(-20, 20, 40001)
    env = np.abs(gaussian_g1(tau, 0.0, sigma))
    assert envelope_fwhm(tau, env) == pytest.approx(2 * math.sqrt(2 * math.log(2)) / sigma, rel=1e-6)


def test_layered_sample_peaks_and_dc():
    profile = SpectralProfile(omega0=2.4e15, sigma=2.4e13)
    refl = [Reflector(0.0, 0.5), Reflector(50e-6, 0.2)]
    t_c = 1 / profile.sigma
    tau = np.linspace(-5 * t_c, 2 * 50e-6 / SI.c + 5 * t_c, 20001)
    trace = layered_sample_interferogram(refl, profile, tau, SI, reference_power=1.0)
    peaks = envelope_peaks(trace.tau, trace.envelope)
    step = tau[1] - tau[0]
    assert peaks.size == 2
    assert abs(peaks[0]) <= step
    assert abs(peaks[1] - 2 * 50e-6 / SI.c) <= step
    # peak envelope height is sqrt(I_r R_j)
    assert trace.envelope.max() == pytest.approx(math.sqrt(0.5), rel=1e-4)
    # far from both reflectors the trace sits at (I_r + sum R)/2
    far = layered_sample_interferogram(refl, profile, [1e-10], SI)
    assert far.intensity[0] == pytest.approx(0.5 * (1.0 + 0.7), abs=1e-12)
    only_env = layered_sample_interferogram(refl, profile, tau, SI, envelope_only=True)
    assert np.array_equal(only_env.intensity, trace.envelope)


def test_reflector_validation():
    with pytest.raises(PreconditionError):
        Reflector(-1.0, 0.5)
    with pytest.raises(PreconditionError):
        Reflector(0.0, 1.5)


def test_interferogram_csv_round_trip():
    tau = np.linspace(0, 1, 7)
    tr = Interferogram(tau, np.sin(tau) / 3, g1=np.exp(1j * tau))
    back = Interferogram.from_csv(tr.to_csv())
    assert np.array_equal(back.tau, tau)
    assert np.array_equal(back.intensity, tr.intensity)
    assert np.array_equal(back.g1, tr.g1)
    assert tr.to_csv().splitlines()[0] == "tau,intensity,g1_re,g1_im"


def test_coherence_time_examples():
    for sigma, expected in ((1.0, 1.0), (2.0, 0.5)):
        tau = np.linspace(-8 / sigma, 8 / sigma, 2001)
        assert coherence_time(tau, gaussian_g1(tau, 0.0, sigma)) == pytest.approx(expected, rel=1e-10)


def test_gaussian_g1_modulus_and_phase():
    assert abs(gaussian_g1(1 / 0.3, 4.0, 0.3)) == pytest.approx(math.exp(-0.5), rel=1e-15)
    tau = np.linspace(-3, 3, 13)
    assert np.allclose(np.exp(1j * np.angle(gaussian_g1(tau, 4.0, 0.3))), np.exp(4j * tau), atol=1e-14)


def test_envelope_matches_classical_G1():
    profile = SpectralProfile(omega0=2.4e15, sigma=2.4e13)
    tau = np.linspace(-3e-13, 3e-13, 601)
    trace = layered_sample_interferogram([Reflector(0.0, 1.0)], profile, tau, SI)
    spec = gaussian_power_spectrum(profile.omega0, profile.sigma)
    G = classical_G1(spec, SI.c * tau, SI, normalized=True)
    assert np.max(np.abs(trace.envelope - np.abs(G))) < 1e-8


def test_peak_ratio_and_single_reflector_position():
    profile = SpectralProfile(omega0=2.4e15, sigma=2.4e13)
    refl = [Reflector(20e-6, 0.64), Reflector(80e-6, 0.04)]
    tau = np.linspace(0, 7e-13, 70001)
    trace = layered_sample_interferogram(refl, profile, tau, SI)
    peaks = envelope_peaks(trace.tau, trace.envelope)
    heights = np.interp(peaks, trace.tau, trace.envelope)
    assert heights[0] / heights[1] == pytest.approx(math.sqrt(0.64 / 0.04), rel=1e-6)
    one = layered_sample_interferogram(refl[:1], profile, tau, SI)
    (peak,) = envelope_peaks(one.tau, one.envelope)
    assert abs(peak - 2 * 20e-6 / SI.c) <= tau[1] - tau[0]
