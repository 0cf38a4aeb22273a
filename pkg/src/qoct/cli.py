"""Command-line front end.

Subcommands::

    qoct ascan     --config run.toml [--out ascan.csv]
    qoct correlate --config run.toml [--out correlate.csv]
    qoct pq        density.json [--out report.json]
    qoct noise     --config run.toml [--out noise.json] [--seed N]

Exit codes: 0 success, 2 unreadable or malformed input, 3 a physics
precondition failed (for example an empty reflector list, or the
standard quantum limit requested in natural units).

Wavelength inputs: omega0 = 2 pi c / center_wavelength and
sigma = (2 pi c bandwidth / center_wavelength^2) / (2 sqrt(2 ln 2)), i.e. the
bandwidth is read as the FWHM of the power spectrum.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from qoct import classical, noise
from qoct.config import ConfigError, RunConfig, load_config
from qoct.density import degree_of_indistinguishability, density_from_json, expectation, pure_density
from qoct.errors import FormatError, PreconditionError, QoctError, UnitSystemError
from qoct.fock import fock_state, make_basis
from qoct.interferometer import quantum_g1
from qoct.spectra import make_grid, single_bin_grid, wavepacket_state

MAX_DEFAULT_POINTS = 2_000_001


def _fmt(x: float) -> str:
    return repr(float(x))


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _sidecar_path(out: Path) -> Path:
    return out.with_suffix(".json") if out.suffix != ".json" else out.with_name(out.name + ".sidecar.json")


def _resolve_out(config: RunConfig | None, out: str | None, default: str) -> Path:
    if out:
        return Path(out)
    if config is not None and config.output:
        return Path(config.output)
    return Path(default)


def _tau_axis(config: RunConfig, lo: float, hi: float, points: int) -> np.ndarray:
    t = config.tau
    lo = lo if t.min is None else t.min
    hi = hi if t.max is None else t.max
    n = points if t.points is None else t.points
    if not hi > lo or n < 2:
        raise PreconditionError("tau axis needs max > min and at least two points")
    return np.linspace(lo, hi, n)


def cmd_ascan(config: RunConfig, out: Path) -> dict:
    """Layered-sample interferogram: CSV ``tau,intensity`` plus a JSON sidecar."""
    units = config.unit_system
    profile = config.profile()
    reflectors = [classical.Reflector(d, r) for d, r in config.sample.reflectors]
    if not reflectors:
        raise PreconditionError("ascan needs at least one reflector")
    t_c = 1.0 / profile.sigma
    delays = [2.0 * r.depth / units.c for r in reflectors]
    lo, hi = min(delays) - 5 * t_c, max(delays) + 5 * t_c
    # resolve both the envelope (t_c / 20) and the carrier (period / 8)
    step = min(t_c / 20, 2 * math.pi / profile.omega0 / 8)
    points = min(MAX_DEFAULT_POINTS, max(4001, math.ceil((hi - lo) / step) + 1))
    tau = _tau_axis(config, lo, hi, points)

    trace = classical.layered_sample_interferogram(
        reflectors, profile, tau, units, reference_power=config.sample.reference_power
    )
    out.write_text(classical.Interferogram(trace.tau, trace.intensity).to_csv(), encoding="utf-8")

    g_tau = np.linspace(-8 * t_c, 8 * t_c, 4001)
    t_c_numeric = classical.coherence_time(g_tau, classical.gaussian_g1(g_tau, profile.omega0, profile.sigma))
    peaks = classical.envelope_peaks(trace.tau, trace.envelope)
    sidecar = {
        "config": config.to_dict(),
        "coherence_time": t_c_numeric,
        "coherence_length": classical.coherence_length(t_c_numeric, units),
        "peak_taus": [float(p) for p in peaks],
        "peak_depths": [float(units.c * p / 2) for p in peaks],
        "n_peaks": int(peaks.size),
        "tau_step": float(tau[1] - tau[0]),
    }
    _sidecar_path(out).write_text(_dump_json(sidecar), encoding="utf-8")
    return sidecar


def cmd_correlate(config: RunConfig, out: Path) -> dict:
    """Classical closed-form vs quantum wavepacket g1 on a common delay axis."""
    profile = config.profile()
    if config.grid.bins == 1:
        grid = single_bin_grid(profile)
    else:
        grid = make_grid(profile, config.grid.bins, config.grid.span)
    t_c = 1.0 / profile.sigma
    tau = _tau_axis(config, -5 * t_c, 5 * t_c, 1001)

    cl = classical.gaussian_g1(tau, profile.omega0, profile.sigma)
    rho = pure_density(wavepacket_state(profile, grid))
    q = quantum_g1(rho, grid, tau)
    diff = np.abs(cl - q)

    lines = ["tau,cl_re,cl_im,q_re,q_im,abs_diff"]
    for i in range(tau.size):
        lines.append(
            ",".join(
                _fmt(v) for v in (tau[i], cl[i].real, cl[i].imag, q[i].real, q[i].imag, diff[i])
            )
        )
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar = {
        "config": config.to_dict(),
        "max_abs_diff": float(diff.max()),
        "bins": len(grid),
        "grid_defect": float(grid.defect),
        "coherence_time": t_c,
    }
    _sidecar_path(out).write_text(_dump_json(sidecar), encoding="utf-8")
    return sidecar


def cmd_pq(density_path: Path) -> dict:
    """P_Q of a two-path density matrix stored as {"dim", "re", "im"} JSON."""
    try:
        text = Path(density_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{density_path}: cannot read ({exc.strerror})") from None
    rho = density_from_json(text)
    result = degree_of_indistinguishability(rho)
    return {
        "p_q": result.p_q,
        "abs_alpha_beta_conj": abs(result.alpha_beta_conj),
        "arg_rho12": result.phase,
        "rho11": result.rho11,
        "rho22": result.rho22,
    }


def cmd_noise(config: RunConfig, seed: int | None = None) -> dict:
    """SQL, vacuum-port momentum fluctuation, Kerr port statistics and count statistics."""
    units = config.unit_system
    nc = config.noise
    if seed is not None:
        nc = replace(nc, seed=seed)
        config = replace(config, noise=nc)
    profile = config.profile()

    sql_m = None
    if nc.mass is not None or nc.duration is not None:
        if not units.is_si:
            raise UnitSystemError("the SQL section requires units = 'si'")
        if nc.mass is None or nc.duration is None:
            raise PreconditionError("[noise] needs both mass and duration for the SQL")
        sql_m = noise.sql_displacement(noise.SqlQuery(nc.mass, nc.duration), units)

    basis = make_basis(2, nc.photons, [profile.omega0, profile.omega0])
    p_op = noise.momentum_diff_operator(nc.bounces, profile.omega0, nc.mu, basis, units)
    source_only = pure_density(fock_state(basis, (nc.photons, 0)))
    p_mean = expectation(source_only, p_op).real
    p2 = expectation(source_only, p_op @ p_op).real

    params = noise.KerrInterferometerParams(
        k=profile.omega0 / units.c, Z1=nc.Z1, Z2=nc.Z2, C1=nc.C1, C2=nc.C2
    )
    ports = noise.detector_counts_and_variance(noise.split_photon_density(nc.photons), params)

    count_stats = {}
    for dist in noise.DISTRIBUTIONS:
        sample = noise.sample_counts(dist, nc.mean_photons, nc.samples, nc.seed)
        stat, pvalue = noise.chi_square_gof(sample)
        count_stats[dist] = {**sample.summary(), "chi2": stat, "chi2_pvalue": pvalue}

    return {
        "config": config.to_dict(),
        "sql_m": sql_m,
        "p_expectation": p_mean,
        "p2_expectation": p2,
        "port_means": [ports.mean_d, ports.mean_e],
        "port_vars": [ports.var_d, ports.var_e],
        "port_var_difference": ports.var_difference,
        "count_stats": count_stats,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qoct", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("ascan", "simulate a layered-sample interferogram"),
        ("correlate", "compare classical and quantum g1"),
        ("noise", "quantum-noise report"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--seed", type=int, metavar="N", help="overrides [noise] seed")

    p = sub.add_parser("pq", help="path indistinguishability of a density matrix")
    p.add_argument("density", metavar="DENSITY_JSON")
    p.add_argument("--config", metavar="PATH", help="unused; accepted for symmetry")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--seed", type=int, metavar="N", help="unused")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "pq":
            report = cmd_pq(Path(args.density))
            if args.out:
                Path(args.out).write_text(_dump_json(report), encoding="utf-8")
            print(f"P_Q = {_fmt(report['p_q'])}")
            print(f"|alpha beta*| = {_fmt(report['abs_alpha_beta_conj'])}")
            print(f"arg rho12 = {_fmt(report['arg_rho12'])}")
            return 0

        config = load_config(args.config)
        if args.command == "ascan":
            out = _resolve_out(config, args.out, "ascan.csv")
            cmd_ascan(config, out)
            print(f"wrote {out} and {_sidecar_path(out)}")
        elif args.command == "correlate":
            out = _resolve_out(config, args.out, "correlate.csv")
            sidecar = cmd_correlate(config, out)
            print(f"wrote {out}; max |g1_classical - g1_quantum| = {_fmt(sidecar['max_abs_diff'])}")
        elif args.command == "noise":
            text = _dump_json(cmd_noise(config, args.seed))
            target = args.out or config.output
            if target:
                Path(target).write_text(text, encoding="utf-8")
            else:
                sys.stdout.write(text)
        return 0
    except (ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QoctError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
