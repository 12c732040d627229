"""Command-line interface: fields | falloff | spectrum | validate | energy.

All outputs are deterministic: fixed column order, fixed row order, and
17-significant-digit scientific float formatting, so identical configs give
byte-identical files.  Exit codes: 0 success / all checks pass, 1 a
validation check failed (report still written), 2 bad config or usage,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import asymptotics, spectrum, validation
from .autodiff import SchemeError
from .config import ConfigError, RunConfig, config_to_dict, load_config
from .constants import NATURAL
from .fields import Branch, EdeptParams, FieldRangeError, energy_density_cartesian, em_fields_cartesian
from .grids import CylGrid
from .transforms import TailTruncationError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_NUMERICAL = 3

_BRANCHES = {"auto": None, "real": Branch.REAL, "imag": Branch.IMAG,
             "analytic": Branch.ANALYTIC}


def _params_from(cfg: RunConfig) -> EdeptParams:
    return EdeptParams(cfg.params.alpha, cfg.params.g0, cfg.params.g1,
                       cfg.params.g2, _BRANCHES[cfg.params.branch])


def _mode_grid(cfg: RunConfig) -> spectrum.ModeGrid:
    mg = cfg.mode_grid
    return spectrum.ModeGrid.build(mg.k_max, mg.n_k_rho, mg.n_k_z)


def _transform_settings(cfg: RunConfig) -> spectrum.TransformSettings:
    tr = cfg.transform
    return spectrum.TransformSettings(tr.samples_per_period, tr.tail_rel,
                                      tr.min_extent, tr.max_extent)


def _position_grid(cfg: RunConfig, params: EdeptParams) -> CylGrid:
    pg = cfg.position_grid
    s = params.length_scale
    return CylGrid.log_rho(pg.rho_min_scale * s, pg.rho_max_scale * s,
                           pg.n_rho, pg.z_max_scale * s, pg.n_z)


def _fmt(cfg: RunConfig):
    spec = cfg.output.float_format

    def fmt(value) -> str:
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, str):
            return value
        return format(float(value), spec)

    return fmt


def write_csv(path: Path, header: str, rows, fmt) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_summary(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _echo(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "config": config_to_dict(cfg)}


def cmd_fields(cfg: RunConfig, out: Path) -> int:
    params = _params_from(cfg)
    fg = cfg.field_grid
    rho = np.linspace(0.0, fg.rho_max, fg.n_rho)
    z = np.linspace(fg.z_min, fg.z_max, fg.n_z)
    fmt = _fmt(cfg)
    header = ("t,rho,z,A_re,A_im,E_re,E_im,B_rho_re,B_rho_im,B_z_re,B_z_im,"
              "u_electric,u_magnetic,u_total,detection_rate")

    def rows():
        for t in fg.times:
            for rh in rho:
                x = np.full(z.shape, rh)
                A, E, B = em_fields_cartesian(params, t, x, 0.0 * z, z)
                u_t, u_e, u_m, rate = energy_density_cartesian(params, t, x,
                                                               0.0 * z, z)
                # theta = 0 plane: e_theta = y, e_rho = x
                for j, zz in enumerate(z):
                    yield (t, rh, zz,
                           A[1, j].real, A[1, j].imag,
                           E[1, j].real, E[1, j].imag,
                           B[0, j].real, B[0, j].imag,
                           B[2, j].real, B[2, j].imag,
                           u_e[j], u_m[j], u_t[j], rate[j])

    write_csv(out / "fields.csv", header, rows(), fmt)
    summary = _echo(cfg, "fields")
    summary["rows"] = len(fg.times) * fg.n_rho * fg.n_z
    summary["files"] = ["fields.csv"]
    write_summary(out / "summary_fields.json", summary)
    print(f"fields: wrote {summary['rows']} rows to {out / 'fields.csv'}")
    return EXIT_OK


def _scan_for(cfg: RunConfig):
    fit = cfg.fit
    window = (fit.window_lo, fit.window_hi)
    alt = (fit.alt_window_lo, fit.alt_window_hi)
    scale = max(cfg.params.g1, cfg.params.g2)
    radii = asymptotics.default_radii(
        (window[0] * scale, max(window[1], alt[1]) * scale), fit.n_radii)
    return asymptotics.exponent_scan(
        cfg.scan.alphas, cfg.t, tuple(fit.direction_angles_deg),
        (window[0] * scale, window[1] * scale),
        (alt[0] * scale, alt[1] * scale), radii,
        g0=cfg.params.g0, g1=cfg.params.g1, g2=cfg.params.g2,
        r_squared_floor=fit.r_squared_floor)


AMREIN_NOTE = ("Historical comparison: the generalized-imprimitivity (Amrein) "
               "photon falls off as r^-7 in energy density and detection rate; "
               "no explicit construction exists to reproduce, so it is quoted "
               "for context only. The alpha = 1 pulse measured here is the "
               "Hellwarth-Nouchi r^-10 case.")


def cmd_falloff(cfg: RunConfig, out: Path) -> int:
    params = _params_from(cfg)
    fmt = _fmt(cfg)
    scan = _scan_for(cfg)

    scan_header = ("alpha,direction_deg,quantity,exponent,r_squared,n_used,"
                   "n_zero_excluded,window_agreement,reliable,note")
    write_csv(out / "falloff_scan.csv", scan_header,
              ((r["alpha"], r["direction_deg"], r["quantity"], r["exponent"],
                r["r_squared"], r["n_used"], r["n_zero_excluded"],
                r["window_agreement"], r["reliable"],
                r["note"].replace(",", ";")) for r in scan.rows()), fmt)

    profile_header = "alpha,direction_deg,quantity,r,value"
    scale = max(cfg.params.g1, cfg.params.g2)
    radii = asymptotics.default_radii(
        (cfg.fit.window_lo * scale,
         max(cfg.fit.window_hi, cfg.fit.alt_window_hi) * scale),
        cfg.fit.n_radii)

    def profile_rows():
        for alpha in cfg.scan.alphas:
            p = EdeptParams(alpha, cfg.params.g0, cfg.params.g1, cfg.params.g2)
            for ang in cfg.fit.direction_angles_deg:
                direction = asymptotics.direction_from_polar(ang)
                for q in asymptotics.QUANTITIES:
                    prof = asymptotics.sample_radial_profile(
                        p, q, direction, cfg.t, radii)
                    for r, v in zip(prof.radii, prof.values):
                        yield (alpha, ang, q, r, v)

    write_csv(out / "falloff_profiles.csv", profile_header, profile_rows(), fmt)

    per_alpha = {}
    mismatches = []
    for alpha in scan.alphas:
        pred = asymptotics.predicted_exponents(alpha)
        fitted = {q: scan.mean_exponent(alpha, q)
                  for q in ("abs_A", "abs_E", "abs_B", "u_total",
                            "detection_rate")}
        entry = {
            "predicted_potential_exponent": pred.potential_exponent,
            "branch": pred.branch.value,
            "fitted": fitted,
        }
        if pred.detection_rate_exponent is not None:
            entry["predicted_detection_rate_exponent"] = pred.detection_rate_exponent
        if fitted["abs_A"] is not None and \
                abs(fitted["abs_A"] - pred.potential_exponent) > cfg.tolerances.potential_exponent:
            mismatches.append(f"alpha={alpha} abs_A exponent "
                              f"{fitted['abs_A']:.3f} vs predicted {pred.potential_exponent}")
        per_alpha[str(alpha)] = entry
        line = ", ".join(f"{q}={v:.3f}" if v is not None else f"{q}=n/a"
                         for q, v in fitted.items())
        print(f"falloff alpha={alpha} (predicted |A| exponent "
              f"{pred.potential_exponent}): {line}")

    summary = _echo(cfg, "falloff")
    summary["per_alpha"] = per_alpha
    summary["first_differences"] = {
        q: scan.first_differences(q) for q in ("abs_A", "abs_E", "abs_B",
                                               "u_total", "detection_rate")}
    summary["mismatches"] = mismatches
    summary["historical_note"] = AMREIN_NOTE
    summary["files"] = ["falloff_scan.csv", "falloff_profiles.csv"]
    write_summary(out / "summary_falloff.json", summary)
    print(AMREIN_NOTE)
    if mismatches:
        for m in mismatches:
            print(f"FAIL {m}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    params = _params_from(cfg)
    modes = _mode_grid(cfg)
    settings = _transform_settings(cfg)
    fmt = _fmt(cfg)
    spec = spectrum.positive_frequency_spectrum(params, cfg.t, modes, settings)
    hel = spectrum.helicity_amplitudes(
        spec, transversality_tol=cfg.tolerances.transversality)
    e_pos = spectrum.position_space_energy(params, cfg.t, NATURAL,
                                           _position_grid(cfg, params))
    write_csv(out / "spectrum.csv", spectrum.SPECTRUM_CSV_HEADER,
              spectrum.spectrum_csv_rows(spec, hel), fmt)
    shares = hel.helicity_shares()
    summary = _echo(cfg, "spectrum")
    summary.update({
        "norm": hel.norm,
        "spectral_energy": hel.spectral_energy,
        "position_energy": e_pos,
        "parseval_rel_error": abs(hel.spectral_energy - e_pos) / e_pos,
        "helicity_shares": list(shares),
        "ir_norm_bound": spec.meta["ir_norm_bound"],
        "transversality_max": hel.meta["transversality_max"],
        "files": ["spectrum.csv"],
    })
    write_summary(out / "summary_spectrum.json", summary)
    print(f"spectrum: norm={hel.norm:.9g} spectral_energy={hel.spectral_energy:.9g} "
          f"position_energy={e_pos:.9g} helicity_shares=({shares[0]:.4f}, {shares[1]:.4f})")
    return EXIT_OK


def _tolerance_dict(cfg: RunConfig) -> dict:
    t = cfg.tolerances
    return {
        "maxwell_residual": t.maxwell_residual,
        "azimuthal_structure": t.azimuthal_structure,
        "conjugation_symmetry": t.conjugation_symmetry,
        "derivative_agreement": t.derivative_agreement,
        "transversality": t.transversality,
        "e_relation": t.e_relation,
        "b_relation": t.b_relation,
        "roundtrip_t0": t.roundtrip_t0,
        "roundtrip_t1": t.roundtrip_t1,
        "parseval": t.parseval,
        "norm_doubling": t.norm_doubling,
    }


def cmd_validate(cfg: RunConfig, out: Path) -> int:
    params = _params_from(cfg)
    tolerances = _tolerance_dict(cfg)
    checks = validation.field_checks(params, tolerances, cfg.seed)
    report = spectrum.validate_spectrum(
        params, cfg.t, _mode_grid(cfg), _transform_settings(cfg),
        tolerances, seed=cfg.seed, position_grid=_position_grid(cfg, params))
    checks = checks + report.checks
    for c in checks:
        print(c.line())
    passed = all(c.passed for c in checks if not c.info_only)
    summary = _echo(cfg, "validate")
    summary["checks"] = [{"name": c.name, "value": c.value,
                          "tolerance": c.tolerance, "passed": c.passed,
                          "info_only": c.info_only} for c in checks]
    summary["spectrum_report"] = report.as_dict()
    summary["passed"] = passed
    write_summary(out / "summary_validate.json", summary)
    print(f"validate: {'all checks passed' if passed else 'CHECKS FAILED'}")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_energy(cfg: RunConfig, out: Path) -> int:
    params = _params_from(cfg)
    modes = _mode_grid(cfg)
    settings = _transform_settings(cfg)
    grid = _position_grid(cfg, params)
    fmt = _fmt(cfg)
    slices = list(cfg.energy_time_slices)
    rows = []
    spectral = []
    position = []
    for t in slices:
        e_pos = spectrum.position_space_energy(params, t, NATURAL, grid)
        spec = spectrum.positive_frequency_spectrum(params, t, modes, settings)
        hel = spectrum.helicity_amplitudes(
            spec, transversality_tol=cfg.tolerances.transversality)
        position.append(e_pos)
        spectral.append(hel.spectral_energy)
        rows.append((t, e_pos, hel.spectral_energy,
                     abs(hel.spectral_energy - e_pos) / e_pos, hel.norm))
    drift = (max(position) - min(position)) / position[0]
    write_csv(out / "energy.csv",
              "t,position_energy,spectral_energy,parseval_rel_error,norm",
              rows, fmt)
    summary = _echo(cfg, "energy")
    summary.update({
        "time_slices": slices,
        "position_energies": position,
        "spectral_energies": spectral,
        "conservation_drift": drift,
        "drift_tolerance": cfg.tolerances.energy_drift,
        "files": ["energy.csv"],
    })
    passed = drift <= cfg.tolerances.energy_drift and all(
        abs(s - p) / p <= cfg.tolerances.parseval
        for s, p in zip(spectral, position))
    summary["passed"] = passed
    write_summary(out / "summary_energy.json", summary)
    for t, e_pos, e_spec, rel, _ in rows:
        print(f"energy t={t:g}: position={e_pos:.9g} spectral={e_spec:.9g} "
              f"rel_diff={rel:.3e}")
    print(f"energy conservation drift: {drift:.3e} "
          f"({'PASS' if passed else 'FAIL'})")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edept",
        description="Localized electromagnetic pulses, their one-photon "
                    "states, and falloff-exponent measurements.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("fields", "tabulate potential, fields, and energy densities on a grid"),
            ("falloff", "fit falloff exponents and compare with predictions"),
            ("spectrum", "export the photon momentum amplitudes and functionals"),
            ("validate", "run the full validity suite against tolerances"),
            ("energy", "energy audit across time slices")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file (defaults used when omitted)")
        p.add_argument("--alpha", type=int, default=None,
                       help="override params.alpha")
        p.add_argument("--branch", type=str, default=None,
                       choices=sorted(_BRANCHES),
                       help="override params.branch")
        p.add_argument("--t", type=float, default=None,
                       help="override the evaluation time slice")
        p.add_argument("--out", type=str, default=None,
                       help="override output.directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the randomized-check seed")
    return parser


_COMMANDS = {
    "fields": cmd_fields,
    "falloff": cmd_falloff,
    "spectrum": cmd_spectrum,
    "validate": cmd_validate,
    "energy": cmd_energy,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig().validate()
        if args.alpha is not None:
            cfg.params.alpha = args.alpha
        if args.branch is not None:
            cfg.params.branch = args.branch
        if args.t is not None:
            cfg.t = args.t
        if args.out is not None:
            cfg.output.directory = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        cfg.validate()
        out = Path(cfg.output.directory)
        out.mkdir(parents=True, exist_ok=True)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    try:
        return _COMMANDS[args.command](cfg, out)
    except (FieldRangeError, SchemeError, TailTruncationError,
            FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
