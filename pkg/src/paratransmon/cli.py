"""Command-line front end.

Every subcommand writes CSV or JSON (floats at 12 significant digits) to
stdout or ``--out``.  Exit codes: 0 success, 1 physics or configuration error,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import ConfigError, DeviceConfig, parse_config
from .coupling import dispersive_shifts, g_C_for
from .errors import IntegrationError, OracleError, PhysicsError
from .modulation.fourier import AliasingError, ConvergenceError, expansion_of
from .modulation.gates import format_value, gate_sweep, sweep_csv
from .modulation.pulse import modulated_parameter, parameter_waveform
from .modulation.simulate import simulate_gate, trajectory_csv
from .oracle import build_coupled, build_transmon, diagonalize, dressed_labels
from .perturbation import transmon_series
from .tunable import params_at_flux

DOMAIN_ERRORS = (PhysicsError, ConfigError, OracleError, IntegrationError, AliasingError, ConvergenceError)


def _range(text: str) -> np.ndarray:
    """``a:b:n`` -> ``n`` evenly spaced values from ``a`` to ``b`` inclusive."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}") from None
    if n < 1 or not (math.isfinite(a) and math.isfinite(b)):
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return np.linspace(a, b, n) if n > 1 else np.array([a])


def _rounded(obj):
    """Round floats to 12 significant digits so JSON output is reproducible."""
    if isinstance(obj, dict):
        return {str(k): _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_rounded(v) for v in obj.tolist()]
    if isinstance(obj, (float, np.floating)):
        return float(format_value(float(obj)))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _json(obj) -> str:
    return json.dumps(_rounded(obj), indent=2, sort_keys=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(float(v)) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args) -> DeviceConfig:
    cfg = parse_config(args.config)
    return cfg.with_solver(
        order=getattr(args, "order", None),
        dimension=getattr(args, "dim", None),
        K_max=getattr(args, "K_max", None),
    )


def _point_dict(spec, phi: float, order: int) -> dict:
    p = params_at_flux(spec, phi, order)
    return {
        "label": spec.label,
        "phi_ext": phi,
        "E_J_eff": p.E_J_eff,
        "xi": p.xi,
        "omega": p.omega,
        "eta": p.eta,
        "lambda": p.lam,
        "Lambda": p.Lam,
        "upsilon": p.upsilon,
    }


def cmd_params(args) -> str:
    cfg = _config(args)
    phi = cfg.flux if args.flux is None else args.flux
    points = [_point_dict(spec, phi, cfg.solver.order) for spec in cfg.transmons]
    if args.format == "json":
        return _json({"order": cfg.solver.order, "transmons": points})
    lines = []
    units = {"phi_ext": "rad", "E_J_eff": "MHz", "omega": "MHz", "eta": "MHz"}
    for i, p in enumerate(points):
        lines.append(f"# transmon {i}" + (f" ({p['label']})" if p["label"] else ""))
        for key in ("phi_ext", "E_J_eff", "xi", "omega", "eta", "lambda", "Lambda", "upsilon"):
            lines.append(f"{key:<8} {format_value(p[key]):>16} {units.get(key, '')}".rstrip())
    return "\n".join(lines) + "\n"


def cmd_dump_series(args) -> str:
    return _json({"order": args.order, "series": transmon_series(args.order).to_json()})


def _levels(ev) -> tuple[float, float]:
    return ev[1] - ev[0], 2 * ev[1] - ev[0] - ev[2]


def cmd_spectrum(args) -> str:
    cfg = _config(args)
    dim = cfg.solver.dimension
    out = []
    for spec in cfg.transmons:
        ev = diagonalize(build_transmon(spec, cfg.flux, dim)).eigenvalues
        w_num, eta_num = _levels(ev)
        p = params_at_flux(spec, cfg.flux, cfg.solver.order)
        s = transmon_series(cfg.solver.order)
        by_order = []
        for order in range(1, cfg.solver.order + 1):
            v = s.truncate(order).values(p.xi, spec.E_C)
            by_order.append({"order": order, "omega_error": v["omega"] - w_num, "eta_error": v["eta"] - eta_num})
        out.append(
            {
                "label": spec.label,
                "phi_ext": cfg.flux,
                "xi": p.xi,
                "dimension": dim,
                "levels": (ev[:5] - ev[0]).tolist(),
                "omega_oracle": w_num,
                "eta_oracle": eta_num,
                "omega_analytic": p.omega,
                "eta_analytic": p.eta,
                "errors_by_order": by_order,
            }
        )
    return _json({"transmons": out})


FLUX_SWEEP_HEADER = ("phi_ext", "xi", "omega", "eta", "omega_oracle", "eta_oracle", "omega_error", "eta_error")


def cmd_flux_sweep(args) -> str:
    cfg = _config(args)
    spec = cfg.tunable
    rows = []
    for phi in np.linspace(0.0, math.pi, args.points):
        p = params_at_flux(spec, float(phi), cfg.solver.order)
        w_num, eta_num = _levels(diagonalize(build_transmon(spec, float(phi), cfg.solver.dimension)).eigenvalues)
        rows.append([phi, p.xi, p.omega, p.eta, w_num, eta_num, p.omega - w_num, p.eta - eta_num])
    return _csv(FLUX_SWEEP_HEADER, rows)


DISPERSIVE_HEADER = (
    "g", "g_C", "chi", "chi_oracle",
    "d_omega_1", "d_omega_1_oracle", "d_omega_2", "d_omega_2_oracle",
    "d_eta_1", "d_eta_1_oracle", "d_eta_2", "d_eta_2_oracle",
)


def cmd_dispersive(args) -> str:
    cfg = _config(args)
    base = cfg.pair()
    p1, p2 = base.points(cfg.solver.order)
    rows = []
    for g in args.g_range:
        pair = base.with_coupling(g_C_for(float(g), p1.xi, p2.xi))
        r = dispersive_shifts(pair, cfg.solver.order)
        coupled = build_coupled(pair, cfg.solver.dimension)
        e = dressed_labels(diagonalize(coupled.matrix), coupled)
        w1, eta1 = _levels(coupled.bare_first.eigenvalues)
        w2, eta2 = _levels(coupled.bare_second.eigenvalues)
        num = {
            "chi": e[(1, 1)] - e[(1, 0)] - e[(0, 1)] + e[(0, 0)],
            "w1": e[(1, 0)] - e[(0, 0)] - w1,
            "w2": e[(0, 1)] - e[(0, 0)] - w2,
            "e1": 2 * e[(1, 0)] - e[(0, 0)] - e[(2, 0)] - eta1,
            "e2": 2 * e[(0, 1)] - e[(0, 0)] - e[(0, 2)] - eta2,
        }
        rows.append([
            g, pair.g_C, r.chi, num["chi"], r.d_omega_1, num["w1"], r.d_omega_2, num["w2"],
            r.d_eta_1, num["e1"], r.d_eta_2, num["e2"],
        ])
    return _csv(DISPERSIVE_HEADER, rows)


def cmd_modulation(args) -> str:
    cfg = _config(args)
    spec = cfg.tunable
    omega_p = cfg.pulse.omega_p if cfg.pulse.omega_p is not None else 1.0
    pulse = cfg.pulse.pulse(omega_p)
    k_max, grid = cfg.solver.K_max, cfg.solver.grid_size
    t_fine = (np.arange(4 * grid) + 0.5) / (4 * grid) * pulse.period
    t_out = np.arange(args.samples) / args.samples * pulse.period
    report = {
        "pulse": {"phi_bar_p": pulse.phi_bar_p, "phi_tilde_p": pulse.phi_tilde_p, "omega_p": omega_p, "theta_p": pulse.theta_p},
        "K_max": k_max,
        "parameters": {},
    }
    for name in args.parameters:
        par = modulated_parameter(spec, name, order=cfg.solver.order, pulse=pulse)
        f = expansion_of(spec, pulse, par, k_max, grid)
        direct = par(pulse.flux(t_fine))
        wave = parameter_waveform(spec, pulse, par, args.samples)
        report["parameters"][name] = {
            "coefficients": f.coefficients,
            "max_reconstruction_error": float(np.max(np.abs(f.reconstruct(t_fine) - direct))),
            "waveform": {"time": t_out, "value": wave.values, "reconstruction": f.reconstruct(t_out)},
        }
    return _json(report)


def cmd_gates(args) -> str:
    cfg = _config(args)
    rows = gate_sweep(cfg.pair(), args.amp_range, order=cfg.solver.order, K_max=cfg.solver.K_max)
    return sweep_csv(rows)


def cmd_simulate(args) -> str:
    cfg = _config(args)
    pair = cfg.pair()
    amplitude = cfg.pulse.phi_tilde_p
    pulse = None
    if cfg.pulse.omega_p is not None:
        pulse = cfg.pulse.pulse()
    result = simulate_gate(pair, pulse, args.gate, args.duration, amplitude=amplitude, order=cfg.solver.order)
    sys.stderr.write(
        f"gate={args.gate} rabi_frequency={format_value(result.rabi_frequency)} MHz "
        f"fit_amplitude={format_value(result.fit_amplitude)} "
        f"resonant_frequency={format_value(result.resonant_frequency)} MHz "
        f"predicted={format_value(result.predicted_frequency)} MHz norm_drift={result.norm_drift:.3g}\n"
    )
    return trajectory_csv(result)


def cmd_verify(args) -> str:
    from .acceptance import run_all

    results = run_all(echo=lambda line: print(line, flush=True))
    failed = [r.key for r in results if not r.passed]
    summary = f"{len(results) - len(failed)}/{len(results)} checks passed"
    if failed:
        summary += " (failed: " + ", ".join(failed) + ")"
    print(summary)
    args.exit_code = 1 if failed else 0
    return ""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paratransmon", description="Transmon perturbation series and parametric gates.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, func, help_text, config=True):
        p = sub.add_parser(name, help=help_text)
        if config:
            p.add_argument("config", help="device configuration (JSON)")
            p.add_argument("--order", type=int, help="perturbation order (overrides solver.order)")
        p.add_argument("--out", help="write the result to this path instead of stdout")
        p.set_defaults(func=func)
        return p

    p = add("params", cmd_params, "transmon parameters at a flux point")
    p.add_argument("--flux", type=float, help="external flux in radians (overrides the config)")
    p.add_argument("--format", choices=("table", "json"), default="table")

    p = add("dump-series", cmd_dump_series, "exact series coefficients as JSON", config=False)
    p.add_argument("--order", type=int, default=25)

    p = add("spectrum", cmd_spectrum, "oracle spectrum and analytic errors")
    p.add_argument("--dim", type=int, help="Fock dimension (overrides solver.dimension)")

    p = add("flux-sweep", cmd_flux_sweep, "frequency and anharmonicity over flux, with oracle errors")
    p.add_argument("--points", type=int, default=33)
    p.add_argument("--dim", type=int, help="Fock dimension")

    p = add("dispersive", cmd_dispersive, "dispersive shifts vs coupling, analytic and oracle")
    p.add_argument("--g-range", type=_range, required=True, help="a:b:n coupling g in MHz")
    p.add_argument("--dim", type=int, help="Fock dimension per transmon")

    p = add("modulation", cmd_modulation, "waveforms, harmonics and reconstruction error")
    p.add_argument("--K-max", dest="K_max", type=int, help="harmonics kept (overrides solver.K_max)")
    p.add_argument("--samples", type=int, default=64, help="waveform samples per period in the output")
    p.add_argument("--parameters", nargs="+", default=["omega", "eta"])

    p = add("gates", cmd_gates, "activation frequencies and renormalization ratios")
    p.add_argument("--amp-range", type=_range, required=True, help="a:b:n flux amplitude in radians")
    p.add_argument("--K-max", dest="K_max", type=int)

    p = add("simulate", cmd_simulate, "time-domain gate simulation")
    p.add_argument("--gate", choices=("iswap", "cz02", "cz20", "bellrabi"), required=True)
    p.add_argument("--duration", type=float, help="microseconds (default: three predicted Rabi periods)")

    add("verify", cmd_verify, "run the reproduction checks", config=False)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            text = args.func(args)
    except (*DOMAIN_ERRORS, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if text:
        _emit(text, args.out)
    return getattr(args, "exit_code", 0)


if __name__ == "__main__":
    sys.exit(main())
