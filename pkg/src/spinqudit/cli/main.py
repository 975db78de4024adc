"""spinqudit command-line front end.

Subcommands: rabi, cat, tomography, wigner, catcode, floquet.  Every run
reads one JSON config (defaults apply when omitted), accepts dotted-path
overrides via --set, writes data files plus a manifest into the output
directory, and is bit-reproducible for fixed config and seed (manifest wall
time excluded).  Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import __version__
from ..catcode import ErrorSet, bias_preservation_check, codewords, kl_check, logical_gate
from ..dynamics import (
    FrameUpdateSegment,
    NoiseModel,
    PulseSchedule,
    ToneSegment,
    apply_dephasing,
    covariant_tone_set,
    evolve_grf,
    givens_cat_sequence,
    simulate_parity_oscillation,
    snap_cat_sequence,
    snap_subspace_cat_sequence,
    subspace_level_indices,
    subspace_tone_set,
)
from ..floquet import contrast_sweep
from ..hamiltonian import StaticParams
from ..presets import NOISE_PRESETS, amplitude_to_f_rabi
from ..spincore import (
    DensityMatrix,
    PureState,
    SpinQuantum,
    as_density_matrix,
    basis_state,
    cat_state,
    fidelity,
    spin_coherent_state,
    spin_operators,
)
from ..tomography import (
    ExperimentDesign,
    ShotRecord,
    design_fte,
    dof_nominal,
    loglik_ratio,
    mle_reconstruct,
    paper_design,
    parametric_bootstrap,
    simulate_shots,
    two_design_fte,
    uniform_axis_fte_analytic,
)
from ..wigner import grid_to_csv, wigner_grid, wigner_sphere_integral, wigner_value
from .config import ConfigError, load_config, quad_tensor_from_config
from .outputs import OutputWriter, render_heatmap_svg, render_lines_svg

PRESET_HELP = (
    "state presets: eigenstate:m=<half-integer> | scs:theta=<rad>,phi=<rad> | "
    "cat:axis=<x|y|z>,xi=<rad> | file:<path to state JSON>"
)


def _thread_count() -> int:
    raw = os.environ.get("SPINQUDIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_indexed(fn, items):
    n = _thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def parse_state_preset(spec: str, q: SpinQuantum):
    """Parse a state preset string into a PureState or DensityMatrix."""
    if ":" not in spec:
        raise ConfigError(f"unparseable state {spec!r}; {PRESET_HELP}")
    kind, _, rest = spec.partition(":")
    params = {}
    if kind != "file":
        for item in rest.split(","):
            if "=" not in item:
                raise ConfigError(f"state {spec!r}: expected key=value items; {PRESET_HELP}")
            k, _, v = item.partition("=")
            params[k.strip()] = v.strip()
    if kind == "eigenstate":
        return basis_state(q, _parse_half_integer(params.get("m", "")))
    if kind == "scs":
        return spin_coherent_state(q, float(params["theta"]), float(params["phi"]))
    if kind == "cat":
        return cat_state(q, params.get("axis", "z"), float(params.get("xi", "0")))
    if kind == "file":
        with open(rest) as fh:
            doc = json.load(fh)
        if "amplitudes_re" in doc:
            amps = np.asarray(doc["amplitudes_re"], dtype=float) + 1j * np.asarray(
                doc.get("amplitudes_im", np.zeros(q.d)), dtype=float
            )
            return PureState(amps / np.linalg.norm(amps))
        if "rho_re" in doc:
            rho = np.asarray(doc["rho_re"], dtype=float) + 1j * np.asarray(
                doc.get("rho_im"), dtype=float
            )
            return DensityMatrix(rho)
        raise ConfigError(f"state file {rest}: expected amplitudes_re or rho_re")
    raise ConfigError(f"unknown state preset {kind!r}; {PRESET_HELP}")


def _parse_half_integer(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        return float(num) / float(den)
    return float(text)


def state_to_json(state) -> dict:
    if isinstance(state, PureState):
        return {
            "amplitudes_re": [float(x) for x in state.amplitudes.real],
            "amplitudes_im": [float(x) for x in state.amplitudes.imag],
            "basis_order": "descending_m",
        }
    rho = as_density_matrix(state)
    return {
        "rho_re": [[float(x) for x in row] for row in rho.elements.real],
        "rho_im": [[float(x) for x in row] for row in rho.elements.imag],
        "basis_order": "descending_m",
    }


def _static_params(cfg: dict) -> StaticParams:
    st = cfg["static"]
    quad = quad_tensor_from_config(st)
    if quad is not None:
        return StaticParams(b0=st["b0_tesla"], gamma_n=st["gamma_n_hz_per_tesla"], quad=quad)
    return StaticParams.from_fq(
        st["f_q_hz"], b0=st["b0_tesla"], gamma_n=st["gamma_n_hz_per_tesla"]
    )


def _noise_model(cfg: dict, q: SpinQuantum) -> NoiseModel | None:
    preset = cfg["noise"]["preset"]
    if preset is None:
        return None
    if preset not in NOISE_PRESETS:
        raise ConfigError(f"noise.preset: unknown preset {preset!r}; known: {sorted(NOISE_PRESETS)}")
    return NOISE_PRESETS[preset](q)


def _wigner_vmax(q: SpinQuantum) -> float:
    # fixed color scale: the spin-coherent-state peak, used without rescaling
    return wigner_value(basis_state(q, q.I), 0.0, 0.0, q)


# ---------------------------------------------------------------------------
# commands


def cmd_rabi(cfg: dict, writer: OutputWriter) -> None:
    q = SpinQuantum(cfg["spin"]["two_I"])
    rc = cfg["rabi"]
    gamma_n = cfg["static"]["gamma_n_hz_per_tesla"]
    kappa = cfg["calibration"]["kappa_hz_per_mv"]
    f_rabi = rc["f_rabi_hz"]
    if f_rabi is None:
        f_rabi = amplitude_to_f_rabi(rc["amplitude_mv"], kappa)
    sub = rc["subspace_two_I"]
    if sub is None:
        tones = covariant_tone_set(q, f_rabi, 0.0, gamma_n)
        start = basis_state(q, -q.I)
    else:
        tones = subspace_tone_set(q, sub, f_rabi, 0.0, gamma_n)
        lo, hi = subspace_level_indices(q, sub)
        start = basis_state(q, q.m_values()[hi])
    duration = rc["duration_s"]
    sched = PulseSchedule((ToneSegment(duration=duration, tones=tones),))
    res = evolve_grf(start, sched, q, gamma_n, sample_dt=duration / rc["n_samples"])

    header = ["time_s"] + [f"pop_m_{_m_label(m)}" for m in q.m_values()] + ["iz_expect"]
    rows = []
    for i, t in enumerate(res.times):
        rows.append([t, *res.populations[:, i], res.iz_expect[i]])
    if sub is not None:
        header.append("leakage")
        leak = res.leakage(q, sub)
        rows = [row + [leak[i]] for i, row in enumerate(rows)]
    writer.write_csv("rabi_curve.csv", header, rows)
    writer.write_text(
        "rabi_curve.svg",
        render_lines_svg(
            res.times,
            {"<I_z>": res.iz_expect},
            f"Covariant Rabi (f_Rabi = {f_rabi:g} Hz)",
            "pulse duration (s)",
            "<I_z>",
        ),
    )
    report = {"f_rabi_hz": f_rabi, "subspace_two_I": sub, "period_s": 1.0 / f_rabi}

    sweep = rc["amplitude_sweep_mv"]
    if sweep is not None:
        amps = _expand_sweep(sweep)
        fitted = []
        for amp in amps:
            fr = amplitude_to_f_rabi(amp, kappa)
            tset = covariant_tone_set(q, fr, 0.0, gamma_n)
            dur = 2.0 / fr
            r = evolve_grf(
                basis_state(q, -q.I),
                PulseSchedule((ToneSegment(duration=dur, tones=tset),)),
                q,
                gamma_n,
                sample_dt=dur / 200,
            )
            fitted.append(_fit_rabi_frequency(r.times, r.iz_expect, q.I))
        slope = float(np.polyfit(amps, fitted, 1)[0])
        writer.write_csv(
            "rabi_amplitude_sweep.csv",
            ["amplitude_mv", "f_rabi_fit_hz"],
            list(zip(amps, fitted)),
        )
        report["fitted_kappa_hz_per_mv"] = slope
        report["configured_kappa_hz_per_mv"] = kappa
    writer.write_json("rabi_report.json", report)


def _m_label(m: float) -> str:
    two_m = int(round(2 * m))
    sign = "p" if two_m >= 0 else "m"
    return f"{sign}{abs(two_m)}_2"


def _expand_sweep(spec) -> list:
    if isinstance(spec, list) and len(spec) == 3 and all(
        isinstance(x, (int, float)) for x in spec
    ):
        start, stop, count = spec
        return [float(x) for x in np.linspace(start, stop, int(count))]
    return [float(x) for x in spec]


def _fit_rabi_frequency(times: np.ndarray, iz: np.ndarray, inertia: float) -> float:
    """Least-squares frequency of iz = -I cos(2 pi f t), refined from an FFT seed."""
    from scipy.optimize import curve_fit

    dt = times[1] - times[0]
    spec = np.abs(np.fft.rfft(iz - iz.mean()))
    f0 = np.fft.rfftfreq(len(iz), dt)[np.argmax(spec[1:]) + 1]

    def model(t, f, a, c):
        return a * np.cos(2 * np.pi * f * t) + c

    popt, _ = curve_fit(model, times, iz, p0=[f0, -inertia, 0.0])
    return float(abs(popt[0]))


def cmd_cat(cfg: dict, writer: OutputWriter) -> None:
    q = SpinQuantum(cfg["spin"]["two_I"])
    cc = cfg["cat"]
    gamma_n = cfg["static"]["gamma_n_hz_per_tesla"]
    method = cc["method"]
    orient = cc["orient"]
    sub = cc["subspace_two_I"]
    f_rabi = cc["f_rabi_hz"]
    if method == "givens":
        sched = givens_cat_sequence(q, sub, f_rabi, gamma_n)
        target = _subspace_pole_cat(q, sub, np.pi)
    elif method == "snap":
        if sub == q.two_I:
            sched = snap_cat_sequence(q, f_rabi, orient, gamma_n)
            target = (
                cat_state(q, "z", np.pi / 2.0)
                if orient == "z"
                else parse_state_preset("cat:axis=x,xi=-1.5707963267948966", q)
            )
        else:
            if orient != "x":
                raise ConfigError("cat.orient: subspace snap cats are x-oriented only")
            sched = snap_subspace_cat_sequence(q, sub, f_rabi, gamma_n)
            target = None
    else:
        raise ConfigError(f"cat.method: expected givens or snap, got {method!r}")

    offset = cc["frame_phase_offset_rad"]
    if offset:
        dphi = np.zeros(q.two_I)
        dphi[-1] = -offset
        sched = PulseSchedule(sched.segments + (FrameUpdateSegment(delta_phi=dphi),))

    lo, hi = subspace_level_indices(q, sub)
    start = basis_state(q, q.m_values()[hi])
    res = evolve_grf(start, sched, q, gamma_n)
    final = res.final_pure()

    writer.write_json("cat_state.json", state_to_json(final))
    writer.write_text("cat_schedule.json", sched.to_json() + "\n")
    step_rows = [
        [i, res.times[i], *res.populations[:, i]] for i in range(res.times.size)
    ]
    writer.write_csv(
        "cat_step_populations.csv",
        ["step", "time_s"] + [f"pop_m_{_m_label(m)}" for m in q.m_values()],
        step_rows,
    )

    par = simulate_parity_oscillation(final, q, n_phi=cc["parity_n_phi"], harmonic=sub)
    writer.write_csv(
        "cat_parity.csv", ["phi_rad", "parity"], list(zip(par.phis, par.samples))
    )
    report = {
        "method": method,
        "orient": orient,
        "subspace_two_I": sub,
        "parity_contrast": par.contrast,
        "parity_phase_rad": par.phase,
        "parity_dominant_harmonic": par.dominant_harmonic,
        "leakage": float(res.leakage(q, sub)[-1]),
    }
    if target is not None:
        report["fidelity_to_target"] = fidelity(final.density_matrix(), target)
    grid = wigner_grid(final, q, 91, 181, projection="hammer")
    writer.write_text(
        "cat_wigner.svg",
        render_heatmap_svg(
            grid.proj_x,
            grid.proj_y,
            grid.values,
            _wigner_vmax(q),
            f"{method} cat (2I_sub = {sub})",
        ),
    )

    noise = _noise_model(cfg, q)
    waits = cc["wait_times_s"]
    if waits is not None:
        if noise is None:
            raise ConfigError("cat.wait_times_s requires noise.preset")
        rho = final.density_matrix()
        rows = []
        for tau in waits:
            dep = apply_dephasing(rho, float(tau), noise)
            p = simulate_parity_oscillation(dep, q, n_phi=cc["parity_n_phi"], harmonic=sub)
            rows.append([float(tau), p.contrast])
        writer.write_csv("cat_contrast_vs_wait.csv", ["wait_s", "parity_contrast"], rows)
        writer.write_text(
            "cat_contrast_vs_wait.svg",
            render_lines_svg(
                np.array([r[0] for r in rows]),
                {"contrast": np.array([r[1] for r in rows])},
                "Parity contrast vs wait",
                "wait (s)",
                "contrast",
            ),
        )
    writer.write_json("cat_report.json", report)


def _subspace_pole_cat(q: SpinQuantum, sub_two_I: int, xi: float) -> PureState:
    lo, hi = subspace_level_indices(q, sub_two_I)
    amps = np.zeros(q.d, dtype=complex)
    amps[lo] = 1.0 / np.sqrt(2.0)
    amps[hi] = np.exp(1j * xi) / np.sqrt(2.0)
    return PureState(amps)


def cmd_tomography(cfg: dict, writer: OutputWriter) -> None:
    q = SpinQuantum(cfg["spin"]["two_I"])
    tc = cfg["tomography"]
    seed = cfg["seed"]
    design = paper_design(q, shots_per_axis=tc["shots_per_axis"])
    state = parse_state_preset(tc["state"], q)
    mode = tc["mode"]
    fte = design_fte(design, q)
    design_report = {
        "n_axes": design.n_axes,
        "shots_per_axis": design.shots_per_axis,
        "total_shots": design.total_shots(),
        "f_te": fte,
        "f_te_two_design_bound": two_design_fte(q),
        "f_te_uniform_axes": uniform_axis_fte_analytic(q),
        "dof_nominal": dof_nominal(design, q),
    }

    if mode == "simulate":
        record = simulate_shots(state, design, seed, q, readout_flip=cfg["noise"]["readout_flip"])
        writer.write_json(
            "shots.json",
            {"seed": seed, "shots_per_axis": design.shots_per_axis, "counts": record.counts.tolist()},
        )
        rows = [
            [i, out, int(record.counts[i, out])]
            for i in range(design.n_axes)
            for out in range(q.d)
        ]
        writer.write_csv("shots.csv", ["axis_index", "outcome", "count"], rows)
        writer.write_json("tomography_report.json", {"mode": mode, "design": design_report})
        return

    if mode == "reconstruct":
        if tc["record_file"] is not None:
            record = _load_record(tc["record_file"])
            fit = mle_reconstruct(record, design, q)
            writer.write_json("rho_mle.json", state_to_json(fit.rho))
            writer.write_json(
                "tomography_report.json",
                {
                    "mode": mode,
                    "design": design_report,
                    "loglik": fit.loglik,
                    "iterations": fit.iterations,
                    "converged": fit.converged,
                    "fidelity_to_state": fidelity(fit.rho, _as_pure(state)),
                    "lambda": loglik_ratio(record, fit.rho, design, q),
                },
            )
            return
        # roundtrip study: simulate + reconstruct over many seeds
        fids = []
        for s in range(tc["n_seeds"]):
            rec = simulate_shots(state, design, seed + s, q)
            fit = mle_reconstruct(rec, design, q, tol=1e-8, max_iter=3000)
            fids.append(fidelity(fit.rho, _as_pure(state)))
        writer.write_csv(
            "roundtrip_fidelities.csv",
            ["seed", "fidelity"],
            [[seed + i, f] for i, f in enumerate(fids)],
        )
        writer.write_json(
            "tomography_report.json",
            {
                "mode": mode,
                "design": design_report,
                "n_seeds": tc["n_seeds"],
                "median_fidelity": float(np.median(fids)),
                "q25_fidelity": float(np.quantile(fids, 0.25)),
                "q75_fidelity": float(np.quantile(fids, 0.75)),
            },
        )
        return

    if mode == "validate":
        if tc["record_file"] is not None:
            record = _load_record(tc["record_file"])
        else:
            record = simulate_shots(state, design, seed, q)
        fit = mle_reconstruct(record, design, q)
        report = parametric_bootstrap(
            fit.rho, design, record, q, n_samples=tc["n_bootstrap"], seed=seed + 104729
        )
        hist, edges = np.histogram(report.null_samples, bins=40)
        writer.write_csv(
            "lambda_null_histogram.csv",
            ["bin_left", "bin_right", "count"],
            [[edges[i], edges[i + 1], int(hist[i])] for i in range(len(hist))],
        )
        writer.write_json(
            "validation_report.json",
            {
                "mode": mode,
                "design": design_report,
                "lambda_observed": report.lambda_observed,
                "p_value": report.p_value,
                "dof_nominal": report.dof_nominal,
                "n_bootstrap": tc["n_bootstrap"],
                "n_excluded": report.n_excluded,
                "null_mean": float(report.null_samples.mean()),
                "null_std": float(report.null_samples.std()),
            },
        )
        return

    raise ConfigError(f"tomography.mode: expected simulate|reconstruct|validate, got {mode!r}")


def _as_pure(state) -> PureState:
    if isinstance(state, PureState):
        return state
    raise ConfigError("fidelity reporting requires a pure target state preset")


def _load_record(path: str) -> ShotRecord:
    with open(path) as fh:
        doc = json.load(fh)
    return ShotRecord(counts=np.asarray(doc["counts"], dtype=np.int64), seed=doc.get("seed"))


def cmd_wigner(cfg: dict, writer: OutputWriter) -> None:
    q = SpinQuantum(cfg["spin"]["two_I"])
    wc = cfg["wigner"]
    state = parse_state_preset(wc["state"], q)
    projections = ["hammer", "polar"] if wc["projection"] == "both" else [wc["projection"]]
    vmax = _wigner_vmax(q)
    summary = {"state": wc["state"], "vmax_color_scale": vmax}
    for proj in projections:
        grid = wigner_grid(state, q, wc["n_theta"], wc["n_phi"], projection=proj)
        writer.write_text(f"wigner_{proj}.csv", grid_to_csv(grid))
        writer.write_text(
            f"wigner_{proj}.svg",
            render_heatmap_svg(grid.proj_x, grid.proj_y, grid.values, vmax, f"W ({proj})"),
        )
        summary[f"min_{proj}"] = float(grid.values.min())
        summary[f"max_{proj}"] = float(grid.values.max())
    summary["sphere_integral"] = wigner_sphere_integral(state, q)
    writer.write_json("wigner_report.json", summary)


def cmd_catcode(cfg: dict, writer: OutputWriter) -> None:
    cc = cfg["catcode"]
    report = []
    for two_I in cc["spins_two_I"]:
        q = SpinQuantum(int(two_I))
        code = codewords(q)
        errors = ErrorSet.iz_powers(q, cc["max_iz_power"])
        kl = kl_check(code, errors)
        x_gate = logical_gate(q, "X")
        z_gate = logical_gate(q, "Z")
        swap = abs(
            np.vdot(code.one_l.amplitudes, x_gate @ code.zero_l.amplitudes)
        )
        iz = spin_operators(q).iz
        residual, scalar = bias_preservation_check(x_gate, iz)
        z0 = np.vdot(code.zero_l.amplitudes, z_gate @ code.zero_l.amplitudes)
        z1 = np.vdot(code.one_l.amplitudes, z_gate @ code.one_l.amplitudes)
        report.append(
            {
                "two_I": int(two_I),
                "error_labels": list(errors.labels),
                "kl": kl.to_dict(),
                "x_swaps_codewords_overlap": float(swap),
                "x_bias_residual_on_iz": residual,
                "x_bias_scalar_on_iz_real": float(scalar.real),
                "z_relative_phase_rad": float(np.angle(z1 / z0)),
            }
        )
    writer.write_json("catcode_report.json", {"codes": report})


def cmd_floquet(cfg: dict, writer: OutputWriter) -> None:
    fc = cfg["floquet"]
    ratios = np.logspace(
        np.log10(fc["ratio_start"]), np.log10(fc["ratio_stop"]), fc["ratio_count"]
    )
    methods = list(fc["methods"])
    sweeps = dict(zip(methods, _map_indexed(lambda m: contrast_sweep(ratios, m), methods)))
    rows = []
    for m, sw in sweeps.items():
        rows += [[float(r), float(c), m] for r, c in zip(sw.ratios, sw.contrast)]
    writer.write_csv("floquet_contrast.csv", ["ratio", "contrast", "method"], rows)
    report = {"ratios": [float(r) for r in ratios], "methods": methods}
    if "exact" in sweeps:
        report["power_law_exponent"] = sweeps["exact"].power_law_exponent(
            max(1e-3, ratios.min()), min(3e-2, ratios.max())
        )
    series = {m: 1.0 - sw.contrast for m, sw in sweeps.items()}
    markers = [fc["mark_ratio"]] if fc["mark_ratio"] else []
    writer.write_text(
        "floquet_contrast.svg",
        render_lines_svg(
            ratios,
            series,
            "Cross-coupling error vs drive ratio",
            "f_Rabi / f_q",
            "1 - contrast",
            logx=True,
            logy=True,
            markers=markers,
        ),
    )
    writer.write_json("floquet_report.json", report)


# ---------------------------------------------------------------------------

COMMANDS = {
    "rabi": cmd_rabi,
    "cat": cmd_cat,
    "tomography": cmd_tomography,
    "wigner": cmd_wigner,
    "catcode": cmd_catcode,
    "floquet": cmd_floquet,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinqudit", description="high-spin nuclear qudit simulator"
    )
    parser.add_argument("--version", action="version", version=f"spinqudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", help="JSON config file (defaults used when omitted)")
        p.add_argument(
            "--set",
            action="append",
            dest="overrides",
            metavar="PATH=VALUE",
            help="override a config field by dotted path (repeatable)",
        )
        p.add_argument("--out", help="output directory (overrides config output_dir)")
        p.add_argument("--seed", type=int, help="override config seed")
    return parser


def main(argv: list | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.out is not None:
            cfg["output_dir"] = args.out
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    writer = OutputWriter(
        cfg["output_dir"], args.command, cfg, cfg["seed"], tool_version=__version__
    )
    try:
        COMMANDS[args.command](cfg, writer)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failure
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    writer.finish()
    return 0


if __name__ == "__main__":
    sys.exit(main())
