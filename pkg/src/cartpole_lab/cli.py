"""Command-line front end.

Subcommands: train, simulate, sensitivity, roa. Exit codes: 0 success,
1 usage or configuration error, 2 training finished without reaching the
success threshold (weights are still written).

Every command is deterministic under a fixed --seed. The CARTPOLE_THREADS
environment variable caps the ROA worker pool.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import csvout, roa as roa_mod, sensitivity as sens_mod, svgplot
from .config import ConfigError, RunConfig
from .integrator import SimConfig, simulate
from .params import PARAM_NAMES
from .policy import MlpPolicy, deterministic_voltage
from .roa import (PAIRING_LETTERS, PAIRINGS, RefinementConfig, RoaConfig,
                  classify_batch, draw_ics, refinement_ics, roa_report)
from .sensitivity import PerturbationSpec
from .trainer import train
from .weights_io import load_policy, save_policy

METHOD_CODES = {"cs": "complex_step", "cd": "central_diff", "ode": "forward_ode"}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_runconfig(path) -> RunConfig:
    if path is None:
        return RunConfig()
    return RunConfig.load(path)


def _load_controller(spec: str):
    """'zero' or a weights-file path; returns (callable, policy-or-None)."""
    if spec == "zero":
        return (lambda z: 0.0), None
    policy, _meta = load_policy(spec)
    return (lambda z: deterministic_voltage(policy, z)), policy


def cmd_train(args) -> int:
    cfg = _load_runconfig(args.config).trainer
    if args.model:
        cfg.model = args.model
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.__post_init__()
    result = train(cfg)
    save_policy(args.out, result.policy, cfg.seed, cfg.model)
    log_path = args.log if args.log else f"{args.out}.log.csv"
    csvout.write_training_log_csv(log_path, result.log)
    last = result.log[-1].moving_avg if result.log else 0.0
    print(f"episodes={result.episodes} succeeded={result.succeeded} "
          f"moving_avg={last:.1f} weights={args.out} log={log_path}")
    return 0 if result.succeeded else 2


def cmd_simulate(args) -> int:
    run = _load_runconfig(args.config)
    try:
        ic = np.array([float(v) for v in args.ic.split(",")])
        if ic.shape != (4,):
            raise ValueError
    except ValueError:
        print(f"error: --ic must be four comma-separated numbers, got {args.ic!r}",
              file=sys.stderr)
        return 1
    controller, _ = _load_controller(args.controller)
    cfg = SimConfig(h=run.sim.h, horizon=args.time, model=args.model)
    traj = simulate(args.model, controller, ic, cfg, params=run.params)
    csv_path = f"{args.out}.csv"
    svg_path = f"{args.out}.svg"
    csvout.write_trajectory_csv(csv_path, traj)
    t = traj.times
    x = traj.states[:, 0].real
    alpha = traj.states[:, 2].real
    svgplot.write_chart(svg_path, [
        svgplot.Panel(title=f"cart position ({args.model})", xlabel="t [s]",
                      ylabel="x [m]", series=[(t, x, svgplot.PALETTE[0], "x")],
                      hlines=(-0.2, 0.2)),
        svgplot.Panel(title="pendulum angle", xlabel="t [s]", ylabel="alpha [rad]",
                      series=[(t, alpha, svgplot.PALETTE[1], "alpha")],
                      hlines=(-0.2, 0.2)),
    ])
    print(f"steps={len(traj.voltages)} diverged={traj.diverged} "
          f"csv={csv_path} svg={svg_path}")
    return 0


def _sens_one(system: str, controller, k: int, method: str, h, args, run) -> "tuple":
    z0 = run.sensitivity.z0
    horizon = args.time if args.time else (
        run.sensitivity.time if controller is None else run.sensitivity.time_controlled)
    cfg = SimConfig(h=run.sim.h, horizon=horizon, model=system)
    if method == "forward_ode":
        return sens_mod.forward_ode_sensitivity_lti(z0, cfg, k, params=run.params)
    default_h = {"complex_step": run.sensitivity.h_complex,
                 "central_diff": run.sensitivity.h_central}[method]
    spec = PerturbationSpec(k, method, h if h else default_h)
    fn = (sens_mod.complex_step_sensitivity if method == "complex_step"
          else sens_mod.central_diff_sensitivity)
    return fn(system, controller, z0, cfg, spec, params=run.params)


def cmd_sensitivity(args) -> int:
    run = _load_runconfig(args.config)
    method = METHOD_CODES[args.method]
    if args.param == "all":
        indices = list(range(len(PARAM_NAMES)))
    elif args.param in PARAM_NAMES:
        indices = [PARAM_NAMES.index(args.param)]
    else:
        print(f"error: unknown parameter {args.param!r}; valid names: "
              f"{', '.join(PARAM_NAMES)} or all", file=sys.stderr)
        return 1
    controller = None
    policy = None
    if args.controller != "none":
        _, policy = _load_controller(args.controller)
        controller = policy
    if method == "forward_ode" and (args.system != "lti" or controller is not None):
        print("error: --method ode applies to the uncontrolled LTI system only",
              file=sys.stderr)
        return 1
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    system_label = (f"{'uncontrolled' if controller is None else 'controlled'}"
                    f"_{args.system}")
    for k in indices:
        rec = _sens_one(args.system, controller, k, method, args.h, args, run)
        stem = (f"sens_{system_label}_{PARAM_NAMES[k]}_{args.method}_"
                f"{rec.spec.h:g}")
        csvout.write_sensitivity_csv(out_dir / f"{stem}.csv", rec)
        labels = ("s_x", "s_xdot", "s_alpha", "s_alphadot")
        panels = [svgplot.Panel(title=f"{labels[j]} w.r.t. {PARAM_NAMES[k]}",
                                xlabel="t [s]", ylabel=labels[j],
                                series=[(rec.times, rec.s[j],
                                         svgplot.PALETTE[0], system_label)])
                  for j in range(4)]
        svgplot.write_chart(out_dir / f"{stem}.svg", panels, ncols=2)
    print(f"wrote {len(indices)} parameter record(s) to {out_dir}")
    return 0


def _roa_pairings(arg: str) -> list:
    if arg == "all":
        return list(PAIRINGS)
    return [PAIRING_LETTERS[arg]]


def cmd_roa(args) -> int:
    run = _load_runconfig(args.config)
    cfg = run.roa
    cfg.n_samples = args.n
    if args.seed is not None:
        cfg.seed = args.seed
    pairings = _roa_pairings(args.pairing)
    lti_policy = lab_policy = None
    for pairing in pairings:
        if pairing == "lab_ctrl_on_lab":
            if not args.lab_weights:
                print(f"error: pairing {pairing} needs --lab-weights", file=sys.stderr)
                return 1
        elif not args.lti_weights:
            print(f"error: pairing {pairing} needs --lti-weights", file=sys.stderr)
            return 1
    if args.lti_weights:
        lti_policy, _ = load_policy(args.lti_weights)
    if args.lab_weights:
        lab_policy, _ = load_policy(args.lab_weights)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ics = draw_ics(cfg)
    samples = {}
    for pairing in pairings:
        got = classify_batch(ics, pairing, cfg, lti_policy, lab_policy,
                             run.params, args.workers)
        samples[pairing] = got
    if args.refine:
        rcfg = run.refine if run.refine is not None else RefinementConfig()
        rng = np.random.default_rng((cfg.seed, 1))
        pool_n = len(ics)
        for radius in rcfg.radii:
            centers = _union_success_ics(samples)
            budget = rcfg.max_total - pool_n
            if budget <= 0 or not len(centers):
                break
            new_ics = refinement_ics(centers, radius, rcfg.per_center,
                                     cfg.box, rng)[:budget]
            pool_n += len(new_ics)
            for pairing in pairings:
                samples[pairing] = samples[pairing] + classify_batch(
                    new_ics, pairing, cfg, lti_policy, lab_policy,
                    run.params, args.workers)

    for pairing, got in samples.items():
        csvout.write_roa_csv(out_dir / f"roa_{pairing}.csv", got, pairing)
    _write_roa_svg(out_dir / "roa_projections.svg", samples)

    summary = roa_report(samples)
    report_lines = [f"samples per pairing: {summary.total}"]
    for pairing in PAIRINGS:
        if pairing in summary.counts:
            frac = summary.fractions[pairing]
            frac_txt = "n/a" if frac is None else f"{frac:.4f}"
            report_lines.append(f"({roa_mod.LETTER_OF[pairing]}) {pairing}: "
                                f"{summary.counts[pairing]}/{summary.total} "
                                f"fraction={frac_txt}")
    if len(samples) == len(PAIRINGS):
        report_lines.append(summary.verdict)
    report = "\n".join(report_lines)
    (out_dir / "roa_summary.txt").write_text(report + "\n")
    print(report)
    return 0


def _union_success_ics(samples: dict) -> np.ndarray:
    """ICs that succeeded under at least one pairing (deduplicated, ordered)."""
    per_ic = {}
    for got in samples.values():
        for s in got:
            key = s.ic.tobytes()
            per_ic[key] = per_ic.get(key, False) or s.success
    good = [np.frombuffer(k) for k, ok in per_ic.items() if ok]
    return np.array(good) if good else np.empty((0, 4))


_DIM_LABELS = ("x0", "xdot0", "alpha0", "alphadot0")
_PAIR_COLORS = {"lti_ctrl_on_lti": svgplot.PALETTE[0],
                "lti_ctrl_on_lab": svgplot.PALETTE[1],
                "lab_ctrl_on_lab": svgplot.PALETTE[2]}


def _write_roa_svg(path, samples: dict) -> None:
    """Six 2-d projections; successful ICs per pairing in colour."""
    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    panels = []
    for (i, j) in pairs:
        series = []
        for pairing, got in samples.items():
            ok = np.array([s.ic for s in got if s.success])
            if len(ok) == 0:
                ok = np.empty((0, 4))
            series.append((ok[:, i], ok[:, j], _PAIR_COLORS[pairing], pairing))
        panels.append(svgplot.Panel(xlabel=_DIM_LABELS[i], ylabel=_DIM_LABELS[j],
                                    series=series, scatter=True))
    svgplot.write_chart(path, panels, ncols=3, panel_w=240, panel_h=240)


def build_parser() -> _Parser:
    parser = _Parser(prog="cartpole", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a policy with REINFORCE")
    p.add_argument("--model", required=True, choices=("lab", "lti"))
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="weights file to write")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--log", default=None, help="training-log CSV path")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("simulate", help="closed-loop run to CSV + SVG")
    p.add_argument("--model", required=True, choices=("lab", "lti"))
    p.add_argument("--controller", required=True, help="weights file or 'zero'")
    p.add_argument("--ic", required=True, help="x,xdot,alpha,alphadot")
    p.add_argument("--time", type=float, required=True, help="horizon, s")
    p.add_argument("--out", default="trajectory", help="output path prefix")
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("sensitivity", help="parameter sensitivity records")
    p.add_argument("--system", required=True, choices=("lab", "lti"))
    p.add_argument("--controller", default="none", help="weights file or 'none'")
    p.add_argument("--param", required=True, help=f"one of {', '.join(PARAM_NAMES)} or all")
    p.add_argument("--method", default="cs", choices=tuple(METHOD_CODES))
    p.add_argument("--h", type=float, default=None, help="perturbation step")
    p.add_argument("--time", type=float, default=None, help="horizon, s")
    p.add_argument("--out-dir", default="sensitivity_out")
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_sensitivity)

    p = sub.add_parser("roa", help="region-of-attraction estimation")
    p.add_argument("--pairing", required=True, choices=("a", "b", "c", "all"))
    p.add_argument("--n", type=int, required=True, help="uniform samples")
    p.add_argument("--refine", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lti-weights", default=None)
    p.add_argument("--lab-weights", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out-dir", default="roa_out")
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_roa)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
