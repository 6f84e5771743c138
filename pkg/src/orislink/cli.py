"""Operator command line: analytic sweeps, Monte Carlo campaigns, and
cross-validation reports.

Subcommands::

    orislink analyze  --config CFG --pt-sweep 0:45:5 --gamma-th 5 --out curves.csv
    orislink simulate --config CFG --metric outage --trials 1000000 --seed 1 --out run.json
    orislink compare  --config CFG --pt-sweep 10:35:5 --trials 1000000 --seed 1 --out cmp.csv

Units at this boundary only: transmit power in dBm, threshold in dB; all
internal math is in watts/linear.  Exit codes: 0 success, 2 config/usage,
3 numerical failure, 4 requested precision not met.

Every run writes a ``<out>.manifest.json`` (config digest, command,
timestamp, version, seeds, outputs) before any long computation starts.
Output files are written atomically and are never overwritten without
``--force``.  Unless ``--no-plot`` is given, analyze/compare render a
companion PNG next to the CSV.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

from . import __version__
from . import mc_sim, performance
from .params import ConfigError, ParamsError, load_config, config_digest
from .performance import LinkPair, NumericalError, dbm_to_watts

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PRECISION = 4

_CLAMPED_SERIES = ("outage_asymptotic", "ber_asymptotic")


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


def _parse_sweep(text: str) -> list[float]:
    try:
        start_s, stop_s, step_s = text.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
    except ValueError as exc:
        raise CliError(f"--pt-sweep must be start:stop:step, got {text!r}", EXIT_CONFIG) from exc
    if step <= 0 or stop < start:
        raise CliError("--pt-sweep needs step > 0 and stop >= start", EXIT_CONFIG)
    axis = []
    k = 0
    while True:
        value = start + k * step
        if value > stop + 1e-9:
            break
        axis.append(round(value, 12))
        k += 1
    return axis


def _default_workers() -> int:
    env = os.environ.get("ORIS_LINK_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError(f"ORIS_LINK_THREADS must be an integer, got {env!r}", EXIT_CONFIG)
    return 1


def _guard_output(path: str, force: bool) -> None:
    if os.path.exists(path) and not force:
        raise CliError(f"refusing to overwrite {path!r} without --force", EXIT_CONFIG)


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".orislink-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(out_path: str, args, digest: str, seeds: list[int], outputs: list[str]) -> str:
    manifest_path = out_path + ".manifest.json"
    manifest = {
        "config_path": os.path.abspath(args.config),
        "config_digest": digest,
        "command": " ".join(sys.argv) if sys.argv else "orislink",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "tool_version": __version__,
        "seeds": seeds,
        "outputs": [os.path.abspath(p) for p in outputs],
    }
    _atomic_write(manifest_path, json.dumps(manifest, indent=2) + "\n")
    return manifest_path


def _fmt(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return repr(float(value))


def _emit_row(values: list[float], clamp_names: list[str]) -> str:
    """Clamp asymptotic probabilities into [0,1] at emission, marking which
    series were clamped in the trailing column."""
    return ",".join(_fmt(v) for v in values) + "," + ";".join(clamp_names)


def _plot_path(out_path: str) -> str:
    stem, _ = os.path.splitext(out_path)
    return stem + ".png"


def cmd_analyze(args) -> int:
    params = load_config(args.config)
    digest = config_digest(params)
    axis = _parse_sweep(args.pt_sweep)
    gamma_th = 10.0 ** (args.gamma_th / 10.0)
    outputs = [args.out] + ([] if args.no_plot else [_plot_path(args.out)])
    for path in outputs:
        _guard_output(path, args.force)
    _write_manifest(args.out, args, digest, seeds=[], outputs=outputs)

    curve = performance.sweep(params, axis, gamma_th, quad_points=args.quad_points)

    header = "pt_dbm,outage_exact,outage_asymptotic,ber_asymptotic,ber_exact_numeric,clamped"
    lines = [header]
    for i, dbm in enumerate(curve.axis_dbm):
        clamped = []
        row = [dbm]
        for name in ("outage_exact", "outage_asymptotic", "ber_asymptotic", "ber_exact_numeric"):
            value = curve.columns[name][i]
            if name in _CLAMPED_SERIES and not math.isnan(value):
                clipped = min(1.0, max(0.0, value))
                if clipped != value:
                    clamped.append(name)
                value = clipped
            row.append(value)
        lines.append(_emit_row(row, clamped))
    _atomic_write(args.out, "\n".join(lines) + "\n")

    if curve.flags:
        for flag in curve.flags:
            print(f"warning: {flag}", file=sys.stderr)
        if all(math.isnan(v) for v in curve.columns["ber_exact_numeric"]):
            raise CliError(f"numerical failure at every axis point: {curve.flags[0]}",
                           EXIT_NUMERICAL)
    if not args.no_plot:
        from . import plotting

        plotting.save_curve_figure(curve, _plot_path(args.out))
    print(f"wrote {args.out} ({len(curve.axis_dbm)} rows)")
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = load_config(args.config)
    digest = config_digest(params)
    workers = args.workers if args.workers is not None else _default_workers()
    gamma_th = 10.0 ** (args.gamma_th / 10.0)
    _guard_output(args.out, args.force)
    _write_manifest(args.out, args, digest, seeds=[args.seed], outputs=[args.out])

    scene = mc_sim.build_scene(params, math.radians(args.incidence_deg))
    try:
        result = mc_sim.run_campaign(
            scene, params, args.metric, gamma_th, args.trials, args.seed, workers=workers
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    _atomic_write(args.out, result.to_json() + "\n")
    half_width = (result.ci_high - result.ci_low) / 2.0
    print(
        f"{args.metric} = {result.estimate:.6g} "
        f"[{result.ci_low:.6g}, {result.ci_high:.6g}] @ {result.trials} trials"
    )
    if args.max_ci_halfwidth is not None and half_width > args.max_ci_halfwidth:
        raise CliError(
            f"99% CI half-width {half_width:.3g} exceeds requested "
            f"{args.max_ci_halfwidth:.3g}",
            EXIT_PRECISION,
        )
    return EXIT_OK


def cmd_compare(args) -> int:
    params = load_config(args.config)
    digest = config_digest(params)
    workers = args.workers if args.workers is not None else _default_workers()
    axis = _parse_sweep(args.pt_sweep)
    gamma_th = 10.0 ** (args.gamma_th / 10.0)
    outputs = [args.out] + ([] if args.no_plot else [_plot_path(args.out)])
    for path in outputs:
        _guard_output(path, args.force)
    _write_manifest(args.out, args, digest, seeds=[args.seed], outputs=outputs)

    curve = performance.sweep(params, axis, gamma_th, quad_points=args.quad_points)
    rows = []
    worst = (0.0, None, None)  # |z|, pt_dbm, metric
    notes = []
    for i, dbm in enumerate(axis):
        point = params.replace(pt=dbm_to_watts(dbm))
        scene = mc_sim.build_scene(point, math.radians(args.incidence_deg))
        row = {
            "pt_dbm": dbm,
            "outage_exact": curve.columns["outage_exact"][i],
            "outage_asymptotic": curve.columns["outage_asymptotic"][i],
            "ber_asymptotic": curve.columns["ber_asymptotic"][i],
            "ber_exact_numeric": curve.columns["ber_exact_numeric"][i],
        }
        for metric, analytic_key in (("outage", "outage_exact"), ("ber", "ber_exact_numeric")):
            result = mc_sim.run_campaign(
                scene, point, metric, gamma_th, args.trials, args.seed, workers=workers
            )
            row[f"{metric}_mc"] = result.estimate
            row[f"{metric}_mc_ci_low"] = result.ci_low
            row[f"{metric}_mc_ci_high"] = result.ci_high
            analytic = row[analytic_key]
            if math.isnan(analytic):
                continue
            if analytic * args.trials < 10.0:
                notes.append(f"{metric} @ {dbm:g} dBm: undersampled (p*N < 10)")
                continue
            se = math.sqrt(max(analytic * (1.0 - analytic), 1e-300) / args.trials)
            z = (result.estimate - analytic) / se
            if params.geometry_mode == "reference" and params.sigma_beta > 0:
                notes.append(
                    f"{metric} @ {dbm:g} dBm: z = {z:+.2f} (model-variant gap: reference "
                    "pointing exponent vs physical engine)"
                )
            elif abs(z) > worst[0]:
                worst = (abs(z), dbm, metric)
        rows.append(row)

    header = (
        "pt_dbm,outage_exact,outage_asymptotic,outage_mc,outage_mc_ci_low,outage_mc_ci_high,"
        "ber_asymptotic,ber_exact_numeric,ber_mc,ber_mc_ci_low,ber_mc_ci_high,clamped"
    )
    lines = [header]
    order = (
        "outage_exact", "outage_asymptotic", "outage_mc", "outage_mc_ci_low",
        "outage_mc_ci_high", "ber_asymptotic", "ber_exact_numeric", "ber_mc",
        "ber_mc_ci_low", "ber_mc_ci_high",
    )
    for row in rows:
        clamped = []
        values = [row["pt_dbm"]]
        for name in order:
            value = row[name]
            if name in _CLAMPED_SERIES and not math.isnan(value):
                clipped = min(1.0, max(0.0, value))
                if clipped != value:
                    clamped.append(name)
                value = clipped
            values.append(value)
        lines.append(_emit_row(values, clamped))
    _atomic_write(args.out, "\n".join(lines) + "\n")

    for note in notes:
        print(f"note: {note}")
    if worst[1] is not None:
        print(f"largest analytic-vs-MC |z|: {worst[0]:.2f} ({worst[2]} @ {worst[1]:g} dBm)")
    else:
        print("largest analytic-vs-MC |z|: n/a (all points undersampled or flagged)")
    if curve.flags:
        for flag in curve.flags:
            print(f"warning: {flag}", file=sys.stderr)
    if not args.no_plot:
        from . import plotting

        plotting.save_compare_figure(axis, rows, gamma_th, _plot_path(args.out))
    print(f"wrote {args.out} ({len(rows)} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orislink",
        description="dual-hop RF->FSO link performance analysis and simulation",
    )
    parser.add_argument("--version", action="version", version=f"orislink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sweep=False, mc=False):
        p.add_argument("--config", required=True, help="path to key = value config file")
        p.add_argument("--gamma-th", type=float, default=5.0,
                       help="SNR outage threshold in dB (default 5)")
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--force", action="store_true", help="allow overwriting outputs")
        p.add_argument("--quad-points", type=int, default=200,
                       help="adaptive quadrature subdivision limit (>= 64)")
        if sweep:
            p.add_argument("--pt-sweep", required=True,
                           help="transmit power sweep start:stop:step in dBm")
            p.add_argument("--no-plot", action="store_true",
                           help="skip rendering the companion PNG")
        if mc:
            p.add_argument("--trials", type=int, required=True, help="Monte Carlo trials")
            p.add_argument("--seed", type=int, default=1, help="campaign seed")
            p.add_argument("--workers", type=int, default=None,
                           help="worker threads (default: ORIS_LINK_THREADS or 1)")
            p.add_argument("--incidence-deg", type=float, default=45.0,
                           help="mirror incidence angle in degrees (default 45)")

    p_an = sub.add_parser("analyze", help="closed-form sweep to CSV (+PNG)")
    common(p_an, sweep=True)
    p_an.set_defaults(func=cmd_analyze)

    p_sim = sub.add_parser("simulate", help="Monte Carlo campaign to JSON")
    common(p_sim, mc=True)
    p_sim.add_argument("--metric", choices=("outage", "ber"), required=True)
    p_sim.add_argument("--max-ci-halfwidth", type=float, default=None,
                       help="fail (exit 4) if the 99%% CI half-width exceeds this")
    p_sim.set_defaults(func=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="analytic vs Monte Carlo overlay to CSV (+PNG)")
    common(p_cmp, sweep=True, mc=True)
    p_cmp.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.quad_points < 64:
        print("error: --quad-points must be >= 64", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParamsError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
