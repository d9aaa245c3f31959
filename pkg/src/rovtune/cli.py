"""Command-line interface: simulate traces, run tuners, reproduce the benchmark.

Subcommands
    simulate   step response of the PI loop for one gain pair -> CSV + metrics JSON
    tune       multi-run GA/SA tuning -> results JSON (+ optional scatter CSV)
    bench      the three reference gain sets vs their published metrics

Exit codes: 0 ok, 2 invalid flags/config, 3 numerical failure.

Every JSON artifact embeds the full effective configuration (seeds, dt,
horizon, band, plant), so results are reproducible from their own metadata.
Outputs are byte-identical for identical inputs; the worker count is an
execution detail and is deliberately not echoed.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .lti import TransferFunction, default_yaw_plant
from .metrics import ERROR_INDEX_KINDS, error_index, transient_metrics
from .refdata import BENCH_LABELS, REFERENCE_GAINS, REFERENCE_METRICS
from .sim import NumericalBlowup, PIGains, SimConfig, SimTrace, ZeroController, simulate_pi_loop
from .tuners import GAConfig, GainBounds, SAConfig, ga_tune, multi_run, objective, sa_tune

DEFAULT_BAND = 0.02


def write_trace_csv(trace: SimTrace, path) -> None:
    """Trace CSV: header t,r,e,u,y; 17 significant digits (bit-exact round-trip)."""
    data = np.column_stack([trace.t, trace.r, trace.e, trace.u, trace.y])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="t,r,e,u,y", comments="")


def read_trace_csv(path) -> SimTrace:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    t, r, e, u, y = data.T
    return SimTrace(dt=float(t[1] - t[0]), t=t, r=r, e=e, u=u, y=y)


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _load_plant(spec: str) -> TransferFunction:
    if spec == "default":
        return default_yaw_plant()
    doc = json.loads(Path(spec).read_text())
    return _plant_from_dict(doc, f"plant file {spec!r}")


def _plant_from_dict(doc, where: str) -> TransferFunction:
    if not isinstance(doc, dict) or set(doc) != {"num", "den"}:
        raise ValueError(f"{where} must be an object with exactly the keys 'num' and 'den'")
    return TransferFunction(tuple(doc["num"]), tuple(doc["den"]))


def _plant_dict(plant: TransferFunction) -> dict:
    return {"num": list(plant.num.coeffs), "den": list(plant.den.coeffs)}


def _merge_section(defaults, overrides: dict, section: str):
    known = {f.name for f in dataclasses.fields(defaults)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown keys in config section {section!r}: {sorted(unknown)}")
    if "seed" in overrides:
        raise ValueError("set the seed with --seed, not in the config file")
    return dataclasses.replace(defaults, **overrides)


def cmd_simulate(args) -> int:
    gains = PIGains(args.kp, args.ki)
    if gains.kp == 0.0 and gains.ki == 0.0:
        raise ZeroController("kp = ki = 0 is not a controller")
    plant = _load_plant(args.plant)
    cfg = SimConfig(
        dt=args.dt,
        t_final=args.t_final,
        reference_amplitude=args.amplitude,
        saturation=args.saturation,
    )
    trace = simulate_pi_loop(plant, gains, cfg)
    if args.out:
        write_trace_csv(trace, args.out)
    m = transient_metrics(trace, DEFAULT_BAND)
    payload = {
        "config": {
            "kp": gains.kp,
            "ki": gains.ki,
            "dt": cfg.dt,
            "t_final": cfg.t_final,
            "reference_amplitude": cfg.reference_amplitude,
            "saturation": cfg.saturation,
            "band_fraction": DEFAULT_BAND,
            "plant": _plant_dict(plant),
        },
        "metrics": dataclasses.asdict(m),
        "itae": error_index(trace, "ITAE").value,
    }
    sys.stdout.write(_dump_json(payload))
    return 0


def _result_dict(result) -> dict:
    return {
        "seed": result.seed,
        "kp": result.gains.kp,
        "ki": result.gains.ki,
        "cost": result.cost,
        "evaluations": result.evaluations,
        "history": [[i, c] for i, c in result.history],
    }


def cmd_tune(args) -> int:
    doc = json.loads(Path(args.config).read_text()) if args.config else {}
    if not isinstance(doc, dict):
        raise ValueError("config file must contain a JSON object")
    allowed = {"bounds", "ga", "sa", "sim", "index", "plant"}
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)} (allowed: {sorted(allowed)})")

    bounds = _merge_section(GainBounds(), doc.get("bounds", {}), "bounds")
    sim_cfg = _merge_section(SimConfig(), doc.get("sim", {}), "sim")
    index_kind = doc.get("index", "ITAE")
    if index_kind not in ERROR_INDEX_KINDS:
        raise ValueError(f"index must be one of {ERROR_INDEX_KINDS}, got {index_kind!r}")
    plant = _plant_from_dict(doc["plant"], "config key 'plant'") if "plant" in doc else default_yaw_plant()

    def objective_fn(gains: PIGains) -> float:
        return objective(gains, plant, sim_cfg, index_kind)

    if args.method == "ga":
        opt_cfg = _merge_section(GAConfig(seed=args.seed), doc.get("ga", {}), "ga")
        tuner = lambda c: ga_tune(bounds, c, objective_fn, workers=args.workers)
    else:
        opt_cfg = _merge_section(SAConfig(seed=args.seed), doc.get("sa", {}), "sa")
        tuner = lambda c: sa_tune(bounds, c, objective_fn, workers=args.workers)

    runset = multi_run(tuner, opt_cfg, n_runs=args.runs)

    payload = {
        "method": args.method,
        "config": {
            "bounds": dataclasses.asdict(bounds),
            args.method: dataclasses.asdict(opt_cfg),
            "sim": dataclasses.asdict(sim_cfg),
            "index": index_kind,
            "plant": _plant_dict(plant),
            "runs": args.runs,
        },
        "runs": [_result_dict(r) for r in runset.runs],
        "best": _result_dict(runset.best),
    }
    text = _dump_json(payload)
    if args.scatter:
        rows = sorted(runset.runs, key=lambda r: r.seed)
        lines = ["run,kp,ki,cost"]
        for i, r in enumerate(rows, start=1):
            lines.append(f"{i},{r.gains.kp:.17g},{r.gains.ki:.17g},{r.cost:.17g}")
        Path(args.scatter).write_text("\n".join(lines) + "\n")
    if args.out:
        Path(args.out).write_text(text)
        best = runset.best
        print(
            f"best of {args.runs} runs (seed {best.seed}): kp={best.gains.kp:.4f} ki={best.gains.ki:.4f}"
            f" ~ [{round(best.gains.kp)}, {round(best.gains.ki)}], cost={best.cost:.6g}"
        )
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    cfg = SimConfig(dt=args.dt, t_final=args.t_final)
    plant = default_yaw_plant()
    rows = []
    for label in BENCH_LABELS:
        kp, ki = REFERENCE_GAINS[label]
        trace = simulate_pi_loop(plant, PIGains(kp, ki), cfg)
        m = transient_metrics(trace, args.band)
        computed = {
            "peak_time": m.peak_time,
            "percent_overshoot": m.percent_overshoot,
            "settling_time": m.settling_time,
            "itae": error_index(trace, "ITAE").value,
        }
        reference = REFERENCE_METRICS[label]
        deviation = {}
        for key, ref in reference.items():
            comp = computed[key]
            deviation[key] = (comp - ref) / ref if comp is not None else None
        rows.append(
            {"label": label, "kp": kp, "ki": ki, "computed": computed,
             "reference": reference, "deviation": deviation}
        )

    print("Step-response benchmark: computed vs published reference")
    print(f"dt={cfg.dt:g} s, horizon={cfg.t_final:g} s, settling band={args.band * 100:g}%")
    for row in rows:
        cells = []
        for key, title in (
            ("peak_time", "peak"),
            ("percent_overshoot", "overshoot"),
            ("settling_time", "settling"),
        ):
            comp, ref, dev = row["computed"][key], row["reference"][key], row["deviation"][key]
            comp_s = f"{comp:.3f}" if comp is not None else "n/a"
            dev_s = f"{dev:+.1%}" if dev is not None else "n/a"
            cells.append(f"{title} {comp_s} vs {ref:g} ({dev_s})")
        print(f"  {row['label']:8s} kp={row['kp']:g} ki={row['ki']:g}  " + "  ".join(cells)
              + f"  ITAE {row['computed']['itae']:.4f}")
    print("  note: reference columns are published values; the GA peak time is"
          " informational (not reproduced by the bare plant model).")

    payload = {
        "settings": {
            "dt": cfg.dt,
            "t_final": cfg.t_final,
            "reference_amplitude": cfg.reference_amplitude,
            "band_fraction": args.band,
        },
        "rows": rows,
    }
    Path(args.out).write_text(_dump_json(payload))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rovtune",
        description="Simulate and tune the PI yaw-steering loop.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="step response of the PI loop for one gain pair")
    p_sim.add_argument("--kp", type=float, required=True, help="proportional gain")
    p_sim.add_argument("--ki", type=float, required=True, help="integral gain")
    p_sim.add_argument("--dt", type=float, default=1e-3, help="step size in seconds")
    p_sim.add_argument("--t-final", type=float, default=15.0, help="horizon in seconds")
    p_sim.add_argument("--amplitude", type=float, default=1.0, help="reference step height")
    p_sim.add_argument("--saturation", type=float, default=None, help="symmetric actuation limit")
    p_sim.add_argument("--plant", default="default", help="'default' or path to a {num, den} JSON file")
    p_sim.add_argument("--out", default=None, help="trace CSV path")
    p_sim.set_defaults(func=cmd_simulate)

    p_tune = sub.add_parser("tune", help="multi-run GA/SA gain tuning")
    p_tune.add_argument("--method", choices=("ga", "sa"), required=True)
    p_tune.add_argument("--runs", type=int, default=10, help="independent runs (seeds seed..seed+runs-1)")
    p_tune.add_argument("--seed", type=int, default=0, help="base seed")
    p_tune.add_argument("--config", default=None, help="JSON file overriding bounds/ga/sa/sim/index/plant")
    p_tune.add_argument("--out", default=None, help="results JSON path (default: stdout)")
    p_tune.add_argument("--scatter", default=None, help="per-run scatter CSV path (run,kp,ki,cost)")
    p_tune.add_argument("--workers", type=int, default=1, help="evaluation threads (does not affect results)")
    p_tune.set_defaults(func=cmd_tune)

    p_bench = sub.add_parser("bench", help="three reference gain sets vs their published metrics")
    p_bench.add_argument("--dt", type=float, default=1e-3)
    p_bench.add_argument("--t-final", type=float, default=15.0)
    p_bench.add_argument("--band", type=float, default=DEFAULT_BAND, help="settling band fraction")
    p_bench.add_argument("--out", default="bench_report.json", help="report JSON path")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalBlowup as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
