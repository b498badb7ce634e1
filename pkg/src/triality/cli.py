"""Command-line front end.

Subcommands: prepare, fringe, block, metrics, tomo, table1, sphere. Every
command accepts ``--seed``, ``--exposure``, ``--out``, ``--format`` and
``--config``; the seed falls back to ``$TRIALITY_SEED`` when not given on the
command line. Outputs are plain CSV/JSON and deterministic for a given seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import __version__
from .experiment import DEFAULT_EXPOSURE, measure, reported_rows, run_table1
from .metrics import (
    FringeFit,
    concurrence_wootters,
    distinguishability_from_blocking,
    duality_gap,
    duality_holds,
    identity_residual,
    vdc_closed_form,
    wootters_raw,
)
from .optics import block_path, fringe_scan, phase_grid
from .states import PreparationParams, density_of, prepare_state
from .targets import (
    TargetPoint,
    named_target,
    roundtrip_error,
    solve_params,
    sphere_points,
    target_record,
)
from .tomography import expected_counts, fidelity, reconstruct_mle, records_to_csv, simulate_counts

SEED_ENV = "TRIALITY_SEED"
CHECK_TOL = 1e-9


class ConfigError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    params: Union[PreparationParams, TargetPoint, None] = None
    phase_grid: dict = field(default_factory=lambda: {"start": 0.0, "stop": 2 * math.pi, "steps": 64})
    exposure: int = DEFAULT_EXPOSURE
    seed: int = 0
    output: Optional[str] = None

    def __post_init__(self):
        steps = int(self.phase_grid.get("steps", 64))
        if steps < 2:
            raise ConfigError(f"phase_grid.steps must be at least 2, got {steps}")
        if self.exposure < 0:
            raise ConfigError(f"exposure must be nonnegative, got {self.exposure}")

    @property
    def preparation(self) -> PreparationParams:
        if self.params is None:
            return solve_params(named_target("center"))
        if isinstance(self.params, TargetPoint):
            return solve_params(self.params)
        return self.params

    def grid(self) -> np.ndarray:
        g = self.phase_grid
        return phase_grid(float(g.get("start", 0.0)), float(g.get("stop", 2 * math.pi)), int(g.get("steps", 64)))


def _target_from_json(obj) -> TargetPoint:
    if isinstance(obj, str):
        return named_target(obj)
    return TargetPoint.of(obj["V"], obj["D"], obj["C"], name=obj.get("name"))


def load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def build_config(args) -> ExperimentConfig:
    data = load_config(args.config) if getattr(args, "config", None) else {}
    try:
        params = None
        if "params" in data:
            params = PreparationParams.from_dict(data["params"])
        if "target" in data:
            params = _target_from_json(data["target"])
        if args.target is not None:
            params = named_target(args.target)
        if args.vdc is not None:
            params = TargetPoint.of(*args.vdc)
        if args.R is not None or args.theta is not None:
            base = params if isinstance(params, PreparationParams) else PreparationParams(0.0, 0.0)
            params = PreparationParams(
                R=base.R if args.R is None else args.R,
                theta=base.theta if args.theta is None else args.theta,
                xi=base.xi if args.xi is None else args.xi,
            )
        elif args.xi is not None:
            p = params if isinstance(params, PreparationParams) else solve_params(params or named_target("center"))
            params = PreparationParams(p.R, p.theta, args.xi)

        grid = dict(data.get("phase_grid", {}))
        for key in ("start", "stop", "steps"):
            if getattr(args, key, None) is not None:
                grid[key] = getattr(args, key)
        grid.setdefault("start", 0.0)
        grid.setdefault("stop", 2 * math.pi)
        grid.setdefault("steps", 64)

        if args.seed is not None:
            seed = args.seed
        elif os.environ.get(SEED_ENV):
            seed = int(os.environ[SEED_ENV])
        else:
            seed = int(data.get("seed", 0))
        exposure = args.exposure if args.exposure is not None else int(data.get("exposure", DEFAULT_EXPOSURE))
        output = args.out if args.out is not None else data.get("output")
        return ExperimentConfig(params, grid, int(exposure), int(seed), output)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# output helpers

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _flat_csv(obj: dict) -> str:
    keys = [k for k, v in obj.items() if not isinstance(v, (list, dict))]
    return _csv_text(keys, [[obj[k] for k in keys]])


class Emitter:
    """Routes each named artifact to ``<prefix><suffix>`` or to stdout."""

    def __init__(self, prefix: Optional[str], stdout=None):
        self.prefix = prefix
        self.stdout = stdout or sys.stdout
        self.written: list[str] = []

    def emit(self, text: str, suffix: str, primary: bool = True):
        if self.prefix is None:
            if primary:
                self.stdout.write(text)
            return
        path = Path(f"{self.prefix}{suffix}")
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.written.append(str(path))


def _note(msg: str):
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# commands

def cmd_prepare(cfg: ExperimentConfig, fmt: str, out: Emitter) -> dict:
    p = cfg.preparation
    state = prepare_state(p)
    vdc = vdc_closed_form(p)
    if abs(identity_residual(vdc)) > CHECK_TOL:
        raise InvariantError(f"closed-form triple off the sphere: {vdc}")
    name = cfg.params.name if isinstance(cfg.params, TargetPoint) else None
    result = {"target": name, "params": p.to_dict(), "amplitudes": state.to_list(), **vdc.to_dict()}
    out.emit(_json_text(result) if fmt == "json" else _flat_csv(result), f".{fmt}")
    return result


def cmd_fringe(cfg: ExperimentConfig, fmt: str, out: Emitter) -> dict:
    p = cfg.preparation
    noisy = cfg.exposure > 0
    scan = fringe_scan(p, cfg.grid(), mean_counts=cfg.exposure if noisy else None, seed=cfg.seed)
    fit = FringeFit().fit(scan.phases, scan.intensities)
    result = {"V_fit": fit.visibility_, "V_closed_form": vdc_closed_form(p).V, "points": len(scan.phases)}
    if fmt == "json":
        column = "counts" if noisy else "intensity"
        values = [int(v) for v in scan.intensities] if noisy else scan.intensities.tolist()
        out.emit(_json_text({**result, "xi": scan.phases.tolist(), column: values}), ".json")
    else:
        out.emit(scan.to_csv(), ".csv")
    _note(f"fitted V = {fit.visibility_:.6f} (closed form {result['V_closed_form']:.6f})")
    return result


def cmd_block(cfg: ExperimentConfig, fmt: str, out: Emitter) -> dict:
    p = cfg.preparation
    noisy = cfg.exposure > 0
    sa, sb = np.random.SeedSequence(cfg.seed).spawn(2)
    mean = cfg.exposure if noisy else None
    open_a = block_path(p, "b", mean_counts=mean, seed=sa)
    open_b = block_path(p, "a", mean_counts=mean, seed=sb)
    result = {
        "kind": "counts" if noisy else "probability",
        "arm_a_open": open_a,
        "arm_b_open": open_b,
        "D": distinguishability_from_blocking(open_a, open_b),
        "D_closed_form": vdc_closed_form(p).D,
    }
    if not noisy and abs(open_a + open_b - 0.5) > 1e-12:
        raise InvariantError(f"blocked-arm probabilities do not sum to 1/2: {open_a + open_b}")
    out.emit(_json_text(result) if fmt == "json" else _flat_csv(result), f".{fmt}")
    return result


def cmd_metrics(cfg: ExperimentConfig, fmt: str, out: Emitter) -> dict:
    p = cfg.preparation
    closed = vdc_closed_form(p)
    m = measure(p, cfg.exposure, seed=cfg.seed, grid=cfg.grid())
    result = {
        "params": p.to_dict(),
        "closed_form": closed.to_dict(),
        "measured": m.triple.to_dict(),
        "measured_C_raw": m.concurrence_raw,
        "identity_residual": identity_residual(closed),
        "duality_gap": duality_gap(p),
        "duality_inequality_holds": duality_holds(closed),
        "exposure": cfg.exposure,
    }
    if abs(result["duality_gap"] - closed.C**2) > 1e-12 or not result["duality_inequality_holds"]:
        raise InvariantError("gap relation or duality inequality violated")
    if fmt == "json":
        out.emit(_json_text(result), ".json")
    else:
        rows = [["closed_form", *closed.to_dict().values()], ["measured", *m.triple.to_dict().values()]]
        out.emit(_csv_text(["source", "V", "D", "C", "sum"], rows), ".csv")
    return result


def cmd_tomo(cfg: ExperimentConfig, fmt: str, out: Emitter) -> dict:
    p = cfg.preparation
    ideal = density_of(prepare_state(p))
    if cfg.exposure > 0:
        records = simulate_counts(ideal, cfg.exposure, seed=cfg.seed)
    else:
        records = expected_counts(ideal)
    fit = reconstruct_mle(records)
    rho = fit.density.op
    result = {
        **fit.to_dict(),
        "params": p.to_dict(),
        "exposure": cfg.exposure,
        "fidelity": fidelity(fit.density, ideal),
        "C": concurrence_wootters(fit.density),
        "C_raw": wootters_raw(fit.density),
        "C_closed_form": vdc_closed_form(p).C,
    }
    bars = _csv_text(["row", "col", "re", "im"],
                     [[i, j, repr(float(rho[i, j].real)), repr(float(rho[i, j].imag))]
                      for i in range(4) for j in range(4)])
    if out.prefix is None:
        out.emit(_json_text(result) if fmt == "json" else bars, "")
    else:
        out.emit(_json_text(result), "_rho.json")
        out.emit(bars, "_bars.csv")
        out.emit(records_to_csv(records), "_counts.csv")
    return result


def cmd_table1(cfg: ExperimentConfig, fmt: str, out: Emitter, trials: int = 20) -> dict:
    summaries = run_table1(seed=cfg.seed, exposure=cfg.exposure, trials=trials, grid=cfg.grid())
    states = [s.stats() for s in summaries]
    result = {"seed": cfg.seed, "exposure": cfg.exposure, "trials": states[0]["trials"],
              "states": states, "reported": reported_rows()}
    if cfg.exposure == 0:
        for st in states:
            err = max(abs(st[k] - st[k + "_target"]) for k in "VDC")
            if err > 1e-6 or abs(st["SUM"] - 1) > 1e-6:
                raise InvariantError(f"{st['name']} noiseless triple off target by {err:.3e}")
    if fmt == "json":
        out.emit(_json_text(result), ".json")
    else:
        keys = ["name", "V", "V_std", "D", "D_std", "C", "C_std", "VD", "VD_std", "SUM", "SUM_std", "trials"]
        out.emit(_csv_text(keys, [[st[k] for k in keys] for st in states]), ".csv")
    return result


def cmd_sphere(cfg: ExperimentConfig, fmt: str, out: Emitter, n: int = 64) -> dict:
    rows = []
    for t in sphere_points(n):
        rec = target_record(t)
        if abs(identity_residual(t.triple)) > CHECK_TOL or roundtrip_error(t) > CHECK_TOL:
            raise InvariantError(f"sphere sample {t.name} fails the identity or round-trip check")
        rows.append(rec)
    if fmt == "json":
        out.emit(_json_text(rows), ".json")
    else:
        keys = ["V", "D", "C", "R", "theta"]
        out.emit(_csv_text(keys, [[repr(r[k]) for k in keys] for r in rows]), ".csv")
    return {"rows": rows}


COMMANDS = {
    "prepare": (cmd_prepare, "json", "prepared state amplitudes and closed-form (V, D, C)"),
    "fringe": (cmd_fringe, "csv", "fringe scan over the delay phase, with fitted visibility"),
    "block": (cmd_block, "json", "blocked-arm detection rates and distinguishability"),
    "metrics": (cmd_metrics, "json", "closed-form and simulated-measurement (V, D, C)"),
    "tomo": (cmd_tomo, "json", "simulated tomography with maximum-likelihood reconstruction"),
    "table1": (cmd_table1, "json", "simulate all seven grid-node target states"),
    "sphere": (cmd_sphere, "csv", "sample the VDC octant and solve for preparation parameters"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    g.add_argument("--exposure", type=int, default=None,
                   help=f"mean counts per fringe point / tomography setting; 0 = noiseless "
                        f"(default {DEFAULT_EXPOSURE})")
    g.add_argument("--out", default=None, help="output path prefix; stdout when omitted")
    g.add_argument("--format", choices=("csv", "json"), default=None)
    g.add_argument("--config", default=None, help="JSON experiment config file")

    s = common.add_argument_group("state selection")
    s.add_argument("--R", type=float, default=None, help="amplitude ratio |c_b/c_a|")
    s.add_argument("--theta", type=float, default=None, help="path-b polarization angle (rad)")
    s.add_argument("--xi", type=float, default=None, help="relative phase (rad)")
    s.add_argument("--target", default=None, help="named target, e.g. center, state-1 ... state-7")
    s.add_argument("--vdc", type=float, nargs=3, metavar=("V", "D", "C"), default=None)

    p = common.add_argument_group("phase grid")
    p.add_argument("--start", type=float, default=None)
    p.add_argument("--stop", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)

    parser = argparse.ArgumentParser(prog="triality", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, _, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if name == "table1":
            sp.add_argument("--trials", type=int, default=20, help="Monte Carlo repetitions per state")
        if name == "sphere":
            sp.add_argument("--n", type=int, default=64, help="number of octant samples")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func, default_fmt, _ = COMMANDS[args.command]
    fmt = args.format or default_fmt
    try:
        cfg = build_config(args)
        out = Emitter(cfg.output)
        extra = {}
        if args.command == "table1":
            if args.trials < 1:
                raise ConfigError("--trials must be at least 1")
            extra["trials"] = args.trials
        if args.command == "sphere":
            if args.n < 1:
                raise ConfigError("--n must be at least 1")
            extra["n"] = args.n
        func(cfg, fmt, out, **extra)
    except ConfigError as exc:
        parser.exit(2, f"triality {args.command}: invalid configuration: {exc}\n")
    except InvariantError as exc:
        parser.exit(1, f"triality {args.command}: invariant check failed: {exc}\n")
    except (ValueError, OSError) as exc:
        parser.exit(2, f"triality {args.command}: {exc}\n")
    for path in out.written:
        _note(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
