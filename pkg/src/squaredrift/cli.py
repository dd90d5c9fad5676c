"""Command-line front end.

Exit status: 0 on success, 1 on usage or configuration errors, 2 when a
numerical computation fails.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .classify import ClassificationError, classify_equilibrium, classify_orbit, drift_profile
from .dynamics import (
    EigenvalueError,
    IntegrationError,
    IntegratorConfig,
    OrbitError,
    SingularJacobianError,
    convert_trajectory,
    find_equilibrium,
    find_periodic_orbit,
    floquet_multipliers,
    simulate,
    stability_verdict,
)
from .dynamics.integrate import Trajectory
from .figure2 import FIGURE2_PARAMS, TRANSIENT, estimate_period, figure2_report, perturbed_squares
from .models import (
    MODELS,
    dtsq_branch,
    get_model,
    modes_array_from_polar,
    nf_branches,
    primary_branches,
    squares_state,
    thresholds,
    tsq_branch,
)
from .states import STATE_TYPES, ConfigError, ModelParams, params_from_dict
from .sweep import detect_bifurcations, sector_basis, sweep_parameter
from .verify import run_suite

DEFAULT_SEED = 42
CONVECTION = ("amplitude", "full", "polar")


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


NUMERICAL = (
    IntegrationError, OrbitError, SingularJacobianError, EigenvalueError, ClassificationError,
    ArithmeticError, np.linalg.LinAlgError, NumericalError,
)


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    """Everything a run depends on; JSON with exactly these keys."""

    model: str = "polar"
    params: object = FIGURE2_PARAMS
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    seed: int = DEFAULT_SEED
    out: str | None = None
    form: str = "polar"

    KEYS = ("model", "params", "integrator", "seed", "out", "form")

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if self.form not in ("polar", "cartesian"):
            raise ConfigError("form must be 'polar' or 'cartesian'")

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": self.params.to_dict(),
            "integrator": self.integrator.to_dict(),
            "seed": self.seed,
            "out": self.out,
            "form": self.form,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = sorted(set(data) - set(cls.KEYS))
        if unknown:
            raise ConfigError(f"unknown run config keys: {', '.join(unknown)}")
        model = data.get("model", "polar")
        kwargs = dict(data)
        if "params" in data:
            kwargs["params"] = params_from_dict(model, data["params"])
        elif model not in CONVECTION:
            raise ConfigError(f"model {model!r} needs explicit params")
        if "integrator" in data:
            try:
                kwargs["integrator"] = IntegratorConfig.from_dict(data["integrator"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
        if "seed" in data and not isinstance(data["seed"], int):
            raise ConfigError("seed must be an integer")
        return cls(**kwargs)


def _load_json_arg(text: str, what: str):
    """Inline JSON, or the path of a JSON file."""
    try:
        if text.lstrip().startswith(("{", "[")):
            return json.loads(text)
        return json.loads(Path(text).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {what}: {exc}") from None


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def build_config(args) -> RunConfig:
    base = _load_json_arg(args.config, "config") if getattr(args, "config", None) else {}
    if not isinstance(base, dict):
        raise UsageError("config must be a JSON object")
    data = dict(base)
    if getattr(args, "model", None):
        data["model"] = args.model
        if "params" in base and args.params is None and args.model != base.get("model", "polar"):
            data.pop("params")
    if getattr(args, "params", None) is not None:
        data["params"] = _load_json_arg(args.params, "params")
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        data["out"] = args.out
    if getattr(args, "form", None) is not None:
        data["form"] = args.form
    integ = dict(data.get("integrator", {}))
    if getattr(args, "tol", None) is not None and args.command == "simulate":
        integ["rel_tol"] = args.tol
        integ["abs_tol"] = args.tol * 1e-2
    if integ:
        data["integrator"] = integ
    return RunConfig.from_dict(data)


def _initial_state(cfg: RunConfig, text: str | None, perturb: float) -> np.ndarray:
    vf = get_model(cfg.model)
    if text is not None:
        raw = _load_json_arg(text, "state")
        if isinstance(raw, dict):
            fields = STATE_TYPES[vf.name].FIELDS
            unknown = sorted(set(raw) - set(fields))
            if unknown:
                raise UsageError(f"unknown state fields: {', '.join(unknown)}")
            x = np.array([float(raw.get(name, 0.0)) for name in fields])
        else:
            x = np.array(raw, dtype=float)
        if x.shape != (vf.dim,):
            raise UsageError(f"state for {vf.name} needs {vf.dim} values")
    elif vf.name in CONVECTION:
        polar = squares_state(cfg.params)
        if vf.name == "polar":
            x = polar
        else:
            x = modes_array_from_polar(polar)[0]
            if vf.name == "amplitude":
                x = x[[0, 1, 4, 5]]
    else:
        raise UsageError(f"model {vf.name} needs --state")
    if perturb:
        nc = len(vf.core)
        x[:nc] += perturb * _rng(cfg.seed).standard_normal(nc)
    return x


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    cfg = build_config(args)
    x0 = _initial_state(cfg, args.state, args.perturb)
    traj = simulate(cfg.model, x0, args.t_end, cfg.params, cfg.integrator, args.dt_out)
    if cfg.model in ("polar", "full"):
        traj = convert_trajectory(traj, cfg.form)
    io.write_trajectory_csv(traj, cfg.out)
    return 0


def _equilibrium_record(res, p) -> dict:
    try:
        label = classify_equilibrium(res.state, p, model=res.model).to_dict()
    except ClassificationError:
        label = None
    rec = {
        "state": dict(zip(get_model(res.model).fields, res.state.tolist())),
        "residual": res.residual_norm,
        "converged": res.converged,
        "iterations": res.iterations,
        "eigenvalues": res.reduced_eigenvalues(),
        "stable": res.stable,
        "label": label,
    }
    if res.converged and get_model(res.model).drift:
        rec["drift_rate"] = list(drift_profile(res, p).rate)
    return rec


def cmd_equilibria(args) -> int:
    cfg = build_config(args)
    p = cfg.params
    guesses = []
    if args.state is not None or args.perturb:
        guesses.append(("guess", _initial_state(cfg, args.state, args.perturb)))
    elif cfg.model in CONVECTION:
        if cfg.model != "polar":
            raise UsageError("closed-form seeds are in polar form; pass --state for other models")
        guesses.append(("Trivial", np.zeros(8)))
        if p.mu > 0:
            guesses.append(("Rolls", np.array([math.sqrt(p.mu), 0, 0, 0, 0, 0, 0, 0])))
        try:
            guesses.append(("Squares", squares_state(p)))
        except ValueError:
            pass
        for br in (tsq_branch(p), dtsq_branch(p)):
            if br.exists:
                guesses.append((br.label, br.state))
    else:
        guesses.append(("Trivial", np.zeros(get_model(cfg.model).dim)))
        for br in nf_branches(cfg.model, p):
            if br.exists and cfg.model == "pitchfork":
                guesses.append((br.label, np.concatenate([br.state(), [0.0, 0.0]])))
    out = []
    for seed_name, guess in guesses:
        res = find_equilibrium(cfg.model, guess, p)
        rec = _equilibrium_record(res, p)
        rec["seed"] = seed_name
        out.append(rec)
    io.write_json({"model": cfg.model, "params": p.to_dict(), "equilibria": out}, cfg.out)
    return 0


def _orbit_report(orbit, tol: float = 1e-6) -> dict:
    full = floquet_multipliers(orbit)
    extra = {
        "label": classify_orbit(orbit, tol).to_dict(),
        "stability": stability_verdict(full),
        "drift": drift_profile(orbit).to_dict(),
        "classification_tol": tol,
    }
    if orbit.basis is not None:
        extra["restricted_stability"] = stability_verdict(floquet_multipliers(orbit, "restricted"))
    return extra


def cmd_orbit(args) -> int:
    cfg = build_config(args)
    if cfg.model not in ("polar", "full", "hopf"):
        raise UsageError("periodic orbits are computed for the polar, full or hopf models")
    basis = None
    if args.sector != "none":
        if cfg.model == "hopf":
            raise UsageError("--sector applies to the convection model")
        basis = sector_basis(args.sector)
    if args.period is not None:
        if args.state is None:
            raise UsageError("--period needs --state")
        guess = _initial_state(cfg, args.state, 0.0)
        period = args.period
    else:
        if cfg.model == "hopf":
            raise UsageError("the hopf model needs --state and --period")
        x0 = perturbed_squares(cfg.params, _rng(cfg.seed), args.perturb, basis)
        traj = simulate("polar", x0, args.transient + 80.0, cfg.params, IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12))
        period = estimate_period(traj, args.transient)
        if period is None:
            raise NumericalError("no regular oscillation after the transient")
        guess = traj.states[-1]
    model = "polar" if cfg.model == "full" else cfg.model
    orbit = find_periodic_orbit(model, cfg.params, guess, period, basis=basis, tol=args.tol or 1e-10)
    extra = _orbit_report(orbit)
    io.write_orbit_json(orbit, cfg.out, extra)
    return 0


def _trajectory_from_csv(path, p) -> Trajectory:
    fields, times, states = io.read_trajectory_csv(path)
    for name, cls in STATE_TYPES.items():
        if tuple(cls.FIELDS) == fields:
            vf = get_model(name)
            derivs = np.array([vf.rhs(x, p) for x in states])
            return Trajectory(times, states, derivs, name, p, fields)
    raise UsageError(f"unrecognised trajectory columns: {', '.join(fields)}")


def cmd_classify(args) -> int:
    path = args.input
    if path.endswith(".json"):
        orbit = io.read_orbit_json(path)
        report = {"kind": "orbit", "label": classify_orbit(orbit, args.tol or 1e-6).to_dict(),
                  "drift": drift_profile(orbit).to_dict()}
    else:
        cfg = build_config(args)
        traj = _trajectory_from_csv(path, cfg.params)
        if traj.model == "full":
            traj = convert_trajectory(traj, "polar")
        last = traj.states[-1]
        vf = get_model(traj.model)
        if np.max(np.abs(vf.rhs(last, cfg.params)[: len(vf.core)])) <= 1e-8:
            label = classify_equilibrium(last, cfg.params, tol=args.tol or 1e-8, model=traj.model)
            report = {"kind": "equilibrium", "label": label.to_dict(),
                      "drift": drift_profile(last, cfg.params, traj.model).to_dict()}
        else:
            t_min = traj.times[0] + 0.5 * (traj.times[-1] - traj.times[0])
            period = None
            for section in ((vf.section[0], 0.0, 1), (vf.section[-1], 0.0, 1)):
                period = estimate_period(traj, t_min, section)
                if period is not None:
                    break
            if period is None:
                raise NumericalError("trajectory is neither at rest nor periodic")
            orbit = find_periodic_orbit(traj.model, cfg.params, last, period)
            report = {"kind": "orbit", "period": orbit.period,
                      "label": classify_orbit(orbit, args.tol or 1e-6).to_dict(),
                      "drift": drift_profile(orbit).to_dict()}
    io.write_json(report, args.out)
    return 0


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    if cfg.model not in CONVECTION:
        raise UsageError("sweeps run on the amplitude, full or polar model")
    lo, hi, step = args.range
    if step <= 0 or hi < lo:
        raise UsageError("--range needs lo <= hi and step > 0")
    sr = sweep_parameter(cfg.model, cfg.params, args.param, (lo, hi, step))
    events = detect_bifurcations(sr)
    io.write_text(io.sweep_csv(sr), cfg.out)
    if args.events:
        io.write_json({"parameter": args.param, "events": [e.to_dict() for e in events]}, args.events)
    return 0


def cmd_verify(args) -> int:
    models = [args.model] if args.model else None
    results = run_suite(models, args.samples, args.seed if args.seed is not None else DEFAULT_SEED,
                        args.tol or 1e-12)
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    lines.append("PASS all checks" if ok else "FAIL some checks")
    io.write_text("\n".join(lines) + "\n", args.out)
    return 0 if ok else 2


def cmd_branches(args) -> int:
    cfg = build_config(args)
    p = cfg.params
    if cfg.model in CONVECTION:
        pb = primary_branches(p)
        report = {
            "params": p.to_dict(),
            "thresholds": thresholds(p).to_dict(),
            "rolls": {"amp2": pb.rolls_amp2, "stable": pb.rolls_stable},
            "squares": {"amp2": pb.squares_amp2, "stable": pb.squares_stable},
            "branches": [
                {"label": br.label, "exists": br.exists, "drift_rate": br.drift_rate,
                 "state": None if br.state is None else br.state[:6], "reason": br.reason}
                for br in (tsq_branch(p), dtsq_branch(p))
            ],
        }
    else:
        report = {
            "params": p.to_dict(),
            "branches": [
                {"label": b.label, "amp2": b.amp2, "exists": b.exists, "degenerate": b.degenerate,
                 "frequency": b.frequency}
                for b in nf_branches(cfg.model, p)
            ],
        }
    io.write_json(report, cfg.out)
    return 0


def cmd_figure2(args) -> int:
    cfg = build_config(args)
    if cfg.model != "polar":
        raise UsageError("figure2 runs on the convection model")
    report = figure2_report(cfg.params, cfg.seed, args.trials, args.transient)
    io.write_json(report, cfg.out)
    return 0


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(sp, model=True, form=False, tol=True):
    sp.add_argument("--config", help="run configuration JSON (file or inline)")
    if model:
        sp.add_argument("--model", choices=sorted(MODELS))
    sp.add_argument("--params", help="parameter JSON (file or inline)")
    sp.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
    sp.add_argument("--out", help="output path (default: standard output)")
    if form:
        sp.add_argument("--form", choices=("cartesian", "polar"))
    if tol:
        sp.add_argument("--tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="squaredrift", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("simulate", help="integrate and write a trajectory CSV")
    _common(sp, form=True)
    sp.add_argument("--state", help="initial state: JSON list or {field: value}")
    sp.add_argument("--perturb", type=float, default=0.0, help="seeded Gaussian kick to the core")
    sp.add_argument("--t-end", type=float, default=100.0)
    sp.add_argument("--dt-out", type=float, default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("equilibria", help="Newton-refined equilibria with eigenvalues and labels")
    _common(sp)
    sp.add_argument("--state")
    sp.add_argument("--perturb", type=float, default=0.0)
    sp.set_defaults(func=cmd_equilibria)

    sp = sub.add_parser("orbit", help="refine, classify and assess a periodic orbit")
    _common(sp)
    sp.add_argument("--state")
    sp.add_argument("--period", type=float)
    sp.add_argument("--sector", choices=("none", "x", "diagonal"), default="none")
    sp.add_argument("--perturb", type=float, default=1e-2)
    sp.add_argument("--transient", type=float, default=TRANSIENT)
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("classify", help="label a stored orbit (JSON) or trajectory (CSV)")
    _common(sp, model=False)
    sp.add_argument("input")
    sp.set_defaults(func=cmd_classify, model=None)

    sp = sub.add_parser("sweep", help="continue squares and detect bifurcations")
    _common(sp, tol=False)
    sp.add_argument("--param", default="mu", choices=ModelParams.KEYS)
    sp.add_argument("--range", type=float, nargs=3, metavar=("LO", "HI", "STEP"), required=True)
    sp.add_argument("--events", help="bifurcation report JSON path")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="equivariance and Jacobian property checks")
    sp.add_argument("--model", choices=sorted(MODELS))
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("branches", help="closed-form thresholds and branch table")
    _common(sp, tol=False)
    sp.set_defaults(func=cmd_branches)

    sp = sub.add_parser("figure2", help="end-to-end report on the oscillatory instability of squares")
    _common(sp, tol=False)
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--transient", type=float, default=TRANSIENT)
    sp.set_defaults(func=cmd_figure2)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
