"""Command-line driver: ``stochwaves <verb> [--config PATH] [--override key=value ...]``.

Verbs: simulate, compare-schemes, convergence, solitary, selfcheck.  Every run
writes into a fresh timestamped directory under ``output`` and leaves a
``manifest.json`` that can be fed back as ``--config`` to repeat the run.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import itertools
import json
import logging
import sys
from pathlib import Path

import numpy as np
from jsonschema import Draft7Validator

from . import __version__
from .diagnostics import ObserverSeries, xs_norm
from .errors import BlowUpError, ConfigurationError, StochWavesError, UsageError
from .integrators import (
    OBSERVERS,
    SCHEMES,
    duhamel_propagator,
    get_stepper,
    n_steps_for,
    simulate,
    strong_errors,
)
from .models import TWO_COMPONENT, UNIDIRECTIONAL, WHITHAM_BOUSSINESQ, ModelSpec, Model
from .noise import NoiseSpec, coarsen_path, gammas_from_epsilon, sample_path
from .spectral import make_grid, spatial_shift
from .waves import gaussian_bump, solitary_seed_wb, solve_solitary_unidirectional

log = logging.getLogger("stochwaves")

FMT = "%.17g"

DEFAULTS = {
    "model": WHITHAM_BOUSSINESQ,
    "g": 1.0,
    "h": 1.0,
    "b": None,
    "linear_noise_only": False,
    "dealias": False,
    "L": 200.0,
    "N": 1024,
    "T": 50.0,
    "dt": 5e-4,
    "stride": 100,
    "snapshot_stride": 10000,
    "epsilon": 0.1,
    "m": 1,
    "seed": 0,
    "scheme": "duhamel-milstein",
    "initial": "solitary",
    "c": 1.1,
    "amplitude": 0.1,
    "width": 2.0,
    "initial_file": None,
    "observers": ["energy", "mass"],
    "output": "runs",
    "schemes": list(SCHEMES),
    "seeds": [0],
    "factors": [2, 4, 8, 16],
}

_number = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
SCHEMA = {
    "type": "object",
    "properties": {
        "model": {"type": "string"},
        "g": _pos,
        "h": _pos,
        "b": {"anyOf": [_pos, {"type": "null"}]},
        "linear_noise_only": {"type": "boolean"},
        "dealias": {"type": "boolean"},
        "L": _pos,
        "N": {"type": "integer", "minimum": 4},
        "T": {"type": "number", "minimum": 0},
        "dt": _pos,
        "stride": {"type": "integer", "minimum": 1},
        "snapshot_stride": {"type": "integer", "minimum": 1},
        "epsilon": {"type": "number", "minimum": 0},
        "m": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "scheme": {"enum": list(SCHEMES)},
        "initial": {"enum": ["solitary", "gaussian", "file"]},
        "c": _number,
        "amplitude": _number,
        "width": _pos,
        "initial_file": {"type": ["string", "null"]},
        "observers": {"type": "array", "items": {"enum": sorted(OBSERVERS)}},
        "output": {"type": "string"},
        "schemes": {"type": "array", "items": {"enum": list(SCHEMES)}},
        "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "factors": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
    },
    "patternProperties": {"^_": {}},
    "additionalProperties": False,
}


# -- configuration -------------------------------------------------------------------


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path=None, overrides=(), seed=None, output=None) -> dict:
    """Defaults, then the JSON file, then ``key=value`` overrides, then flags."""
    config = dict(DEFAULTS)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigurationError("config must be a JSON object")
        config.update({k: v for k, v in loaded.items() if not k.startswith("_")})
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        config[key.strip()] = _parse_value(value)
    if seed is not None:
        config["seed"] = int(seed)
    if output is not None:
        config["output"] = str(output)
    validate_config(config)
    return config


def validate_config(config: dict) -> None:
    errors = sorted(Draft7Validator(SCHEMA).iter_errors(config), key=lambda e: list(e.path))
    if errors:
        msgs = "; ".join(f"{'.'.join(map(str, e.path)) or '<root>'}: {e.message}" for e in errors)
        raise ConfigurationError(f"invalid config: {msgs}")
    if config["N"] % 2:
        raise ConfigurationError("N must be even")
    ModelSpec(config["model"], config["g"], config["h"], config["b"], config["linear_noise_only"])
    n_steps_for(config["T"], config["dt"])
    if config["snapshot_stride"] % config["stride"]:
        raise ConfigurationError("snapshot_stride must be a multiple of stride")
    if config["initial"] == "file" and not config["initial_file"]:
        raise ConfigurationError("initial = 'file' needs initial_file")


def build(config: dict):
    grid = make_grid(config["L"], config["N"])
    spec = ModelSpec(config["model"], config["g"], config["h"], config["b"],
                     config["linear_noise_only"])
    model = Model(spec, grid, config["dealias"])
    noise = gammas_from_epsilon(config["epsilon"], config["m"], spec.g, spec.h)
    return model, noise


BOUNDARY_TOL = 1e-8


def check_decay(u, edge: int = 4) -> float:
    """Warn when the state is not negligible at the ends of the periodic box."""
    u = np.atleast_2d(u)
    peak = np.max(np.abs(u))
    edges = np.max(np.abs(np.concatenate([u[:, :edge], u[:, -edge:]], axis=1)))
    ratio = float(edges / peak) if peak > 0 else 0.0
    if ratio > BOUNDARY_TOL:
        log.warning("initial state reaches %.1e of its maximum at the domain edges;"
                    " the periodic box may be too small", ratio)
    return ratio


def initial_state(config: dict, model: Model) -> np.ndarray:
    u = _initial_state(config, model)
    check_decay(u)
    return u


def _initial_state(config: dict, model: Model) -> np.ndarray:
    grid, spec = model.grid, model.spec
    kind = config["initial"]
    if kind == "file":
        data = np.loadtxt(config["initial_file"], delimiter=",", skiprows=1, ndmin=2)
        u = data[:, 1:].T
        return model.check_state(u)
    if kind == "gaussian":
        bump = gaussian_bump(grid, config["amplitude"], config["width"])
        u = np.zeros((spec.n_components, grid.n_modes))
        u[0] = bump
        return u
    return solitary_profile(config, model)


def solitary_profile(config, model):
    spec, grid, c = model.spec, model.grid, config["c"]
    if spec.kind == WHITHAM_BOUSSINESQ:
        return solitary_seed_wb(c, grid, spec.g, spec.h).profile
    if spec.kind in UNIDIRECTIONAL:
        return solve_solitary_unidirectional(model, c).profile
    raise ConfigurationError(
        f"no solitary-wave solver for {spec.kind!r}; use initial = 'gaussian' or 'file'"
    )


# -- run directories -------------------------------------------------------------------


def make_run_dir(base, verb) -> Path:
    """``<base>/<verb>-<UTC timestamp>``, with a numeric suffix if it already exists."""
    base = Path(base)
    base.mkdir(parents=True, exist_ok=True)
    stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    for k in itertools.count():
        path = base / (f"{verb}-{stamp}" + (f"-{k}" if k else ""))
        try:
            path.mkdir()
            return path
        except FileExistsError:
            continue


def write_manifest(run_dir: Path, config: dict, verb: str, status: str, **extra):
    manifest = {**config, "_verb": verb, "_version": __version__, "_status": status, **extra}
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def write_snapshot(path, grid, u, names):
    np.savetxt(path, np.column_stack([grid.x, *np.atleast_2d(u)]), delimiter=",",
               header=",".join(["x", *names]), comments="", fmt=FMT)


def write_spectrum(path, grid, u):
    amp = np.abs(grid.rfft(u[0])) * grid.dx
    np.savetxt(path, np.column_stack([grid.rxi, amp]), delimiter=",",
               header="xi,abs_eta_hat", comments="", fmt=FMT)


def component_names(model):
    if model.kind in TWO_COMPONENT:
        return ["eta", "w" if model.kind == "boussinesq" else "v"]
    return ["r"]


def _meta(config, **kw):
    keys = ("model", "g", "h", "b", "L", "N", "dt", "epsilon", "m")
    return {**{k: config[k] for k in keys}, **kw}


# -- verbs ----------------------------------------------------------------------------


def cmd_simulate(config: dict) -> Path:
    """Single run: snapshots, observer series, final spectrum, manifest."""
    model, noise = build(config)
    grid = model.grid
    u = initial_state(config, model)
    n = n_steps_for(config["T"], config["dt"])
    dt, stride, snap = config["dt"], config["stride"], config["snapshot_stride"]
    path = sample_path(config["seed"], n, dt, config["m"])
    inc = path.increments
    stepper = get_stepper(config["scheme"])
    obs = {name: OBSERVERS[name] for name in config["observers"]}
    names = component_names(model)

    run_dir = make_run_dir(config["output"], "simulate")
    (run_dir / "snapshots").mkdir()
    write_manifest(run_dir, config, "simulate", "running")

    times, values = [0.0], {k: [float(fn(model, u))] for k, fn in obs.items()}
    write_snapshot(run_dir / "snapshots" / f"step_{0:08d}.csv", grid, u, names)
    status, failure = "completed", None
    norm0 = np.sqrt(np.sum(u * u)) or 1.0
    try:
        for k in range(n):
            new = stepper(model, u, dt, inc[k], noise)
            if not np.all(np.isfinite(new)) or np.sqrt(np.sum(new * new)) > 1e6 * norm0:
                raise BlowUpError(f"blow-up at step {k + 1}", step=k + 1, last_state=u, time=k * dt)
            u = new
            step = k + 1
            if step % stride == 0 or step == n:
                times.append(step * dt)
                for name, fn in obs.items():
                    values[name].append(float(fn(model, u)))
            if step % snap == 0 or step == n:
                write_snapshot(run_dir / "snapshots" / f"step_{step:08d}.csv", grid, u, names)
    except BlowUpError as exc:
        status, failure = f"blow-up at t = {exc.time:g}", exc
    meta = _meta(config, scheme=config["scheme"], seed=config["seed"])
    for name in obs:
        ObserverSeries(name, times, values[name], meta).to_csv(run_dir / f"observer_{name}.csv")
    write_spectrum(run_dir / "spectrum.csv", grid, u)
    write_manifest(run_dir, config, "simulate", status)
    print(run_dir)
    if failure is not None:
        raise failure
    return run_dir


def cmd_compare_schemes(config: dict) -> Path:
    """Replay one shared path per seed through every scheme."""
    schemes = list(dict.fromkeys(config["schemes"]))
    if len(schemes) < 2:
        raise UsageError("compare-schemes needs at least two distinct schemes")
    model, noise = build(config)
    grid = model.grid
    u0 = initial_state(config, model)
    n = n_steps_for(config["T"], config["dt"])
    seeds = config["seeds"]
    paths = [sample_path(s, n, config["dt"], config["m"]) for s in seeds]
    run_dir = make_run_dir(config["output"], "compare-schemes")
    write_manifest(run_dir, config, "compare-schemes", "running")

    trajs = {}
    for scheme in schemes:
        trajs[scheme] = simulate(model, u0, config["T"], config["dt"], scheme, noise,
                                 path=paths, observers=("energy",), stride=config["stride"])
    times = trajs[schemes[0]].times
    rows = []
    for i, seed in enumerate(seeds):
        for scheme in schemes:
            E = trajs[scheme].observers["energy"][:, i]
            ObserverSeries("energy", times, E, _meta(config, scheme=scheme, seed=seed)).to_csv(
                run_dir / f"energy_{scheme}_seed{seed}.csv")
            rows.append((seed, scheme, float(np.max(np.abs(E - E[0])) / abs(E[0]))))
        pairs = list(itertools.combinations(schemes, 2))
        cols = [times]
        for a, b in pairs:
            d = trajs[a].states[:, i] - trajs[b].states[:, i]
            cols.append(np.sqrt(grid.inner(d, d).sum(axis=-1)))
        np.savetxt(run_dir / f"differences_seed{seed}.csv", np.column_stack(cols), delimiter=",",
                   header=",".join(["t", *(f"{a}|{b}" for a, b in pairs)]), comments="", fmt=FMT)
    with open(run_dir / "summary.csv", "w") as fh:
        fh.write("seed,scheme,max_relative_energy_drift\n")
        for seed, scheme, drift in rows:
            fh.write(f"{seed},{scheme},{drift:.17g}\n")
    write_manifest(run_dir, config, "compare-schemes", "completed")
    print(run_dir)
    return run_dir


def cmd_convergence(config: dict) -> Path:
    """Strong errors of coarsened runs against each scheme's fine run."""
    model, noise = build(config)
    u0 = initial_state(config, model)
    n = n_steps_for(config["T"], config["dt"])
    for f in config["factors"]:
        if n % f:
            raise ConfigurationError(f"factor {f} does not divide the {n} fine steps")
    paths = [sample_path(s, n, config["dt"], config["m"]) for s in config["seeds"]]
    run_dir = make_run_dir(config["output"], "convergence")
    write_manifest(run_dir, config, "convergence", "running")
    orders = {}
    with open(run_dir / "convergence.csv", "w") as fh:
        fh.write("scheme,factor,dt,strong_error\n")
        for scheme in dict.fromkeys(config["schemes"]):
            study = strong_errors(model, u0, config["T"], paths, config["factors"], scheme, noise)
            orders[scheme] = study.order
            for f, dt, e in zip(study.factors, study.dts, study.errors):
                fh.write(f"{scheme},{f},{dt:.17g},{e:.17g}\n")
    (run_dir / "orders.json").write_text(json.dumps(orders, indent=2))
    write_manifest(run_dir, config, "convergence", "completed")
    for scheme, order in orders.items():
        print(f"{scheme}: fitted strong order {order:.3f}")
    print(run_dir)
    return run_dir


def cmd_solitary(config: dict) -> Path:
    """Solitary-wave profile of speed ``c`` with its residual."""
    model, _ = build(config)
    spec, grid, c = model.spec, model.grid, config["c"]
    if spec.kind == WHITHAM_BOUSSINESQ:
        wave = solitary_seed_wb(c, grid, spec.g, spec.h)
    elif spec.kind in UNIDIRECTIONAL:
        wave = solve_solitary_unidirectional(model, c)
    else:
        raise ConfigurationError(f"no solitary-wave solver for {spec.kind!r}")
    run_dir = make_run_dir(config["output"], "solitary")
    wave.to_csv(run_dir / "profile.csv", component_names(model))
    write_manifest(run_dir, config, "solitary", "completed",
                   _residual=wave.residual, _iterations=wave.iterations)
    print(f"c = {c}: residual {wave.residual:.3e} after {wave.iterations} iterations")
    print(run_dir)
    return run_dir


def selfcheck_results(seed: int = 0):
    """Quick invariant suite; returns ``[(name, passed, detail)]``."""
    results = []
    rng = np.random.default_rng(seed)
    grid = make_grid(2 * np.pi * 8, 128)
    noise = gammas_from_epsilon(0.1)

    def record(name, value, limit):
        results.append((name, bool(value <= limit), f"{value:.2e} <= {limit:g}"))

    f = np.exp(-((grid.x / 4.0) ** 2))
    a, b = rng.uniform(-3, 3, 2)
    comp = spatial_shift(spatial_shift(f, a, grid), b, grid)
    record("shift composition", np.max(np.abs(comp - spatial_shift(f, a + b, grid))), 1e-12)

    airy = Model(ModelSpec("airy"), grid)
    u = rng.standard_normal((2, grid.n_modes))
    u = grid.irfft(grid.rfft(u) * (np.abs(grid.rxi) < 3))
    P = duhamel_propagator(airy, 0.7, np.array([0.3]), noise)
    record("Airy flow preserves X^0 norm",
           abs(xs_norm(P.apply(u, grid), 0, grid) - xs_norm(u, 0, grid)) / xs_norm(u, 0, grid), 1e-12)

    wb = Model(ModelSpec(WHITHAM_BOUSSINESQ), grid)
    u0 = np.stack([gaussian_bump(grid, 0.05, 3.0), gaussian_bump(grid, 0.05, 3.0)])
    zero = NoiseSpec.zero()
    finals = [simulate(wb, u0, 0.05, 1e-3, s, zero, seed=seed, observers=(), keep_states=False).final
              for s in SCHEMES]
    record("schemes agree without noise", max(np.max(np.abs(x - finals[0])) for x in finals), 1e-12)

    p = sample_path(seed, 64, 1e-3)
    c = coarsen_path(p, 4)
    record("coarse path partial sums", float(np.max(np.abs(c.W - p.W[::4]))), 0.0)
    return results


def cmd_selfcheck(config: dict) -> int:
    results = selfcheck_results(config["seed"])
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    return 0 if all(ok for _, ok, _ in results) else 1


VERBS = {
    "simulate": cmd_simulate,
    "compare-schemes": cmd_compare_schemes,
    "convergence": cmd_convergence,
    "solitary": cmd_solitary,
    "selfcheck": cmd_selfcheck,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochwaves", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb)
        p.add_argument("--config", type=Path, help="JSON config (or a previous manifest.json)")
        p.add_argument("--seed", type=int, help="noise seed")
        p.add_argument("--output", type=Path, help="base directory for run directories")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config entry (JSON value); repeatable")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config, args.override, args.seed, args.output)
        out = VERBS[args.verb](config)
    except BlowUpError as exc:
        print(f"error: {exc} (partial outputs kept)", file=sys.stderr)
        return 3
    except StochWavesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return out if isinstance(out, int) else 0


if __name__ == "__main__":
    sys.exit(main())
