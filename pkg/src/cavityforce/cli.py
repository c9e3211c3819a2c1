"""Scenario runner: force traces, velocity sweeps, root and J tables.

Configs are YAML files; ``cavityforce --print-schema`` prints every
accepted key with its default.  Each invocation writes CSV data files and
one ``<prefix>_summary.json`` into ``--out-dir``.  Nothing is written when
the config fails validation.

Exit status: 0 success, 1 engine error, 2 invalid config or usage,
3 failed internal-consistency check.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import __version__, engines, hardwall, perturbative, sqrtlaw
from .errors import CavityForceError, ConfigError, ConsistencyError, RootSearchError
from .schedule import OccupationModel, WallSchedule

FLOOR = 1e-14
SCHEMA = """\
# cavityforce scenario config (YAML).  Defaults shown; every key is optional
# except wall.kind and wall.L0.
wall:
  kind: linear            # fixed | linear | sqrt-law
  L0: 1.0                 # initial length, > 0 (sqrt-law: must equal sqrt(c) if c is given)
  Ldot0: 0.0              # linear wall velocity
  a: 0.0                  # sqrt-law: L**2 = a t**2 + b t + c
  b: null                 # sqrt-law: defaults to 2 L0 Ldot0
  c: null                 # sqrt-law: defaults to L0**2
  hbar: 1.0
confinement: box          # box (hard wall) | trap (soft wall, harmonic)
occupation:
  mode: zero-temperature  # zero-temperature | finite-temperature
  N: 1                    # filled levels at zero temperature
  beta: 1.0               # finite temperature only
  mu: 0.0
level: null               # pin one initial level (box from 1, trap from 0)
engine: exact             # exact | perturbative | sqrtlaw | softwall | oracle | all, or a list
nmax: 64                  # basis size (perturbative pair sums use at least 4096)
mode: instantaneous       # instantaneous | time-averaged | cycle-averaged
times: [1.0]              # list, or {start: .., stop: .., count: ..}
oracle:
  points: 2048
  dt: 1.0e-4
output:
  prefix: run
sweep:
  velocities: [1.0e-3, 2.0e-3, 5.0e-3, 1.0e-2, 2.0e-2, 5.0e-2]
  t: 1.0                  # evaluation time
  paired: false           # also run -Ldot0 and compare prefactors
roots:
  hbarB: [1.0e-3, 1.0e-2]
  nmax: 5
jtable:
  nmax: 12
"""

DEFAULTS = yaml.safe_load(SCHEMA)
DEFAULTS["wall"]["kind"] = None
DEFAULTS["wall"]["L0"] = None


def _merge(base: dict, update: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in update.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where!r} must be a mapping")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULTS)
    try:
        with open(path) as f:
            raw = yaml.safe_load(f) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at top level")
    return _merge(DEFAULTS, raw)


def _number(cfg, key, value, positive=False, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key} must be a finite number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{key} must be positive, got {value!r}")
    return float(value)


def _positive_int(key, value):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{key} must be a positive integer, got {value!r}")
    return value


def build_schedule(wall: dict) -> WallSchedule:
    kind = wall["kind"]
    if kind not in ("fixed", "linear", "sqrt-law"):
        raise ConfigError(f"wall.kind must be fixed, linear or sqrt-law, got {kind!r}")
    L0 = _number(wall, "wall.L0", wall["L0"], positive=True)
    hbar = _number(wall, "wall.hbar", wall["hbar"], positive=True)
    v = _number(wall, "wall.Ldot0", wall["Ldot0"])
    if kind == "fixed":
        if v != 0:
            raise ConfigError("a fixed wall needs Ldot0 = 0")
        return WallSchedule.fixed(L0, hbar)
    if kind == "linear":
        return WallSchedule.linear(L0, v, hbar)
    a = _number(wall, "wall.a", wall["a"])
    b = _number(wall, "wall.b", wall["b"], allow_none=True)
    c = _number(wall, "wall.c", wall["c"], allow_none=True)
    b = 2 * L0 * v if b is None else b
    c = L0 * L0 if c is None else c
    if not (c > 0 and math.isclose(math.sqrt(c), L0, rel_tol=1e-12)):
        raise ConfigError(f"sqrt-law needs c = L0**2 > 0; got c={c}, L0={L0}")
    return WallSchedule.sqrt_law(a, b, c, hbar)


def build_occupation(occ: dict) -> OccupationModel:
    if occ["mode"] == "zero-temperature":
        return OccupationModel.zero_temperature(_positive_int("occupation.N", occ["N"]))
    if occ["mode"] == "finite-temperature":
        return OccupationModel.fermi_dirac(
            _number(occ, "occupation.beta", occ["beta"], positive=True),
            _number(occ, "occupation.mu", occ["mu"]))
    raise ConfigError(f"occupation.mode must be zero-temperature or finite-temperature, "
                      f"got {occ['mode']!r}")


def build_times(value) -> list[float]:
    if isinstance(value, dict):
        if set(value) != {"start", "stop", "count"}:
            raise ConfigError("times mapping needs exactly start, stop, count")
        count = _positive_int("times.count", value["count"])
        times = np.linspace(_number(value, "times.start", value["start"]),
                            _number(value, "times.stop", value["stop"]), count).tolist()
    elif isinstance(value, (list, tuple)) and value:
        times = [_number(value, "times[]", t) for t in value]
    else:
        raise ConfigError("times must be a non-empty list or a start/stop/count mapping")
    if min(times) < 0:
        raise ConfigError("times must be non-negative")
    return [float(t) for t in times]


def select_engines(name, confinement: str) -> list[str]:
    names = name if isinstance(name, list) else [name]
    out = []
    for n in names:
        if n == "all":
            out.extend(engines.BOX_ENGINES if confinement == "box" else engines.TRAP_ENGINES)
        elif n in engines.ENGINES:
            out.append(n)
        else:
            raise ConfigError(f"unknown engine {n!r}; choose from {engines.ENGINES + ('all',)}")
    return list(dict.fromkeys(out))


def build_scenario(cfg: dict) -> engines.Scenario:
    if cfg["wall"]["kind"] is None or cfg["wall"]["L0"] is None:
        raise ConfigError("wall.kind and wall.L0 are required")
    if cfg["confinement"] not in ("box", "trap"):
        raise ConfigError(f"confinement must be box or trap, got {cfg['confinement']!r}")
    if cfg["mode"] not in engines.MODES:
        raise ConfigError(f"mode must be one of {engines.MODES}, got {cfg['mode']!r}")
    level = cfg["level"]
    if level is not None:
        first = 1 if cfg["confinement"] == "box" else 0
        if isinstance(level, bool) or not isinstance(level, int) or level < first:
            raise ConfigError(f"level must be an integer >= {first}, got {level!r}")
    try:
        sched = build_schedule(cfg["wall"])
        occ = build_occupation(cfg["occupation"])
    except (ValueError, CavityForceError) as exc:
        raise ConfigError(str(exc)) from exc
    return engines.Scenario(
        schedule=sched, occupation=occ, confinement=cfg["confinement"], level=level,
        nmax=_positive_int("nmax", cfg["nmax"]), mode=cfg["mode"],
        oracle_points=_positive_int("oracle.points", cfg["oracle"]["points"]),
        oracle_dt=_number(cfg, "oracle.dt", cfg["oracle"]["dt"], positive=True))


def check_preconditions(sc: engines.Scenario, names: list[str], times: list[float]) -> None:
    """Engine applicability, checked before any computation."""
    for name in names:
        if name == "softwall" and sc.confinement != "trap":
            raise ConfigError("the softwall engine needs confinement: trap")
        if name in ("exact", "perturbative", "sqrtlaw") and sc.confinement != "box":
            raise ConfigError(f"the {name} engine needs confinement: box")
        if name == "exact" and sc.schedule.kind == "sqrt-law":
            raise ConfigError("the exact engine needs a fixed or linear wall; use sqrtlaw")
        if name == "softwall" and sc.schedule.kind == "sqrt-law":
            raise ConfigError("the softwall engine needs a fixed or linear wall")
        if name == "perturbative":
            if sc.schedule.kind == "sqrt-law":
                raise ConfigError("the perturbative engine needs a fixed or linear wall")
            if sc.level not in (None, 1):
                raise ConfigError("the perturbative engine fills from level 1; level must be 1")
        if name == "oracle" and sc.mode != "instantaneous":
            raise ConfigError("the oracle engine only supports mode: instantaneous")
    try:
        sc.schedule.check_time(times)
    except CavityForceError as exc:
        raise ConfigError(str(exc)) from exc


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_csv(path: Path, rows: list[dict], fields: list[str]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([fmt(row.get(k)) for k in fields])


def write_json(path: Path, data: dict) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True, allow_nan=True)
        f.write("\n")


TRACE_FIELDS = ["engine", "t", "L", "Ldot", "E", "F_ad", "F_nonad", "F_total", "in_window"]


def trace_fields(rows: list[dict]) -> list[str]:
    extra = sorted({k for r in rows for k in r} - set(TRACE_FIELDS))
    return TRACE_FIELDS + extra


def _evaluate(job):
    name, sc, times = job
    return engines.evaluate(name, sc, times)


def run_engines(sc, names, times, jobs=1) -> dict[str, list[dict]]:
    work = [(n, sc, times) for n in names]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate, work))
    else:
        results = [_evaluate(w) for w in work]
    flags = engines.window_flags(sc, times)
    out = {}
    for name, rows in zip(names, results):
        by_t = dict(zip(times, flags))
        for r in rows:
            r["in_window"] = by_t.get(r["t"], False)
        out[name] = rows
    return out


def comparison(results: dict[str, list[dict]]) -> dict:
    """Max deviation of each engine from the reference, relative to max |reference|."""
    names = list(results)
    if len(names) < 2:
        return {}
    ref = next((n for n in ("exact", "softwall", "oracle") if n in results), names[0])
    ref_rows = {r["t"]: r for r in results[ref]}
    block = {"reference": ref, "engines": {}}
    for name in names:
        if name == ref:
            continue
        dev = {}
        pairs = [(r, ref_rows[r["t"]]) for r in results[name] if r["t"] in ref_rows]
        for col in ("E", "F_total", "F_nonad"):
            scale = max(abs(b[col]) for _, b in pairs) if pairs else 0.0
            diff = max(abs(a[col] - b[col]) for a, b in pairs) if pairs else 0.0
            dev[col] = diff / scale if scale > 0 else diff
        block["engines"][name] = {"max_relative_deviation": dev, "common_times": len(pairs)}
    return block


def _summary(command, cfg, extra) -> dict:
    return {"command": command, "version": __version__, "config": cfg, **extra}


def cmd_run(args, cfg, command="run") -> int:
    sc, names, times, prefix = _prepare(args, cfg)
    if command == "compare" and len(names) < 2:
        raise ConfigError("compare needs at least two engines (use engine: all)")
    try:
        results = run_engines(sc, names, times, args.jobs)
    except ConsistencyError:
        raise
    except CavityForceError as exc:
        raise CavityForceError(f"{exc} [scenario: {_describe(sc)}]") from exc
    out = _outdir(args)
    rows = [r for n in names for r in results[n]]
    write_csv(out / f"{prefix}_trace.csv", rows, trace_fields(rows))
    flags = engines.window_flags(sc, times)
    summary = _summary(command, cfg, {
        "engines": names,
        "checks": {"route_equality": "passed" if sc.mode == "instantaneous" else "not applicable",
                   "times_outside_window": flags.count(False)},
        "comparison": comparison(results),
        "files": [f"{prefix}_trace.csv"],
    })
    write_json(out / f"{prefix}_summary.json", summary)
    print(f"wrote {len(rows)} rows to {out / (prefix + '_trace.csv')}")
    return 0


def _describe(sc: engines.Scenario) -> str:
    s = sc.schedule
    return (f"{sc.confinement} {s.kind} L0={s.L0:g} Ldot0={s.Ldot0:g} hbar={s.hbar:g} "
            f"level={sc.level} mode={sc.mode}")


def _prepare(args, cfg):
    if args.engine:
        cfg["engine"] = args.engine
    if args.nmax is not None:
        cfg["nmax"] = args.nmax
    if args.mode:
        cfg["mode"] = args.mode
    sc = build_scenario(cfg)
    names = select_engines(cfg["engine"], sc.confinement)
    times = build_times(cfg["times"])
    check_preconditions(sc, names, times)
    prefix = str(cfg["output"]["prefix"])
    return sc, names, times, prefix


def _outdir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _with_velocity(sc: engines.Scenario, v: float) -> engines.Scenario:
    s = sc.schedule
    if s.kind == "sqrt-law":
        sched = WallSchedule.sqrt_law(s.a, 2 * s.L0 * v, s.c, s.hbar)
    else:
        sched = WallSchedule.linear(s.L0, v, s.hbar)
    return engines.Scenario(sched, sc.occupation, sc.confinement, sc.level, sc.nmax, sc.mode,
                            sc.oracle_points, sc.oracle_dt)


def fit_power_law(velocities, forces) -> dict:
    """Least-squares line through log|F| vs log|v| plus the slope-2 prefactor."""
    v = np.abs(np.asarray(velocities, dtype=float))
    f = np.asarray(forces, dtype=float)
    if np.any(np.abs(f) < FLOOR):
        raise CavityForceError(
            f"degenerate fit: |F_nonad| below {FLOOR:g} at Ldot0 = {v[np.abs(f) < FLOOR][0]:g}")
    slope, intercept = np.polyfit(np.log(v), np.log(np.abs(f)), 1)
    sign = float(np.sign(np.sum(f)))
    quad = float(np.sum(f * v * v) / np.sum(v ** 4))
    return {"slope": float(slope), "prefactor": sign * math.exp(intercept),
            "quadratic_prefactor": quad}


def reference_coefficient(sc: engines.Scenario, name: str):
    """Analytic C' (exact), C (perturbative) or C_soft, where one applies."""
    s = sc.schedule
    if sc.mode == "instantaneous" or s.kind == "sqrt-law":
        return None, None
    levels = engines.level_weights(sc)
    if name == "exact":
        if sc.mode == "time-averaged":
            if sc.level is None:
                return "C_prime", hardwall.nonadiabatic_coefficient_exact(
                    sc.occupation, hbar=s.hbar, L0=s.L0)[0]
            return "C_prime", hardwall.level_coefficient_exact(sc.level)[0] * s.hbar ** 2
        jt = hardwall.j_table(max(n for n, _ in levels))
        val = sum(f * jt.J2[n - 1, n - 1] for n, f in levels)
        return "cycle_average", val * s.hbar ** 2
    if name == "perturbative" and sc.mode == "time-averaged":
        model = sc.occupation if sc.level is None else OccupationModel.zero_temperature(1)
        return "C", perturbative.coefficient_C(model, hbar=s.hbar, L0=s.L0)[0]
    if name == "softwall":
        if sc.mode == "time-averaged":
            return "C_soft", sum(-f * (2 * n + 1) ** 3 / 16 for n, f in levels) * s.hbar ** 2
        return "cycle_average", sum(f * (n + 0.5) for n, f in levels) * s.hbar ** 2
    return None, None


def cmd_sweep(args, cfg) -> int:
    sc, names, _, prefix = _prepare(args, cfg)
    if len(names) != 1:
        raise ConfigError("sweep runs a single engine")
    name = names[0]
    vel = [_number(cfg, "sweep.velocities[]", v) for v in (args.velocities or
                                                            cfg["sweep"]["velocities"])]
    av = np.abs(vel)
    if len(vel) < 4 or np.min(av) == 0 or np.max(av) / np.min(av) < 10 - 1e-12:
        raise ConfigError("sweep needs at least 4 nonzero velocities spanning a decade")
    t = _number(cfg, "sweep.t", cfg["sweep"]["t"])
    paired = bool(cfg["sweep"]["paired"])
    signs = (1, -1) if paired else (1,)
    jobs = [(name, _with_velocity(sc, s * v), [t]) for s in signs for v in vel]
    for _, scv, tt in jobs:
        check_preconditions(scv, [name], tt)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_evaluate, jobs))
    else:
        results = [_evaluate(j) for j in jobs]
    rows = []
    for (_, scv, _), res in zip(jobs, results):
        r = dict(res[0])
        r["Ldot0"] = scv.schedule.Ldot0
        r["in_window"] = engines.window_flags(scv, [t])[0]
        rows.append(r)
    n = len(vel)
    fit = fit_power_law(vel, [r["F_nonad"] for r in rows[:n]])
    out = _outdir(args)
    fields = ["engine", "Ldot0"] + [f for f in trace_fields(rows) if f not in ("engine", "Ldot0")]
    write_csv(out / f"{prefix}_sweep.csv", rows, fields)
    label, ref = reference_coefficient(sc, name)
    report = {"engine": name, "mode": sc.mode, "t": t, "fit": fit}
    if ref is not None:
        est = fit["quadratic_prefactor"] * sc.schedule.L0
        report["coefficient"] = {"name": label, "reference": ref, "fitted": est,
                                 "relative_error": abs(est - ref) / abs(ref)}
    if paired:
        neg = fit_power_law([-v for v in vel], [r["F_nonad"] for r in rows[n:]])
        report["paired"] = {"fit_minus": neg, "prefactor_relative_difference":
                            abs(neg["quadratic_prefactor"] - fit["quadratic_prefactor"])
                            / abs(fit["quadratic_prefactor"])}
    write_json(out / f"{prefix}_summary.json", _summary("sweep", cfg, {
        "sweep": report, "files": [f"{prefix}_sweep.csv"],
        "checks": {"times_outside_window": sum(not r["in_window"] for r in rows)}}))
    print(f"slope {fit['slope']:.6f}  quadratic prefactor {fit['quadratic_prefactor']:.10g}")
    return 0


def cmd_roots(args, cfg) -> int:
    values = args.hbarB if args.hbarB is not None else cfg["roots"]["hbarB"]
    if not values:
        raise ConfigError("roots needs at least one hbarB value")
    values = [_number(cfg, "roots.hbarB[]", v) for v in values]
    nmax = _positive_int("roots.nmax", args.nmax if args.nmax is not None else cfg["roots"]["nmax"])
    prefix = str(cfg["output"]["prefix"])
    out = _outdir(args)
    rows, entries = [], []
    for hb in values:
        semi = (np.arange(1, nmax + 1) * math.pi) ** 2 / 2
        try:
            K = sqrtlaw.find_roots(hb, nmax)
        except RootSearchError as exc:
            entries.append({"hbarB": hb, "status": f"failed: {exc}"})
            rows.append({"hbarB": hb, "status": "failed"})
            continue
        dev = K / semi - 1
        for n in range(nmax):
            rows.append({"hbarB": hb, "n": n + 1, "K": K[n], "semiclassical": semi[n],
                         "deviation": dev[n], "status": "ok"})
        entries.append({"hbarB": hb, "status": "ok", "max_abs_deviation": float(np.max(np.abs(dev)))})
    write_csv(out / f"{prefix}_roots.csv", rows,
              ["hbarB", "n", "K", "semiclassical", "deviation", "status"])
    ok = [e for e in entries if e["status"] == "ok"]
    order = sorted(ok, key=lambda e: e["hbarB"])
    monotone = all(a["max_abs_deviation"] <= b["max_abs_deviation"] for a, b in zip(order, order[1:]))
    write_json(out / f"{prefix}_summary.json", _summary("roots", cfg, {
        "roots": entries, "nmax": nmax, "deviation_monotone_in_hbarB": monotone,
        "files": [f"{prefix}_roots.csv"]}))
    for e in entries:
        print(f"hbarB={e['hbarB']:g}: {e['status']}"
              + (f", max |K/K_sc - 1| = {e['max_abs_deviation']:.3e}" if e["status"] == "ok" else ""))
    return 0


def cmd_jtable(args, cfg) -> int:
    nmax = _positive_int("jtable.nmax", args.nmax if args.nmax is not None else cfg["jtable"]["nmax"])
    prefix = str(cfg["output"]["prefix"])
    out = _outdir(args)
    jt = hardwall.j_table(nmax)
    rows = [{"n": n + 1, "l": l + 1, "J1": jt.J1[n, l], "J2": jt.J2[n, l], "J3": jt.J3[n, l]}
            for n in range(nmax) for l in range(nmax)]
    write_csv(out / f"{prefix}_jtable.csv", rows, ["n", "l", "J1", "J2", "J3"])
    write_json(out / f"{prefix}_summary.json", _summary("jtable", cfg, {
        "nmax": nmax, "files": [f"{prefix}_jtable.csv"]}))
    print(f"wrote {len(rows)} rows")
    return 0


def acceptance_path() -> Path:
    return Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"


def cmd_selftest(args, cfg) -> int:
    path = acceptance_path()
    if not path.exists():
        print(f"acceptance suite not found at {path} (needs a source checkout)", file=sys.stderr)
        return 2
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-s", str(path)])
    out = _outdir(args)
    prefix = str(cfg["output"]["prefix"])
    write_json(out / f"{prefix}_summary.json", _summary("selftest", cfg, {
        "suite": str(path), "returncode": proc.returncode}))
    return proc.returncode


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "roots": cmd_roots, "jtable": cmd_jtable,
            "selftest": cmd_selftest,
            "compare": lambda a, c: cmd_run(a, c, command="compare")}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cavityforce",
                                description="Force of an ideal quantum gas on a moving wall")
    p.add_argument("--print-schema", action="store_true", help="print the config schema and exit")
    sub = p.add_subparsers(dest="command")
    for name, helptext in [("run", "force trace for one or more engines"),
                           ("compare", "run several engines and compare them"),
                           ("sweep", "velocity sweep and power-law fit"),
                           ("roots", "sqrt-law eigenvalues vs the semiclassical values"),
                           ("jtable", "dump the J1/J2/J3 integrals"),
                           ("selftest", "run the acceptance suite")]:
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", help="YAML scenario file")
        s.add_argument("--out-dir", default="cavityforce-out", help="output directory")
        s.add_argument("--nmax", type=int, help="basis size (roots/jtable: table size)")
        s.add_argument("--engine", choices=engines.ENGINES + ("all",))
        s.add_argument("--mode", choices=engines.MODES)
        s.add_argument("--jobs", type=int, default=1,
                       help="worker processes for independent scenarios")
        s.add_argument("--seedless", action="store_true",
                       help="accepted for scripts; every command is deterministic already")
        if name == "sweep":
            s.add_argument("--velocities", type=float, nargs="+")
        if name == "roots":
            s.add_argument("--hbarB", type=float, nargs="*")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_schema:
        sys.stdout.write(SCHEMA)
        return 0
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConsistencyError as exc:
        print(f"consistency check failed: {exc}", file=sys.stderr)
        return 3
    except (CavityForceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
