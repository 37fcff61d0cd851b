"""``emu`` command-line entry point.

Exit status: 0 on success, 1 on a domain error, 2 on a usage or input-schema
error. Every output file starts with a provenance header (tool version,
config hash, seed); CSV and Pauli-text files carry it as ``#`` comment lines,
JSON files under a ``"provenance"`` key.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AssemblyFailed, ConfigError, EmulatorError

log = logging.getLogger("rydsim")

THREADS_ENV = "RYDSIM_THREADS"

SEQUENCE_DEFAULTS = {
    "model": "ising",
    "interpolation": "piecewise-linear",
    "tol": 1e-8,
    "dt_max": 0.01,
}
SEQUENCE_FIELDS = {"register_ref", "register", "model", "c6", "c3", "channels", "duration", "interpolation", "tol", "dt_max"}
CHANNELS = ("omega", "delta", "phase")


@dataclass
class RunConfig:
    subcommand: str
    inputs: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    seed: int | None = None
    output: str | None = None
    warnings: list = field(default_factory=list)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps({"subcommand": self.subcommand, "options": self.options}, sort_keys=True, default=str).encode())
        for name in sorted(self.inputs):
            path = self.inputs[name]
            h.update(name.encode())
            if path is not None and Path(path).is_file():
                h.update(Path(path).read_bytes())
        return h.hexdigest()

    def provenance(self) -> dict:
        return {
            "tool": f"rydsim {__version__}",
            "subcommand": self.subcommand,
            "config_sha256": self.digest(),
            "seed": self.seed,
        }

    def header_lines(self) -> list[str]:
        p = self.provenance()
        lines = [f"{k}={v}" for k, v in p.items()]
        lines.append("config=" + json.dumps(self.options, sort_keys=True, default=str))
        return lines


def _number(value, name, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"field '{name}' must be a finite number", name)
    if positive and not value > 0:
        raise ConfigError(f"field '{name}' must be positive", name)
    return float(value)


def _channel(samples, name, duration):
    if isinstance(samples, (int, float)) and not isinstance(samples, bool):
        samples = [[0.0, samples]]
    if not isinstance(samples, list) or not samples:
        raise ConfigError(f"field 'channels.{name}' must be a list of [t, value] pairs", f"channels.{name}")
    pts = []
    for pair in samples:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(f"field 'channels.{name}' entries must be [t, value]", f"channels.{name}")
        pts.append((_number(pair[0], f"channels.{name}"), _number(pair[1], f"channels.{name}")))
    if len(pts) > 1:
        times = [t for t, _ in pts]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError(f"field 'channels.{name}' times must be strictly increasing", f"channels.{name}")
        if times[0] > 0 or times[-1] < duration:
            raise ConfigError(f"field 'channels.{name}' must span [0, duration]", f"channels.{name}")
    return [list(p) for p in pts]


def validate_config(source, base_dir=None) -> RunConfig:
    """Normalize an evolve sequence file (path or dict), filling defaults.

    Unknown top-level fields produce a warning rather than an error.
    """
    path = None
    if isinstance(source, (str, os.PathLike)):
        path = Path(source)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"sequence file is not valid JSON: {exc}") from exc
        base_dir = base_dir or path.parent
    else:
        data = dict(source)
    if not isinstance(data, dict):
        raise ConfigError("sequence file must hold a JSON object")
    cfg = RunConfig("evolve", inputs={"sequence": str(path) if path else None})
    for key in sorted(set(data) - SEQUENCE_FIELDS):
        msg = f"unknown field '{key}' ignored"
        cfg.warnings.append(msg)
        warnings.warn(msg, stacklevel=2)
    opts = dict(SEQUENCE_DEFAULTS)
    opts.update({k: v for k, v in data.items() if k in SEQUENCE_FIELDS})

    if "duration" not in data:
        raise ConfigError("missing required field 'duration'", "duration")
    opts["duration"] = _number(opts["duration"], "duration", positive=True)
    if opts["model"] not in ("ising", "xy"):
        raise ConfigError("field 'model' must be 'ising' or 'xy'", "model")
    if opts["interpolation"] not in ("piecewise-linear", "piecewise-constant"):
        raise ConfigError("field 'interpolation' must be 'piecewise-linear' or 'piecewise-constant'", "interpolation")
    opts["tol"] = _number(opts["tol"], "tol", positive=True)
    opts["dt_max"] = _number(opts["dt_max"], "dt_max", positive=True)
    coeff = "c6" if opts["model"] == "ising" else "c3"
    if coeff not in data:
        raise ConfigError(f"missing required field '{coeff}' for model '{opts['model']}'", coeff)
    opts[coeff] = _number(opts[coeff], coeff, positive=(coeff == "c6"))
    if coeff == "c3" and opts["c3"] == 0:
        raise ConfigError("field 'c3' must be non-zero", "c3")

    if "register" in data:
        opts["register"] = data["register"]
    elif "register_ref" in data:
        ref = Path(data["register_ref"])
        if not ref.is_absolute() and base_dir is not None:
            ref = Path(base_dir) / ref
        cfg.inputs["register"] = str(ref)
        opts["register_ref"] = str(data["register_ref"])
    else:
        raise ConfigError("missing required field 'register_ref' (or inline 'register')", "register_ref")

    channels = data.get("channels", {})
    if not isinstance(channels, dict):
        raise ConfigError("field 'channels' must be an object", "channels")
    for key in sorted(set(channels) - set(CHANNELS)):
        msg = f"unknown channel 'channels.{key}' ignored"
        cfg.warnings.append(msg)
        warnings.warn(msg, stacklevel=2)
    norm = {}
    for name in CHANNELS:
        norm[name] = _channel(channels.get(name, [[0.0, 0.0]]), name, opts["duration"])
    if any(v != 0 for _, v in norm["phase"]):
        raise ConfigError("field 'channels.phase' must be zero: the Ising/XY models carry no drive phase", "channels.phase")
    opts["channels"] = norm
    cfg.options = opts
    return cfg


def _waveform(samples, interpolation, duration):
    from .hamiltonian import Waveform

    if len(samples) == 1:
        return Waveform.constant(samples[0][1], 0.0, duration)
    t, v = zip(*samples)
    return Waveform(interpolation, t, v)


def build_spec(cfg: RunConfig):
    from .hamiltonian import IsingSpec, XYSpec
    from .register import Register

    o = cfg.options
    if "register" in o:
        reg = Register.from_json(json.dumps(o["register"]))
    else:
        reg = Register.load(cfg.inputs["register"])
    omega = _waveform(o["channels"]["omega"], o["interpolation"], o["duration"])
    delta = _waveform(o["channels"]["delta"], o["interpolation"], o["duration"])
    if o["model"] == "ising":
        return IsingSpec(reg, omega, delta, o["c6"])
    return XYSpec(reg, omega, delta, o["c3"])


def _write_csv(path, header_lines, columns, rows):
    lines = [f"# {h}" for h in header_lines]
    lines.append(",".join(columns))
    lines.extend(",".join(str(x) for x in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def _write_json(path, cfg: RunConfig, payload: dict):
    doc = {"provenance": cfg.provenance(), **payload}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get(THREADS_ENV, "1") or 1))


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


# -- subcommands ----------------------------------------------------------


def cmd_assemble(args) -> int:
    from .assembly import assembly_cycle
    from .register import Register

    reg = Register.load(args.register)
    target_doc = json.loads(Path(args.target).read_text())
    target = target_doc.get("target") if isinstance(target_doc, dict) else target_doc
    if not isinstance(target, list):
        raise ConfigError("target file must hold a list of site indices", "target")
    cfg = RunConfig(
        "assemble",
        inputs={"register": args.register, "target": args.target},
        options={"p_fill": args.p_fill, "p_success": args.p_success, "trials": args.trials, "max_retries": args.max_retries},
        seed=args.seed,
        output=args.out,
    )
    seeds = np.random.SeedSequence(args.seed).spawn(args.trials)

    def trial(k):
        try:
            r = assembly_cycle(reg, target, args.p_fill, args.p_success, args.max_retries, seeds[k])
            return (k, r.attempts, r.moves_used, 1)
        except AssemblyFailed as exc:
            return (k, exc.attempts, exc.moves_used, 0)

    rows = _map(trial, range(args.trials), _threads(args))
    _write_csv(args.out, cfg.header_lines(), ["trial", "attempts", "moves", "success"], rows)
    ok = sum(r[3] for r in rows)
    print(f"assembled {ok}/{args.trials} trials -> {args.out}")
    return 0


def cmd_evolve(args) -> int:
    from .hamiltonian import evolve
    from .statevec import ReadoutModel, bitstrings, new_state, sample

    if args.shots is not None and args.seed is None:
        raise _Usage("--seed is required when --shots is given")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cfg = validate_config(args.seq)
    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)
    cfg.seed = args.seed
    cfg.output = args.out
    spec = build_spec(cfg)
    o = cfg.options
    psi = evolve(new_state([2] * len(spec.register)), spec, 0.0, o["duration"], dt_max=o["dt_max"], tol=o["tol"])
    if args.shots is not None:
        cfg.options = {**o, "shots": args.shots, "readout": [args.p_dark_given_bright, args.p_bright_given_dark]}
        model = ReadoutModel(args.p_dark_given_bright, args.p_bright_given_dark)
        counts = sample(psi, args.shots, model, args.seed)
        _write_csv(args.out, cfg.header_lines(), ["bitstring", "count"], sorted(counts.items()))
    else:
        n = psi.n_atoms
        rows = [
            (i, b, _fmt(a.real), _fmt(a.imag), _fmt(abs(a) ** 2))
            for i, (b, a) in enumerate(zip(bitstrings(range(psi.amplitudes.size), n), psi.amplitudes))
        ]
        _write_csv(args.out, cfg.header_lines(), ["index", "bitstring", "real", "imag", "probability"], rows)
    print(f"evolved {len(spec.register)} atoms for {o['duration']} us -> {args.out}")
    return 0


def cmd_run_circuit(args) -> int:
    from .gates import Circuit, run_circuit
    from .statevec import ReadoutModel, new_state, sample

    circuit = Circuit.load(args.circuit, args.qubits)
    n = circuit.width
    cfg = RunConfig(
        "run-circuit",
        inputs={"circuit": args.circuit},
        options={"shots": args.shots, "qubits": n, "readout": [args.p_dark_given_bright, args.p_bright_given_dark]},
        seed=args.seed,
        output=args.out,
    )
    psi = run_circuit(circuit, new_state([2] * n))
    counts = sample(psi, args.shots, ReadoutModel(args.p_dark_given_bright, args.p_bright_given_dark), args.seed)
    _write_csv(args.out, cfg.header_lines(), ["bitstring", "count"], sorted(counts.items()))
    print(f"ran {len(circuit)} gates on {n} qubits, {args.shots} shots -> {args.out}")
    return 0


def parse_gate_counts(text: str, step: int) -> list[int]:
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            if lo < 1 or hi < lo or step < 1:
                raise ValueError
            return list(range(lo, hi + 1, step))
        values = [int(x) for x in text.split(",") if x]
    except ValueError:
        raise _Usage(f"cannot parse gate counts {text!r}; use 'A..B' or 'A,B,C'") from None
    if not values or min(values) < 1:
        raise _Usage("gate counts must be positive")
    return values


def cmd_route_bench(args) -> int:
    from .routing import LAYOUT_KINDS, benchmark

    layouts = [x.strip() for x in args.layouts.split(",") if x.strip()]
    bad = [x for x in layouts if x not in LAYOUT_KINDS]
    if bad or not layouts:
        raise _Usage(f"unknown layouts {bad}; choose from {','.join(LAYOUT_KINDS)}")
    sizes = parse_gate_counts(args.gates, args.gate_step)
    cfg = RunConfig(
        "route-bench",
        options={"layouts": layouts, "qubits": args.qubits, "gates": sizes, "circuits": args.circuits, "radius": args.radius, "swap_cost": 3},
        seed=args.seed,
        output=args.out,
    )
    rows = benchmark(layouts, args.qubits, sizes, args.circuits, args.seed, args.radius, _threads(args))
    _write_csv(
        args.out,
        cfg.header_lines(),
        ["layout", "n_gates", "mean_overhead", "std"],
        [(r.layout, r.n_gates, _fmt(r.mean_overhead), _fmt(r.std)) for r in rows],
    )
    print(f"routed {args.circuits} circuits x {len(sizes)} sizes x {len(layouts)} layouts -> {args.out}")
    return 0


def cmd_mis_solve(args) -> int:
    from .register import Register
    from .variational import (
        MAX_BRUTE_FORCE,
        MISInstance,
        NelderMeadConfig,
        VariationalProblem,
        brute_force_mis,
        optimize,
    )

    reg = Register.load(args.register)
    inst = MISInstance.from_register(reg, args.radius)
    prob = VariationalProblem(
        inst, layers=args.layers, c6=args.c6, shots=args.shots, omega_max=args.omega_max, delta_max=args.delta_max
    )
    cfg = RunConfig(
        "mis-solve",
        inputs={"register": args.register},
        options={
            "radius": args.radius, "layers": args.layers, "shots": args.shots, "restarts": args.restarts,
            "maxfev": args.maxfev, "c6": prob.c6, "omega_max": args.omega_max, "delta_max": args.delta_max,
        },
        seed=args.seed,
        output=args.out,
    )
    res = optimize(prob, NelderMeadConfig(maxfev=args.maxfev), restarts=args.restarts, seed=args.seed)
    n = inst.n_vertices
    best = res.best_sample
    payload = {
        "n_vertices": n,
        "edges": [list(e) for e in inst.graph.sorted_edges()],
        "best_bitstring": best.bitstring(n) if best else None,
        "size": best.size if best else 0,
        "independent": bool(best.independent) if best else False,
        "best_params": [float(x) for x in res.best_params],
        "best_cost": float(res.best_cost),
        "converged": res.converged,
        "evaluations": res.evaluations,
    }
    if n <= MAX_BRUTE_FORCE:
        bf = brute_force_mis(inst.graph)
        payload["brute_force"] = {"size": bf.size, "sets": [list(s) for s in bf.sets]}
    _write_json(args.out, cfg, payload)
    print(f"best independent set size {payload['size']} -> {args.out}")
    return 0


def cmd_jw_check(args) -> int:
    from .fermion import check_anticommutation, free_fermion_spectrum, hopping_terms, map_hamiltonian

    cfg = RunConfig("jw-check", options={"sites": args.sites, "hopping": args.hopping}, output=args.out)
    rep = check_anticommutation(args.sites)
    neg = check_anticommutation(args.sites, stringed=False) if args.sites > 1 else None
    n = args.sites
    hops = [(i, i + 1, args.hopping) for i in range(n - 1)]
    payload = {
        "sites": n,
        "max_deviation": rep.max_deviation,
        "passed": rep.ok,
        "negative_control_deviation": neg.max_deviation if neg else None,
    }
    if hops:
        pauli = map_hamiltonian(hopping_terms(hops), n)
        h = np.zeros((n, n))
        for i, j, t in hops:
            h[i, j] = h[j, i] = t
        spectrum = np.sort(np.linalg.eigvalsh(pauli.to_matrix()))
        payload["hopping_spectrum_error"] = float(np.abs(spectrum - free_fermion_spectrum(h)).max())
        if args.pauli_out:
            header = "".join(f"# {line}\n" for line in cfg.header_lines())
            Path(args.pauli_out).write_text(header + pauli.to_text())
    _write_json(args.out, cfg, payload)
    print(f"max anticommutation deviation {rep.max_deviation:.3e} -> {args.out}")
    return 0 if rep.ok else 1


# -- parser ---------------------------------------------------------------


class _Usage(Exception):
    pass


def _probability(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("probability must lie in [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emu", description="Pulse-level emulator of a neutral-atom quantum processor.")
    p.add_argument("--version", action="version", version=f"rydsim {__version__}")
    p.add_argument("--threads", type=int, default=None, help=f"worker thread cap (default: ${THREADS_ENV} or 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    a = sub.add_parser("assemble", help="Monte-Carlo loading and rearrangement statistics")
    a.add_argument("--register", required=True, help="register JSON ([[x,y,z], ...] in um)")
    a.add_argument("--target", required=True, help="JSON list of target site indices")
    a.add_argument("--p-fill", type=_probability, default=0.5)
    a.add_argument("--p-success", type=_probability, default=0.99)
    a.add_argument("--trials", type=int, default=100)
    a.add_argument("--max-retries", type=int, default=10)
    a.add_argument("--seed", type=int, required=True)
    a.add_argument("--out", required=True, help="CSV: trial,attempts,moves,success")
    a.set_defaults(func=cmd_assemble)

    e = sub.add_parser("evolve", help="integrate an Ising/XY pulse sequence")
    e.add_argument("--seq", required=True, help="sequence JSON file")
    e.add_argument("--out", required=True, help="amplitudes CSV, or samples CSV with --shots")
    e.add_argument("--shots", type=int, default=None)
    e.add_argument("--seed", type=int, default=None, help="required with --shots")
    e.add_argument("--p-dark-given-bright", type=_probability, default=0.014)
    e.add_argument("--p-bright-given-dark", type=_probability, default=0.014)
    e.set_defaults(func=cmd_evolve)

    c = sub.add_parser("run-circuit", help="execute a gate circuit and sample it")
    c.add_argument("--circuit", required=True, help="circuit JSON file")
    c.add_argument("--shots", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out", default="samples.csv", help="CSV: bitstring,count")
    c.add_argument("--qubits", type=int, default=None, help="register width (default: highest index + 1)")
    c.add_argument("--p-dark-given-bright", type=_probability, default=0.014)
    c.add_argument("--p-bright-given-dark", type=_probability, default=0.014)
    c.set_defaults(func=cmd_run_circuit)

    r = sub.add_parser("route-bench", help="SWAP-overhead benchmark across connectivity layouts")
    r.add_argument("--layouts", default="nn2d,disk2d,disk3d")
    r.add_argument("--qubits", type=int, default=16)
    r.add_argument("--gates", default="50..500", help="'A..B' (with --gate-step) or 'A,B,C'")
    r.add_argument("--gate-step", type=int, default=50)
    r.add_argument("--circuits", type=int, default=64)
    r.add_argument("--radius", type=float, default=2.3, help="interaction radius in lattice units")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out", default="overhead.csv", help="CSV: layout,n_gates,mean_overhead,std")
    r.set_defaults(func=cmd_route_bench)

    m = sub.add_parser("mis-solve", help="variational MIS on the register's unit-disk graph")
    m.add_argument("--register", required=True)
    m.add_argument("--radius", type=float, required=True)
    m.add_argument("--layers", type=int, default=2)
    m.add_argument("--shots", type=int, default=500)
    m.add_argument("--restarts", type=int, default=10)
    m.add_argument("--maxfev", type=int, default=40, help="objective evaluations per restart")
    m.add_argument("--c6", type=float, default=None, help="default: omega_max * radius**6")
    m.add_argument("--omega-max", type=float, default=2 * math.pi)
    m.add_argument("--delta-max", type=float, default=2 * math.pi)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--out", default="result.json")
    m.set_defaults(func=cmd_mis_solve)

    j = sub.add_parser("jw-check", help="Jordan-Wigner anticommutation and hopping-spectrum check")
    j.add_argument("--sites", type=int, default=4)
    j.add_argument("--hopping", type=float, default=-1.0, help="nearest-neighbour hopping amplitude")
    j.add_argument("--out", default="jw_report.json")
    j.add_argument("--pauli-out", default=None, help="write the mapped hopping Hamiltonian as Pauli text")
    j.set_defaults(func=cmd_jw_check)
    return p


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"emu {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"emu {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2
    except (EmulatorError, OSError, json.JSONDecodeError) as exc:
        print(f"emu {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
