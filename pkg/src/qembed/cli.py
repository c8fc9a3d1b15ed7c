"""Command-line scenario runner.

Usage::

    qembed list
    qembed run <scenario> [--flags] [--config FILE] [--seed N] [--out PATH] [--format json|csv]
    qembed run --scenario <scenario> ...

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy

from . import bitquantum as bq
from . import continuum as cont
from . import gates as gt
from . import measurement as ms
from . import opensystem as osys
from . import oscillator as osc
from .errors import NumericalError, QembedError
from .quantum_core import random_density_matrix

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# Stable serialization


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise NumericalError(f"non-finite value {x} in output")
    s = format(x + 0.0, ".17g")
    if "e" not in s and "." not in s and "inf" not in s:
        s += ".0"
    return s


def _plain(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    return obj


def dumps_json(obj) -> str:
    """JSON with sorted keys and floats written with 17 significant digits."""

    def enc(o) -> str:
        if o is None or isinstance(o, bool):
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt_float(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            items = sorted(o.items())
            return "{" + ", ".join(f"{json.dumps(k)}: {enc(v)}" for k, v in items) + "}"
        if isinstance(o, list):
            return "[" + ", ".join(enc(v) for v in o) + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(_plain(obj)) + "\n"


def dumps_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for c in columns:
            v = _plain(row[c])
            cells.append(_fmt_float(float(v)) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Scenario registry


@dataclass
class Param:
    name: str
    kind: type
    default: Any
    help: str
    choices: tuple | None = None


@dataclass
class Result:
    data: dict
    columns: tuple[str, ...] | None = None
    rows: list[dict] = field(default_factory=list)


@dataclass
class Scenario:
    name: str
    doc: str
    params: list[Param]
    func: Callable[..., Result]
    stochastic: bool = False


SCENARIOS: dict[str, Scenario] = {}


def scenario(name: str, doc: str, params: list[Param], stochastic: bool = False):
    def deco(func):
        SCENARIOS[name] = Scenario(name, doc, params, func, stochastic)
        return func

    return deco


def _floats(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def _threads() -> int:
    raw = os.environ.get("QEMBED_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"QEMBED_THREADS must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------------------
# Scenarios


@scenario(
    "clock",
    "Rotating quantum clock: spin expectations versus pointer angle over time.",
    [
        Param("beta0", float, 0.0, "initial pointer angle"),
        Param("omega", float, 1.0, "angular frequency"),
        Param("tmax", float, 2 * math.pi, "final time"),
        Param("dt", float, math.pi / 4, "output time step"),
        Param("psi_list", str, "0,0.7853981633974483,1.5707963267948966", "comma-separated spin angles"),
    ],
)
def _clock(beta0, omega, tmax, dt, psi_list, seed=None):
    if dt <= 0:
        raise ConfigError("dt must be positive")
    psis = _floats(psi_list)
    rows = []
    worst = worst_u = 0.0
    state0 = cont.ClockState(beta0, omega)
    for t in np.arange(0.0, tmax + 0.5 * dt, dt):
        st = cont.clock_evolve(state0, float(t))
        u = cont.clock_unitary(float(t), omega)
        worst_u = max(worst_u, float(np.abs(u @ state0.density_matrix() @ u.conj().T - st.density_matrix()).max()))
        for psi in psis:
            val = cont.clock_expectation(st, psi)
            worst = max(worst, abs(val - math.cos(psi - st.beta)))
            rows.append({"t": float(t), "psi": psi, "expectation": val})
    data = {"max_error_vs_cosine": worst, "max_unitary_mismatch": worst_u, "samples": rows}
    return Result(data, ("t", "psi", "expectation"), rows)


@scenario(
    "sphere",
    "Spin in an arbitrary direction for the sphere model, by quadrature or sampling.",
    [
        Param("rho", str, "0,0,1", "Bloch direction"),
        Param("e", str, "1,0,0", "spin direction"),
        Param("profile", str, "gaussian", "radial profile", cont.RADIAL_PROFILES),
        Param("method", str, "quadrature", "integration method", ("quadrature", "monte_carlo")),
        Param("n", int, 100000, "Monte-Carlo samples"),
    ],
)
def _sphere(rho, e, profile, method, n, seed=None):
    r = np.array(_floats(rho))
    ev = np.array(_floats(e))
    r, ev = r / np.linalg.norm(r), ev / np.linalg.norm(ev)
    if method == "monte_carlo" and seed is None:
        raise ConfigError("monte_carlo needs --seed")
    est = cont.sphere_expectation(cont.SphereState(tuple(r), profile), ev, method, n, seed or 0)
    return Result({"value": est.value, "stderr": est.stderr, "expected": float(r @ ev), "method": method})


@scenario(
    "qubit-chain",
    "Three-spin automaton updates against one-qubit gates on random distributions.",
    [Param("samples", int, 200, "number of random distributions"), Param("length", int, 20, "sequence length")],
    stochastic=True,
)
def _qubit_chain(samples, length, seed):
    r = gt.qubit_chain_check(samples, length, seed)
    return Result(
        {"max_matrix_error": r.max_matrix_error, "max_purity_error": r.max_purity_error, "samples": samples, "length": length}
    )


@scenario(
    "gates",
    "Gate realizability under a bit-quantum map and its effective Hamiltonian.",
    [
        Param("gate", str, "CNOT", "gate name"),
        Param("map", str, "average_spin", "bit-quantum map", ("one_qubit", "correlation_Q2", "average_spin")),
        Param("eps", float, 1.0, "time step for the Hamiltonian"),
    ],
)
def _gates(gate, map, eps, seed=None):
    try:
        spec = gt.gate(gate)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    real = gt.automaton_realization(gate, map)
    h = gt.effective_hamiltonian(spec.unitary, eps)
    data = {
        "gate": gate,
        "map": map,
        "realizable": bool(real),
        "hamiltonian_eigenvalues": sorted(np.linalg.eigvalsh(h.H).tolist()),
        "branch_ambiguous": h.branch_ambiguous,
    }
    if not real:
        data["reason"] = real.reason
    elif real.spin_rule is not None:
        data["spin_table"] = {k: [s, w] for k, (s, w) in gt.average_spin_table(gate).items()}
    else:
        data["configuration_map"] = real.step.perm.tolist()
    return Result(data)


@scenario(
    "learner",
    "Linear bottleneck network learning a two-qubit gate; loss curve per epoch.",
    [
        Param("gate", str, "CNOT", "two-qubit gate"),
        Param("m", int, 15, "bottleneck width"),
        Param("n_train", int, 256, "training samples"),
        Param("epochs", int, 3000, "epochs"),
        Param("lr", float, 0.2, "learning rate"),
    ],
    stochastic=True,
)
def _learner(gate, m, n_train, epochs, lr, seed):
    r = gt.train_bottleneck(gate, gt.LearnerConfig(m=m, n_train=n_train, epochs=epochs, learning_rate=lr, seed=seed))
    rows = [{"epoch": e, "loss": l} for e, l in r.loss_curve]
    data = {"final_loss": r.final_loss, "test_loss": r.test_loss, "oracle_floor": r.oracle_floor, "loss_curve": rows}
    return Result(data, ("epoch", "loss"), rows)


@scenario(
    "completeness",
    "Solve for classical distributions realizing random density matrices.",
    [
        Param("map", str, "correlation_Q2", "bit-quantum map", ("correlation_Q2", "correlation_Q3", "one_qubit")),
        Param("n", int, 100, "number of random targets"),
        Param("restarts", int, 8, "restarts per target"),
    ],
    stochastic=True,
)
def _completeness(map, n, restarts, seed):
    bqm = bq.get_map(map)
    dim = 2**bqm.q
    ss = np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.Philox(ss.spawn(1)[0]))
    targets = [random_density_matrix(rng, dim) for _ in range(n)]
    seeds = ss.generate_state(n)
    fids = []
    for t, s in zip(targets, seeds):
        r = bq.solve_distribution(t, map, restarts=restarts, seed=int(s), workers=_threads())
        fids.append(r.fidelity)
    success = sum(f >= bq.REALIZED_FIDELITY for f in fids)
    return Result({"map": map, "n": n, "success": int(success), "min_fidelity": min(fids) if fids else None})


@scenario(
    "ghz",
    "Search for a distribution realizing the three-qubit GHZ state under the correlation map.",
    [Param("restarts", int, 50, "solver restarts")],
    stochastic=True,
)
def _ghz(restarts, seed):
    target = bq.ghz(3)
    r = bq.solve_distribution(target, "correlation_Q3", restarts=restarts, seed=seed, stop_on_success=False)
    psi = np.zeros(8)
    psi[0] = psi[-1] = 1 / math.sqrt(2)
    bound = bq.max_pure_overlap(psi, "correlation_Q3")
    return Result(
        {
            "best_fidelity": r.fidelity,
            "realized": r.converged,
            "overlap_bound": bound,
            "gap": 1 - bound,
            "restarts": r.restarts_used,
        }
    )


_CHSH_MODES = {
    "classical": "classical_distribution",
    "cartesian": "cartesian_quantum",
    "pairwise": "pairwise_bound",
    "arbitrary": "arbitrary_directions",
}


@scenario(
    "chsh",
    "CHSH combinations for classical distributions and quantum states.",
    [
        Param("state", str, "singlet", "two-qubit state", ("singlet", "random")),
        Param("mode", str, "arbitrary", "evaluator", tuple(_CHSH_MODES)),
        Param("optimize", bool, False, "optimize directions (arbitrary mode)"),
        Param("directions", str, "", "12 numbers: a, a', b, b' (arbitrary mode)"),
        Param("delta", float, 0.0, "family parameter for the classical distribution"),
    ],
)
def _chsh(state, mode, optimize, directions, delta, seed=None):
    full = _CHSH_MODES[mode]
    if full == "classical_distribution":
        res = ms.chsh(full, p=bq.entangled_family(delta))
    else:
        if state == "random":
            if seed is None:
                raise ConfigError("state=random needs --seed")
            rho = random_density_matrix(np.random.Generator(np.random.Philox(seed)), 4)
        else:
            rho = bq.singlet()
        if full == "arbitrary_directions":
            if optimize:
                res = ms.chsh(full, rho=rho, optimize=True, seed=seed or 0)
            else:
                vals = _floats(directions)
                if len(vals) != 12:
                    raise ConfigError("directions needs 12 numbers unless --optimize is given")
                res = ms.chsh(full, rho=rho, directions=np.array(vals).reshape(4, 3))
        else:
            res = ms.chsh(full, rho=rho)
    return Result({"mode": res.mode, "value": res.value, "bound": res.bound, "violated": res.violated, "detail": res.detail})


@scenario("kochen-specker", "Three-qubit operator chains whose value assignments contradict.", [])
def _kochen_specker(seed=None):
    r = ms.kochen_specker_demo()
    return Result(
        {
            "chains_commute": r.chains_commute,
            "product_identity": r.product_identity,
            "q_plus_c_zero": r.q_plus_c_zero,
            "pair_identities": r.pair_identities,
            "sign_from_operators": r.sign_from_operators,
            "sign_from_values": r.sign_from_values,
            "contradiction": r.contradiction,
        }
    )


@scenario(
    "stern-gerlach",
    "Spin measured along z, x, z in sequence with coherent or decoherent rules.",
    [
        Param("mode", str, "coherent", "measurement rule", ("coherent", "decoherent")),
        Param("omega", float, 1.0, "precession frequency"),
    ],
)
def _stern_gerlach(mode, omega, seed=None):
    r = ms.stern_gerlach(mode, omega)
    rows = [{"outcome": k, "probability": v} for k, v in sorted(r["probabilities"].items())]
    return Result(r, ("outcome", "probability"), rows)


@scenario(
    "decoherence",
    "Qubit coupled to one environment qubit: purity and environment term along the evolution.",
    [
        Param("omega", float, 1.0, "coupling frequency"),
        Param("tmax", float, math.pi, "final time"),
        Param("dt", float, math.pi / 40, "output time step"),
        Param("initial", str, "product", "initial two-qubit state", ("product", "entangled")),
    ],
)
def _decoherence(omega, tmax, dt, initial, seed=None):
    if dt <= 0:
        raise ConfigError("dt must be positive")
    rho0 = osys.product_state() if initial == "product" else osys.entangled_state()
    times = np.arange(0.0, tmax + 0.5 * dt, dt)
    rows = osys.trajectory(rho0, times, omega)
    return Result({"omega": omega, "initial": initial, "trajectory": rows}, osys.TRAJECTORY_COLUMNS, rows)


@scenario(
    "oscillator",
    "Liouville evolution of a two-color phase-space wave built from a mode pair.",
    [
        Param("modes", str, "1,0", "mode pair n,n'"),
        Param("grid", int, 128, "grid points per axis"),
        Param("tmax", float, 2 * math.pi, "final time"),
    ],
)
def _oscillator(modes, grid, tmax, seed=None):
    vals = [int(x) for x in str(modes).split(",")]
    if len(vals) != 2:
        raise ConfigError("modes must be n,n'")
    pair = osc.ModePair(*vals)
    g = osc.PhaseGrid(grid, grid)
    w0 = osc.wave_from_modes(pair, g)
    w1 = osc.liouville_evolve(w0, tmax)
    expected = w0.amplitudes * np.exp(-1j * pair.frequency * tmax)
    err = float(np.linalg.norm(w1.amplitudes - expected) / np.linalg.norm(expected))
    data = {
        "pair": vals,
        "initial": osc.snapshot_summary(w0),
        "final": osc.snapshot_summary(w1),
        "relative_error_vs_phase": err,
    }
    zz, pp = g.mesh()
    rows = [
        {"z": float(z), "p": float(p), "re": float(a.real), "im": float(a.imag)}
        for z, p, a in zip(zz.ravel(), pp.ravel(), w1.amplitudes.ravel())
    ]
    return Result(data, ("z", "p", "re", "im"), rows)


# ---------------------------------------------------------------------------
# Argument handling


def _add_param(parser: argparse.ArgumentParser, p: Param):
    flag = "--" + p.name.replace("_", "-")
    if p.kind is bool:
        parser.add_argument(flag, dest=p.name, action="store_true", default=None, help=p.help)
    else:
        parser.add_argument(flag, dest=p.name, type=p.kind, default=None, choices=p.choices, help=f"{p.help} (default {p.default})")


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON file with parameters; flags override it")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--out", help="output file; a manifest is written next to it")
    parser.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qembed", description="Classical embeddings of qubits: scenario runner.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list scenarios")
    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("--scenario", dest="scenario_flag", choices=sorted(SCENARIOS), help="scenario name")
    _common(run)
    scen = run.add_subparsers(dest="scenario")
    for name in sorted(SCENARIOS):
        s = SCENARIOS[name]
        sp = scen.add_parser(name, help=s.doc, description=s.doc)
        for p in s.params:
            _add_param(sp, p)
        _common(sp)
    return parser


def resolve_config(s: Scenario, file_cfg: dict, flags: dict) -> dict:
    known = {p.name for p in s.params}
    unknown = set(file_cfg) - known - {"seed", "scenario"}
    if unknown:
        raise ConfigError(f"unknown keys for {s.name}: {sorted(unknown)}")
    cfg = {}
    for p in s.params:
        v = flags.get(p.name)
        if v is None:
            v = file_cfg.get(p.name, p.default)
        try:
            v = p.kind(v) if p.kind is not bool else bool(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{p.name}: cannot convert {v!r} to {p.kind.__name__}") from None
        if p.choices and v not in p.choices:
            raise ConfigError(f"{p.name} must be one of {p.choices}")
        cfg[p.name] = v
    return cfg


def _versions() -> dict:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"artifact": own, "numpy": np.__version__, "python": platform.python_version(), "scipy": scipy.__version__}


def run_scenario(name: str, cfg: dict, seed: int | None) -> Result:
    s = SCENARIOS[name]
    if s.stochastic and seed is None:
        raise ConfigError(f"scenario {name} is stochastic and needs --seed")
    return s.func(**cfg, seed=seed)


def render(result: Result, fmt: str) -> str:
    if fmt == "json":
        return dumps_json(result.data)
    if result.columns is None:
        raise ConfigError("this scenario has no tabular output; use --format json")
    return dumps_csv(result.columns, result.rows)


def _write_outputs(out: str, text: str, manifest: dict):
    path = Path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        manifest["outputs"] = {path.name: hashlib.sha256(text.encode()).hexdigest()}
        path.with_name(path.name + ".manifest.json").write_text(dumps_json(manifest))
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc}") from None


def _normalize_argv(argv: list[str]) -> list[str]:
    """Rewrite ``run --scenario NAME ...`` into ``run NAME ...``."""
    if not argv or argv[0] != "run" or (len(argv) > 1 and argv[1] in SCENARIOS):
        return argv
    rest = argv[1:]
    for i, tok in enumerate(rest):
        if tok == "--scenario" and i + 1 < len(rest) and rest[i + 1] in SCENARIOS:
            return ["run", rest[i + 1]] + rest[:i] + rest[i + 2 :]
        if tok.startswith("--scenario=") and tok.split("=", 1)[1] in SCENARIOS:
            return ["run", tok.split("=", 1)[1]] + rest[:i] + rest[i + 1 :]
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_normalize_argv(argv))
    if args.command == "list":
        for name in sorted(SCENARIOS):
            print(f"{name:16s} {SCENARIOS[name].doc}")
        return EXIT_OK
    name = args.scenario or args.scenario_flag
    if name is None:
        parser.error("run needs a scenario name")
    if args.scenario and args.scenario_flag and args.scenario != args.scenario_flag:
        parser.error("--scenario disagrees with the positional scenario")
    s = SCENARIOS[name]
    try:
        file_cfg = {}
        if args.config:
            try:
                file_cfg = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from None
            if not isinstance(file_cfg, dict):
                raise ConfigError("config file must hold a JSON object")
        flags = {p.name: getattr(args, p.name, None) for p in s.params}
        cfg = resolve_config(s, file_cfg, flags)
        seed = args.seed if args.seed is not None else file_cfg.get("seed")
        result = run_scenario(name, cfg, seed)
        text = render(result, args.format)
        if args.out:
            manifest = {"scenario": name, "config": cfg, "seed": seed, "format": args.format, "versions": _versions()}
            _write_outputs(args.out, text, manifest)
        else:
            sys.stdout.write(text)
    except ConfigError as exc:
        print(f"qembed: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"qembed: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (QembedError, KeyError) as exc:
        print(f"qembed: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
