"""Command-line runner: ``qitesim {run,noise-run,depth,spectrum}``.

Settings come from an optional flat JSON config (``--config``); any flag
given on the command line overrides the config key of the same name.
Exit codes: 0 success, 2 invalid configuration, 3 numeric failure. Errors
are reported on stderr as a one-line JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import circuit, qite
from .hamiltonian import (
    Graph,
    Hamiltonian,
    bits_of,
    brute_force_spectrum,
    complete_graph,
    generate_graph,
    maxcut_hamiltonian,
    named_graph,
)
from .noise import MAX_DM_QUBITS, NoiseModel, NoiseModelError, replay
from .pools import DomainSizeError, DomainSpec, validate
from .statevec import CapacityError, NumericUnderflowError

log = logging.getLogger("qitesim")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


def _fmt(v: float) -> str:
    return repr(float(v))


def resolve_graph(spec: str, seed: int = 0) -> Graph:
    """``petersen``/``k4``/``c4``/``edge``, ``kind:n`` for generated graphs, or a file path."""
    name = spec.strip()
    if ":" in name:
        kind, _, n = name.partition(":")
        try:
            return generate_graph(kind, int(n), seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        return named_graph(name)
    except (KeyError, ValueError):
        pass
    path = Path(name)
    if not path.is_file():
        raise ConfigError(f"unknown graph {spec!r}: not a named graph, 'kind:n' or a readable file")
    try:
        return Graph.from_file(path)
    except ValueError as exc:
        raise ConfigError(f"bad graph file {path}: {exc}") from exc


@dataclass
class RunConfig:
    graph: str = "petersen"
    method: str = "NLA"
    domain_size: int | None = 2
    dtau: float = 0.01
    steps: int = 1000
    ridge: float = qite.DEFAULT_RIDGE
    compress: bool = False
    seed: int = 0
    out: str = "run_out"
    exact_exponential: bool = False
    reuse_gram: bool = False
    early_stop: float | None = None
    noise: dict | bool | None = None
    dump_pool: bool = False
    dump_circuit: bool = False

    @classmethod
    def from_sources(cls, config_path: str | None, overrides: dict) -> "RunConfig":
        data: dict = {}
        if config_path:
            try:
                data = json.loads(Path(config_path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config must be a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg._check()
        return cfg

    def _check(self) -> None:
        if not (isinstance(self.dtau, (int, float)) and self.dtau > 0):
            raise ConfigError("dtau must be positive")
        if not (isinstance(self.steps, int) and self.steps >= 1):
            raise ConfigError("steps must be an integer >= 1")
        if not self.ridge >= 0:
            raise ConfigError("ridge must be non-negative")
        if self.early_stop is not None and not self.early_stop > 0:
            raise ConfigError("early_stop must be positive")

    def noise_model(self) -> NoiseModel | None:
        if self.noise in (None, False):
            return None
        try:
            return NoiseModel() if self.noise is True else NoiseModel.from_mapping(self.noise)
        except (NoiseModelError, TypeError) as exc:
            raise ConfigError(f"invalid noise model: {exc}") from exc


def _spec_for(method: str, D: int | None, h: Hamiltonian) -> DomainSpec:
    try:
        spec = DomainSpec(method, D)
        validate(spec, h)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return spec


def _write_trajectory(traj: qite.Trajectory, out: Path) -> None:
    rows = ["tau,energy,r"] + [f"{_fmt(s.tau)},{_fmt(s.energy)},{_fmt(s.r)}" for s in traj.steps]
    (out / "trajectory.csv").write_text("\n".join(rows) + "\n")
    rows = ["tau,E_level,n"]
    for s in traj.steps:
        rows += [f"{_fmt(s.tau)},{_fmt(e)},{_fmt(n)}" for e, n in s.n_of_E]
    (out / "spectrum.csv").write_text("\n".join(rows) + "\n")


def cmd_run(cfg: RunConfig, *, force_noise: bool = False) -> int:
    g = resolve_graph(cfg.graph, cfg.seed)
    h = maxcut_hamiltonian(g)
    spec = _spec_for(cfg.method, cfg.domain_size, h)
    nm = cfg.noise_model()
    if force_noise and nm is None:
        nm = NoiseModel()
    if nm is not None and h.n_qubits > MAX_DM_QUBITS:
        raise ConfigError(f"noisy replay is limited to {MAX_DM_QUBITS} qubits, graph has {h.n_qubits}")
    if cfg.compress and spec.per_term:
        raise ConfigError(f"compression needs a shared pool; {spec.label} builds one pool per term")
    if cfg.exact_exponential and h.n_qubits > qite.EXACT_EXP_MAX_QUBITS:
        raise ConfigError(f"exact exponential mode is limited to {qite.EXACT_EXP_MAX_QUBITS} qubits")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    record = nm is not None or cfg.dump_circuit
    traj = qite.run(
        h, spec, cfg.dtau, cfg.steps, cfg.ridge, cfg.compress,
        keep_coefficients=False, record_program=record and not cfg.compress,
        early_stop_tol=cfg.early_stop, exact_exponential=cfg.exact_exponential, reuse_gram=cfg.reuse_gram,
    )
    _write_trajectory(traj, out)

    pool_sizes = sorted({len(p) for p in traj.pools})
    summary = {
        "graph": cfg.graph,
        "n_qubits": h.n_qubits,
        "n_terms": h.n_terms,
        "method": spec.label,
        "domain_size": spec.D,
        "dtau": cfg.dtau,
        "n_steps": traj.n_steps,
        "ridge": cfg.ridge,
        "compress": cfg.compress,
        "ground_energy": traj.ground_energy,
        "final_energy": traj.final_energy,
        "final_r": traj.final_r,
        "pool_sizes": pool_sizes,
        "blocks": [{"start": b.start_step, "end": b.end_step, "n_comp": b.n_comp} for b in traj.blocks],
        "residuals": [float(sum(s.residual for s in st.solves)) for st in traj.steps[1:]],
    }
    if record:
        circuits = circuit.trajectory_circuits(traj)
        summary["gate_count"] = sum(len(c) for c in circuits)
        summary["circuit_depth"] = sum(c.depth() for c in circuits)
        if cfg.dump_circuit:
            (out / "circuit.txt").write_text("".join(c.to_text() for c in circuits))
        if nm is not None:
            e_ideal, e_noisy = replay(circuits, h, nm)
            summary["noise"] = nm.to_dict()
            summary["noiseless_energy"] = e_ideal
            summary["noisy_energy"] = e_noisy
    if cfg.dump_pool:
        for m, pool in enumerate(traj.pools if spec.per_term else traj.pools[:1]):
            pool.dump(out / (f"pool_{m}.txt" if spec.per_term else "pool.txt"))
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    log.info("%s final E=%.6f r=%.4f", spec.label, traj.final_energy, traj.final_r)
    return EXIT_OK


def _int_list(text: str | None, name: str) -> list[int]:
    if text is None or not text.strip():
        raise ConfigError(f"{name} list is empty")
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad {name} list {text!r}") from exc


def cmd_depth(family: str, methods: list[str], Ds: list[int], Ns: list[int], seed: int, out: Path) -> int:
    """Resource table over graph sizes, methods and domain sizes.

    ``family`` is ``random_3_regular``, ``complete`` or ``complete_weighted``.
    Combinations that are undefined for a graph (e.g. LA at a mismatched D)
    are skipped with a log message.
    """
    if not Ns:
        raise ConfigError("N list is empty")
    if not methods:
        raise ConfigError("method list is empty")
    rows = []
    for n in Ns:
        if family == "complete":
            g = complete_graph(n)
        else:
            try:
                g = generate_graph(family, n, seed)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        h = maxcut_hamiltonian(g)
        for method in methods:
            for D in Ds or [None]:
                try:
                    spec = DomainSpec(method, D)
                    validate(spec, h)
                except ValueError as exc:
                    log.info("skip N=%d %s D=%s: %s", n, method, D, exc)
                    continue
                rows.append(circuit.step_resources(h, spec))
    if not rows:
        raise ConfigError("no valid (method, D, N) combination")
    out.mkdir(parents=True, exist_ok=True)
    circuit.write_resources(rows, out / "resources.csv")
    return EXIT_OK


def cmd_spectrum(graph: str, seed: int, out: Path) -> int:
    g = resolve_graph(graph, seed)
    h = maxcut_hamiltonian(g)
    try:
        spec = brute_force_spectrum(h)
    except (CapacityError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    out.mkdir(parents=True, exist_ok=True)
    rows = ["E,degeneracy"] + [f"{_fmt(e)},{d}" for e, d in spec.degeneracies()]
    (out / "levels.csv").write_text("\n".join(rows) + "\n")
    ground = int(spec.ground_states[0])
    bits = bits_of(ground, h.n_qubits)
    cut = {
        "ground_energy": spec.ground_energy,
        "n_ground_states": len(spec.ground_states),
        "bitstring": "".join(map(str, bits)),
        "side_a": [v for v, b in enumerate(bits) if b == 0],
        "side_b": [v for v, b in enumerate(bits) if b == 1],
        "cut_weight": -spec.ground_energy,
    }
    (out / "ground_cut.json").write_text(json.dumps(cut, indent=2) + "\n")
    print(f"E_GS={spec.ground_energy:g} degeneracy={len(spec.ground_states)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qitesim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def run_flags(sp):
        sp.add_argument("--config", help="flat JSON file of run settings")
        sp.add_argument("--graph", help="petersen, k4, c4, edge, kind:n or a graph file")
        sp.add_argument("--method", help="la, ela, nla or nla25")
        sp.add_argument("--domain-size", dest="domain_size", type=int)
        sp.add_argument("--dtau", type=float)
        sp.add_argument("--steps", type=int)
        sp.add_argument("--ridge", type=float)
        sp.add_argument("--compress", action="store_true", default=None)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--exact-exponential", dest="exact_exponential", action="store_true", default=None)
        sp.add_argument("--reuse-gram", dest="reuse_gram", action="store_true", default=None)
        sp.add_argument("--early-stop", dest="early_stop", type=float, help="stop after 50 steps with |dE| below this")
        sp.add_argument("--dump-pool", dest="dump_pool", action="store_true", default=None)
        sp.add_argument("--dump-circuit", dest="dump_circuit", action="store_true", default=None)

    run_flags(sub.add_parser("run", help="imaginary-time evolution run"))
    run_flags(sub.add_parser("noise-run", help="run, then replay its circuits with noise"))

    d = sub.add_parser("depth", help="gate count and depth per imaginary-time step")
    d.add_argument("--family", default="random_3_regular", choices=("random_3_regular", "complete", "complete_weighted"))
    d.add_argument("--methods", default="nla")
    d.add_argument("--domain-sizes", dest="domain_sizes", default="2")
    d.add_argument("--sizes", default="10")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", default="run_out")

    s = sub.add_parser("spectrum", help="exact spectrum and a maximum cut")
    s.add_argument("--graph", default="petersen")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="run_out")
    return p


_RUN_KEYS = (
    "graph", "method", "domain_size", "dtau", "steps", "ridge", "compress", "seed", "out",
    "exact_exponential", "reuse_gram", "early_stop", "dump_pool", "dump_circuit",
)


def _fail(code: int, kind: str, exc: BaseException) -> int:
    print(json.dumps({"error": str(exc), "kind": kind, "type": type(exc).__name__}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command in ("run", "noise-run"):
            cfg = RunConfig.from_sources(args.config, {k: getattr(args, k) for k in _RUN_KEYS})
            return cmd_run(cfg, force_noise=args.command == "noise-run")
        if args.command == "depth":
            methods = [m for m in args.methods.split(",") if m.strip()]
            Ds = _int_list(args.domain_sizes, "domain size") if args.domain_sizes.strip() else []
            return cmd_depth(args.family, methods, Ds, _int_list(args.sizes, "N"), args.seed, Path(args.out))
        return cmd_spectrum(args.graph, args.seed, Path(args.out))
    except (ConfigError, DomainSizeError, NoiseModelError, qite.UnsupportedMethodError) as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except (qite.SolverError, NumericUnderflowError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERIC, "numeric", exc)


if __name__ == "__main__":
    sys.exit(main())
