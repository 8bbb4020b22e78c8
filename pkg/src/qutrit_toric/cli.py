"""Command-line frontend: reproducible experiment runs with JSON output.

Subcommands: prepare, braid-pf, braid-cc, fuse-pf-pfstar, topo-qutrit,
compile, verify, bounds. Every run writes a JSON result document whose
content is a pure function of the configuration and seed (no
timestamps), so identical configurations produce byte-identical files.
Exit codes: 0 success, 2 configuration error, 3 internal invariant
failure.

Configuration precedence: command-line flags > --config file >
defaults. QUTRIT_TORIC_OUTDIR sets the default output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .analysis import ConfusionMatrix, energy_density, fidelity_bounds
from .circuit import run_shots
from .encoder import (
    decode_qubit_records,
    encode_circuit,
    herald_filter,
    simulate_readout,
    SUPPORTED_GATES,
    verify_decomposition,
    zz_budget,
)
from .estimators import estimate_plaquette_projectors, snapshot_from_tableau
from .experiments import (
    ScriptRunner,
    TopologicalQutritProtocol,
    braid_scripts,
    topo_layout_6x2,
    topo_layout_6x4,
)
from .lattice import build_lattice, ground_state_circuit, measure_all_circuit
from .serialize import (
    circuit_to_json,
    dumps,
    frames_to_json,
    result_document,
    script_to_json,
    snapshot_to_json,
    to_native_json,
)
from .tableau import StabilizerTableau
from .circuit import Gate as GateInstr

DEFAULT_SHOTS = 517  # max binomial standard error of a projector ~ 0.022


class ConfigError(Exception):
    pass


def _write_output(args, doc: dict, default_name: str) -> str:
    out = args.output
    if out is None:
        outdir = os.environ.get("QUTRIT_TORIC_OUTDIR", ".")
        out = os.path.join(outdir, default_name)
    text = dumps(to_native_json(doc))
    if out == "-":
        print(text)
        return "-"
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "w") as fh:
        fh.write(text + "\n")
    return out


def _csv_from_rows(path: str, header: list[str], rows: list[list]):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def _config_echo(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


# -- subcommands ----------------------------------------------------------------


def cmd_prepare(args) -> dict:
    lat = build_lattice(args.lx, args.ly)
    prep = ground_state_circuit(lat)
    payload: dict = {"lattice": [args.lx, args.ly]}
    if args.noise == "off" and args.shots == 0:
        tab = StabilizerTableau(lat.d, lat.n_sites, np.random.default_rng(args.seed))
        for ins in prep.instructions:
            if isinstance(ins, GateInstr):
                tab.apply_gate(ins.gate)
        snaps = [
            snapshot_from_tableau(tab, p.operator(lat.n_sites), p.kind, p.pos)
            for p in lat.plaquettes
        ]
        logi = {
            "z_horizontal": tab.projector_expectation(lat.logical_z_horizontal(0), 0),
            "z_vertical": tab.projector_expectation(lat.logical_z_vertical(0), 0),
            "x_horizontal": tab.projector_expectation(lat.logical_x_horizontal(0), 0),
            "x_vertical": tab.projector_expectation(lat.logical_x_vertical(0), 0),
        }
        payload["mode"] = "exact"
        payload["plaquettes"] = [snapshot_to_json(s) for s in snaps]
        payload["logical_projectors"] = logi
        payload["energy_density"] = energy_density(snaps, len(lat.plaquettes))
        return payload
    # shot-based (optionally noisy) run with encoded readout
    shots = args.shots or DEFAULT_SHOTS
    snaps_all = []
    herald = {}
    for basis in ("z", "x"):
        circ = prep.with_noise(p1=args.p1, p2=args.p2) if args.noise != "off" else \
            prep.with_noise()
        circ.extend(measure_all_circuit(lat, basis))
        batch = run_shots(circ, shots, base_seed=args.seed, parallelism=args.threads)
        if args.noise != "off":
            _, rep = encode_circuit(prep, basis=basis, optimization_level=1)
            qrecs = simulate_readout(batch, rep.per_qutrit_two_qubit,
                                     p01=args.spam_p01, p10=args.spam_p10,
                                     leak_per_two_qubit=args.leak, seed=args.seed + 1)
            if args.herald_discard:
                qrecs, herald[basis] = herald_filter(qrecs)
            records = decode_qubit_records(qrecs)
            records = [r for r in records if not r.herald_discard]
        else:
            records = batch.records
        snaps_all.extend(estimate_plaquette_projectors(records, basis, lat))
    payload["mode"] = "shots"
    payload["shots_per_basis"] = shots
    payload["plaquettes"] = [snapshot_to_json(s) for s in snaps_all]
    payload["energy_density"] = energy_density(snaps_all, len(lat.plaquettes))
    if herald:
        payload["herald_discard_fraction"] = herald
    return payload


def cmd_braid(args, name: str) -> dict:
    script = braid_scripts()[name]
    runner = ScriptRunner(script, seed=args.seed)
    frames = runner.run()
    doc = frames_to_json(frames)
    return {
        "preset": script.name,
        "lattice": [script.lx, script.ly],
        "script": script_to_json(script),
        "frames": doc["frames"],
    }


def cmd_topo(args) -> dict:
    layout = topo_layout_6x2() if (args.lx, args.ly) == (6, 2) else topo_layout_6x4()
    if (args.lx, args.ly) not in ((6, 2), (6, 4)):
        raise ConfigError("topological qutrit presets exist for 6x2 and 6x4")
    proto = TopologicalQutritProtocol(layout)
    rows = []
    for j in range(3):
        res = proto.run(force_outcome=j, seed=args.seed)
        bound = fidelity_bounds(res.braid_triple[j], res.neutrality_triple[0], 1)
        rows.append({
            "ancilla_outcome": j,
            "braid_triple": list(res.braid_triple),
            "neutrality_triple": list(res.neutrality_triple),
            "pair_projectors": list(res.end_pi1),
            "flux_endpoints": [[v.real, v.imag] for v in res.flux_end_values],
            "fidelity_bound": bound.as_dict(),
        })
    sampled = proto.run(seed=args.seed)
    return {
        "preset": f"topo-qutrit-{args.lx}x{args.ly}",
        "lattice": [args.lx, args.ly],
        "sampled_outcome": sampled.outcome,
        "per_outcome": rows,
    }


def cmd_compile(args) -> dict:
    if args.preset == "prepare":
        lat = build_lattice(args.lx, args.ly)
        circ = ground_state_circuit(lat)
    else:
        raise ConfigError(f"unknown compile preset {args.preset}")
    qc, report = encode_circuit(circ, basis=args.basis,
                                schedule_policy=args.policy,
                                optimization_level=args.optimization)
    payload = {
        "preset": f"{args.preset}-{args.lx}x{args.ly}",
        "report": report.to_dict(),
        "qutrit_circuit": circuit_to_json(circ),
    }
    if args.dump_ops:
        from .encoder import qubit_circuit_text, qubit_circuit_to_json

        payload["qubit_circuit"] = qubit_circuit_to_json(qc)
        payload["qubit_circuit_text"] = qubit_circuit_text(qc)
    return payload


def cmd_verify(args) -> dict:
    from .dense import DenseState, gate_matrix, weyl_matrix
    from .weyl import CliffordGate, GateKind, WeylOp, conjugate_by_gate
    from . import weyl as weyl_mod

    failures = []
    # conjugation tables against dense matrices
    for kind in sorted(k.value for k in GateKind):
        k = GateKind(kind)
        targets = (0,) if k in weyl_mod.ONE_QUDIT_KINDS else (0, 1)
        g = CliffordGate(k, targets)
        U = gate_matrix(k, 3)
        n = len(targets)
        for code in range(9**n):
            xe = [code % 3, (code // 9) % 3][:n]
            ze = [(code // 3) % 3, (code // 27) % 3][:n]
            w = WeylOp(3, xe, ze)
            img = conjugate_by_gate(g, w)
            err = np.abs(weyl_matrix(img) - U @ weyl_matrix(w) @ U.conj().T).max()
            if err > 1e-10:
                failures.append(f"conjugation {kind} on {w}")
    # decomposition suite
    decomp = {}
    for name in SUPPORTED_GATES:
        err = verify_decomposition(name)
        decomp[name] = {"error": err, "zzphase": zz_budget(name)}
        if err > 1e-10:
            failures.append(f"decomposition {name}: {err}")
    payload = {"conjugation_failures": failures, "decompositions": decomp,
               "passed": not failures}
    if failures:
        raise AssertionError("; ".join(failures))
    return payload


def cmd_bounds(args) -> dict:
    bound = fidelity_bounds(args.trp, args.trq, args.sites,
                            se_p=args.se_p, se_q=args.se_q)
    return {"bound": bound.as_dict(), "inputs_clamped": bound.inputs_clamped}


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qutrit-toric",
        description="Z3 toric code simulator: preparation, defects, braiding, "
                    "topological qutrits, native-gate compilation.",
    )
    parser.add_argument("--config", help="JSON config file (flags take precedence)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, lattice=True):
        if lattice:
            p.add_argument("--lx", type=int, default=6)
            p.add_argument("--ly", type=int, default=4)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--output", "-o", help="output path ('-' for stdout)")
        p.add_argument("--csv", help="also write a CSV table to this path")

    p = sub.add_parser("prepare", help="ground-state preparation experiment")
    common(p)
    p.add_argument("--shots", type=int, default=0,
                   help="0 = exact noiseless expectations")
    p.add_argument("--noise", choices=["off", "default"], default="off")
    p.add_argument("--p1", type=float, default=0.0)
    p.add_argument("--p2", type=float, default=2e-3)
    p.add_argument("--spam-p01", type=float, default=2.37e-3, dest="spam_p01")
    p.add_argument("--spam-p10", type=float, default=0.82e-3, dest="spam_p10")
    p.add_argument("--leak", type=float, default=2.5e-4,
                   help="leak probability per entangler per qubit")
    p.add_argument("--herald-discard", action="store_true", default=True)
    p.add_argument("--no-herald-discard", dest="herald_discard", action="store_false")

    for name in ("braid-pf", "braid-cc", "fuse-pf-pfstar"):
        p = sub.add_parser(name, help=f"{name} braiding preset (noiseless frames)")
        common(p, lattice=False)

    p = sub.add_parser("topo-qutrit", help="entangled defect-pair protocol")
    common(p)
    p.set_defaults(ly=2)

    p = sub.add_parser("compile", help="compile a preset to the native gate set")
    common(p)
    p.add_argument("--preset", default="prepare")
    p.add_argument("--basis", choices=["z", "x"], default="z")
    p.add_argument("--policy", default="asap",
                   choices=["asap", "plaquette-parallel", "gate-parallel"])
    p.add_argument("--optimization", type=int, default=1, choices=[0, 1])
    p.add_argument("--dump-ops", action="store_true")

    p = sub.add_parser("verify", help="oracle self-check suites")
    common(p, lattice=False)

    p = sub.add_parser("bounds", help="two-projector fidelity bound")
    common(p, lattice=False)
    p.add_argument("--trp", type=float, required=True)
    p.add_argument("--trq", type=float, required=True)
    p.add_argument("--sites", type=int, required=True)
    p.add_argument("--se-p", type=float, default=0.0, dest="se_p")
    p.add_argument("--se-q", type=float, default=0.0, dest="se_q")
    return parser


def _apply_config_file(args, argv):
    if not args.config:
        return args
    with open(args.config) as fh:
        conf = json.load(fh)
    defaults = {k.replace("-", "_"): v for k, v in conf.items()}
    explicit = {a.split("=")[0] for a in argv if a.startswith("--")}
    for key, value in defaults.items():
        flag = "--" + key.replace("_", "-")
        if hasattr(args, key) and flag not in explicit:
            setattr(args, key, value)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(argv)
        args = _apply_config_file(args, argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    name = args.subcommand
    try:
        if name == "prepare":
            payload = cmd_prepare(args)
        elif name in ("braid-pf", "braid-cc", "fuse-pf-pfstar"):
            payload = cmd_braid(args, name)
        elif name == "topo-qutrit":
            payload = cmd_topo(args)
        elif name == "compile":
            payload = cmd_compile(args)
        elif name == "verify":
            payload = cmd_verify(args)
        elif name == "bounds":
            payload = cmd_bounds(args)
        else:
            raise ConfigError(f"unknown subcommand {name}")
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return 3
    config_keys = ["lx", "ly", "seed", "shots", "noise", "p1", "p2", "trp", "trq",
                   "sites", "basis", "policy", "optimization", "preset", "threads",
                   "leak", "herald_discard"]
    doc = result_document(name, _config_echo(args, config_keys), payload)
    path = _write_output(args, doc, f"{name}-result.json")
    if getattr(args, "csv", None) and "plaquettes" in payload:
        rows = [
            [s["kind"], s["pos"][0], s["pos"][1], s["pi1"], s["pi_omega"],
             s["pi_omegabar"], s["arg_deg"]]
            for s in payload["plaquettes"]
        ]
        _csv_from_rows(args.csv, ["kind", "x", "y", "pi1", "pi_omega",
                                  "pi_omegabar", "arg_deg"], rows)
    elif getattr(args, "csv", None) and "per_outcome" in payload:
        rows = [
            [r["ancilla_outcome"], *r["braid_triple"], *r["neutrality_triple"],
             *r["pair_projectors"], r["fidelity_bound"]["lower"],
             r["fidelity_bound"]["upper"]]
            for r in payload["per_outcome"]
        ]
        _csv_from_rows(args.csv,
                       ["ancilla_outcome", "braid_pi1", "braid_pi_omega",
                        "braid_pi_omegabar", "neutral_pi1", "neutral_pi_omega",
                        "neutral_pi_omegabar", "pair1_pi1", "pair2_pi1",
                        "bound_lower", "bound_upper"], rows)
    if path != "-":
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
