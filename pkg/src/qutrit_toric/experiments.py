"""Braiding experiments: scripted anyon moves over defected codes.

A script is an ordered list of steps (prepare, insert defects, move
anyons, fuse, snapshot). The runner keeps an observable frame: every
face position maps to the operator currently representing it (plain or
transformed), plus named defect stabilizers. Anyon moves are solved at
run time as Weyl operators satisfying linear commutation constraints
against that frame: kill the excitation here, recreate it there, leave
everything else alone (nonlocal defect stabilizers are left free so
crossings can toggle them, which is the physics being demonstrated).

Shipped presets pin the geometries of the braiding and
topological-qutrit experiments; anyon paths are fixed up to topology
(which lines they cross and how they wind), not tied to any particular
drawn route.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Gate, Measure, CondGate
from .defects import (
    CCRibbon,
    DefectSpec,
    cc_defect_circuit,
    pf_defect_circuit,
    solve_weyl_op,
    weyl_gates,
)
from .estimators import PlaquetteSnapshot, snapshot_from_tableau
from .lattice import TorusLattice, ground_state_circuit
from .modmath import mod_inverse
from .tableau import StabilizerTableau
from .weyl import (
    WeylOp,
    compose,
    conjugate_through,
    cz,
    cz_dag,
    fourier,
    fourier_dag,
    symplectic_product,
)


# -- script steps --------------------------------------------------------------


@dataclass(frozen=True)
class Prepare:
    pass


@dataclass(frozen=True)
class InsertPF:
    site: tuple[int, int]
    species: str  # PF | PFstar


@dataclass(frozen=True)
class InsertCC:
    ribbon: CCRibbon


@dataclass(frozen=True)
class Move:
    """Solved anyon move: shift listed observables, keep the rest."""

    support: tuple[tuple[int, int], ...]
    changes: tuple[tuple[str, int], ...]  # (observable key, eigenvalue delta)
    free: tuple[str, ...] = ()
    label: str = ""


@dataclass(frozen=True)
class Fuse:
    defect_index: int


@dataclass(frozen=True)
class Snapshot:
    label: str


Step = Prepare | InsertPF | InsertCC | Move | Fuse | Snapshot


@dataclass
class Script:
    name: str
    lx: int
    ly: int
    steps: list[Step] = field(default_factory=list)


@dataclass
class Frame:
    label: str
    plaquettes: list[PlaquetteSnapshot]
    defects: list[PlaquetteSnapshot]

    def excited(self) -> dict[tuple[str, tuple[int, int]], tuple[float, ...]]:
        return {
            (r.kind, r.pos): r.triple for r in self.plaquettes if r.triple[0] != 1.0
        }


def face_key(kind: str, pos: tuple[int, int]) -> str:
    return f"{kind}@{pos[0]},{pos[1]}"


class ScriptRunner:
    """Executes a script on a tableau, emitting frames at snapshot steps."""

    def __init__(self, script: Script, seed: int = 0):
        self.script = script
        self.lattice = TorusLattice(script.lx, script.ly)
        self.seed = seed
        self.tab: StabilizerTableau | None = None
        self.observables: dict[str, WeylOp] = {}
        self.kinds: dict[str, tuple[str, tuple[int, int], bool]] = {}
        self.defect_specs: list[DefectSpec] = []
        self.frames: list[Frame] = []
        self._n_meas = 0

    # -- observable frame ------------------------------------------------------

    def _init_frame(self):
        lat = self.lattice
        self.observables = {}
        self.kinds = {}
        for p in lat.plaquettes:
            key = face_key(p.kind, p.pos)
            self.observables[key] = p.operator(lat.n_sites, lat.d)
            self.kinds[key] = (p.kind, p.pos, False)

    def _replace_face(self, pos, op, transformed=True):
        p = self.lattice.plaquette_at(*pos)
        key = face_key(p.kind, p.pos)
        self.observables[key] = op
        self.kinds[key] = (p.kind, p.pos, transformed)

    # -- execution ---------------------------------------------------------------

    def run(self) -> list[Frame]:
        rng = np.random.default_rng(self.seed)
        lat = self.lattice
        self.tab = StabilizerTableau(lat.d, lat.n_sites, rng)
        self.frames = []
        self.defect_specs = []
        self._init_frame()
        for step in self.script.steps:
            self._execute(step)
        return self.frames

    def _run_circuit(self, circ: Circuit):
        creg = getattr(self, "_creg", {})
        for ins in circ.instructions:
            if isinstance(ins, Gate):
                self.tab.apply_gate(ins.gate)
            elif isinstance(ins, Measure):
                creg[ins.creg] = self.tab.measure_weyl(ins.observable).value
            elif isinstance(ins, CondGate):
                for g in ins.predicate[creg[ins.creg]]:
                    self.tab.apply_gate(g)
        self._creg = creg

    def _execute(self, step: Step):
        lat = self.lattice
        if isinstance(step, Prepare):
            self._run_circuit(ground_state_circuit(lat))
        elif isinstance(step, InsertPF):
            circ, spec = pf_defect_circuit(lat, step.site, step.species, self._n_meas)
            self._n_meas += 1
            self._run_circuit(circ)
            idx = len(self.defect_specs)
            self.defect_specs.append(spec)
            for pos in spec.transformed:
                key = face_key(lat.plaquette_at(*pos).kind, pos)
                self.observables.pop(key, None)
                self.kinds.pop(key, None)
            self.observables[f"pf{idx}:west"] = spec.endpoint_stabilizers[0]
            self.kinds[f"pf{idx}:west"] = ("defect", step.site, True)
            self.observables[f"pf{idx}:east"] = spec.endpoint_stabilizers[1]
            self.kinds[f"pf{idx}:east"] = ("defect", step.site, True)
            self.observables[f"pf{idx}:nonlocal"] = spec.nonlocal_stabilizers[0]
            self.kinds[f"pf{idx}:nonlocal"] = ("defect", step.site, True)
            self.observables[f"pf{idx}:measured"] = spec.measured[0]
            self.kinds[f"pf{idx}:measured"] = ("defect", step.site, True)
        elif isinstance(step, InsertCC):
            circ, spec = cc_defect_circuit(lat, step.ribbon)
            self._run_circuit(circ)
            idx = len(self.defect_specs)
            self.defect_specs.append(spec)
            for pos, img in spec.transformed.items():
                if len(img.support) > 4:
                    p = lat.plaquette_at(*pos)
                    key = face_key(p.kind, pos)
                    self.observables.pop(key, None)
                    self.kinds.pop(key, None)
                    end_key = f"cc{idx}:{p.kind}-end"
                    self.observables[end_key] = img
                    self.kinds[end_key] = ("defect", pos, True)
                else:
                    self._replace_face(pos, img)
        elif isinstance(step, Fuse):
            spec = self.defect_specs[step.defect_index]
            circ, _ = cc_defect_circuit(lat, spec.ribbon)
            self._run_circuit(circ)
            # defects gone: faces return to their plain operators
            for pos in spec.transformed:
                self._replace_face(pos, lat.plaquette_at(*pos).operator(lat.n_sites, lat.d),
                                   transformed=False)
            self.observables.pop(f"cc{step.defect_index}:A-end", None)
            self.kinds.pop(f"cc{step.defect_index}:A-end", None)
            self.observables.pop(f"cc{step.defect_index}:B-end", None)
            self.kinds.pop(f"cc{step.defect_index}:B-end", None)
        elif isinstance(step, Move):
            op = self.solve_move(step)
            self.tab.apply_weyl(op)
        elif isinstance(step, Snapshot):
            self.frames.append(self._snapshot(step.label))

    def solve_move(self, step: Move) -> WeylOp:
        changed = {key for key, _ in step.changes}
        keep = [
            op
            for key, op in self.observables.items()
            if key not in changed and key not in step.free
        ]
        change = [(self.observables[key], delta) for key, delta in step.changes]
        op = solve_weyl_op(self.lattice, step.support, keep, change)
        if op is None:
            raise ValueError(f"move '{step.label}' is not realizable on its support")
        return op

    def _snapshot(self, label: str) -> Frame:
        plaq, defects = [], []
        for key, op in sorted(self.observables.items()):
            kind, pos, transformed = self.kinds[key]
            snap = snapshot_from_tableau(self.tab, op, kind, pos,
                                         transformed=transformed, label=key)
            if kind in ("A", "B"):
                plaq.append(snap)
            else:
                defects.append(snap)
        return Frame(label, plaq, defects)

    # -- compilation ---------------------------------------------------------------

    def to_circuit(self) -> Circuit:
        """Flatten the script to a plain circuit (moves become gate blocks)."""
        lat = self.lattice
        circ = Circuit(lat.d, lat.n_sites, 0)
        self._init_frame()
        self.defect_specs = []
        n_meas = 0
        for step in self.script.steps:
            if isinstance(step, Prepare):
                circ.extend(ground_state_circuit(lat))
            elif isinstance(step, InsertPF):
                frag, spec = pf_defect_circuit(lat, step.site, step.species, n_meas)
                n_meas += 1
                circ.n_cregs = max(circ.n_cregs, n_meas)
                circ.extend(frag)
                self.defect_specs.append(spec)
                idx = len(self.defect_specs) - 1
                for pos in spec.transformed:
                    self.observables.pop(face_key(lat.plaquette_at(*pos).kind, pos), None)
                self.observables[f"pf{idx}:west"] = spec.endpoint_stabilizers[0]
                self.observables[f"pf{idx}:east"] = spec.endpoint_stabilizers[1]
                self.observables[f"pf{idx}:nonlocal"] = spec.nonlocal_stabilizers[0]
                self.observables[f"pf{idx}:measured"] = spec.measured[0]
            elif isinstance(step, InsertCC):
                frag, spec = cc_defect_circuit(lat, step.ribbon)
                circ.extend(frag)
                self.defect_specs.append(spec)
                idx = len(self.defect_specs) - 1
                for pos, img in spec.transformed.items():
                    p = lat.plaquette_at(*pos)
                    if len(img.support) > 4:
                        self.observables.pop(face_key(p.kind, pos), None)
                        self.observables[f"cc{idx}:{p.kind}-end"] = img
                    else:
                        self.observables[face_key(p.kind, pos)] = img
            elif isinstance(step, Fuse):
                spec = self.defect_specs[step.defect_index]
                frag, _ = cc_defect_circuit(lat, spec.ribbon)
                circ.extend(frag)
            elif isinstance(step, Move):
                op = self.solve_move(step)
                circ.gates(weyl_gates(op))
        return circ


def run_braid(script: Script, seed: int = 0) -> tuple[list[Frame], ScriptRunner]:
    runner = ScriptRunner(script, seed)
    frames = runner.run()
    return frames, runner


# -- shipped braid presets -------------------------------------------------------


def pf_braid_script() -> Script:
    """Parafermion braid on 6x4: a charge crosses the defect line once,
    emerges as a flux, wraps the torus, and parks next to its partner,
    leaving the conjugate-charge/flux dyon."""
    s = Script("braid-pf", 6, 4)
    A, B = "A", "B"
    s.steps = [
        Prepare(),
        InsertPF((2, 1), "PF"),
        Snapshot("defect-inserted"),
        Move(((4, 3),), ((face_key(A, (4, 2)), 1), (face_key(A, (3, 3)), 2)),
             label="create-charge-pair"),
        Snapshot("pair-created"),
        Move(((4, 2),), ((face_key(A, (4, 2)), 2), (face_key(A, (3, 1)), 1)),
             label="drag-charge"),
        Snapshot("charge-at-line"),
        Move(tuple((x, y) for x in range(5) for y in range(4)),
             ((face_key(A, (3, 1)), 2), (face_key(B, (0, 1)), 1)),
             free=("pf0:nonlocal",), label="cross-line"),
        Snapshot("crossed-as-flux"),
        Move(((0, 1),), ((face_key(B, (0, 1)), 2), (face_key(B, (5, 0)), 1)),
             label="drag-flux-1"),
        Snapshot("flux-moving"),
        Move(((5, 0),), ((face_key(B, (5, 0)), 2), (face_key(B, (4, 3)), 1)),
             label="drag-flux-2"),
        Move(((4, 3),), ((face_key(B, (4, 3)), 2), (face_key(B, (3, 2)), 1)),
             label="drag-flux-3"),
        Snapshot("final"),
    ]
    return s


def cc_braid_script(fuse: bool = True) -> Script:
    """CC braid on 4x4: a conjugate flux crosses the line (argument flip),
    wraps, and fuses with its pinned partner, leaving one conjugate
    flux; optionally the defect pair is then fused to reveal the
    absorbed flux."""
    s = Script("braid-cc", 4, 4)
    lat = TorusLattice(4, 4)
    ribbon = CCRibbon.canonical(lat, (1, 1), 2)
    B = "B"
    s.steps = [
        Prepare(),
        InsertCC(ribbon),
        Snapshot("defect-inserted"),
        Move(((3, 1),), ((face_key(B, (2, 1)), 2), (face_key(B, (3, 0)), 1)),
             label="create-flux-pair"),
        Snapshot("pair-created"),
        Move(tuple((x, y) for x in range(4) for y in range(4)),
             ((face_key(B, (2, 1)), 1), (face_key(B, (1, 2)), 1)),
             free=("cc0:A-end", "cc0:B-end"), label="cross-line"),
        Snapshot("crossed-conjugated"),
        Move(((2, 3),), ((face_key(B, (1, 2)), 2), (face_key(B, (2, 3)), 1)),
             label="drag-1"),
        Snapshot("flux-moving"),
        Move(((3, 0),), ((face_key(B, (2, 3)), 2), (face_key(B, (3, 0)), 1)),
             label="fuse-with-partner"),
        Snapshot("fused"),
    ]
    if fuse:
        s.steps += [Fuse(0), Snapshot("defects-fused")]
    return s


def pf_pfstar_script() -> Script:
    """Two stacked parafermion lines of opposite species on 4x4: a
    conjugate flux crossing both lines in sequence net-conjugates, the
    composite acting like a single charge-conjugation line."""
    s = Script("fuse-pf-pfstar", 4, 4)
    A, B = "A", "B"
    s.steps = [
        Prepare(),
        InsertPF((1, 1), "PF"),
        InsertPF((1, 3), "PFstar"),
        Snapshot("defects-inserted"),
        Move(((3, 0),), ((face_key(B, (3, 0)), 2), (face_key(B, (2, 3)), 1)),
             label="create-flux-pair"),
        Snapshot("pair-created"),
        Move(tuple((x, y) for x in range(4) for y in range(4)),
             ((face_key(B, (3, 0)), 1), (face_key(A, (2, 2)), 1)),
             free=("pf0:nonlocal",), label="cross-line-1"),
        Snapshot("between-lines-as-charge"),
        Move(tuple((x, y) for x in range(4) for y in range(4)),
             ((face_key(A, (2, 2)), 2), (face_key(B, (2, 3)), 1)),
             free=("pf1:nonlocal",), label="cross-line-2-and-fuse"),
        Snapshot("fused"),
    ]
    return s


# -- topological qutrit protocol ----------------------------------------------------


@dataclass
class TopologicalQutritLayout:
    lattice: TorusLattice
    ribbons: tuple[CCRibbon, CCRibbon]
    connect_path: tuple[tuple[int, int], ...]  # plain-code charge path between
    # the two ribbon-start A-faces, conjugated into the braid loop


def topo_layout_6x2() -> TopologicalQutritLayout:
    lat = TorusLattice(6, 2)
    r1 = CCRibbon.canonical(lat, (1, 1), 1)
    r2 = CCRibbon.canonical(lat, (4, 0), 1)
    return TopologicalQutritLayout(lat, (r1, r2), ((1, 1), (2, 0), (3, 1)))


def topo_layout_6x4() -> TopologicalQutritLayout:
    lat = TorusLattice(6, 4)
    r1 = CCRibbon.canonical(lat, (1, 1), 2)
    r2 = CCRibbon.canonical(lat, (4, 3), 1)
    return TopologicalQutritLayout(lat, (r1, r2), ((1, 1), (2, 2), (3, 3)))


@dataclass
class TopologicalQutritResult:
    outcome: int
    braid_triple: tuple[float, float, float]      # sectors of the charge braid loop
    neutrality_triple: tuple[float, float, float]  # joint charge-neutrality reading
    end_pi1: tuple[float, float]                   # single-pair projector values
    flux_end_values: tuple[complex, complex]
    correlator_exponent: int


class TopologicalQutritProtocol:
    """Two CC pairs entangled through an ancilla-controlled charge braid.

    The braid loop is the Heisenberg image, through both ribbon
    unitaries, of a plain charge string connecting the two ribbon-start
    faces; it commutes with every local stabilizer and shifts only the
    internal charge states of the two pairs. An ancilla prepared by a
    Fourier gate controls powers of clock gates along the loop, a
    conjugate Fourier maps the entanglement back, and the ancilla
    measurement selects one of the three entangled fusion-channel
    states.
    """

    def __init__(self, layout: TopologicalQutritLayout):
        lat = layout.lattice
        self.layout = layout
        self.lattice = lat
        n, d = lat.n_sites, lat.d
        self.n_total = n + 1
        self.ancilla = n
        gates = []
        self.specs = []
        for ribbon in layout.ribbons:
            frag, spec = cc_defect_circuit(lat, ribbon)
            gates += [ins.gate for ins in frag.instructions if isinstance(ins, Gate)]
            self.specs.append(spec)
        self.cc_gates = gates
        # pre-image charge string between the two A-type endpoints
        pattern = {lat.site_index(*q): (0, 1) for q in layout.connect_path}
        raw = WeylOp.from_pattern(d, n, pattern)
        self.braid_loop = conjugate_through(gates, raw)
        if np.any(self.braid_loop.x):
            raise AssertionError("braid loop is not clock-type; bad layout")
        self.a_ends = tuple(spec.endpoint_stabilizers[0] for spec in self.specs)
        self.b_ends = tuple(spec.endpoint_stabilizers[1] for spec in self.specs)
        s1 = symplectic_product(self.braid_loop, self.a_ends[0])
        s2 = symplectic_product(self.braid_loop, self.a_ends[1])
        if s1 == 0 or s2 == 0:
            raise AssertionError("braid loop does not address both defect pairs")
        self.correlator_exponent = (-s1 * mod_inverse(s2, d)) % d
        self.neutrality_op = compose(self.a_ends[0],
                                     self.a_ends[1].power(self.correlator_exponent))

    def lift(self, w: WeylOp) -> WeylOp:
        return WeylOp(w.d, np.concatenate([w.x, [0]]), np.concatenate([w.z, [0]]), w.phase)

    def circuit(self) -> Circuit:
        lat = self.lattice
        circ = Circuit(lat.d, self.n_total, 1)
        for ins in ground_state_circuit(lat).instructions:
            circ.add(ins)
        for g in self.cc_gates:
            circ.gate(g)
        circ.gate(fourier(self.ancilla))
        for i in sorted(self.braid_loop.support):
            e = int(self.braid_loop.z[i])
            circ.gate(cz(self.ancilla, int(i)) if e == 1 else cz_dag(self.ancilla, int(i)))
        circ.gate(fourier_dag(self.ancilla))
        circ.barrier()
        circ.measure(WeylOp.from_site(lat.d, self.n_total, self.ancilla, 0, 1), 0)
        return circ

    def run(self, force_outcome: int | None = None, seed: int = 0) -> TopologicalQutritResult:
        circ = self.circuit()
        tab = StabilizerTableau(circ.d, circ.n_qudits, np.random.default_rng(seed))
        outcome = 0
        for ins in circ.instructions:
            if isinstance(ins, Gate):
                tab.apply_gate(ins.gate)
            elif isinstance(ins, Measure):
                outcome = tab.measure_weyl(ins.observable, force=force_outcome).value
        braid = self.lift(self.braid_loop)
        return TopologicalQutritResult(
            outcome=outcome,
            braid_triple=tab.projector_triple(braid),
            neutrality_triple=tab.projector_triple(self.lift(self.neutrality_op)),
            end_pi1=tuple(
                tab.projector_expectation(self.lift(a), 0) for a in self.a_ends
            ),
            flux_end_values=tuple(
                tab.expectation_weyl(self.lift(b)) for b in self.b_ends
            ),
            correlator_exponent=self.correlator_exponent,
        )

    def logical_shift_loop(self) -> WeylOp:
        """Flux loop around one defect pair: cycles the fusion-channel sectors.

        Derived as a shift-type loop that commutes with every local face
        but addresses the braid loop once.
        """
        lat = self.lattice
        keep = []
        locals_ = set()
        for spec in self.specs:
            locals_.update(pos for pos, img in spec.transformed.items()
                           if len(img.support) > 4)
        frame = {}
        for p in lat.plaquettes:
            frame[p.pos] = p.operator(lat.n_sites, lat.d)
        for spec in self.specs:
            for pos, img in spec.transformed.items():
                frame[pos] = img
        keep = [op for pos, op in frame.items() if pos not in locals_]
        keep += [self.b_ends[0], self.b_ends[1]]
        change = [(self.braid_loop, 1)]
        support = tuple((x, y) for x in range(lat.lx) for y in range(lat.ly))
        op = solve_weyl_op(lat, support, keep, change)
        if op is None:
            raise AssertionError("no logical shift loop exists; bad layout")
        return op


def braid_scripts() -> dict[str, Script]:
    return {
        "braid-pf": pf_braid_script(),
        "braid-cc": cc_braid_script(),
        "fuse-pf-pfstar": pf_pfstar_script(),
    }
