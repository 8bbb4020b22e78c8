"""Plaquette projector estimation from shot records and from tableaus.

A snapshot records, per face, the projector triple (Pi^1, Pi^omega,
Pi^omega-bar), the complex stabilizer expectation, its argument in
degrees, and binomial standard errors when estimated from shots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import ShotRecord
from .lattice import Plaquette, TorusLattice
from .weyl import WeylOp


@dataclass(frozen=True)
class PlaquetteSnapshot:
    kind: str
    pos: tuple[int, int]
    triple: tuple[float, float, float]
    expectation: complex
    arg_deg: float
    std_errors: tuple[float, float, float] = (0.0, 0.0, 0.0)
    n_shots: int = 0
    transformed: bool = False
    label: str | None = None

    @property
    def pi1(self) -> float:
        return self.triple[0]


def _snapshot_from_triple(kind, pos, triple, n_shots=0, transformed=False, label=None):
    d = len(triple)
    omega = np.exp(2j * np.pi / d)
    expectation = sum(triple[k] * omega**k for k in range(d))
    arg = float(np.degrees(np.angle(expectation))) % 360.0 if abs(expectation) > 1e-12 else 0.0
    ses = tuple(
        float(np.sqrt(p * (1 - p) / n_shots)) if n_shots else 0.0 for p in triple
    )
    return PlaquetteSnapshot(kind, pos, tuple(float(p) for p in triple),
                             complex(expectation), arg, ses, n_shots, transformed, label)


def snapshot_from_tableau(tab, op: WeylOp, kind: str, pos, transformed=False,
                          label=None) -> PlaquetteSnapshot:
    return _snapshot_from_triple(kind, pos, tab.projector_triple(op),
                                 transformed=transformed, label=label)


def outcome_sector(op: WeylOp, basis_obs: list[WeylOp], outcomes) -> int:
    """Eigenvalue exponent of op given per-site outcomes of basis_obs.

    op must factor site-by-site into powers of the measured observables:
    op = omega^kappa * prod_i basis_obs[i]^{m_i}. Returns
    kappa + sum m_i * outcome_i (mod d).
    """
    d = op.d
    total = WeylOp.identity(d, op.n)
    sector = 0
    for i in op.support:
        w = basis_obs[i]
        m = None
        for cand in range(1, d):
            if (w.x[i] * cand - op.x[i]) % d == 0 and (w.z[i] * cand - op.z[i]) % d == 0:
                m = cand
                break
        if m is None:
            raise ValueError(f"operator not diagonal in the measured basis at site {i}")
        sector = (sector + m * int(outcomes[i])) % d
        total = total @ w.power(m)
    if not total.same_string(op):
        raise ValueError("operator does not factor over the measured basis")
    kappa = (op.phase - total.phase) % d
    return (sector + kappa) % d


def estimate_operator(records: list[ShotRecord], op: WeylOp,
                      basis_obs: list[WeylOp]) -> tuple[np.ndarray, int]:
    """Empirical distribution over omega-sectors of op, plus shot count."""
    d = op.d
    counts = np.zeros(d, dtype=np.int64)
    for r in records:
        if r.herald_discard:
            continue
        counts[outcome_sector(op, basis_obs, r.creg_values)] += 1
    return counts, int(counts.sum())


def estimate_plaquette_projectors(records: list[ShotRecord], basis: str,
                                  lattice: TorusLattice) -> list[PlaquetteSnapshot]:
    """Per-plaquette projector estimates from destructive measure-all records.

    Shift-type (A) faces require shift-basis ('x') records; clock-type
    (B) faces require clock-basis ('z') records.
    """
    if basis not in ("x", "z"):
        raise ValueError("basis must be 'x' or 'z'")
    d, n = lattice.d, lattice.n_sites
    basis_obs = [
        WeylOp.from_site(d, n, i, 1 if basis == "x" else 0, 0 if basis == "x" else 1)
        for i in range(n)
    ]
    wanted = "A" if basis == "x" else "B"
    out = []
    for p in lattice.plaquettes:
        if p.kind != wanted:
            continue
        counts, total = estimate_operator(records, p.operator(n, d), basis_obs)
        if total == 0:
            raise ValueError("no retained shots")
        triple = tuple(counts / total)
        out.append(_snapshot_from_triple(p.kind, p.pos, triple, n_shots=total))
    return out


def estimate_custom(records: list[ShotRecord], ops: dict[str, WeylOp],
                    basis_obs: list[WeylOp]) -> dict[str, PlaquetteSnapshot]:
    """Estimate arbitrary named operators diagonal in a per-site product basis."""
    out = {}
    for name, op in ops.items():
        counts, total = estimate_operator(records, op, basis_obs)
        triple = tuple(counts / total) if total else (0.0,) * op.d
        out[name] = _snapshot_from_triple("custom", (-1, -1), triple,
                                          n_shots=total, label=name)
    return out
