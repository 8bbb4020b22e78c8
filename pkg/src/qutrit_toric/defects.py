"""Parafermion and charge-conjugation defect constructions.

Parafermion defects: measuring the XZ (or XZdag) eigenbasis on one
vertex fuses the four adjacent faces pairwise into weight-5 endpoint
stabilizers plus a nonlocal stabilizer spanning both ends. The
feed-forward correction that pins all of them to +1 is solved as a
Weyl operator from linear commutation constraints, then applied as an
outcome-conditioned gate block.

Charge-conjugation defects: a unitary ribbon built from a sequential
CX chain along the diagonal s-sites (the one-dimensional gauging map),
per-step controlled shifts onto the sigma-sites followed by the
charge-conjugation gate there, and the inverted chain. The circuit
squares to the identity. Transformed stabilizers are always derived by
Heisenberg propagation of the plain faces through the actual gate
list; the two images whose support outgrows a single face are the
defect-pair endpoints (one shift-type, one clock-type) and read the
pair's internal state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, CondGate
from .lattice import Plaquette, TorusLattice
from .modmath import mod_inverse, solve
from .weyl import (
    CliffordGate,
    WeylOp,
    compose,
    conj_c,
    conjugate_through,
    cx,
    cx_dag,
    symplectic_product,
    weyl_power_gates,
)


@dataclass(frozen=True)
class DefectSpec:
    kind: str  # "PF" | "PFstar" | "CC"
    sites: tuple[tuple[int, int], ...]
    endpoint_stabilizers: tuple[WeylOp, ...]
    nonlocal_stabilizers: tuple[WeylOp, ...]
    # face position -> operator that replaces the plain face after creation
    transformed: dict[tuple[int, int], WeylOp] = field(default_factory=dict)
    measured: tuple[WeylOp, ...] = ()
    creg: int | None = None
    ribbon: "CCRibbon | None" = None


def solve_weyl_op(lattice: TorusLattice, support, keep, change) -> WeylOp | None:
    """Weyl operator F on the given support with prescribed commutation.

    keep: operators whose eigenvalue F must not shift (sp(F, op) = 0).
    change: list of (op, delta): applying F shifts op's eigenvalue
    exponent by exactly delta = sp(F, op).
    """
    d, n = lattice.d, lattice.n_sites
    sites = [lattice.site_index(*q) if isinstance(q, tuple) else int(q) for q in support]
    rows, rhs = [], []

    def add(op: WeylOp, r: int):
        row = np.zeros(2 * len(sites), dtype=np.int64)
        for k, site in enumerate(sites):
            row[2 * k] = op.z[site] % d          # coefficient of F.x[site]
            row[2 * k + 1] = (-op.x[site]) % d   # coefficient of F.z[site]
        rows.append(row)
        rhs.append(r % d)

    for op in keep:
        add(op, 0)
    for op, delta in change:
        add(op, delta)
    sol = solve(np.array(rows), np.array(rhs), d)
    if sol is None:
        return None
    pattern = {}
    for k, site in enumerate(sites):
        fx, fz = int(sol[2 * k]), int(sol[2 * k + 1])
        if fx or fz:
            pattern[site] = (fx, fz)
    return WeylOp.from_pattern(d, n, pattern)


def weyl_gates(op: WeylOp) -> list[CliffordGate]:
    """Gate sequence realizing op up to a global phase."""
    gates: list[CliffordGate] = []
    for site in op.support:
        gates.extend(weyl_power_gates(int(site), int(op.x[site]), int(op.z[site]), op.d))
    return gates


# -- parafermion defects -------------------------------------------------------


PF_BASIS = {"PF": 1, "PFstar": -1}  # z-exponent of the measured X Z^(+-1)


def _fused_pair(lattice: TorusLattice, W: WeylOp, P: Plaquette, Q: Plaquette) -> WeylOp:
    """Product P Q^b W^-m commuting with W and supported off W's site.

    The result lies in the pre-measurement stabilizer group times a
    power of the measured operator, so its ideal post-correction value
    is exactly +1.
    """
    n, d = lattice.n_sites, lattice.d
    op_p, op_q = P.operator(n, d), Q.operator(n, d)
    sq = symplectic_product(W, op_q)
    b = (-symplectic_product(W, op_p) * mod_inverse(sq, d)) % d
    raw = compose(op_p, op_q.power(b))
    site = W.support[0]
    for m in range(d):
        cand = compose(raw, W.power(-m))
        if cand.x[site] == 0 and cand.z[site] == 0:
            return cand
    raise AssertionError("no W power cancels the measured-site support")


def pf_defect_circuit(lattice: TorusLattice, site: tuple[int, int], species: str,
                      creg: int) -> tuple[Circuit, DefectSpec]:
    """Measurement + feed-forward fragment creating a parafermion defect pair.

    The endpoint stabilizers are the two vertical face fusions flanking
    the measured vertex; the nonlocal stabilizer is the horizontal
    fusion across it. All three read +1 deterministically after the
    conditioned correction.
    """
    if species not in PF_BASIS:
        raise ValueError(f"species must be PF or PFstar, got {species}")
    x, y = site
    n, d = lattice.n_sites, lattice.d
    s = lattice.site_index(x, y)
    W = WeylOp.from_site(d, n, s, 1, PF_BASIS[species])
    nw, ne, sw, se = (
        lattice.plaquette_at(x - 1, y - 1),
        lattice.plaquette_at(x, y - 1),
        lattice.plaquette_at(x - 1, y),
        lattice.plaquette_at(x, y),
    )
    e_west = _fused_pair(lattice, W, nw, sw)
    e_east = _fused_pair(lattice, W, ne, se)
    nonlocal_op = _fused_pair(lattice, W, nw, ne)

    # measuring outcome t leaves each fused operator at omega^{-m t} where m is
    # the W power stripped from it; the correction F^t must undo all of that
    # while commuting with every untouched face and the Z-type logicals.
    def strip_power(fused: WeylOp, P: Plaquette, Q: Plaquette) -> int:
        op_p, op_q = P.operator(n, d), Q.operator(n, d)
        b = (-symplectic_product(W, op_p) * mod_inverse(symplectic_product(W, op_q), d)) % d
        raw = compose(op_p, op_q.power(b))
        for m in range(d):
            if compose(raw, W.power(-m)) == fused:
                return m
        raise AssertionError

    changes = [(W, -1)]
    for fused, (P, Q) in ((e_west, (nw, sw)), (e_east, (ne, se)), (nonlocal_op, (nw, ne))):
        changes.append((fused, strip_power(fused, P, Q)))
    touched = {nw.pos, ne.pos, sw.pos, se.pos}
    keep = [p.operator(n, d) for p in lattice.plaquettes if p.pos not in touched]
    keep += [lattice.logical_z_horizontal(r) for r in range(lattice.ly)]
    keep += [lattice.logical_z_vertical(c) for c in range(lattice.lx)]
    block = [(x + dx, y + dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)]
    support = [lattice.site_index(*q) for q in block]
    f1 = solve_weyl_op(lattice, support, keep, changes)
    if f1 is None:
        raise AssertionError("no feed-forward correction exists; geometry invalid")

    circ = Circuit(d, n, creg + 1)
    circ.measure(W, creg)
    predicate = {t: tuple(weyl_gates(f1.power(t))) for t in range(d)}
    circ.cond(creg, predicate)
    spec = DefectSpec(
        kind=species,
        sites=(site,),
        endpoint_stabilizers=(e_west, e_east),
        nonlocal_stabilizers=(nonlocal_op,),
        transformed={nw.pos: e_west, sw.pos: e_west, ne.pos: e_east, se.pos: e_east},
        measured=(W,),
        creg=creg,
    )
    return circ, spec


# -- charge conjugation defects ----------------------------------------------------


@dataclass(frozen=True)
class CCRibbon:
    """Ribbon data: diagonal s-chain plus per-step (s, sigma, eta) actions."""

    schain: tuple[tuple[int, int], ...]
    steps: tuple[tuple[tuple[int, int], tuple[int, int], int], ...]

    @classmethod
    def canonical(cls, lattice: TorusLattice, start: tuple[int, int], length: int) -> "CCRibbon":
        """Down-right diagonal chain; each sigma one site east, eta = +1."""
        chain = []
        x, y = start
        for _ in range(length):
            chain.append((x % lattice.lx, y % lattice.ly))
            x, y = x + 1, y + 1
        steps = tuple((s, ((s[0] + 1) % lattice.lx, s[1]), 1) for s in chain)
        return cls(tuple(chain), steps)


def cc_ribbon_gates(lattice: TorusLattice, ribbon: CCRibbon) -> list[CliffordGate]:
    si = lattice.site_index
    gates: list[CliffordGate] = []
    for a, b in zip(ribbon.schain, ribbon.schain[1:]):
        gates.append(cx(si(*a), si(*b)))
    for s_pos, sigma, eta in ribbon.steps:
        if sigma in ribbon.schain:
            raise ValueError("sigma sites must be disjoint from the s-chain")
        g = cx(si(*s_pos), si(*sigma)) if eta == 1 else cx_dag(si(*s_pos), si(*sigma))
        gates.append(g)
        gates.append(conj_c(si(*sigma)))
    for a, b in reversed(list(zip(ribbon.schain, ribbon.schain[1:]))):
        gates.append(cx_dag(si(*a), si(*b)))
    return gates


def cc_defect_circuit(lattice: TorusLattice, ribbon: CCRibbon) -> tuple[Circuit, DefectSpec]:
    """Unitary-only fragment inserting a charge-conjugation defect pair.

    Raises when the ribbon does not produce exactly one shift-type and
    one clock-type nonlocal endpoint (malformed geometry).
    """
    n, d = lattice.n_sites, lattice.d
    gates = cc_ribbon_gates(lattice, ribbon)
    transformed: dict[tuple[int, int], WeylOp] = {}
    nonlocal_ops: list[tuple[str, WeylOp]] = []
    for p in lattice.plaquettes:
        img = conjugate_through(gates, p.operator(n, d))
        if img != p.operator(n, d):
            transformed[p.pos] = img
            if len(img.support) > 4:
                nonlocal_ops.append((p.kind, img))
    kinds = sorted(k for k, _ in nonlocal_ops)
    if kinds != ["A", "B"]:
        raise ValueError(
            f"malformed ribbon: expected one shift-type and one clock-type endpoint, got {kinds}"
        )
    endpoints = tuple(op for _, op in sorted(nonlocal_ops, key=lambda t: t[0]))
    circ = Circuit(d, n, 0)
    circ.gates(gates)
    spec = DefectSpec(
        kind="CC",
        sites=tuple(ribbon.schain) + tuple(s for _, s, _ in ribbon.steps),
        endpoint_stabilizers=endpoints,
        nonlocal_stabilizers=endpoints,
        transformed=transformed,
        ribbon=ribbon,
    )
    return circ, spec


def fuse_cc_pair(lattice: TorusLattice, spec: DefectSpec) -> Circuit:
    """Re-apply the ribbon unitary; reveals any non-vacuum internal state."""
    if spec.kind != "CC" or spec.ribbon is None:
        raise ValueError("fuse_cc_pair needs a CC defect spec")
    circ, _ = cc_defect_circuit(lattice, spec.ribbon)
    return circ
