"""Fusion network: PBS, parity checks, GHZ construction with noise, graph bookkeeping."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GhzlabError, ModeCollisionError, ValidationError
from .source import SourceParams, bell_pair, double_pair
from .state import (EnsembleState, PureState, Role, V, apply_single_mode, half_wave_plate,
                    mode_occupation, phase_plate, project, tensor)

MAX_GRAPH_VERTICES = 12


def pair_modes(k: int) -> tuple[int, int]:
    """Spatial ids of the o and e photon of the k-th source (1-based)."""
    return 2 * k - 1, 2 * k


def chain_edges(n_pairs: int) -> tuple[tuple[int, int], ...]:
    return tuple((2 * i, 2 * i + 2) for i in range(1, n_pairs))


@dataclass(frozen=True)
class NetworkSpec:
    n_pairs: int = 5
    fusion_edges: tuple[tuple[int, int], ...] | None = None
    per_fusion_overlap: float | tuple[float, ...] | None = None
    per_photon_efficiency: float = 1.0
    veto_efficiency: float = 0.0

    def __post_init__(self):
        if not 1 <= self.n_pairs <= 5:
            raise ValidationError("n_pairs must be in 1..5")
        edges = chain_edges(self.n_pairs) if self.fusion_edges is None else \
            tuple(tuple(int(m) for m in e) for e in self.fusion_edges)
        object.__setattr__(self, "fusion_edges", edges)
        if len(edges) != self.n_pairs - 1:
            raise ValidationError(f"{self.n_pairs} pairs need {self.n_pairs - 1} fusion edges")
        e_modes = {pair_modes(k)[1] for k in range(1, self.n_pairs + 1)}
        if any(m not in e_modes for e in edges for m in e):
            raise ValidationError("fusion edges must join extraordinary modes")
        if self.n_pairs > 1 and not _connected(e_modes, edges):
            raise ValidationError("fusion edges must connect every pair")
        ov = self.per_fusion_overlap
        if ov is not None:
            ov = (float(ov),) * len(edges) if np.isscalar(ov) else tuple(float(x) for x in ov)
            if len(ov) != len(edges) or any(not 0 <= x <= 1 for x in ov):
                raise ValidationError("per_fusion_overlap needs one value in [0, 1] per edge")
            object.__setattr__(self, "per_fusion_overlap", ov)
        for name in ("per_photon_efficiency", "veto_efficiency"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} outside [0, 1]")

    @property
    def n_photons(self) -> int:
        return 2 * self.n_pairs

    def overlaps(self, default: float = 1.0) -> tuple[float, ...]:
        if self.per_fusion_overlap is None:
            return (default,) * len(self.fusion_edges)
        return self.per_fusion_overlap


def _connected(nodes, edges) -> bool:
    nodes = set(nodes)
    seen, todo = set(), [next(iter(nodes))]
    while todo:
        n = todo.pop()
        if n in seen:
            continue
        seen.add(n)
        todo += [b if a == n else a for a, b in edges if n in (a, b)]
    return seen == nodes


def pbs(s: PureState, in1: int, in2: int) -> PureState:
    """H photons keep their spatial mode, V photons swap between in1 and in2."""
    modes = s.modes
    for m in (in1, in2):
        if m not in modes:
            raise ValidationError(f"mode {m} not in state")
    swap = {in1: in2, in2: in1}
    out = {}
    for term, a in s.items():
        t = tuple((swap[sid] if pol == V and sid in swap else sid, pol, tag, n)
                  for sid, pol, tag, n in term)
        out[t] = a  # a mode permutation, so terms cannot collide
    return PureState(out, modes)


def parity_check(s: PureState, m1: int, m2: int) -> tuple[PureState, float]:
    """PBS followed by post-selection on exactly one photon in each output."""
    mixed = pbs(s, m1, m2)

    def one_each(term):
        occ = mode_occupation(term)
        return occ.get(m1, 0) == 1 and occ.get(m2, 0) == 1

    return project(mixed, one_each)


def ghz_state(modes: dict[int, Role | str], sign: int = 1) -> PureState:
    ids = sorted(modes)
    a = 1 / math.sqrt(2)
    return PureState({tuple((m, 0, 0, 1) for m in ids): a,
                      tuple((m, 1, 0, 1) for m in ids): sign * a}, modes)


def ideal_ghz(n_photons: int) -> PureState:
    return ghz_state(_pair_roles(n_photons // 2))


def _pair_roles(n_pairs: int) -> dict[int, Role]:
    roles = {}
    for k in range(1, n_pairs + 1):
        o, e = pair_modes(k)
        roles[o], roles[e] = Role.ORDINARY, Role.EXTRAORDINARY
    return roles


def _run_network(s: PureState, spec: NetworkSpec) -> PureState:
    # each e photon's HWP turns HV+VH into HH+VV before fusion
    for k in range(1, spec.n_pairs + 1):
        s = apply_single_mode(s, pair_modes(k)[1], half_wave_plate(45.0))
    for m1, m2 in spec.fusion_edges:
        s = pbs(s, m1, m2)
    return s


def _all_lit(modes):
    def keep(term):
        occ = mode_occupation(term)
        return all(occ.get(m, 0) > 0 for m in modes)
    return keep


@dataclass(frozen=True)
class GhzBuild:
    """Post-selected output of the network.

    ``postselection_probability`` is the chance that every detector mode is
    occupied given that every source fired, before detector efficiency.
    ``components`` lists (label, weight) of the ensemble before normalization.
    """
    ensemble: EnsembleState
    postselection_probability: float
    efficiency: float
    veto_efficiency: float
    coherence_factor: float
    components: tuple[tuple[str, float], ...] = field(default=())

    @property
    def n_photons(self) -> int:
        return len(self.ensemble.branches[0][1].modes)


def build_ghz(spec: NetworkSpec, src: SourceParams) -> GhzBuild:
    """Cascade the sources through the fusion chain and post-select.

    Noise enters two ways. Imperfect overlap at each fusion mixes in the
    phase-flipped GHZ so the coherence is damped by the product of overlaps.
    Double-pair emission is kept to lowest order: one source emits two pairs
    while the others emit one. Configurations with an empty source never give
    an N-fold coincidence because that source's o photon is missing.
    """
    n_pairs = spec.n_pairs
    modes = list(_pair_roles(n_pairs))

    def source_product(doubled: int | None) -> PureState:
        st = None
        for k in range(1, n_pairs + 1):
            o, e = pair_modes(k)
            f = double_pair(o, e, src.double_pair_tag_policy) if k == doubled else bell_pair(o, e)
            st = f if st is None else tensor(st, f)
        return st

    keep = _all_lit(modes)
    signal, p_sig = project(_run_network(source_product(None), spec), keep)
    c = math.prod(spec.overlaps(src.overlap))
    branches = [(p_sig * (1 + c) / 2, signal)]
    labels = [("signal", branches[0][0])]
    if c < 1:
        flipped = apply_single_mode(signal, modes[0], phase_plate(math.pi))
        branches.append((p_sig * (1 - c) / 2, flipped))
        labels.append(("signal_dephased", branches[-1][0]))

    total, norm = p_sig, 1.0
    if src.truncation_order == 2 and src.p > 0:
        for k in range(1, n_pairs + 1):
            st, p_k = project(_run_network(source_product(k), spec), keep)
            total += src.p * p_k
            norm += src.p
            if p_k > 0:
                branches.append((src.p * p_k, st))
                labels.append((f"double_pair_{k}", src.p * p_k))
    return GhzBuild(EnsembleState(branches), total / norm, spec.per_photon_efficiency,
                    spec.veto_efficiency, c, tuple(labels))


# Graph states

@dataclass(frozen=True)
class GraphState:
    vertices: frozenset
    edges: frozenset

    def __init__(self, vertices, edges=()):
        vs = frozenset(vertices)
        es = set()
        for a, b in edges:
            if a == b:
                raise ValidationError(f"self-loop on vertex {a}")
            if a not in vs or b not in vs:
                raise ValidationError(f"edge ({a}, {b}) references a missing vertex")
            es.add(frozenset((a, b)))
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", frozenset(es))

    def degree(self, v) -> int:
        return sum(v in e for e in self.edges)

    def neighbors(self, v) -> set:
        return {u for e in self.edges if v in e for u in e if u != v}

    def is_star(self) -> bool:
        """One vertex adjacent to all others and no other edges."""
        n = len(self.vertices)
        if n <= 1:
            return not self.edges
        return len(self.edges) == n - 1 and any(self.degree(v) == n - 1 for v in self.vertices)

    def center(self):
        return max(sorted(self.vertices), key=self.degree)

    def to_json(self) -> str:
        return json.dumps({str(v): sorted(self.neighbors(v)) for v in sorted(self.vertices)})

    @classmethod
    def from_json(cls, text: str) -> "GraphState":
        adj = {int(k): v for k, v in json.loads(text).items()}
        return cls(adj, [(a, b) for a, nb in adj.items() for b in nb])


def k2(a, b) -> GraphState:
    return GraphState((a, b), [(a, b)])


def graph_fuse(g1: GraphState, g2: GraphState, v1, v2, keep_second: bool = True) -> GraphState:
    """Merge vertex v2 of g2 into vertex v1 of g1; v1 inherits v2's edges.

    A PBS parity check keeps both photons, so by default v2 survives as a leaf
    of v1. With ``keep_second=False`` it is absorbed entirely, the bookkeeping
    of a destructive fusion.
    """
    if v1 not in g1.vertices:
        raise ValidationError(f"vertex {v1} not in first graph")
    if v2 not in g2.vertices:
        raise ValidationError(f"vertex {v2} not in second graph")
    if g1.vertices & g2.vertices:
        raise ModeCollisionError("graphs share vertex ids")
    if len(g2.vertices) == 1 and not keep_second:
        return g1
    vs = set(g1.vertices) | (set(g2.vertices) - {v2})
    edges = [tuple(e) for e in g1.edges]
    for e in g2.edges:
        a, b = (v1 if x == v2 else x for x in e)
        edges.append((a, b))
    if keep_second:
        vs.add(v2)
        edges.append((v1, v2))
    return GraphState(vs, edges)


def fusion_graph(n_pairs: int) -> GraphState:
    """Star obtained by fusing each new pair into the first e photon."""
    g = k2(*pair_modes(1))
    center = pair_modes(1)[1]
    for k in range(2, n_pairs + 1):
        o, e = pair_modes(k)
        g = graph_fuse(g, k2(o, e), center, e)
    return g


def graph_to_state(g: GraphState, roles: dict | None = None) -> PureState:
    """|+> on every vertex, then CZ along every edge (dense expansion)."""
    vs = sorted(g.vertices)
    n = len(vs)
    if n > MAX_GRAPH_VERTICES:
        raise GhzlabError(f"dense expansion limited to {MAX_GRAPH_VERTICES} vertices, got {n}")
    roles = roles or {v: Role.ORDINARY if v % 2 else Role.EXTRAORDINARY for v in vs}
    pos = {v: i for i, v in enumerate(vs)}
    bits = (np.arange(1 << n)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    phase = np.zeros(1 << n, dtype=np.int64)
    for e in g.edges:
        a, b = (pos[x] for x in e)
        phase ^= bits[:, a] & bits[:, b]
    amp = (1 - 2 * phase) / math.sqrt(1 << n)
    table = {tuple((v, int(bits[i, j]), 0, 1) for j, v in enumerate(vs)): amp[i] for i in range(1 << n)}
    return PureState(table, {v: roles[v] for v in vs})
