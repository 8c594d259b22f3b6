"""Basis-rotated photon counting: exact outcome distributions and Poisson sampling."""

from __future__ import annotations

import math
from collections.abc import Mapping
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import DegenerateStateError, ValidationError
from .state import EnsembleState, PureState, Role, symmetric_power
from .tables import HV, CountTable, MeasurementSetting, canonical_outcome


def basis_vector(theta: float, sign: str) -> np.ndarray:
    """(|H> +/- e^{i theta}|V>)/sqrt(2) as a length-2 complex vector."""
    s = {"+": 1.0, "-": -1.0}.get(canonical_outcome(sign))
    if s is None:
        raise ValidationError(f"sign must be '+' or '-', got {sign!r}")
    return np.array([1.0, s * np.exp(1j * theta)]) / math.sqrt(2)


def rotation(setting: MeasurementSetting) -> np.ndarray:
    """Rows are the outcome bras <+theta| and <-theta|; identity for H/V."""
    if setting.kind == HV:
        return np.eye(2, dtype=np.complex128)
    return np.conj(np.stack([basis_vector(setting.theta, "+"), basis_vector(setting.theta, "-")]))


def eigenvalue(outcome: str) -> int:
    o = canonical_outcome(outcome)
    if not o or any(c not in "+-" for c in o):
        raise ValidationError(f"invalid outcome string {outcome!r}")
    return -1 if o.count("-") % 2 else 1


def outcome_order(modes: Mapping[int, Role]) -> list[int]:
    """Detector order used in outcome strings: o photons first, then e photons."""
    o = sorted(m for m, r in modes.items() if Role(r) is Role.ORDINARY)
    e = sorted(m for m, r in modes.items() if Role(r) is Role.EXTRAORDINARY)
    return o + e


class OutcomeDistribution(Mapping):
    """Probabilities over all 2**N outcome strings, indexed MSB-first.

    ``valid_probability`` is the chance a trial produced a usable N-fold record
    (before renormalization to this distribution).
    """

    def __init__(self, probs: np.ndarray, setting: MeasurementSetting,
                 modes: tuple[int, ...] = (), valid_probability: float = 1.0):
        self.probs = np.asarray(probs, dtype=np.float64)
        self.setting = setting
        self.modes = tuple(modes)
        self.valid_probability = valid_probability
        self.n = setting.n_photons
        if self.probs.size != 1 << self.n:
            raise ValidationError("probability vector size does not match n_photons")

    def label(self, index: int) -> str:
        sym = self.setting.symbols
        return "".join(sym[(index >> (self.n - 1 - q)) & 1] for q in range(self.n))

    def index(self, outcome: str) -> int:
        o = canonical_outcome(outcome)
        sym = self.setting.symbols
        if len(o) != self.n or any(c not in sym for c in o):
            raise KeyError(outcome)
        return int("".join(str(sym.index(c)) for c in o), 2)

    def __getitem__(self, outcome: str) -> float:
        return float(self.probs[self.index(outcome)])

    def __iter__(self) -> Iterator[str]:
        return (self.label(i) for i in range(self.probs.size))

    def __len__(self):
        return self.probs.size

    def expectation(self) -> float:
        """Exact <M_theta^{xN}>: the parity-weighted sum of probabilities."""
        return _kernels.parity_expectation(self.probs)

    def __repr__(self):
        top = np.argsort(self.probs)[::-1][:4]
        body = ", ".join(f"{self.label(i)}: {self.probs[i]:.4g}" for i in top)
        return f"OutcomeDistribution({self.setting.label}; {body} ...)"


def _click_factors(n_plus: np.ndarray, n_minus: np.ndarray, eta: float, veto: float) -> np.ndarray:
    """Per-mode record factors for threshold detectors on the two outputs.

    A mode reports '+' if only the '+' detector fires, '-' likewise. When both
    fire the event is vetoed with probability ``veto`` and otherwise assigned
    one of the two outcomes at random.
    """
    p_plus = 1.0 - (1.0 - eta) ** n_plus
    p_minus = 1.0 - (1.0 - eta) ** n_minus
    both = 0.5 * (1.0 - veto) * p_plus * p_minus
    return np.stack([p_plus * (1 - p_minus) + both, p_minus * (1 - p_plus) + both], axis=-1)


def _unique_rows(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """np.unique(rows, axis=0) via integer keys, which sorts far faster."""
    base = int(rows.max()) + 1 if rows.size else 1
    if rows.shape[1] * math.log2(max(base, 2)) > 62:
        return np.unique(rows, axis=0, return_inverse=True)
    keys = rows @ (base ** np.arange(rows.shape[1], dtype=np.int64))
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    return rows[first], inverse


def _branch_records(state: PureState, order: list[int], u: np.ndarray, eta: float, veto: float) -> np.ndarray:
    """Unnormalized record distribution of one pure branch."""
    n = len(order)
    pos = {m: i for i, m in enumerate(order)}
    groups: dict[tuple, dict[tuple, complex]] = {}
    for term, amp in state.items():
        slots: dict[tuple[int, int], list[int]] = {}
        for sid, pol, tag, cnt in term:
            slots.setdefault((pos[sid], tag), [0, 0])[pol] += cnt
        keys = sorted(slots)
        pattern = tuple((k[0], k[1], sum(slots[k])) for k in keys)
        index = tuple(slots[k][1] for k in keys)
        g = groups.setdefault(pattern, {})
        g[index] = g.get(index, 0j) + amp

    out = np.zeros(1 << n)
    powers: dict[int, np.ndarray] = {}
    weights, plus_rows, minus_rows = [], [], []
    for pattern, table in groups.items():
        if len(pattern) == n and all(c == 1 for _, _, c in pattern):
            # one photon per detector: dense qubit rotation
            psi = np.zeros(1 << n, dtype=np.complex128)
            for idx, a in table.items():
                psi[int("".join(map(str, idx)), 2)] += a
            out += eta ** n * np.abs(_kernels.rotate_qubits(psi, u)) ** 2
            continue
        dims = tuple(c + 1 for _, _, c in pattern)
        t = np.zeros(dims, dtype=np.complex128)
        for idx, a in table.items():
            t[idx] += a
        for axis, c in enumerate(dims):
            if c - 1 not in powers:
                powers[c - 1] = symmetric_power(u, c - 1)
            t = np.moveaxis(np.tensordot(powers[c - 1], t, axes=([1], [axis])), 0, axis)
        probs = (np.abs(t) ** 2).reshape(-1)
        live = probs > 1e-16
        minus = np.indices(dims).reshape(len(dims), -1).T[live]
        n_minus = np.zeros((minus.shape[0], n))
        n_plus = np.zeros((minus.shape[0], n))
        for s, (p, _, c) in enumerate(pattern):
            n_minus[:, p] += minus[:, s]
            n_plus[:, p] += c - minus[:, s]
        weights.append(probs[live])
        plus_rows.append(n_plus)
        minus_rows.append(n_minus)
    if weights:
        # configurations with equal per-detector photon numbers share click factors
        rows = np.hstack([np.concatenate(plus_rows), np.concatenate(minus_rows)])
        uniq, inverse = _unique_rows(rows.astype(np.int64))
        w = np.bincount(inverse.reshape(-1), weights=np.concatenate(weights), minlength=len(uniq))
        factors = _click_factors(uniq[:, :n], uniq[:, n:], eta, veto)
        out += _kernels.product_distribution(w, factors)
    return out


def outcome_distribution(s, setting: MeasurementSetting, efficiency: float | None = None,
                         veto: float | None = None) -> OutcomeDistribution:
    """Exact distribution of N-fold records, one detector pair per spatial mode.

    ``s`` may be a PureState, an EnsembleState, or a network build (which
    supplies its own detector efficiency and veto). Modes holding several
    photons are handled with threshold-detector click statistics; the result
    is conditioned on every mode producing exactly one reported outcome.
    """
    if hasattr(s, "ensemble"):
        efficiency = s.efficiency if efficiency is None else efficiency
        veto = s.veto_efficiency if veto is None else veto
        s = s.ensemble
    if isinstance(s, PureState):
        s = EnsembleState.pure(s)
    eta = 1.0 if efficiency is None else float(efficiency)
    veto = 0.0 if veto is None else float(veto)
    modes = s.branches[0][1].modes
    order = outcome_order(modes)
    if len(order) != setting.n_photons:
        raise ValidationError(f"state spans {len(order)} detector modes, setting expects {setting.n_photons}")
    u = rotation(setting)
    total = np.zeros(1 << len(order))
    for w, st in s:
        if st.modes != modes:
            raise ValidationError("ensemble branches span different modes")
        total += w * _branch_records(st, order, u, eta, veto)
    valid = float(total.sum())
    if valid <= 0.0:
        raise DegenerateStateError("no branch yields an N-fold record")
    return OutcomeDistribution(total / valid, setting, tuple(order), valid)


def sample_counts(dist: OutcomeDistribution, expected_total: float, seed: int, stream: int = 0) -> CountTable:
    """Independent Poisson count per outcome with mean expected_total * p.

    Each outcome draws from its own PCG64 stream keyed by (seed, stream,
    outcome index), so the table does not depend on evaluation order.
    """
    if expected_total <= 0:
        raise ValidationError("expected_total must be positive")
    if seed is None:
        raise ValidationError("sampling needs an explicit seed")
    means = expected_total * dist.probs
    counts = {}
    for i in np.flatnonzero(means > 0):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream), int(i)])))
        c = int(rng.poisson(means[i]))
        if c:
            counts[dist.label(i)] = c
    return CountTable(dist.setting, counts)


def diff_ratio(a: float, b: float) -> tuple[float, float]:
    """(a - b)/(a + b) for independent Poisson counts, with its sigma."""
    n = a + b
    if n <= 0:
        raise ValidationError("no counts")
    return (a - b) / n, 2.0 * math.sqrt(max(a, 1) * max(b, 1) / n ** 3)


def ratio(a: float, b: float) -> tuple[float, float]:
    """a/(a + b) for independent Poisson counts, with its sigma."""
    n = a + b
    if n <= 0:
        raise ValidationError("no counts")
    return a / n, math.sqrt(max(a, 1) * max(b, 1) / n ** 3)


def expectation_from_counts(t: CountTable) -> tuple[float, float]:
    plus, minus = t.parity_counts()
    if plus + minus == 0:
        raise ValidationError(f"empty table for setting {t.setting.label}")
    return diff_ratio(plus, minus)
