"""Sparse Fock-state algebra over polarized optical modes.

A basis term is a canonically sorted tuple of ``(spatial_id, pol, tag, count)``
entries, with ``pol`` 0 for H and 1 for V. The empty tuple is the vacuum.
Amplitudes are coefficients of normalized Fock states, so a term with two
photons in one mode carries its bosonic normalization implicitly.

States are immutable values: every operation returns a new object.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import (DegenerateStateError, ModeCollisionError, NonUnitaryError,
                     TruncationError, ValidationError)

PRUNE = 1e-14
NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
MAX_PHOTONS = 20

H, V = 0, 1
_POL = "HV"

Term = tuple  # tuple[tuple[int, int, int, int], ...]


class Role(str, enum.Enum):
    ORDINARY = "o"
    EXTRAORDINARY = "e"


@dataclass(frozen=True, order=True)
class ModeLabel:
    spatial_id: int
    role: Role = Role.ORDINARY
    tag: int = 0


def _mode_id(m) -> int:
    return m.spatial_id if isinstance(m, ModeLabel) else int(m)


def _canon(entries: Iterable[tuple[int, int, int, int]]) -> Term:
    merged: dict[tuple[int, int, int], int] = {}
    for sid, pol, tag, n in entries:
        if n:
            key = (sid, pol, tag)
            merged[key] = merged.get(key, 0) + n
    return tuple((k[0], k[1], k[2], n) for k, n in sorted(merged.items()))


def photon_count(term: Term) -> int:
    return sum(e[3] for e in term)


def mode_occupation(term: Term) -> dict[int, int]:
    """Photons per spatial mode, summed over polarization and tag."""
    occ: dict[int, int] = {}
    for sid, _, _, n in term:
        occ[sid] = occ.get(sid, 0) + n
    return occ


class PureState:
    """Sparse amplitude table plus the role of every spatial mode it spans."""

    __slots__ = ("_amps", "_modes", "_norm")

    def __init__(self, amplitudes: Mapping[Term, complex], modes: Mapping[int, Role | str]):
        roles = {int(k): Role(v) for k, v in modes.items()}
        amps: dict[Term, complex] = {}
        for term, a in amplitudes.items():
            a = complex(a)
            if abs(a) < PRUNE:
                continue
            t = _canon(term)
            for sid, *_ in t:
                if sid not in roles:
                    raise ValidationError(f"term references unknown mode {sid}")
            if photon_count(t) > MAX_PHOTONS:
                raise TruncationError(f"term with {photon_count(t)} photons exceeds {MAX_PHOTONS}")
            amps[t] = amps.get(t, 0j) + a
        self._amps = {t: amps[t] for t in sorted(amps) if abs(amps[t]) >= PRUNE}
        self._modes = tuple(sorted(roles.items()))
        self._norm = math.fsum(abs(a) ** 2 for a in self._amps.values())

    # construction helpers
    @classmethod
    def vacuum(cls, modes: Mapping[int, Role | str] | None = None) -> "PureState":
        return cls({(): 1.0}, modes or {})

    @classmethod
    def empty(cls, modes: Mapping[int, Role | str] | None = None) -> "PureState":
        """Marker for a projection that kept nothing."""
        return cls({}, modes or {})

    @classmethod
    def from_terms(cls, amps: Mapping[str, complex]) -> "PureState":
        """Build from term strings, e.g. ``{"1oH 2eV": 0.7, "1oV 2eH": 0.7}``."""
        modes: dict[int, Role] = {}
        table = {}
        for text, a in amps.items():
            term, roles = parse_term(text)
            for sid, role in roles.items():
                if modes.setdefault(sid, role) != role:
                    raise ValidationError(f"mode {sid} appears with two roles")
            table[term] = a
        return cls(table, modes)

    # read-only views
    @property
    def modes(self) -> dict[int, Role]:
        return dict(self._modes)

    @property
    def norm2(self) -> float:
        return self._norm

    @property
    def is_empty(self) -> bool:
        return not self._amps

    def items(self):
        return self._amps.items()

    def terms(self):
        return self._amps.keys()

    def amplitude(self, term) -> complex:
        if isinstance(term, str):
            term = parse_term(term)[0]
        return self._amps.get(_canon(term), 0j)

    def __len__(self):
        return len(self._amps)

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self._modes == other._modes and self._amps == other._amps

    def __hash__(self):
        return hash((self._modes, tuple(self._amps.items())))

    def __repr__(self):
        body = ", ".join(f"{format_term(t, self.modes)!r}: {a:.4g}" for t, a in list(self._amps.items())[:6])
        more = " ..." if len(self._amps) > 6 else ""
        return f"PureState({{{body}{more}}})"

    def close_to(self, other: "PureState", atol: float = 1e-12) -> bool:
        keys = set(self._amps) | set(other._amps)
        return all(abs(self._amps.get(k, 0j) - other._amps.get(k, 0j)) <= atol for k in keys)

    def inner(self, other: "PureState") -> complex:
        """<self|other>."""
        return sum((a.conjugate() * other._amps.get(t, 0j) for t, a in self._amps.items()), 0j)

    # serialization
    def to_json(self) -> str:
        modes = self.modes
        rows = [{"term": format_term(t, modes), "re": a.real, "im": a.imag} for t, a in self._amps.items()]
        return json.dumps(rows)

    @classmethod
    def from_json(cls, text: str) -> "PureState":
        rows = json.loads(text)
        modes: dict[int, Role] = {}
        table = {}
        for row in rows:
            term, roles = parse_term(row["term"])
            modes.update(roles)
            table[term] = complex(row["re"], row["im"])
        return cls(table, modes)


def format_term(term: Term, modes: Mapping[int, Role]) -> str:
    """``(2, V, 1, 2)`` in an extraordinary mode 2 renders as ``2eV.1^2``."""
    if not term:
        return "vac"
    parts = []
    for sid, pol, tag, n in term:
        s = f"{sid}{Role(modes[sid]).value}{_POL[pol]}"
        if tag:
            s += f".{tag}"
        if n != 1:
            s += f"^{n}"
        parts.append(s)
    return " ".join(parts)


def parse_term(text: str) -> tuple[Term, dict[int, Role]]:
    text = text.strip()
    if text == "vac":
        return (), {}
    entries, roles = [], {}
    for tok in text.split():
        body, _, n = tok.partition("^")
        body, _, tag = body.partition(".")
        try:
            sid, role, pol = int(body[:-2]), Role(body[-2]), _POL.index(body[-1])
            entries.append((sid, pol, int(tag or 0), int(n or 1)))
        except (ValueError, IndexError):
            raise ValidationError(f"malformed term token {tok!r}") from None
        roles[sid] = role
    return _canon(entries), roles


def _boson_merge(t1: Term, t2: Term) -> tuple[Term, float]:
    """Product of two creation monomials, with the Fock normalization factor."""
    c1 = {e[:3]: e[3] for e in t1}
    factor = 1.0
    for *key, n in t2:
        m = c1.get(tuple(key), 0)
        if m:
            factor *= math.sqrt(math.comb(m + n, n))
    return _canon(t1 + t2), factor


def tensor(a: PureState, b: PureState) -> PureState:
    ma, mb = a.modes, b.modes
    if set(ma) & set(mb):
        raise ModeCollisionError(f"modes {sorted(set(ma) & set(mb))} appear in both factors")
    amps = {}
    for ta, xa in a.items():
        for tb, xb in b.items():
            amps[ta + tb] = xa * xb
    return PureState(amps, {**ma, **mb})


def boson_product(a: PureState, b: PureState) -> PureState:
    """Act with the creation polynomial of ``b`` on ``a`` (modes may overlap).

    Used to stack a second pair emission into the same spatial modes. The
    result is not normalized when photons bunch into one mode.
    """
    modes = a.modes
    for sid, role in b.modes.items():
        if modes.setdefault(sid, role) != role:
            raise ModeCollisionError(f"mode {sid} has conflicting roles")
    amps: dict[Term, complex] = {}
    for ta, xa in a.items():
        for tb, xb in b.items():
            t, f = _boson_merge(ta, tb)
            amps[t] = amps.get(t, 0j) + xa * xb * f
    return PureState(amps, modes)


def normalize(s: PureState) -> PureState:
    if s.norm2 <= 0.0:
        raise DegenerateStateError("cannot normalize a zero state")
    k = 1.0 / math.sqrt(s.norm2)
    return PureState({t: a * k for t, a in s.items()}, s.modes)


def check_unitary(u, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=tol, rtol=0):
        raise NonUnitaryError("expected a 2x2 unitary")
    return u


def symmetric_power(u: np.ndarray, n: int) -> np.ndarray:
    """Action of the one-photon map ``u`` on n photons sharing a mode.

    Basis index j counts photons in the second polarization (V, or '-' after
    a measurement rotation). Column j is the image of |n-j, j>.
    """
    u = np.asarray(u, dtype=np.complex128)
    s = np.zeros((n + 1, n + 1), dtype=np.complex128)
    fact = [math.factorial(k) for k in range(n + 1)]
    for j in range(n + 1):
        nh = n - j
        norm_in = math.sqrt(fact[nh] * fact[j])
        # (u00 a0 + u10 a1)^nh (u01 a0 + u11 a1)^j
        for a in range(nh + 1):
            ca = math.comb(nh, a) * u[0, 0] ** (nh - a) * u[1, 0] ** a
            for b in range(j + 1):
                cb = math.comb(j, b) * u[0, 1] ** (j - b) * u[1, 1] ** b
                k = a + b
                s[k, j] += ca * cb * math.sqrt(fact[n - k] * fact[k]) / norm_in
    return s


def apply_single_mode(s: PureState, m, u) -> PureState:
    """Apply a polarization unitary to every photon in spatial mode ``m``.

    The plate acts on all distinguishability tags alike. ``u`` maps H to its
    first column and V to its second.
    """
    sid = _mode_id(m)
    u = check_unitary(u)
    if sid not in s.modes:
        raise ValidationError(f"mode {sid} not in state")
    cache: dict[int, np.ndarray] = {}
    out: dict[Term, complex] = {}
    for term, amp in s.items():
        rest = [e for e in term if e[0] != sid]
        by_tag: dict[int, list[int]] = {}
        for e in term:
            if e[0] == sid:
                by_tag.setdefault(e[2], [0, 0])[e[1]] += e[3]
        partial = [(tuple(rest), amp)]
        for tag, (nh, nv) in sorted(by_tag.items()):
            n = nh + nv
            if n not in cache:
                cache[n] = symmetric_power(u, n)
            col = cache[n][:, nv]
            nxt = []
            for t, a in partial:
                for k in range(n + 1):
                    c = col[k]
                    if c != 0:
                        nxt.append((t + ((sid, H, tag, n - k), (sid, V, tag, k)), a * c))
            partial = nxt
        for t, a in partial:
            t = _canon(t)
            out[t] = out.get(t, 0j) + a
    return PureState(out, s.modes)


def project(s: PureState, keep: Callable[[Term], bool]) -> tuple[PureState, float]:
    """Keep terms satisfying ``keep``; return the renormalized state and kept mass.

    The mass is relative to the input norm. If nothing survives the state is
    the empty marker and the probability is 0.
    """
    kept = {t: a for t, a in s.items() if keep(t)}
    mass = math.fsum(abs(a) ** 2 for a in kept.values())
    if mass <= 0.0:
        return PureState.empty(s.modes), 0.0
    prob = mass / s.norm2 if s.norm2 > 0 else 0.0
    return normalize(PureState(kept, s.modes)), min(prob, 1.0)


# Common one-photon maps

def half_wave_plate(angle_deg: float) -> np.ndarray:
    c, s = math.cos(math.radians(2 * angle_deg)), math.sin(math.radians(2 * angle_deg))
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


def phase_plate(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)])


HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)


class EnsembleState:
    """Weighted mixture of pure states; weights renormalized on construction."""

    __slots__ = ("_branches",)

    def __init__(self, branches: Iterable[tuple[float, PureState]]):
        kept = [(float(w), st) for w, st in branches]
        if any(w < 0 for w, _ in kept):
            raise ValidationError("ensemble weights must be nonnegative")
        total = math.fsum(w for w, _ in kept)
        if total <= 0:
            raise DegenerateStateError("ensemble has no weight")
        kept = [(w / total, st) for w, st in kept if w / total >= 1e-12]
        total = math.fsum(w for w, _ in kept)
        self._branches = tuple((w / total, st) for w, st in kept)

    @classmethod
    def pure(cls, s: PureState) -> "EnsembleState":
        return cls([(1.0, s)])

    @property
    def branches(self) -> tuple[tuple[float, PureState], ...]:
        return self._branches

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self._branches])

    def __len__(self):
        return len(self._branches)

    def __iter__(self):
        return iter(self._branches)

    def __repr__(self):
        return f"EnsembleState({len(self)} branches, weights={np.round(self.weights, 6).tolist()})"

    def fidelity(self, target: PureState) -> float:
        """<target| rho |target>."""
        return math.fsum(w * abs(target.inner(st)) ** 2 for w, st in self._branches)
