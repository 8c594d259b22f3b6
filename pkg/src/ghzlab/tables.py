"""Measurement settings, count tables and their CSV form.

CSV layout: header ``setting,outcome,count``; the setting column holds ``HV``
or ``theta=k/N`` (the angle k*pi/N); one row per outcome with a nonzero
count; UTF-8, LF line endings.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .errors import ValidationError

HEADER = ("setting", "outcome", "count")
ROTATED, HV = "rotated", "hv"


def canonical_outcome(s: str) -> str:
    return s.strip().replace("−", "-")


@dataclass(frozen=True)
class MeasurementSetting:
    """Either the computational H/V basis or the rotated basis at ``theta``.

    ``theta`` must lie in [0, pi). Rotated settings built from a rational
    multiple of pi keep that fraction so they can be written back exactly.
    """
    n_photons: int
    theta: float = 0.0
    kind: str = ROTATED
    fraction: Fraction | None = None

    def __post_init__(self):
        if self.n_photons < 1:
            raise ValidationError("n_photons must be positive")
        if self.kind not in (ROTATED, HV):
            raise ValidationError(f"unknown basis kind {self.kind!r}")
        if self.kind == HV:
            object.__setattr__(self, "theta", 0.0)
            object.__setattr__(self, "fraction", None)
            return
        if self.fraction is not None:
            object.__setattr__(self, "fraction", Fraction(self.fraction))
            object.__setattr__(self, "theta", float(self.fraction) * math.pi)
        if not 0.0 <= self.theta < math.pi:
            raise ValidationError(f"theta={self.theta} outside [0, pi)")

    @classmethod
    def hv(cls, n_photons: int) -> "MeasurementSetting":
        return cls(n_photons, kind=HV)

    @classmethod
    def angle(cls, k: int, n_photons: int, denominator: int | None = None) -> "MeasurementSetting":
        """Rotated basis at k*pi/denominator (denominator defaults to n_photons)."""
        return cls(n_photons, fraction=Fraction(k, denominator or n_photons))

    @property
    def symbols(self) -> str:
        return "HV" if self.kind == HV else "+-"

    @property
    def label(self) -> str:
        if self.kind == HV:
            return "HV"
        frac = self.fraction if self.fraction is not None else Fraction(self.theta / math.pi).limit_denominator(10**6)
        if self.fraction is None and abs(float(frac) * math.pi - self.theta) > 1e-12:
            raise ValidationError(f"theta={self.theta} is not a rational multiple of pi")
        # keep the denominator equal to N when it divides, matching k/N labels
        if frac.denominator != self.n_photons and (self.n_photons * frac).denominator == 1:
            return f"theta={int(frac * self.n_photons)}/{self.n_photons}"
        return f"theta={frac.numerator}/{frac.denominator}"

    @property
    def k(self) -> int | None:
        """Index k when the angle is k*pi/N, else None."""
        if self.kind == HV or self.fraction is None:
            return None
        x = self.fraction * self.n_photons
        return int(x) if x.denominator == 1 else None

    @classmethod
    def from_label(cls, text: str, n_photons: int) -> "MeasurementSetting":
        text = text.strip()
        if text == "HV":
            return cls.hv(n_photons)
        if text.startswith("theta="):
            try:
                num, den = text[6:].split("/")
                return cls(n_photons, fraction=Fraction(int(num), int(den)))
            except (ValueError, ZeroDivisionError):
                pass
        raise ValidationError(f"unknown setting {text!r}")


@dataclass(frozen=True)
class CountTable:
    setting: MeasurementSetting
    counts: Mapping[str, int] = field(default_factory=dict)
    duration_s: float | None = None

    def __post_init__(self):
        n, sym = self.setting.n_photons, self.setting.symbols
        clean = {}
        for outcome, c in self.counts.items():
            o = canonical_outcome(outcome)
            if len(o) != n or any(ch not in sym for ch in o):
                raise ValidationError(f"outcome {outcome!r} invalid for {n} photons over {sym!r}")
            if int(c) != c or c < 0:
                raise ValidationError(f"count for {o} must be a nonnegative integer, got {c}")
            if o in clean:
                raise ValidationError(f"duplicate outcome {o}")
            clean[o] = int(c)
        object.__setattr__(self, "counts", dict(sorted(clean.items())))

    @property
    def n_photons(self) -> int:
        return self.setting.n_photons

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, outcome: str) -> int:
        return self.counts.get(canonical_outcome(outcome), 0)

    def parity_counts(self) -> tuple[int, int]:
        """Counts aggregated by eigenvalue: (n_plus, n_minus)."""
        odd_sym = self.setting.symbols[1]
        plus = minus = 0
        for o, c in self.counts.items():
            if o.count(odd_sym) % 2:
                minus += c
            else:
                plus += c
        return plus, minus

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        label = self.setting.label
        for o, c in self.counts.items():
            if c:
                w.writerow((label, o, c))
        return buf.getvalue()


def parse_count_table(path, n_photons: int | None = None) -> CountTable:
    """Read and validate a count-table CSV. Duplicate outcomes are an error."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    return count_table_from_csv(text, n_photons, source=str(path))


def count_table_from_csv(text: str, n_photons: int | None = None, source: str = "<csv>") -> CountTable:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != HEADER:
        raise ValidationError(f"{source}: header must be {','.join(HEADER)}")
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    if not body:
        raise ValidationError(f"{source}: empty table")
    labels, counts = set(), {}
    for i, row in enumerate(body, start=2):
        if len(row) != 3:
            raise ValidationError(f"{source}:{i}: expected 3 fields, got {len(row)}")
        label, outcome, count = (c.strip() for c in row)
        outcome = canonical_outcome(outcome)
        try:
            count = int(count)
        except ValueError:
            raise ValidationError(f"{source}:{i}: count {count!r} is not an integer") from None
        if count < 0:
            raise ValidationError(f"{source}:{i}: negative count")
        if outcome in counts:
            raise ValidationError(f"{source}:{i}: duplicate outcome {outcome}")
        labels.add(label)
        counts[outcome] = count
    if len(labels) != 1:
        raise ValidationError(f"{source}: mixed settings {sorted(labels)}")
    lengths = {len(o) for o in counts}
    if len(lengths) != 1:
        raise ValidationError(f"{source}: inconsistent outcome lengths {sorted(lengths)}")
    n = lengths.pop()
    if n_photons is not None and n != n_photons:
        raise ValidationError(f"{source}: outcomes have {n} photons, expected {n_photons}")
    setting = MeasurementSetting.from_label(labels.pop(), n)
    return CountTable(setting, counts)


def write_count_table(table: CountTable, path) -> None:
    Path(path).write_bytes(table.to_csv().encode("utf-8"))
