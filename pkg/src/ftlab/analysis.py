"""Postselected decoding and the fault-tolerance verdict.

Backends produce raw outcome distributions; this module reduces them to the
quantities the criterion is stated in: the postselection ratio r, the
statistical distances d_bare and d_enc against the two-qubit target, and the
strict all-circuits comparison.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .circuits import LogicalCircuit
from .errors import DataIntegrityError, DomainError, ParseError, PostselectionError
from .statevector import Distribution, theory_distribution


def _postselection_table(decode: str):
    """Kept 5-bit strings and the logical outcome each one maps to."""
    kept = []
    target = []
    for s in range(32):
        if (s >> 4) & 1:
            continue
        q1, q2, q3, q4 = (s >> 3) & 1, (s >> 2) & 1, (s >> 1) & 1, s & 1
        if (q1 + q2 + q3 + q4) % 2:
            continue
        kept.append(s)
        if decode == "xor":
            b1, b2 = q1 ^ q2, q1 ^ q3
        else:
            b1, b2 = q3, q4
        target.append(2 * b1 + b2)
    return np.array(kept), np.array(target)


# decode="xor" reads the logical bits off any codeword half consistently;
# "q3q4" is the literal two-bit readout, kept selectable for comparison even
# though it splits codeword halves across different logical outcomes.
_TABLES = {name: _postselection_table(name) for name in ("xor", "q3q4")}


@dataclass(frozen=True)
class PostselectionResult:
    logical_dist: Distribution
    ratio: float


@dataclass(frozen=True)
class FtRecord:
    """Distances and postselection ratio for one circuit."""

    circuit_id: int | None
    d_bare: float
    d_enc: float
    ratio: float
    backend: str = ""
    config_digest: str = ""

    def __post_init__(self):
        for name in ("d_bare", "d_enc", "ratio"):
            v = getattr(self, name)
            if not (-1e-12 <= v <= 1 + 1e-12):
                raise DomainError(f"{name} = {v} outside [0, 1]")


@dataclass(frozen=True)
class FtReport:
    records: tuple[FtRecord, ...]
    percentage_p: float = field(init=False)
    criterion_pass: bool = field(init=False)

    def __post_init__(self):
        if not self.records:
            raise DomainError("report needs at least one record")
        better = sum(1 for r in self.records if r.d_enc < r.d_bare)
        object.__setattr__(self, "percentage_p", 100.0 * better / len(self.records))
        object.__setattr__(self, "criterion_pass", better == len(self.records))


def postselect_decode(d: Distribution, decode: str = "xor") -> PostselectionResult:
    """Discard ancilla-fired and odd-parity strings, decode the rest.

    A string survives when q0 = 0 and q1q2q3q4 has even weight; the logical
    bits are then b1 = q1 xor q2 and b2 = q1 xor q3.  Raises
    PostselectionError when nothing survives.
    """
    if d.width != 5:
        raise DomainError(f"postselection needs a width-5 distribution, got {d.width}")
    if decode not in _TABLES:
        raise DomainError(f"unknown decode rule {decode!r}")
    kept, target = _TABLES[decode]
    kept_probs = d.probs[kept]
    ratio = float(kept_probs.sum())
    if ratio <= 0.0:
        raise PostselectionError("postselection discarded all probability mass")
    logical = np.bincount(target, weights=kept_probs, minlength=4)
    return PostselectionResult(Distribution(2, logical / ratio), ratio)


def statistical_distance(p: Distribution, q: Distribution) -> float:
    """Half the l1 distance between two outcome distributions."""
    if p.width != q.width:
        raise DomainError(f"width mismatch: {p.width} vs {q.width}")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def apply_readout_error(d: Distribution, p_flip: float) -> Distribution:
    """Convolve with independent symmetric bit flips of probability p_flip."""
    if not 0.0 <= p_flip <= 0.5:
        raise DomainError(f"p_flip = {p_flip} outside [0, 0.5]")
    if p_flip == 0.0:
        return d
    m = np.array([[1.0 - p_flip, p_flip], [p_flip, 1.0 - p_flip]])
    t = d.probs.reshape((2,) * d.width)
    for axis in range(d.width):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [axis])), 0, axis)
    return Distribution(d.width, t.reshape(-1))


def evaluate_circuit(
    c: LogicalCircuit,
    bare_d: Distribution,
    enc_d: Distribution,
    p_flip: float | None = None,
    *,
    backend: str = "",
    config_digest: str = "",
) -> FtRecord:
    """Reduce one circuit's bare and encoded distributions to an FtRecord.

    Readout error, when requested, hits the raw five-bit data before
    postselection and the bare two-bit data directly.
    """
    if bare_d.width != 2:
        raise DomainError(f"bare distribution must have width 2, got {bare_d.width}")
    if enc_d.width != 5:
        raise DomainError(f"encoded distribution must have width 5, got {enc_d.width}")
    if p_flip is not None:
        bare_d = apply_readout_error(bare_d, p_flip)
        enc_d = apply_readout_error(enc_d, p_flip)
    ps = postselect_decode(enc_d)
    th = theory_distribution(c)
    return FtRecord(
        circuit_id=c.id,
        d_bare=statistical_distance(bare_d, th),
        d_enc=statistical_distance(ps.logical_dist, th),
        ratio=ps.ratio,
        backend=backend,
        config_digest=config_digest,
    )


def build_report(records) -> FtReport:
    """Aggregate records; the verdict needs strict d_enc < d_bare everywhere."""
    return FtReport(tuple(records))


class ImportedCounts(NamedTuple):
    circuit_id: int
    dist: Distribution
    shots: int


def _counts_record(doc, line_no: int) -> ImportedCounts:
    if not isinstance(doc, dict):
        raise DataIntegrityError(f"line {line_no}: expected a JSON object")
    try:
        circuit_id = doc["id"]
        width = doc["width"]
        counts = doc["counts"]
    except KeyError as exc:
        raise DataIntegrityError(f"line {line_no}: missing field {exc}") from None
    if not isinstance(circuit_id, int) or isinstance(circuit_id, bool):
        raise DataIntegrityError(f"line {line_no}: id must be an integer")
    if not isinstance(width, int) or not 1 <= width <= 16:
        raise DataIntegrityError(f"line {line_no}: bad width {width!r}")
    if not isinstance(counts, dict) or not counts:
        raise DataIntegrityError(f"line {line_no}: counts must be a nonempty object")
    probs = np.zeros(2**width)
    total = 0
    for bits, n in counts.items():
        if len(bits) != width or set(bits) - {"0", "1"}:
            raise DataIntegrityError(f"line {line_no}: bad bitstring {bits!r}")
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            raise DataIntegrityError(f"line {line_no}: bad count for {bits!r}: {n!r}")
        probs[int(bits, 2)] += n
        total += n
    if total == 0:
        raise DataIntegrityError(f"line {line_no}: zero total counts")
    if "meta" in doc and not isinstance(doc["meta"], dict):
        raise DataIntegrityError(f"line {line_no}: meta must be an object")
    return ImportedCounts(circuit_id, Distribution(width, probs / total), total)


def import_counts(source) -> list[ImportedCounts]:
    """Read measured counts into normalized distributions.

    Accepts a single document as a dict, or a path/file with one JSON object
    per line: {"id": int, "width": int, "counts": {bitstring: int}, ...}.
    Bit order matches the simulators: q0...q4 encoded, q3q4 bare.
    """
    if isinstance(source, dict):
        return [_counts_record(source, 1)]
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = source.readlines()
    records = []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {i}: {exc.msg}", position=exc.pos) from None
        records.append(_counts_record(doc, i))
    if not records:
        raise DataIntegrityError("counts source contains no records")
    return records
