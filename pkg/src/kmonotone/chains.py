"""Chains, boundary chains and the two k-monotonicity validators."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence, Tuple

from .errors import GuardrailError, InvalidInputError
from .numerics import Point, gamma_entry, point_entry, sign_entries

__all__ = [
    "Chain",
    "BoundaryChain",
    "ValidationReport",
    "validate_windows",
    "validate_exhaustive",
    "nesting_check",
    "lower_order_check",
    "EXHAUSTIVE_MAX_LENGTH",
    "load_chain",
    "chain_to_json",
    "points_to_csv",
]

EXHAUSTIVE_MAX_LENGTH = 40

# tags used in flattened sequences for the two boundary nodes
LEFT, RIGHT = -1, -2


def _as_points(points) -> Tuple[Point, ...]:
    out = []
    for p in points:
        x, y = float(p[0]), float(p[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidInputError(f"non-finite point {p!r}")
        out.append(Point(x, y))
    return tuple(out)


@dataclass(frozen=True)
class Chain:
    """Points with strictly increasing abscissae."""

    points: Tuple[Point, ...] = ()

    def __post_init__(self):
        pts = _as_points(self.points)
        for p, q in zip(pts, pts[1:]):
            if not p.x < q.x:
                raise InvalidInputError(
                    f"abscissae must strictly increase ({p.x!r} then {q.x!r})"
                )
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class BoundaryChain:
    """The multiset chain (gamma_k(a)^k, p_1, ..., p_m, gamma_k(b)^k)."""

    k: int
    a: float
    b: float
    interior: Chain = field(default_factory=Chain)

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise InvalidInputError(f"need finite a < b, got ({self.a!r}, {self.b!r})")
        interior = self.interior
        if not isinstance(interior, Chain):
            interior = Chain(tuple(interior))
            object.__setattr__(self, "interior", interior)
        for p in interior:
            if not self.a < p.x < self.b:
                raise InvalidInputError(
                    f"interior point {tuple(p)} not strictly inside ({self.a}, {self.b})"
                )

    @property
    def flat_length(self) -> int:
        return len(self.interior) + 2 * self.k

    def entries(self) -> list:
        """Flattened node sequence of length m + 2k."""
        k = self.k
        seq = [gamma_entry(k, self.a, LEFT)] * k
        seq += [point_entry(p.x, p.y, i) for i, p in enumerate(self.interior)]
        seq += [gamma_entry(k, self.b, RIGHT)] * k
        return seq


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a validator.

    ``first_failing_window`` is a half-open range of flattened positions
    (boundary copies included) covering the leftmost failing tuple.
    """

    valid: bool
    degenerate: bool = False
    first_failing_window: Optional[Tuple[int, int]] = None

    def __bool__(self):
        return self.valid


def validate_windows(chain: BoundaryChain) -> ValidationReport:
    """Check every run of k + 1 consecutive flattened nodes."""
    k = chain.k
    seq = chain.entries()
    degenerate = False
    for start in range(len(seq) - k):
        s = sign_entries(seq[start:start + k + 1])
        if s < 0:
            return ValidationReport(False, degenerate, (start, start + k + 1))
        if s == 0:
            degenerate = True
    return ValidationReport(True, degenerate)


def validate_exhaustive(chain: BoundaryChain) -> ValidationReport:
    """Check every (k + 1)-element sub-multiset of the flattened sequence.

    Boundary copies are interchangeable, so each distinct sub-multiset is
    tested once.  This is the brute-force oracle for :func:`validate_windows`.
    """
    if chain.flat_length > EXHAUSTIVE_MAX_LENGTH:
        raise GuardrailError(
            f"flattened length {chain.flat_length} exceeds {EXHAUSTIVE_MAX_LENGTH}"
        )
    k = chain.k
    seq = chain.entries()
    seen = set()
    degenerate = False
    for combo in combinations(range(len(seq)), k + 1):
        key = tuple(seq[i].node for i in combo)
        if key in seen:
            continue
        seen.add(key)
        s = sign_entries([seq[i] for i in combo])
        if s < 0:
            return ValidationReport(False, degenerate, (combo[0], combo[-1] + 1))
        if s == 0:
            degenerate = True
    return ValidationReport(True, degenerate)


def nesting_check(chain: BoundaryChain, j: int) -> bool:
    """Window verdict for the same interior at order j with gamma_j endpoints."""
    if not 1 <= j <= chain.k:
        raise InvalidInputError(f"j must lie in [1, {chain.k}], got {j}")
    return validate_windows(BoundaryChain(j, chain.a, chain.b, chain.interior)).valid


def lower_order_check(chain: BoundaryChain, j: int) -> bool:
    """Are all consecutive (j + 1)-windows of the chain's own multiset positive?

    Unlike :func:`nesting_check` the boundary copies stay gamma_k(a)^k and
    gamma_k(b)^k.  For a valid chain this always holds: the j-th differences
    of consecutive windows increase from 0 at the left end.  Re-reading the
    chain with gamma_j endpoints is a stronger condition that can fail for
    j >= 2 (the right-end tangent data of x^k and x^j differ).
    """
    if not 1 <= j <= chain.k:
        raise InvalidInputError(f"j must lie in [1, {chain.k}], got {j}")
    seq = chain.entries()
    return all(sign_entries(seq[s:s + j + 1]) >= 0 for s in range(len(seq) - j))


# --- file formats ----------------------------------------------------------

def _read_csv_points(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:2]] != ["x", "y"]:
        raise InvalidInputError('CSV input needs the header "x,y"')
    return [(float(row["x"]), float(row["y"])) for row in reader]


def load_points(path) -> Tuple[list, dict]:
    """Read points from a chain JSON or an ``x,y`` CSV file.

    Returns ``(points, meta)`` where ``meta`` holds any of k, a, b found in
    the file.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return _read_csv_points(text), {}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(doc, list):
        return [tuple(p) for p in doc], {}
    if "points" not in doc:
        raise InvalidInputError(f"{path}: missing 'points'")
    meta = {key: doc[key] for key in ("k", "a", "b") if key in doc}
    return [tuple(p) for p in doc["points"]], meta


def load_chain(path, k: Optional[int] = None, a: Optional[float] = None,
               b: Optional[float] = None) -> BoundaryChain:
    """Load a BoundaryChain; explicit arguments override values in the file."""
    points, meta = load_points(path)
    k = k if k is not None else meta.get("k")
    a = a if a is not None else meta.get("a", 0.0)
    b = b if b is not None else meta.get("b", 1.0)
    if k is None:
        raise InvalidInputError("chain order k not given")
    points = sorted(points)
    return BoundaryChain(int(k), float(a), float(b), Chain(points))


def chain_to_json(chain: BoundaryChain) -> dict:
    return {
        "k": chain.k,
        "a": chain.a,
        "b": chain.b,
        "points": [[p.x, p.y] for p in chain.interior],
    }


def points_to_csv(points: Sequence) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "y"])
    for p in points:
        writer.writerow([repr(float(p[0])), repr(float(p[1]))])
    return buf.getvalue()
