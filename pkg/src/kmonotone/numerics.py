"""Divided differences, Newton interpolation and exact sign predicates.

Nodes are either simple points or confluent nodes lying on the graph of
``x**k``.  A confluent node of multiplicity ``beta`` stands for ``beta``
coincident copies of ``(x, x**k)``; windows made only of such copies use
the derivative formula ``f^(j)(x) / j! = C(k, j) x**(k - j)``.

Every routine works either in float arithmetic or exactly over
:class:`fractions.Fraction`.  Floats are dyadic rationals, so lifting them
with ``Fraction(x)`` is lossless and the exact mode is a true ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .errors import InvalidInputError

__all__ = [
    "Point",
    "Node",
    "gamma",
    "flatten",
    "point_entry",
    "gamma_entry",
    "sign_entries",
    "diff_table",
    "divided_difference",
    "sign_of_tuple",
    "newton_eval",
    "is_general_position",
    "FALLBACK_RELATIVE",
]

# Float results with |value| below this fraction of the table scale are
# re-decided exactly.
FALLBACK_RELATIVE = 1e-9

_U = 2.0 ** -53


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Node:
    """A point of a multiset chain.

    ``k`` is the generator degree: when set, the node lies on the graph of
    ``x**k`` and ``y`` is ignored in favour of ``x**k``.  Multiplicity above
    one requires a generator.
    """

    x: float
    y: Optional[float] = None
    multiplicity: int = 1
    k: Optional[int] = None

    def __post_init__(self):
        if not math.isfinite(self.x):
            raise InvalidInputError(f"non-finite abscissa {self.x!r}")
        if self.multiplicity < 1:
            raise InvalidInputError("multiplicity must be >= 1")
        if self.k is None:
            if self.multiplicity > 1:
                raise InvalidInputError(
                    "a node of multiplicity > 1 needs a generator degree k"
                )
            if self.y is None or not math.isfinite(self.y):
                raise InvalidInputError(f"non-finite ordinate {self.y!r}")
        else:
            if self.k < 0:
                raise InvalidInputError("generator degree must be >= 0")
            if self.multiplicity > self.k + 1:
                raise InvalidInputError(
                    f"multiplicity {self.multiplicity} exceeds k={self.k}"
                )

    @property
    def ordinate(self) -> float:
        return self.x ** self.k if self.k is not None else self.y


def gamma(k: int, x: float, multiplicity: int = 1) -> Node:
    """The point ``(x, x**k)`` of the curve Gamma_k, possibly repeated."""
    return Node(x=x, multiplicity=multiplicity, k=k)


NodeLike = Union[Node, Point, Sequence[float]]


def _as_node(item: NodeLike) -> Node:
    if isinstance(item, Node):
        return item
    x, y = item
    return Node(x=float(x), y=float(y))


class _Entry(NamedTuple):
    # one slot of the flattened multiset
    x: float
    y: Optional[float]
    k: Optional[int]
    node: int


def point_entry(x: float, y: float, tag: int = 0) -> _Entry:
    """A flattened simple point; ``tag`` identifies its node."""
    return _Entry(x, y, None, tag)


def gamma_entry(k: int, x: float, tag: int = 0) -> _Entry:
    """One flattened copy of the confluent node gamma_k(x)."""
    return _Entry(x, None, k, tag)


def flatten(nodes: Iterable[NodeLike]) -> list:
    """Expand multiplicities, keeping input order.

    Distinct nodes must have distinct abscissae.
    """
    out = []
    seen = set()
    for idx, item in enumerate(nodes):
        node = _as_node(item)
        if node.x in seen:
            raise InvalidInputError(f"duplicate abscissa {node.x!r}")
        seen.add(node.x)
        for _ in range(node.multiplicity):
            out.append(_Entry(node.x, node.y, node.k, idx))
    return out


def _confluent_float(x: float, k: int, j: int) -> float:
    if j > k:
        return 0.0
    return math.comb(k, j) * x ** (k - j)


def _confluent_exact(x: Fraction, k: int, j: int) -> Fraction:
    if j > k:
        return Fraction(0)
    return math.comb(k, j) * x ** (k - j)


def _table(entries, exact: bool, depth: Optional[int] = None):
    """Triangular table ``T[j][i] = Delta_j(entries[i..i+j])``.

    In float mode also returns a parallel table of absolute error bounds.
    """
    n = len(entries)
    depth = n - 1 if depth is None else depth
    if exact:
        xs = [Fraction(e.x) for e in entries]
        col = [
            Fraction(e.x) ** e.k if e.k is not None else Fraction(e.y)
            for e in entries
        ]
        table = [col]
        for j in range(1, depth + 1):
            prev = table[-1]
            nxt = []
            for i in range(n - j):
                if entries[i].x == entries[i + j].x:
                    nxt.append(_confluent_exact(xs[i], entries[i].k, j))
                else:
                    nxt.append((prev[i + 1] - prev[i]) / (xs[i + j] - xs[i]))
            table.append(nxt)
        return table, None

    col, err = [], []
    for e in entries:
        if e.k is not None:
            v = e.x ** e.k
            col.append(v)
            err.append(abs(v) * (e.k + 1) * _U)
        else:
            col.append(e.y)
            err.append(0.0)
    table, errs = [col], [err]
    for j in range(1, depth + 1):
        prev, perr = table[-1], errs[-1]
        nxt, nerr = [], []
        for i in range(n - j):
            a, b = entries[i], entries[i + j]
            if a.x == b.x:
                v = _confluent_float(a.x, a.k, j)
                nxt.append(v)
                nerr.append(abs(v) * (a.k + 2) * _U)
            else:
                num = prev[i + 1] - prev[i]
                gap = b.x - a.x
                v = num / gap
                nxt.append(v)
                nerr.append(
                    (perr[i] + perr[i + 1] + _U * abs(num)) / abs(gap)
                    + 4 * _U * abs(v)
                )
        table.append(nxt)
        errs.append(nerr)
    return table, errs


def _check_window(entries):
    # equal abscissae are only meaningful for copies of one confluent node
    for i in range(len(entries) - 1):
        if entries[i].x == entries[i + 1].x and entries[i].k is None:
            raise InvalidInputError("repeated abscissa without generator")
    ks = {e.k for e in entries if e.k is not None}
    if len(ks) > 1:
        raise InvalidInputError(f"mixed generator degrees {sorted(ks)}")


def diff_table(nodes: Iterable[NodeLike], exact: bool = False) -> list:
    """Full divided-difference table over the flattened nodes, in input order.

    ``table[j][i]`` is Delta_j over flattened positions ``i..i+j``.
    """
    entries = flatten(nodes)
    _check_window(entries)
    return _table(entries, exact)[0]


def _sorted_entries(nodes) -> list:
    entries = flatten(nodes)
    entries.sort(key=lambda e: e.x)
    _check_window(entries)
    return entries


def divided_difference(nodes: Iterable[NodeLike], order: int, exact: bool = False):
    """Delta_order of a window of exactly ``order + 1`` flattened nodes.

    The value is symmetric in its nodes, so the input need not be sorted.
    Returns a float, or a Fraction when ``exact`` is true.
    """
    if order < 0:
        raise InvalidInputError("order must be >= 0")
    entries = _sorted_entries(nodes)
    if len(entries) != order + 1:
        raise InvalidInputError(
            f"window has {len(entries)} flattened nodes, expected {order + 1}"
        )
    table, _ = _table(entries, exact)
    return table[order][0]


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def sign_entries(entries) -> int:
    """Sign of the top divided difference of pre-sorted flattened entries."""
    order = len(entries) - 1
    table, errs = _table(entries, exact=False)
    v = table[order][0]
    scale = max(abs(t) for col in table for t in col)
    if math.isfinite(v) and abs(v) > errs[order][0] and abs(v) > FALLBACK_RELATIVE * scale:
        return _sign(v)
    exact_table, _ = _table(entries, exact=True)
    return _sign(exact_table[order][0])


def sign_of_tuple(nodes: Iterable[NodeLike], k: int) -> int:
    """Exact sign (-1, 0 or +1) of Delta_k over ``k + 1`` flattened nodes.

    A float pass decides the sign whenever its certified error bound and the
    relative cut-off both clear zero; anything closer is recomputed exactly.
    """
    entries = _sorted_entries(nodes)
    if len(entries) != k + 1:
        raise InvalidInputError(
            f"window has {len(entries)} flattened nodes, expected {k + 1}"
        )
    return sign_entries(entries)


def newton_eval(nodes: Iterable[NodeLike], x, exact: bool = False):
    """Evaluate the Newton (Hermite) interpolant of the nodes at ``x``.

    Nodes are taken in the given order; a confluent node contributes its
    abscissa to the product once per unit of multiplicity.
    """
    if isinstance(x, float) and not math.isfinite(x):
        raise InvalidInputError(f"non-finite evaluation point {x!r}")
    entries = flatten(nodes)
    if not entries:
        raise InvalidInputError("newton_eval needs at least one node")
    for i in range(len(entries) - 1):
        if entries[i].x == entries[i + 1].x and entries[i].k is None:
            raise InvalidInputError("repeated abscissa without generator")
    table, _ = _table(entries, exact)
    if exact:
        x = Fraction(x)
        xs = [Fraction(e.x) for e in entries]
    else:
        x = float(x)
        xs = [e.x for e in entries]
    # Horner on the Newton form
    acc = table[len(entries) - 1][0]
    for j in range(len(entries) - 2, -1, -1):
        acc = acc * (x - xs[j]) + table[j][0]
    return acc


def is_general_position(points: Sequence[NodeLike], k: int) -> bool:
    """True iff the ``k + 1`` points do not lie on a polynomial of degree < k."""
    pts = [_as_node(p) for p in points]
    if len({p.x for p in pts}) != len(pts):
        raise InvalidInputError("duplicate abscissae")
    return sign_of_tuple(pts, k) != 0
