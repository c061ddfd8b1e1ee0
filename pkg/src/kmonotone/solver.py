"""Exact longest k-monotone chains under the boundary condition.

The objective is the largest m such that (gamma_k(a)^k, p_1..p_m,
gamma_k(b)^k) is k-monotone.  By transitivity it is enough to check
consecutive (k + 1)-windows, which makes the problem a longest path over
states "last k chain points".

Solvers:

* :func:`solve_dp` - exact DP over k-tuple states (any k).  For k = 2 a
  numpy-vectorised version of the same recursion is used by default.
* :func:`solve_brute` - enumerate subsets; oracle for the DP.
* :func:`solve_lis` - patience sorting, k = 1 only.
* :func:`solve_greedy_cells` - one point per occupied sub-cell.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .cells import CONTAINS_TOL, Cell, contains_exact
from .chains import BoundaryChain, Chain, LEFT, RIGHT, validate_windows
from .errors import BudgetExceededError, GuardrailError, InvalidInputError
from .sampling import in_cell_mask
from .numerics import FALLBACK_RELATIVE, Point, gamma_entry, point_entry, sign_entries

__all__ = [
    "SolveResult",
    "solve_dp",
    "solve_brute",
    "solve_lis",
    "solve_greedy_cells",
    "concatenate",
    "solve",
    "DEFAULT_BUDGET",
    "BRUTE_MAX_POINTS",
    "K2_MAX_POINTS",
]

DEFAULT_BUDGET = 50_000_000
BRUTE_MAX_POINTS = 14
# the k = 2 engine holds two (N + 1) x N int64 tables
K2_MAX_POINTS = 6000

_U = 2.0 ** -53
_NEG = -1  # "no valid completion" marker for integer DP tables


@dataclass
class SolveResult:
    length: int
    witness: Chain
    method: str
    states_explored: int = 0
    degenerate_seen: bool = False
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "length": self.length,
            "witness": [[p.x, p.y] for p in self.witness],
            "method": self.method,
            "states_explored": self.states_explored,
        }


def _candidate_array(points, k: int, a: float, b: float) -> np.ndarray:
    """Points that can appear in some chain, as an (N, 2) array sorted by (x, y).

    A point outside C_k(a, b) never belongs to a valid chain, so dropping
    it does not change the optimum.  The filter is the tolerant float test;
    the windows themselves are decided exactly later.
    """
    if not a < b:
        raise InvalidInputError("need a < b")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not np.isfinite(pts).all():
        raise InvalidInputError("non-finite point")
    keep = (pts[:, 0] > a) & (pts[:, 0] < b)
    if a >= 0:
        keep &= in_cell_mask(Cell(k, a, b), pts, CONTAINS_TOL)
    pts = pts[keep]
    return pts[np.lexsort((pts[:, 1], pts[:, 0]))]


def _candidates(points, k: int, a: float, b: float) -> list:
    return [Point(x, y) for x, y in _candidate_array(points, k, a, b).tolist()]


class _Windows:
    """Sign oracle for windows built from DP states (shared by every solver)."""

    def __init__(self, pts, k, a, b):
        self.k = k
        self.left = gamma_entry(k, a, LEFT)
        self.right = gamma_entry(k, b, RIGHT)
        self.entries = [point_entry(p.x, p.y, i) for i, p in enumerate(pts)]
        self.degenerate = False

    def entry(self, s):
        return self.left if s < 0 else self.entries[s]

    def _check(self, window) -> bool:
        s = sign_entries(window)
        if s == 0:
            self.degenerate = True
        return s >= 0

    def step(self, state, p) -> bool:
        return self._check([self.entry(s) for s in state] + [self.entries[p]])

    def terminal(self, state) -> bool:
        k = self.k
        tail = [self.entry(s) for s in state]
        for j in range(1, k + 1):
            if not self._check(tail[j - 1:] + [self.right] * j):
                return False
        return True


def _solve_generic(pts, k, a, b, budget):
    """Reverse DP: best[state] = longest valid completion after ``state``.

    Iterative DFS with memoisation over the states reachable from the
    all-boundary start.  Each window evaluation counts against ``budget``.
    """
    win = _Windows(pts, k, a, b)
    xs = [p.x for p in pts]
    n = len(pts)
    best, choice = {}, {}
    start = (-1,) * k
    transitions = 0
    lower = 0

    def successors(state):
        last = state[-1]
        lo = 0 if last < 0 else bisect_right(xs, xs[last])
        return iter(range(lo, n))

    # frame: [state, successor iterator, best value, best next point]
    stack = [[start, successors(start), 0 if win.terminal(start) else _NEG, None]]
    while stack:
        frame = stack[-1]
        state, it = frame[0], frame[1]
        pushed = False
        for p in it:
            transitions += 1
            if transitions > budget:
                raise BudgetExceededError(
                    f"DP exceeded its budget of {budget} transitions",
                    lower_bound=lower,
                    states_explored=len(best),
                )
            if not win.step(state, p):
                continue
            nxt = state[1:] + (p,)
            if nxt in best:
                if best[nxt] >= 0 and best[nxt] + 1 > frame[2]:
                    frame[2], frame[3] = best[nxt] + 1, p
                continue
            frame.append(p)  # remember which edge is pending
            stack.append([nxt, successors(nxt), 0 if win.terminal(nxt) else _NEG, None])
            pushed = True
            break
        if pushed:
            continue
        stack.pop()
        best[state] = frame[2]
        choice[state] = frame[3]
        depth = len(stack)
        if frame[2] >= 0:
            lower = max(lower, depth + frame[2])
        if stack:
            parent = stack[-1]
            p = parent.pop()  # pending edge
            if frame[2] >= 0 and frame[2] + 1 > parent[2]:
                parent[2], parent[3] = frame[2] + 1, p

    witness, state = [], start
    while choice.get(state) is not None:
        p = choice[state]
        witness.append(pts[p])
        state = state[1:] + (p,)
    return best[start], witness, len(best), win.degenerate


def _slopes(x0, y0, e0, x1, y1, e1):
    """Slopes (y1 - y0) / (x1 - x0) with absolute error bounds."""
    num = y1 - y0
    gap = x1 - x0
    s = num / gap
    return s, (e0 + e1 + _U * np.abs(num)) / np.abs(gap) + 4 * _U * np.abs(s)


def _solve_k2(pts, a, b, budget):
    """The DP of :func:`_solve_generic` specialised to k = 2.

    States are pairs (i, j) of chain indices, i = -1 standing for the single
    left boundary copy; rows of ``best`` are indexed by i + 1.  For k = 2 a
    window (i, j, l) is positive iff slope(j, l) >= slope(i, j), so for a
    fixed j the successors are sorted by slope once and every row reads
    its answer off a suffix maximum.  Rows whose incoming slope lies within
    float error of some outgoing slope are settled window by window with
    the exact predicate.
    """
    n = len(pts)
    if n > K2_MAX_POINTS:
        raise GuardrailError(
            f"{n} candidate points exceed the k = 2 engine limit {K2_MAX_POINTS}"
        )
    win = _Windows(pts, 2, a, b)
    if n == 0:
        return 0, [], 1, False
    x = np.array([p.x for p in pts])
    y = np.array([p.y for p in pts])
    ya = a * a
    # the left boundary copy is stored at position n
    xe = np.append(x, a)
    ye = np.append(y, ya)
    ee = np.append(np.zeros(n), abs(ya) * 3 * _U)
    yb = b * b
    eb = abs(yb) * 3 * _U

    best = np.full((n + 1, n), _NEG, dtype=np.int64)
    choice = np.full((n + 1, n), -1, dtype=np.int64)
    transitions = 0
    lower = 0
    start_ok = np.array([win.step((-1, -1), j) for j in range(n)])
    right_ok = np.array([win._check([win.entries[j], win.right, win.right]) for j in range(n)])

    for j in range(n - 1, -1, -1):
        rows = np.append(np.flatnonzero(x[:j] < x[j]), n)
        transitions += len(rows) + (n - j)
        if transitions > budget:
            raise BudgetExceededError(
                f"DP exceeded its budget of {budget} transitions",
                lower_bound=lower,
                states_explored=int((best != _NEG).sum()),
            )
        s1, e1 = _slopes(xe[rows], ye[rows], ee[rows], x[j], y[j], 0.0)
        scale1 = np.maximum(np.abs(s1), np.abs(ye[rows]))

        def resolve(r, s_out, e_out, idx_out):
            # rows near a slope tie: float where certain, exact otherwise
            i = int(rows[r]) if rows[r] < n else -1
            band = 2 * (e1[r] + e_out) + 1e-9 * np.maximum(scale1[r], np.abs(s_out))
            ok = s_out - s1[r] > band
            for c in np.flatnonzero(np.abs(s_out - s1[r]) <= band):
                l = idx_out[c]
                ok[c] = win.step((i, j), l) if l >= 0 else win._check(
                    [win.entry(i), win.entries[j], win.right])
            return ok

        # terminal compatibility: windows (i, j, b) and (j, b, b)
        val = np.full(len(rows), _NEG, dtype=np.int64)
        if right_ok[j]:
            sb, ebj = _slopes(x[j], y[j], 0.0, b, yb, eb)
            band = 2 * (e1 + ebj) + 1e-9 * np.maximum(scale1, abs(sb))
            term = sb - s1 > band
            for r in np.flatnonzero(np.abs(sb - s1) <= band):
                term[r] = resolve(r, np.array([sb]), ebj, [-1])[0]
            val[term] = 0
        arg = np.full(len(rows), -1, dtype=np.int64)

        cols = np.arange(np.searchsorted(x, x[j], "right"), n)
        cols = cols[best[j + 1, cols] >= 0]
        if len(cols):
            s2, e2 = _slopes(x[j], y[j], 0.0, x[cols], y[cols], 0.0)
            order = np.argsort(s2, kind="stable")
            s2s, cs = s2[order], cols[order]
            # larger length first, then smaller index
            key = (best[j + 1, cs] + 1) * (n + 1) + (n - cs)
            suffix = np.maximum.accumulate(key[::-1])[::-1]
            band = 2 * (e1 + e2.max()) + 1e-9 * np.maximum(scale1, np.abs(s2).max())
            lo = np.searchsorted(s2s, s1 - band, "left")
            hi = np.searchsorted(s2s, s1 + band, "right")
            top = np.where(hi < len(cs), suffix[np.minimum(hi, len(cs) - 1)], -1)
            for r in np.flatnonzero(hi > lo):
                ok = resolve(r, s2, e2, cols)
                keys = np.where(ok, (best[j + 1, cols] + 1) * (n + 1) + (n - cols), -1)
                top[r] = keys.max()
            has = top >= 0
            length = np.where(has, top // (n + 1), _NEG)
            better = length > val
            val = np.where(better, length, val)
            arg = np.where(better, n - top % (n + 1), -1)
        row_idx = np.where(rows < n, rows + 1, 0)
        best[row_idx, j] = val
        choice[row_idx, j] = arg
        if start_ok[j] and best[0, j] >= 0:
            lower = max(lower, 1 + int(best[0, j]))

    from_start = np.where(start_ok & (best[0] >= 0), best[0] + 1, _NEG)
    total = max(int(from_start.max()), 0)
    witness = []
    if total > 0:
        i, j = -1, int(from_start.argmax())
        while j >= 0:
            witness.append(pts[j])
            i, j = j, int(choice[i + 1, j])
    return total, witness, int((best != _NEG).sum()) + 1, win.degenerate


def solve_dp(points, k: int, a: float = 0.0, b: float = 1.0,
             state_budget: int = DEFAULT_BUDGET, engine: str = "auto") -> SolveResult:
    """Exact maximum chain length by DP over the last k chain points.

    Among optimal chains the witness is the lexicographically smallest
    index sequence in (x, y) order.  ``engine`` picks the implementation:
    ``"generic"`` (any k), ``"numpy"`` (k = 2 only) or ``"auto"``.

    Raises :class:`BudgetExceededError` carrying a certified lower bound
    when more than ``state_budget`` window checks would be needed.
    """
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    pts = _candidates(points, k, a, b)
    if engine == "auto":
        engine = "numpy" if k == 2 else "generic"
    if engine == "numpy":
        if k != 2:
            raise InvalidInputError("the numpy engine handles k = 2 only")
        length, witness, states, degen = _solve_k2(pts, a, b, state_budget)
    elif engine == "generic":
        length, witness, states, degen = _solve_generic(pts, k, a, b, state_budget)
    else:
        raise InvalidInputError(f"unknown engine {engine!r}")
    return SolveResult(length, Chain(tuple(witness)), "dp", states, degen)


def solve_brute(points, k: int, a: float = 0.0, b: float = 1.0) -> SolveResult:
    """Try every subset, largest first; the first valid one wins."""
    pts = sorted(Point(float(p[0]), float(p[1])) for p in points)
    if len(pts) > BRUTE_MAX_POINTS:
        raise GuardrailError(f"brute force limited to {BRUTE_MAX_POINTS} points")
    tried = 0
    for size in range(len(pts), -1, -1):
        for combo in combinations(range(len(pts)), size):
            tried += 1
            sub = [pts[i] for i in combo]
            try:
                chain = BoundaryChain(k, a, b, Chain(tuple(sub)))
            except InvalidInputError:
                continue
            report = validate_windows(chain)
            if report.valid:
                return SolveResult(size, chain.interior, "brute", tried, report.degenerate)
    raise AssertionError("the empty chain is always valid")


def solve_lis(points, a: float = 0.0, b: float = 1.0) -> SolveResult:
    """k = 1 by patience sorting: longest chain with strictly increasing x
    and non-decreasing y inside [a, b]^2, in O(n log n).

    Points sharing an abscissa are inserted as a batch against the piles as
    they stood before the batch, so two of them never chain together.
    """
    arr = _candidate_array(points, 1, a, b)
    xs, ys = arr[:, 0].tolist(), arr[:, 1].tolist()
    n = len(xs)
    tails = []      # smallest tail ordinate of a chain of each length
    tail_idx = []
    parent = [-1] * n
    i = 0
    while i < n:
        j = i + 1
        while j < n and xs[j] == xs[i]:
            j += 1
        if j == i + 1:
            y = ys[i]
            pos = bisect_right(tails, y)
            parent[i] = tail_idx[pos - 1] if pos else -1
            if pos == len(tails):
                tails.append(y)
                tail_idx.append(i)
            else:
                tails[pos] = y
                tail_idx[pos] = i
        else:
            updates = []
            for t in range(i, j):
                pos = bisect_right(tails, ys[t])
                parent[t] = tail_idx[pos - 1] if pos else -1
                updates.append((pos, t))
            for pos, t in updates:
                if pos == len(tails):
                    tails.append(ys[t])
                    tail_idx.append(t)
                elif ys[t] < tails[pos]:
                    tails[pos] = ys[t]
                    tail_idx[pos] = t
        i = j
    witness = []
    t = tail_idx[-1] if tail_idx else -1
    while t >= 0:
        witness.append(Point(xs[t], ys[t]))
        t = parent[t]
    witness.reverse()
    return SolveResult(len(witness), Chain(tuple(witness)), "lis", n)


def solve_greedy_cells(sample, spacing: float = 3.0) -> SolveResult:
    """One point per occupied sub-cell C_k(a + s i, a + s (i + 1)).

    Takes the leftmost sample point of each sub-cell.  The result is always
    a valid chain over the whole cell, by repeated concatenation.
    ``info["occupied"]`` lists the occupancy of every sub-cell.
    """
    cell = sample.cell
    k, a = cell.k, cell.a
    m = int((cell.b - cell.a) // spacing)
    pts = np.asarray(sample.points, dtype=float).reshape(-1, 2)
    order = np.argsort(pts[:, 0], kind="stable")
    pts = pts[order]
    chosen, occupied = [], []
    for i in range(m):
        lo, hi = a + spacing * i, a + spacing * (i + 1)
        sub = Cell(k, lo, hi)
        start = np.searchsorted(pts[:, 0], lo, "right")
        stop = np.searchsorted(pts[:, 0], hi, "left")
        pick = None
        for p in pts[start:stop]:
            if contains_exact(sub, p):
                pick = Point(float(p[0]), float(p[1]))
                break
        occupied.append(pick is not None)
        if pick is not None:
            chosen.append(pick)
    return SolveResult(len(chosen), Chain(tuple(chosen)), "greedy", m,
                       info={"occupied": occupied, "subcells": m})


def concatenate(left: BoundaryChain, right: BoundaryChain, check: bool = True) -> BoundaryChain:
    """Join chains over (a, b) and (b, c) into one over (a, c)."""
    if left.k != right.k:
        raise InvalidInputError("chains have different k")
    if left.b != right.a:
        raise InvalidInputError(f"endpoints do not meet ({left.b} vs {right.a})")
    for side in (left, right):
        if not validate_windows(side).valid:
            raise InvalidInputError("concatenate needs valid input chains")
    out = BoundaryChain(left.k, left.a, right.b,
                        Chain(left.interior.points + right.interior.points))
    if check:
        assert validate_windows(out).valid, "concatenation produced an invalid chain"
    return out


def solve(points, k: int, a: float = 0.0, b: float = 1.0, method: str = "dp",
          budget: int = DEFAULT_BUDGET) -> SolveResult:
    """Dispatch by method name: dp, brute, lis or greedy."""
    if method == "dp":
        return solve_dp(points, k, a, b, budget)
    if method == "brute":
        return solve_brute(points, k, a, b)
    if method == "lis":
        if k != 1:
            raise InvalidInputError("lis requires k = 1")
        return solve_lis(points, a, b)
    if method == "greedy":
        from .sampling import PoissonSample
        cell = Cell(k, a, b)
        pts = np.asarray([tuple(p) for p in points], dtype=float).reshape(-1, 2)
        return solve_greedy_cells(PoissonSample(cell, pts, 0.0))
    raise InvalidInputError(f"unknown method {method!r}")
