"""Bottleneck and q-Wasserstein distances between persistence diagrams.

Costs use the infinity norm on the birth/death plane; a point may match
the diagonal at cost (death-birth)/2. Bottleneck is solved exactly by
binary search over candidate costs with a maximum-bipartite-matching
feasibility test; Wasserstein by exact assignment on the
diagonal-augmented square problem. Essential (infinite) bars are compared
separately by birth; diagrams whose essential-bar counts disagree in the
compared dimension are incomparable rather than infinitely far apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import IncomparableDiagramsError, InvalidInputError, UndefinedMeanError
from .topology import PersistenceDiagram


@dataclass
class MatchingProblem:
    """Finite points of one dimension from two diagrams, diagonal-augmented."""

    left: np.ndarray   # (a, 2) birth/death
    right: np.ndarray  # (b, 2)

    @property
    def a(self) -> int:
        return len(self.left)

    @property
    def b(self) -> int:
        return len(self.right)

    def point_costs(self) -> np.ndarray:
        """(a, b) infinity-norm costs between off-diagonal points."""
        if self.a == 0 or self.b == 0:
            return np.zeros((self.a, self.b))
        diff = np.abs(self.left[:, None, :] - self.right[None, :, :])
        return diff.max(axis=2)

    def diagonal_costs(self) -> tuple[np.ndarray, np.ndarray]:
        da = (self.left[:, 1] - self.left[:, 0]) / 2.0 if self.a else np.zeros(0)
        db = (self.right[:, 1] - self.right[:, 0]) / 2.0 if self.b else np.zeros(0)
        return da, db


def _finite_and_infinite(diagram: PersistenceDiagram, dim: int):
    if dim > diagram.max_dim:
        raise InvalidInputError(
            f"diagram computed to dimension {diagram.max_dim}, requested {dim}")
    finite = diagram.finite_points(dim)
    inf_births = np.sort(diagram.infinite_births(dim))
    return finite, inf_births


def _infinite_birth_gaps(inf_a: np.ndarray, inf_b: np.ndarray, dim: int) -> np.ndarray:
    if len(inf_a) != len(inf_b):
        raise IncomparableDiagramsError(
            f"essential-bar counts differ in dimension {dim}: {len(inf_a)} vs {len(inf_b)}",
            dim=dim, count_a=len(inf_a), count_b=len(inf_b))
    return np.abs(inf_a - inf_b)


def _matching_feasible(cost_ab: np.ndarray, diag_a: np.ndarray, diag_b: np.ndarray,
                       lam: float) -> bool:
    """Perfect matching test on the threshold graph at cost <= lam.

    Left side: a off-diagonal points of A, then b diagonal slots.
    Right side: b off-diagonal points of B, then a diagonal slots.
    A_i reaches its own diagonal slot iff pers/2 <= lam; diagonal slots
    reach each other freely; B's slots reach B_j iff pers/2 <= lam.
    """
    a, b = cost_ab.shape
    size = a + b
    adj: list[list[int]] = []
    for i in range(a):
        ok = list(np.nonzero(cost_ab[i] <= lam)[0])
        if diag_a[i] <= lam:
            ok.append(b + i)
        adj.append(ok)
    slots = list(range(b, b + a))
    for j in range(b):
        # B's diagonal slot: matches B_j (if cheap enough) or any of A's slots
        adj.append(([j] if diag_b[j] <= lam else []) + slots)

    match_right = [-1] * size

    def augment(root: int) -> bool:
        # iterative alternating-path search from left node `root`
        seen = [False] * size
        stack = [(root, iter(adj[root]))]
        path: list[tuple[int, int]] = []  # (left, right) tentative assignments
        while stack:
            u, it = stack[-1]
            advanced = False
            for v in it:
                if seen[v]:
                    continue
                seen[v] = True
                path.append((u, v))
                if match_right[v] == -1:
                    for lu, rv in path:
                        match_right[rv] = lu
                    return True
                stack.append((match_right[v], iter(adj[match_right[v]])))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if path:
                    path.pop()
        return False

    for u in range(size):
        if not augment(u):
            return False
    return True


def bottleneck_distance(a: PersistenceDiagram, b: PersistenceDiagram, dim: int) -> float:
    """Smallest achievable maximum matching cost, exact over the candidate set."""
    fin_a, inf_a = _finite_and_infinite(a, dim)
    fin_b, inf_b = _finite_and_infinite(b, dim)
    inf_part = _infinite_birth_gaps(inf_a, inf_b, dim)
    inf_max = float(inf_part.max()) if len(inf_part) else 0.0

    problem = MatchingProblem(fin_a, fin_b)
    if problem.a == 0 and problem.b == 0:
        return inf_max
    cost_ab = problem.point_costs()
    diag_a, diag_b = problem.diagonal_costs()
    candidates = np.unique(np.concatenate([
        cost_ab.ravel(), diag_a, diag_b, [0.0]]))
    lo, hi = 0, len(candidates) - 1
    if not _matching_feasible(cost_ab, diag_a, diag_b, float(candidates[hi])):
        raise InvalidInputError("no feasible matching at maximal candidate cost")
    while lo < hi:
        mid = (lo + hi) // 2
        if _matching_feasible(cost_ab, diag_a, diag_b, float(candidates[mid])):
            hi = mid
        else:
            lo = mid + 1
    return max(float(candidates[lo]), inf_max)


def wasserstein_distance(a: PersistenceDiagram, b: PersistenceDiagram, dim: int,
                         q: float = 1.0) -> float:
    """(min over matchings of sum cost^q)^(1/q), solved by exact assignment."""
    if q < 1:
        raise InvalidInputError("q must be >= 1")
    fin_a, inf_a = _finite_and_infinite(a, dim)
    fin_b, inf_b = _finite_and_infinite(b, dim)
    inf_part = _infinite_birth_gaps(inf_a, inf_b, dim)

    problem = MatchingProblem(fin_a, fin_b)
    na, nb = problem.a, problem.b
    total = float((inf_part ** q).sum())
    if na or nb:
        size = na + nb
        cost = np.zeros((size, size))
        if na and nb:
            cost[:na, :nb] = problem.point_costs() ** q
        diag_a, diag_b = problem.diagonal_costs()
        if na:
            cost[:na, nb:] = (diag_a ** q)[:, None]  # A_i to any diagonal slot
        if nb:
            cost[na:, :nb] = (diag_b ** q)[None, :]  # any slot to B_j
        rows, cols = linear_sum_assignment(cost)
        total += float(cost[rows, cols].sum())
    return total ** (1.0 / q)


@dataclass
class DiagramDistanceMatrix:
    labels: tuple[str, ...]
    dim: int
    entries: np.ndarray

    def __post_init__(self):
        n = len(self.labels)
        if self.entries.shape != (n, n):
            raise InvalidInputError("entry matrix does not match labels")
        if not np.isfinite(self.entries).all():
            raise InvalidInputError("non-finite distance entries")
        if not np.array_equal(self.entries, self.entries.T) or np.diagonal(self.entries).any():
            raise InvalidInputError("matrix must be symmetric with zero diagonal")


def distance_matrix(diagrams: Sequence[tuple[str, PersistenceDiagram]], dim: int,
                    kind: str = "bottleneck", q: float = 1.0) -> DiagramDistanceMatrix:
    """All pairwise distances; refuses completion if any pair is incomparable."""
    if len(diagrams) < 2:
        raise InvalidInputError("need at least 2 diagrams")
    labels = tuple(name for name, _ in diagrams)
    if len(set(labels)) != len(labels):
        raise InvalidInputError("diagram labels must be unique")
    n = len(diagrams)
    entries = np.zeros((n, n))
    incomparable = []
    for i in range(n):
        for j in range(i + 1, n):
            try:
                if kind == "bottleneck":
                    d = bottleneck_distance(diagrams[i][1], diagrams[j][1], dim)
                elif kind == "wasserstein":
                    d = wasserstein_distance(diagrams[i][1], diagrams[j][1], dim, q=q)
                else:
                    raise InvalidInputError(f"unknown distance kind {kind!r}")
            except IncomparableDiagramsError as err:
                incomparable.append((labels[i], labels[j], str(err)))
                continue
            entries[i, j] = entries[j, i] = d
    if incomparable:
        pair_list = "; ".join(f"{x}~{y}" for x, y, _ in incomparable)
        raise IncomparableDiagramsError(
            f"{len(incomparable)} incomparable pair(s) in dimension {dim}: {pair_list}",
            dim=dim)
    return DiagramDistanceMatrix(labels=labels, dim=dim, entries=entries)


def mean_group_distance(dm: DiagramDistanceMatrix, groups: dict[str, str],
                        mode: str = "all") -> dict[tuple[str, str], float]:
    """Mean entry over u in G, v in H, u != v, per unordered group pair.

    mode "within" keeps only G==H cells (singleton groups are an error
    there: the mean has no pairs); "across" keeps only G!=H cells; "all"
    returns both, silently omitting undefined singleton within-cells.
    """
    if mode not in ("all", "within", "across"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    missing = [l for l in dm.labels if l not in groups]
    if missing:
        raise InvalidInputError(f"unmapped labels: {missing}")
    members: dict[str, list[int]] = {}
    for idx, label in enumerate(dm.labels):
        members.setdefault(groups[label], []).append(idx)
    names = sorted(members)
    out: dict[tuple[str, str], float] = {}
    for gi, g in enumerate(names):
        for h in names[gi:]:
            if g == h:
                if mode == "across":
                    continue
                idx = members[g]
                if len(idx) < 2:
                    if mode == "within":
                        raise UndefinedMeanError(f"group {g!r} has a single member")
                    continue
                sub = dm.entries[np.ix_(idx, idx)]
                total = sub.sum()  # diagonal is zero; off-diagonal pairs counted twice
                out[(g, h)] = float(total / (len(idx) * (len(idx) - 1)))
            else:
                if mode == "within":
                    continue
                sub = dm.entries[np.ix_(members[g], members[h])]
                out[(g, h)] = float(sub.mean())
    return out


def write_matrix_csv(dm: DiagramDistanceMatrix, fh: IO[str]) -> None:
    fh.write("," + ",".join(dm.labels) + "\n")
    for i, label in enumerate(dm.labels):
        fh.write(label + "," + ",".join(repr(float(x)) for x in dm.entries[i]) + "\n")


def read_matrix_csv(fh: IO[str], dim: int = 0) -> DiagramDistanceMatrix:
    header = fh.readline().rstrip("\n")
    labels = tuple(header.split(",")[1:])
    rows = []
    for line in fh:
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split(",")
        rows.append([float(x) for x in parts[1:]])
    entries = np.array(rows)
    return DiagramDistanceMatrix(labels=labels, dim=dim, entries=entries)


def write_pair_report_csv(dm: DiagramDistanceMatrix, kind: str, fh: IO[str]) -> None:
    fh.write("label_a,label_b,dim,kind,value\n")
    for i in range(len(dm.labels)):
        for j in range(i + 1, len(dm.labels)):
            fh.write(f"{dm.labels[i]},{dm.labels[j]},{dm.dim},{kind},"
                     f"{repr(float(dm.entries[i, j]))}\n")
