"""Vietoris-Rips filtrations and persistent homology over GF(2).

A filtration stores its simplices per dimension as numpy arrays (a
200-point cloud at dimension 2 already has millions of simplices, so
per-simplex Python objects are materialized only on demand). Reduction
runs top-down with clearing; representative cycles are recorded for every
positive-persistence pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterator, Optional, Sequence

import numpy as np

from ._reduction import reduce_dimension
from .embedding import PointCloud
from .errors import BudgetExceededError, InvalidInputError, UnsupportedRequestError

DEFAULT_MAX_DIM = 2
DEFAULT_MAX_EPS = 1.0  # diameter of the angular metric
DEFAULT_SIMPLEX_BUDGET = 50_000_000

INF = math.inf


@dataclass
class DistanceMatrix:
    n: int
    entries: np.ndarray
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        e = self.entries
        if e.shape != (self.n, self.n):
            raise InvalidInputError(f"distance matrix must be {self.n}x{self.n}")
        if not np.isfinite(e).all():
            raise InvalidInputError("non-finite distance entries")
        if (e < 0).any() or not np.array_equal(e, e.T) or np.diagonal(e).any():
            raise InvalidInputError("distance matrix must be symmetric, non-negative, zero-diagonal")


def pairwise_distances(cloud: PointCloud) -> DistanceMatrix:
    """Angular: arccos of dot products over pi (range [0,1]); Euclidean: L2."""
    pts = cloud.points
    if not np.isfinite(pts).all():
        raise InvalidInputError("non-finite coordinates")
    if cloud.metric_tag == "angular":
        gram = np.clip(pts @ pts.T, -1.0, 1.0)
        dm = np.arccos(gram) / np.pi
    else:
        sq = np.sum(pts ** 2, axis=1)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T), 0.0)
        dm = np.sqrt(d2)
    dm = np.triu(dm, 1)
    dm = dm + dm.T  # exact symmetry, exact zero diagonal
    return DistanceMatrix(n=cloud.n, entries=dm, labels=cloud.labels)


@dataclass(frozen=True)
class Simplex:
    vertices: tuple[int, ...]
    filtration_value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


class Filtration:
    """Simplices of dimension <= max_dim+1 with value <= max_eps.

    Global order is (filtration value, dimension, lexicographic vertices);
    per-dimension arrays are stored in that order restricted to the
    dimension, which is what the reduction consumes.
    """

    def __init__(self, verts: list[np.ndarray], vals: list[np.ndarray],
                 bnd: list[Optional[np.ndarray]], max_dim: int, max_eps: float):
        self.verts = verts  # verts[d]: (m_d, d+1) int32, rows sorted, order (value, lex)
        self.vals = vals    # vals[d]: (m_d,) float64
        self.bnd = bnd      # bnd[d]: (m_d, d+1) int32 facet positions in dim d-1, row-sorted
        self.max_dim = max_dim
        self.max_eps = max_eps

    @property
    def top_dim(self) -> int:
        return len(self.verts) - 1

    def counts(self) -> list[int]:
        return [len(v) for v in self.vals]

    def __len__(self) -> int:
        return int(sum(self.counts()))

    def simplex(self, dim: int, pos: int) -> Simplex:
        return Simplex(tuple(int(v) for v in self.verts[dim][pos]),
                       float(self.vals[dim][pos]))

    def __iter__(self) -> Iterator[Simplex]:
        order = self.global_order()
        for dim, pos in order:
            yield self.simplex(dim, pos)

    def global_order(self) -> list[tuple[int, int]]:
        """(dim, position) pairs in the global filtration order."""
        entries = []
        for d in range(self.top_dim + 1):
            md = len(self.vals[d])
            if md == 0:
                continue
            pad = np.full((md, self.top_dim + 2), -1, dtype=np.int64)
            pad[:, 0] = d
            pad[:, 1:d + 2] = self.verts[d]
            entries.append((self.vals[d], pad, np.full(md, d), np.arange(md)))
        if not entries:
            return []
        vals = np.concatenate([e[0] for e in entries])
        pads = np.vstack([e[1] for e in entries])
        dims = np.concatenate([e[2] for e in entries])
        poss = np.concatenate([e[3] for e in entries])
        keys = tuple(pads[:, c] for c in range(pads.shape[1] - 1, -1, -1)) + (vals,)
        order = np.lexsort(keys)
        return [(int(dims[i]), int(poss[i])) for i in order]


def _pack_keys(verts: np.ndarray, n: int) -> np.ndarray:
    width = verts.shape[1]
    if width * math.log2(max(2, n)) >= 62:
        raise InvalidInputError("vertex-count/dimension combination overflows simplex keys")
    keys = verts[:, 0].astype(np.int64)
    for c in range(1, width):
        keys = keys * n + verts[:, c]
    return keys


def build_vr_filtration(dm: DistanceMatrix, max_dim: int, max_eps: float,
                        budget: int = DEFAULT_SIMPLEX_BUDGET) -> Filtration:
    """All simplices with value <= max_eps up to dimension max_dim+1.

    Dimension max_dim+1 is included so deaths at dimension max_dim come out
    right. A simplex's value is the max pairwise distance of its vertices
    ("<= eps" closed convention). Exceeding the simplex budget raises
    rather than exhausting memory.
    """
    if max_dim < 0:
        raise InvalidInputError("max_dim must be >= 0")
    if max_eps <= 0:
        raise InvalidInputError("max_eps must be > 0")
    n = dm.n
    e = dm.entries
    top = min(max_dim + 1, n - 1)

    count = n
    if count > budget:
        raise BudgetExceededError(
            f"simplex budget {budget} exceeded by vertices alone at eps={max_eps}",
            eps=max_eps, count=count, budget=budget)

    verts: list[np.ndarray] = [np.arange(n, dtype=np.int32).reshape(n, 1)]
    vals: list[np.ndarray] = [np.zeros(n)]

    if top >= 1:
        adj = (e <= max_eps) & ~np.eye(n, dtype=bool)
        iu, ju = np.nonzero(np.triu(adj, 1))
        ev = np.column_stack([iu, ju]).astype(np.int32)
        verts.append(ev)
        vals.append(e[iu, ju])
        count += len(ev)
        _check_budget(count, budget, max_eps, vals)

    for d in range(2, top + 1):
        parent_v = verts[d - 1]
        parent_val = vals[d - 1]
        child_v_chunks = []
        child_val_chunks = []
        chunk = max(1, 20_000_000 // max(1, n))
        col_ids = np.arange(n, dtype=np.int32)
        for lo in range(0, len(parent_v), chunk):
            pv = parent_v[lo:lo + chunk]
            pval = parent_val[lo:lo + chunk]
            cand = adj[pv[:, 0]]
            for c in range(1, d):
                cand = cand & adj[pv[:, c]]
            cand = cand & (col_ids[None, :] > pv[:, -1][:, None])
            rows, cols = np.nonzero(cand)
            if len(rows) == 0:
                continue
            cv = np.column_stack([pv[rows], cols.astype(np.int32)])
            new_d = e[pv[rows, 0], cols]
            for c in range(1, d):
                new_d = np.maximum(new_d, e[pv[rows, c], cols])
            child_val_chunks.append(np.maximum(pval[rows], new_d))
            child_v_chunks.append(cv)
            count += len(rows)
            _check_budget(count, budget, max_eps, vals, extra=child_val_chunks)
        if child_v_chunks:
            verts.append(np.vstack(child_v_chunks))
            vals.append(np.concatenate(child_val_chunks))
        else:
            verts.append(np.empty((0, d + 1), dtype=np.int32))
            vals.append(np.empty(0))

    # order each dimension by (value, lexicographic vertices)
    for d in range(len(verts)):
        v, val = verts[d], vals[d]
        if len(val) <= 1:
            continue
        keys = tuple(v[:, c] for c in range(v.shape[1] - 1, -1, -1)) + (val,)
        order = np.lexsort(keys)
        verts[d] = np.ascontiguousarray(v[order])
        vals[d] = val[order]

    # boundary facet positions
    bnd: list[Optional[np.ndarray]] = [None]
    for d in range(1, len(verts)):
        v = verts[d]
        if len(v) == 0:
            bnd.append(np.empty((0, d + 1), dtype=np.int32))
            continue
        keys_prev = _pack_keys(verts[d - 1], n)
        key_order = np.argsort(keys_prev, kind="stable")
        keys_sorted = keys_prev[key_order]
        facets = np.empty((len(v), d + 1), dtype=np.int32)
        for drop in range(d + 1):
            sub = np.delete(v, drop, axis=1)
            fk = _pack_keys(sub, n)
            idx = np.searchsorted(keys_sorted, fk)
            facets[:, drop] = key_order[idx].astype(np.int32)
        facets.sort(axis=1)
        bnd.append(facets)

    return Filtration(verts, vals, bnd, max_dim=max_dim, max_eps=max_eps)


def _check_budget(count, budget, max_eps, vals, extra=None):
    if count <= budget:
        return
    seen = max((float(v.max()) for v in vals if len(v)), default=0.0)
    if extra:
        seen = max(seen, max(float(c.max()) for c in extra if len(c)))
    raise BudgetExceededError(
        f"simplex budget {budget} exceeded ({count} simplices) while expanding "
        f"the complex at eps={max_eps} (values enumerated so far reach {seen}); "
        f"lower max_eps or max_dim",
        eps=max_eps, count=count, budget=budget)


@dataclass
class PersistencePair:
    dim: int
    birth: float
    death: float  # math.inf for essential classes
    generator: Optional[tuple[Simplex, ...]] = None

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass
class PersistenceDiagram:
    pairs: list[PersistencePair]  # all pairs, zero-persistence included
    max_dim: int
    max_eps: float
    n_points: int
    has_generators: bool = False

    def pairs_of(self, dim: int, include_zero: bool = False) -> list[PersistencePair]:
        """Default view drops zero-persistence pairs (no information, bad for matching)."""
        return [p for p in self.pairs
                if p.dim == dim and (include_zero or p.death > p.birth)]

    def view(self) -> list[PersistencePair]:
        return [p for p in self.pairs if p.death > p.birth]

    def finite_points(self, dim: int) -> np.ndarray:
        pts = [(p.birth, p.death) for p in self.pairs_of(dim) if p.death != INF]
        return np.array(pts, dtype=np.float64).reshape(-1, 2)

    def infinite_births(self, dim: int) -> np.ndarray:
        return np.array([p.birth for p in self.pairs_of(dim) if p.death == INF])


def compute_persistence(filtration: Filtration, with_generators: bool = True) -> PersistenceDiagram:
    """Standard column reduction in filtration order, with clearing.

    Zero-persistence pairs are retained on the diagram but hidden from the
    default view. Representative cycles are attached to every
    positive-persistence pair (finite: the reduced column at death;
    essential: the accumulated V column).
    """
    verts, vals, bnd = filtration.verts, filtration.vals, filtration.bnd
    top = filtration.top_dim
    max_dim = filtration.max_dim
    n = len(vals[0])
    pairs: list[PersistencePair] = []
    killed0 = np.zeros(n, dtype=bool)

    cleared = np.zeros(len(vals[top]), dtype=np.uint8)
    for d in range(top, 0, -1):
        m = len(vals[d])
        n_rows = len(vals[d - 1])
        track_v = with_generators and d <= max_dim
        if m == 0:
            cleared = np.zeros(n_rows, dtype=np.uint8)
            continue
        (pair_row, is_zero, pivot_owner,
         r_start, r_len, r_pool, v_start, v_len, v_pool) = reduce_dimension(
            bnd[d], cleared, n_rows, track_v)

        cols = np.nonzero(pair_row >= 0)[0]
        births = vals[d - 1][pair_row[cols]]
        deaths = vals[d][cols]
        for j, b, dd in zip(cols, births, deaths):
            gen = None
            if with_generators and dd > b:
                s, ln = r_start[j], r_len[j]
                gen = tuple(filtration.simplex(d - 1, int(r)) for r in r_pool[s:s + ln])
            pairs.append(PersistencePair(d - 1, float(b), float(dd), gen))
            if d - 1 == 0:
                killed0[pair_row[j]] = True

        if d <= max_dim:
            for j in np.nonzero(is_zero)[0]:
                gen = None
                if track_v:
                    s, ln = v_start[j], v_len[j]
                    gen = tuple(filtration.simplex(d, int(r)) for r in v_pool[s:s + ln])
                pairs.append(PersistencePair(d, float(vals[d][j]), INF, gen))
        cleared = (pivot_owner >= 0).astype(np.uint8)

    for i in np.nonzero(~killed0)[0]:
        gen = (filtration.simplex(0, int(i)),) if with_generators else None
        pairs.append(PersistencePair(0, float(vals[0][i]), INF, gen))

    pairs.sort(key=lambda p: (p.dim, p.birth, p.death, ))
    return PersistenceDiagram(pairs=pairs, max_dim=max_dim, max_eps=filtration.max_eps,
                              n_points=n, has_generators=with_generators)


def betti_numbers(diagram: PersistenceDiagram, eps: float) -> list[int]:
    """Features alive at eps per dimension: birth <= eps < death."""
    if not 0 <= eps <= diagram.max_eps:
        raise InvalidInputError(f"eps={eps} outside [0, {diagram.max_eps}]")
    betti = [0] * (diagram.max_dim + 1)
    for p in diagram.pairs:
        if p.dim <= diagram.max_dim and p.birth <= eps < p.death:
            betti[p.dim] += 1
    return betti


def vr_diagram(cloud: PointCloud, max_dim: int = DEFAULT_MAX_DIM,
               max_eps: float = DEFAULT_MAX_EPS, budget: int = DEFAULT_SIMPLEX_BUDGET,
               with_generators: bool = True) -> PersistenceDiagram:
    """Convenience: cloud -> distances -> filtration -> diagram."""
    dm = pairwise_distances(cloud)
    filtration = build_vr_filtration(dm, max_dim=max_dim, max_eps=max_eps, budget=budget)
    return compute_persistence(filtration, with_generators=with_generators)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def barcode_export(diagram: PersistenceDiagram) -> list[tuple[int, float, float]]:
    """Default-view rows (dim, birth, death) sorted by (dim, birth, death)."""
    rows = [(p.dim, p.birth, p.death) for p in diagram.view()]
    rows.sort()
    return rows


def write_barcode_csv(diagram: PersistenceDiagram, fh: IO[str]) -> None:
    fh.write("dim,birth,death\n")
    for dim, birth, death in barcode_export(diagram):
        d = "inf" if death == INF else repr(death)
        fh.write(f"{dim},{repr(birth)},{d}\n")


def read_barcode_csv(fh: IO[str], max_dim: Optional[int] = None,
                     max_eps: Optional[float] = None) -> PersistenceDiagram:
    """Rebuild a diagram view from CSV (generators and zero-persistence pairs are gone)."""
    header = fh.readline().strip()
    if header != "dim,birth,death":
        raise InvalidInputError(f"unexpected barcode header {header!r}")
    pairs = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        dim_s, birth_s, death_s = line.split(",")
        death = INF if death_s == "inf" else float(death_s)
        pairs.append(PersistencePair(int(dim_s), float(birth_s), death))
    dims = [p.dim for p in pairs]
    finite = [p.death for p in pairs if p.death != INF] + [p.birth for p in pairs]
    md = max_dim if max_dim is not None else (max(dims) if dims else 0)
    me = max_eps if max_eps is not None else (max(finite) if finite else 0.0)
    n0 = sum(1 for p in pairs if p.dim == 0)
    return PersistenceDiagram(pairs=pairs, max_dim=md, max_eps=me, n_points=n0)


def hole_report(diagram: PersistenceDiagram, min_persistence: float,
                cloud: PointCloud) -> list[tuple[int, float, float, tuple[str, ...]]]:
    """Holes (dim >= 1) of persistence >= min_persistence with their boundary words.

    Essential dim>=1 bars are always included. Rows are ordered by
    (dim, persistence desc, birth).
    """
    if not diagram.has_generators:
        raise UnsupportedRequestError("diagram was computed without generators")
    out = []
    for p in diagram.view():
        if p.dim < 1:
            continue
        if p.death != INF and p.persistence < min_persistence:
            continue
        vertices = sorted({v for s in (p.generator or ()) for v in s.vertices})
        words = tuple(cloud.labels[v] for v in vertices)
        out.append((p.dim, p.birth, p.death, words))
    out.sort(key=lambda r: (r[0], -(r[2] - r[1]), r[1]))
    return out


def write_generators_csv(diagram: PersistenceDiagram, cloud: PointCloud, fh: IO[str]) -> None:
    """Sidecar for the barcode CSV: pair_id matches the barcode row index."""
    if not diagram.has_generators:
        raise UnsupportedRequestError("diagram was computed without generators")
    rows = sorted(diagram.view(), key=lambda p: (p.dim, p.birth, p.death))
    fh.write("pair_id,dim,vertex_words\n")
    for pair_id, p in enumerate(rows):
        vertices = sorted({v for s in (p.generator or ()) for v in s.vertices})
        words = " ".join(cloud.labels[v] for v in vertices)
        fh.write(f"{pair_id},{p.dim},{words}\n")


def write_distance_matrix_csv(dm: DistanceMatrix, fh: IO[str],
                              labels: Optional[Sequence[str]] = None) -> None:
    labels = list(labels if labels is not None else (dm.labels or range(dm.n)))
    fh.write("," + ",".join(str(l) for l in labels) + "\n")
    for i in range(dm.n):
        fh.write(str(labels[i]) + "," + ",".join(repr(float(x)) for x in dm.entries[i]) + "\n")
