import io

import numpy as np
import pytest

from creodrift.diagram_distance import DiagramDistanceMatrix
from creodrift.errors import InvalidInputError
from creodrift.projection import (
    TsneParams,
    export_scatter,
    joint_affinities,
    render_scatter_svg,
    tsne_precomputed,
    write_scatter_csv,
)


from fixtures import best_label_agreement, lloyd_kmeans


def block_matrix(n_per=10, blocks=3, within=0.1, across=0.9):
    n = n_per * blocks
    e = np.full((n, n), across)
    for b in range(blocks):
        s = slice(b * n_per, (b + 1) * n_per)
        e[s, s] = within
    np.fill_diagonal(e, 0.0)
    return DiagramDistanceMatrix(labels=tuple(f"u{i:02d}" for i in range(n)),
                                 dim=0, entries=e)


class TestAffinities:
    def test_all_zero_matrix_rows_sum_uniform(self):
        p = joint_affinities(np.zeros((4, 4)), 2.0)
        assert np.allclose(p.sum(axis=1), 0.25, atol=1e-9)
        assert np.allclose(p, p.T)

    def test_equidistant_rows_sum_uniform(self):
        e = np.ones((5, 5)) - np.eye(5)
        p = joint_affinities(e, 2.0)
        assert np.allclose(p.sum(axis=1), 0.2, atol=1e-9)
        assert np.allclose(p, p.T)

    def test_affinities_favor_near_neighbors(self):
        dm = block_matrix(n_per=5, blocks=2)
        p = joint_affinities(dm.entries, 3.0)
        assert p[0, 1:5].mean() > p[0, 5:].mean()


class TestTsne:
    def test_validation(self):
        dm = block_matrix(n_per=1, blocks=3)
        with pytest.raises(InvalidInputError):
            tsne_precomputed(dm, TsneParams(perplexity=5.0))  # perplexity >= n
        with pytest.raises(InvalidInputError):
            TsneParams(iterations=100)
        with pytest.raises(InvalidInputError):
            TsneParams(perplexity=0.5)

    def test_deterministic(self):
        dm = block_matrix(n_per=4, blocks=2)
        p = TsneParams(perplexity=3, seed=9)
        a = tsne_precomputed(dm, p)
        b = tsne_precomputed(dm, p)
        assert np.array_equal(a.coordinates, b.coordinates)
        assert a.kl_divergence == b.kl_divergence

    def test_label_permutation_permutes_rows_exactly(self):
        rng = np.random.default_rng(0)
        base = block_matrix(n_per=4, blocks=2)
        perm = rng.permutation(len(base.labels))
        shuffled = DiagramDistanceMatrix(
            labels=tuple(base.labels[i] for i in perm), dim=0,
            entries=base.entries[np.ix_(perm, perm)])
        p = TsneParams(perplexity=3, seed=4)
        a = tsne_precomputed(base, p)
        b = tsne_precomputed(shuffled, p)
        rows_a = dict(zip(a.labels, a.coordinates))
        rows_b = dict(zip(b.labels, b.coordinates))
        for label in base.labels:
            assert np.array_equal(rows_a[label], rows_b[label])

    def test_kl_non_increasing_after_exaggeration(self):
        dm = block_matrix()
        for seed in range(3):
            proj = tsne_precomputed(dm, TsneParams(perplexity=5, seed=seed))
            kl = np.array(proj.kl_history[-500:])
            assert np.all(np.diff(kl) <= 1e-6)

    def test_three_block_recovery(self):
        dm = block_matrix()
        truth = np.repeat(np.arange(3), 10)
        wins = 0
        for seed in range(10):
            proj = tsne_precomputed(dm, TsneParams(perplexity=5, seed=seed))
            lab = lloyd_kmeans(proj.coordinates.copy(), 3, np.random.default_rng(seed))
            wins += best_label_agreement(lab, truth) >= 0.95
        assert wins >= 9

    def test_equilateral_triangle_symmetry(self):
        e = np.ones((3, 3)) - np.eye(3)
        dm = DiagramDistanceMatrix(labels=("a", "b", "c"), dim=0, entries=e)
        ok = 0
        for seed in range(10):
            y = tsne_precomputed(dm, TsneParams(perplexity=1.5, seed=seed)).coordinates
            d = [np.linalg.norm(y[0] - y[1]), np.linalg.norm(y[0] - y[2]),
                 np.linalg.norm(y[1] - y[2])]
            ok += (max(d) - min(d)) / np.mean(d) < 0.1
        assert ok >= 9

    def test_coincident_pair_stays_together(self):
        e = np.array([[0, 0, 0.9], [0, 0, 0.9], [0.9, 0.9, 0]], float)
        dm = DiagramDistanceMatrix(labels=("a", "b", "c"), dim=0, entries=e)
        near = 0
        for seed in range(10):
            y = tsne_precomputed(dm, TsneParams(perplexity=1.5, seed=seed)).coordinates
            near += np.linalg.norm(y[0] - y[1]) < min(
                np.linalg.norm(y[0] - y[2]), np.linalg.norm(y[1] - y[2]))
        assert near >= 9


class TestExport:
    def proj(self):
        dm = block_matrix(n_per=2, blocks=2)
        return tsne_precomputed(dm, TsneParams(perplexity=2, seed=0))

    def groups(self, proj):
        return {l: ("left" if l < "u02" else "right") for l in proj.labels}

    def test_csv_rows(self):
        proj = self.proj()
        buf = io.StringIO()
        write_scatter_csv(proj, self.groups(proj), buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "label,group,x,y"
        assert len(lines) == 1 + len(proj.labels)

    def test_svg_markers_and_legend(self):
        proj = self.proj()
        svg = render_scatter_svg(proj, self.groups(proj))
        assert svg.count("<circle") == len(proj.labels)
        assert svg.count("<text") == 2  # one legend entry per group

    def test_reexport_byte_identical(self):
        proj = self.proj()
        g = self.groups(proj)
        assert render_scatter_svg(proj, g) == render_scatter_svg(proj, g)

    def test_ungrouped_label_error(self):
        proj = self.proj()
        with pytest.raises(InvalidInputError):
            write_scatter_csv(proj, {}, io.StringIO())
        with pytest.raises(InvalidInputError):
            render_scatter_svg(proj, {proj.labels[0]: "only"})

    def test_export_scatter_writes_both(self):
        proj = self.proj()
        csv_buf, svg_buf = io.StringIO(), io.StringIO()
        export_scatter(proj, self.groups(proj), csv_buf, svg_buf)
        assert csv_buf.getvalue().startswith("label,group")
        assert svg_buf.getvalue().startswith("<svg")
