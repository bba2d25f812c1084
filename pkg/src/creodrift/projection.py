"""Exact t-SNE on precomputed diagram-distance matrices, plus plot export.

Inputs are bottleneck/Wasserstein matrices, which need not embed in any
Euclidean space, so the distances feed the Gaussian kernel directly (no
squared-Euclidean recomputation). Everything is deterministic given the
seed: initial coordinates are drawn per label (hash of label mixed with
the seed), and the optimizer runs over the label-sorted order internally,
so relabeling permutes the output rows exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .diagram_distance import DiagramDistanceMatrix
from .errors import InvalidInputError
from .seeding import stream

EARLY_EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
MOMENTUM_SWITCH_ITER = 250
INIT_SIGMA = 1e-4
MIN_PROB = 1e-12


@dataclass(frozen=True)
class TsneParams:
    perplexity: float = 10.0
    iterations: int = 1000
    learning_rate: float = 200.0
    seed: int = 0

    def __post_init__(self):
        if self.perplexity < 1:
            raise InvalidInputError("perplexity must be >= 1")
        if self.iterations < 250:
            raise InvalidInputError("iterations must be >= 250")
        if self.learning_rate <= 0:
            raise InvalidInputError("learning_rate must be > 0")


@dataclass
class Projection2D:
    labels: tuple[str, ...]
    coordinates: np.ndarray  # n x 2
    kl_divergence: float
    kl_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.coordinates.shape != (len(self.labels), 2):
            raise InvalidInputError("coordinates must be n x 2 aligned with labels")
        if not np.isfinite(self.coordinates).all():
            raise InvalidInputError("non-finite coordinates")


def conditional_affinities(distances: np.ndarray, perplexity: float,
                           tol: float = 1e-5, max_steps: int = 50) -> np.ndarray:
    """Per-row Gaussian affinities with bandwidth binary-searched to the perplexity."""
    n = distances.shape[0]
    target = np.log(perplexity)
    p_cond = np.zeros((n, n))
    for i in range(n):
        d = np.delete(distances[i], i)
        d = d - d.min()  # stabilizer: same distribution, no underflow at large beta
        beta, beta_min, beta_max = 1.0, 0.0, np.inf
        probs = None
        for _ in range(max_steps):
            row = np.exp(-d * beta)
            probs = row / row.sum()
            entropy = float(-np.sum(probs * np.log(np.maximum(probs, MIN_PROB))))
            diff = entropy - target
            if abs(diff) < tol:
                break
            if diff > 0:  # entropy too high -> sharpen
                beta_min = beta
                beta = beta * 2 if beta_max == np.inf else (beta + beta_max) / 2
            else:
                beta_max = beta
                beta = (beta + beta_min) / 2
        p_cond[i, np.arange(n) != i] = probs
    return p_cond


def joint_affinities(distances: np.ndarray, perplexity: float) -> np.ndarray:
    p_cond = conditional_affinities(distances, perplexity)
    return (p_cond + p_cond.T) / (2.0 * distances.shape[0])


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def tsne_precomputed(dm: DiagramDistanceMatrix, params: TsneParams) -> Projection2D:
    """Project a diagram-distance matrix to 2-D; deterministic given params.seed."""
    n = len(dm.labels)
    if n < 3:
        raise InvalidInputError("need at least 3 entities")
    if not params.perplexity < n:
        raise InvalidInputError(f"perplexity {params.perplexity} must be < n={n}")
    if len(set(dm.labels)) != n:
        raise InvalidInputError("labels must be unique")

    # canonical label order makes the whole optimization permutation-equivariant
    order = sorted(range(n), key=lambda i: dm.labels[i])
    inverse = np.argsort(order)
    labels = [dm.labels[i] for i in order]
    distances = dm.entries[np.ix_(order, order)]

    p_joint = np.maximum(joint_affinities(distances, params.perplexity), MIN_PROB)
    np.fill_diagonal(p_joint, 0.0)

    y = np.vstack([
        stream(params.seed, "tsne-init", label).normal(size=2) * INIT_SIGMA
        for label in labels])
    velocity = np.zeros_like(y)
    kl_history = []

    def q_of(coords):
        diff = coords[:, None, :] - coords[None, :, :]
        w = 1.0 / (1.0 + np.sum(diff ** 2, axis=2))
        np.fill_diagonal(w, 0.0)
        return np.maximum(w / w.sum(), MIN_PROB), w, diff

    def grad_of(p_eff, q, w, diff):
        return 4.0 * np.einsum("ij,ijk->ik", (p_eff - q) * w, diff)

    gains = np.ones_like(y)
    q, w, diff = q_of(y)
    kl_curr = _kl(p_joint, q)
    for it in range(params.iterations):
        exaggerating = it < EXAGGERATION_ITERS
        p_eff = p_joint * EARLY_EXAGGERATION if exaggerating else p_joint
        grad = grad_of(p_eff, q, w, diff)
        momentum = 0.5 if it < MOMENTUM_SWITCH_ITER else 0.8
        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.maximum(np.where(same_sign, gains * 0.8, gains + 0.2), 0.01)
        step = momentum * velocity - params.learning_rate * gains * grad

        if exaggerating:
            y = y + step
            velocity = step
            q, w, diff = q_of(y)
            kl_curr = _kl(p_joint, q)
        else:
            # descent guard: a step that raises the monitored KL is retried
            # without momentum at halved lengths, so the trace is
            # non-increasing after the exaggeration phase
            cand = y + step
            q_c, w_c, diff_c = q_of(cand)
            kl_cand = _kl(p_joint, q_c)
            if kl_cand > kl_curr:
                step = -params.learning_rate * grad
                for _ in range(40):
                    cand = y + step
                    q_c, w_c, diff_c = q_of(cand)
                    kl_cand = _kl(p_joint, q_c)
                    if kl_cand <= kl_curr:
                        break
                    step = step / 2
                if kl_cand > kl_curr:  # effectively at a critical point
                    step = np.zeros_like(y)
                    cand, q_c, w_c, diff_c, kl_cand = y, q, w, diff, kl_curr
            y, q, w, diff, kl_curr = cand, q_c, w_c, diff_c, kl_cand
            velocity = step
        y = y - y.mean(axis=0)
        kl_history.append(kl_curr)

    return Projection2D(labels=tuple(dm.labels),
                        coordinates=np.ascontiguousarray(y[inverse]),
                        kl_divergence=kl_history[-1],
                        kl_history=kl_history)


# ---------------------------------------------------------------------------
# Scatter export
# ---------------------------------------------------------------------------

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

SVG_W, SVG_H, SVG_MARGIN = 640, 480, 48


def write_scatter_csv(proj: Projection2D, groups: dict[str, str], fh: IO[str]) -> None:
    missing = [l for l in proj.labels if l not in groups]
    if missing:
        raise InvalidInputError(f"ungrouped labels: {missing}")
    fh.write("label,group,x,y\n")
    for label, (x, yv) in zip(proj.labels, proj.coordinates):
        fh.write(f"{label},{groups[label]},{repr(float(x))},{repr(float(yv))}\n")


def render_scatter_svg(proj: Projection2D, groups: dict[str, str]) -> str:
    """Deterministic standalone SVG: one color per group plus a legend."""
    missing = [l for l in proj.labels if l not in groups]
    if missing:
        raise InvalidInputError(f"ungrouped labels: {missing}")
    names = sorted(set(groups[l] for l in proj.labels))
    color = {g: PALETTE[i % len(PALETTE)] for i, g in enumerate(names)}

    xs, ys = proj.coordinates[:, 0], proj.coordinates[:, 1]
    span_x = max(float(xs.max() - xs.min()), 1e-12)
    span_y = max(float(ys.max() - ys.min()), 1e-12)

    def sx(v):
        return SVG_MARGIN + (v - float(xs.min())) / span_x * (SVG_W - 2 * SVG_MARGIN)

    def sy(v):
        return SVG_H - SVG_MARGIN - (v - float(ys.min())) / span_y * (SVG_H - 2 * SVG_MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
        f'viewBox="0 0 {SVG_W} {SVG_H}">',
        f'<rect width="{SVG_W}" height="{SVG_H}" fill="white"/>',
    ]
    for label, (x, yv) in zip(proj.labels, proj.coordinates):
        parts.append(
            f'<circle cx="{sx(float(x)):.3f}" cy="{sy(float(yv)):.3f}" r="4" '
            f'fill="{color[groups[label]]}" fill-opacity="0.8">'
            f'<title>{label}</title></circle>')
    for i, g in enumerate(names):
        ly = 20 + 18 * i
        parts.append(f'<rect x="{SVG_W - 150}" y="{ly - 10}" width="12" height="12" '
                     f'fill="{color[g]}"/>')
        parts.append(f'<text x="{SVG_W - 132}" y="{ly}" font-size="13" '
                     f'font-family="sans-serif">{g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export_scatter(proj: Projection2D, groups: dict[str, str],
                   csv_fh: IO[str], svg_fh: IO[str]) -> None:
    write_scatter_csv(proj, groups, csv_fh)
    svg_fh.write(render_scatter_svg(proj, groups))
