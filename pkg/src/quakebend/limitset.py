"""Limit set point clouds from fixed points of group elements."""

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from quakebend.covering import oracle_word_count  # noqa: E402
from quakebend.errors import BudgetExceededError, PreconditionError  # noqa: E402
from quakebend.minkowski import TAU_SPEC  # noqa: E402
from quakebend.representation import Representation  # noqa: E402

logger = logging.getLogger(__name__)

DEFAULT_MAX_WORDS = 200_000
DEDUPE_DECIMALS = 9


def _ball(rho: Representation, depth: int) -> np.ndarray:
    """Images of all reduced words of length 1..depth, stacked."""
    letters = list(rho.presentation.letters)
    inverse_of = {letter: letters.index((letter[0], -letter[1])) for letter in letters}
    images = np.array([rho._letter(*letter) for letter in letters])
    frontier = images
    last = np.arange(len(letters))
    layers = [frontier]
    for _ in range(depth - 1):
        parents, children = [], []
        for j, letter in enumerate(letters):
            keep = last != inverse_of[letter]
            parents.append(frontier[keep] @ images[j])
            children.append(np.full(int(keep.sum()), j))
        frontier = np.concatenate(parents)
        last = np.concatenate(children)
        layers.append(frontier)
    return np.concatenate(layers)


def limitset_cloud(rho: Representation, depth: int, max_words: int = DEFAULT_MAX_WORDS) -> np.ndarray:
    """
    Boundary fixed points of rho(w) for reduced words 1 <= |w| <= depth, as unit vectors.

    Args:
        rho (Representation): Representation with loxodromic generators.
        depth (int): Maximal word length; 0 gives an empty cloud.
        max_words (int): Budget on the number of words.

    Returns:
        np.ndarray: ``(k, n)`` unit vectors in R^n, sorted lexicographically.
    """
    n = rho.dimension
    if depth < 0:
        raise PreconditionError(f"Depth must be non-negative, got {depth}")
    if depth == 0:
        return np.empty((0, n))
    count = oracle_word_count(rho.presentation.rank, depth) - 1
    if count > max_words:
        raise BudgetExceededError(f"Depth {depth} needs {count} words, budget is {max_words}")

    eigvals, eigvecs = np.linalg.eig(_ball(rho, depth))
    moduli = np.abs(eigvals)
    top = np.argmax(moduli, axis=1)
    bottom = np.argmin(moduli, axis=1)
    rows = np.arange(len(moduli))
    loxodromic = np.log(moduli[rows, top]) > TAU_SPEC
    points = []
    for index in (top, bottom):
        vectors = np.real(eigvecs[rows, :, index])[loxodromic]
        points.append(vectors[:, :n] / vectors[:, n:])
    cloud = np.concatenate(points)
    cloud = cloud / np.linalg.norm(cloud, axis=1, keepdims=True)
    cloud = np.unique(np.round(cloud, DEDUPE_DECIMALS), axis=0)
    logger.debug("Limit set depth %d: %d points from %d elements", depth, len(cloud), len(moduli))
    return cloud


def circle_fit_deviation(points: np.ndarray) -> float:
    """Largest distance from the points to their best-fit affine 2-plane."""
    if len(points) < 4:
        return 0.0
    centred = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(centred, full_matrices=False)
    normal_part = centred @ vt[2:].T
    return float(np.linalg.norm(normal_part, axis=1).max())


def stereographic(points: np.ndarray) -> np.ndarray:
    """Projection of S^2 from (0, 0, 1) onto the plane z = 0."""
    return points[:, :2] / (1.0 - points[:, 2:3])


def plot_cloud(points: np.ndarray, path: Path, description: str) -> Path | None:
    """Writes an SVG plot for n = 2 (unit circle) or n = 3 (stereographic); returns None otherwise."""
    n = points.shape[1]
    if n not in (2, 3):
        logger.info("No plot for dimension %d", n)
        return None
    fig, ax = plt.subplots(figsize=(6, 6))
    if n == 2:
        ax.add_patch(plt.Circle((0, 0), 1.0, fill=False, color="0.7", linewidth=0.8))
        xy = points
    else:
        xy = stereographic(points[points[:, 2] < 1.0 - 1e-9])
    ax.scatter(xy[:, 0], xy[:, 1], s=2, color="black")
    ax.set_aspect("equal")
    ax.set_axis_off()
    fig.savefig(path, format="svg", metadata={"Description": description, "Date": None})
    plt.close(fig)
    return path
