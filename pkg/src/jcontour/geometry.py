"""Triangulation candidates and Pareto-front exploration selection.

Exploratory acquisitions come from "triangulation candidates": one point at
the barycenter of each Delaunay simplex of the observed inputs, plus points
pushed outward from convex-hull facets toward the domain boundary.  Such
candidates land in data-sparse regions by construction.  Among them we keep
the Pareto front of per-surrogate posterior standard deviations and pick one
member uniformly at random.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial import ConvexHull, Delaunay
from scipy.spatial import QhullError

from .data import MIN_SEPARATION, Dataset
from .errors import InvalidArgumentError, JcontourError
from .sampling import maximin_lhs

# Fraction of the available room (facet centroid to cube boundary along the
# outward normal) at which hull candidates are placed.
HULL_EXTENSION = 0.5
# Hull facets closer to the boundary than this emit no candidate.
MIN_OUTWARD_ROOM = 1e-6
# Magnitude of the deterministic jitter used to break Qhull degeneracies.
DEGENERACY_JITTER = 1e-10

SUPPORTED_DIMS = (2, 3)


class InsufficientPointsError(JcontourError, ValueError):
    """Fewer than d+1 points; no triangulation exists."""


class Provenance(str, Enum):
    INTERIOR = "interior"
    HULL = "hull"


@dataclass(frozen=True)
class Triangulation:
    vertices: np.ndarray  # (n, d)
    simplices: np.ndarray  # (#simplices, d+1) vertex indices
    hull_facets: np.ndarray  # (#facets, d) vertex indices
    hull_normals: np.ndarray  # (#facets, d) outward unit normals


@dataclass(frozen=True)
class CandidateSet:
    points: np.ndarray  # (m, d) in [0,1]^d
    provenance: tuple  # m Provenance tags
    criteria: np.ndarray | None = None  # (m, R) posterior SDs, once evaluated


def delaunay(points) -> Triangulation:
    """Delaunay triangulation of n >= d+1 points in 2 or 3 dimensions.

    Degenerate (cospherical/collinear) configurations are retried with a
    deterministic jitter of magnitude 1e-10 so runs stay reproducible.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = points.shape
    if d not in SUPPORTED_DIMS:
        raise InvalidArgumentError(f"delaunay supports d in {SUPPORTED_DIMS}, got {d}")
    if n < d + 1:
        raise InsufficientPointsError(f"need at least {d + 1} points, got {n}")
    for attempt in range(2):
        pts = points
        if attempt == 1:
            jig = np.random.default_rng(0).standard_normal(points.shape)
            pts = points + DEGENERACY_JITTER * jig
        try:
            tri = Delaunay(pts)
            hull = ConvexHull(pts)
            break
        except QhullError:
            if attempt == 1:
                raise
    normals = hull.equations[:, :-1]
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    return Triangulation(
        vertices=points,
        simplices=np.asarray(tri.simplices),
        hull_facets=np.asarray(hull.simplices),
        hull_normals=normals,
    )


def _outward_room(centroid, normal):
    """Distance from a point to the unit-cube boundary along a direction."""
    with np.errstate(divide="ignore"):
        t_hi = np.where(normal > 0, (1.0 - centroid) / normal, np.inf)
        t_lo = np.where(normal < 0, -centroid / normal, np.inf)
    return float(np.min(np.minimum(t_hi, t_lo)))


def tricands(tri: Triangulation) -> CandidateSet:
    """Candidate points at simplex barycenters and beyond hull facets."""
    interior = tri.vertices[tri.simplices].mean(axis=1)
    points = [interior]
    provenance = [Provenance.INTERIOR] * len(interior)
    for facet, normal in zip(tri.hull_facets, tri.hull_normals):
        centroid = tri.vertices[facet].mean(axis=0)
        room = _outward_room(centroid, normal)
        if room < MIN_OUTWARD_ROOM:
            continue
        points.append((centroid + HULL_EXTENSION * room * normal)[None, :])
        provenance.append(Provenance.HULL)
    pts = np.clip(np.vstack(points), 0.0, 1.0)
    return CandidateSet(points=pts, provenance=tuple(provenance))


def pareto_front(criteria) -> np.ndarray:
    """Indices of rows not strictly dominated by any other row.

    Row j dominates row i when criteria_j >= criteria_i componentwise with
    strict inequality somewhere; under this convention identical rows never
    dominate each other and the front is always nonempty.
    """
    criteria = np.atleast_2d(np.asarray(criteria, dtype=float))
    m = criteria.shape[0]
    if m == 0:
        raise InvalidArgumentError("pareto_front requires at least one row")
    ge = np.all(criteria[:, None, :] >= criteria[None, :, :], axis=-1)
    gt = np.any(criteria[:, None, :] > criteria[None, :, :], axis=-1)
    dominated = np.any(ge & gt, axis=0)
    return np.flatnonzero(~dominated)


def candidate_criteria(models, points) -> np.ndarray:
    """Per-candidate posterior SD for each surrogate, shape (m, R)."""
    return np.column_stack([m.predict_batch(points)[1] for m in models])


def _space_filling_candidates(d: int, rng) -> np.ndarray:
    return maximin_lhs(100 * d, d, rng)


def select_exploration(models, data: Dataset, rng) -> np.ndarray:
    """Pick an exploratory input from the Pareto front of posterior SDs.

    Uses triangulation candidates when a triangulation is feasible, otherwise
    falls back to a fresh space-filling candidate set of size 100d.
    """
    rng = np.random.default_rng(rng)
    d = data.d
    try:
        cand = tricands(delaunay(data.X)).points
    except (InvalidArgumentError, InsufficientPointsError, QhullError):
        cand = _space_filling_candidates(d, rng)
    cand = _drop_near_observed(cand, data.X)
    if len(cand) == 0:
        cand = _drop_near_observed(_space_filling_candidates(d, rng), data.X)
    crit = candidate_criteria(models, cand)
    front = pareto_front(crit)
    choice = front[rng.integers(len(front))]
    return cand[choice]


def _drop_near_observed(candidates, observed):
    if len(observed) == 0:
        return candidates
    d2 = np.sum((candidates[:, None, :] - observed[None, :, :]) ** 2, axis=-1)
    keep = np.min(d2, axis=1) >= MIN_SEPARATION**2
    return candidates[keep]
