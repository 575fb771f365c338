"""Synthetic benchmark problems and the Monte Carlo campaign harness.

Each benchmark bundles R scaled test functions whose zero contours intersect
at a single point.  Inputs are exposed on the unit cube through per-function
affine maps to the native domains; all targets are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .acquisition import JclConfig
from .design import METHODS, Problem, RunRecord, run_method
from .errors import InvalidArgumentError

BENCHMARK_NAMES = ("mm-cb", "double-gramacy", "mm-ishigami-trig")


def _check_domain(x, bounds, name):
    """Validate inputs; accepts a single point (d,) or a batch (m, d)."""
    x = np.asarray(x, dtype=float)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    if x.shape[-1] != len(bounds) or x.ndim not in (1, 2):
        raise InvalidArgumentError(f"{name} expects {len(bounds)} inputs")
    if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
        raise InvalidArgumentError(f"{name} input outside domain {bounds}")
    return tuple(np.moveaxis(x, -1, 0))


MM2_BOUNDS = ((-4.0, 7.0), (-3.0, 8.0))
CB_BOUNDS = ((-1.0, 1.0), (0.0, 1.0))
DG_BOUNDS = ((-2.0, 6.0), (-2.0, 6.0))
MM3_BOUNDS = ((-4.0, 7.0), (-3.0, 8.0), (0.0, 1.0))
ISHIGAMI_BOUNDS = ((-math.pi, math.pi),) * 3
TRIG_BOUNDS = ((0.0, 1.0),) * 3


def eval_multimodal2(x) -> float:
    """2D multimodal function, scaled and shifted so a zero contour exists."""
    x1, x2 = _check_domain(x, MM2_BOUNDS, "multimodal2")
    raw = (x2 - 1.0) / 20.0 * (x1**2 + 4.0) - np.sin(2.5 * x1) - 2.0
    return raw / 3.556 - 0.00678656


def eval_camelback(x) -> float:
    """Rescaled six-hump camelback in warped coordinates u, v."""
    x1, x2 = _check_domain(x, CB_BOUNDS, "camelback")
    u = 1.2 * x1 - 0.1
    v = 0.9 * x2
    raw = (
        u**2 * (4.0 - 2.1 * u**2 + u**4 / 3.0)
        + 2.0 * u * v
        + (26.0 / 9.0) * v**2 * (-4.0 + 16.0 * v**2 / 9.0)
        - 0.1
    )
    return raw / 2.242 - 0.00719266


def eval_gramacy1(x) -> float:
    """First double-Gramacy function: a single hill over a flat plain.

    The exponent uses -(x1 - 0.5)^2: with it the stated 1/9.27 scale factor
    matches the function's standard deviation over the domain and exactly one
    joint root exists, both of which fail for the sign variant.
    """
    x1, x2 = _check_domain(x, DG_BOUNDS, "gramacy1")
    raw = x1 * np.exp(-((x1 - 0.5) ** 2) - (x2 + 0.5) ** 2) - 0.1
    return 9.27 * raw + 0.09830494


def eval_gramacy2(x) -> float:
    """Second double-Gramacy function: a valley along the x1 axis."""
    x1, x2 = _check_domain(x, DG_BOUNDS, "gramacy2")
    raw = (x2 + 0.5) * np.exp(-((x2 / 4.0) ** 2) - x1**2) - 1.0
    return raw / 0.4975 - 0.01300846


def eval_multimodal3(x) -> float:
    """3D extension of the multimodal function."""
    x1, x2, x3 = _check_domain(x, MM3_BOUNDS, "multimodal3")
    raw = (
        (x2 - 1.0) / 20.0 * (x1**2 + 4.0)
        - np.sin(2.5 * x1)
        - 2.0
        + x3
        - 0.00052352
    )
    return raw / 3.588


def eval_ishigami(x) -> float:
    """Shifted and scaled Ishigami function."""
    x1, x2, x3 = _check_domain(x, ISHIGAMI_BOUNDS, "ishigami")
    raw = (
        np.sin(x1)
        + 7.0 * np.sin(x2) ** 2
        + 0.1 * x3**4 * np.sin(x1)
        + 2.79921514
    )
    return raw / 3.72


def eval_trig(x) -> float:
    """Sum of sines, cosines, a square and a square root on the unit cube."""
    x1, x2, x3 = _check_domain(x, TRIG_BOUNDS, "trig")
    raw = (
        np.sin(x1)
        + np.cos(x1)
        + x2**2
        + np.sqrt(x3)
        + np.sin(x3)
        - 3.05174287
    )
    return raw / 0.582


@dataclass(frozen=True)
class BenchmarkSpec:
    """A named benchmark: functions, native domains, defaults."""

    name: str
    d: int
    R: int
    natives: tuple  # R native-domain evaluators
    bounds: tuple  # R tuples of per-input (lo, hi) native bounds
    surrogate_kind: str
    n0: int
    n_max: int
    epsilon: float = 1e-3


_SPECS = {
    "mm-cb": BenchmarkSpec(
        name="mm-cb",
        d=2,
        R=2,
        natives=(eval_multimodal2, eval_camelback),
        bounds=(MM2_BOUNDS, CB_BOUNDS),
        surrogate_kind="gp",
        n0=5,
        n_max=25,
    ),
    "double-gramacy": BenchmarkSpec(
        name="double-gramacy",
        d=2,
        R=2,
        natives=(eval_gramacy1, eval_gramacy2),
        bounds=(DG_BOUNDS, DG_BOUNDS),
        surrogate_kind="dgp",
        n0=5,
        n_max=25,
    ),
    "mm-ishigami-trig": BenchmarkSpec(
        name="mm-ishigami-trig",
        d=3,
        R=3,
        natives=(eval_multimodal3, eval_ishigami, eval_trig),
        bounds=(MM3_BOUNDS, ISHIGAMI_BOUNDS, TRIG_BOUNDS),
        surrogate_kind="gp",
        n0=10,
        n_max=40,
    ),
}


def get_spec(name: str) -> BenchmarkSpec:
    try:
        return _SPECS[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown benchmark {name!r}; known: {', '.join(BENCHMARK_NAMES)}"
        ) from None


def to_native(u, bounds) -> np.ndarray:
    """Affine map from the unit cube to a native domain."""
    u = np.asarray(u, dtype=float)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return lo + u * (hi - lo)


def from_native(x, bounds) -> np.ndarray:
    """Inverse affine map, native domain back to the unit cube."""
    x = np.asarray(x, dtype=float)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return (x - lo) / (hi - lo)


def _wrap_unit_cube(native, bounds):
    def f(u):
        return float(native(to_native(u, bounds)))

    return f


def make_problem(spec: BenchmarkSpec | str) -> Problem:
    """Unit-cube Problem for a benchmark, with zero targets."""
    if isinstance(spec, str):
        spec = get_spec(spec)
    evaluators = tuple(
        _wrap_unit_cube(f, b) for f, b in zip(spec.natives, spec.bounds)
    )
    return Problem(
        d=spec.d,
        R=spec.R,
        evaluators=evaluators,
        targets=np.zeros(spec.R),
        name=spec.name,
    )


def default_config(spec: BenchmarkSpec | str, **overrides) -> JclConfig:
    if isinstance(spec, str):
        spec = get_spec(spec)
    kwargs = dict(
        targets=np.zeros(spec.R),
        n0=spec.n0,
        n_max=spec.n_max,
        epsilon=spec.epsilon,
    )
    kwargs.update(overrides)
    return JclConfig(**kwargs)


def grid_min_sum_squares(spec: BenchmarkSpec | str, points_per_dim: int = 400):
    """Brute-force grid minimum of the summed squared responses.

    A small value confirms a near-exact joint root exists in-domain.  Returns
    ``(min_value, argmin_unit_cube)``; evaluation is chunked along the last
    axis to bound memory.
    """
    if isinstance(spec, str):
        spec = get_spec(spec)
    g = np.linspace(0.0, 1.0, points_per_dim)
    lead = np.stack(
        np.meshgrid(*([g] * (spec.d - 1)), indexing="ij"), axis=-1
    ).reshape(-1, spec.d - 1)
    best, best_u = np.inf, None
    for last in g:
        U = np.column_stack([lead, np.full(len(lead), last)])
        total = np.zeros(len(U))
        for f, b in zip(spec.natives, spec.bounds):
            total += np.asarray(f(to_native(U, b))) ** 2
        i = int(np.argmin(total))
        if total[i] < best:
            best, best_u = float(total[i]), U[i]
    return best, best_u


@dataclass
class CampaignResult:
    """Per-(method, repetition) traces plus per-n percentile summaries."""

    spec_name: str
    records: dict = field(default_factory=dict)  # method -> list[RunRecord]
    failures: list = field(default_factory=list)  # (method, rep, message)

    def distance_matrix(self, method: str, n_max: int) -> np.ndarray:
        """Best-distance values, one row per completed run, carry-forward.

        Runs that stopped early keep their terminal distance at later n.
        """
        rows = []
        for rec in self.records[method]:
            d = np.full(n_max, np.nan)
            for row in rec.rows:
                d[row.n - 1] = row.d_n
            # observations before the first row's n are impossible by
            # construction (n starts at 1), so only forward-fill remains
            last = np.nan
            for i in range(n_max):
                if np.isnan(d[i]):
                    d[i] = last
                else:
                    last = d[i]
            rows.append(d)
        return np.array(rows)

    def percentiles(self, method: str, n_max: int, qs=(10, 50, 90)) -> np.ndarray:
        """(n_max, len(qs)) array of D_n percentiles across repetitions."""
        mat = self.distance_matrix(method, n_max)
        return np.percentile(mat, qs, axis=0).T


def campaign_seed(base_seed: int, rep: int) -> int:
    """Per-run seed: the method tag is already folded into each run's RNG
    substream, so offsetting by repetition is enough for independence and
    keeps repetition 0 reproducible from the base seed alone."""
    return base_seed + rep


def run_campaign(
    spec: BenchmarkSpec | str,
    methods=METHODS,
    reps: int = 1,
    base_seed: int = 0,
    surrogate_kind: str | None = None,
    config: JclConfig | None = None,
) -> CampaignResult:
    """Monte Carlo repetitions of each method with re-randomized designs."""
    if isinstance(spec, str):
        spec = get_spec(spec)
    if reps < 1:
        raise InvalidArgumentError("reps must be at least 1")
    problem = make_problem(spec)
    cfg = config or default_config(spec)
    kind = surrogate_kind or spec.surrogate_kind
    result = CampaignResult(spec_name=spec.name)
    for method in methods:
        if method not in METHODS:
            raise InvalidArgumentError(f"unknown method {method!r}")
        runs = []
        for rep in range(reps):
            seed = campaign_seed(base_seed, rep)
            rec = run_method(method, problem, cfg, kind, seed)
            if rec.status == "failed":
                result.failures.append((method, rep, "numerical failure"))
            else:
                runs.append(rec)
        result.records[method] = runs
    return result
