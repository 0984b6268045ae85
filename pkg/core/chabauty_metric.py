"""A computable metric for the Chabauty topology with certified error bars.

Points of G = R^a x Z^b x T^c x F get the product metric (Euclidean on
R^a and Z^b, flat on T^c, 0/1 on each finite coordinate). G u {inf}
carries d^(x, y) = min(d(x, y), r(x) + r(y)) with r(x) = 1/(1 + |x|) and
d^(x, inf) = r(x). Two subgroups are compared through the Hausdorff
distance of their truncated nets, each with inf added.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import ceil, prod, sqrt
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import AmbientMismatchError, PreconditionError, ResourceCapError
from .exact_linalg import (
    LatticeBasis,
    QMatrix,
    RationalLike,
    enumerate_lattice_points,
    format_fraction,
    sqrt_bounds,
    to_fraction,
)
from .report import VerificationReport, Verdict
from .subgroup_calculus import AmbientGroup, ElementarySubgroup, orthogonal

logger = logging.getLogger("chabauty.metric")

DEFAULT_NET_CAP = 200_000
FLOAT_MARGIN = Fraction(1, 10**9)

INFINITY = None
Point = Optional[Sequence[float]]


@dataclass(frozen=True)
class MetricParams:
    r_cut: Fraction
    delta: Fraction
    net_cap: int = DEFAULT_NET_CAP

    def __post_init__(self):
        object.__setattr__(self, "r_cut", to_fraction(self.r_cut))
        object.__setattr__(self, "delta", to_fraction(self.delta))
        if self.r_cut < 1:
            raise PreconditionError("r_cut must be at least 1", {"r_cut": format_fraction(self.r_cut)})
        if not 0 < self.delta <= 1:
            raise PreconditionError("delta must lie in (0, 1]", {"delta": format_fraction(self.delta)})
        if self.net_cap < 1:
            raise PreconditionError("net size cap must be positive")

    @property
    def slack(self) -> Fraction:
        """Net discretization plus everything beyond the truncation radius."""
        return self.delta + Fraction(2) / (1 + self.r_cut)

    def refined(self, factor: int = 2) -> "MetricParams":
        return MetricParams(self.r_cut * factor, self.delta / factor, self.net_cap)

    def to_dict(self) -> dict:
        return {"r_cut": format_fraction(self.r_cut), "delta": format_fraction(self.delta)}


@dataclass(frozen=True)
class DistanceEstimate:
    """Certified interval around the Chabauty distance."""

    lower: Fraction
    upper: Fraction
    params: MetricParams

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def contains(self, value: Union[float, Fraction]) -> bool:
        return float(self.lower) <= float(value) <= float(self.upper)

    def to_dict(self) -> dict:
        return {
            "lower": format_fraction(self.lower),
            "upper": format_fraction(self.upper),
            "lower_float": float(self.lower),
            "upper_float": float(self.upper),
            "params": self.params.to_dict(),
        }


# Point metric

def point_norm(ambient: AmbientGroup, x: Sequence[float]) -> float:
    """d(x, 0) for a canonical representative."""
    total = sum(float(x[i]) ** 2 for i in list(ambient.real_rows) + list(ambient.integer_rows))
    total += sum(_wrap(float(x[i])) ** 2 for i in ambient.torus_rows)
    total += sum(1.0 for i, n in zip(ambient.finite_rows, ambient.finite) if round(float(x[i])) % n)
    return sqrt(total)


def point_distance(ambient: AmbientGroup, x: Sequence[float], y: Sequence[float]) -> float:
    return point_norm(ambient, [_difference(ambient, i, a, b) for i, (a, b) in enumerate(zip(x, y))])


def _difference(ambient: AmbientGroup, i: int, a, b) -> float:
    if i in ambient.finite_rows:
        n = ambient.finite[i - ambient.finite_rows.start]
        return float((round(float(a)) - round(float(b))) % n)
    return float(a) - float(b)


def _wrap(t: float) -> float:
    return t - np.floor(t + 0.5)


def compactified_dist(ambient: AmbientGroup, x: Point, y: Point) -> float:
    """d^ on G u {inf}; ``None`` stands for the point at infinity."""
    if x is INFINITY and y is INFINITY:
        return 0.0
    if y is INFINITY:
        return 1.0 / (1.0 + point_norm(ambient, x))
    if x is INFINITY:
        return 1.0 / (1.0 + point_norm(ambient, y))
    rx = 1.0 / (1.0 + point_norm(ambient, x))
    ry = 1.0 / (1.0 + point_norm(ambient, y))
    return min(point_distance(ambient, x, y), rx + ry)


# Nets

def _canonical_rows(ambient: AmbientGroup, pts: np.ndarray) -> np.ndarray:
    out = pts.copy()
    for i in ambient.torus_rows:
        out[:, i] = out[:, i] - np.floor(out[:, i] + 0.5)
    for i, n in zip(ambient.finite_rows, ambient.finite):
        out[:, i] = np.mod(np.rint(out[:, i]), n)
    return out


def _norms(ambient: AmbientGroup, pts: np.ndarray) -> np.ndarray:
    metric_rows = list(ambient.real_rows) + list(ambient.integer_rows) + list(ambient.torus_rows)
    sq = (pts[:, metric_rows] ** 2).sum(axis=1) if metric_rows else np.zeros(len(pts))
    if ambient.finite:
        sq = sq + (pts[:, list(ambient.finite_rows)] != 0).sum(axis=1)
    return np.sqrt(sq)


@lru_cache(maxsize=32)
def sample_points(h: ElementarySubgroup, params: MetricParams) -> np.ndarray:
    """A delta-net of the part of H within ``r_cut`` of 0, as canonical float rows.

    Lattice points come from exact enumeration; continuous directions get a
    grid of step delta / sum |v_i|_1, so rounding along V moves a point by
    at most delta / 2. Torus and finite rows are weighted during enumeration
    so each canonical point is reached through few lifts.
    """
    ambient = h.ambient
    dim = ambient.dim
    directions = h.cont_gens.columns()
    pivots = h.pivots()
    real = set(ambient.real_rows)
    compact = set(ambient.torus_rows) | set(ambient.finite_rows)

    if directions:
        step = params.delta / sum((sum((abs(x) for x in v), Fraction(0)) for v in directions), Fraction(0))
        bounds = [params.r_cut if p in real else Fraction(1, 2) for p in pivots]
        counts = [ceil(b / step) for b in bounds]
    else:
        step, bounds, counts = Fraction(1), [], []
    grid_size = prod(2 * k + 1 for k in counts)

    def along(rows) -> Fraction:
        return sum((b * sum((abs(v[i]) for i in rows), Fraction(0)) for b, v in zip(bounds, directions)),
                   Fraction(0))

    open_reach = params.r_cut + along(set(range(dim)) - compact) + params.delta
    torus_reach = Fraction(0)
    if ambient.c:
        _, half_diagonal = sqrt_bounds(Fraction(ambient.c, 4))
        torus_reach = half_diagonal + along(ambient.torus_rows) + params.delta
    # finite lifts are searched around the middle residue (n - 1) / 2
    compact_sq = torus_reach ** 2 + sum((Fraction(n - 1, 2) ** 2 for n in ambient.finite), Fraction(0))
    _, compact_reach = sqrt_bounds(compact_sq)
    weight = max(1, ceil(open_reach / compact_reach)) if compact_reach else 1
    bound_sq = open_reach ** 2 + weight ** 2 * compact_sq
    middle = [Fraction(0)] * dim
    for i, n in zip(ambient.finite_rows, ambient.finite):
        middle[i] = weight * Fraction(n - 1, 2)

    lattice = h.lattice()
    weighted = LatticeBasis(QMatrix.from_columns(
        [[x * weight if i in compact else x for i, x in enumerate(col)] for col in lattice.basis.columns()], dim))
    try:
        coeffs = [c for c, _ in enumerate_lattice_points(weighted, bound_sq, center=middle, cap=params.net_cap)]
    except ResourceCapError:
        raise ResourceCapError("net size exceeds the configured cap", {"cap": params.net_cap})

    if coeffs and lattice.rank:
        basis = np.array([[float(x) for x in col] for col in lattice.basis.columns()])
        base = np.unique(_canonical_rows(ambient, np.array(coeffs, dtype=float) @ basis), axis=0)
    else:
        base = np.zeros((1, dim))
    if grid_size * len(base) > params.net_cap:
        raise ResourceCapError("net size exceeds the configured cap",
                               {"cap": params.net_cap, "size": grid_size * len(base)})
    if directions:
        steps = [np.arange(-k, k + 1) * float(step) for k in counts]
        ts = np.array(list(itertools.product(*steps)))
        shifts = ts @ np.array([[float(x) for x in v] for v in directions])
        pts = (base[:, None, :] + shifts[None, :, :]).reshape(-1, dim)
    else:
        pts = base

    pts = _canonical_rows(ambient, pts)
    keep = _norms(ambient, pts) <= float(params.r_cut + params.delta) + 1e-9
    net = np.unique(pts[keep], axis=0)
    # cached, so shared between callers
    net.flags.writeable = False
    logger.debug("net of %d points for subgroup of dimension %d", len(net), h.continuous_dim)
    return net


# Hausdorff distance

def _embed(ambient: AmbientGroup, pts: np.ndarray) -> np.ndarray:
    """Euclidean coordinates realizing the product metric; finite values become scaled one-hot blocks."""
    cols = [pts[:, list(ambient.real_rows) + list(ambient.integer_rows) + list(ambient.torus_rows)]]
    for i, n in zip(ambient.finite_rows, ambient.finite):
        onehot = np.zeros((len(pts), n))
        onehot[np.arange(len(pts)), pts[:, i].astype(int)] = 1 / sqrt(2)
        cols.append(onehot)
    return np.hstack(cols)


def _directed(ambient: AmbientGroup, a: np.ndarray, b: np.ndarray) -> float:
    """max over x in A of min(d(x, B), r(x)); inf belongs to both sets."""
    if len(a) == 0:
        return 0.0
    radius = 1.0 / (1.0 + _norms(ambient, a))
    if len(b) == 0:
        return float(radius.max())
    eb = _embed(ambient, b)
    torus_cols = range(ambient.a + ambient.b, ambient.a + ambient.b + ambient.c)
    copies = []
    for shift in itertools.product((-1.0, 0.0, 1.0), repeat=ambient.c):
        moved = eb.copy()
        for col, s in zip(torus_cols, shift):
            moved[:, col] += s
        copies.append(moved)
    tree = cKDTree(np.vstack(copies))
    nearest, _ = tree.query(_embed(ambient, a))
    return float(np.minimum(nearest, radius).max())


def sampled_hausdorff(ambient: AmbientGroup, a: np.ndarray, b: np.ndarray) -> float:
    return max(_directed(ambient, a, b), _directed(ambient, b, a))


def chabauty_distance(h: ElementarySubgroup, k: ElementarySubgroup, params: MetricParams) -> DistanceEstimate:
    """Interval [v - slack, v + slack] around the sampled Hausdorff value v."""
    if h.ambient != k.ambient:
        raise AmbientMismatchError("subgroups live in different ambient groups",
                                   {"left": h.ambient.to_dict(), "right": k.ambient.to_dict()})
    low = high = Fraction(0)
    if h != k:
        raw = sampled_hausdorff(h.ambient, sample_points(h, params), sample_points(k, params))
        if raw > 0:
            value = Fraction(raw).limit_denominator(10**12)
            low, high = value - FLOAT_MARGIN, value + FLOAT_MARGIN
    slack = params.slack
    return DistanceEstimate(max(Fraction(0), low - slack), high + slack, params)


def converges_to(
    seq: Sequence[ElementarySubgroup],
    limit: ElementarySubgroup,
    params: MetricParams,
    eps: RationalLike,
    dual: bool = False,
    label: str = "sequence",
    report: Optional[VerificationReport] = None,
) -> VerificationReport:
    """Check d(seq[n], limit) -> 0 up to eps, and the same after taking orthogonals when ``dual``.

    Each series is judged by _sequence_verdict; FAIL is only reported when
    the last lower bound reaches eps. INCONCLUSIVE when the slack alone
    reaches eps or a cap was hit.
    """
    eps = to_fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    for h in seq:
        if h.ambient != limit.ambient:
            raise AmbientMismatchError("sequence terms and limit live in different ambient groups")
    report = report or VerificationReport(suite="convergence", params=params.to_dict())

    series = {"direct": (list(seq), limit)}
    if dual:
        series["dual"] = ([orthogonal(h) for h in seq], orthogonal(limit))

    data: dict = {"eps": format_fraction(eps), "slack": format_fraction(params.slack)}
    verdicts = []
    for name, (terms, target) in series.items():
        try:
            estimates = [chabauty_distance(h, target, params) for h in terms]
        except ResourceCapError as exc:
            data[name] = {"error": exc.to_dict()}
            verdicts.append(Verdict.INCONCLUSIVE)
            continue
        data[name] = [e.to_dict() for e in estimates]
        verdicts.append(_sequence_verdict(estimates, eps, params))

    if Verdict.FAIL in verdicts:
        verdict = Verdict.FAIL
    elif Verdict.INCONCLUSIVE in verdicts:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS
    if verdict is Verdict.INCONCLUSIVE and params.slack >= eps:
        data["hint"] = "slack dominates eps: increase r_cut or decrease delta"
    last = data.get("direct")
    if isinstance(last, list) and last:
        data["lower"], data["upper"] = last[-1]["lower"], last[-1]["upper"]
    report.add(label, verdict, **data)
    return report


def _sequence_verdict(estimates: Sequence[DistanceEstimate], eps: Fraction, params: MetricParams) -> Verdict:
    """PASS, FAIL or INCONCLUSIVE for one series of estimates.

    PASS needs the last upper bound below eps, and from the first upper
    bound below eps on, the bounds stay below eps and never rise by more
    than an interval width. Such a tail is non-increasing up to the
    bracket. FAIL needs the last lower bound at or above eps. A tail that
    ends below eps but leaves it or jumps is INCONCLUSIVE.
    """
    if not estimates or params.slack >= eps:
        return Verdict.INCONCLUSIVE
    final = estimates[-1]
    if final.upper < eps:
        start = next(i for i, e in enumerate(estimates) if e.upper < eps)
        tail = estimates[start:]
        settled = all(e.upper < eps for e in tail)
        bracketed = all(b.upper <= a.upper + b.width for a, b in zip(tail, tail[1:]))
        return Verdict.PASS if settled and bracketed else Verdict.INCONCLUSIVE
    if final.lower >= eps:
        return Verdict.FAIL
    return Verdict.INCONCLUSIVE
