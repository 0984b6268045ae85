"""Exact rational linear algebra and lattice kernels.

Everything here works over ``fractions.Fraction``; normal forms and
solves are delegated to sympy's ``DomainMatrix`` over ZZ/QQ. Floating
point only appears in :func:`covering_radius_upper`, where squared
distances are evaluated as exact int64 arithmetic in numpy.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import ceil, floor, gcd, isqrt
from typing import Iterator, Optional, Sequence, Union

import numpy as np
from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import hermite_normal_form, smith_normal_decomp

from .errors import PreconditionError, ResourceCapError, SchemaError

RationalLike = Union[int, str, Fraction]
Vector = tuple[Fraction, ...]


def to_fraction(value: RationalLike) -> Fraction:
    """Parse an int, a ``"p/q"`` string or a Fraction into a reduced Fraction."""
    if isinstance(value, bool):
        raise SchemaError(f"not a rational literal: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise SchemaError(f"not a rational literal: {value!r}")
    raise SchemaError(f"not a rational literal: {value!r}")


def format_fraction(value: Fraction) -> str:
    """String form used in JSON: ``"p/q"`` or ``"p"``."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def lcm_denominator(values) -> int:
    """Least common multiple of the denominators of ``values``."""
    return reduce(lambda acc, x: acc * x.denominator // gcd(acc, x.denominator), values, 1)


def sqrt_bounds(value: Fraction, bits: int = 48) -> tuple[Fraction, Fraction]:
    """Rational ``(lo, hi)`` with ``lo <= sqrt(value) <= hi``; exact for rational squares."""
    if value < 0:
        raise PreconditionError("square root of a negative rational")
    num, den = value.numerator, value.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        root = Fraction(rn, rd)
        return root, root
    scale = 1 << bits
    low = isqrt(num * scale * scale // den)
    return Fraction(low, scale), Fraction(low + 1, scale)


@dataclass(frozen=True)
class QMatrix:
    """Immutable rational matrix stored row-major."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0 or len(self.entries) != self.rows * self.cols:
            raise PreconditionError(
                "matrix dimensions do not match entry count",
                {"rows": self.rows, "cols": self.cols, "entries": len(self.entries)},
            )

    # Construction
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RationalLike]], cols: Optional[int] = None) -> "QMatrix":
        """Build from a list of rows."""
        n_rows = len(rows)
        n_cols = len(rows[0]) if rows else (cols or 0)
        entries = []
        for row in rows:
            if len(row) != n_cols:
                raise SchemaError("ragged matrix rows")
            entries.extend(to_fraction(x) for x in row)
        return cls(n_rows, n_cols, tuple(entries))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[RationalLike]], rows: int) -> "QMatrix":
        """Build from a list of columns, each of length ``rows``."""
        for col in columns:
            if len(col) != rows:
                raise SchemaError(f"column of length {len(col)} in a space of dimension {rows}")
        cols = [[to_fraction(x) for x in col] for col in columns]
        entries = tuple(cols[j][i] for i in range(rows) for j in range(len(cols)))
        return cls(rows, len(cols), entries)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(n, n, tuple(Fraction(int(i == j)) for i in range(n) for j in range(n)))

    # Access
    def __getitem__(self, index: tuple[int, int]) -> Fraction:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> Vector:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    # Arithmetic
    def transpose(self) -> "QMatrix":
        return QMatrix(self.cols, self.rows, tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise PreconditionError("matrix product shape mismatch")
        out = []
        for i in range(self.rows):
            row = self.row(i)
            for j in range(other.cols):
                out.append(sum((row[k] * other[k, j] for k in range(self.cols)), Fraction(0)))
        return QMatrix(self.rows, other.cols, tuple(out))

    def __add__(self, other: "QMatrix") -> "QMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise PreconditionError("matrix sum shape mismatch")
        return QMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def scale(self, factor: RationalLike) -> "QMatrix":
        f = to_fraction(factor)
        return QMatrix(self.rows, self.cols, tuple(x * f for x in self.entries))

    def apply(self, vector: Sequence[Fraction]) -> Vector:
        """Matrix-vector product."""
        if len(vector) != self.cols:
            raise PreconditionError("vector length does not match matrix columns")
        return tuple(sum((a * b for a, b in zip(self.row(i), vector)), Fraction(0)) for i in range(self.rows))

    def hstack(self, other: "QMatrix") -> "QMatrix":
        if self.rows != other.rows:
            raise PreconditionError("cannot concatenate columns of different heights")
        return QMatrix.from_columns(self.columns() + other.columns(), self.rows)

    def select_rows(self, indices: Sequence[int]) -> "QMatrix":
        return QMatrix(len(indices), self.cols, tuple(x for i in indices for x in self.row(i)))

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.entries)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.entries)


# sympy bridge

def _to_qq(m: QMatrix) -> DomainMatrix:
    return DomainMatrix([[QQ(x.numerator, x.denominator) for x in m.row(i)] for i in range(m.rows)],
                        (m.rows, m.cols), QQ)


def _to_zz(m: QMatrix) -> DomainMatrix:
    return DomainMatrix([[ZZ(int(x)) for x in m.row(i)] for i in range(m.rows)], (m.rows, m.cols), ZZ)


def _from_domain(dm: DomainMatrix) -> QMatrix:
    rows, cols = dm.shape
    entries = []
    for row in dm.to_list():
        for x in row:
            entries.append(Fraction(int(x.numerator), int(x.denominator)) if dm.domain.is_QQ else Fraction(int(x)))
    return QMatrix(rows, cols, tuple(entries))


def _nonzero_columns(m: QMatrix) -> QMatrix:
    return QMatrix.from_columns([c for c in m.columns() if any(c)], m.rows)


def rref(m: QMatrix) -> tuple[QMatrix, tuple[int, ...]]:
    """Reduced row echelon form over QQ and the pivot columns."""
    if m.rows == 0 or m.cols == 0:
        return m, ()
    reduced, pivots = _to_qq(m).rref()
    return _from_domain(reduced), tuple(pivots)


def rank(m: QMatrix) -> int:
    return len(rref(m)[1])


def nullspace(m: QMatrix) -> list[Vector]:
    """Basis of ``{x : m x = 0}`` read off the reduced row echelon form."""
    reduced, pivots = rref(m)
    free = [j for j in range(m.cols) if j not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * m.cols
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -reduced[r, f]
        basis.append(tuple(vec))
    return basis


def solve(m: QMatrix, rhs: Sequence[Fraction]) -> Optional[Vector]:
    """One solution of ``m x = rhs`` or None when inconsistent (free variables set to 0)."""
    if len(rhs) != m.rows:
        raise PreconditionError("right-hand side length does not match matrix rows")
    if m.cols == 0:
        return () if all(x == 0 for x in rhs) else None
    if m.rows == 0:
        return tuple(Fraction(0) for _ in range(m.cols))
    augmented = QMatrix.from_columns(m.columns() + [tuple(rhs)], m.rows)
    reduced, pivots = rref(augmented)
    if m.cols in pivots:
        return None
    x = [Fraction(0)] * m.cols
    for r, p in enumerate(pivots):
        x[p] = reduced[r, m.cols]
    return tuple(x)


def inverse(m: QMatrix) -> QMatrix:
    if m.rows != m.cols:
        raise PreconditionError("inverse of a non-square matrix")
    if m.rows == 0:
        return m
    if determinant(m) == 0:
        raise PreconditionError("matrix is singular")
    return _from_domain(_to_qq(m).inv())


def determinant(m: QMatrix) -> Fraction:
    if m.rows != m.cols:
        raise PreconditionError("determinant of a non-square matrix")
    if m.rows == 0:
        return Fraction(1)
    d = _to_qq(m).det()
    return Fraction(int(d.numerator), int(d.denominator))


def row_space_basis(vectors: Sequence[Sequence[Fraction]], dim: int) -> tuple[QMatrix, tuple[int, ...]]:
    """Canonical basis (as columns) of the rational span of ``vectors``, with pivot coordinates."""
    if not vectors:
        return QMatrix.zeros(dim, 0), ()
    reduced, pivots = rref(QMatrix.from_rows([list(v) for v in vectors]))
    return QMatrix.from_columns([reduced.row(r) for r in range(len(pivots))], dim), pivots


# Normal forms

def hnf(m: QMatrix) -> QMatrix:
    """Column Hermite normal form over the rationals.

    Clears denominators, takes the integer HNF and rescales. The result
    spans the same Z-module as the columns of ``m`` and is unique for it.
    """
    if m.rows == 0 or m.cols == 0 or m.is_zero():
        return QMatrix.zeros(m.rows, 0)
    denom = lcm_denominator(m.entries)
    integral = _from_domain(hermite_normal_form(_to_zz(m.scale(denom))))
    return _nonzero_columns(integral.scale(Fraction(1, denom)))


def snf(m: QMatrix) -> tuple[QMatrix, list[Fraction], QMatrix]:
    """Smith normal form ``U m V = diag`` with unimodular U, V.

    The diagonal is returned rescaled by the cleared denominator, so for
    integer input it is the usual invariant factor list.
    """
    k = min(m.rows, m.cols)
    if k == 0:
        return QMatrix.identity(m.rows), [], QMatrix.identity(m.cols)
    denom = lcm_denominator(m.entries)
    smf, s, t = smith_normal_decomp(_to_zz(m.scale(denom)))
    diag = _from_domain(smf)
    return _from_domain(s), [diag[i, i] / denom for i in range(k)], _from_domain(t)


def invariant_factors(m: QMatrix) -> list[int]:
    """Nonzero SNF diagonal of an integer matrix, made positive."""
    _, diag, _ = snf(m)
    return [abs(int(x)) for x in diag if x != 0]


# Lattices

@dataclass(frozen=True)
class LatticeBasis:
    """Columns of ``basis`` are a Z-basis of a discrete subgroup of Q^d."""

    basis: QMatrix

    def __post_init__(self):
        if rank(self.basis) != self.basis.cols:
            raise PreconditionError("lattice basis columns are linearly dependent")

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[RationalLike]], ambient_dim: int) -> "LatticeBasis":
        return cls(QMatrix.from_columns(columns, ambient_dim))

    @property
    def ambient_dim(self) -> int:
        return self.basis.rows

    @property
    def rank(self) -> int:
        return self.basis.cols

    def gram(self) -> QMatrix:
        return self.basis.transpose() @ self.basis

    def point(self, coeffs: Sequence[int]) -> Vector:
        return self.basis.apply([Fraction(c) for c in coeffs])

    def scaled(self, factor: RationalLike) -> "LatticeBasis":
        return LatticeBasis(self.basis.scale(factor))

    def same_lattice(self, other: "LatticeBasis") -> bool:
        return self.ambient_dim == other.ambient_dim and hnf(self.basis) == hnf(other.basis)


def norm_sq(v: Sequence[Fraction]) -> Fraction:
    return sum((x * x for x in v), Fraction(0))


def dual_lattice(b: LatticeBasis) -> LatticeBasis:
    """Dual lattice inside the rational span: ``D = B (B^T B)^-1``."""
    if b.rank == 0:
        return b
    return LatticeBasis(b.basis @ inverse(b.gram()))


def gram_schmidt(b: LatticeBasis) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Exact Gram-Schmidt data: ``mu[i][j]`` for j < i and squared norms of b*_i."""
    cols = b.basis.columns()
    stars: list[Vector] = []
    norms: list[Fraction] = []
    mu = [[Fraction(0)] * b.rank for _ in range(b.rank)]
    for i, v in enumerate(cols):
        w = list(v)
        for j in range(i):
            mu[i][j] = sum((x * y for x, y in zip(v, stars[j])), Fraction(0)) / norms[j]
            w = [wi - mu[i][j] * sj for wi, sj in zip(w, stars[j])]
        stars.append(tuple(w))
        norms.append(norm_sq(w))
    return mu, norms


def _coefficient_range(center: Fraction, radius_sq: Fraction) -> range:
    """Integers c with ``(c - center)^2 <= radius_sq``."""
    if radius_sq < 0:
        return range(0)
    spread = isqrt(radius_sq.numerator // radius_sq.denominator) + 1
    lo = (center.numerator // center.denominator) - spread
    hi = lo + 2 * spread + 2
    while lo <= hi and (lo - center) ** 2 > radius_sq:
        lo += 1
    while hi >= lo and (hi - center) ** 2 > radius_sq:
        hi -= 1
    return range(lo, hi + 1)


def enumerate_lattice_points(
    b: LatticeBasis,
    bound_sq: Fraction,
    center: Optional[Sequence[Fraction]] = None,
    cap: Optional[int] = None,
) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """Yield ``(coeffs, dist_sq)`` for all lattice points within ``bound_sq`` of ``center``.

    Fincke-Pohst enumeration with exact Gram-Schmidt bounds. The center is
    projected onto the span first; its orthogonal part is added to every
    reported distance. ``cap`` bounds the number of yielded points.
    """
    r = b.rank
    if center is None:
        target = [Fraction(0)] * r
        offset = Fraction(0)
    else:
        x = [to_fraction(c) for c in center]
        if r == 0:
            yield (), norm_sq(x)
            return
        bt = b.basis.transpose()
        target = list(inverse(b.gram()).apply(bt.apply(x)))
        projected = b.basis.apply(target)
        offset = norm_sq([xi - pi for xi, pi in zip(x, projected)])
    if r == 0:
        if offset <= bound_sq:
            yield (), offset
        return
    mu, norms = gram_schmidt(b)
    coeffs = [0] * r
    count = 0

    def descend(level: int, partial: Fraction):
        nonlocal count
        if level < 0:
            count += 1
            if cap is not None and count > cap:
                raise ResourceCapError("lattice enumeration exceeded cap", {"cap": cap})
            yield tuple(coeffs), partial + offset
            return
        shift = sum((mu[j][level] * (coeffs[j] - target[j]) for j in range(level + 1, r)), Fraction(0))
        c_center = target[level] - shift
        remaining = bound_sq - offset - partial
        for c in _coefficient_range(c_center, remaining / norms[level]):
            coeffs[level] = c
            yield from descend(level - 1, partial + (c - c_center) ** 2 * norms[level])
        coeffs[level] = 0

    yield from descend(r - 1, Fraction(0))


def shortest_vector(b: LatticeBasis) -> tuple[Vector, Fraction]:
    """Nonzero lattice vector of minimal norm and its squared length.

    Ties go to the lexicographically smallest coefficient vector.
    """
    if b.rank == 0:
        raise PreconditionError("trivial lattice has no shortest vector")
    bound = min(norm_sq(col) for col in b.basis.columns())
    best: Optional[tuple[Fraction, tuple[int, ...]]] = None
    for coeffs, length_sq in enumerate_lattice_points(b, bound):
        if not any(coeffs):
            continue
        key = (length_sq, coeffs)
        if best is None or key < best:
            best = key
    return b.point(best[1]), best[0]


def closest_vector(b: LatticeBasis, x: Sequence[RationalLike]) -> tuple[Vector, Fraction]:
    """Lattice vector closest to ``x`` and the exact squared distance, orthogonal part included."""
    point = [to_fraction(v) for v in x]
    if len(point) != b.ambient_dim:
        raise PreconditionError("point does not live in the ambient space of the lattice")
    if b.rank == 0:
        return tuple(Fraction(0) for _ in point), norm_sq(point)
    coords = inverse(b.gram()).apply(b.basis.transpose().apply(point))
    rounded = [round(c) for c in coords]
    bound = norm_sq([p - q for p, q in zip(point, b.point(rounded))])
    best = None
    for coeffs, dist_sq in enumerate_lattice_points(b, bound, center=point):
        key = (dist_sq, coeffs)
        if best is None or key < best:
            best = key
    return b.point(best[1]), best[0]


def lll_reduce(b: LatticeBasis, delta: Fraction = Fraction(3, 4)) -> LatticeBasis:
    """Exact LLL reduction; only used to pick a compact fundamental domain."""
    cols = [list(c) for c in b.basis.columns()]
    n = len(cols)
    if n <= 1:
        return b

    def gso(vectors):
        return gram_schmidt(LatticeBasis(QMatrix.from_columns(vectors, b.ambient_dim)))

    mu, norms = gso(cols)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                cols[k] = [x - q * y for x, y in zip(cols[k], cols[j])]
                mu, norms = gso(cols)
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            cols[k], cols[k - 1] = cols[k - 1], cols[k]
            mu, norms = gso(cols)
            k = max(k - 1, 1)
    return LatticeBasis(QMatrix.from_columns(cols, b.ambient_dim))


def covering_radius_upper(b: LatticeBasis, grid_step: RationalLike) -> Fraction:
    """Certified upper bound on the covering radius of a full-rank lattice.

    The maximum exact CVP distance over a grid of step ``grid_step``
    covering a fundamental parallelepiped, plus the grid slack
    ``grid_step * sqrt(d) / 2``. Square roots are bounded from above by
    rationals, so the returned value is never below the true radius.
    """
    step = to_fraction(grid_step)
    if step <= 0:
        raise PreconditionError("grid step must be positive")
    d = b.ambient_dim
    if b.rank != d or d == 0:
        raise PreconditionError("covering radius requires full rank in span")
    reduced = lll_reduce(b)
    cols = reduced.basis.columns()

    # bounding box of the parallelepiped spanned by the reduced basis
    lows = [sum((min(Fraction(0), c[i]) for c in cols), Fraction(0)) for i in range(d)]
    highs = [sum((max(Fraction(0), c[i]) for c in cols), Fraction(0)) for i in range(d)]

    scale = lcm_denominator(list(reduced.basis.entries) + [step])
    unit = int(step * scale)
    # squared distances are summed in int64
    limit = isqrt(2**62 // d) // 2
    ranges = [(floor(lo / step), ceil(hi / step)) for lo, hi in zip(lows, highs)]

    def check_range(magnitude: int) -> None:
        if magnitude > limit:
            raise ResourceCapError("covering radius grid exceeds the int64 range",
                                   {"scale": scale, "step": format_fraction(step)})

    check_range(max(max(-first, last) for first, last in ranges) * unit)
    axes = [np.arange(first, last + 1, dtype=np.int64) * unit for first, last in ranges]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)

    # every grid point has its nearest lattice point within this ball
    half_box = sum((h - l for l, h in zip(lows, highs)), Fraction(0)) / 2 + step * d
    reach = sum((sum((abs(x) for x in c), Fraction(0)) for c in cols), Fraction(0)) / 2
    center = [(l + h) / 2 for l, h in zip(lows, highs)]
    radius = half_box + reach
    nearby = [reduced.point(c) for c, _ in enumerate_lattice_points(reduced, radius * radius, center=center)]
    scaled = [[int(x * scale) for x in p] for p in nearby]
    check_range(max((abs(x) for p in scaled for x in p), default=0))
    points = np.array(scaled, dtype=np.int64)

    worst = 0
    for start in range(0, len(grid), 4096):
        chunk = grid[start:start + 4096]
        diff = chunk[:, None, :] - points[None, :, :]
        dist_sq = np.einsum("ijk,ijk->ij", diff, diff).min(axis=1)
        worst = max(worst, int(dist_sq.max()))
    _, root_hi = sqrt_bounds(Fraction(worst, scale * scale))
    _, slack_hi = sqrt_bounds(step * step * d / 4)
    return root_hi + slack_hi
