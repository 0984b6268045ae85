"""Closed subgroups of G = R^a x Z^b x T^c x F with rational data.

A subgroup H is stored through its full preimage in the covering space
R^a x Z^b x R^c x Z^f, in which the torus factor is R^c / Z^c and each
finite coordinate is a lift in Z modulo n_i. The preimage always contains
the covering lattice (unit vectors on torus coordinates, n_i e_i on
finite ones) and splits as V + L with V a rational subspace and L a
lattice in a fixed complement of V.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .descriptor import (
    Atom,
    AtomKind,
    GroupDescriptor,
    ambient_to_descriptor,
    dual_descriptor,
    hom_compact_descriptor,
    is_isolated,
)
from .errors import AmbientMismatchError, PreconditionError, SchemaError, SingularPerturbationError
from .exact_linalg import (
    LatticeBasis,
    QMatrix,
    RationalLike,
    Vector,
    determinant,
    dual_lattice,
    hnf,
    inverse,
    invariant_factors,
    nullspace,
    rank,
    row_space_basis,
    snf,
    solve,
    to_fraction,
)


@dataclass(frozen=True)
class AmbientGroup:
    """R^a x Z^b x T^c x (sum of Z/n_i)."""

    a: int
    b: int
    c: int
    finite: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "finite", tuple(int(n) for n in self.finite))
        if min(self.a, self.b, self.c) < 0:
            raise SchemaError("ambient exponents must be non-negative")
        if any(n < 2 for n in self.finite):
            raise SchemaError("finite orders must be >= 2")

    @property
    def dim(self) -> int:
        return self.a + self.b + self.c + len(self.finite)

    @property
    def real_rows(self) -> range:
        return range(0, self.a)

    @property
    def integer_rows(self) -> range:
        return range(self.a, self.a + self.b)

    @property
    def torus_rows(self) -> range:
        return range(self.a + self.b, self.a + self.b + self.c)

    @property
    def finite_rows(self) -> range:
        return range(self.a + self.b + self.c, self.dim)

    @property
    def discrete_rows(self) -> list[int]:
        return list(self.integer_rows) + list(self.finite_rows)

    @property
    def continuous_rows(self) -> list[int]:
        return list(self.real_rows) + list(self.torus_rows)

    def dual(self) -> "AmbientGroup":
        return AmbientGroup(self.a, self.c, self.b, self.finite)

    def unit(self, index: int, value: RationalLike = 1) -> Vector:
        vec = [Fraction(0)] * self.dim
        vec[index] = to_fraction(value)
        return tuple(vec)

    def covering_lattice(self) -> list[Vector]:
        """Kernel of the covering map."""
        vectors = [self.unit(i) for i in self.torus_rows]
        vectors += [self.unit(i, n) for i, n in zip(self.finite_rows, self.finite)]
        return vectors

    def descriptor(self) -> GroupDescriptor:
        return ambient_to_descriptor(self.a, self.b, self.c, self.finite)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "finite": list(self.finite)}


@dataclass(frozen=True)
class ElementarySubgroup:
    """Canonical form of a closed subgroup; build it with :func:`canonicalize`."""

    ambient: AmbientGroup
    cont_gens: QMatrix
    disc_gens: QMatrix

    @property
    def continuous_dim(self) -> int:
        return self.cont_gens.cols

    def lattice(self) -> LatticeBasis:
        return LatticeBasis(self.disc_gens)

    def pivots(self) -> tuple[int, ...]:
        """Pivot coordinates of the continuous part; its complement is the coordinate span of the rest."""
        return tuple(next(i for i, x in enumerate(col) if x != 0) for col in self.cont_gens.columns())

    def project(self, x: Sequence[Fraction]) -> Vector:
        """Projection along V onto the fixed complement."""
        out = list(x)
        for col, p in zip(self.cont_gens.columns(), self.pivots()):
            coef = out[p]
            if coef:
                out = [xi - coef * vi for xi, vi in zip(out, col)]
        return tuple(out)


def _check_columns(ambient: AmbientGroup, m: QMatrix, continuous: bool):
    if m.rows != ambient.dim:
        raise SchemaError(f"generators have {m.rows} coordinates, ambient needs {ambient.dim}")
    for col in m.columns():
        for i in ambient.integer_rows:
            if continuous and col[i] != 0:
                raise PreconditionError("continuous generator leaves Z^b", {"coordinate": i})
            if not continuous and col[i].denominator != 1:
                raise PreconditionError("generator leaves Z^b", {"coordinate": i})
        for i in ambient.finite_rows:
            if continuous and col[i] != 0:
                raise PreconditionError("continuous generator leaves the finite factor", {"coordinate": i})
            if not continuous and col[i].denominator != 1:
                raise PreconditionError("generator leaves the finite factor", {"coordinate": i})


def canonicalize(ambient: AmbientGroup, cont: QMatrix, disc: QMatrix) -> ElementarySubgroup:
    """Canonical form of the closed subgroup generated by ``cont`` (directions) and ``disc`` (points).

    The continuous part becomes the reduced row echelon basis of V; the
    discrete part becomes the HNF of the preimage lattice, covering
    vectors included, projected to the complement of V.
    """
    _check_columns(ambient, cont, continuous=True)
    _check_columns(ambient, disc, continuous=False)
    basis, _ = row_space_basis([c for c in cont.columns() if any(c)], ambient.dim)
    shell = ElementarySubgroup(ambient, basis, QMatrix.zeros(ambient.dim, 0))
    projected = [shell.project(v) for v in disc.columns() + ambient.covering_lattice()]
    lattice = hnf(QMatrix.from_columns(projected, ambient.dim))
    return ElementarySubgroup(ambient, basis, lattice)


def from_generators(
    ambient: AmbientGroup,
    cont: Sequence[Sequence[RationalLike]] = (),
    disc: Sequence[Sequence[RationalLike]] = (),
) -> ElementarySubgroup:
    """Convenience wrapper taking plain column lists."""
    return canonicalize(ambient, QMatrix.from_columns(cont, ambient.dim), QMatrix.from_columns(disc, ambient.dim))


def trivial_subgroup(ambient: AmbientGroup) -> ElementarySubgroup:
    return from_generators(ambient)


def full_subgroup(ambient: AmbientGroup) -> ElementarySubgroup:
    cont = [ambient.unit(i) for i in ambient.continuous_rows]
    disc = [ambient.unit(i) for i in ambient.discrete_rows]
    return from_generators(ambient, cont, disc)


def _require_same_ambient(*groups: ElementarySubgroup):
    first = groups[0].ambient
    for h in groups[1:]:
        if h.ambient != first:
            raise AmbientMismatchError(
                "subgroups live in different ambient groups",
                {"left": first.to_dict(), "right": h.ambient.to_dict()},
            )


def member(h: ElementarySubgroup, x: Sequence[RationalLike]) -> bool:
    """Whether the covering-space point ``x`` lies in H."""
    point = [to_fraction(v) for v in x]
    ambient = h.ambient
    if len(point) != ambient.dim:
        raise PreconditionError("malformed point: wrong number of coordinates", {"expected": ambient.dim})
    if any(point[i].denominator != 1 for i in ambient.discrete_rows):
        raise PreconditionError("malformed point: Z^b and finite coordinates must be integers")
    residue = h.project(point)
    if h.disc_gens.cols == 0:
        return not any(residue)
    coeffs = solve(h.disc_gens, residue)
    return coeffs is not None and all(c.denominator == 1 for c in coeffs)


def contains(big: ElementarySubgroup, small: ElementarySubgroup) -> bool:
    """Whether ``small`` is a subgroup of ``big``."""
    _require_same_ambient(big, small)
    if any(any(big.project(v)) for v in small.cont_gens.columns()):
        return False
    return all(member(big, v) for v in small.disc_gens.columns())


def subgroup_sum(h1: ElementarySubgroup, h2: ElementarySubgroup) -> ElementarySubgroup:
    _require_same_ambient(h1, h2)
    return canonicalize(h1.ambient, h1.cont_gens.hstack(h2.cont_gens), h1.disc_gens.hstack(h2.disc_gens))


def intersect(h1: ElementarySubgroup, h2: ElementarySubgroup) -> ElementarySubgroup:
    """Intersection through duality: (H1^perp + H2^perp)^perp."""
    _require_same_ambient(h1, h2)
    return orthogonal(subgroup_sum(orthogonal(h1), orthogonal(h2)))


# Duality

def _pairing_image(ambient: AmbientGroup, x: Sequence[Fraction]) -> Vector:
    """Vector u(x) in dual coordinates with <x, y> = u(x) . y."""
    real = [x[i] for i in ambient.real_rows]
    integer = [x[i] for i in ambient.integer_rows]
    torus = [x[i] for i in ambient.torus_rows]
    finite = [x[i] / n for i, n in zip(ambient.finite_rows, ambient.finite)]
    # dual ambient orders its blocks R, Z (from T), T (from Z), F
    return tuple(real + torus + integer + finite)


def pairing(ambient: AmbientGroup, x: Sequence[RationalLike], y: Sequence[RationalLike]) -> Fraction:
    """<x, y> mod 1 for x in G and y in the dual group, both as covering points."""
    u = _pairing_image(ambient, [to_fraction(v) for v in x])
    value = sum((ui * to_fraction(yi) for ui, yi in zip(u, y)), Fraction(0))
    return value - (value.numerator // value.denominator)


def orthogonal(h: ElementarySubgroup) -> ElementarySubgroup:
    """The annihilator of H in the dual ambient group."""
    ambient = h.ambient
    dual_ambient = ambient.dual()
    n = ambient.dim
    directions = [_pairing_image(ambient, v) for v in h.cont_gens.columns()]
    lattice = [_pairing_image(ambient, v) for v in h.disc_gens.columns()]

    constraints = directions + lattice
    if constraints:
        free = nullspace(QMatrix.from_rows([list(v) for v in constraints]))
    else:
        free = [dual_ambient.unit(i) for i in range(n)]

    # project the lattice orthogonally off the directions, then dualize inside its span
    if directions and lattice:
        v = QMatrix.from_columns(directions, n)
        gram_inv = inverse(v.transpose() @ v)
        def off(x):
            coef = gram_inv.apply(v.transpose().apply(x))
            return tuple(xi - wi for xi, wi in zip(x, v.apply(coef)))
        lattice = [off(x) for x in lattice]
    if lattice:
        points = dual_lattice(LatticeBasis(QMatrix.from_columns(lattice, n))).basis
    else:
        points = QMatrix.zeros(n, 0)
    return canonicalize(dual_ambient, QMatrix.from_columns(free, n), points)


# Quotients and isomorphism types

def _discrete_image(h: ElementarySubgroup) -> QMatrix:
    return h.disc_gens.select_rows(h.ambient.discrete_rows)


def quotient_descriptor(g_ambient: AmbientGroup, h: ElementarySubgroup) -> GroupDescriptor:
    """Isomorphism type of G/H.

    G/H = R^(u-t) x T^t x D where u = a + c - dim V, D is the quotient of
    the discrete coordinates by the image of the lattice (read off the
    SNF) and t is the rank lost by that projection.
    """
    if h.ambient != g_ambient:
        raise AmbientMismatchError("subgroup does not live in this ambient group")
    u = g_ambient.a + g_ambient.c - h.continuous_dim
    image = _discrete_image(h)
    rho = rank(image) if image.cols else 0
    t = h.disc_gens.cols - rho
    free = len(g_ambient.discrete_rows) - rho
    torsion = [d for d in invariant_factors(image) if d > 1] if image.cols and image.rows else []
    atoms = [Atom(AtomKind.REAL_LINE)] * (u - t) + [Atom(AtomKind.TORUS)] * t
    atoms += [Atom(AtomKind.INTEGER_Z)] * free + [Atom(AtomKind.CYCLIC, d) for d in torsion]
    return GroupDescriptor(tuple(atoms))


def subgroup_descriptor(h: ElementarySubgroup) -> GroupDescriptor:
    """Isomorphism type of H itself, as the dual of G^v / H^perp."""
    perp = orthogonal(h)
    return dual_descriptor(quotient_descriptor(perp.ambient, perp))


def ambient_descriptor(ambient: AmbientGroup) -> GroupDescriptor:
    return ambient.descriptor()


def is_isolated_subgroup(h: ElementarySubgroup) -> bool:
    """Whether H is an isolated point of S(G)."""
    return is_isolated(subgroup_descriptor(h), quotient_descriptor(h.ambient, h))


# Natural maps

class NaturalMapKind(Enum):
    RESTRICT_OPEN = "RestrictOpen"
    PROJECT_COMPACT = "ProjectCompact"


def is_open(h: ElementarySubgroup) -> bool:
    """Open subgroups contain every real and torus direction."""
    return h.continuous_dim == h.ambient.a + h.ambient.c


def is_compact(h: ElementarySubgroup) -> bool:
    """Compact subgroups have no real directions and no real or integer coordinates."""
    ambient = h.ambient
    bad_rows = list(ambient.real_rows) + list(ambient.integer_rows)
    if any(col[i] != 0 for col in h.cont_gens.columns() for i in ambient.real_rows):
        return False
    return all(col[i] == 0 for col in h.disc_gens.columns() for i in bad_rows)


@dataclass(frozen=True)
class NaturalMapSpec:
    kind: NaturalMapKind
    subgroup_parameter: ElementarySubgroup

    def validate(self) -> tuple[bool, Optional[str]]:
        """
        Check the parameter against its kind.

        Returns:
            Tuple of (valid, error_message)
        """
        if self.kind is NaturalMapKind.RESTRICT_OPEN and not is_open(self.subgroup_parameter):
            return False, "restriction parameter is not open in the ambient group"
        if self.kind is NaturalMapKind.PROJECT_COMPACT and not is_compact(self.subgroup_parameter):
            return False, "projection parameter is not compact"
        return True, None


def open_subgroup_chart(omega: ElementarySubgroup) -> tuple[AmbientGroup, Callable[[Vector], Vector]]:
    """Coordinates on an open subgroup: its own ambient group and the map into it.

    The lattice of Omega lives on the discrete coordinates; an SNF of the
    covering vectors expressed in that lattice splits it into free and
    cyclic coordinates.
    """
    ambient = omega.ambient
    if not is_open(omega):
        raise PreconditionError("restriction parameter is not open in the ambient group")
    drows = ambient.discrete_rows
    basis = omega.disc_gens.select_rows(drows)
    cover = [tuple(v[i] for i in drows) for v in ambient.covering_lattice() if any(v[i] for i in drows)]
    r = basis.cols
    if cover:
        coords = QMatrix.from_columns([solve(basis, v) for v in cover], r)
        u, diag, _ = snf(coords)
    else:
        u, diag = QMatrix.identity(r), []
    orders = [abs(int(d)) for d in diag] + [0] * (r - len(diag))
    free_idx = [j for j, m in enumerate(orders) if m == 0]
    finite_idx = [j for j, m in enumerate(orders) if m > 1]
    chart = AmbientGroup(ambient.a, len(free_idx), ambient.c, tuple(orders[j] for j in finite_idx))

    def to_chart(x: Vector) -> Vector:
        coeffs = solve(basis, [x[i] for i in drows]) if r else ()
        if coeffs is None:
            raise PreconditionError("point does not lie in the open subgroup")
        new = u.apply(coeffs) if r else ()
        real = [x[i] for i in ambient.real_rows]
        torus = [x[i] for i in ambient.torus_rows]
        return tuple(real + [new[j] for j in free_idx] + torus + [new[j] % orders[j] for j in finite_idx])

    return chart, to_chart


def _restrict(h: ElementarySubgroup, omega: ElementarySubgroup) -> ElementarySubgroup:
    if omega == full_subgroup(h.ambient):
        return h
    chart, to_chart = open_subgroup_chart(omega)
    inside = intersect(h, omega)
    cont = [to_chart(v) for v in inside.cont_gens.columns()]
    disc = [to_chart(v) for v in inside.disc_gens.columns()]
    return from_generators(chart, cont, disc)


def apply_natural_map(spec: NaturalMapSpec, h: ElementarySubgroup) -> ElementarySubgroup:
    """H -> H n Omega (in coordinates of Omega) or H -> (H+K)/K (in coordinates of G/K).

    The projection is computed through duality: (H+K)/K is the annihilator
    of H^perp n K^perp inside (K^perp)^v, and K^perp is open when K is compact.
    """
    _require_same_ambient(spec.subgroup_parameter, h)
    valid, error = spec.validate()
    if not valid:
        raise PreconditionError(error, {"kind": spec.kind.value})
    if spec.kind is NaturalMapKind.RESTRICT_OPEN:
        return _restrict(h, spec.subgroup_parameter)
    return orthogonal(_restrict(orthogonal(h), orthogonal(spec.subgroup_parameter)))


def compose_natural_maps(specs: Sequence[NaturalMapSpec], h: ElementarySubgroup) -> ElementarySubgroup:
    """Apply natural maps left to right; each parameter must live in the current ambient."""
    for spec in specs:
        h = apply_natural_map(spec, h)
    return h


def split_map(
    h: ElementarySubgroup, omega: ElementarySubgroup, k: ElementarySubgroup
) -> tuple[ElementarySubgroup, ElementarySubgroup]:
    """H -> (H n Omega, (H+K)/K)."""
    return (
        apply_natural_map(NaturalMapSpec(NaturalMapKind.RESTRICT_OPEN, omega), h),
        apply_natural_map(NaturalMapSpec(NaturalMapKind.PROJECT_COMPACT, k), h),
    )


def split_fiber_descriptor(
    h: ElementarySubgroup, omega: ElementarySubgroup, k: ElementarySubgroup
) -> GroupDescriptor:
    """Fiber of the split map through H: Hom((M+Omega)/Omega, K/(K n R)) with M = H+K, R = H n Omega."""
    _require_same_ambient(h, omega, k)
    if not is_open(omega):
        raise PreconditionError("restriction parameter is not open in the ambient group")
    if not is_compact(k):
        raise PreconditionError("projection parameter is not compact")
    if not contains(omega, k):
        raise PreconditionError("compact subgroup must lie in the open subgroup")
    joined = subgroup_sum(h, omega)
    r = rank(_discrete_image(joined)) - rank(_discrete_image(omega))
    s = k.continuous_dim - intersect(k, h).continuous_dim
    return hom_compact_descriptor(r, s)


# Scaling, paths and perturbations

def _scale_real_rows(ambient: AmbientGroup, m: QMatrix, lam: Fraction) -> QMatrix:
    real = set(ambient.real_rows)
    cols = [[x * lam if i in real else x for i, x in enumerate(col)] for col in m.columns()]
    return QMatrix.from_columns(cols, ambient.dim)


def tau_scale(h: ElementarySubgroup, lam: RationalLike) -> ElementarySubgroup:
    """Image of H under (x, h') -> (lam x, h')."""
    factor = to_fraction(lam)
    if h.ambient.a == 0:
        raise PreconditionError("scaling needs a real factor (a >= 1)")
    if factor <= 0:
        raise PreconditionError("scaling factor must be positive")
    return canonicalize(
        h.ambient,
        _scale_real_rows(h.ambient, h.cont_gens, factor),
        _scale_real_rows(h.ambient, h.disc_gens, factor),
    )


def scaling_path(h: ElementarySubgroup, lams: Sequence[RationalLike]) -> list[ElementarySubgroup]:
    """The path lam -> tau_{1/lam}(H), sampled at ``lams``."""
    return [tau_scale(h, 1 / to_fraction(lam)) for lam in lams]


def pathbase_limit(h: ElementarySubgroup) -> ElementarySubgroup:
    """Limit of tau_{1/lam}(H) as lam -> infinity: W x L1.

    L1 is the projection of H to Z^b x T^c x F and W is the span of the
    real coordinates of H n (R^a x T^c x F).
    """
    ambient = h.ambient
    if ambient.a == 0:
        raise PreconditionError("scaling needs a real factor (a >= 1)")
    compact_open = from_generators(
        ambient,
        [ambient.unit(i) for i in list(ambient.real_rows) + list(ambient.torus_rows)],
        [ambient.unit(i) for i in ambient.finite_rows],
    )
    inside = intersect(h, compact_open)
    span = [tuple(col[i] if i in ambient.real_rows else Fraction(0) for i in range(ambient.dim))
            for col in inside.cont_gens.columns() + inside.disc_gens.columns()]

    def drop_real(col):
        return tuple(Fraction(0) if i in ambient.real_rows else col[i] for i in range(ambient.dim))

    cont = span + [drop_real(c) for c in h.cont_gens.columns()]
    disc = [drop_real(c) for c in h.disc_gens.columns()]
    return from_generators(ambient, cont, disc)


def circle_path(n: int, lam: RationalLike) -> ElementarySubgroup:
    """tau_lam of {(x, k) : x + k/n in Z} inside R x Z/n."""
    if n < 2:
        raise PreconditionError("circle path needs n >= 2")
    factor = to_fraction(lam)
    if factor <= 0:
        raise PreconditionError("scaling factor must be positive")
    ambient = AmbientGroup(1, 0, 0, (n,))
    return from_generators(ambient, disc=[(factor, 0), (-factor / n, 1)])


def perturbation_matrix(direction: QMatrix, n: int) -> QMatrix:
    """I + direction / n."""
    if n < 1:
        raise PreconditionError("perturbation index must be positive")
    if direction.rows != direction.cols:
        raise PreconditionError("perturbation direction must be square")
    return QMatrix.identity(direction.rows) + direction.scale(Fraction(1, n))


def perturb_sequence(gamma: LatticeBasis, direction: QMatrix, n: int) -> ElementarySubgroup:
    """The lattice (I + direction/n) Gamma as a subgroup of R^d."""
    if direction.rows != gamma.ambient_dim:
        raise PreconditionError("perturbation direction does not match the lattice dimension")
    matrix = perturbation_matrix(direction, n)
    if determinant(matrix) == 0:
        raise SingularPerturbationError("perturbation is singular at this index", {"n": n})
    ambient = AmbientGroup(gamma.ambient_dim, 0, 0)
    return canonicalize(ambient, QMatrix.zeros(ambient.dim, 0), matrix @ gamma.basis)


def linear_image(h: ElementarySubgroup, matrix: QMatrix) -> ElementarySubgroup:
    """A H for a subgroup of R^d and an invertible rational matrix A.

    Orthogonals transform contragrediently: (A H)^perp = (A^T)^-1 H^perp.
    """
    ambient = h.ambient
    if ambient.dim != ambient.a:
        raise PreconditionError("linear images are defined on R^d only")
    if matrix.rows != ambient.a or matrix.cols != ambient.a or determinant(matrix) == 0:
        raise PreconditionError("linear image needs an invertible d x d matrix")
    return canonicalize(ambient, matrix @ h.cont_gens, matrix @ h.disc_gens)


def lattice_subgroup(gamma: LatticeBasis) -> ElementarySubgroup:
    """A lattice of R^d as a subgroup."""
    ambient = AmbientGroup(gamma.ambient_dim, 0, 0)
    return canonicalize(ambient, QMatrix.zeros(ambient.dim, 0), gamma.basis)


# Connected components when R(G) = 0

def identity_component(ambient: AmbientGroup) -> ElementarySubgroup:
    return from_generators(ambient, [ambient.unit(i) for i in ambient.torus_rows])


def elliptic_part(ambient: AmbientGroup) -> ElementarySubgroup:
    return from_generators(
        ambient,
        [ambient.unit(i) for i in ambient.torus_rows],
        [ambient.unit(i) for i in ambient.finite_rows],
    )


def _require_no_real_factor(h: ElementarySubgroup):
    if h.ambient.a != 0:
        raise PreconditionError("component structure requires R(G)=0")


def component_of(g: AmbientGroup, h: ElementarySubgroup) -> int:
    """Dimension of the torus Hom((N+E)/E, G0/(G0 n L)) that is the component of H."""
    if h.ambient != g:
        raise AmbientMismatchError("subgroup does not live in this ambient group")
    _require_no_real_factor(h)
    r = rank(h.disc_gens.select_rows(list(g.integer_rows))) if g.b and h.disc_gens.cols else 0
    s = g.c - intersect(h, identity_component(g)).continuous_dim
    return hom_compact_descriptor(r, s).count(AtomKind.TORUS)


def is_rigid(h: ElementarySubgroup) -> bool:
    """H is elliptic or G/H is totally disconnected."""
    _require_no_real_factor(h)
    ambient = h.ambient
    elliptic = not any(col[i] for col in h.disc_gens.columns() for i in ambient.integer_rows)
    quotient = quotient_descriptor(ambient, h)
    return elliptic or quotient.count(AtomKind.REAL_LINE, AtomKind.TORUS) == 0
