"""Atomic LCA group descriptors, their duals, invariants and classifiers."""

import re
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, Optional

from sympy import isprime, primefactors

from .errors import DescriptorParseError, PreconditionError


class AtomKind(Enum):
    """The seven atomic groups, in canonical sort order."""

    REAL_LINE = "R"
    INTEGER_Z = "Z"
    TORUS = "T"
    CYCLIC = "Z/"
    ADIC = "Zp"
    PRUFER = "Pruf"
    QP_FIELD = "Qp"


_KIND_ORDER = {kind: index for index, kind in enumerate(AtomKind)}
_PARAMETRIC = {AtomKind.CYCLIC, AtomKind.ADIC, AtomKind.PRUFER, AtomKind.QP_FIELD}
_DUAL_KIND = {
    AtomKind.REAL_LINE: AtomKind.REAL_LINE,
    AtomKind.INTEGER_Z: AtomKind.TORUS,
    AtomKind.TORUS: AtomKind.INTEGER_Z,
    AtomKind.CYCLIC: AtomKind.CYCLIC,
    AtomKind.ADIC: AtomKind.PRUFER,
    AtomKind.PRUFER: AtomKind.ADIC,
    AtomKind.QP_FIELD: AtomKind.QP_FIELD,
}


@dataclass(frozen=True)
class Atom:
    """One atomic factor; ``n`` is the order, adic/Prufer base or prime."""

    kind: AtomKind
    n: int = 0

    def __post_init__(self):
        if self.kind in _PARAMETRIC:
            if self.n < 2:
                raise DescriptorParseError(f"{self.kind.value} needs a parameter >= 2", {"n": self.n})
            if self.kind is AtomKind.QP_FIELD and not isprime(self.n):
                raise DescriptorParseError(f"Qp needs a prime, got {self.n}", {"n": self.n})
        elif self.n != 0:
            raise DescriptorParseError(f"{self.kind.value} takes no parameter")

    def sort_key(self) -> tuple[int, int]:
        return (_KIND_ORDER[self.kind], self.n)

    def dual(self) -> "Atom":
        return Atom(_DUAL_KIND[self.kind], self.n)

    def __str__(self) -> str:
        if self.kind is AtomKind.CYCLIC:
            return f"Z/{self.n}"
        if self.kind in _PARAMETRIC:
            return f"{self.kind.value}{self.n}"
        return self.kind.value


def _normalize(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    # Z_n and C_{n^inf} only depend on the distinct primes dividing n
    out = []
    for atom in atoms:
        if atom.kind in (AtomKind.ADIC, AtomKind.PRUFER):
            out.extend(Atom(atom.kind, p) for p in primefactors(atom.n))
        else:
            out.append(atom)
    return tuple(sorted(out, key=Atom.sort_key))


@dataclass(frozen=True)
class GroupDescriptor:
    """Finite product of atoms; the empty product is the trivial group."""

    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", _normalize(self.atoms))

    @classmethod
    def of(cls, *atoms: Atom) -> "GroupDescriptor":
        return cls(tuple(atoms))

    def count(self, *kinds: AtomKind) -> int:
        return sum(1 for a in self.atoms if a.kind in kinds)

    def primes(self, kind: AtomKind) -> list[int]:
        return [a.n for a in self.atoms if a.kind is kind]

    def only(self, *kinds: AtomKind) -> bool:
        """True when every atom is one of ``kinds`` (vacuous for the trivial group)."""
        return all(a.kind in kinds for a in self.atoms)

    @property
    def is_trivial(self) -> bool:
        return not self.atoms

    def __str__(self) -> str:
        return "*".join(str(a) for a in self.atoms)


_TOKEN = re.compile(r"^(?:(R|Z|T)|Z/(\d+)|Zp(\d+)|Pruf(\d+)|Qp(\d+))$")


def parse_descriptor(text: str) -> GroupDescriptor:
    """Parse ``R*Z*T*Z/6*Zp3*Pruf5*Qp2`` style text; the empty string is the trivial group."""
    if not text.strip():
        return GroupDescriptor()
    atoms = []
    for position, raw in enumerate(text.split("*")):
        token = raw.strip()
        match = _TOKEN.match(token)
        if not match:
            raise DescriptorParseError(f"unknown atom {token!r}", {"position": position, "token": token})
        plain, cyclic, adic, prufer, qp = match.groups()
        if plain:
            atoms.append(Atom(AtomKind(plain)))
        elif cyclic:
            atoms.append(Atom(AtomKind.CYCLIC, int(cyclic)))
        elif adic:
            atoms.append(Atom(AtomKind.ADIC, int(adic)))
        elif prufer:
            atoms.append(Atom(AtomKind.PRUFER, int(prufer)))
        else:
            atoms.append(Atom(AtomKind.QP_FIELD, int(qp)))
    return GroupDescriptor(tuple(atoms))


def dual_descriptor(g: GroupDescriptor) -> GroupDescriptor:
    """Pontryagin dual, atom by atom."""
    return GroupDescriptor(tuple(a.dual() for a in g.atoms))


# Invariants

@dataclass(frozen=True)
class DescriptorFlags:
    compact: bool
    discrete: bool
    elliptic: bool
    totally_disconnected: bool
    lie: bool
    compactly_generated: bool
    metacircular: bool
    finitely_generated: bool
    adic: bool
    artinian: bool
    torus: bool


@dataclass(frozen=True)
class InvariantSummary:
    r_invariant: int
    tdim: int
    tdim_dual: int
    flags: DescriptorFlags

    def to_dict(self) -> dict:
        return asdict(self)


def descriptor_flags(g: GroupDescriptor) -> DescriptorFlags:
    K = AtomKind
    return DescriptorFlags(
        compact=g.only(K.TORUS, K.CYCLIC, K.ADIC),
        discrete=g.only(K.INTEGER_Z, K.CYCLIC, K.PRUFER),
        elliptic=g.count(K.REAL_LINE, K.INTEGER_Z) == 0,
        totally_disconnected=g.count(K.REAL_LINE, K.TORUS) == 0,
        lie=g.count(K.ADIC, K.QP_FIELD) == 0,
        compactly_generated=g.count(K.PRUFER, K.QP_FIELD) == 0,
        # every atom is metacircular and the class is closed under finite products
        metacircular=True,
        finitely_generated=g.only(K.INTEGER_Z, K.CYCLIC),
        adic=g.only(K.ADIC, K.CYCLIC),
        artinian=g.only(K.PRUFER, K.CYCLIC),
        torus=g.only(K.TORUS),
    )


def invariants(g: GroupDescriptor) -> InvariantSummary:
    r = g.count(AtomKind.REAL_LINE)
    return InvariantSummary(
        r_invariant=r,
        tdim=r + g.count(AtomKind.TORUS),
        tdim_dual=r + g.count(AtomKind.INTEGER_Z),
        flags=descriptor_flags(g),
    )


def sdim(g: GroupDescriptor) -> int:
    """Topological dimension of the space of closed subgroups: tdim(G) * tdim(G^v)."""
    inv = invariants(g)
    return inv.tdim * inv.tdim_dual


def g0_descriptor(g: GroupDescriptor) -> GroupDescriptor:
    """Identity component."""
    return GroupDescriptor(tuple(a for a in g.atoms if a.kind in (AtomKind.REAL_LINE, AtomKind.TORUS)))


def elliptic_descriptor(g: GroupDescriptor) -> GroupDescriptor:
    """Elliptic part: the union of all compact subgroups."""
    return GroupDescriptor(tuple(a for a in g.atoms if a.kind not in (AtomKind.REAL_LINE, AtomKind.INTEGER_Z)))


# Connectivity

class ConnectivityKind(Enum):
    TOTALLY_DISCONNECTED = "TotallyDisconnected"
    CONNECTED = "Connected"
    DISCONNECTED_NOT_TOTALLY = "DisconnectedNotTotally"


@dataclass(frozen=True)
class Connectivity:
    kind: ConnectivityKind
    path_connected: bool = False
    case: str = ""

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "case": self.case}
        if self.kind is ConnectivityKind.CONNECTED:
            out["path_connected"] = self.path_connected
        return out


def classify_connectivity(g: GroupDescriptor) -> Connectivity:
    inv = invariants(g)
    if inv.flags.elliptic or inv.flags.totally_disconnected:
        return Connectivity(ConnectivityKind.TOTALLY_DISCONNECTED, case="elliptic-or-totally-disconnected")
    if inv.r_invariant >= 1:
        return Connectivity(ConnectivityKind.CONNECTED, inv.flags.metacircular, case="real-factor")
    return Connectivity(ConnectivityKind.DISCONNECTED_NOT_TOTALLY, case="neither")


# Connected components

class ComponentCount(Enum):
    SINGLE_POINT = "SinglePoint"
    FINITE = "Finite"
    COUNTABLY_INFINITE = "CountablyInfinite"
    UNCOUNTABLE = "Uncountable"


@dataclass(frozen=True)
class ComponentVerdict:
    cardinality: ComponentCount
    case: str
    theorem_boundary: bool = False

    def to_dict(self) -> dict:
        return {"cardinality": self.cardinality.value, "case": self.case,
                "theorem_boundary": self.theorem_boundary}


def _distinct(values: list[int]) -> bool:
    return len(values) == len(set(values))


def has_countably_many_subgroups(g: GroupDescriptor) -> bool:
    """Countability of S(G) for discrete or compact G.

    Discrete: finitely generated extended by a Prufer group C_{m^inf},
    i.e. Prufer primes pairwise distinct. Compact: the dual statement.
    """
    flags = descriptor_flags(g)
    if flags.discrete:
        return _distinct(g.primes(AtomKind.PRUFER))
    if flags.compact:
        return _distinct(g.primes(AtomKind.ADIC))
    return False


def _qp_adic_prufer_case(g: GroupDescriptor) -> bool:
    K = AtomKind
    if not g.only(K.QP_FIELD, K.ADIC, K.PRUFER, K.CYCLIC):
        return False
    fields, adics, prufers = g.primes(K.QP_FIELD), g.primes(K.ADIC), g.primes(K.PRUFER)
    if not (_distinct(fields) and _distinct(adics) and _distinct(prufers)):
        return False
    # the field primes must be prime to m*n; gcd(m, n) is unconstrained
    return not set(fields) & (set(adics) | set(prufers))


def component_verdict(g: GroupDescriptor) -> ComponentVerdict:
    """Cardinality of the set of connected components of S(G), with the deciding case."""
    inv = invariants(g)
    flags = inv.flags
    if inv.r_invariant >= 1:
        return ComponentVerdict(ComponentCount.SINGLE_POINT, "connected")
    if g.is_trivial:
        return ComponentVerdict(ComponentCount.SINGLE_POINT, "trivial")
    if g.only(AtomKind.CYCLIC):
        return ComponentVerdict(ComponentCount.FINITE, "finite")
    if flags.discrete:
        if has_countably_many_subgroups(g):
            return ComponentVerdict(ComponentCount.COUNTABLY_INFINITE, "discrete-countable")
        return ComponentVerdict(ComponentCount.UNCOUNTABLE, "none")
    if flags.compact:
        if has_countably_many_subgroups(g):
            return ComponentVerdict(ComponentCount.COUNTABLY_INFINITE, "compact-countable")
        return ComponentVerdict(ComponentCount.UNCOUNTABLE, "none")
    if _qp_adic_prufer_case(g):
        return ComponentVerdict(ComponentCount.COUNTABLY_INFINITE, "qp-adic-prufer")
    if g.only(AtomKind.TORUS, AtomKind.INTEGER_Z, AtomKind.CYCLIC):
        return ComponentVerdict(ComponentCount.COUNTABLY_INFINITE, "torus-lattice")
    return ComponentVerdict(ComponentCount.UNCOUNTABLE, "none", theorem_boundary=True)


def component_cardinality(g: GroupDescriptor) -> ComponentCount:
    return component_verdict(g).cardinality


# Isolated points

def is_isolated(h: GroupDescriptor, q: GroupDescriptor) -> bool:
    """Whether a subgroup of type ``h`` with quotient of type ``q`` is isolated.

    Case 1: h finitely generated times adic, q Artinian.
    Case 2: h adic, q a torus times an Artinian group.
    """
    K = AtomKind
    case_one = h.only(K.INTEGER_Z, K.CYCLIC, K.ADIC) and q.only(K.PRUFER, K.CYCLIC)
    case_two = h.only(K.ADIC, K.CYCLIC) and q.only(K.TORUS, K.PRUFER, K.CYCLIC)
    return case_one or case_two


def hom_compact_descriptor(r: int, s: int) -> GroupDescriptor:
    """Hom(Z^r, T^s) as a compact group, i.e. T^(r*s)."""
    if r < 0 or s < 0:
        raise PreconditionError("ranks must be non-negative", {"r": r, "s": s})
    return GroupDescriptor(tuple(Atom(AtomKind.TORUS) for _ in range(r * s)))


def ambient_to_descriptor(a: int, b: int, c: int, finite_orders: Iterable[int] = ()) -> GroupDescriptor:
    """Descriptor of R^a x Z^b x T^c x (sum of Z/n_i)."""
    atoms = [Atom(AtomKind.REAL_LINE)] * a + [Atom(AtomKind.INTEGER_Z)] * b + [Atom(AtomKind.TORUS)] * c
    atoms += [Atom(AtomKind.CYCLIC, n) for n in finite_orders if n != 1]
    return GroupDescriptor(tuple(atoms))


def classify(g: GroupDescriptor, label: Optional[str] = None) -> dict:
    """All descriptor-level classifier outputs as one JSON-ready dict."""
    verdict = component_verdict(g)
    return {
        "descriptor": label if label is not None else str(g),
        "canonical": str(g),
        "dual": str(dual_descriptor(g)),
        "invariants": invariants(g).to_dict(),
        "sdim": sdim(g),
        "connectivity": classify_connectivity(g).to_dict(),
        "component_cardinality": verdict.to_dict(),
        "countable_subgroups": has_countably_many_subgroups(g),
    }
