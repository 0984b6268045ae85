"""Seeded verification suites.

Each suite spawns one numpy SeedSequence child per trial, so trial k is
reproducible on its own. Trials are independent and may run in a process
pool; results are assembled in trial order.
"""

from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from tqdm import tqdm

from core.chabauty_metric import MetricParams, chabauty_distance, converges_to
from core.config import RunConfig
from core.debug_logger import log
from core.descriptor import (
    AtomKind,
    classify_connectivity,
    component_cardinality,
    component_verdict,
    dual_descriptor,
    is_isolated,
    parse_descriptor,
)
from core.errors import ChabautyError, ResourceCapError
from core.exact_linalg import (
    LatticeBasis,
    QMatrix,
    covering_radius_upper,
    determinant,
    dual_lattice,
    format_fraction,
    inverse,
    shortest_vector,
    sqrt_bounds,
    to_fraction,
)
from core.finite_lattice import (
    abelian_groups_of_order,
    enumerate_subgroups,
    subgroups_by_closure,
    verify_duality_fin,
)
from core.report import VerificationReport, Verdict
from core.subgroup_calculus import (
    AmbientGroup,
    circle_path,
    component_of,
    elliptic_part,
    from_generators,
    identity_component,
    is_rigid,
    lattice_subgroup,
    linear_image,
    orthogonal,
    pathbase_limit,
    perturb_sequence,
    perturbation_matrix,
    split_fiber_descriptor,
    tau_scale,
)

PERTURBATION_STEPS = (16, 64, 256, 1024)
PATH_EXPONENTS = (0, 2, 4, 6, 8)
TRANSFERENCE_STEP = Fraction(1, 20)
CLOSURE_CROSSCHECK_ORDER = 32

# descriptor, connectivity kind, component cardinality, deciding case, theorem boundary
CLASSIFIER_TABLE = (
    ("", "TotallyDisconnected", "SinglePoint", "trivial", False),
    ("R", "Connected", "SinglePoint", "connected", False),
    ("R*R", "Connected", "SinglePoint", "connected", False),
    ("R*Z", "Connected", "SinglePoint", "connected", False),
    ("R*Qp5", "Connected", "SinglePoint", "connected", False),
    ("Z", "TotallyDisconnected", "CountablyInfinite", "discrete-countable", False),
    ("Z*Z", "TotallyDisconnected", "CountablyInfinite", "discrete-countable", False),
    ("T", "TotallyDisconnected", "CountablyInfinite", "compact-countable", False),
    ("T*T", "TotallyDisconnected", "CountablyInfinite", "compact-countable", False),
    ("Z/6", "TotallyDisconnected", "Finite", "finite", False),
    ("Z/2*Z/2", "TotallyDisconnected", "Finite", "finite", False),
    ("Z*T", "DisconnectedNotTotally", "CountablyInfinite", "torus-lattice", False),
    ("Z*T*Z/4", "DisconnectedNotTotally", "CountablyInfinite", "torus-lattice", False),
    ("Z*Z*T", "DisconnectedNotTotally", "CountablyInfinite", "torus-lattice", False),
    ("Pruf2*Pruf2", "TotallyDisconnected", "Uncountable", "none", False),
    ("Pruf2*Pruf3*Z", "TotallyDisconnected", "CountablyInfinite", "discrete-countable", False),
    ("Zp3*Zp3", "TotallyDisconnected", "Uncountable", "none", False),
    ("Zp2*Zp3*T", "TotallyDisconnected", "CountablyInfinite", "compact-countable", False),
    ("Qp2", "TotallyDisconnected", "CountablyInfinite", "qp-adic-prufer", False),
    ("Qp2*Zp3*Pruf5*Z/7", "TotallyDisconnected", "CountablyInfinite", "qp-adic-prufer", False),
    ("Qp2*Zp2", "TotallyDisconnected", "Uncountable", "none", True),
    ("Qp2*Qp2", "TotallyDisconnected", "Uncountable", "none", True),
    ("Z*Zp2", "TotallyDisconnected", "Uncountable", "none", True),
    ("T*Pruf2", "TotallyDisconnected", "Uncountable", "none", True),
)

# subgroup type, quotient type, isolated
ISOLATION_TABLE = (
    ("Z", "T", False),
    ("", "T*Pruf2", True),
    ("", "Z", False),
    ("Z*Z/3*Zp2", "", True),
    ("Zp2", "Pruf2", True),
    ("R", "", False),
    ("Z/2", "Z/2", True),
    ("", "R", False),
)

# b, c, continuous and discrete generators of H in Z^b x T^c, torus dimension of its component
COMPONENT_TABLE = (
    (1, 1, [], [[1, 0]], 1),
    (1, 1, [], [], 0),
    (1, 1, [[0, 1]], [[1, 0]], 0),
    (1, 1, [], [[1, 0], [0, Fraction(1, 2)]], 1),
    (2, 1, [], [[1, 0, 0], [0, 1, 0]], 2),
    (1, 2, [], [[1, 0, 0]], 2),
    (1, 2, [[0, 1, 0]], [[1, 0, 0]], 1),
)


SUITE_EPS = Fraction(1, 10)
SUITE_R_CUT = 64
SUITE_DELTA = Fraction(1, 100)


def suite_params(params: MetricParams) -> MetricParams:
    """Configured metric clamped to r_cut >= 64 and delta <= 1/100, so the slack stays below SUITE_EPS / 2."""
    return MetricParams(max(params.r_cut, SUITE_R_CUT), min(params.delta, SUITE_DELTA), params.net_cap)


def _random_rational(rng: np.random.Generator, bound: int = 3, denominators: int = 3) -> Fraction:
    return Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, denominators + 1)))


def _random_subgroup(rng: np.random.Generator, ambient: AmbientGroup):
    """Random rational generators respecting the integer and finite coordinates."""
    discrete = set(ambient.discrete_rows)

    def column(continuous: bool):
        out = []
        for i in range(ambient.dim):
            if i in discrete:
                out.append(0 if continuous else int(rng.integers(-3, 4)))
            else:
                out.append(_random_rational(rng))
        return out

    cont = [column(True) for _ in range(int(rng.integers(0, 2)))]
    disc = [column(False) for _ in range(int(rng.integers(0, 3)))]
    return from_generators(ambient, cont, disc)


def _random_direction(rng: np.random.Generator, d: int) -> QMatrix:
    while True:
        entries = rng.integers(-1, 2, size=(d, d))
        if entries.any():
            return QMatrix.from_rows(entries.tolist())


# Trials; module-level so a process pool can pickle them

def duality_trial(seed: np.random.SeedSequence, config: RunConfig) -> VerificationReport:
    rng = np.random.default_rng(seed)
    report = VerificationReport(suite="duality")
    for ambient in (AmbientGroup(3, 0, 0), AmbientGroup(1, 1, 1)):
        h = _random_subgroup(rng, ambient)
        verdict = Verdict.PASS if orthogonal(orthogonal(h)) == h else Verdict.FAIL
        report.add(f"involution in {ambient.descriptor()}", verdict)

    params = suite_params(config.metric_params())
    gamma = LatticeBasis(QMatrix.identity(2))
    direction = _random_direction(rng, 2)
    seq = [perturb_sequence(gamma, direction, n) for n in PERTURBATION_STEPS]
    limit = lattice_subgroup(gamma)

    moved = linear_image(limit, perturbation_matrix(direction, PERTURBATION_STEPS[0]))
    expected = linear_image(orthogonal(limit), inverse(perturbation_matrix(direction, PERTURBATION_STEPS[0])).transpose())
    report.add("contragredient orthogonal", Verdict.PASS if orthogonal(moved) == expected else Verdict.FAIL)
    return converges_to(seq, limit, params, SUITE_EPS, dual=True,
                        label=f"(I + E/n) Z^2, E={direction.to_rows()}", report=report)


def transference_trial(seed: np.random.SeedSequence, config: RunConfig) -> VerificationReport:
    rng = np.random.default_rng(seed)
    report = VerificationReport(suite="transference")
    d = int(rng.choice([2, 3]))
    while True:
        rows = rng.integers(-5, 6, size=(d, d)).tolist()
        basis = QMatrix.from_rows(rows)
        if determinant(basis) != 0:
            break
    lattice = LatticeBasis(basis)
    _, lambda_sq = shortest_vector(lattice)
    _, lam = sqrt_bounds(lambda_sq)
    mu = covering_radius_upper(dual_lattice(lattice), TRANSFERENCE_STEP)
    product = lam * mu
    bound = to_fraction(config.cd) if config.cd is not None else Fraction(d)
    verdict = Verdict.PASS if product <= bound else Verdict.FAIL
    report.add(f"d={d} basis={rows}", verdict, product=float(product), bound=format_fraction(bound))
    return report


def _random_path_subgroup(rng: np.random.Generator):
    """Cyclic subgroup of R x Z/n; its real spacing per residue is at most 3n."""
    n = int(rng.integers(2, 7))
    ambient = AmbientGroup(1, 0, 0, (n,))
    gen = [int(rng.integers(1, 4)), int(rng.integers(0, n))]
    return from_generators(ambient, disc=[gen]), n


def paths_trial(seed: np.random.SeedSequence, config: RunConfig) -> VerificationReport:
    rng = np.random.default_rng(seed)
    params = suite_params(config.metric_params())
    eps = SUITE_EPS
    report = VerificationReport(suite="paths")
    subgroup, n = _random_path_subgroup(rng)
    seq = [tau_scale(subgroup, Fraction(1, 2**j)) for j in PATH_EXPONENTS]
    converges_to(seq, pathbase_limit(subgroup), params, eps, label=f"scaling in R x Z/{n}", report=report)

    ambient = AmbientGroup(1, 0, 0, (n,))
    whole = from_generators(ambient, [[1, 0]], [[0, 1]])
    trivial = from_generators(ambient)
    for target, lam, name in ((whole, Fraction(1, 16), "R x Z/n"), (trivial, Fraction(256), "{0}")):
        try:
            estimate = chabauty_distance(circle_path(n, lam), target, params)
        except ResourceCapError as e:
            report.add(f"circle path n={n} to {name}", Verdict.INCONCLUSIVE, error=e.to_dict())
            continue
        verdict = Verdict.PASS if estimate.upper < eps else Verdict.FAIL
        report.add(f"circle path n={n} to {name}", verdict, **estimate.to_dict())
    return report


def finite_trial(order: int, config: RunConfig) -> VerificationReport:
    report = VerificationReport(suite="finite")
    for group in abelian_groups_of_order(order):
        verify_duality_fin(group, config.enumeration_cap, report)
        if group.order <= CLOSURE_CROSSCHECK_ORDER:
            hnf_count = len(enumerate_subgroups(group, config.enumeration_cap))
            closure_count = len(subgroups_by_closure(group, config.enumeration_cap))
            verdict = Verdict.PASS if hnf_count == closure_count else Verdict.FAIL
            report.add(f"{group}: closure count", verdict, hnf=hnf_count, closure=closure_count)
    return report


def components_trial(seed: np.random.SeedSequence, config: RunConfig) -> VerificationReport:
    rng = np.random.default_rng(seed)
    report = VerificationReport(suite="components")
    finite = tuple(int(x) for x in rng.integers(2, 5, size=int(rng.integers(0, 2))))
    ambient = AmbientGroup(0, int(rng.integers(0, 3)), int(rng.integers(0, 3)), finite)
    h = _random_subgroup(rng, ambient)
    dim = component_of(ambient, h)
    fiber = split_fiber_descriptor(h, elliptic_part(ambient), identity_component(ambient))
    consistent = fiber.only(AtomKind.TORUS) and fiber.count(AtomKind.TORUS) == dim
    rigid = is_rigid(h) == (dim == 0)
    verdict = Verdict.PASS if consistent and rigid else Verdict.FAIL
    report.add(f"subgroup of {ambient.descriptor()}", verdict, torus_dim=dim, fiber=str(fiber))
    return report


def classifier_table(report: VerificationReport) -> None:
    """Fixed descriptor, isolation and component cases, each checked against its dual as well."""
    for text, connectivity, cardinality, case, boundary in CLASSIFIER_TABLE:
        g = parse_descriptor(text)
        verdict = component_verdict(g)
        got = (classify_connectivity(g).kind.value, verdict.cardinality.value, verdict.case, verdict.theorem_boundary)
        dual = dual_descriptor(g)
        mirrored = (classify_connectivity(dual).kind, component_cardinality(dual)) == \
            (classify_connectivity(g).kind, verdict.cardinality)
        ok = got == (connectivity, cardinality, case, boundary) and mirrored
        report.add(f"classify {text or '0'}", Verdict.PASS if ok else Verdict.FAIL,
                   connectivity=got[0], components=got[1], case=got[2], theorem_boundary=got[3])

    for h_text, q_text, expected in ISOLATION_TABLE:
        h, q = parse_descriptor(h_text), parse_descriptor(q_text)
        got = is_isolated(h, q)
        ok = got == expected == is_isolated(dual_descriptor(q), dual_descriptor(h))
        report.add(f"isolated {h_text or '0'} in extension by {q_text or '0'}",
                   Verdict.PASS if ok else Verdict.FAIL, isolated=got)

    for b, c, cont, disc, expected in COMPONENT_TABLE:
        ambient = AmbientGroup(0, b, c)
        h = from_generators(ambient, cont, disc)
        dim = component_of(ambient, h)
        ok = dim == expected and is_rigid(h) == (dim == 0)
        gens = [[format_fraction(Fraction(x)) for x in col] for col in disc]
        report.add(f"component in {ambient.descriptor()} of {gens} + {len(cont)} directions",
                   Verdict.PASS if ok else Verdict.FAIL, torus_dim=dim)


# Orchestration

def _safe(trial: Callable, arg, config: RunConfig) -> VerificationReport:
    try:
        return trial(arg, config)
    except ResourceCapError as e:
        out = VerificationReport(suite="cap")
        out.add("resource cap reached", Verdict.INCONCLUSIVE, error=e.to_dict())
        return out


def _run_trials(trial: Callable, args: Sequence, config: RunConfig, label: str, progress: bool):
    jobs = [(trial, arg, config) for arg in args]
    bar = dict(total=len(jobs), desc=label, disable=not progress, leave=False)
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(tqdm(pool.map(_safe, *zip(*jobs)), **bar))
    return [_safe(*job) for job in tqdm(jobs, **bar)]


TRIALS = {
    "duality": duality_trial,
    "transference": transference_trial,
    "paths": paths_trial,
    "components": components_trial,
}


def run_suite(name: str, config: RunConfig, progress: bool = False) -> VerificationReport:
    """Run one suite and return its report, cases in trial order."""
    if name not in TRIALS and name != "finite":
        raise ChabautyError(f"unknown suite: {name}")
    count = config.trial_count(name)
    report = VerificationReport(suite=name, seed=config.seed, params=config.echo())
    if name in ("duality", "paths"):
        report.params["suite_metric"] = suite_params(config.metric_params()).to_dict()
        report.params["eps"] = format_fraction(SUITE_EPS)
    log(f"suite {name}: {count} trials, seed {config.seed}")

    if name == "finite":
        args = list(range(1, count + 1))
        results = _run_trials(finite_trial, args, config, name, progress)
    else:
        children = np.random.SeedSequence(config.seed).spawn(count)
        results = _run_trials(TRIALS[name], children, config, name, progress)
    if name == "components":
        classifier_table(report)
    for result in results:
        report.extend(result)

    if name == "transference":
        products = [c.data["product"] for c in report.cases if "product" in c.data]
        report.params["observed_max_product"] = max(products) if products else None
    counts = report.counts
    log(f"suite {name}: {counts}")
    if counts[Verdict.INCONCLUSIVE.value]:
        log(f"suite {name}: {counts[Verdict.INCONCLUSIVE.value]} inconclusive cases")
    return report
