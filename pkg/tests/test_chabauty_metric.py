from fractions import Fraction
from math import sqrt

import numpy as np
import pytest

from core.chabauty_metric import (
    INFINITY,
    DistanceEstimate,
    MetricParams,
    _sequence_verdict,
    chabauty_distance,
    compactified_dist,
    converges_to,
    point_distance,
    point_norm,
    sample_points,
)
from core.errors import AmbientMismatchError, PreconditionError, ResourceCapError
from core.report import Verdict
from core.subgroup_calculus import AmbientGroup, from_generators, full_subgroup, trivial_subgroup


def scaled_integers(ambient, step):
    return from_generators(ambient, disc=[[step]])


def test_params_validation():
    with pytest.raises(PreconditionError):
        MetricParams(Fraction(1, 2), Fraction(1, 10))
    with pytest.raises(PreconditionError):
        MetricParams(8, 0)
    with pytest.raises(PreconditionError):
        MetricParams(8, 2)


def test_slack(default_params):
    assert default_params.slack == Fraction(1, 40) + Fraction(2, 9)
    assert default_params.refined().slack < default_params.slack


def test_compactified_distance(real_line):
    assert compactified_dist(real_line, [0], INFINITY) == 1.0
    assert compactified_dist(real_line, INFINITY, INFINITY) == 0.0
    assert compactified_dist(real_line, [0], [3]) == pytest.approx(1.25)
    assert compactified_dist(real_line, [3], [-3]) == pytest.approx(0.5)


def test_torus_and_finite_coordinates_use_their_own_metric():
    ambient = AmbientGroup(0, 0, 1, (5,))
    assert point_norm(ambient, [0.75, 0]) == pytest.approx(0.25)
    assert point_distance(ambient, [0, 1], [0, 3]) == pytest.approx(1.0)
    assert point_distance(ambient, [0.1, 2], [0.9, 2]) == pytest.approx(0.2)


def test_net_of_real_line(real_line):
    net = sample_points(full_subgroup(real_line), MetricParams(2, Fraction(1, 2)))
    assert net[:, 0].tolist() == [x / 2 for x in range(-4, 5)]


def test_net_of_integers(integer_lattice):
    net = sample_points(integer_lattice, MetricParams(3, Fraction(1, 2)))
    assert net[:, 0].tolist() == list(range(-3, 4))


def test_net_of_trivial_subgroup(real_line):
    net = sample_points(trivial_subgroup(real_line), MetricParams(3, Fraction(1, 2)))
    assert net.tolist() == [[0.0]]


def test_net_of_circle_is_canonical():
    torus = AmbientGroup(0, 0, 1)
    net = sample_points(full_subgroup(torus), MetricParams(1, Fraction(1, 4)))
    assert net.min() >= -0.5 and net.max() < 0.5
    assert len(np.unique(net)) == len(net)


def test_net_lifts_finite_coordinates_once():
    ambient = AmbientGroup(1, 0, 0, (2,))
    h = from_generators(ambient, disc=[[Fraction(1, 4), 1]])
    net = sample_points(h, MetricParams(64, Fraction(1, 100), net_cap=2000))
    assert len(net) == 513
    assert set(net[:, 1].tolist()) == {0.0, 1.0}


def test_net_cap(real_line):
    with pytest.raises(ResourceCapError):
        sample_points(full_subgroup(real_line), MetricParams(8, Fraction(1, 40), net_cap=100))


def test_distance_to_itself_is_only_slack(integer_lattice, default_params):
    est = chabauty_distance(integer_lattice, integer_lattice, default_params)
    assert est.lower == 0
    assert est.upper == default_params.slack


def test_distance_between_point_and_line(real_line, default_params):
    est = chabauty_distance(trivial_subgroup(real_line), full_subgroup(real_line), default_params)
    golden = (sqrt(5) - 1) / 2
    assert est.contains(golden)
    assert est.width <= 2 * default_params.slack + Fraction(2, 10**9)


def test_distance_is_symmetric(real_line, integer_lattice, default_params):
    half = scaled_integers(real_line, Fraction(1, 2))
    assert chabauty_distance(integer_lattice, half, default_params) == \
        chabauty_distance(half, integer_lattice, default_params)


def test_finer_lattices_approach_the_line(real_line, default_params):
    line = full_subgroup(real_line)
    uppers = [chabauty_distance(scaled_integers(real_line, step), line, default_params).upper
              for step in (1, Fraction(1, 2), Fraction(1, 4))]
    assert uppers[0] > uppers[1] > uppers[2]


def test_distance_requires_common_ambient(real_line, plane, default_params):
    with pytest.raises(AmbientMismatchError):
        chabauty_distance(trivial_subgroup(real_line), trivial_subgroup(plane), default_params)


def test_estimate_serializes_exact_and_float_bounds(integer_lattice, default_params):
    out = chabauty_distance(integer_lattice, integer_lattice, default_params).to_dict()
    assert out["lower"] == "0"
    assert out["upper_float"] == pytest.approx(float(default_params.slack))
    assert out["params"] == {"r_cut": "8", "delta": "1/40"}


def test_constant_sequence_converges(integer_lattice, default_params):
    report = converges_to([integer_lattice] * 3, integer_lattice, default_params, Fraction(1, 2))
    assert report.verdict is Verdict.PASS


def test_large_slack_is_inconclusive(integer_lattice, default_params):
    report = converges_to([integer_lattice] * 3, integer_lattice, default_params, Fraction(1, 10))
    assert report.verdict is Verdict.INCONCLUSIVE
    assert "hint" in report.cases[0].data


def test_separated_sequence_fails(real_line, integer_lattice, default_params):
    line = full_subgroup(real_line)
    report = converges_to([integer_lattice] * 2, line, default_params, Fraction(1, 4))
    assert report.verdict is Verdict.FAIL


def test_refining_lattices_converge_with_their_duals(real_line, default_params):
    seq = [scaled_integers(real_line, Fraction(1, n)) for n in (8, 16, 32)]
    report = converges_to(seq, full_subgroup(real_line), default_params, Fraction(1, 2), dual=True)
    case = report.cases[0]
    assert report.verdict is Verdict.PASS
    assert len(case.data["direct"]) == len(case.data["dual"]) == 3


def test_cap_makes_convergence_inconclusive(real_line, integer_lattice):
    params = MetricParams(8, Fraction(1, 40), net_cap=100)
    report = converges_to([integer_lattice], full_subgroup(real_line), params, Fraction(1, 2))
    assert report.verdict is Verdict.INCONCLUSIVE
    assert "error" in report.cases[0].data["direct"]


def bracket(upper, params):
    upper = Fraction(upper)
    return DistanceEstimate(max(Fraction(0), upper - 2 * params.slack), upper, params)


@pytest.mark.parametrize("uppers, verdict", [
    (["1/20", "3/40", "7/100", "2/25", "3/50"], Verdict.PASS),
    (["1/5", "9/100", "1/20"], Verdict.PASS),
    (["1/20", "1/5", "3/50"], Verdict.INCONCLUSIVE),
    (["1/5", "1/5", "3/20"], Verdict.INCONCLUSIVE),
    (["1/5", "1/5", "1/4"], Verdict.FAIL),
])
def test_sequence_verdict_tolerates_oscillation_inside_the_bracket(uppers, verdict):
    params = MetricParams(64, Fraction(1, 100))
    estimates = [bracket(u, params) for u in uppers]
    assert _sequence_verdict(estimates, Fraction(1, 10), params) is verdict
