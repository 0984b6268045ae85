from fractions import Fraction

import pytest

from cli.suites import (
    CLASSIFIER_TABLE,
    COMPONENT_TABLE,
    ISOLATION_TABLE,
    SUITE_EPS,
    classifier_table,
    finite_trial,
    run_suite,
    suite_params,
)
from core.chabauty_metric import MetricParams, converges_to
from core.config import SUITES, RunConfig
from core.descriptor import classify_connectivity, component_verdict, is_isolated, parse_descriptor
from core.errors import ChabautyError
from core.report import VerificationReport, Verdict
from core.subgroup_calculus import AmbientGroup, component_of, from_generators, is_rigid


def small(suite, count=2, **kwargs):
    return RunConfig(trials={suite: count}, **kwargs)


def test_suite_params_keep_slack_below_half_the_tolerance(coarse_params, default_params):
    for params in (coarse_params, default_params):
        assert suite_params(params).slack < SUITE_EPS / 2
    fine = MetricParams(1000, Fraction(1, 1000))
    assert suite_params(fine) == fine


def test_suite_tolerance_separates_nearby_lattices(real_line, integer_lattice, default_params):
    stretched = from_generators(real_line, disc=[[Fraction(17, 16)]])
    report = converges_to([integer_lattice] * 5, stretched, suite_params(default_params), SUITE_EPS)
    assert report.verdict is Verdict.FAIL


def test_metric_suites_echo_their_tolerance():
    report = run_suite("paths", small("paths", 1))
    assert report.params["eps"] == "1/10"
    assert report.params["suite_metric"] == {"r_cut": "64", "delta": "1/100"}


def test_classifier_table_passes():
    report = VerificationReport(suite="components")
    classifier_table(report)
    assert len(report.cases) == len(CLASSIFIER_TABLE) + len(ISOLATION_TABLE) + len(COMPONENT_TABLE)
    assert report.verdict is Verdict.PASS, [c.to_dict() for c in report.failures]


@pytest.mark.parametrize("text, connectivity, cardinality, case, boundary", CLASSIFIER_TABLE)
def test_classifier_row(text, connectivity, cardinality, case, boundary):
    g = parse_descriptor(text)
    verdict = component_verdict(g)
    assert classify_connectivity(g).kind.value == connectivity
    assert (verdict.cardinality.value, verdict.case, verdict.theorem_boundary) == (cardinality, case, boundary)


@pytest.mark.parametrize("h, q, expected", ISOLATION_TABLE)
def test_isolation_row(h, q, expected):
    assert is_isolated(parse_descriptor(h), parse_descriptor(q)) is expected


@pytest.mark.parametrize("b, c, cont, disc, expected", COMPONENT_TABLE)
def test_component_row(b, c, cont, disc, expected):
    ambient = AmbientGroup(0, b, c)
    h = from_generators(ambient, cont, disc)
    assert component_of(ambient, h) == expected
    assert is_rigid(h) is (expected == 0)


def test_finite_trial_covers_every_group_of_the_order():
    report = finite_trial(12, RunConfig())
    summaries = [c.summary for c in report.cases]
    assert any(s.startswith("Z/12:") for s in summaries)
    assert any(s.startswith("Z/2 x Z/6:") for s in summaries)
    assert report.verdict is Verdict.PASS


@pytest.mark.parametrize("suite", SUITES)
def test_small_runs_pass(suite):
    report = run_suite(suite, small(suite))
    assert report.verdict is Verdict.PASS, [c.to_dict() for c in report.failures]
    assert report.seed == 42


def test_runs_are_reproducible():
    first = run_suite("transference", small("transference", 4, seed=9))
    second = run_suite("transference", small("transference", 4, seed=9))
    assert first.to_dict() == second.to_dict()
    assert first.params["observed_max_product"] is not None


def test_process_pool_keeps_trial_order():
    serial = run_suite("components", small("components", 4))
    pooled = run_suite("components", small("components", 4, workers=2))
    assert [c.to_dict() for c in serial.cases] == [c.to_dict() for c in pooled.cases]


def test_unknown_suite():
    with pytest.raises(ChabautyError):
        run_suite("nonsense", RunConfig())


@pytest.mark.slow
@pytest.mark.parametrize("suite", SUITES)
def test_full_suites_pass(suite):
    assert run_suite(suite, RunConfig()).verdict is Verdict.PASS
