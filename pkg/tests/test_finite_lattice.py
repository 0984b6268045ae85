from fractions import Fraction

import pytest

from core.errors import ResourceCapError, SchemaError
from core.finite_lattice import (
    FinSubgroup,
    FiniteAbelianGroup,
    abelian_groups_of_order,
    character_pairing,
    contains,
    enumerate_subgroups,
    orthogonal_fin,
    subgroups_by_closure,
    verify_duality_fin,
)
from core.report import Verdict


def group(*factors):
    return FiniteAbelianGroup(tuple(factors))


@pytest.mark.parametrize("factors, expected", [
    ((5,), 2),
    ((12,), 6),
    ((2, 2), 5),
    ((3, 3), 6),
    ((2, 4), 8),
    ((4, 4), 15),
    ((2, 2, 2), 16),
])
def test_subgroup_counts(factors, expected):
    assert len(enumerate_subgroups(group(*factors))) == expected


@pytest.mark.parametrize("factors", [(6,), (2, 4), (2, 2, 2), (3, 9)])
def test_closure_count_agrees(factors):
    g = group(*factors)
    lattice = enumerate_subgroups(g)
    closure = subgroups_by_closure(g)
    assert len(closure) == len(lattice)
    assert {h.element_set for h in lattice} == set(closure)


def test_enumeration_is_sorted_and_starts_with_trivial():
    lattice = enumerate_subgroups(group(2, 4))
    assert [h.order for h in lattice] == sorted(h.order for h in lattice)
    assert lattice[0].order == 1
    assert lattice[-1].order == 8


def test_invariant_factors_are_validated():
    with pytest.raises(SchemaError):
        group(4, 2)
    with pytest.raises(SchemaError):
        group(1, 4)


def test_from_orders_normalizes():
    assert FiniteAbelianGroup.from_orders([4, 3]) == group(12)
    assert FiniteAbelianGroup.from_orders([2, 2, 3, 1]) == group(2, 6)


def test_generated_subgroup_matches_element_set():
    g = group(2, 4)
    h = FinSubgroup.generated_by(g, [(1, 2)])
    assert h.order == 2
    assert h.elements() == [(0, 0), (1, 2)]
    assert h.contains((1, 6))
    assert not h.contains((1, 1))


def test_character_pairing():
    g = group(2, 4)
    assert character_pairing(g, (1, 1), (1, 1)) == Fraction(3, 4)
    assert character_pairing(g, (1, 2), (1, 2)) == Fraction(1, 2)
    assert character_pairing(g, (1, 2), (0, 2)) == 0


def test_orthogonal_in_cyclic_group():
    g = group(12)
    h = FinSubgroup.generated_by(g, [(4,)])
    assert orthogonal_fin(h) == FinSubgroup.generated_by(g, [(3,)])


def test_orthogonal_of_trivial_and_full():
    g = group(2, 4)
    lattice = enumerate_subgroups(g)
    trivial, full = lattice[0], lattice[-1]
    assert orthogonal_fin(trivial) == full
    assert orthogonal_fin(full) == trivial


def test_orthogonal_reverses_inclusion():
    g = group(2, 4)
    small = FinSubgroup.generated_by(g, [(0, 2)])
    big = FinSubgroup.generated_by(g, [(0, 1)])
    assert contains(big, small)
    assert contains(orthogonal_fin(small), orthogonal_fin(big))


@pytest.mark.parametrize("factors", [(2,), (12,), (2, 4), (3, 3), (2, 2, 2), (2, 2, 4)])
def test_duality_report_passes(factors):
    report = verify_duality_fin(group(*factors))
    assert report.verdict is Verdict.PASS
    assert not report.cases[0].data["problems"]


def test_group_order_cap():
    with pytest.raises(ResourceCapError):
        enumerate_subgroups(group(64), cap=32)


def test_subgroup_count_cap():
    with pytest.raises(ResourceCapError):
        enumerate_subgroups(group(2, 2, 2), cap=10)


def test_abelian_groups_of_order():
    assert abelian_groups_of_order(8) == [group(8), group(2, 4), group(2, 2, 2)]
    assert abelian_groups_of_order(12) == [group(12), group(2, 6)]
    assert abelian_groups_of_order(1) == [group()]


@pytest.mark.slow
@pytest.mark.parametrize("order", range(2, 65))
def test_duality_for_every_group_up_to_order_64(order):
    for g in abelian_groups_of_order(order):
        assert verify_duality_fin(g).verdict is Verdict.PASS
        if order <= 32:
            assert len(subgroups_by_closure(g)) == len(enumerate_subgroups(g))
