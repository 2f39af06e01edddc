import pytest
from hypothesis import given, strategies as st

from orbitcert.dynamics import (
    Cyclic,
    GroupElement,
    Odometer,
    PointAtLevel,
    SystemSpec,
    act,
    box_elements,
    enumerate_points,
    generator,
    level_modulus,
    orbit,
    parse_system_spec,
    point_count,
    project,
    project_to,
    spec_str,
    validate_spec,
)
from orbitcert.supernatural import parse_sn


def test_level_modulus_examples():
    assert level_modulus(Odometer(parse_sn("2^inf*3^2")), 3) == 72
    assert level_modulus(Odometer(parse_sn("5")), 1) == 5
    assert level_modulus(Cyclic(7), 4) == 7
    assert level_modulus(Odometer(parse_sn("2^inf")), 0) == 1


def test_level_moduli_form_a_tower():
    f = Odometer(parse_sn("5*2^inf*3^2"))
    for k in range(6):
        assert level_modulus(f, k + 1) % level_modulus(f, k) == 0


def test_act_examples():
    spec = SystemSpec((Odometer(parse_sn("2^inf")),))
    x = PointAtLevel(3, (6,))
    assert act(spec, 3, GroupElement((3,)), x) == PointAtLevel(3, (1,))

    spec2 = SystemSpec((Cyclic(2), Odometer(parse_sn("3^inf"))))
    y = PointAtLevel(1, (1, 1))
    assert act(spec2, 1, GroupElement((1, 2)), y) == PointAtLevel(1, (0, 0))


def test_act_level_mismatch():
    spec = SystemSpec((Odometer(parse_sn("2^inf")),))
    with pytest.raises(ValueError):
        act(spec, 2, GroupElement((1,)), PointAtLevel(3, (6,)))


def test_project():
    spec = SystemSpec((Odometer(parse_sn("2^inf")),))
    assert project(spec, PointAtLevel(3, (6,))) == PointAtLevel(2, (2,))
    assert project_to(spec, PointAtLevel(3, (6,)), 0) == PointAtLevel(0, (0,))
    with pytest.raises(ValueError):
        project_to(spec, PointAtLevel(1, (0,)), 2)


def test_enumerate_points():
    spec = SystemSpec((Odometer(parse_sn("2^inf")),))
    assert [x.residues for x in enumerate_points(spec, 1)] == [(0,), (1,)]
    with pytest.raises(ValueError):
        enumerate_points(spec, 30)


def test_projection_intertwines_action():
    spec = SystemSpec((Cyclic(4), Odometer(parse_sn("5*2^inf"))))
    g = GroupElement((3, -2))
    for x in enumerate_points(spec, 2):
        lhs = project(spec, act(spec, 2, g, x))
        rhs = act(spec, 1, g, project(spec, x))
        assert lhs == rhs


def test_translation_by_one_is_a_full_cycle_per_factor():
    # dense single orbit at every level: +1 cycles through the whole truncation
    for f in [Odometer(parse_sn("2^inf*3")), Cyclic(6)]:
        spec = SystemSpec((f,))
        m = level_modulus(f, 2)
        xs = orbit(spec, 2, PointAtLevel(2, (0,)), generator(spec, 0), m)
        assert len({x.residues for x in xs[:-1]}) == m
        assert xs[-1] == xs[0]


def test_box_elements():
    spec = SystemSpec((Cyclic(2), Odometer(parse_sn("3^inf"))))
    box = box_elements(spec, 2)
    assert len(box) == 2 * 5
    assert GroupElement((1, -2)) in box
    spec1 = SystemSpec((Cyclic(9),))
    assert len(box_elements(spec1, 2)) == 5


def test_parse_and_render_spec():
    spec = parse_system_spec("odo:5*2^inf, cyc:3")
    assert spec == SystemSpec((Odometer(parse_sn("5*2^inf")), Cyclic(3)))
    assert spec_str(spec) == "odo:2^inf*5,cyc:3"
    with pytest.raises(Exception):
        parse_system_spec("odo:12")  # not supernatural
    with pytest.raises(Exception):
        parse_system_spec("cyc:0")
    with pytest.raises(Exception):
        parse_system_spec("5*2^inf")


def test_validate_spec():
    with pytest.raises(ValueError):
        validate_spec(SystemSpec((Odometer(parse_sn("5")),)))


@given(st.integers(0, 5), st.integers(-20, 20))
def test_act_matches_integer_translation(k, c):
    spec = SystemSpec((Odometer(parse_sn("2^inf*3^inf")),))
    m = level_modulus(spec.factors[0], k)
    x = PointAtLevel(k, (5 % m,))
    y = act(spec, k, GroupElement((c,)), x)
    assert y.residues[0] == (5 + c) % m


def test_point_count():
    spec = SystemSpec((Odometer(parse_sn("5*2^inf")), Odometer(parse_sn("3^inf"))))
    assert point_count(spec, 4) == 80 * 81
