import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squaredrift.models import MODELS
from squaredrift.states import ModeState, PolarState, PitchforkNFState
from squaredrift.symmetry import (
    DIHEDRAL_NAMES,
    IDENTITY,
    GroupElement,
    SpatioTemporalSymmetry,
    T_HALF,
    T_QUARTER,
    TemporalShift,
    act_on_modes,
    act_on_nf,
    compose,
    element,
    fixed_subspace,
    act_on_core,
    is_closed,
    isotropy_of_state,
    parse_element,
    parse_spatiotemporal,
    spatiotemporal,
    translation,
    verify_equivariance,
)
from squaredrift.verify import random_params, random_state

# signed permutation matrices acting on positions, written out independently
MATRICES = {
    "e": np.eye(2),
    "rq": np.array([[0, 1], [-1, 0]]),
    "rq2": -np.eye(2),
    "rq3": np.array([[0, -1], [1, 0]]),
    "mx": np.diag([-1, 1]),
    "my": np.diag([1, -1]),
    "md": np.array([[0, 1], [1, 0]]),
    "mdp": np.array([[0, -1], [-1, 0]]),
}
ELEMENTS = [GroupElement(n) for n in DIHEDRAL_NAMES]


def test_compose_md_mx_is_rq():
    assert compose(element("md"), element("mx")) == element("rq")


def test_reflection_is_involution():
    assert compose(element("mx"), element("mx")) == IDENTITY


def test_translations_add():
    g = compose(translation(0.3, 0.1), translation(0.2, 0.4))
    assert g.dihedral == "e"
    assert g.translation == pytest.approx((0.5, 0.5), abs=1e-15)


def test_reflections_conjugate_translations():
    g = compose(element("mx"), translation(0.3, 0.1))
    assert g.translation == pytest.approx((-0.3, 0.1))
    g = compose(element("md"), translation(0.3, 0.1))
    assert g.translation == pytest.approx((0.1, 0.3))


def test_generating_relations():
    mx, md = element("mx"), element("md")
    assert compose(compose(md, mx), md) == element("my")
    assert compose(compose(mx, md), mx) == element("mdp")
    assert element("rq").order == 4
    for name in ("mx", "my", "md", "mdp"):
        assert element(name).order == 2


def test_dihedral_table_matches_matrices():
    for a, b in itertools.product(DIHEDRAL_NAMES, repeat=2):
        c = compose(element(a), element(b)).dihedral
        np.testing.assert_array_equal(MATRICES[c], MATRICES[a] @ MATRICES[b])


def test_group_axioms_exhaustive():
    for a, b, c in itertools.product(ELEMENTS, repeat=3):
        assert compose(compose(a, b), c) == compose(a, compose(b, c))
    for a in ELEMENTS:
        assert compose(a, IDENTITY) == a == compose(IDENTITY, a)
        assert compose(a, a.inverse()) == IDENTITY


@given(
    st.sampled_from(DIHEDRAL_NAMES), st.sampled_from(DIHEDRAL_NAMES),
    st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5),
)
def test_affine_composition(a, b, t1x, t1y, t2x, t2y):
    g1, g2 = GroupElement(a, (t1x, t1y)), GroupElement(b, (t2x, t2y))
    g = compose(g1, g2)
    x = np.array([0.37, -1.2])
    direct = MATRICES[a] @ (MATRICES[b] @ x + np.array([t2x, t2y])) + np.array([t1x, t1y])
    np.testing.assert_allclose(MATRICES[g.dihedral] @ x + np.array(g.translation), direct, atol=1e-12)
    inv = compose(g, g.inverse())
    assert inv.dihedral == "e"
    assert inv.translation == pytest.approx((0.0, 0.0), abs=1e-12)


def test_element_strings_round_trip():
    for g in ELEMENTS + [translation(0.25, -1.5), GroupElement("md", (0.1, 0.2))]:
        assert parse_element(str(g)) == g
    assert str(GroupElement("md", (0.5, 0.25))) == "t(0.5,0.25)*md"
    with pytest.raises(ValueError):
        parse_element("rx")


def test_spatiotemporal_strings():
    g = parse_spatiotemporal("tq*rq")
    assert g == spatiotemporal("rq", T_QUARTER.fraction)
    assert str(g) == "tq*rq"
    assert str(spatiotemporal("mx", T_HALF.fraction)) == "th*mx"
    assert str(spatiotemporal("my")) == "my"


def test_quarter_shift_four_times_is_identity():
    shift = TemporalShift()
    for _ in range(4):
        shift = shift + T_QUARTER
    assert shift.fraction == 0
    with pytest.raises(ValueError):
        TemporalShift(1 / 3)


def test_spatiotemporal_power_returns_to_identity():
    g = spatiotemporal("rq", T_QUARTER.fraction)
    power = SpatioTemporalSymmetry()
    for _ in range(4):
        power = power * g
    assert power == SpatioTemporalSymmetry()


# --- actions -----------------------------------------------------------------


def test_mx_on_modes():
    s = ModeState(1 + 2j, 0.3, 0.1, 2 + 0j, 0.5, 0.2)
    out = act_on_modes(element("mx"), s)
    assert out.ax == 1 - 2j
    assert (out.cx, out.dx) == (-0.3, -0.1)
    assert (out.ay, out.cy, out.dy) == (2, 0.5, 0.2)


def test_zero_translation_is_identity():
    s = ModeState(1 + 2j, 0.3, 0.1, 2 - 1j, 0.5, 0.2)
    assert act_on_modes(translation(0.0, 0.0), s) == s


def test_translation_rotates_phases_by_k():
    s = ModeState(1 + 0j, 0, 0, 1j, 0, 0)
    out = act_on_modes(translation(0.4, -0.2), s, k=2.0)
    assert out.ax == pytest.approx(np.exp(0.8j))
    assert out.ay == pytest.approx(1j * np.exp(-0.4j))


def test_rq_on_modes():
    ax, ay = 0.3 - 0.7j, -1.1 + 0.4j
    s = ModeState(ax, 0.1, 0.2, ay, 0.3, 0.4)
    out = act_on_modes(element("rq"), s)
    assert out == ModeState(ay, 0.3, 0.4, ax.conjugate(), -0.1, -0.2)


def test_mx_on_nf():
    out = act_on_nf(element("mx"), PitchforkNFState(0.2, 0.5, 1.0, 2.0))
    assert out == PitchforkNFState(-0.2, 0.5, -1.0, 2.0)


def test_md_twice_on_nf():
    s = PitchforkNFState(0.2, -0.5, 1.0, 2.0)
    assert act_on_nf(element("md"), act_on_nf(element("md"), s)) == s


def test_rq_on_hopf_nf():
    x = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    out = act_on_nf(element("rq"), x, "hopf")
    np.testing.assert_array_equal(out, [0.3, 0.4, -0.1, -0.2, 0.6, -0.5])


@pytest.mark.parametrize("model", sorted(MODELS))
def test_action_is_homomorphism(model):
    rng = np.random.default_rng(5)
    vf = MODELS[model]
    gens = ELEMENTS + [translation(0.7, 0.3), GroupElement("rq", (0.2, -0.9))]
    worst = 0.0
    for _ in range(100):
        x = random_state(model, rng)
        for g1, g2 in itertools.product(gens, repeat=2):
            lhs = vf.act(compose(g1, g2), x, 1.3)
            rhs = vf.act(g1, vf.act(g2, x, 1.3), 1.3)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    assert worst <= 1e-14


@pytest.mark.parametrize("model", sorted(MODELS))
def test_equivariance_1000_states(model):
    rng = np.random.default_rng(42)
    p = random_params(model, rng)
    worst = 0.0
    for _ in range(1000):
        x = random_state(model, rng)
        for g in (element("mx"), element("md"), translation(0.7, 0.3)):
            worst = max(worst, verify_equivariance(model, g, x, p))
    assert worst <= 1e-12


@pytest.mark.parametrize("model", sorted(MODELS))
def test_identity_equivariance_is_exact(model):
    rng = np.random.default_rng(1)
    x = random_state(model, rng)
    assert verify_equivariance(model, IDENTITY, x, random_params(model, rng)) == 0.0


def test_mx_fixed_state_exact():
    from squaredrift.states import ModelParams

    s = ModeState(1.3 + 0j, 0, 0, 0.7 + 0j, 0, 0)
    assert verify_equivariance("full", element("mx"), s, ModelParams(mu=1, beta=-1.5, Q=1, zeta=0.2)) == 0.0


@pytest.mark.parametrize("model", ["polar", "pitchfork", "hopf"])
def test_drift_parity(model):
    from squaredrift.verify import drift_parity_check

    res = drift_parity_check(model, 100, np.random.default_rng(2))
    assert res.passed, res.line()


# --- isotropy ----------------------------------------------------------------


def test_squares_have_full_isotropy():
    s = ModeState(math.sqrt(2), 0, 0, math.sqrt(2), 0, 0)
    assert isotropy_of_state(s) == frozenset(ELEMENTS)


def test_zero_state_has_full_isotropy():
    assert isotropy_of_state(ModeState(0, 0, 0, 0, 0, 0)) == frozenset(ELEMENTS)


def test_tsq_isotropy():
    s = ModeState(1.2, 0.4, 0.4, 1.5, 0, 0)
    assert isotropy_of_state(s) == {IDENTITY, element("my")}


@given(st.lists(st.floats(-3, 3), min_size=8, max_size=8))
@settings(max_examples=200)
def test_isotropy_is_closed(values):
    found = isotropy_of_state(ModeState.from_array(np.array(values)), tol=1e-8)
    assert IDENTITY in found
    assert is_closed(found)


def test_isotropy_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        isotropy_of_state(PolarState(1, 0, 0, 1, 0, 0, 0, 0), tol=0)


def test_fixed_subspace_of_my_is_cy_dy_zero():
    basis = fixed_subspace(act_on_core, [element("my")], 6)
    assert basis.shape == (6, 4)
    np.testing.assert_allclose(basis[[4, 5]], 0, atol=1e-15)
    np.testing.assert_allclose(basis.T @ basis, np.eye(4), atol=1e-14)
