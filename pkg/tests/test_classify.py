import math

import numpy as np
import pytest

from squaredrift.classify import (
    CANONICAL_GROUPS,
    ClassificationError,
    classify_equilibrium,
    classify_orbit,
    drift_profile,
    is_closed_group,
)
from squaredrift.dynamics.orbits import PeriodicOrbit
from squaredrift.figure2 import refine_symmetric_orbit
from squaredrift.models import dtsq_branch, squares_state, tsq_branch
from squaredrift.states import ModelParams, ModeState, PolarState
from squaredrift.symmetry import DIHEDRAL_NAMES, GroupElement, act_on_core, act_on_orbit, parse_spatiotemporal

FIG2 = ModelParams(mu=1.0, beta=-1.5, gamma=1.0, Q=1.0, zeta=0.2)
TSQ = FIG2.replace(mu=1.2)
N = 64
W = 0.5  # angular frequency of the synthetic orbits


def synthetic_orbit(core_of_t, drift_of_t, n=N):
    period = 2 * math.pi / W
    t = period * np.arange(n + 1) / n
    states = np.column_stack([core_of_t(t), drift_of_t(t)])
    return PeriodicOrbit("polar", FIG2, period, states, 0.0, np.array([]), None, 8 * n)


def psq_orbit(n=N):
    def core(t):
        c2 = np.cos(2 * W * t)
        return np.column_stack([1 + 0.1 * c2, 0.2 * np.cos(W * t), 0.1 * np.sin(W * t),
                                1 - 0.1 * c2, 0 * t, 0 * t])

    return synthetic_orbit(core, lambda t: np.column_stack([0.2 * np.sin(W * t) / W, 0 * t]), n)


def apw_orbit(n=N):
    def core(t):
        c2 = np.cos(2 * W * t)
        return np.column_stack([1 + 0.1 * c2, np.cos(W * t), 0.5 * np.sin(W * t),
                                1 - 0.1 * c2, -np.sin(W * t), 0.5 * np.cos(W * t)])

    return synthetic_orbit(core, lambda t: np.column_stack([np.sin(W * t) / W, (np.cos(W * t) - 1) / W]), n)


@pytest.fixture(scope="module")
def figure_apw():
    return refine_symmetric_orbit("APW")


# --- equilibria --------------------------------------------------------------


def test_squares_label():
    lab = classify_equilibrium(ModeState(math.sqrt(2), 0, 0, math.sqrt(2), 0, 0), FIG2)
    assert lab.label == "Squares"
    assert len(lab.group) == 8


def test_trivial_label():
    assert classify_equilibrium(np.zeros(8), FIG2, model="full").label == "Trivial"


def test_rolls_label():
    p = ModelParams(mu=1, beta=0.5)
    assert classify_equilibrium(PolarState(1, 0, 0, 0, 0, 0), p).label == "Rolls"


def test_tsq_label():
    lab = classify_equilibrium(tsq_branch(TSQ).state, TSQ, model="polar")
    assert lab.label == "TSq"
    assert [str(g) for g in lab.generators] == ["my"]
    assert lab.residual <= 1e-14


def test_dtsq_label():
    lab = classify_equilibrium(dtsq_branch(TSQ).state, TSQ, model="polar")
    assert lab.label == "DTSq"
    assert [str(g) for g in lab.generators] == ["md"]


@pytest.mark.parametrize("name", DIHEDRAL_NAMES)
def test_equilibrium_label_equivariance(name):
    g = GroupElement(name)
    x = tsq_branch(TSQ).state
    base = classify_equilibrium(x, TSQ, model="polar")
    image = x.copy()
    image[:6] = act_on_core(g, x[:6])
    lab = classify_equilibrium(image, TSQ, model="polar")
    assert lab.label == "TSq"
    assert abs(lab.residual - base.residual) <= 1e-12


def test_full_model_equilibrium_classified():
    x = tsq_branch(TSQ).state
    full = ModeState(x[0], x[1], x[2], x[3], x[4], x[5]).to_array()
    assert classify_equilibrium(full, TSQ, model="full").label == "TSq"


def test_non_equilibrium_rejected():
    with pytest.raises(ClassificationError):
        classify_equilibrium(squares_state(FIG2) + 0.1, FIG2, model="polar")


def test_pitchfork_normal_form_labels():
    from squaredrift.states import PitchforkNFParams

    p = PitchforkNFParams(1, -1, -1)
    assert classify_equilibrium(np.array([1.0, 0, 0, 0]), p, model="pitchfork").label == "TSq"
    v = math.sqrt(0.5)
    assert classify_equilibrium(np.array([v, v, 0, 0]), p, model="pitchfork").label == "DTSq"


# --- orbits ------------------------------------------------------------------


def test_canonical_groups_are_closed():
    for group in CANONICAL_GROUPS.values():
        assert len(group) == 4
        assert is_closed_group(group)


def test_synthetic_psq():
    lab = classify_orbit(psq_orbit())
    assert lab.label == "PSq"
    assert {str(g) for g in lab.generators} == {"my", "th*mx"}
    assert lab.residual <= 1e-12


def test_synthetic_apw():
    lab = classify_orbit(apw_orbit())
    assert lab.label == "APW"
    assert lab.circulation in (1, -1)
    assert lab.residual <= 1e-12


def test_off_grid_samples_still_classified():
    # N = 66 is not divisible by 4, so quarter shifts use spectral interpolation
    assert classify_orbit(apw_orbit(66)).label == "APW"


def test_constant_orbit_is_degenerate():
    orbit = synthetic_orbit(lambda t: np.tile([1, 0, 0, 1, 0, 0], (len(t), 1)), lambda t: np.zeros((len(t), 2)))
    with pytest.raises(ClassificationError):
        classify_orbit(orbit)


def test_asymmetric_orbit_is_unknown():
    def core(t):
        return np.column_stack([1 + 0.1 * np.cos(W * t), 0.3 * np.cos(W * t) + 0.1, 0.2 * np.sin(2 * W * t),
                                1 + 0.05 * np.sin(W * t), 0.1 * np.sin(W * t) + 0.05, 0.1 * np.cos(3 * W * t)])

    lab = classify_orbit(synthetic_orbit(core, lambda t: np.zeros((len(t), 2))))
    assert lab.label == "Unknown"


def test_subgroup_orbit_is_cross_roll_like():
    # keeps m_y but breaks the half-period m_x symmetry of PSq
    def core(t):
        return np.column_stack([1 + 0.1 * np.cos(W * t), 0.2 * np.cos(W * t) + 0.05, 0.1 * np.sin(W * t),
                                1 - 0.1 * np.cos(2 * W * t), 0 * t, 0 * t])

    lab = classify_orbit(synthetic_orbit(core, lambda t: np.zeros((len(t), 2))))
    assert lab.label == "CrossRollLike"
    assert [str(g) for g in lab.generators] == ["my"]


@pytest.mark.parametrize("name", DIHEDRAL_NAMES)
def test_orbit_label_equivariance(name):
    for make in (psq_orbit, apw_orbit):
        base = classify_orbit(make())
        lab = classify_orbit(act_on_orbit(GroupElement(name), make()))
        assert lab.label == base.label
        assert abs(lab.residual - base.residual) <= 1e-12
        assert is_closed_group(lab.group)


def test_label_stable_across_tolerances(figure_apw):
    assert classify_orbit(figure_apw, tol=1e-7).label == classify_orbit(figure_apw, tol=1e-5).label == "APW"


def test_figure_apw_invariant_under_quarter_turn(figure_apw):
    lab = classify_orbit(figure_apw)
    g = lab.generators[0]
    assert g in (parse_spatiotemporal("tq*rq"), parse_spatiotemporal("tq*rq3"))
    image = act_on_orbit(g, figure_apw)
    assert np.max(np.abs(image.samples - figure_apw.samples)) <= 1e-6 * figure_apw.diameter


# --- drift -------------------------------------------------------------------


def test_psq_drift_oscillates_without_net_motion():
    prof = drift_profile(psq_orbit())
    assert prof.relative_net() <= 1e-12
    assert prof.excursion > 0
    assert all(abs(q[1]) == 0 for q in prof.quarters)


def test_apw_drift_turns_each_quarter():
    prof = drift_profile(apw_orbit())
    assert prof.relative_net() <= 1e-12
    assert prof.quarter_turn_sense() in (1, -1)


def test_figure_apw_drift(figure_apw):
    prof = drift_profile(figure_apw)
    assert prof.relative_net() <= 1e-6
    assert prof.quarter_turn_sense() != 0
    assert len(set(prof.directions())) == 4


def test_tsq_drift_rate():
    prof = drift_profile(tsq_branch(TSQ).state, TSQ, model="polar")
    assert prof.rate == pytest.approx((math.sqrt(0.3), 0.0), abs=1e-15)


def test_tsq_drift_rate_full_model():
    # a relative equilibrium in Cartesian form: the phase of a_x turns at D c_x
    x = tsq_branch(TSQ).state
    full = ModeState(x[0], x[1], x[2], x[3], 0, 0).to_array()
    prof = drift_profile(full, TSQ.replace(D=2.0), model="full")
    assert prof.rate == pytest.approx((2 * math.sqrt(0.3), 0.0), abs=1e-14)


def test_equilibrium_drift_needs_parameters():
    with pytest.raises(ClassificationError):
        drift_profile(tsq_branch(TSQ).state, model="polar")
