"""Kinematic model: spring geometry, torque, stiffness, energy, inverse."""

import math

import numpy as np
import pytest

from rsea import (
    ElasticConfig,
    SpringSpec,
    TorqueRangeError,
    UnsupportedConfigError,
    config_from_dict,
    config_to_dict,
    deflection_for_torque,
    equivalent_stiffness,
    is_feasible,
    max_feasible_deflection,
    outer_radius,
    output_torque,
    spring_potential_energy,
    spring_state,
)

D = math.radians


def cfg_with(pretension=0.5e-3, offset=0.0, pairs=6, **kw):
    return ElasticConfig(pairs=pairs, pretension=pretension,
                         offset_a=offset, offset_b=-offset, **kw)


# --- construction and validation ---------------------------------------

def test_spring_validation():
    with pytest.raises(ValueError):
        SpringSpec(stiffness=0.0)
    with pytest.raises(ValueError):
        SpringSpec(rest_length=-1e-3)
    with pytest.raises(ValueError):
        SpringSpec(max_extension=0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        ElasticConfig(pairs=0)
    with pytest.raises(ValueError):
        ElasticConfig(pairs=7)
    with pytest.raises(ValueError):
        ElasticConfig(pretension=0.1e-3)  # below the 0.5 mm floor
    with pytest.raises(ValueError):
        ElasticConfig(max_deflection=2.0)
    with pytest.raises(ValueError):
        ElasticConfig(offset_a=0.6)  # beyond the structural stop


def test_outer_radius():
    # r2 = r1 + l0 + pretension
    zero = ElasticConfig(pretension=0.0, min_pretension=0.0)
    assert outer_radius(zero) == pytest.approx(53.0e-3, abs=1e-12)
    assert outer_radius(ElasticConfig()) == pytest.approx(53.5e-3, abs=1e-12)
    two = ElasticConfig(pretension=2.0e-3)
    assert outer_radius(two) == pytest.approx(55.0e-3, abs=1e-12)


# --- spring state -------------------------------------------------------

def test_spring_state_at_rest(baseline):
    # aligned springs at zero deflection: length = l0 + pretension,
    # force = k * pretension
    st = spring_state(baseline, 0.0)
    assert st.length_a == pytest.approx(29.0e-3, abs=1e-12)
    assert st.length_b == pytest.approx(29.0e-3, abs=1e-12)
    assert st.force_a == pytest.approx(10.0, abs=1e-9)


def test_spring_state_at_full_deflection(baseline):
    # cosine law with prototype geometry at the 31.4 deg corner
    st = spring_state(baseline, D(31.4))
    assert st.length_a == pytest.approx(34.99880833603809e-3, rel=1e-12)
    assert st.force_a == pytest.approx(129.97616672076168, rel=1e-12)


def test_spring_state_offset_symmetric():
    cfg = cfg_with(offset=D(20.0))
    st = spring_state(cfg, 0.0)
    assert st.length_a == pytest.approx(31.608476625894845e-3, rel=1e-12)
    assert st.length_a == st.length_b


def test_slack_spring_cannot_push():
    # hitching circles closer than the rest length leave both springs
    # slack around the neutral position (reachable only through the
    # fitting override, never by a valid configuration)
    cfg = ElasticConfig(pretension=-2.0e-3, min_pretension=-1.0)
    st = spring_state(cfg, 0.0)
    assert st.length_a < cfg.spring.rest_length
    assert st.force_a == 0.0 and st.force_b == 0.0
    assert output_torque(cfg, 0.0) == 0.0
    # stretched taut again at a large enough deflection
    taut = spring_state(cfg, D(30.0))
    assert taut.force_a > 0.0


# --- torque -------------------------------------------------------------

def test_torque_corner_value(baseline):
    # peak of the minimum-pretension configuration
    assert output_torque(baseline, D(31.4)) == pytest.approx(30.433880545011345, rel=1e-12)


def test_torque_at_ten_degrees(baseline):
    assert output_torque(baseline, D(10.0)) == pytest.approx(2.1695374429139473, rel=1e-12)


def test_torque_zero_at_rest_for_opposed_offsets():
    for off in (0.0, D(10.0), D(20.0)):
        assert output_torque(cfg_with(offset=off), 0.0) == 0.0


def test_torque_antisymmetry_exact():
    cfg = cfg_with(offset=D(15.0))
    betas = np.linspace(1e-4, D(31.4), 57)
    np.testing.assert_array_equal(output_torque(cfg, -betas), -output_torque(cfg, betas))
    np.testing.assert_array_equal(equivalent_stiffness(cfg, -betas),
                                  equivalent_stiffness(cfg, betas))


def test_pair_count_proportionality_exact():
    # pair count is the last factor, so m ratios are exact in floating point
    rng = np.random.default_rng(7)
    betas = rng.uniform(-D(31.4), D(31.4), 100)
    offsets = rng.uniform(0.0, D(20.0), 100)
    for beta, off in zip(betas, offsets):
        c4 = cfg_with(offset=off, pairs=4)
        c6 = cfg_with(offset=off, pairs=6)
        assert output_torque(c6, beta) == 1.5 * output_torque(c4, beta)
        assert equivalent_stiffness(c6, beta) == 1.5 * equivalent_stiffness(c4, beta)


def test_zero_case_no_pretension():
    # spring length equals the rest length when the pre-tension vanishes
    cfg = ElasticConfig(pretension=0.0, min_pretension=0.0)
    st = spring_state(cfg, 0.0)
    assert st.force_a == pytest.approx(0.0, abs=1e-9)
    assert st.force_b == pytest.approx(0.0, abs=1e-9)
    assert output_torque(cfg, 0.0) == pytest.approx(0.0, abs=1e-12)


# --- stiffness ----------------------------------------------------------

def test_stiffness_extremes(baseline):
    k0 = equivalent_stiffness(baseline, 0.0)
    k_max = equivalent_stiffness(baseline, D(31.4))
    assert k0 == pytest.approx(5.423793103448287, rel=1e-12)
    assert k0 * math.pi / 180.0 == pytest.approx(0.095, rel=0.02)
    assert k_max == pytest.approx(124.26805966964642, rel=1e-12)


def test_stiffness_offset_at_rest():
    cfg = cfg_with(offset=D(20.0))
    assert equivalent_stiffness(cfg, 0.0) == pytest.approx(72.60105052040005, rel=1e-12)


def central_difference(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def test_stiffness_matches_finite_difference_grid():
    # analytic derivative against a central difference of the torque law
    pretensions = np.linspace(0.5e-3, 6.5e-3, 50)
    for dl in pretensions:
        cfg = cfg_with(pretension=float(dl))
        lim = max_feasible_deflection(cfg)
        betas = np.linspace(-lim, lim, 50)
        fd = central_difference(lambda b: output_torque(cfg, b), betas)
        k = equivalent_stiffness(cfg, betas)
        np.testing.assert_allclose(k, fd, rtol=1e-6)


def test_stiffness_monotone_hardening(baseline):
    betas = np.linspace(0.0, D(31.4), 200)
    k = equivalent_stiffness(baseline, betas)
    assert np.all(np.diff(k) > 0.0)


# --- energy -------------------------------------------------------------

def test_energy_at_rest(baseline):
    # 6 pairs * (k/2) * 2 * pretension^2
    assert spring_potential_energy(baseline, 0.0) == pytest.approx(0.03, rel=1e-12)


def test_energy_gradient_is_torque(baseline):
    betas = np.linspace(-D(31.0), D(31.0), 50)
    fd = central_difference(lambda b: spring_potential_energy(baseline, b), betas)
    tau = output_torque(baseline, betas)
    np.testing.assert_allclose(fd, tau, rtol=1e-6, atol=1e-9)


def test_energy_gradient_slack_region():
    cfg = ElasticConfig(pretension=0.0, min_pretension=0.0,
                        offset_a=D(20.0), offset_b=-D(20.0))
    fd = central_difference(lambda b: spring_potential_energy(cfg, b), D(15.0))
    assert fd == pytest.approx(float(output_torque(cfg, D(15.0))), rel=1e-6)


# --- inverse ------------------------------------------------------------

def test_deflection_for_torque_roundtrip(baseline):
    for tau in (0.0, 2.1695374429139473, 5.0, 30.4):
        beta = deflection_for_torque(baseline, tau)
        assert output_torque(baseline, beta) == pytest.approx(tau, abs=1e-9)
    assert deflection_for_torque(baseline, 2.1695374429139473) == pytest.approx(D(10.0), abs=1e-9)
    assert deflection_for_torque(baseline, 30.4) == pytest.approx(D(31.4), rel=1e-2)


def test_deflection_for_torque_zero_is_origin(baseline):
    assert deflection_for_torque(baseline, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_deflection_for_torque_range_error(baseline):
    with pytest.raises(TorqueRangeError):
        deflection_for_torque(baseline, 40.0)


def test_deflection_for_torque_rejects_nonmonotone():
    # offsets near 90 deg push the spring angle past the tangent point,
    # where the torque profile folds back
    cfg = ElasticConfig(offset_a=math.pi / 2, offset_b=math.pi / 2,
                        max_deflection=math.pi / 2)
    with pytest.raises(UnsupportedConfigError):
        deflection_for_torque(cfg, 0.1)


# --- working space ------------------------------------------------------

def test_feasibility_mask(baseline):
    assert bool(is_feasible(baseline, D(31.4)))
    assert not bool(is_feasible(baseline, D(32.0)))  # beyond the stop
    big = cfg_with(pretension=6.5e-3)
    # extension exceeds the rated maximum well before the stop
    assert not bool(is_feasible(big, D(31.4)))


def test_max_feasible_deflection(baseline):
    lim = max_feasible_deflection(baseline)
    assert lim == pytest.approx(D(31.4), rel=5e-3)
    assert bool(is_feasible(baseline, lim))
    off = cfg_with(offset=D(20.0))
    assert max_feasible_deflection(off) == pytest.approx(D(11.4), rel=2e-2)


# --- serialization ------------------------------------------------------

def test_config_dict_roundtrip():
    cfg = cfg_with(pretension=2.0e-3, offset=D(12.5), pairs=4)
    doc = config_to_dict(cfg)
    assert doc["pretension_mm"] == pytest.approx(2.0)
    assert doc["offset_a_deg"] == pytest.approx(12.5)
    back = config_from_dict(doc)
    assert back.pretension == pytest.approx(cfg.pretension, rel=1e-12)
    assert back.offset_b == pytest.approx(cfg.offset_b, rel=1e-12)
    assert back.pairs == 4


def test_config_dict_unknown_key():
    with pytest.raises(ValueError, match="sprign"):
        config_from_dict({"sprign": {}})
