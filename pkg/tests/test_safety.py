from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brhbc.safety import (
    ExposureLimits,
    SafetyError,
    default_limits,
    exposure_estimate,
    load_limits,
    modeled_tx_power,
    tx_power,
)

F_PEAK = 68.93e6


def test_tx_power_examples():
    r = tx_power(1.0, 1.0, 10e-3)
    assert r.i_tx == pytest.approx(7.0710678e-3, rel=1e-7)
    assert r.p_tx == pytest.approx(5e-3, rel=1e-12)
    assert r.v_tx == pytest.approx(1 / np.sqrt(2))
    zero = tx_power(1.0, 1.0, 0.0)
    assert zero.i_tx == 0 and zero.p_tx == 0
    with pytest.raises(SafetyError):
        tx_power(1.0, 0.0, 1e-3)


@given(st.floats(0, 10), st.floats(1e-3, 1e3), st.floats(0, 1))
def test_tx_power_invariants(v_in, r, v_r):
    rep = tx_power(v_in, r, v_r)
    assert rep.i_tx == pytest.approx(v_r / np.sqrt(2) / r)
    assert rep.p_tx == pytest.approx(rep.v_tx * rep.i_tx) and rep.p_tx >= 0


def test_tx_power_rises_beyond_resonance_band(reference):
    f = np.logspace(np.log10(300e6), np.log10(500e6), 20)
    p = modeled_tx_power(reference.channel, f)
    assert np.all(np.diff(p) > 0)


def test_bundled_limits():
    lim = default_limits()
    e, h = lim.at(100e6)
    assert e == pytest.approx(27.7) and h == pytest.approx(0.073)
    assert lim.sar_limit == 0.08
    e1, _ = lim.at(1e6)
    assert e1 > e
    with pytest.raises(SafetyError):
        lim.at(5e9)
    with pytest.raises(SafetyError):
        lim.at(1e4)


def test_limits_validation():
    with pytest.raises(SafetyError):
        load_limits("frequency_hz,e_limit_v_per_m,h_limit_a_per_m\n1e6,0,1\n2e6,1,1\n")
    with pytest.raises(SafetyError):
        load_limits("frequency_hz,e_limit_v_per_m,h_limit_a_per_m\n2e6,1,1\n1e6,1,1\n")
    with pytest.raises(SafetyError):
        load_limits("f,e,h\n1e6,1,1\n")
    with pytest.raises(SafetyError):
        ExposureLimits(np.array([1e6, 2e6]), np.array([1.0, 1.0]), np.array([1.0, 1.0]), -1.0)


def test_zero_drive_is_safe(reference):
    rep = exposure_estimate(reference.channel, F_PEAK, 0.0)
    assert rep.induced_e == rep.induced_h == rep.sar_avg == 0
    assert rep.safe and all(np.isinf(rep.margins))


def test_reference_margins(reference):
    rep = exposure_estimate(reference.channel, F_PEAK, 1.0)
    me, mh, ms = rep.margins
    assert me >= 10 and mh >= 10 and ms >= 100
    assert rep.safe


def test_scaling_laws(reference):
    a = exposure_estimate(reference.channel, F_PEAK, 1.0)
    b = exposure_estimate(reference.channel, F_PEAK, 2.0)
    assert b.sar_avg / a.sar_avg == pytest.approx(4.0, rel=1e-12)
    assert b.induced_e / a.induced_e == pytest.approx(2.0, rel=1e-12)
    assert b.induced_h / a.induced_h == pytest.approx(2.0, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(1.0, 5e3), st.floats(0.0, 1.0))
def test_verdict_monotone(reference, v_hi, frac):
    hi = exposure_estimate(reference.channel, F_PEAK, v_hi)
    lo = exposure_estimate(reference.channel, F_PEAK, v_hi * frac)
    if hi.safe:
        assert lo.safe
    assert all(m_lo >= m_hi for m_lo, m_hi in zip(lo.margins, hi.margins))


def test_margins_invariant_under_rescaled_units(reference):
    rep = exposure_estimate(reference.channel, F_PEAK, 1.0)
    k = 1e3  # e.g. V/m -> mV/m applied to both estimate and limit
    scaled = replace(rep, induced_e=rep.induced_e * k, e_limit=rep.e_limit * k,
                     induced_h=rep.induced_h * k, h_limit=rep.h_limit * k,
                     sar_avg=rep.sar_avg * k, sar_limit=rep.sar_limit * k)
    np.testing.assert_allclose(scaled.margins, rep.margins, rtol=1e-12)


def test_missing_limit(reference):
    lim = load_limits("frequency_hz,e_limit_v_per_m,h_limit_a_per_m\n1e6,87,0.73\n1e7,28,0.073\n")
    with pytest.raises(SafetyError):
        exposure_estimate(reference.channel, F_PEAK, 1.0, lim)
    with pytest.raises(SafetyError):
        exposure_estimate(reference.channel, F_PEAK, 1.0, density=0)
