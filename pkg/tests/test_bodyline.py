from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brhbc.bodyline import (
    BodyChannel,
    BodyGroundCoupling,
    BodySegment,
    DeviceGeometry,
    LineModel,
    NetworkError,
    PerUnitLengthParams,
    TerminationNetwork,
    TwoPort,
    cascade,
    conduction_resistance,
    first_resonance,
    pul_params,
    return_path_capacitance,
    segment_twoport,
    solve,
    transfer_function,
    uniform_line_abcd,
)
from conftest import db

SEG = BodySegment(1.0, 0.06, 0.004, 0.04)
COPPER_SEG = BodySegment(1.0, 0.06, 0.004, 0.04, "copper-reference", "copper-reference")
LOSSLESS = PerUnitLengthParams(r=0.0, l=250e-9, g=0.0, c=100e-12)


def test_wire_over_ground_closed_form():
    # acosh(5/3) = ln 3; values from an independent high-precision evaluation
    pul = pul_params(SEG, 1e6)
    assert pul.l == pytest.approx(219.7224578532335e-9, rel=1e-8)
    assert pul.c == pytest.approx(50.63888629886107e-12, rel=1e-8)
    assert pul.v_p == pytest.approx(1 / np.sqrt(pul.l * pul.c))


def test_parameters_are_non_negative():
    f = np.logspace(5, 9, 50)
    pul = pul_params(SEG, f)
    assert np.all(pul.r >= 0) and np.all(pul.g >= 0) and pul.l > 0 and pul.c > 0
    assert np.all(pul.r_rad >= 0)


def test_copper_resistance_many_orders_below_tissue():
    r_t = conduction_resistance(SEG, 1e5)
    r_c = conduction_resistance(COPPER_SEG, 1e5)
    assert r_t / r_c >= 1e6
    assert conduction_resistance(SEG, 1e8) > conduction_resistance(COPPER_SEG, 1e8)


def test_dc_resistance_is_parallel_layer_conduction():
    from brhbc.dielectrics import complex_permittivity, resolve_tissue

    f = 1e5
    _, s_skin = complex_permittivity(resolve_tissue("skin"), f)
    _, s_mus = complex_permittivity(resolve_tissue("muscle"), f)
    g = s_mus * np.pi * 0.056**2 + s_skin * np.pi * (0.06**2 - 0.056**2)
    # skin depth is metres here, so the surface-limited term is negligible
    assert conduction_resistance(SEG, f) == pytest.approx(1 / g, rel=1e-3)


def test_geometry_errors():
    with pytest.raises(NetworkError):
        BodySegment(1.0, 0.06, 0.07, 0.04)
    with pytest.raises(NetworkError):
        BodySegment(1.0, 0.06, 0.004, 0.0)
    with pytest.raises(NetworkError):
        BodySegment(-1.0, 0.06, 0.004, 0.04)
    with pytest.raises(Exception):
        BodySegment(1.0, 0.06, 0.004, 0.04, "bone")
    with pytest.raises(NetworkError):
        pul_params(SEG, 0.0)


def test_half_wave_inversion():
    f = 25e6
    dl = np.pi / (2 * np.pi * f * np.sqrt(LOSSLESS.l * LOSSLESS.c))
    tp = segment_twoport(LOSSLESS, dl, f)
    assert tp.A == pytest.approx(-1, abs=1e-12) and tp.D == pytest.approx(-1, abs=1e-12)
    assert abs(tp.B) < 1e-9 and abs(tp.C) < 1e-12


def test_zero_length_limit_is_identity():
    tp = segment_twoport(pul_params(SEG, 1e8), 1e-15, 1e8)
    np.testing.assert_allclose(tp.abcd, np.eye(2), atol=1e-12)
    with pytest.raises(NetworkError):
        segment_twoport(LOSSLESS, 0.0, 1e6)


def test_quarter_phase_segment():
    # v_p = 2e8 m/s, so 1 m at 25 MHz is pi/4
    tp = segment_twoport(LOSSLESS, 1.0, 25e6)
    assert LOSSLESS.v_p == pytest.approx(2e8)
    assert tp.A.real == pytest.approx(0.7071067811865476, abs=1e-12)
    assert tp.D == tp.A


def test_cascade_identity_and_semigroup():
    f = 7e7
    eye = TwoPort.identity(f)
    np.testing.assert_array_equal(cascade([eye, eye]).abcd, np.eye(2))
    pul = pul_params(SEG, f)
    two = cascade([segment_twoport(pul, 0.3, f)] * 2)
    np.testing.assert_allclose(two.abcd, segment_twoport(pul, 0.6, f).abcd, rtol=1e-9)


def test_cascade_matches_closed_form_uniform_line():
    f = np.array([1e6, 7e7, 3e8])
    pul = pul_params(SEG, f)
    chain = cascade([segment_twoport(pul, 1.0 / 1000, f)] * 1000)
    ref = np.moveaxis(uniform_line_abcd(pul, 1.0, f), -1, 0)
    assert np.max(np.abs(chain.abcd - ref) / np.abs(ref)) < 1e-6


def test_cascade_errors():
    with pytest.raises(NetworkError):
        cascade([])
    with pytest.raises(NetworkError):
        TwoPort.identity(1e6) @ TwoPort.identity(2e6)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-3, 2.0), st.floats(5.0, 9.0)), min_size=1, max_size=5), st.floats(5.0, 8.7))
def test_cascade_associative_and_reciprocal(parts, logf):
    f = 10**logf
    tps = [segment_twoport(pul_params(SEG, f), dl, f) if k % 2 else TwoPort.shunt(1j * 10 ** (-k), f)
           for k, (dl, _) in enumerate(parts)]
    left = cascade(tps)
    right = tps[0]
    if len(tps) > 1:
        right = tps[0] @ cascade(tps[1:])
    np.testing.assert_allclose(left.abcd, right.abcd, rtol=1e-9, atol=1e-300)
    assert abs(left.determinant - 1) < 1e-9


def test_disc_self_capacitance_floor():
    dev = DeviceGeometry(ground_plate_area=np.pi * 0.025**2)
    floor = 1.770837562560077e-12  # 8 * eps0 * 0.025
    assert return_path_capacitance(dev, 1e9) == pytest.approx(floor, rel=1e-8)
    assert return_path_capacitance(dev, 0.2) > floor
    with pytest.raises(NetworkError):
        return_path_capacitance(dev, 0.0)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_return_capacitance_non_increasing_in_distance(d1, d2):
    dev = DeviceGeometry()
    lo, hi = sorted((d1, d2))
    assert return_path_capacitance(dev, lo) >= return_path_capacitance(dev, hi)


def test_larger_ground_plate_raises_return_capacitance():
    small = DeviceGeometry()
    big = replace(small, ground_plate_area=4 * small.ground_plate_area)
    assert return_path_capacitance(big, 0.2) > return_path_capacitance(small, 0.2)


def test_termination_validation():
    with pytest.raises(NetworkError):
        TerminationNetwork(np.inf, None)
    with pytest.raises(NetworkError):
        TerminationNetwork(0.0, None)
    with pytest.raises(NetworkError):
        TerminationNetwork(50.0, -1e-12)
    assert TerminationNetwork(50.0, None).impedance(1e6) == pytest.approx(50.0)
    with pytest.raises(NetworkError):
        BodyGroundCoupling(0.0)


def test_transfer_function_wrapper_matches_channel(reference):
    ch = reference.channel
    g = transfer_function(ch.path, ch.dev_tx, ch.dev_rx, ch.termination, ch.coupling, 7e7, 512,
                          tx_stub=ch.tx_stub, rx_stub=ch.rx_stub, model=ch.model)
    assert g == solve(ch, 7e7).gain
    with pytest.raises(NetworkError):
        transfer_function(ch.path, ch.dev_tx, ch.dev_rx, ch.termination, ch.coupling, 7e7, 0)
    with pytest.raises(NetworkError):
        solve(ch, 0.0)


def test_scalar_and_vector_agree(reference):
    f = np.array([1e6, 7e7, 2e8])
    vec = solve(reference.channel, f).gain
    for k, fk in enumerate(f):
        assert solve(reference.channel, fk).gain == pytest.approx(vec[k], rel=1e-12)


def test_convergence_in_segments(reference):
    f = reference.sweep.frequencies()
    g512 = db(solve(reference.channel.with_model(n_segments=512), f).gain)
    g256 = db(solve(reference.channel.with_model(n_segments=256), f).gain)
    g1024 = db(solve(reference.channel.with_model(n_segments=1024), f).gain)
    assert np.max(np.abs(g512 - g256)) < 0.05
    assert np.max(np.abs(g1024 - g512)) < 0.05


def test_passivity(reference, copper):
    f = np.logspace(5, np.log10(5e8), 400)
    for scn in (reference, copper):
        sol = solve(scn.channel, f)
        assert np.all(sol.input_power >= sol.load_power * (1 - 1e-9))
    r = solve(reference.channel.with_(termination=TerminationNetwork(50.0, 2.3e-12)), f)
    assert np.all(r.load_power > 0)
    assert np.all(r.input_power >= r.load_power * (1 - 1e-9))


def _with_height(ch, h):
    seg = lambda s: replace(s, height_above_ground=h)
    return replace(ch, path=tuple(map(seg, ch.path)), tx_stub=tuple(map(seg, ch.tx_stub)),
                   rx_stub=tuple(map(seg, ch.rx_stub)))


def test_ground_proximity(reference):
    heights = [0.01, 0.02, 0.04, 0.08, 0.16]
    chans = [_with_height(reference.channel, h) for h in heights]
    c_pul = [pul_params(c.path[0], 1e6).c for c in chans]
    c_tot = [c.total_ground_capacitance() for c in chans]
    gains = [abs(solve(c, 1e6).gain) for c in chans]
    # lower height -> larger C', larger total body-ground capacitance, lower EQS gain
    assert all(a > b for a, b in zip(c_pul, c_pul[1:]))
    assert all(a > b for a, b in zip(c_tot, c_tot[1:]))
    assert all(a < b for a, b in zip(gains, gains[1:]))


def test_termination_monotonicity(reference):
    g = [abs(solve(reference.channel.with_(termination=TerminationNetwork(r, 2.3e-12)), 1e6).gain)
         for r in (50, 500, 3000, 30000)]
    assert all(a <= b for a, b in zip(g, g[1:]))


def test_lumped_mode_matches_distributed_in_eqs(reference):
    lumped = reference.channel.with_(coupling=BodyGroundCoupling(reference.channel.coupling.c_b, False))
    f = np.logspace(5, 6, 5)
    np.testing.assert_allclose(db(solve(lumped, f).gain), db(solve(reference.channel, f).gain), atol=0.05)
    assert abs(db(solve(lumped, 7e7).gain) - db(solve(reference.channel, 7e7).gain)) > 0.01


def test_length_scaling_of_first_resonance():
    f1 = first_resonance(LOSSLESS, 1.0, 1e6, 1e8)
    f2 = first_resonance(LOSSLESS, 2.0, 1e6, 1e8)
    assert f1 == pytest.approx(2e8 / 4, rel=1e-6)
    assert abs(f2 / f1 - 0.5) < 0.02


def test_current_profile(reference):
    sol = solve(reference.channel, 7e7, profile=True)
    p = sol.profile
    i = np.abs(p["current"])
    assert p["z"][0] < 0 < 1.5 < p["z"][-1]
    assert np.all(np.diff(p["z"]) > 0)
    # open ends carry almost no current
    assert i[0] < 0.01 * i.max() and i[-1] < 0.01 * i.max()
    assert np.sum(p["dl"]) == pytest.approx(reference.channel.total_length)
    with pytest.raises(NetworkError):
        solve(reference.channel, np.array([1e6, 2e6]), profile=True)


def test_line_model_validation():
    with pytest.raises(NetworkError):
        LineModel(body_loss_factor=1.5)
    with pytest.raises(NetworkError):
        LineModel(radiation_coefficient=-1)
    with pytest.raises(NetworkError):
        LineModel(n_segments=0)
    with pytest.raises(NetworkError):
        BodyChannel(())
