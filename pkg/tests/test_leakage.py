import numpy as np
import pytest

from brhbc.leakage import LeakageError, body_moment, offbody_profile, receiver_pickup

F_PEAK = 68.93e6


@pytest.fixture(scope="module")
def profile(reference):
    return offbody_profile(reference.channel, F_PEAK, np.logspace(-1, 2, 121))


def test_ratio_below_tenth_at_half_metre(reference):
    prof = offbody_profile(reference.channel, F_PEAK, [0.5])
    assert prof.ratio[0] < 0.1


def test_ratio_definition(profile):
    np.testing.assert_allclose(profile.ratio, profile.v_off / profile.v_on)
    assert profile.r_d == pytest.approx(299792458 / (2 * np.pi * F_PEAK))


def test_strictly_decreasing_beyond_radiation_zone(profile):
    far = profile.distances > profile.r_d
    assert np.all(np.diff(profile.ratio[far]) < 0)


def test_close_range_is_comparable_or_higher(profile):
    # within 20% of the on-body length the off-body pickup is not required to be small
    assert profile.ratio[0] > profile.ratio[profile.distances <= 0.5][-1]


def test_far_slope(profile):
    m = profile.distances >= 20
    slope = np.polyfit(np.log10(profile.distances[m]), np.log10(profile.v_off[m]), 1)[0]
    assert abs(slope + 1) <= 0.1


def test_invariant_to_drive_amplitude(reference):
    d = [0.3, 0.5, 1.0, 3.0]
    a = offbody_profile(reference.channel, F_PEAK, d, v_in=1.0)
    b = offbody_profile(reference.channel, F_PEAK, d, v_in=2.0)
    np.testing.assert_allclose(b.ratio, a.ratio, rtol=1e-12)
    np.testing.assert_allclose(b.v_off, 2 * a.v_off, rtol=1e-12)
    assert body_moment(reference.channel, F_PEAK, 2.0) == pytest.approx(2 * a.moment, rel=1e-12)


def test_pickup_is_a_divider(reference):
    k = receiver_pickup(reference.channel.dev_rx, reference.channel.termination)
    assert 0 < k < 1


def test_csv(reference):
    text = offbody_profile(reference.channel, F_PEAK, [0.5, 1.0]).to_csv()
    lines = text.splitlines()
    assert lines[0] == "distance_m,v_off_volts,ratio" and len(lines) == 3
    assert float(lines[1].split(",")[0]) == 0.5


def test_errors(reference):
    for bad in ([], [0.0, 1.0], [1.0, 0.5], [1.0, 1.0]):
        with pytest.raises(LeakageError):
            offbody_profile(reference.channel, F_PEAK, bad)
    with pytest.raises(LeakageError):
        offbody_profile(reference.channel, F_PEAK, [0.5], onbody_length=1.8)
