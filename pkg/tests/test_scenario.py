from importlib import resources

import numpy as np
import pytest

from brhbc.scenario import ConfigError, bundled_config, load_scenario, parse_scenario

MINIMAL = """
[segment:arm]
length = 1.5
outer_radius = 0.04
skin_thickness = 0.003
height_above_ground = 0.5

[body]
path = arm
"""


def ref_text():
    return resources.files("brhbc.data").joinpath("reference_body.cfg").read_text()


def test_bundled_configs_load():
    for name in ("reference_body.cfg", "copper_cylinder.cfg", "thick_cylinder.cfg"):
        scn = load_scenario(bundled_config(name))
        assert scn.channel.path_length == pytest.approx(1.5)
        assert scn.channel.total_length == pytest.approx(1.8)
    with pytest.raises(ConfigError):
        bundled_config("nope.cfg")


def test_minimal_config_uses_defaults():
    scn = parse_scenario(MINIMAL)
    assert scn.channel.coupling.c_b == 150e-12
    assert scn.channel.model.n_segments == 512
    assert scn.sweep.points == 1024 and scn.safety.frequency is None
    assert scn.channel.tx_stub == () and np.isinf(scn.channel.termination.r_load)


def test_echo_covers_every_section():
    echo = load_scenario(bundled_config("reference_body.cfg")).echo()
    for sec in ("model", "segments", "body", "tx_device", "rx_device", "termination", "body_ground",
                "sweep", "excitation", "noise", "capacity", "safety", "leakage", "air_path", "calibration"):
        assert sec in echo
    assert echo["body"]["path"] == ["trunk"] and echo["body_ground"]["c_b"] == 20e-12
    assert echo["safety"]["frequency"] == "peak"


def test_relative_paths_resolve_against_config_dir(tmp_path):
    cfg = tmp_path / "sub" / "s.cfg"
    cfg.parent.mkdir()
    cfg.write_text(MINIMAL + "\n[calibration]\nmeasurement = meas.csv\n")
    scn = load_scenario(cfg)
    assert scn.calibration.measurement == str(tmp_path / "sub" / "meas.csv")


@pytest.mark.parametrize("extra, needle", [
    ("[bogus]\nx = 1\n", "[bogus]"),
    ("[sweep]\npoint = 10\n", "[sweep] point"),
    ("[sweep]\npoints = ten\n", "[sweep] points"),
    ("[termination]\nr_load = -5\n", "[termination]"),
    ("[body_ground]\nmode = sideways\n", "[body_ground] mode"),
    ("[body_ground]\nc_b = 0\n", "[body_ground] c_b"),
    ("[capacity]\nband = 1e6\n", "[capacity] band"),
    ("[air_path]\neps_eff = 0.5\n", "[air_path]"),
    ("[safety]\ndensity = 0\n", "[safety] density"),
    ("[model]\nbody_loss_factor = 2\n", "[model]"),
])
def test_errors_name_the_key(extra, needle):
    with pytest.raises(ConfigError) as exc:
        parse_scenario(MINIMAL + "\n" + extra)
    assert needle in str(exc.value)


def test_body_reference_errors():
    with pytest.raises(ConfigError, match=r"\[body\] path"):
        parse_scenario(MINIMAL.replace("path = arm", "path = leg"))
    with pytest.raises(ConfigError, match=r"\[body\] path"):
        parse_scenario(MINIMAL.replace("path = arm", "path ="))
    with pytest.raises(ConfigError, match="segment:arm"):
        parse_scenario(MINIMAL.replace("length = 1.5", ""))
    with pytest.raises(ConfigError, match="segment:arm"):
        parse_scenario(MINIMAL.replace("skin_thickness = 0.003", "skin_thickness = 0.05"))


def test_malformed_text():
    with pytest.raises(ConfigError):
        parse_scenario("not a config")


def test_lumped_mode_and_explicit_frequency():
    scn = parse_scenario(MINIMAL + "\n[body_ground]\nmode = lumped\n[safety]\nfrequency = 7e7\n")
    assert not scn.channel.coupling.distributed and scn.safety.frequency == 7e7


def test_reference_round_trips_through_text():
    a = parse_scenario(ref_text())
    b = load_scenario(bundled_config("reference_body.cfg"))
    assert a.echo()["derived"] == b.echo()["derived"]
