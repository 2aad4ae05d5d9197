import math

import pytest

from gwemission import ConfigError
from gwemission.config import build_config, load_config, parse_directions, parse_grid, parse_number, with_overrides


def test_parse_number_pi_forms():
    assert parse_number("2pi") == pytest.approx(2 * math.pi)
    assert parse_number("pi/2") == pytest.approx(math.pi / 2)
    assert parse_number("0.5*pi") == pytest.approx(math.pi / 2)
    assert parse_number("1e-21") == 1e-21
    with pytest.raises(ValueError):
        parse_number("two")


def test_parse_grid():
    assert list(parse_grid("0:1:3")) == [0.0, 0.5, 1.0]
    assert list(parse_grid("1, 2,3")) == [1.0, 2.0, 3.0]
    for bad in ("", "0:1", "0:1:0", ","):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_parse_directions():
    assert parse_directions("0,0; pi/2,pi/4") == [(0.0, 0.0), (math.pi / 2, math.pi / 4)]
    with pytest.raises(ValueError):
        parse_directions("0,0,0")


def test_defaults_and_internal_units():
    cfg = load_config()
    gw, atom, wt = cfg.internal()
    assert gw.omega == 1.0 and gw.amplitude == 1e-21
    assert atom.omega0 == pytest.approx(1e13)
    assert wt == pytest.approx(2 * math.pi)


def test_time_in_seconds_uses_hertz_by_default():
    cfg = load_config(overrides={"physics.t": "0.1", "physics.omega": "10"})
    assert cfg.internal()[2] == pytest.approx(2 * math.pi)
    cfg = load_config(overrides={"physics.t": "0.1", "physics.omega": "10", "physics.angular": "true"})
    assert cfg.internal()[2] == pytest.approx(1.0)


def test_round_trip_through_ini():
    cfg = load_config(overrides={"physics.amplitude": "3e-7", "run.seed": "5", "physics.epsilon": "0.01"})
    again = load_config(cfg.to_ini())
    assert again == cfg


def test_precedence_and_exclusive_pairs():
    text = "[physics]\ngamma0 = 2e-3\n[run]\nout = from_file\n"
    cfg = load_config(text, {"physics.epsilon": "0.01"}, env_out="from_env")
    assert cfg.physics_gamma0 is None and cfg.physics_epsilon == 0.01
    assert cfg.run_out == "from_env"
    assert load_config(text, {"run.out": "flag"}, env_out="from_env").run_out == "flag"
    with pytest.raises(ConfigError, match="physics.gamma0"):
        load_config(overrides={"physics.gamma0": "1e-3", "physics.epsilon": "0.01"})


@pytest.mark.parametrize("key,value", [
    ("physics.omega", "-1"), ("run.seed", "-3"), ("quadrature.scheme", "simpson"),
    ("verify.oracle_amplitude", "0.1"), ("fisher.points", "0"), ("physics.amplitude", "abc"),
    ("spectrum.delta_over_omega", ""), ("nope.key", "1"),
])
def test_invalid_values_name_the_field(key, value):
    with pytest.raises(ConfigError) as info:
        load_config(overrides={key: value})
    assert key in str(info.value)


def test_malformed_ini():
    with pytest.raises(ConfigError):
        load_config("no section header")


def test_with_overrides_validates():
    cfg = build_config()
    with pytest.raises(ConfigError):
        with_overrides(cfg, run_threads=0)
