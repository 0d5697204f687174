import pytest
from hypothesis import given, strategies as st

from pairpump.config import (DEFAULT_SETTINGS, DEFAULTS, Settings, coerce, load_config, parse_grid,
                             parse_vertices)
from pairpump.errors import ConfigError


def test_defaults_table_is_complete():
    cfg = load_config()
    assert set(cfg) == set(DEFAULTS)
    assert cfg["eta"] == 1e-6 and cfg["beta"] == 1e3
    assert Settings.from_config(cfg) == DEFAULT_SETTINGS


def test_file_and_override_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\neta = 1e-4\nm = 2   # inline\nmode = finite_T\n")
    cfg = load_config(path, {"eta": "2e-4", "beta": None})
    assert cfg["eta"] == 2e-4 and cfg["m"] == 2 and cfg["mode"] == "finite_T" and cfg["beta"] == 1e3


@pytest.mark.parametrize("text", ["bogus = 1\n", "eta = -1\n", "mode = hot\n", "eta = x\n", "[[[\n",
                                  "green_epsabs = 0\n"])
def test_bad_files_rejected(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.cfg")


def test_bool_coercion():
    assert coerce("richardson", "yes") is True
    assert coerce("richardson", "off") is False
    with pytest.raises(ConfigError):
        coerce("richardson", "maybe")


def test_grids():
    assert list(parse_grid("0:1:3")) == [0.0, 0.5, 1.0]
    assert list(parse_grid("1, 2.5")) == [1.0, 2.5]
    for bad in ("", "1:2", "a,b", "0:1:0"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=8))
def test_grid_roundtrip(values):
    text = ",".join(repr(v) for v in values)
    assert list(parse_grid(text)) == values


def test_vertices():
    assert parse_vertices("0,0; 1,0; 1,1") == [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]
    for bad in ("0,0", "0,0,1; 1,1", "a,b; c,d"):
        with pytest.raises(ConfigError):
            parse_vertices(bad)


def test_settings_validation_and_tightening():
    with pytest.raises(ConfigError):
        Settings(eta=0.0)
    with pytest.raises(ConfigError):
        Settings(sign_pairing="other")
    t = DEFAULT_SETTINGS.tightened(10)
    assert t.green_epsabs == DEFAULT_SETTINGS.green_epsabs / 10
    assert t.leg_epsrel == DEFAULT_SETTINGS.leg_epsrel / 10
    assert t.eta == DEFAULT_SETTINGS.eta
    assert hash(t) != hash(DEFAULT_SETTINGS)
