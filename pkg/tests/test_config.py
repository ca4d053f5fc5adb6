import pytest

from pdenhance.config import (
    ConfigError,
    RunConfig,
    format_config,
    load_config,
    parse_overrides,
    read_config_text,
)


def test_defaults_hold_the_tuned_constants():
    c = RunConfig()
    assert (c.alpha_stat, c.delta_onset) == (0.96, 1.4)
    assert (c.beta1, c.beta1_fast, c.beta2, c.beta2_fast, c.beta3) == (0.9, 0.8, 0.96, 0.8, 0.9)
    assert c.g_min == 0.178 and c.mem_depth == 50 and c.mem_dev == 0.4
    assert (c.smooth_prev, c.smooth_neighbor, c.smooth_self) == (0.1, 0.3, 0.6)
    assert (c.num_filters, c.fc1, c.erb_step, c.n_gd) == (47, 80.0, 0.5, 128)
    assert c.overrides() == {}


def test_file_then_overrides(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# tuned\nbeta1 = 0.85\ncomb_enabled = no  # trailing comment\n\n")
    c = load_config(p, beta1="0.8", mem_depth="30")
    assert c.beta1 == 0.8 and c.comb_enabled is False and c.mem_depth == 30
    assert c.overrides() == {"beta1": 0.8, "comb_enabled": False, "mem_depth": 30}


def test_round_trip_through_text(tmp_path):
    c = RunConfig(g_min=0.1, num_filters=40)
    p = tmp_path / "c.cfg"
    p.write_text(format_config(c))
    assert load_config(p) == c


@pytest.mark.parametrize(
    "pairs",
    [{"nope": "1"}, {"beta1": "fast"}, {"num_filters": "4.5"}, {"comb_enabled": "maybe"}],
)
def test_bad_overrides(pairs):
    with pytest.raises(ConfigError):
        parse_overrides(pairs)


def test_bad_lines_and_invariants():
    with pytest.raises(ConfigError, match="line 2"):
        read_config_text("beta1 = 0.9\njunk\n")
    with pytest.raises(ConfigError):
        RunConfig(hop=100)
    with pytest.raises(ConfigError):
        RunConfig(g_min=0.0)
    with pytest.raises(ConfigError):
        RunConfig(mem_depth=0)


def test_replace():
    assert RunConfig().replace(comb_enabled=False).overrides() == {"comb_enabled": False}
