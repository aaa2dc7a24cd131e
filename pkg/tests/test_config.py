import pytest

from staghunt.arena import GridMap
from staghunt.config import ConfigError, load_config, parse_config


def test_sections_build_configs():
    cfg = parse_config("""
[arena]
attack_range = 4.0
[reward]
punishment_mode = "paper"
[train]
total_episodes = 10
hidden = [16, 16]
[detection]
n_beams = 720
""")
    assert cfg.arena_config().attack_range == 4.0
    r = cfg.reward_config(GridMap.empty(8, 6))
    assert r.beta == 14 and r.attack_range == 4.0 and r.punishment_mode == "paper"
    assert cfg.train_config().hidden == (16, 16)
    assert cfg.detection_config().n_beams == 720


def test_overrides_win_and_none_is_ignored():
    cfg = parse_config("[train]\nseed = 3\ntotal_episodes = 5\n")
    cfg.override("train", seed=9, total_episodes=None)
    assert cfg.train_config().seed == 9 and cfg.train_config().total_episodes == 5


@pytest.mark.parametrize("text, msg", [
    ("[bogus]\nx = 1\n", "unknown section"),
    ("[arena]\nrange = 1\n", "unknown keys"),
    ("arena = 3\n", "must be a table"),
    ("[arena\n", "invalid config"),
])
def test_bad_configs(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)


def test_load_default_and_file(tmp_path):
    assert load_config(None).arena == {}
    p = tmp_path / "c.toml"
    p.write_text("[arena]\nsafe_distance = 2\n")
    assert load_config(p).arena_config().safe_distance == 2
