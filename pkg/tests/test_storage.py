import copy
import json

import numpy as np
import pytest

from wayfarer.env import SINGLE_POINT
from wayfarer.sim import ANT, POINT_MASS
from wayfarer.storage import (
    CheckpointError,
    ConfigError,
    checkpoint_document,
    load_checkpoint,
    load_config,
    parse_checkpoint,
    parse_train_config,
    save_checkpoint,
    save_config,
    train_config_document,
)
from wayfarer.trainer import TrainConfig, init_checkpoint, make_train_config


def small_checkpoint(variant_id=5, agent_kind=POINT_MASS):
    cfg = make_train_config(variant_id, agent_kind=agent_kind, policy_hidden=[3], value_hidden=[3])
    return init_checkpoint(cfg)


class TestConfigRoundTrip:
    def test_full_round_trip(self, tmp_path):
        cfg = make_train_config(
            3,
            agent_kind=ANT,
            n_iterations=42,
            gamma=0.97,
            policy_lr=0.002,
            policy_hidden=[32, 16],
            seed=9,
            episode_kwargs={"t_ep": 8.0, "boundary": (0.5, 1.5)},
        )
        save_config(cfg, tmp_path / "c.json")
        loaded = load_config(tmp_path / "c.json")
        assert loaded == cfg

    def test_parse_serialize_parse_fixed_point(self):
        cfg = make_train_config(2, agent_kind=POINT_MASS, value_lr=0.004)
        doc = train_config_document(cfg)
        again = train_config_document(parse_train_config(doc))
        assert again == doc

    def test_empty_document_gives_defaults(self):
        assert parse_train_config({}) == TrainConfig()

    def test_variant_sets_episode_styles(self):
        cfg = parse_train_config({"variant_id": 1})
        assert cfg.episode.training_style == SINGLE_POINT
        assert cfg.episode.observation_dim == 25

    def test_awkward_floats_survive(self, tmp_path):
        cfg = make_train_config(5, policy_lr=1 / 3, gamma=0.1 + 0.2 + 0.69, value_lr=1e-300)
        save_config(cfg, tmp_path / "c.json")
        loaded = load_config(tmp_path / "c.json")
        assert loaded.policy_lr == cfg.policy_lr
        assert loaded.gamma == cfg.gamma
        assert loaded.value_lr == cfg.value_lr


class TestConfigRejections:
    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown key 'learning_rate'"):
            parse_train_config({"learning_rate": 0.01})

    def test_unknown_nested_key_dotted_path(self):
        doc = {"episode": {"dynamics": {"bogus": 1.0}}}
        with pytest.raises(ConfigError, match="episode.dynamics.bogus"):
            parse_train_config(doc)

    def test_wrong_type_names_field(self):
        with pytest.raises(ConfigError, match="gamma must be a number"):
            parse_train_config({"gamma": "high"})

    def test_bool_is_not_an_integer(self):
        with pytest.raises(ConfigError, match="seed must be an integer"):
            parse_train_config({"seed": True})

    def test_bool_in_hidden_list(self):
        with pytest.raises(ConfigError, match="policy_hidden"):
            parse_train_config({"policy_hidden": [64, True]})

    def test_bad_variant_id(self):
        with pytest.raises(ConfigError, match="variant"):
            parse_train_config({"variant_id": 7})

    def test_style_contradicting_variant(self):
        doc = {"variant_id": 5, "episode": {"training_style": SINGLE_POINT}}
        with pytest.raises(ConfigError, match="training_style"):
            parse_train_config(doc)

    def test_value_validation_propagates(self):
        with pytest.raises(ConfigError, match="gamma"):
            parse_train_config({"gamma": 2.0})

    def test_non_object_document(self):
        with pytest.raises(ConfigError, match="must be an object"):
            parse_train_config([1, 2, 3])

    def test_invalid_json_file(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{nope")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(p)


class TestCheckpointRoundTrip:
    def test_bit_exact(self, tmp_path):
        ck = small_checkpoint()
        ck.iteration = 17
        save_checkpoint(ck, tmp_path / "ck.json")
        loaded = load_checkpoint(tmp_path / "ck.json")
        assert loaded.iteration == 17
        assert loaded.config == ck.config
        for a, b in zip(ck.policy.arrays() + ck.value.arrays(), loaded.policy.arrays() + loaded.value.arrays()):
            assert np.array_equal(a, b)
        assert np.array_equal(loaded.head.log_std, ck.head.log_std)

    def test_ant_checkpoint_round_trip(self, tmp_path):
        ck = small_checkpoint(variant_id=1, agent_kind=ANT)
        save_checkpoint(ck, tmp_path / "ck.json")
        loaded = load_checkpoint(tmp_path / "ck.json")
        assert loaded.episode.agent_kind == ANT
        assert loaded.policy.dims.input == 25
        assert np.array_equal(loaded.policy.weights[0], ck.policy.weights[0])

    def test_no_temp_files_left_behind(self, tmp_path):
        save_checkpoint(small_checkpoint(), tmp_path / "ck.json")
        assert [p.name for p in tmp_path.iterdir()] == ["ck.json"]

    def test_document_fields(self):
        doc = checkpoint_document(small_checkpoint())
        assert doc["format"] == "wayfarer-checkpoint"
        assert doc["version"] == 1
        assert len(doc["policy"]["weights"]) == 2  # one hidden layer


class TestCheckpointRejections:
    def test_wrong_format_marker(self):
        doc = checkpoint_document(small_checkpoint())
        doc["format"] = "something-else"
        with pytest.raises(CheckpointError, match="not a wayfarer-checkpoint"):
            parse_checkpoint(doc)

    def test_unsupported_version(self):
        doc = checkpoint_document(small_checkpoint())
        doc["version"] = 2
        with pytest.raises(CheckpointError, match=r"unsupported checkpoint version 2 \(supported: 1\)"):
            parse_checkpoint(doc)

    def test_log_std_shape(self):
        doc = checkpoint_document(small_checkpoint())
        doc["log_std"] = [0.1, 0.2, 0.3]
        with pytest.raises(CheckpointError, match="log_std"):
            parse_checkpoint(doc)

    def test_policy_input_must_match_observation(self):
        doc = checkpoint_document(small_checkpoint())
        other = small_checkpoint(variant_id=2)  # 10-dim observations
        doc["policy"] = checkpoint_document(other)["policy"]
        with pytest.raises(CheckpointError, match="policy input 10"):
            parse_checkpoint(doc)

    def test_truncated_weight_block(self):
        doc = checkpoint_document(small_checkpoint())
        doc = copy.deepcopy(doc)
        doc["policy"]["weights"][0] = doc["policy"]["weights"][0][:-1]
        with pytest.raises(CheckpointError, match="policy layer 0"):
            parse_checkpoint(doc)

    def test_missing_weight_block(self):
        doc = checkpoint_document(small_checkpoint())
        doc = copy.deepcopy(doc)
        doc["policy"]["weights"].pop()
        with pytest.raises(CheckpointError, match="weight blocks"):
            parse_checkpoint(doc)

    def test_negative_iteration(self):
        doc = checkpoint_document(small_checkpoint())
        doc["iteration"] = -1
        with pytest.raises(CheckpointError, match="iteration"):
            parse_checkpoint(doc)

    def test_bad_embedded_config(self):
        doc = checkpoint_document(small_checkpoint())
        doc["config"]["gamma"] = "fast"
        with pytest.raises(ConfigError):
            parse_checkpoint(doc)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_checkpoint(tmp_path / "absent.json")

    def test_corrupt_json(self, tmp_path):
        p = tmp_path / "ck.json"
        p.write_text('{"format": "wayfarer-checkpoint", ')
        with pytest.raises(CheckpointError, match="invalid JSON"):
            load_checkpoint(p)

    def test_bad_embedded_config_via_file(self, tmp_path):
        doc = checkpoint_document(small_checkpoint())
        doc["config"]["unknown_field"] = 1
        p = tmp_path / "ck.json"
        p.write_text(json.dumps(doc))
        with pytest.raises(CheckpointError, match="bad embedded config"):
            load_checkpoint(p)
