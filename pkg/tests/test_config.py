import json
import logging

import pytest

from scanpath import config
from scanpath.errors import InputError
from scanpath.models import ModelConfig, TrainConfig


def write_config(tmp_path, data):
    path = tmp_path / "run.json"
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return path


class TestRunConfig:
    def test_sections(self, tmp_path):
        path = write_config(tmp_path, {"model": {"scanpath_len": 4}, "train": {"epochs": 2, "lr": 0.01}})
        model_cfg, train_cfg = config.load_run_config(path)
        assert model_cfg == ModelConfig(scanpath_len=4)
        assert train_cfg == TrainConfig(epochs=2, lr=0.01)

    def test_flat_keys_seed_both(self, tmp_path):
        path = write_config(tmp_path, {"seed": 9, "epochs": 1, "blocks": [[1, 4]]})
        model_cfg, train_cfg = config.load_run_config(path)
        assert (model_cfg.seed, train_cfg.seed) == (9, 9)
        assert model_cfg.blocks == ((1, 4),)
        assert train_cfg.epochs == 1

    def test_defaults(self, tmp_path):
        model_cfg, train_cfg = config.load_run_config(write_config(tmp_path, {}))
        assert train_cfg.lr == config.DEFAULT_LEARNING_RATE == 0.0003
        assert train_cfg.epochs == config.DEFAULT_EPOCHS
        assert model_cfg.scanpath_len == config.DEFAULT_SCANPATH_LEN == 8

    @pytest.mark.parametrize(
        "data, message",
        [
            ({"optimizer": "sgd"}, "unknown config keys"),
            ({"model": {}, "extra": {}}, "unknown config sections"),
            ({"train": {"lr": 0}}, "invalid config"),
            ({"model": {"dropout": 0.5}}, "invalid config"),
            ("[1, 2]", "JSON object"),
            ("{oops", "not valid JSON"),
        ],
    )
    def test_rejects(self, tmp_path, data, message):
        with pytest.raises(InputError, match=message):
            config.load_run_config(write_config(tmp_path, data))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="cannot read config"):
            config.load_run_config(tmp_path / "absent.json")


def test_log_level_falls_back_to_info(monkeypatch):
    monkeypatch.setattr(config, "LOG_LEVEL", "NOT_A_LEVEL")
    assert config.log_level() == logging.INFO
    monkeypatch.setattr(config, "LOG_LEVEL", "DEBUG")
    assert config.log_level() == logging.DEBUG
