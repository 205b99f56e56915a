import json

import numpy as np
import pytest

from scanpath.checkpoint import (
    MAGIC,
    decode_parameters,
    encode_parameters,
    load_checkpoint,
    save_checkpoint,
    sidecar_path,
)
from scanpath.errors import InputError
from scanpath.models import ModelConfig
from scanpath.regressor import build

CONFIG = ModelConfig(input_size=(8, 8, 3), blocks=((1, 4), (2, 6)), scanpath_len=3, seed=5)


class TestCheckpoint:
    def test_save_and_load(self, tmp_path):
        model = build(CONFIG)
        path = save_checkpoint(model, tmp_path / "runs" / "model.splb")
        assert path.read_bytes().startswith(MAGIC)
        assert sidecar_path(path).name == "model.splb.json"
        assert json.loads(sidecar_path(path).read_text())["scanpath_len"] == 3

        loaded = load_checkpoint(path)
        assert loaded.config == CONFIG
        for original, restored in zip(model.layers, loaded.layers):
            np.testing.assert_array_equal(original.weights, restored.weights)
            np.testing.assert_array_equal(original.bias, restored.bias)
            assert (original.stride, original.padding) == (restored.stride, restored.padding)

    def test_predictions_survive_reload(self, tmp_path):
        model = build(CONFIG)
        image = np.random.default_rng(0).uniform(size=(3, 8, 8))
        path = save_checkpoint(model, tmp_path / "model.splb")
        assert load_checkpoint(path).predict(image) == model.predict(image)

    def test_layout(self):
        layers = build(CONFIG).layers
        data = encode_parameters(layers)
        floats = sum(layer.weights.size + layer.bias.size for layer in layers)
        assert len(data) == len(MAGIC) + 4 + len(layers) * 7 * 4 + floats * 8
        assert int.from_bytes(data[5:9], "little") == len(layers)

    def test_bad_magic(self):
        data = encode_parameters(build(CONFIG).layers)
        with pytest.raises(InputError, match="bad magic"):
            decode_parameters(b"XXXXX" + data[5:])

    def test_truncated(self):
        data = encode_parameters(build(CONFIG).layers)
        with pytest.raises(InputError, match="truncated"):
            decode_parameters(data[:-3])

    def test_trailing_bytes(self):
        data = encode_parameters(build(CONFIG).layers)
        with pytest.raises(InputError, match="trailing"):
            decode_parameters(data + b"\x00" * 8)

    def test_architecture_mismatch(self, tmp_path):
        path = save_checkpoint(build(CONFIG), tmp_path / "model.splb")
        other = CONFIG.model_copy(update={"scanpath_len": 4})
        sidecar_path(path).write_text(other.model_dump_json())
        with pytest.raises(InputError, match="sidecar"):
            load_checkpoint(path)

    def test_missing_sidecar(self, tmp_path):
        path = save_checkpoint(build(CONFIG), tmp_path / "model.splb")
        sidecar_path(path).unlink()
        with pytest.raises(InputError, match="cannot read checkpoint"):
            load_checkpoint(path)
