import json
import math
import os

import numpy as np
import pytest
from PIL import Image

from scanpath.errors import DatasetFormatError, EmptyDatasetError, InputError
from scanpath.ingest import (
    dump_dataset,
    length_stats,
    length_stats_by_split,
    load_dataset,
    load_image,
    load_record_saliency,
    load_saliency,
    mix_seed,
    resample_scanpath,
    resolve_asset,
    select_random_scanpath,
    stable_hash,
    write_pgm,
    write_text_grid,
)
from scanpath.models import Scanpath

from tests.helpers import make_record, write_jsonl


class TestLoadDataset:
    def test_loads_bundled_fixture(self, lengths_path):
        records = load_dataset(lengths_path)
        assert [r.image_id for r in records] == ["img_a", "img_b"]
        assert [len(s) for r in records for s in r.scanpaths] == [2, 3, 3, 8]
        assert records[0].split == "train"
        timed = records[1].scanpaths[0]
        np.testing.assert_array_equal(timed.durations(), [200.0, 180.0, 220.0])

    def test_blank_lines_skipped(self, tmp_path):
        row = {"image_id": "a", "width": 4, "height": 4, "scanpaths": [[[0.5, 0.5]]]}
        path = write_jsonl(tmp_path / "d.jsonl", [row, "", "   ", row])
        assert len(load_dataset(path)) == 2

    def test_malformed_line_reports_line_number(self, tmp_path):
        row = {"image_id": "a", "width": 4, "height": 4, "scanpaths": [[[0.5, 0.5]]]}
        path = write_jsonl(tmp_path / "d.jsonl", [row, "{not json"])
        with pytest.raises(DatasetFormatError) as info:
            load_dataset(path)
        assert info.value.line_number == 2
        assert info.value.detail.startswith("line 2:")
        assert info.value.exit_code == 2

    def test_invalid_utf8_reports_line_number(self, tmp_path):
        good = b'{"image_id": "a", "width": 1, "height": 1, "scanpaths": [[[0.1, 0.1]]]}\n'
        path = tmp_path / "d.jsonl"
        path.write_bytes(good + b'{"image_id": "\xff\xfe", "width": 1}\n')
        with pytest.raises(DatasetFormatError, match="line 2: invalid UTF-8") as info:
            load_dataset(path)
        assert info.value.line_number == 2

    def test_missing_key(self, tmp_path):
        path = write_jsonl(tmp_path / "d.jsonl", [{"image_id": "a", "width": 4, "scanpaths": [[[0.5, 0.5]]]}])
        with pytest.raises(DatasetFormatError, match="height"):
            load_dataset(path)

    def test_empty_scanpath_rejected(self, tmp_path):
        path = write_jsonl(tmp_path / "d.jsonl", [{"image_id": "a", "width": 4, "height": 4, "scanpaths": [[]]}])
        with pytest.raises(DatasetFormatError, match="empty scanpath"):
            load_dataset(path)

    def test_out_of_bounds_names_image(self, tmp_path):
        row = {"image_id": "street_12", "width": 11, "height": 11, "scanpaths": [[[11, 0]]]}
        path = write_jsonl(tmp_path / "d.jsonl", [row])
        with pytest.raises(DatasetFormatError, match="street_12"):
            load_dataset(path, "pixel_origin0")

    def test_pixel_origin0(self, tmp_path):
        row = {"image_id": "a", "width": 11, "height": 21, "scanpaths": [[[5, 20], [0, 0]]]}
        records = load_dataset(write_jsonl(tmp_path / "d.jsonl", [row]), "pixel_origin0")
        np.testing.assert_array_equal(records[0].scanpaths[0].xy(), [[0.5, 1.0], [0.0, 0.0]])

    def test_pixel_origin1(self, tmp_path):
        row = {"image_id": "a", "width": 11, "height": 11, "scanpaths": [[[1, 11], [6, 6]]]}
        records = load_dataset(write_jsonl(tmp_path / "d.jsonl", [row]), "pixel_origin1")
        np.testing.assert_array_equal(records[0].scanpaths[0].xy(), [[0.0, 1.0], [0.5, 0.5]])

    def test_null_timestamp_with_duration(self, tmp_path):
        row = {"image_id": "a", "width": 4, "height": 4, "scanpaths": [[[0.5, 0.5, None, 120]]]}
        fixation = load_dataset(write_jsonl(tmp_path / "d.jsonl", [row]))[0].scanpaths[0].fixations[0]
        assert fixation.t is None
        assert fixation.dur == 120

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_dataset(tmp_path / "absent.jsonl")

    def test_dump_is_stable(self, lengths_path, tmp_path):
        records = load_dataset(lengths_path)
        first = tmp_path / "first.jsonl"
        second = tmp_path / "second.jsonl"
        assert dump_dataset(records, first) == 2
        reloaded = load_dataset(first)
        assert reloaded == records
        dump_dataset(reloaded, second)
        assert first.read_bytes() == second.read_bytes()


class TestLengthStats:
    def test_bundled_fixture(self, lengths_path):
        stats = length_stats(load_dataset(lengths_path))
        assert stats.min == 2
        assert stats.max == 8
        assert stats.mean == 4.0
        assert stats.median == 3
        assert stats.mode == 3
        assert stats.mode_share == 0.5
        assert stats.count == 4
        assert stats.std == pytest.approx(math.sqrt(5.5), abs=1e-12)

    def test_per_split(self, lengths_path):
        summaries = length_stats_by_split(load_dataset(lengths_path))
        assert list(summaries) == ["train", "val", "all"]
        assert summaries["train"].mean == 2.5
        assert summaries["val"].max == 8
        assert summaries["all"].count == 4

    def test_mode_ties_pick_smallest(self):
        records = [make_record("a", [[0.1, 0.1]] * 5, [[0.1, 0.1]] * 4, [[0.1, 0.1]] * 5, [[0.1, 0.1]] * 4)]
        stats = length_stats(records)
        assert stats.mode == 4
        assert stats.median == 4

    def test_single_scanpath(self):
        stats = length_stats([make_record("a", [[0.1, 0.1]] * 6)])
        assert (stats.min, stats.max, stats.median, stats.mode, stats.std) == (6, 6, 6, 6, 0.0)
        assert stats.mode_share == 1.0

    def test_empty(self):
        with pytest.raises(EmptyDatasetError, match="empty dataset"):
            length_stats([])

    @pytest.mark.skipif(not os.getenv("SALICON_SCANPATHS"), reason="SALICON_SCANPATHS not set")
    def test_salicon_lengths(self):
        stats = length_stats(load_dataset(os.environ["SALICON_SCANPATHS"]))
        assert stats.mean == pytest.approx(7.86, abs=0.01)
        assert stats.median == 8
        assert stats.std == pytest.approx(4.45, abs=0.01)
        assert stats.mode == 8
        assert stats.mode_share * 100 == pytest.approx(9.38, abs=0.1)
        assert stats.count == 584927


class TestSaliencyFiles:
    def test_text_grid_round_trip(self, tmp_path):
        values = np.array([[0.0, 0.125, 3.5], [1e-3, 2.0, 0.1]])
        path = tmp_path / "map.txt"
        write_text_grid(path, values)
        np.testing.assert_array_equal(load_saliency(path).values, values)

    def test_pgm_16_bit(self, tmp_path):
        values = np.array([[0.0, 1.0], [2.0, 4.0]])
        path = tmp_path / "map.pgm"
        write_pgm(path, values)
        loaded = load_saliency(path).values
        assert loaded.max() == 65535.0
        np.testing.assert_allclose(loaded / loaded.max(), values / 4.0, atol=1e-4)

    def test_pgm_8_bit(self, tmp_path):
        path = tmp_path / "map.pgm"
        write_pgm(path, np.array([[0.0, 1.0, 2.0]]), maxval=255)
        assert path.read_bytes()[:11] == b"P5\n3 1\n255\n"
        np.testing.assert_array_equal(load_saliency(path).values, [[0.0, 128.0, 255.0]])

    def test_pgm_header_comment(self, tmp_path):
        path = tmp_path / "map.pgm"
        path.write_bytes(b"P5\n# written by hand\n2 1\n255\n\x00\xff")
        np.testing.assert_array_equal(load_saliency(path).values, [[0.0, 255.0]])

    @pytest.mark.parametrize("maxval, mode", [(255, "L"), (65535, "I")])
    def test_pgm_matches_pillow(self, tmp_path, maxval, mode):
        values = np.random.default_rng(3).uniform(0.0, 1.0, size=(5, 7))
        path = tmp_path / "map.pgm"
        write_pgm(path, values, maxval=maxval)
        with Image.open(path) as img:
            assert img.format == "PPM"
            assert img.mode == mode
            expected = np.asarray(img, dtype=np.float64)
        np.testing.assert_array_equal(load_saliency(path).values, expected)
        assert expected.max() == maxval

    def test_pgm_rejects_other_maxval(self, tmp_path):
        with pytest.raises(InputError, match="255 or 65535"):
            write_pgm(tmp_path / "map.pgm", np.ones((2, 2)), maxval=1023)

    def test_grayscale_png(self, tmp_path):
        path = tmp_path / "map.png"
        Image.fromarray(np.array([[0, 10], [20, 255]], dtype=np.uint8)).save(path)
        np.testing.assert_array_equal(load_saliency(path).values, [[0.0, 10.0], [20.0, 255.0]])

    def test_text_grid_with_bad_bytes(self, tmp_path):
        path = tmp_path / "map.txt"
        path.write_bytes(b"2 1\n1 \xff\n")
        with pytest.raises(InputError, match="neither an image nor a text grid"):
            load_saliency(path)

    def test_truncated_pgm(self, tmp_path):
        path = tmp_path / "map.pgm"
        path.write_bytes(b"P5\n2 2\n255\n\x00")
        with pytest.raises(InputError, match="cannot decode saliency map"):
            load_saliency(path)

    def test_bad_text_header(self, tmp_path):
        path = tmp_path / "map.txt"
        path.write_text("two by two\n1 2\n3 4\n")
        with pytest.raises(InputError):
            load_saliency(path)

    def test_row_count_mismatch(self, tmp_path):
        path = tmp_path / "map.txt"
        path.write_text("2 3\n1 2\n3 4\n")
        with pytest.raises(InputError, match="3 rows"):
            load_saliency(path)

    def test_record_saliency_resolves_relative_path(self, tmp_path):
        write_text_grid(tmp_path / "s.txt", np.array([[1.0, 2.0]]))
        record = make_record("a", [[0.5, 0.5]], saliency_path="s.txt")
        assert load_record_saliency(record, tmp_path).shape == (1, 2)
        assert load_record_saliency(make_record("b", [[0.5, 0.5]]), tmp_path) is None

    def test_resolve_asset(self, tmp_path):
        assert resolve_asset(None, tmp_path) is None
        assert resolve_asset("x.png", tmp_path) == tmp_path / "x.png"
        assert resolve_asset(str(tmp_path / "y.png"), "/elsewhere") == tmp_path / "y.png"


class TestLoadImage:
    def test_resized_and_scaled(self, tmp_path):
        path = tmp_path / "red.png"
        Image.new("RGB", (8, 6), (255, 0, 0)).save(path)
        image = load_image(path, (4, 5))
        assert image.shape == (3, 4, 5)
        np.testing.assert_allclose(image[0], 1.0, atol=0.01)
        np.testing.assert_allclose(image[1:], 0.0, atol=0.01)

    def test_grayscale_becomes_rgb(self, tmp_path):
        path = tmp_path / "gray.png"
        Image.new("L", (4, 4), 51).save(path)
        image = load_image(path, (4, 4))
        np.testing.assert_allclose(image, 0.2, atol=0.01)

    def test_unreadable(self, tmp_path):
        path = tmp_path / "broken.png"
        path.write_bytes(b"not an image")
        with pytest.raises(InputError):
            load_image(path, (4, 4))


class TestTargets:
    def test_selection_is_deterministic(self):
        record = make_record("img", *[[[i / 10, 0.5]] for i in range(5)])
        first = select_random_scanpath(record, 7)
        assert all(select_random_scanpath(record, 7) == first for _ in range(5))

    def test_selection_reaches_every_observer(self):
        record = make_record("img", *[[[i / 10, 0.5]] for i in range(3)])
        chosen = {select_random_scanpath(record, seed).fixations[0].x for seed in range(200)}
        assert chosen == {0.0, 0.1, 0.2}

    def test_selection_is_uniform(self):
        record = make_record("img", *[[[i / 10, 0.5]] for i in range(3)])
        picks = [select_random_scanpath(record, seed).fixations[0].x for seed in range(10000)]
        counts = [picks.count(x) for x in (0.0, 0.1, 0.2)]
        assert all(abs(count - 3330) <= 200 for count in counts)

    def test_selection_depends_on_image_id(self):
        observers = [[[i / 10, 0.5]] for i in range(10)]
        picks = {
            select_random_scanpath(make_record(f"img_{k}", *observers), 0).fixations[0].x
            for k in range(30)
        }
        assert len(picks) > 1

    def test_resample_truncates(self):
        scanpath = Scanpath.from_points([[i / 10, 0.5, i * 100.0, 50.0] for i in range(10)])
        resampled = resample_scanpath(scanpath, 8)
        assert len(resampled) == 8
        np.testing.assert_array_equal(resampled.xy(), scanpath.xy()[:8])
        assert resampled.fixations[0].t is None

    def test_resample_pads_with_last(self):
        scanpath = Scanpath.from_points([[0.1, 0.2], [0.3, 0.4]])
        resampled = resample_scanpath(scanpath, 5)
        np.testing.assert_array_equal(resampled.xy(), [[0.1, 0.2], [0.3, 0.4]] + [[0.3, 0.4]] * 3)

    def test_resample_rejects_zero(self):
        with pytest.raises(InputError):
            resample_scanpath(Scanpath.from_points([[0.1, 0.2]]), 0)

    def test_seed_mixing(self):
        assert mix_seed(3, 1, 2) == mix_seed(3, 1, 2)
        assert mix_seed(3, 1, 2) != mix_seed(3, 2, 1)
        assert 0 <= mix_seed(-1, 5) < 2 ** 64
        assert stable_hash("abc") == stable_hash("abc") != stable_hash("abd")


def test_fixture_file_is_canonical_json(lengths_path):
    for line in lengths_path.read_text().splitlines():
        assert set(json.loads(line)) >= {"image_id", "width", "height", "scanpaths"}
