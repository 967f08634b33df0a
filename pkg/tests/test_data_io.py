"""Round-trip, validation, and corpus-index tests for cascade file handling."""

import io

import numpy as np
import pytest

from msep.data_io import (
    CorpusIndex,
    ParseError,
    build_corpus_index,
    censor,
    empirical_marks,
    load_cascade,
    parse_cascade,
    save_cascade,
    serialize_cascade,
)
from msep.model import Cascade


def sample_cascade():
    return Cascade(
        origin_mark=1234,
        times=np.array([0.5, 7.25, 7.25, 3600.125]),
        marks=np.array([10, 0, 999, 3], dtype=np.int64),
    )


class TestParse:
    def test_basic_file(self):
        c = parse_cascade("0,500\n12.5,30\n90,0\n")
        assert c.origin_mark == 500
        np.testing.assert_array_equal(c.times, [12.5, 90.0])
        np.testing.assert_array_equal(c.marks, [30, 0])

    def test_header_row_is_skipped(self):
        c = parse_cascade("time,magnitude\n0,500\n12.5,30\n")
        assert c.origin_mark == 500
        assert c.n_events == 1

    def test_blank_lines_ignored(self):
        c = parse_cascade("\n0,500\n\n12.5,30\n\n")
        assert c.n_events == 1

    def test_whitespace_around_fields(self):
        c = parse_cascade(" 0 , 500 \n 12.5 ,\t30\n")
        assert c.origin_mark == 500
        assert c.times[0] == 12.5

    def test_round_trip_is_identity(self):
        original = sample_cascade()
        buf = io.StringIO()
        serialize_cascade(original, buf)
        again = parse_cascade(buf.getvalue())
        assert again.origin_mark == original.origin_mark
        np.testing.assert_array_equal(again.times, original.times)
        np.testing.assert_array_equal(again.marks, original.marks)

    def test_round_trip_preserves_awkward_floats(self):
        c = Cascade(origin_mark=7,
                    times=np.array([0.1, 1.0 / 3.0, np.pi * 100]),
                    marks=np.array([1, 2, 3], dtype=np.int64))
        buf = io.StringIO()
        serialize_cascade(c, buf)
        again = parse_cascade(buf.getvalue())
        np.testing.assert_array_equal(again.times, c.times)

    def test_out_of_order_rows_sorted_with_warning(self):
        with pytest.warns(UserWarning, match="out of order"):
            c = parse_cascade("0,5\n100,1\n50,2\n")
        np.testing.assert_array_equal(c.times, [50.0, 100.0])
        np.testing.assert_array_equal(c.marks, [2, 1])

    def test_integral_float_mark_accepted(self):
        c = parse_cascade("0,500\n10,3.0\n")
        assert c.marks[0] == 3
        assert c.marks.dtype == np.int64

    @pytest.mark.parametrize("text,line_no", [
        ("0,500\n10,20,30\n", 2),            # wrong field count
        ("0,500\nabc,20\n", 2),              # non-numeric time
        ("0,500\n-5,20\n", 2),               # negative time
        ("0,500\n10,-3\n", 2),               # negative mark
        ("0,500\n10,2.5\n", 2),              # fractional mark
        ("0,500\n10,inf\n", 2),              # non-finite mark
        ("0,nan\n", 1),                      # non-finite origin mark
        ("5,500\n", 1),                      # origin not at time zero
    ])
    def test_malformed_rows_report_line_numbers(self, text, line_no):
        with pytest.raises(ParseError) as err:
            parse_cascade(text)
        assert err.value.line_no == line_no
        assert f"line {line_no}" in str(err.value)

    def test_empty_input_has_no_origin(self):
        with pytest.raises(ParseError, match="no origin"):
            parse_cascade("")

    def test_parse_error_is_value_error(self):
        assert issubclass(ParseError, ValueError)


class TestFiles:
    def test_save_and_load(self, tmp_path):
        c = sample_cascade()
        p = tmp_path / "c17.csv"
        save_cascade(c, p)
        loaded = load_cascade(p)
        assert loaded.id == "c17"
        assert loaded.path == p
        np.testing.assert_array_equal(loaded.cascade.times, c.times)
        np.testing.assert_array_equal(loaded.cascade.marks, c.marks)
        assert loaded.cascade.origin_mark == c.origin_mark


class TestCensor:
    def test_boundary_event_is_kept(self):
        c = sample_cascade()
        kept = censor(c, 7.25)
        assert kept.n_events == 3
        assert kept.times[-1] == 7.25

    def test_idempotent(self):
        c = sample_cascade()
        once = censor(c, 100.0)
        twice = censor(once, 100.0)
        np.testing.assert_array_equal(once.times, twice.times)
        np.testing.assert_array_equal(once.marks, twice.marks)

    def test_zero_window_keeps_nothing(self):
        assert censor(sample_cascade(), 0.0).n_events == 0

    @pytest.mark.parametrize("T", [-1.0, np.inf, np.nan])
    def test_invalid_censor_time_rejected(self, T):
        with pytest.raises(ValueError):
            censor(sample_cascade(), T)


class TestEmpiricalMarks:
    def test_origin_not_included(self):
        dist = empirical_marks(sample_cascade())
        assert sorted(dist.marks.tolist()) == [0, 3, 10, 999]
        assert 1234 not in dist.marks

    def test_window_restriction(self):
        dist = empirical_marks(sample_cascade(), T=10.0)
        assert sorted(dist.marks.tolist()) == [0, 10, 999]


def write_corpus(root, sizes):
    """Create one csv per entry of sizes: id -> number of events."""
    for cid, n in sizes.items():
        lines = ["0,100"]
        lines += [f"{10.0 * (k + 1)!r},{k}" for k in range(n)]
        (root / f"{cid}.csv").write_text("\n".join(lines) + "\n")


class TestCorpusIndex:
    def test_scan_without_manifest(self, tmp_path):
        write_corpus(tmp_path, {"b": 2, "a": 3, "c": 1})
        idx = build_corpus_index(tmp_path)
        assert idx.ids == ("a", "b", "c")
        assert idx.n_events == (3, 2, 1)
        assert len(idx) == 3

    def test_manifest_wins_over_scan(self, tmp_path):
        write_corpus(tmp_path, {"a": 3, "b": 2})
        (tmp_path / "index.csv").write_text(
            "id,path,n_events\nb,b.csv,2\n")
        idx = build_corpus_index(tmp_path)
        assert idx.ids == ("b",)

    def test_load_entry(self, tmp_path):
        write_corpus(tmp_path, {"a": 3})
        idx = build_corpus_index(tmp_path)
        cf = idx.load(0)
        assert cf.id == "a"
        assert cf.cascade.n_events == 3

    def test_duplicate_id_rejected(self, tmp_path):
        write_corpus(tmp_path, {"a": 2})
        (tmp_path / "index.csv").write_text(
            "id,path,n_events\na,a.csv,2\na,a.csv,2\n")
        with pytest.raises(ValueError, match="duplicate"):
            build_corpus_index(tmp_path)

    def test_small_cascades_filtered(self, tmp_path):
        write_corpus(tmp_path, {"a": 5, "b": 1})
        idx = build_corpus_index(tmp_path, min_final_count=2)
        assert idx.ids == ("a",)

    def test_horizon_filter_counts_window_only(self, tmp_path):
        # events at 10 and 20 s, then one late but inside the default week
        (tmp_path / "x.csv").write_text("0,100\n10.0,1\n20.0,2\n500000.0,3\n")
        idx = build_corpus_index(tmp_path, min_final_count=3, horizon=100.0)
        assert len(idx) == 0
        idx = build_corpus_index(tmp_path, min_final_count=3)
        assert idx.n_events == (3,)

    def test_malformed_manifest_row(self, tmp_path):
        write_corpus(tmp_path, {"a": 2})
        (tmp_path / "index.csv").write_text("id,path,n_events\na,a.csv\n")
        with pytest.raises(ParseError):
            build_corpus_index(tmp_path)

    def test_missing_directory_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="not a directory"):
            build_corpus_index(tmp_path / "nope")

    def test_index_csv_not_treated_as_cascade(self, tmp_path):
        write_corpus(tmp_path, {"a": 2})
        idx = build_corpus_index(tmp_path)
        assert idx.ids == ("a",)
        (tmp_path / "index.csv").write_text("id,path,n_events\na,a.csv,2\n")
        idx2 = build_corpus_index(tmp_path)
        assert idx2.ids == ("a",)
        assert isinstance(idx2, CorpusIndex)
