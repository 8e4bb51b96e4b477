"""Tests for NFKC matching with offset mapping."""

from kpqa.textnorm import NormalizedView, fold_answer, nfkc_chars


class TestNfkc:
    def test_full_width_folds(self):
        assert nfkc_chars("２年；") == "2年;"

    def test_fold_answer_strips_whitespace(self):
        assert fold_answer(" ２ 年\n") == "2年"


class TestNormalizedView:
    def test_find_identity(self):
        view = NormalizedView("甲乙丙丁")
        assert view.find("乙丙") == (1, 3)

    def test_find_across_width_variants(self):
        view = NormalizedView("期限为２年整")
        span = view.find("2年")
        assert span == (3, 5)
        assert view.original[span[0]:span[1]] == "２年"

    def test_find_with_expanding_characters(self):
        # ㎞ normalizes to two characters; offsets still map to the original
        view = NormalizedView("全长３㎞左右")
        span = view.find("3km")
        assert span is not None
        start, end = span
        assert view.original[start:end] == "３㎞"

    def test_absent(self):
        assert NormalizedView("甲乙").find("丙") is None

    def test_empty_needle(self):
        assert NormalizedView("甲乙").find("") is None

    def test_count_non_overlapping(self):
        assert NormalizedView("2年之后再过2年").count("2年") == 2
        assert NormalizedView("").count("x") == 0
