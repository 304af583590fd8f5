import pytest

from amrp import reference as ref
from amrp.metrics import f1


def _by_name():
    return {fx.name: fx for fx in ref.F1_FIXTURES}


class TestFixtureTables:
    def test_count(self):
        assert len(ref.F1_FIXTURES) == 24
        assert len(_by_name()) == 24

    def test_counts_sum_to_test_size(self):
        # tables of one target and channel set cover the same test rows, except the
        # all-channel hierarchical Feelings table, which repeats the Like counts
        sizes = {}
        for fx in ref.F1_FIXTURES:
            sizes.setdefault((fx.target, fx.channels), set()).add(sum(fx.counts))
        assert {k for k, v in sizes.items() if len(v) > 1} == {("feelings", "all")}
        d = _by_name()
        assert d["feelings/all/hierarchical"].counts == d["like/all/hierarchical"].counts

    @pytest.mark.parametrize("name", [fx.name for fx in ref.F1_FIXTURES
                                      if fx.target != "feelings"
                                      and fx.name != "excitement/frontal/DWT"])
    def test_first_class_positive(self, name):
        fx = _by_name()[name]
        assert f1(fx.matrix()) == pytest.approx(fx.printed_f1, abs=fx.tolerance)

    @pytest.mark.parametrize("name", ["feelings/all/DWT", "feelings/all/STFT", "feelings/all/HHT",
                                      "feelings/frontal/DWT", "feelings/frontal/STFT",
                                      "feelings/frontal/HHT", "feelings/frontal/hierarchical"])
    def test_feelings_tables_match_second_class(self, name):
        fx = _by_name()[name]
        assert f1(fx.matrix()) != pytest.approx(fx.printed_f1, abs=fx.tolerance)
        assert f1(fx.matrix().swapped()) == pytest.approx(fx.printed_f1, abs=fx.tolerance)

    def test_duplicated_table(self):
        d = _by_name()
        dwt, stft = d["excitement/frontal/DWT"], d["excitement/frontal/STFT"]
        assert dwt.counts == stft.counts
        for cm in (dwt.matrix(), dwt.matrix().swapped()):
            assert abs(f1(cm) - dwt.printed_f1) > 0.1


class TestReports:
    def test_result_lines(self):
        lines = [r.line() for r in ref.f1_results()]
        assert lines[0].startswith("PASS f1 like/all/DWT: expected 0.8770 got 0.8770")
        notes = [r.note for r in ref.f1_results() if not r.passed]
        assert sum("Pleasant positive" in n for n in notes) == 7
        assert sum("no class assignment" in n for n in notes) == 1

    def test_topsis_and_menus_pass(self):
        assert all(r.passed for r in ref.topsis_results())
        failed = [r.name for r in ref.menu_results() if not r.passed]
        assert failed == []

    def test_run_all(self):
        results = ref.run_all()
        assert sum(not r.passed for r in results) == 8
