import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amrp import reference as ref
from amrp.data_io import SLOTS, FoodItem
from amrp.errors import InfeasiblePlanError, ItemExceedsCapacityError
from amrp.planner import (
    DayBudget,
    MealBudget,
    MealPlan,
    PackingInstance,
    first_fit_decreasing,
    pack_min_bins,
    plan_from_names,
    plan_menu,
    validate_plan,
)


def _brute_bins(w, c=1.0):
    """Fewest bins over every set partition of the items."""
    n = len(w)
    if n == 0:
        return 0
    best = n

    def rec(k, loads):
        nonlocal best
        if len(loads) >= best:
            return
        if k == n:
            best = len(loads)
            return
        for b in range(len(loads)):
            if loads[b] + w[k] <= c + 1e-9:
                loads[b] += w[k]
                rec(k + 1, loads)
                loads[b] -= w[k]
        loads.append(w[k])
        rec(k + 1, loads)
        loads.pop()

    rec(0, [])
    return best


def _random_instance(r):
    n = int(r.integers(1, 11))
    return tuple(np.round(r.uniform(0.05, 1.0, n), 3))


def _random_foods(r, n=10):
    foods = []
    for i in range(n):
        k = int(r.integers(1, 5))
        slots = tuple(r.choice(SLOTS, size=k, replace=False))
        foods.append((FoodItem(f"f{i:02d}", f"food {i}", float(r.integers(100, 701)), slots),
                      float(r.random())))
    return foods


def _half_assignments(foods):
    """Every eligible (skip | slot) assignment of ``foods``: slot loads and score."""
    rows = []
    for a in itertools.product(range(5), repeat=len(foods)):
        loads, score = [0.0] * 4, 0.0
        for (f, sc), k in zip(foods, a):
            if k:
                if SLOTS[k - 1] not in f.allowed_slots:
                    break
                loads[k - 1] += f.calories
                score += sc
        else:
            rows.append(loads + [score])
    return np.array(rows)


def _exhaustive_best(foods, budget=DayBudget()):
    """Best objective over all (skip | slot) assignments, or None if none is valid.

    The two halves of the food list are enumerated separately and every pair
    of half-assignments is checked, which covers all 5^n assignments.
    """
    h = len(foods) // 2
    A, B = _half_assignments(foods[:h]), _half_assignments(foods[h:])
    lo = np.array([m.min_kcal for m in budget.meals])
    hi = np.array([m.max_kcal for m in budget.meals])
    loads = A[:, None, :4] + B[None, :, :4]
    total = loads.sum(axis=2)
    ok = np.all((loads >= lo - 1e-9) & (loads <= hi + 1e-9), axis=2)
    ok &= (total >= budget.total_min_kcal - 1e-9) & (total <= budget.total_max_kcal + 1e-9)
    if not ok.any():
        return None
    return float((A[:, None, 4] + B[None, :, 4])[ok].max())


def _food(i, kcal, slots=SLOTS):
    return FoodItem(f"id{i}", f"food{i}", kcal, tuple(slots))


class TestPacking:
    def test_pairs(self):
        assert pack_min_bins((0.5, 0.5, 0.5, 0.5)).z == 2

    def test_three_fours(self):
        p = pack_min_bins((0.4, 0.4, 0.4))
        assert p.z == 2 == _brute_bins([0.4, 0.4, 0.4])

    def test_empty(self):
        assert pack_min_bins(()).z == 0

    def test_oversize(self):
        with pytest.raises(ItemExceedsCapacityError):
            PackingInstance((0.5, 1.2))
        with pytest.raises(ItemExceedsCapacityError):
            PackingInstance((0.0,))

    def test_assignment_consistent(self):
        w = (0.6, 0.3, 0.5, 0.2, 0.4)
        p = pack_min_bins(w)
        assert sorted(j for b in p.bins for j in b) == list(range(len(w)))
        assert all(sum(w[j] for j in b) <= 1 + 1e-9 for b in p.bins)
        assert all(j in p.bins[p.assignment[j]] for j in range(len(w)))
        assert p.exact

    def test_heuristic_beyond_limit(self):
        p = pack_min_bins(tuple([0.3] * 13))
        assert not p.exact and p.z == 5

    def test_exact_matches_brute_force(self):
        r = np.random.default_rng(0)
        for _ in range(100):
            w = _random_instance(r)
            assert pack_min_bins(w).z == _brute_bins(list(w)), w

    def test_ffd_bound(self):
        r = np.random.default_rng(1)
        for _ in range(100):
            w = _random_instance(r)
            opt = pack_min_bins(w).z
            assert len(first_fit_decreasing(list(w))) <= 11 / 9 * opt + 1

    def test_ffd_suboptimal_instance(self):
        # FFD opens a fourth bin; {0.59, 0.4}, {0.57, 0.21, 0.2}, {0.38, 0.33, 0.29} uses three
        w = (0.57, 0.21, 0.29, 0.33, 0.4, 0.38, 0.59, 0.2)
        assert len(first_fit_decreasing(list(w))) == 4
        assert pack_min_bins(w).z == _brute_bins(list(w)) == 3


class TestBudget:
    def test_defaults(self):
        b = DayBudget()
        assert (b.window("lunch").min_kcal, b.window("lunch").max_kcal) == (500, 700)
        assert (b.total_min_kcal, b.total_max_kcal) == (1500, 2000)

    def test_invalid(self):
        with pytest.raises(ValueError):
            MealBudget("brunch", 0, 1)
        with pytest.raises(ValueError):
            MealBudget("lunch", 600, 500)
        with pytest.raises(ValueError):
            DayBudget(total_min_kcal=2100, total_max_kcal=2000)

    def test_round_trip(self):
        b = DayBudget()
        assert DayBudget.from_dict(b.to_dict()) == b


class TestValidate:
    def test_given_menu_totals(self):
        foods = ref.menu_foods(ref.MENU_PERSON_1)
        plan = plan_from_names(foods, {s: [n for n, _ in v] for s, v in ref.MENU_PERSON_1.items()})
        assert plan.subtotal("breakfast") == 343
        assert plan.subtotal("lunch") == 450
        assert plan.subtotal("dinner") == 691
        assert plan.subtotal("snacks") == pytest.approx(192.3)
        assert plan.total == pytest.approx(1676.3)
        # the printed lunch is 50 kcal short of the 500-700 lunch window
        assert validate_plan(plan) == ["lunch < 500"]

    def test_second_menu_outside_windows(self):
        foods = ref.menu_foods(ref.MENU_PERSON_2)
        plan = plan_from_names(foods, {s: [n for n, _ in v] for s, v in ref.MENU_PERSON_2.items()})
        assert plan.total == ref.MENU_PERSON_2_TOTAL
        assert validate_plan(plan) == ["breakfast > 400", "lunch < 500", "dinner < 500"]

    def test_lunch_over(self):
        plan = MealPlan({"breakfast": ((_food(0, 350), 350),), "lunch": ((_food(1, 801), 801),),
                         "dinner": ((_food(2, 600), 600),), "snacks": ()})
        assert validate_plan(plan) == ["lunch > 700"]

    def test_duplicate_and_slot(self):
        f = _food(0, 350, ("breakfast",))
        plan = MealPlan({"breakfast": ((f, 350),), "lunch": ((f, 350),),
                         "dinner": (), "snacks": ()})
        report = validate_plan(plan)
        assert "duplicate food id0" in report
        assert "id0 not allowed in lunch" in report

    def test_valid_is_empty(self):
        plan = MealPlan({"breakfast": ((_food(0, 350), 350),), "lunch": ((_food(1, 600), 600),),
                         "dinner": ((_food(2, 600), 600),), "snacks": ((_food(3, 100), 100),)})
        assert validate_plan(plan) == []


class TestPlanMenu:
    @pytest.mark.parametrize("menu,total", [(ref.MENU_PERSON_1, 1676.3),
                                            (ref.MENU_PERSON_2, 1534)])
    def test_printed_foods_feasible(self, menu, total):
        plan = plan_menu([(f, 1.0) for f in ref.menu_foods(menu)])
        assert validate_plan(plan) == []
        assert plan.total == pytest.approx(total)

    def test_empty(self):
        with pytest.raises(InfeasiblePlanError):
            plan_menu([])

    def test_infeasible_diagnosis(self):
        with pytest.raises(InfeasiblePlanError) as exc:
            plan_menu([(_food(0, 100), 1.0)])
        assert exc.value.diagnosis["day"]["shortfall"] == 1400

    def test_against_exhaustive(self):
        r = np.random.default_rng(8)
        both = 0
        for _ in range(30):
            foods = _random_foods(r)
            opt = _exhaustive_best(foods)
            try:
                plan = plan_menu(foods)
            except InfeasiblePlanError:
                assert opt is None
                continue
            assert opt is not None
            assert validate_plan(plan) == []
            assert plan.objective >= 0.8 * opt - 1e-9
            both += 1
        assert both >= 3

    def test_deterministic_and_order_free(self):
        foods = _random_foods(np.random.default_rng(2), 14)
        a = plan_menu(foods)
        b = plan_menu(list(reversed(foods)))
        assert a.to_dict() == b.to_dict()

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            plan_menu([(_food(0, 300), 1.0), (_food(0, 400), 0.5)])

    def test_table_layout(self):
        plan = plan_menu([(f, 1.0) for f in ref.menu_foods(ref.MENU_PERSON_1)])
        text = plan.table()
        assert [c.strip() for c in text.splitlines()[0].split("|")] == ["Meal", "Food", "Calories"]
        assert text.splitlines()[-1].startswith("Total")
        assert "1676.3" in text

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(6, 16))
    def test_output_always_valid(self, seed, n):
        foods = _random_foods(np.random.default_rng(seed), n)
        try:
            plan = plan_menu(foods)
        except InfeasiblePlanError:
            return
        assert validate_plan(plan) == []
        assert len({f.id for f in plan.foods()}) == len(plan.foods())
