"""Published reference numbers used as regression fixtures.

Confusion counts are stored as (tp, fn, fp, tn) with the first-listed class
of each target (Least Like, Least Excitement, Disgust) as the positive class,
next to the F1 value printed alongside them.
"""

from dataclasses import dataclass

import numpy as np

from .metrics import ConfusionMatrix, f1

FIRST_CLASS = {"like": "Least Like", "excitement": "Least Excitement", "feelings": "Disgust"}
SECOND_CLASS = {"like": "Most Like", "excitement": "Most Excitement", "feelings": "Pleasant"}


@dataclass(frozen=True)
class F1Fixture:
    name: str
    target: str
    channels: str
    method: str
    counts: tuple  # (tp, fn, fp, tn), first-listed class positive
    printed_f1: float
    tolerance: float = 0.001

    def matrix(self):
        return ConfusionMatrix(*self.counts, positive_class=FIRST_CLASS[self.target])


def _fx(target, channels, method, counts, printed, tol=0.001):
    return F1Fixture(f"{target}/{channels}/{method}", target, channels, method,
                     tuple(counts), printed, tol)


F1_FIXTURES = (
    _fx("like", "all", "DWT", (214, 13, 47, 165), 0.877, 0.0005),
    _fx("like", "all", "STFT", (112, 115, 113, 99), 0.4955),
    _fx("like", "all", "HHT", (213, 14, 57, 155), 0.8571, 0.0005),
    _fx("excitement", "all", "DWT", (150, 39, 76, 120), 0.7228),
    _fx("excitement", "all", "STFT", (117, 72, 110, 86), 0.5625),
    _fx("excitement", "all", "HHT", (155, 34, 68, 128), 0.7524),
    _fx("feelings", "all", "DWT", (198, 28, 40, 182), 0.8425),
    _fx("feelings", "all", "STFT", (115, 111, 141, 81), 0.3913),
    _fx("feelings", "all", "HHT", (206, 20, 73, 149), 0.7621),
    _fx("like", "frontal", "DWT", (236, 22, 91, 165), 0.8068),
    _fx("like", "frontal", "STFT", (188, 70, 183, 73), 0.5977),
    _fx("like", "frontal", "HHT", (233, 25, 91, 165), 0.80),
    _fx("excitement", "frontal", "DWT", (152, 68, 171, 57), 0.7355),
    _fx("excitement", "frontal", "STFT", (152, 68, 171, 57), 0.5598),
    _fx("excitement", "frontal", "HHT", (188, 32, 114, 114), 0.7203),
    _fx("feelings", "frontal", "DWT", (250, 12, 80, 191), 0.8059),
    _fx("feelings", "frontal", "STFT", (211, 51, 204, 67), 0.3444),
    _fx("feelings", "frontal", "HHT", (236, 26, 55, 216), 0.8421),
    _fx("like", "all", "hierarchical", (212, 15, 55, 157), 0.8582),
    _fx("excitement", "all", "hierarchical", (153, 36, 79, 117), 0.7268),
    _fx("feelings", "all", "hierarchical", (212, 15, 55, 157), 0.8582),
    _fx("like", "frontal", "hierarchical", (237, 21, 108, 148), 0.7860),
    _fx("excitement", "frontal", "hierarchical", (192, 28, 130, 98), 0.7084),
    _fx("feelings", "frontal", "hierarchical", (248, 14, 83, 188), 0.7949),
)


@dataclass(frozen=True)
class FixtureResult:
    name: str
    expected: float
    got: float
    tolerance: float
    note: str = ""

    @property
    def passed(self):
        return bool(np.isfinite(self.got) and abs(self.got - self.expected) <= self.tolerance)

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        text = f"{flag} {self.name}: expected {self.expected:.4f} got {self.got:.4f} " \
               f"(tol {self.tolerance:g})"
        return text + (f" [{self.note}]" if self.note else "")


def f1_results():
    out = []
    for fx in F1_FIXTURES:
        cm = fx.matrix()
        got = f1(cm)
        alt = f1(cm.swapped())
        note = ""
        if abs(got - fx.printed_f1) > fx.tolerance:
            if abs(alt - fx.printed_f1) <= fx.tolerance:
                note = f"matches with {SECOND_CLASS[fx.target]} positive ({alt:.4f})"
            else:
                note = f"no class assignment reproduces it ({SECOND_CLASS[fx.target]}: {alt:.4f})"
        out.append(FixtureResult("f1 " + fx.name, fx.printed_f1, got, fx.tolerance, note))
    return out


# --------------------------------------------------------------------------
# TOPSIS worked example

COLUMN_NORMS = (11.6619, 11.401, 5.567)
FIRST_ROW = (2, 2, 1)
NORMALIZED_ROW = (0.1714, 0.1754, 0.1796)
WEIGHTED_ROW = (0.06859, 0.05262, 0.05388)
IDEAL_BEST = (0.06859, 0.05262, 0.05388)
IDEAL_WORST = (0.03429, 0.02631, 0.0)
S_WORST_FIRST = 0.0690
WEIGHTS = (0.4, 0.3, 0.3)


def worked_matrix():
    """A 40 x 3 criterion matrix consistent with the worked example.

    Squared column sums are 136, 130 and 31; row 0 is (2, 2, 1), row 1 is
    (1, 1, 0) and the last row repeats row 0.
    """
    m = np.empty((40, 3))
    m[:, 0] = 2.0
    m[:, 1] = 2.0
    m[:, 2] = 1.0
    m[[1, 2, 3, 4, 5, 6, 7, 8], 0] = 1.0
    m[[1, 9, 10, 11, 12, 13, 14, 15, 16, 17], 1] = 1.0
    m[[1, 18, 19, 20, 21, 22, 23, 24, 25], 2] = 0.0
    return m


def topsis_results():
    from .recommend import topsis

    res = topsis(worked_matrix(), WEIGHTS)
    m = worked_matrix()
    norms = np.sqrt((m * m).sum(axis=0))
    out = []
    for j in range(3):
        out.append(FixtureResult(f"topsis norm[{j}]", COLUMN_NORMS[j], norms[j], 1e-3))
    for j in range(3):
        out.append(FixtureResult(f"topsis normalized[0,{j}]", NORMALIZED_ROW[j],
                                 res.normalized[0, j], 1e-3))
    for j in range(3):
        out.append(FixtureResult(f"topsis weighted[0,{j}]", WEIGHTED_ROW[j],
                                 res.weighted[0, j], 1e-3))
    for j in range(3):
        out.append(FixtureResult(f"topsis V+[{j}]", IDEAL_BEST[j], res.ideal_best[j], 1e-3))
        out.append(FixtureResult(f"topsis V-[{j}]", IDEAL_WORST[j], res.ideal_worst[j], 1e-3))
    out.append(FixtureResult("topsis S+[0]", 0.0, res.s_best[0], 1e-3))
    out.append(FixtureResult("topsis S-[0]", S_WORST_FIRST, res.s_worst[0], 1e-3))
    out.append(FixtureResult("topsis S-[1]", 0.0, res.s_worst[1], 1e-3))
    out.append(FixtureResult("topsis C[0]", 1.0, res.closeness[0], 1e-3))
    return out


# --------------------------------------------------------------------------
# menus

MENU_PERSON_1 = {
    "breakfast": [("Bread and Butter", 189), ("Omelete", 154)],
    "lunch": [("Polao Roast", 450)],
    "dinner": [("Kabab", 691)],
    "snacks": [("Ramen", 192.3)],
}
MENU_PERSON_1_TOTAL = 1676

MENU_PERSON_2 = {
    "breakfast": [("Roti Vegetable", 388), ("Omelete", 154)],
    "lunch": [("Rice with Chicken & Vegetable", 450)],
    "dinner": [("Kacchi Biriyani", 350)],
    "snacks": [("Chicken Shawarma", 192)],
}
MENU_PERSON_2_TOTAL = 1534


def menu_foods(menu):
    """FoodItems for a menu, eligible for every slot they could plausibly fill."""
    from .data_io import load_food_db

    db = {f.name: f for f in load_food_db()}
    return [db[name] for items in menu.values() for name, _ in items]


def menu_results():
    from .planner import DayBudget, plan_from_names, plan_menu, validate_plan

    out = []
    for label, menu, total in (("person 1", MENU_PERSON_1, MENU_PERSON_1_TOTAL),
                               ("person 2", MENU_PERSON_2, MENU_PERSON_2_TOTAL)):
        foods = menu_foods(menu)
        given = plan_from_names(foods, {s: [n for n, _ in v] for s, v in menu.items()})
        out.append(FixtureResult(f"menu {label} given total", total, given.total, 0.5))
        for s, items in menu.items():
            out.append(FixtureResult(f"menu {label} given {s}", sum(k for _, k in items),
                                     given.subtotal(s), 1e-9))
        plan = plan_menu([(f, 1.0) for f in foods], DayBudget())
        problems = validate_plan(plan)
        out.append(FixtureResult(f"menu {label} planned total", total, plan.total, 0.5,
                                 "; ".join(problems)))
        out.append(FixtureResult(f"menu {label} planned violations", 0, len(problems), 0))
    return out


def run_all():
    return f1_results() + topsis_results() + menu_results()
