"""Calorie-budgeted day menus and classic minimum-bin packing."""

import math
from dataclasses import dataclass, field

import numpy as np

from .data_io import SLOTS, FoodItem
from .errors import InfeasiblePlanError, ItemExceedsCapacityError

EPS = 1e-9


# --------------------------------------------------------------------------
# minimum-bin packing

@dataclass(frozen=True)
class PackingInstance:
    weights: tuple
    capacity: float = 1.0

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not self.capacity > 0:
            raise ValueError("capacity must be positive")
        for j, x in enumerate(w):
            if not 0 < x <= self.capacity + EPS:
                raise ItemExceedsCapacityError(
                    f"item {j} weight {x} outside (0, {self.capacity}]")


@dataclass(frozen=True)
class Packing:
    assignment: tuple  # bin index per item
    bins: tuple  # item indices per bin
    exact: bool

    @property
    def z(self):
        return len(self.bins)

    def used(self):
        """y_i indicator per bin."""
        return [1] * len(self.bins)


def first_fit_decreasing(weights, capacity=1.0):
    order = sorted(range(len(weights)), key=lambda j: (-weights[j], j))
    loads, bins = [], []
    for j in order:
        for b, load in enumerate(loads):
            if load + weights[j] <= capacity + EPS:
                loads[b] += weights[j]
                bins[b].append(j)
                break
        else:
            loads.append(weights[j])
            bins.append([j])
    return bins


def _exact_bins(weights, capacity):
    n = len(weights)
    order = sorted(range(n), key=lambda j: (-weights[j], j))
    w = [weights[j] for j in order]
    best = [sorted(b) for b in first_fit_decreasing(weights, capacity)]
    lower = max(1, math.ceil(sum(w) / capacity - EPS)) if n else 0
    if len(best) <= lower:
        return best
    best_z = [len(best)]
    loads, members = [], []

    def dfs(k):
        if len(loads) >= best_z[0]:
            return
        if k == n:
            best_z[0] = len(loads)
            best[:] = [sorted(order[i] for i in m) for m in members]
            return
        remaining = sum(w[k:])
        free = sum(capacity - ld for ld in loads)
        if len(loads) + math.ceil(max(remaining - free, 0.0) / capacity - EPS) >= best_z[0]:
            return
        seen = set()
        for b in range(len(loads)):
            key = round(loads[b], 9)
            if key in seen or loads[b] + w[k] > capacity + EPS:
                continue
            seen.add(key)
            loads[b] += w[k]
            members[b].append(k)
            dfs(k + 1)
            members[b].pop()
            loads[b] -= w[k]
            if best_z[0] <= lower:
                return
        loads.append(w[k])
        members.append([k])
        dfs(k + 1)
        members.pop()
        loads.pop()

    dfs(0)
    return best


def pack_min_bins(instance, exact_limit=12):
    """Assign every item to a unit-capacity bin using as few bins as possible.

    Exact branch and bound for up to ``exact_limit`` items, first-fit
    decreasing beyond that.
    """
    if not isinstance(instance, PackingInstance):
        instance = PackingInstance(tuple(instance))
    w, c = instance.weights, instance.capacity
    exact = len(w) <= exact_limit
    bins = _exact_bins(w, c) if exact else first_fit_decreasing(w, c)
    bins = sorted((sorted(b) for b in bins), key=lambda b: b[0]) if bins else []
    assignment = [0] * len(w)
    for b, items in enumerate(bins):
        for j in items:
            assignment[j] = b
    return Packing(tuple(assignment), tuple(tuple(b) for b in bins), exact)


# --------------------------------------------------------------------------
# day menus

@dataclass(frozen=True)
class MealBudget:
    slot: str
    min_kcal: float
    max_kcal: float

    def __post_init__(self):
        if self.slot not in SLOTS:
            raise ValueError(f"unknown slot {self.slot!r}")
        if not 0 <= self.min_kcal <= self.max_kcal:
            raise ValueError(f"{self.slot}: need 0 <= min <= max")


DEFAULT_MEALS = (
    MealBudget("breakfast", 300, 400),
    MealBudget("lunch", 500, 700),
    MealBudget("dinner", 500, 700),
    MealBudget("snacks", 0, 200),
)


@dataclass(frozen=True)
class DayBudget:
    meals: tuple = DEFAULT_MEALS
    total_min_kcal: float = 1500
    total_max_kcal: float = 2000

    def __post_init__(self):
        meals = tuple(self.meals.values()) if isinstance(self.meals, dict) else tuple(self.meals)
        if sorted(m.slot for m in meals) != sorted(SLOTS):
            raise ValueError("day budget needs exactly one window per slot")
        meals = tuple(sorted(meals, key=lambda m: SLOTS.index(m.slot)))
        object.__setattr__(self, "meals", meals)
        if not 0 <= self.total_min_kcal <= self.total_max_kcal:
            raise ValueError("need 0 <= total_min <= total_max")
        if sum(m.min_kcal for m in meals) > self.total_max_kcal:
            raise ValueError("slot minimums exceed the day maximum")

    def window(self, slot):
        return self.meals[SLOTS.index(slot)]

    @classmethod
    def from_dict(cls, d):
        meals = tuple(MealBudget(s, *d["meals"][s]) for s in SLOTS)
        return cls(meals, d.get("total_min", 1500), d.get("total_max", 2000))

    def to_dict(self):
        return {"meals": {m.slot: [m.min_kcal, m.max_kcal] for m in self.meals},
                "total_min": self.total_min_kcal, "total_max": self.total_max_kcal}


@dataclass(frozen=True)
class MealPlan:
    slots: dict  # slot -> tuple of (FoodItem, kcal)
    scores: dict = field(default_factory=dict)  # food id -> preference score

    def subtotal(self, slot):
        return sum(k for _, k in self.slots.get(slot, ()))

    @property
    def total(self):
        return sum(self.subtotal(s) for s in SLOTS)

    @property
    def objective(self):
        return sum(self.scores.get(f.id, 0.0) for s in SLOTS for f, _ in self.slots.get(s, ()))

    def foods(self):
        return [f for s in SLOTS for f, _ in self.slots.get(s, ())]

    def to_dict(self):
        return {
            "slots": {s: [{"food": f.name, "id": f.id, "kcal": k}
                          for f, k in self.slots.get(s, ())] for s in SLOTS},
            "subtotals": {s: self.subtotal(s) for s in SLOTS},
            "total": self.total,
            "objective": self.objective,
        }

    def table(self):
        rows = [("Meal", "Food", "Calories")]
        for s in SLOTS:
            items = self.slots.get(s, ())
            if not items:
                rows.append((s.capitalize(), "-", "0"))
            for i, (f, k) in enumerate(items):
                rows.append((s.capitalize() if i == 0 else "", f.name, f"{k:g}"))
        rows.append(("Total", "", f"{self.total:g}"))
        widths = [max(len(r[c]) for r in rows) for c in range(3)]
        lines = [" | ".join(r[c].ljust(widths[c]) for c in range(3)).rstrip() for r in rows]
        lines.insert(1, "-+-".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def _fmt(x):
    return f"{x:g}"


def validate_plan(plan, budget=DayBudget()):
    """Every violated constraint as a short message; empty iff the plan is valid."""
    problems = []
    for mb in budget.meals:
        sub = plan.subtotal(mb.slot)
        if sub < mb.min_kcal - EPS:
            problems.append(f"{mb.slot} < {_fmt(mb.min_kcal)}")
        if sub > mb.max_kcal + EPS:
            problems.append(f"{mb.slot} > {_fmt(mb.max_kcal)}")
    total = plan.total
    if total < budget.total_min_kcal - EPS:
        problems.append(f"day < {_fmt(budget.total_min_kcal)}")
    if total > budget.total_max_kcal + EPS:
        problems.append(f"day > {_fmt(budget.total_max_kcal)}")
    seen = set()
    for s in SLOTS:
        for f, _ in plan.slots.get(s, ()):
            if f.id in seen:
                problems.append(f"duplicate food {f.id}")
            seen.add(f.id)
            if s not in f.allowed_slots:
                problems.append(f"{f.id} not allowed in {s}")
    for s in plan.slots:
        if s not in SLOTS:
            problems.append(f"unknown slot {s}")
    return problems


def _diagnosis(loads, budget):
    diag = {}
    for i, mb in enumerate(budget.meals):
        diag[mb.slot] = {"kcal": loads[i], "shortfall": max(mb.min_kcal - loads[i], 0.0),
                         "overflow": max(loads[i] - mb.max_kcal, 0.0)}
    total = sum(loads)
    diag["day"] = {"kcal": total, "shortfall": max(budget.total_min_kcal - total, 0.0),
                   "overflow": max(total - budget.total_max_kcal, 0.0)}
    return diag


class _State:
    def __init__(self, foods, budget):
        self.foods = foods
        self.budget = budget
        self.lo = np.array([m.min_kcal for m in budget.meals], dtype=float)
        self.hi = np.array([m.max_kcal for m in budget.meals], dtype=float)

    def feasible(self, loads):
        total = sum(loads)
        return (all(loads[i] >= self.lo[i] - EPS for i in range(4))
                and self.budget.total_min_kcal - EPS <= total <= self.budget.total_max_kcal + EPS)


def _greedy(items, st):
    """Score-descending placement followed by a lowest-score repair pass."""
    b = st.budget
    loads = [0.0] * 4
    where = [-1] * len(items)

    def fits(i, s):
        f = items[i][0]
        return (SLOTS[s] in f.allowed_slots and loads[s] + f.calories <= st.hi[s] + EPS
                and sum(loads) + f.calories <= b.total_max_kcal + EPS)

    for i in range(len(items)):
        options = [s for s in range(4) if fits(i, s)]
        if options:
            s = max(options, key=lambda s: (st.hi[s] - loads[s], -s))
            where[i] = s
            loads[s] += items[i][0].calories

    fillers = sorted(range(len(items)), key=lambda i: (items[i][1], items[i][0].id))
    for s in range(4):
        for i in fillers:
            if loads[s] >= st.lo[s] - EPS:
                break
            if where[i] < 0 and fits(i, s):
                where[i] = s
                loads[s] += items[i][0].calories
    for i in fillers:
        if sum(loads) >= b.total_min_kcal - EPS:
            break
        if where[i] < 0:
            options = [s for s in range(4) if fits(i, s)]
            if options:
                s = max(options, key=lambda s: (st.hi[s] - loads[s], -s))
                where[i] = s
                loads[s] += items[i][0].calories
    return where, loads


def _branch_and_bound(items, st, incumbent, node_limit):
    """Depth-first search over (skip | slot) per food with admissible bounds."""
    n = len(items)
    kcal = np.array([f.calories for f, _ in items])
    score = np.array([s for _, s in items])
    elig = np.array([[SLOTS[s] in f.allowed_slots for s in range(4)] for f, _ in items])
    # suffix sums of eligible calories per slot for deficit pruning
    suffix = np.zeros((n + 1, 4))
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + kcal[i] * elig[i]
    suffix_all = np.r_[np.cumsum(kcal[::-1])[::-1], 0.0]
    density = np.argsort(-(score / kcal), kind="stable")
    best_obj, best_where = incumbent
    where = [-1] * n
    loads = [0.0] * 4
    nodes = [0]
    budget = st.budget

    def bound(k, obj):
        room = budget.total_max_kcal - sum(loads)
        extra = 0.0
        for i in density:
            if i < k:
                continue
            if kcal[i] <= room:
                room -= kcal[i]
                extra += score[i]
            else:
                extra += score[i] * room / kcal[i]
                break
        return obj + extra

    def dfs(k, obj):
        nonlocal best_obj, best_where
        nodes[0] += 1
        if nodes[0] > node_limit:
            return
        if k == n:
            if st.feasible(loads) and obj > best_obj + 1e-12:
                best_obj, best_where = obj, list(where)
            return
        for s in range(4):
            if loads[s] + suffix[k, s] < st.lo[s] - EPS:
                return
        if sum(loads) + suffix_all[k] < budget.total_min_kcal - EPS:
            return
        if bound(k, obj) <= best_obj + 1e-12:
            return
        f = items[k][0]
        total = sum(loads)
        for s in sorted(range(4), key=lambda s: (-(st.hi[s] - loads[s]), s)):
            if (elig[k, s] and loads[s] + kcal[k] <= st.hi[s] + EPS
                    and total + kcal[k] <= budget.total_max_kcal + EPS):
                where[k] = s
                loads[s] += f.calories
                dfs(k + 1, obj + score[k])
                loads[s] -= f.calories
                where[k] = -1
        dfs(k + 1, obj)

    dfs(0, 0.0)
    return best_obj, best_where, nodes[0] <= node_limit


def plan_menu(foods_with_scores, budget=DayBudget(), node_limit=200_000):
    """Pick foods for the four meal slots maximizing total preference score.

    A greedy pass places foods in descending score order into the eligible
    slot with the most remaining room, a repair pass tops up slots and the
    day total with the lowest-scored foods, and a bounded branch and bound
    search then improves on (or rescues) the greedy result.
    """
    items = sorted(((f, float(s)) for f, s in foods_with_scores),
                   key=lambda t: (-t[1], t[0].id))
    ids = [f.id for f, _ in items]
    if len(set(ids)) != len(ids):
        raise ValueError("food ids must be unique")
    st = _State(items, budget)
    if not items:
        raise InfeasiblePlanError("no foods to plan with", _diagnosis([0.0] * 4, budget))

    where, loads = _greedy(items, st)
    incumbent = (sum(items[i][1] for i in range(len(items)) if where[i] >= 0), where) \
        if st.feasible(loads) else (-math.inf, None)
    best_obj, best_where, _ = _branch_and_bound(items, st, incumbent, node_limit)
    if best_where is None:
        raise InfeasiblePlanError("no menu satisfies the calorie windows",
                                  _diagnosis(loads, budget))
    slots = {s: [] for s in SLOTS}
    for i, s in enumerate(best_where):
        if s >= 0:
            slots[SLOTS[s]].append((items[i][0], items[i][0].calories))
    plan = MealPlan({s: tuple(v) for s, v in slots.items()},
                    {f.id: sc for f, sc in items})
    return plan


def plan_from_names(foods, assignment):
    """Build a plan from ``{slot: [food name or id, ...]}`` (for checking given menus)."""
    by_key = {}
    for f in foods:
        by_key[f.id] = f
        by_key[f.name] = f
    slots = {s: tuple((by_key[k], by_key[k].calories) for k in assignment.get(s, ()))
             for s in SLOTS}
    return MealPlan(slots)


__all__ = [
    "PackingInstance", "Packing", "pack_min_bins", "first_fit_decreasing",
    "MealBudget", "DayBudget", "MealPlan", "plan_menu", "validate_plan", "plan_from_names",
    "FoodItem",
]
