"""Costed code alphabets, the cost capacity, and the induced symbol measure.

A cost model assigns each of the K code symbols a positive cost.  Its cost
capacity is the unique positive root alpha of

    sum_u K**(-alpha * cost(u)) == 1,

which converts between cost units and base-K information units.  The root is
found by bisection: the left-hand side is strictly decreasing in alpha, so a
bracket that straddles 1 converges unconditionally and deterministically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

RESIDUAL_TOL = 1e-13
BRACKET_TOL = 1e-14
CONDITIONAL_AGREE_TOL = 1e-9
CONTEXT_DEPTH_CAP = 8


class CostModelError(ValueError):
    """Invalid cost model definition or solver precondition."""


class ConditionalCapacityError(CostModelError):
    """Conditional cost table whose per-context capacities disagree."""

    def __init__(self, message: str, row_capacities: dict[str, float]):
        super().__init__(message)
        self.row_capacities = row_capacities


def _check_costs(costs, label: str, k: int) -> tuple[float, ...]:
    costs = tuple(float(c) for c in costs)
    if len(costs) != k:
        raise CostModelError(f"{label} must list exactly {k} costs, got {len(costs)}")
    for c in costs:
        if not (c > 0.0) or not math.isfinite(c):
            raise CostModelError(f"{label} contains a non-positive or non-finite cost: {c}")
    return costs


@dataclass(frozen=True)
class CostModel:
    """Code alphabet of size K with per-symbol costs.

    ``conditional`` optionally maps context strings (digit sequences over
    0..K-1, at most ``max_context_depth`` long) to K conditional costs.  The
    base ``costs`` row doubles as the empty-context fallback; lookups use the
    longest table suffix of the preceding symbols.
    """

    K: int
    costs: tuple[float, ...]
    conditional: dict[str, tuple[float, ...]] | None = None
    max_context_depth: int = 1

    def __post_init__(self):
        if not isinstance(self.K, int) or self.K < 2:
            raise CostModelError(f"alphabet size K must be an integer >= 2, got {self.K}")
        object.__setattr__(self, "costs", _check_costs(self.costs, "costs", self.K))
        if self.max_context_depth < 0 or self.max_context_depth > CONTEXT_DEPTH_CAP:
            raise CostModelError(
                f"max_context_depth must be in 0..{CONTEXT_DEPTH_CAP}, got {self.max_context_depth}"
            )
        if self.conditional is not None:
            table = {}
            for ctx, row in self.conditional.items():
                if len(ctx) > self.max_context_depth:
                    raise CostModelError(
                        f"context {ctx!r} exceeds max depth {self.max_context_depth}"
                    )
                if any(ch not in "0123456789" or int(ch) >= self.K for ch in ctx):
                    raise CostModelError(f"context {ctx!r} is not a digit string over 0..{self.K - 1}")
                table[ctx] = _check_costs(row, f"conditional[{ctx!r}]", self.K)
            object.__setattr__(self, "conditional", table)

    @property
    def c_max(self) -> float:
        m = max(self.costs)
        if self.conditional:
            m = max(m, max(max(row) for row in self.conditional.values()))
        return m

    @property
    def c_min(self) -> float:
        m = min(self.costs)
        if self.conditional:
            m = min(m, min(min(row) for row in self.conditional.values()))
        return m

    def row_for_context(self, context: tuple[int, ...]) -> tuple[float, ...]:
        """Cost row for the longest matching context suffix (base row if none)."""
        if self.conditional:
            depth = min(len(context), self.max_context_depth)
            for take in range(depth, 0, -1):
                key = "".join(str(u) for u in context[-take:])
                if key in self.conditional:
                    return self.conditional[key]
            if "" in self.conditional:
                return self.conditional[""]
        return self.costs

    def cost_of(self, symbols) -> float:
        """Additive cost of a code string, context-aware when a table is present."""
        symbols = tuple(symbols)
        if any(not 0 <= u < self.K for u in symbols):
            bad = next(u for u in symbols if not 0 <= u < self.K)
            raise CostModelError(f"code symbol {bad} outside 0..{self.K - 1}")
        if self.conditional is None:
            return math.fsum(self.costs[u] for u in symbols)
        return math.fsum(
            self.row_for_context(symbols[:i])[u] for i, u in enumerate(symbols)
        )


@dataclass(frozen=True)
class CostCapacity:
    """Positive root of the capacity equation with solver diagnostics."""

    alpha_c: float
    residual: float
    bracket: tuple[float, float]


def _capacity_gap(k: int, costs: tuple[float, ...], alpha: float) -> float:
    return math.fsum(k ** (-alpha * c) for c in costs) - 1.0


def _solve_root(k: int, costs: tuple[float, ...]) -> CostCapacity:
    lo, hi = 1e-9, 1.0
    for _ in range(200):
        gap = _capacity_gap(k, costs, lo)
        if gap == 0.0:
            return CostCapacity(alpha_c=lo, residual=0.0, bracket=(lo, lo))
        if gap > 0.0:
            break
        lo *= 0.5
    else:
        raise CostModelError("failed to bracket the cost capacity from below")
    for _ in range(200):
        gap = _capacity_gap(k, costs, hi)
        if gap == 0.0:
            return CostCapacity(alpha_c=hi, residual=0.0, bracket=(hi, hi))
        if gap < 0.0:
            break
        hi *= 2.0
    else:
        raise CostModelError("failed to bracket the cost capacity from above")

    mid = 0.5 * (lo + hi)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:  # float spacing exhausted
            break
        gap = _capacity_gap(k, costs, mid)
        if abs(gap) <= RESIDUAL_TOL or (hi - lo) <= BRACKET_TOL:
            break
        if gap > 0.0:
            lo = mid
        else:
            hi = mid
    return CostCapacity(alpha_c=mid, residual=_capacity_gap(k, costs, mid), bracket=(lo, hi))


def solve_cost_capacity(model: CostModel) -> CostCapacity:
    """Solve the memoryless capacity equation by bisection.

    The returned residual satisfies |residual| <= 1e-12; the bracket is the
    final bisection interval.
    """
    return _solve_root(model.K, model.costs)


def symbol_measure(model: CostModel, cap: CostCapacity) -> list[float]:
    """Per-symbol measure q(u) = K**(-alpha_c * cost(u)); sums to 1 within 1e-10."""
    q = [model.K ** (-cap.alpha_c * c) for c in model.costs]
    total = math.fsum(q)
    if abs(total - 1.0) > 1e-10:
        raise CostModelError(f"symbol measure sums to {total!r}, expected 1 within 1e-10")
    return q


def validate_conditional_model(model: CostModel) -> CostCapacity:
    """Check that every context row has the same capacity and return it.

    The base cost row participates as the empty-context fallback.  Rows must
    agree within 1e-9, otherwise the offending contexts and their capacities
    are reported.
    """
    if model.conditional is None:
        raise CostModelError("model has no conditional cost table")
    rows: dict[str, tuple[float, ...]] = {"": model.costs}
    rows.update(model.conditional)
    caps = {ctx: _solve_root(model.K, row).alpha_c for ctx, row in rows.items()}
    base = solve_cost_capacity(CostModel(model.K, model.costs))
    ref = base.alpha_c
    bad = {ctx: a for ctx, a in caps.items() if abs(a - ref) > CONDITIONAL_AGREE_TOL}
    if bad:
        listing = ", ".join(f"{ctx!r}: {a:.12g}" for ctx, a in sorted(bad.items()))
        raise ConditionalCapacityError(
            f"non-constant conditional capacity (reference {ref:.12g}; offending rows: {listing})",
            caps,
        )
    return base


def cost_model_from_dict(doc: dict) -> CostModel:
    """Build a cost model from the JSON document shape.

    Expected keys: ``K`` (int), ``costs`` (list of K positive reals), optional
    ``conditional`` (context string -> list of K costs) and ``context_depth``.
    """
    if not isinstance(doc, dict):
        raise CostModelError("cost model document must be a JSON object")
    try:
        k = doc["K"]
        costs = doc["costs"]
    except KeyError as exc:
        raise CostModelError(f"cost model document missing key {exc}") from exc
    conditional = doc.get("conditional")
    if conditional is not None:
        conditional = {str(ctx): tuple(row) for ctx, row in conditional.items()}
        derived_depth = max((len(ctx) for ctx in conditional), default=0)
    else:
        derived_depth = 0
    depth = int(doc.get("context_depth", max(1, derived_depth)))
    return CostModel(K=int(k), costs=tuple(costs), conditional=conditional, max_context_depth=depth)


def load_cost_model(path) -> CostModel:
    with open(path) as fh:
        return cost_model_from_dict(json.load(fh))
