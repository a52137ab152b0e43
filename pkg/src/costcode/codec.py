"""Cost-aware prefix codes over an exhaustive sequence distribution.

The builder assigns each sequence its cumulative-probability interval
[F(x), F(x)+P(x)) and walks the code tree whose node intervals split in
proportion to the symbol measure q(u).  It follows the interval midpoint and
stops at the first node whose certified width upper bound is <= P(x)/2: the
chosen node then lies strictly inside the source interval, which makes the
table prefix-free, and the per-codeword cost is certified against

    cost(word) <= (-log_K P(x) + log_K 2) / alpha_c + 2 * c_max.

All descent arithmetic is outward-rounded fixed point (default 192 fractional
bits, env COSTCODE_PREC_BITS); containment and the cost bound are re-checked
exactly before a codeword is emitted, and the build retries at doubled
precision rather than ever emitting an unverified codeword.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._certified import split_enclosures
from .cost_model import CostCapacity, CostModel, solve_cost_capacity
from .sources import CHUNK, SequenceDist, sample_self_info

DEFAULT_PREC_BITS = int(os.environ.get("COSTCODE_PREC_BITS", "192"))
MAX_PREC_BITS = 1 << 14


class CodecError(ValueError):
    """Invalid codec input (unknown sequence, bad query, non-memoryless model)."""


class PrecisionExhausted(RuntimeError):
    """Certified construction failed even at the maximum working precision."""


@dataclass(frozen=True)
class PrefixCode:
    """Explicit sequence -> code-string table with its cost model and source law."""

    n: int
    model: CostModel
    capacity: CostCapacity
    dist: SequenceDist
    table: dict[tuple[int, ...], tuple[int, ...]]
    method: str = "interval"

    @property
    def costs(self) -> dict[tuple[int, ...], float]:
        return {x: self.model.cost_of(w) for x, w in self.table.items()}

    def encode(self, x) -> tuple[int, ...]:
        key = tuple(int(s) for s in x)
        try:
            return self.table[key]
        except KeyError:
            raise CodecError(f"sequence {key} is not in the code support") from None

    def decode(self, w) -> tuple[int, ...]:
        key = tuple(int(u) for u in w)
        inv = self._inverse()
        try:
            return inv[key]
        except KeyError:
            raise CodecError("unknown, truncated, or dangling code string") from None

    def _inverse(self) -> dict[tuple[int, ...], tuple[int, ...]]:
        cached = getattr(self, "_inv_cache", None)
        if cached is None:
            cached = {w: x for x, w in self.table.items()}
            object.__setattr__(self, "_inv_cache", cached)
        return cached

    def cost_array(self):
        """Per-sequence (probability, codeword cost) arrays in support order; cached."""
        cached = getattr(self, "_arrays_cache", None)
        if cached is None:
            probs = np.array([p for _, p in self.dist.entries])
            costs = np.array([self.model.cost_of(self.table[x]) for x, _ in self.dist.entries])
            cached = (probs, costs)
            object.__setattr__(self, "_arrays_cache", cached)
        return cached


@dataclass(frozen=True)
class OverflowQuery:
    """Overflow evaluation request: threshold family plus evaluation method."""

    n: int
    family: str = "raw"  # raw | first-order | second-order
    eta: float | None = None
    R: float | None = None
    a: float | None = None
    L: float | None = None
    method: str = "exact"  # exact | mc | surrogate-mc
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.family == "raw":
            if self.eta is None or not 0.0 < self.eta < math.inf:
                raise CodecError("raw overflow threshold must satisfy 0 < eta < inf")
        elif self.family == "first-order":
            if self.R is None or not 0.0 < self.R < math.inf:
                raise CodecError("first-order overflow needs 0 < R < inf")
        elif self.family == "second-order":
            if self.a is None or self.a <= 0.0:
                raise CodecError("second-order overflow needs a > 0")
            if self.L is None:
                raise CodecError("second-order overflow needs L")
        else:
            raise CodecError(f"unknown overflow family {self.family!r}")
        if self.method not in ("exact", "mc", "surrogate-mc"):
            raise CodecError(f"unknown overflow method {self.method!r}")

    def threshold(self) -> float:
        if self.family == "raw":
            return float(self.eta)
        if self.family == "first-order":
            return self.n * float(self.R)
        return self.n * float(self.a) + math.sqrt(self.n) * float(self.L)


@dataclass(frozen=True)
class OverflowResult:
    eta: float
    probability: float
    method: str
    stderr: float | None = None
    note: str = ""


def _normalized_fractions(entries):
    raw = [Fraction(p) for _, p in entries]
    total = sum(raw)
    return [p / total for p in raw]


class _IntervalBuilder:
    def __init__(self, model: CostModel, bits: int):
        self.model = model
        self.bits = bits
        self.scale = 1 << bits
        self.q_lo, self.q_hi, self.pre_lo, self.pre_hi = split_enclosures(model.K, model.costs, bits)
        # argmax cost gives the certified upper bound on K**(-alpha_c * c_max)
        i_max = max(range(model.K), key=lambda u: model.costs[u])
        self.q_hi_cmax = self.q_hi[i_max]

    def descend(self, mid: Fraction, p: Fraction, depth_cap: int):
        """Follow the midpoint down the split tree; return the stop node or None."""
        k, s = self.model.K, self.scale
        a_lo, a_hi = 0, 0
        b_lo, b_hi = s, s
        path: list[int] = []
        for _ in range(depth_cap):
            w_lo = max(b_lo - a_hi, 0)
            w_hi = b_hi - a_lo
            prev_lo, prev_hi = a_lo, a_hi
            for u in range(k):
                if u == k - 1:
                    nlo, nhi = b_lo, b_hi
                else:
                    nlo = a_lo + (w_lo * self.pre_lo[u + 1] >> self.bits)
                    nhi = a_hi + -((-(w_hi * self.pre_hi[u + 1])) >> self.bits)
                if u == k - 1 or mid * s < nhi:
                    path.append(u)
                    a_lo, a_hi = prev_lo, prev_hi
                    b_lo, b_hi = nlo, nhi
                    break
                prev_lo, prev_hi = nlo, nhi
            if Fraction(2 * (b_hi - a_lo)) <= p * s:
                return path, (a_lo, a_hi, b_lo, b_hi)
        return None

    def certify(self, node, low: Fraction, p: Fraction) -> bool:
        a_lo, _, _, b_hi = node
        s = self.scale
        if not (Fraction(a_lo, s) >= low and Fraction(b_hi, s) <= low + p):
            return False
        # cost bound in width form:  P * (q_hi(c_max)/S)^2 <= 2 * W_lo / S
        # certifies cost(path) <= (-log_K P + log_K 2)/alpha_c + 2*c_max
        w_lo = max(node[2] - node[1], 0)
        return p * self.q_hi_cmax * self.q_hi_cmax <= 2 * w_lo * s


def _depth_cap(p: Fraction, model: CostModel, alpha: float) -> int:
    # bit lengths give log2(p) within 1 without float underflow
    log2_p = p.numerator.bit_length() - p.denominator.bit_length()
    q_max = model.K ** (-alpha * model.c_min)
    est = (log2_p - 1) / math.log2(q_max) if 0 < q_max < 1 else 16
    return max(64, int(est) + 64)


def build_exact_code(dist: SequenceDist, model: CostModel, *, bits: int | None = None) -> PrefixCode:
    """Construct the interval prefix code for an enumerated distribution.

    Requires a memoryless cost model.  The degenerate single-sequence
    distribution maps to one cheapest symbol.
    """
    if model.conditional is not None:
        raise CodecError("code construction requires a memoryless cost model")
    capacity = solve_cost_capacity(model)
    entries = sorted(dist.entries, key=lambda e: e[0])
    if not entries:
        raise CodecError("cannot build a code for an empty support")
    if len(entries) == 1:
        cheapest = min(range(model.K), key=lambda u: (model.costs[u], u))
        table = {entries[0][0]: (cheapest,)}
        return PrefixCode(dist.n, model, capacity, dist, table)

    probs = _normalized_fractions(entries)
    bits = bits or DEFAULT_PREC_BITS
    while bits <= MAX_PREC_BITS:
        builder = _IntervalBuilder(model, bits)
        table: dict[tuple[int, ...], tuple[int, ...]] = {}
        cum = Fraction(0)
        ok = True
        for (seq, _), p in zip(entries, probs):
            if p * builder.scale < 2:
                ok = False
                break
            mid = cum + p / 2
            got = builder.descend(mid, p, _depth_cap(p, model, capacity.alpha_c))
            if got is None or not builder.certify(got[1], cum, p):
                ok = False
                break
            table[seq] = tuple(got[0])
            cum += p
        if ok:
            return PrefixCode(dist.n, model, capacity, dist, table)
        bits *= 2
    raise PrecisionExhausted(
        f"interval construction failed up to {MAX_PREC_BITS} fractional bits"
    )


def kraft_sum(code: PrefixCode) -> float:
    """Cost Kraft sum  sum_x K**(-alpha_c * cost(word(x)));  <= 1 + 1e-9 for valid codes."""
    alpha = code.capacity.alpha_c
    return math.fsum(code.model.K ** (-alpha * code.model.cost_of(w)) for w in code.table.values())


def encode(code: PrefixCode, x) -> tuple[int, ...]:
    return code.encode(x)


def decode(code: PrefixCode, w) -> tuple[int, ...]:
    return code.decode(w)


def _mc_rng(seed: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(chunk,))
    return np.random.Generator(np.random.PCG64(ss))


def overflow(
    q: OverflowQuery,
    *,
    code: PrefixCode | None = None,
    source=None,
    model: CostModel | None = None,
) -> OverflowResult:
    """Overflow probability Pr{cost > eta} for a built code, or its certified
    cost-bound surrogate for large n.

    The surrogate-mc method samples the construction's certified bound
    b(x) = (-log_K P(x) + log_K 2)/alpha_c + 2*c_max and reports
    Pr{b(X^n) > eta}: an upper-bound stand-in for the built code's overflow,
    flagged in the result note.
    """
    eta = q.threshold()
    if q.method in ("exact", "mc"):
        if code is None:
            raise CodecError(f"{q.method} overflow needs a built code table")
        if code.n != q.n:
            raise CodecError(f"query block length {q.n} != code block length {code.n}")
        probs, costs = code.cost_array()
        if q.method == "exact":
            p = float(probs[costs > eta].sum())
            return OverflowResult(eta=eta, probability=p, method="exact")
        total_hits = 0
        remaining, chunk_idx = q.samples, 0
        while remaining > 0:
            m = min(CHUNK, remaining)
            rng = _mc_rng(q.seed, chunk_idx)
            draws = rng.choice(len(costs), size=m, p=probs / probs.sum())
            total_hits += int(np.count_nonzero(costs[draws] > eta))
            remaining -= m
            chunk_idx += 1
        p = total_hits / q.samples
        se = math.sqrt(p * (1.0 - p) / q.samples)
        return OverflowResult(eta=eta, probability=p, method="mc", stderr=se)

    if source is None or model is None:
        raise CodecError("surrogate-mc overflow needs a source and a cost model")
    if model.conditional is not None:
        raise CodecError("surrogate overflow requires a memoryless cost model")
    capacity = solve_cost_capacity(model)
    s = sample_self_info(source, q.n, q.samples, q.seed, base=model.K)
    bound = (s + math.log(2, model.K)) / capacity.alpha_c + 2.0 * model.c_max
    p = float(np.count_nonzero(bound > eta)) / q.samples
    se = math.sqrt(p * (1.0 - p) / q.samples)
    return OverflowResult(
        eta=eta,
        probability=p,
        method="surrogate-mc",
        stderr=se,
        note="upper-bound surrogate: tail of the certified cost bound, not of a built table",
    )


def random_prefix_code(dist: SequenceDist, model: CostModel, seed: int) -> PrefixCode:
    """Random valid prefix code: leaves of a random complete K-ary tree,
    shuffled and assigned injectively to the support."""
    if model.conditional is not None:
        raise CodecError("random code generation requires a memoryless cost model")
    rng = _mc_rng(seed, 0)
    k = model.K
    need = len(dist.entries)
    leaves: list[tuple[int, ...]] = [(u,) for u in range(k)]
    while len(leaves) < need:
        i = int(rng.integers(len(leaves)))
        stem = leaves[i]
        leaves[i] = stem + (0,)
        leaves.extend(stem + (u,) for u in range(1, k))
    order = rng.permutation(len(leaves))
    seqs = sorted(x for x, _ in dist.entries)
    table = {seq: leaves[int(order[i])] for i, seq in enumerate(seqs)}
    capacity = solve_cost_capacity(model)
    return PrefixCode(dist.n, model, capacity, dist, table, method="random-tree")
