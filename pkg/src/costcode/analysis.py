"""First- and second-order overflow thresholds, the variable/fixed-length code
transformations, and the two information-spectrum bounds.

Threshold values are expressed in cost units: the i.i.d. first-order threshold
is H(X)/alpha_c for every target overflow level, and the second-order
threshold solves the case equation of a (possibly mixed) Gaussian tail by
bisection.  Mixed sources are internally reordered so the first component has
the larger entropy; the target level equal to its weight sits exactly on the
step of the limiting spectrum and is rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codec import PrefixCode, build_exact_code
from .cost_model import CostModel, solve_cost_capacity
from .sources import (
    IIDSource,
    MixedSource,
    SequenceDist,
    Source,
    entropy,
    enumerate_support,
    log_prob,
    sample_self_info,
    varentropy,
)
from .spectrum import gaussian_cdf, gaussian_quantile

ROOT_VALUE_TOL = 1e-10
ROOT_WIDTH_TOL = 1e-12
ENTROPY_TIE_TOL = 1e-9
CENTER_MATCH_TOL = 1e-9


class AnalysisError(ValueError):
    """Invalid threshold query or transformation input."""


@dataclass(frozen=True)
class ThresholdResult:
    kind: str  # "first-order" | "second-order"
    value: float
    case: str  # "iid" | "mixed-step" | "mixed-I" | "mixed-II" | "mixed-III"
    residual: float
    inputs: dict

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "case": self.case,
            "residual": self.residual,
            "inputs": dict(self.inputs),
        }


def _ordered_mixture(source: MixedSource, base: float):
    """Components with entropies, swapped so the first entropy is the larger."""
    (c1, c2), (w1, w2) = source.components, source.weights
    h1, h2 = entropy(c1, base), entropy(c2, base)
    swapped = h1 < h2
    if swapped:
        c1, c2, h1, h2, w1, w2 = c2, c1, h2, h1, w2, w1
    s1, s2 = math.sqrt(varentropy(c1, base)), math.sqrt(varentropy(c2, base))
    return c1, c2, h1, h2, s1, s2, w1, w2, swapped


def first_order_threshold(source: Source, model: CostModel, eps: float) -> ThresholdResult:
    """Smallest per-symbol cost rate whose limiting overflow probability is <= eps."""
    if not 0.0 <= eps < 1.0:
        raise AnalysisError(f"target overflow level must lie in [0,1), got {eps}")
    cap = solve_cost_capacity(model)
    alpha = cap.alpha_c
    if isinstance(source, IIDSource):
        h = entropy(source, model.K)
        return ThresholdResult(
            kind="first-order",
            value=h / alpha,
            case="iid",
            residual=0.0,
            inputs={"eps": eps, "alpha_c": alpha, "H": h},
        )
    _, _, h1, h2, s1, s2, w1, w2, swapped = _ordered_mixture(source, model.K)
    if eps == w1:
        raise AnalysisError(
            f"eps equal to the dominant-component weight {w1} sits on the spectrum step"
        )
    value = (h1 if eps < w1 else h2) / alpha
    return ThresholdResult(
        kind="first-order",
        value=value,
        case="mixed-step",
        residual=0.0,
        inputs={
            "eps": eps,
            "alpha_c": alpha,
            "H1": h1,
            "H2": h2,
            "weights": (w1, w2),
            "components_swapped": swapped,
        },
    )


def _tail_term(t: float, alpha: float, sigma: float) -> float:
    """Phi(t*alpha/sigma), with the sigma -> 0 pointwise step limit at t = 0."""
    if sigma > 0.0:
        return gaussian_cdf(t * alpha / sigma)
    if t > 0.0:
        return 1.0
    if t < 0.0:
        return 0.0
    return 0.5


def _infimum_bisect(g, eps: float, scale: float):
    """inf{ t : g(t) <= eps } for nonincreasing g, by predicate bisection."""
    lo, hi = -scale, scale
    for _ in range(200):
        if g(lo) > eps:
            break
        lo *= 2.0
    for _ in range(200):
        if g(hi) <= eps:
            break
        hi *= 2.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if abs(g(mid) - eps) <= ROOT_VALUE_TOL or (hi - lo) <= ROOT_WIDTH_TOL:
            return mid
        if g(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


def second_order_threshold(
    source: Source, model: CostModel, eps: float, a: float | None = None
) -> ThresholdResult:
    """Smallest sqrt(n)-scale deviation with limiting overflow <= eps at center a.

    ``a`` must equal the admissible first-order center for the classified case
    (it is filled in when omitted); the value may be negative.
    """
    if not 0.0 < eps < 1.0:
        raise AnalysisError(f"target overflow level must lie in (0,1), got {eps}")
    cap = solve_cost_capacity(model)
    alpha = cap.alpha_c

    def check_center(admissible: float) -> float:
        if a is None:
            return admissible
        if abs(a - admissible) > CENTER_MATCH_TOL * max(1.0, abs(admissible)):
            raise AnalysisError(
                f"center a={a} does not match the admissible first-order center {admissible}"
            )
        return a

    if isinstance(source, IIDSource):
        h = entropy(source, model.K)
        sigma = math.sqrt(varentropy(source, model.K))
        center = check_center(h / alpha)
        if sigma == 0.0:
            value, residual = 0.0, 0.0
        else:
            value = (sigma / alpha) * gaussian_quantile(1.0 - eps)
            residual = abs((1.0 - gaussian_cdf(value * alpha / sigma)) - eps)
        return ThresholdResult(
            kind="second-order",
            value=value,
            case="iid",
            residual=residual,
            inputs={"eps": eps, "a": center, "alpha_c": alpha, "H": h, "sigma": sigma},
        )

    c1, c2, h1, h2, s1, s2, w1, w2, swapped = _ordered_mixture(source, model.K)
    if eps == w1:
        raise AnalysisError(
            f"eps equal to the dominant-component weight {w1} sits on the spectrum step"
        )
    scale = 20.0 * max(s1, s2, 0.05) / alpha
    if abs(h1 - h2) <= ENTROPY_TIE_TOL:
        case = "mixed-I"
        center = check_center(h1 / alpha)

        def g(t: float) -> float:
            return 1.0 - (w1 * _tail_term(t, alpha, s1) + w2 * _tail_term(t, alpha, s2))

    elif w1 > eps:
        case = "mixed-II"
        center = check_center(h1 / alpha)
        if s1 == 0.0:
            raise AnalysisError("degenerate mixture: the dominant component has zero varentropy")

        def g(t: float) -> float:
            return w1 * (1.0 - gaussian_cdf(t * alpha / s1))

    else:
        case = "mixed-III"
        center = check_center(h2 / alpha)
        if s2 == 0.0:
            raise AnalysisError("degenerate mixture: the minor component has zero varentropy")

        def g(t: float) -> float:
            return w1 + w2 * (1.0 - gaussian_cdf(t * alpha / s2))

    value = _infimum_bisect(g, eps, scale)
    return ThresholdResult(
        kind="second-order",
        value=value,
        case=case,
        residual=abs(g(value) - eps),
        inputs={
            "eps": eps,
            "a": center,
            "alpha_c": alpha,
            "H1": h1,
            "H2": h2,
            "sigma1": s1,
            "sigma2": s2,
            "weights": (w1, w2),
            "components_swapped": swapped,
        },
    )


@dataclass(frozen=True)
class FixedLengthCode:
    """Fixed-length code induced by thresholding a variable-length table."""

    n: int
    size: int
    members: tuple[tuple[int, ...], ...]
    error_probability: float


def vl_to_fl(code: PrefixCode, eta: float) -> FixedLengthCode:
    """Fixed-length code over T = {x : cost(word(x)) <= eta}.

    Its error probability equals the exact overflow of the table at eta, and
    log_K |T| <= alpha_c * eta by the cost Kraft inequality.
    """
    probs, costs = code.cost_array()
    members = [x for (x, _), c in zip(code.dist.entries, costs) if c <= eta]
    return FixedLengthCode(
        n=code.n,
        size=len(members),
        members=tuple(sorted(members)),
        error_probability=float(probs[costs > eta].sum()),
    )


@dataclass(frozen=True)
class CostCertificate:
    """Per-member cost guarantee of a flag-prefixed variable-length code."""

    threshold: float
    flag_cost: float
    max_member_cost: float
    error_bound: float


def fl_to_vl(
    fl: FixedLengthCode, dist: SequenceDist, model: CostModel
) -> tuple[PrefixCode, CostCertificate]:
    """Flag-prefixed variable-length code from a fixed-length member set.

    Members are coded as flag 0 followed by the interval code of the uniform
    law on the member set; every member cost is certified below

        (1/alpha_c) log_K |T| + log_K(2)/alpha_c + 2*c_max + cost(flag),

    so the overflow at that threshold is at most the fixed-length error
    probability.  Non-members get flag 1 and an arbitrary prefix code.
    """
    if fl.size == 0:
        raise AnalysisError("cannot expand an empty member set")
    support = {x for x, _ in dist.entries}
    if not set(fl.members) <= support:
        raise AnalysisError("member set is not contained in the distribution support")
    capacity = solve_cost_capacity(model)
    alpha = capacity.alpha_c

    def uniform(seqs):
        return SequenceDist(n=dist.n, entries=tuple((x, 1.0 / len(seqs)) for x in seqs))

    inner = build_exact_code(uniform(fl.members), model)
    table = {x: (0,) + w for x, w in inner.table.items()}
    rest = sorted(support - set(fl.members))
    if rest:
        outer = build_exact_code(uniform(rest), model)
        table.update({x: (1,) + w for x, w in outer.table.items()})
    combined = PrefixCode(dist.n, model, capacity, dist, table, method="flagged")
    flag_cost = model.costs[0]
    threshold = (
        math.log(fl.size, model.K) / alpha
        + math.log(2, model.K) / alpha
        + 2.0 * model.c_max
        + flag_cost
    )
    max_member = max(model.cost_of(table[x]) for x in fl.members)
    cert = CostCertificate(
        threshold=threshold,
        flag_cost=flag_cost,
        max_member_cost=max_member,
        error_bound=fl.error_probability,
    )
    return combined, cert


@dataclass(frozen=True)
class LemmaBounds:
    """Information-spectrum sandwich around the overflow probability at eta."""

    eta: float
    z: float
    lower_raw: float
    lower: float
    upper_raw: float
    upper: float
    method: str

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "z": self.z,
            "lower_raw": self.lower_raw,
            "lower": self.lower,
            "upper_raw": self.upper_raw,
            "upper": self.upper,
            "method": self.method,
        }


def lemma_bounds(
    source: Source,
    model: CostModel,
    n: int,
    eta: float,
    z: float,
    method: str = "exact",
    samples: int = 100_000,
    seed: int = 0,
) -> LemmaBounds:
    """Spectrum lower/upper bounds on the overflow probability at threshold eta.

    lower_raw = Pr{P(X^n) <= z K^(-alpha_c eta)} - z  holds for every prefix
    code; upper_raw = Pr{z P(X^n) <= K^(-alpha_c (eta - c_max))} + z K^(alpha_c
    c_max + 1)  holds for the interval construction (the eta shift carries its
    2*c_max cost bound).  Events are evaluated in the log domain, exactly or by
    seeded Monte Carlo.
    """
    if z <= 0.0:
        raise AnalysisError("the slack parameter z must be positive")
    cap = solve_cost_capacity(model)
    alpha = cap.alpha_c
    k = model.K
    log_z = math.log(z, k)
    t_lower = alpha * eta - log_z  # event: self-info >= t
    t_upper = alpha * (eta - model.c_max) + log_z

    if method == "exact":
        dist = enumerate_support(source, n)
        svals = np.array([-log_prob(source, x, k) for x, _ in dist.entries])
        probs = np.array([p for _, p in dist.entries])
        p_low = float(probs[svals >= t_lower].sum())
        p_up = float(probs[svals >= t_upper].sum())
    elif method == "mc":
        s = sample_self_info(source, n, samples, seed, base=k)
        p_low = float(np.count_nonzero(s >= t_lower)) / samples
        p_up = float(np.count_nonzero(s >= t_upper)) / samples
    else:
        raise AnalysisError(f"unknown method {method!r}")

    lower_raw = p_low - z
    upper_raw = p_up + z * k ** (alpha * model.c_max + 1.0)
    return LemmaBounds(
        eta=eta,
        z=z,
        lower_raw=lower_raw,
        lower=max(lower_raw, 0.0),
        upper_raw=upper_raw,
        upper=min(upper_raw, 1.0),
        method=method,
    )
