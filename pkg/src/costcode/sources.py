"""Source models: finite-support i.i.d. sources and two-component mixtures.

All log quantities are taken to a caller-supplied base (the code alphabet
size K at every call site in this package).  Sampling is seeded and chunked:
sample j // CHUNK draws from an independent substream keyed by the chunk
index, so results never depend on how the work is split across workers.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

CHUNK = 1 << 16
SUPPORT_CAP = 1 << 20


class SourceError(ValueError):
    """Invalid source definition or query."""


@dataclass(frozen=True)
class IIDSource:
    """Memoryless source given by its single-letter pmf."""

    pmf: tuple[float, ...]

    def __post_init__(self):
        pmf = tuple(float(p) for p in self.pmf)
        if not pmf:
            raise SourceError("pmf is empty")
        if any(p < 0.0 or not math.isfinite(p) for p in pmf):
            raise SourceError("pmf entries must be nonnegative and finite")
        total = math.fsum(pmf)
        if abs(total - 1.0) > 1e-12:
            raise SourceError(f"pmf sums to {total!r}, expected 1 within 1e-12")
        if not any(p > 0.0 for p in pmf):
            raise SourceError("pmf has empty support")
        object.__setattr__(self, "pmf", pmf)

    @property
    def alphabet_size(self) -> int:
        return len(self.pmf)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.pmf) if p > 0.0)


@dataclass(frozen=True)
class MixedSource:
    """Two-component mixture at the sequence-probability level.

    P(x) = w1 * P1(x) + w2 * P2(x) for length-n sequences; the component is
    drawn once per sequence when sampling, not per symbol.
    """

    components: tuple[IIDSource, IIDSource]
    weights: tuple[float, float]

    def __post_init__(self):
        comps = tuple(self.components)
        w = tuple(float(v) for v in self.weights)
        if len(comps) != 2 or len(w) != 2:
            raise SourceError("mixed source needs exactly two components and two weights")
        if w[0] <= 0.0 or w[1] <= 0.0:
            raise SourceError("mixture weights must be strictly positive")
        if abs(w[0] + w[1] - 1.0) > 1e-12:
            raise SourceError(f"mixture weights sum to {w[0] + w[1]!r}, expected 1")
        if comps[0].alphabet_size != comps[1].alphabet_size:
            raise SourceError("mixture components must share an alphabet")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", w)

    @property
    def alphabet_size(self) -> int:
        return self.components[0].alphabet_size

    @property
    def support(self) -> tuple[int, ...]:
        sup = set(self.components[0].support) | set(self.components[1].support)
        return tuple(sorted(sup))


Source = IIDSource | MixedSource


@dataclass(frozen=True)
class SequenceDist:
    """Exhaustive support of X^n with exact (float) probabilities."""

    n: int
    entries: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self):
        seqs = [s for s, _ in self.entries]
        if len(set(seqs)) != len(seqs):
            raise SourceError("sequence support contains duplicates")
        if any(p <= 0.0 for _, p in self.entries):
            raise SourceError("sequence probabilities must be strictly positive")
        total = math.fsum(p for _, p in self.entries)
        if abs(total - 1.0) > 1e-9:
            raise SourceError(f"sequence probabilities sum to {total!r}, expected 1 within 1e-9")


def _log_base_pmf(pmf: tuple[float, ...], base: float) -> np.ndarray:
    out = np.empty(len(pmf))
    for i, p in enumerate(pmf):
        out[i] = math.log(p, base) if p > 0.0 else -math.inf
    return out


def _counts(x, alphabet_size: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.int64)
    if arr.ndim != 1:
        raise SourceError("sequence must be one-dimensional")
    if arr.size and (arr.min() < 0 or arr.max() >= alphabet_size):
        raise SourceError(f"sequence symbol outside 0..{alphabet_size - 1}")
    return np.bincount(arr, minlength=alphabet_size)


def _iid_log_prob_counts(counts: np.ndarray, pmf: tuple[float, ...], base: float) -> float:
    logs = _log_base_pmf(pmf, base)
    hit_zero = any(counts[i] > 0 and pmf[i] == 0.0 for i in range(len(pmf)))
    if hit_zero:
        return -math.inf
    finite = np.where(np.isfinite(logs), logs, 0.0)
    return float(counts @ finite)


def log_prob(source: Source, x, base: float) -> float:
    """log_base of the sequence probability; exactly -inf off the support.

    Mixture probabilities are combined in a max-plus stabilized form, so no
    intermediate underflow occurs even for block lengths around 1e6.
    """
    if isinstance(source, IIDSource):
        counts = _counts(x, source.alphabet_size)
        return _iid_log_prob_counts(counts, source.pmf, base)
    counts = _counts(x, source.alphabet_size)
    lnb = math.log(base)
    terms = []
    for comp, w in zip(source.components, source.weights):
        lp = _iid_log_prob_counts(counts, comp.pmf, base)
        terms.append(math.log(w) + lp * lnb)  # natural log for the combine step
    hi, lo = max(terms), min(terms)
    if hi == -math.inf:
        return -math.inf
    return (hi + math.log1p(math.exp(lo - hi))) / lnb


def entropy(source: IIDSource, base: float) -> float:
    """Shannon entropy of the single-letter law, 0*log(1/0) taken as 0."""
    if not isinstance(source, IIDSource):
        raise SourceError("entropy is defined here for i.i.d. sources only")
    return -math.fsum(p * math.log(p, base) for p in source.pmf if p > 0.0)


def varentropy(source: IIDSource, base: float) -> float:
    """Variance of the per-symbol self-information; 0 iff the support is uniform."""
    if not isinstance(source, IIDSource):
        raise SourceError("varentropy is defined here for i.i.d. sources only")
    h = entropy(source, base)
    return math.fsum(p * (-math.log(p, base) - h) ** 2 for p in source.pmf if p > 0.0)


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(chunk_index,))
    return np.random.Generator(np.random.PCG64(ss))


def _iid_self_info_chunk(rng, pmf, n: int, m: int, base: float) -> np.ndarray:
    p = np.asarray(pmf, dtype=float)
    p = p / p.sum()
    logs = _log_base_pmf(tuple(pmf), base)
    info = np.where(np.isfinite(logs), -logs, 0.0)  # zero-prob symbols are never drawn
    counts = rng.multinomial(n, p, size=m)
    return counts @ info


def _mixed_self_info_chunk(rng, source: MixedSource, n: int, m: int, base: float) -> np.ndarray:
    w1, _ = source.weights
    labels = rng.random(m) < w1
    a = source.alphabet_size
    counts = np.empty((m, a), dtype=np.int64)
    k1 = int(labels.sum())
    pmfs = [np.asarray(c.pmf, dtype=float) for c in source.components]
    pmfs = [p / p.sum() for p in pmfs]
    if k1:
        counts[labels] = rng.multinomial(n, pmfs[0], size=k1)
    if m - k1:
        counts[~labels] = rng.multinomial(n, pmfs[1], size=m - k1)
    lnb = math.log(base)
    comp_terms = []
    for comp, w in zip(source.components, source.weights):
        logs = _log_base_pmf(comp.pmf, base) * lnb
        finite = np.where(np.isfinite(logs), logs, 0.0)
        lp = counts @ finite
        dead = np.array([p == 0.0 for p in comp.pmf])
        if dead.any():
            lp = np.where(counts[:, dead].sum(axis=1) > 0, -np.inf, lp)
        comp_terms.append(math.log(w) + lp)
    mix = np.logaddexp(comp_terms[0], comp_terms[1])
    return -mix / lnb


def sample_self_info(source: Source, n: int, count: int, seed: int, base: float) -> np.ndarray:
    """Draw `count` length-n sequences and return -log_base P(X^n) under the full law.

    Deterministic given the seed; internally split into fixed-size chunks with
    one derived substream each, so any parallel fan-out reproduces this output.
    """
    if count < 1:
        raise SourceError("count must be >= 1")
    if n < 1:
        raise SourceError("block length must be >= 1")
    out = np.empty(count)
    for j, start in enumerate(range(0, count, CHUNK)):
        m = min(CHUNK, count - start)
        rng = _chunk_rng(seed, j)
        if isinstance(source, IIDSource):
            out[start:start + m] = _iid_self_info_chunk(rng, source.pmf, n, m, base)
        else:
            out[start:start + m] = _mixed_self_info_chunk(rng, source, n, m, base)
    return out


def enumerate_support(source: Source, n: int, cap: int = SUPPORT_CAP) -> SequenceDist:
    """Full support of X^n with exact probabilities (small n only)."""
    if n < 1:
        raise SourceError("block length must be >= 1")
    support = source.support
    size = len(support) ** n
    if size > cap:
        raise SourceError(f"support too large: {len(support)}^{n} = {size} exceeds cap {cap}")
    entries = []
    if isinstance(source, IIDSource):
        for seq in itertools.product(support, repeat=n):
            p = math.prod(source.pmf[s] for s in seq)
            if p > 0.0:
                entries.append((seq, p))
    else:
        (c1, c2), (w1, w2) = source.components, source.weights
        for seq in itertools.product(support, repeat=n):
            p1 = math.prod(c1.pmf[s] for s in seq)
            p2 = math.prod(c2.pmf[s] for s in seq)
            p = w1 * p1 + w2 * p2
            if p > 0.0:
                entries.append((seq, p))
    return SequenceDist(n=n, entries=tuple(entries))


def source_from_dict(doc: dict) -> Source:
    """Build a source from `{"type":"iid",...}` or `{"type":"mixed",...}` documents."""
    if not isinstance(doc, dict) or "type" not in doc:
        raise SourceError("source document must be a JSON object with a 'type' key")
    kind = doc["type"]
    if kind == "iid":
        return IIDSource(pmf=tuple(doc["pmf"]))
    if kind == "mixed":
        comps = doc.get("components")
        if not isinstance(comps, list) or len(comps) != 2:
            raise SourceError("mixed source document needs exactly two components")
        built = tuple(source_from_dict(c) for c in comps)
        if not all(isinstance(c, IIDSource) for c in built):
            raise SourceError("mixture components must be i.i.d. sources")
        return MixedSource(components=built, weights=tuple(doc["weights"]))
    raise SourceError(f"unknown source type {kind!r}")


def load_source(path) -> Source:
    with open(path) as fh:
        return source_from_dict(json.load(fh))
