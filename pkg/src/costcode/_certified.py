"""Certified scaled-integer enclosures of the cost-capacity split ratios.

The interval code construction needs rigorous lower/upper bounds on
q(u) = K**(-alpha_c * c(u)) at a fixed binary scale.  alpha_c is first
bracketed by interval-arithmetic bisection (every comparison is certified by
an outward-rounded evaluation of the capacity equation), and the bracket is
then pushed through an interval exponential.  All downstream arithmetic in
the codec is plain integer math on these bounds.
"""

from __future__ import annotations

import mpmath
from mpmath import iv


def _iv_endpoints(x):
    # mpf(raw) rounds to the ambient precision; convert at the mantissa's own
    # width so the enclosure endpoints survive exactly
    a_raw, b_raw = x._mpi_
    with mpmath.workprec(max(a_raw[3], b_raw[3], 53) + 8):
        return mpmath.mpf(a_raw), mpmath.mpf(b_raw)


def _capacity_sum(k: int, costs, alpha):
    total = iv.mpf(0)
    lnk = iv.log(k)
    for c in costs:
        total += iv.exp(-alpha * lnk * c)
    return total


def _bracket_search(k: int, costs, prec: int):
    # runs with iv.prec and mp.prec already raised; endpoints stay exact mpf
    one = mpmath.mpf(1)

    def above(alpha) -> bool:  # certified alpha > alpha_c
        _, b = _iv_endpoints(_capacity_sum(k, costs, iv.mpf(alpha)))
        return b < one

    def below(alpha) -> bool:
        a, _ = _iv_endpoints(_capacity_sum(k, costs, iv.mpf(alpha)))
        return a > one

    lo = mpmath.mpf(2) ** -30
    for _ in range(300):
        if below(lo):
            break
        lo /= 2
    else:
        raise ArithmeticError("could not certify a lower capacity bracket")
    hi = mpmath.mpf(1)
    for _ in range(300):
        if above(hi):
            break
        hi *= 2
    else:
        raise ArithmeticError("could not certify an upper capacity bracket")

    target = mpmath.mpf(2) ** -(prec - 48)
    for _ in range(8 * prec):
        if hi - lo <= target:
            break
        mid = (lo + hi) / 2
        if above(mid):
            hi = mid
            continue
        if below(mid):
            lo = mid
            continue
        # capacity sum at mid sits inside the interval noise band around 1
        # (e.g. the root is exactly representable); shrink from the sides
        quarter = (hi - lo) / 4
        moved = False
        if below(lo + quarter):
            lo = lo + quarter
            moved = True
        if above(hi - quarter):
            hi = hi - quarter
            moved = True
        if not moved:
            break  # the whole remaining bracket is inside the noise band
    return lo, hi


def certified_alpha_bracket(k: int, costs, prec: int):
    """Bracket [lo, hi] (exact mpf endpoints) certified to contain alpha_c."""
    saved = iv.prec
    iv.prec = prec
    try:
        # bracket endpoint arithmetic must not round to the global precision
        with mpmath.workprec(prec + 16):
            return _bracket_search(k, costs, prec)
    finally:
        iv.prec = saved


def _to_scaled_int(x, bits: int, round_up: bool) -> int:
    with mpmath.workprec(max(2 * bits, mpmath.mp.prec) + 128):
        scaled = mpmath.mpf(x) * (mpmath.mpf(2) ** bits)  # power-of-two scaling is exact
        return int(mpmath.ceil(scaled)) if round_up else int(mpmath.floor(scaled))


def split_enclosures(k: int, costs, bits: int):
    """Scaled-int bounds on q(u) and its prefix sums at scale 2**bits.

    Returns (q_lo, q_hi, prefix_lo, prefix_hi) with q_lo[u]/2**bits <= q(u) <=
    q_hi[u]/2**bits and prefix arrays of length K+1 bounding the cumulative
    sums used for child-interval boundaries.
    """
    prec = bits + 96
    alpha = certified_alpha_bracket(k, costs, prec)
    saved = iv.prec
    iv.prec = prec
    try:
        alpha_iv = iv.mpf([alpha[0], alpha[1]])
        lnk = iv.log(k)
        scale = 1 << bits
        q_lo, q_hi = [], []
        for c in costs:
            enc = iv.exp(-alpha_iv * lnk * c)
            a, b = _iv_endpoints(enc)
            q_lo.append(max(_to_scaled_int(a, bits, round_up=False), 0))
            q_hi.append(min(_to_scaled_int(b, bits, round_up=True), scale))
    finally:
        iv.prec = saved
    prefix_lo = [0]
    prefix_hi = [0]
    for lo_v, hi_v in zip(q_lo, q_hi):
        prefix_lo.append(prefix_lo[-1] + lo_v)
        prefix_hi.append(prefix_hi[-1] + hi_v)
    return q_lo, q_hi, prefix_lo, prefix_hi
