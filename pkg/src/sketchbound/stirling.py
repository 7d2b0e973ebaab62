"""Left-tail evaluation in log space with a seven-term Stirling series.

ln h! is approximated by

    h ln h - h + ln(2 pi h)/2 + 1/(12h) - 1/(360h^3) + 1/(1260h^5) - 1/(1680h^7)

for h at or above a cutoff, with the terms accumulated smallest-first so the
corrections are not lost to roundoff; below the cutoff the series is too
coarse and ln h! is summed directly from logs.  A pmf is nine such values,
neighboring terms follow by adding log ratios, and the tail is accumulated
exactly like the direct engine, just with an exponentiation per term.
"""

from __future__ import annotations

from decimal import Decimal, localcontext
from typing import Optional

from .direct import _anchor_index, _check_feasible, _check_tail_domain, _support
from .model import (
    DomainError,
    PrecisionContext,
    StructuralZeroError,
    TermBoundaryError,
    decimal_context,
)

_ZERO = Decimal(0)
_ONE = Decimal(1)

# ln of integers up to this bound is memoized per digit count; beyond it a
# fresh ln costs the same as the memo would save on a single use.
_LN_MEMO_MAX = 4096
_ln_memo: dict[tuple[int, int], Decimal] = {}

_pi_memo: dict[int, Decimal] = {}
_ln2pi_memo: dict[int, Decimal] = {}


def _pi(digits: int) -> Decimal:
    """pi at the requested precision, by the classic converging series."""
    if digits in _pi_memo:
        return _pi_memo[digits]
    with localcontext(decimal_context(digits + 4)):
        three = Decimal(3)
        lasts, t, s, n, na, d, da = Decimal(0), three, three, 1, 0, 0, 24
        while s != lasts:
            lasts = s
            n, na = n + na, na + 8
            d, da = d + da, da + 32
            t = (t * n) / d
            s += t
    with localcontext(decimal_context(digits)):
        result = +s
    _pi_memo[digits] = result
    return result


def _ln2pi(digits: int) -> Decimal:
    """ln(2 pi) at the requested precision, never a fixed-width literal."""
    if digits in _ln2pi_memo:
        return _ln2pi_memo[digits]
    with localcontext(decimal_context(digits + 4)):
        value = (2 * _pi(digits + 4)).ln()
    with localcontext(decimal_context(digits)):
        result = +value
    _ln2pi_memo[digits] = result
    return result


def _ln_int(i: int, digits: int) -> Decimal:
    # callers run inside the matching context already; the memoized path
    # pins the context so cached values always honor their key
    if i <= _LN_MEMO_MAX:
        key = (i, digits)
        cached = _ln_memo.get(key)
        if cached is None:
            with localcontext(decimal_context(digits)):
                cached = Decimal(i).ln()
            _ln_memo[key] = cached
        return cached
    return Decimal(i).ln()


class LogFactorialTable:
    """Memoized ln h! with a small-argument exact path.

    Below `exact_cutoff` the series error (about 3e-4 at h = 1) is
    unacceptable, so ln h! is the direct sum of logs there.  Cached values
    are keyed by (h, digits); the cache is an optimization only.
    """

    def __init__(self, exact_cutoff: int = 30):
        if exact_cutoff < 1:
            raise DomainError("exact_cutoff must be >= 1")
        self.exact_cutoff = exact_cutoff
        self.cached_values: dict[tuple[int, int], Decimal] = {}

    def value(self, h: int, ctx: PrecisionContext) -> Decimal:
        if h < 0:
            raise DomainError(f"factorial argument must be >= 0, got {h}")
        key = (h, ctx.digits)
        cached = self.cached_values.get(key)
        if cached is None:
            cached = self._compute(h, ctx.digits)
            self.cached_values[key] = cached
        return cached

    def _compute(self, h: int, digits: int) -> Decimal:
        with localcontext(decimal_context(digits)):
            if h < self.exact_cutoff:
                acc = _ZERO
                for i in range(2, h + 1):
                    acc += _ln_int(i, digits)
                return acc
            hd = Decimal(h)
            lnh = hd.ln()
            h2 = h * h
            h3 = h2 * h
            # smallest terms first
            acc = -1 / Decimal(1680 * h3 * h2 * h2)
            acc += 1 / Decimal(1260 * h3 * h2)
            acc -= 1 / Decimal(360 * h3)
            acc += 1 / Decimal(12 * h)
            acc += (_ln2pi(digits) + lnh) / 2
            acc -= hd
            acc += hd * lnh
            return acc


_default_table = LogFactorialTable()


def log_factorial(h: int, ctx: PrecisionContext,
                  table: Optional[LogFactorialTable] = None) -> Decimal:
    """ln h!, by Stirling series above the table's cutoff and log sums below."""
    return (table or _default_table).value(h, ctx)


def log_pmf(n: int, m: int, s: int, j: int, ctx: PrecisionContext,
            table: Optional[LogFactorialTable] = None) -> Decimal:
    """ln P(K = j) as a signed sum of nine log factorials.

    Raises StructuralZeroError when the pmf is zero; callers must screen.
    """
    _check_tail_domain(n, m, s)
    j_lo, j_hi = _support(n, m, s)
    if j < j_lo or j > j_hi:
        raise StructuralZeroError(f"pmf(n={n}, m={m}, s={s}, j={j}) is zero")
    if j_lo == j_hi:
        # single-point support: the probability is exactly 1
        return _ZERO
    tab = table or _default_table
    with localcontext(ctx.context):
        return (
            tab.value(m, ctx) - tab.value(m - j, ctx)
            + tab.value(n - m, ctx) - tab.value(n - m - s + j, ctx)
            + tab.value(s, ctx) - tab.value(s - j, ctx)
            - tab.value(j, ctx) - tab.value(n, ctx) + tab.value(n - s, ctx)
        )


def log_term_step(n: int, m: int, s: int, j: int, ctx: PrecisionContext) -> Decimal:
    """ln p(n, m, s, j+1) - ln p(n, m, s, j)."""
    if j + 1 > m or j + 1 > s:
        raise TermBoundaryError(f"term after j={j} is structurally zero")
    if j < 0 or n - m - s + j + 1 <= 0:
        raise DomainError(
            f"step undefined at j={j}: term j is structurally zero"
        )
    d = ctx.digits
    with localcontext(ctx.context):
        return (_ln_int(m - j, d) + _ln_int(s - j, d)
                - _ln_int(j + 1, d) - _ln_int(n - m - s + j + 1, d))


def left_tail_stirling(n: int, m: int, s: int, k: int, ctx: PrecisionContext,
                       table: Optional[LogFactorialTable] = None) -> Decimal:
    """P(K <= k) summed from exponentiated log terms.

    Anchored at the same index as the direct engine; the walks update the
    log term with log_term_step, exponentiate, and stop below the
    truncation threshold.  Error adds the Stirling series residual to the
    context's target.
    """
    _check_tail_domain(n, m, s)
    if k < 0:
        raise DomainError(f"tail index must be >= 0, got k={k}")
    _check_feasible(ctx)
    if m > n - (s - k):
        return _ZERO
    j_lo, j_hi = _support(n, m, s)
    if k >= j_hi:
        return _ONE
    j0 = _anchor_index(n, m, s, k)
    lnp0 = log_pmf(n, m, s, j0, ctx, table=table)
    d = ctx.digits
    thr = ctx.trunc_threshold
    with localcontext(ctx.context):
        anchor = lnp0.exp()
        down: list[Decimal] = []
        lnp, j = lnp0, j0
        while j > j_lo:
            lnp -= (_ln_int(m - j + 1, d) + _ln_int(s - j + 1, d)
                    - _ln_int(j, d) - _ln_int(n - m - s + j, d))
            t = lnp.exp()
            if t < thr:
                break
            down.append(t)
            j -= 1
        up: list[Decimal] = []
        lnp, j = lnp0, j0
        while j < k:
            lnp += (_ln_int(m - j, d) + _ln_int(s - j, d)
                    - _ln_int(j + 1, d) - _ln_int(n - m - s + j + 1, d))
            t = lnp.exp()
            if t < thr:
                break
            up.append(t)
            j += 1
        total = _ZERO
        for t in reversed(down):
            total += t
        total += anchor
        for t in reversed(up):
            total += t
        return total
