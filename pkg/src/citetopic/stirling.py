"""Log-space generalised Stirling numbers and rising factorials.

Every marginal likelihood evaluation in the Pitman-Yor hierarchy needs
ratios of generalised Stirling numbers S(n, m; a) and rising factorials,
so the S values are tabulated once per discount value and shared.
"""

import math

import numpy as np

NEG_INF = float("-inf")


class StirlingCache:
    """Growable table of log S(n, m; a) for one discount value a.

    Values are kept in log space: S grows super-exponentially in n and
    customer counts can reach 1e5+ on real corpora.  The table is
    rectangular (n up to n_cap, m up to m_cap) rather than a full
    triangle; table counts stay far below customer counts in practice
    and both bounds grow on demand by doubling.
    """

    def __init__(self, discount, n_cap=64, m_cap=64):
        if not 0.0 <= discount < 1.0:
            raise ValueError(f"discount must be in [0, 1), got {discount}")
        self.discount = float(discount)
        self._table = None
        self._rebuild(int(n_cap), min(int(m_cap), int(n_cap)))

    @property
    def n_cap(self):
        return self._table.shape[0] - 1

    @property
    def m_cap(self):
        return self._table.shape[1] - 1

    @property
    def table(self):
        """The raw (n_cap+1, m_cap+1) log-value array, for hot kernels."""
        return self._table

    def _rebuild(self, n_cap, m_cap):
        a = self.discount
        tab = np.full((n_cap + 1, m_cap + 1), NEG_INF)
        tab[0, 0] = 0.0
        m_idx = np.arange(m_cap + 1, dtype=np.float64)
        for n in range(1, n_cap + 1):
            prev = tab[n - 1]
            # S(n, m) = S(n-1, m-1) + (n-1 - m*a) * S(n-1, m)
            with np.errstate(divide="ignore", invalid="ignore"):
                fac = np.log(np.maximum((n - 1) - a * m_idx, 0.0))
            stay = fac + prev
            stay[np.isnan(stay)] = NEG_INF
            cur = np.empty(m_cap + 1)
            cur[0] = NEG_INF
            cur[1:] = np.logaddexp(prev[:-1], stay[1:])
            if n <= m_cap:
                cur[n] = 0.0  # diagonal is exactly 1
                cur[n + 1:] = NEG_INF
            tab[n] = cur
        self._table = tab

    def ensure(self, n, m=None):
        """Grow the table so that (n, m) is addressable; returns the table."""
        if m is None:
            m = n
        n_cap, m_cap = self.n_cap, self.m_cap
        if n > n_cap or m > m_cap:
            new_n = n_cap
            while new_n < n:
                new_n *= 2
            new_m = m_cap
            while new_m < m:
                new_m *= 2
            self._rebuild(new_n, min(new_m, new_n))
        return self._table

    def log_stirling(self, n, m):
        """log S(n, m; discount); grows the cache as needed."""
        if n < 0 or m < 0 or m > n:
            raise ValueError(f"need 0 <= m <= n, got n={n}, m={m}")
        self.ensure(n, m)
        return float(self._table[n, m])

    def log_stirling_ratio(self, n, m, dn, dm):
        """log of S(n+dn, m+dm) / S(n, m) with dn, dm in {0, 1}."""
        if dn not in (0, 1) or dm not in (0, 1):
            raise ValueError("index increments must be 0 or 1")
        if m + dm > n + dn:
            raise ValueError(f"invalid target indices n={n + dn}, m={m + dm}")
        return self.log_stirling(n + dn, m + dm) - self.log_stirling(n, m)


def log_pochhammer(base, step, count):
    """log of the rising factorial prod_{i<count} (base + i*step)."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return 0.0
    factors = base + step * np.arange(count, dtype=np.float64)
    if factors[0] <= 0.0 or factors[-1] <= 0.0:
        raise ValueError(
            f"nonpositive factor in rising factorial (base={base}, step={step}, count={count})"
        )
    return float(np.sum(np.log(factors)))


def pochhammer_ratio(base, step, count):
    """Ratio of consecutive rising factorials: (base|step)_{count+1} / (base|step)_count."""
    value = base + count * step
    if value <= 0.0:
        raise ValueError("rising factorial factor must be positive")
    return value


_shared_caches = {}


def get_cache(discount):
    """Shared per-discount cache registry for callers without their own."""
    key = float(discount)
    cache = _shared_caches.get(key)
    if cache is None:
        cache = StirlingCache(key)
        _shared_caches[key] = cache
    return cache


def log_gen_stirling(n, m, discount):
    """Convenience wrapper over the shared registry."""
    return get_cache(discount).log_stirling(n, m)


def log_factorial(n):
    return math.lgamma(n + 1)
