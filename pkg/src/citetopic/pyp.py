"""Collapsed representation of a single Pitman-Yor / GEM probability vector.

Instead of storing seating arrangements, each node keeps only customer
counts c_k and table counts t_k; table counts are the portion of c_k
forwarded up the hierarchy as customers of the parent node.  Increments
sample a Bernoulli "opened a new table" indicator per level; decrements
reverse one step of the sequential seating process.
"""

from dataclasses import dataclass

import math

from . import stirling

PYP = "pyp"
GEM = "gem"
UNIFORM_BASE = "uniform"


@dataclass
class PypParams:
    discount: float
    concentration: float

    def __post_init__(self):
        if not 0.0 <= self.discount < 1.0:
            raise ValueError(f"discount must be in [0, 1), got {self.discount}")
        if self.concentration <= 0.0:
            raise ValueError(
                f"concentration must be positive, got {self.concentration}"
            )


class PypNode:
    """One probability vector in collapsed (customer/table count) form.

    kind PYP draws from a parent node; kind GEM is a root over an
    unbounded ordered label set (tables are capped at one per label);
    kind UNIFORM_BASE is a fixed uniform vector over ``base_size``
    outcomes that terminates the hierarchy on the vocabulary side.
    """

    def __init__(self, params=None, kind=PYP, parent=None, base_size=None,
                 cache=None, name=None):
        self.kind = kind
        self.name = name or kind
        if kind == UNIFORM_BASE:
            if base_size is None or base_size < 1:
                raise ValueError("uniform base needs a positive base_size")
            self.params = None
            self.parent = None
            self.base_size = int(base_size)
            self.cache = None
        else:
            if params is None:
                raise ValueError(f"{kind} node needs PypParams")
            if kind == GEM and parent is not None:
                raise ValueError("GEM node is a root and takes no parent")
            self.params = params
            self.parent = parent
            self.base_size = None
            self.cache = cache or stirling.get_cache(params.discount)
        self.c = {}
        self.t = {}
        self.C = 0
        self.T = 0

    # -- likelihood ----------------------------------------------------

    def log_marginal(self):
        if self.kind == UNIFORM_BASE:
            return -self.C * math.log(self.base_size)
        p = self.params
        total = stirling.log_pochhammer(p.concentration, p.discount, self.T)
        total -= stirling.log_pochhammer(p.concentration, 1.0, self.C)
        for k, ck in self.c.items():
            total += self.cache.log_stirling(ck, self.t.get(k, 0))
        return total

    def estimate_probability(self):
        """Probability vector recovered from the counts (dict over keys).

        A PYP node blends its counts with the parent estimate; the GEM
        root spreads its unborn-label remainder mass proportionally over
        the labels already in use, so the result always sums to one.
        """
        if self.kind == UNIFORM_BASE:
            u = 1.0 / self.base_size
            return {v: u for v in range(self.base_size)}
        p = self.params
        if self.kind == GEM:
            weights = {k: ck - p.discount * self.t[k] for k, ck in self.c.items() if ck > 0}
            total = sum(weights.values())
            if total <= 0.0:
                return {}
            return {k: w / total for k, w in weights.items()}
        parent_probs = self.parent.estimate_probability()
        denom = p.concentration + self.C
        scale = p.discount * self.T + p.concentration
        out = {}
        for k in set(parent_probs) | set(self.c):
            out[k] = (
                scale * parent_probs.get(k, 0.0)
                + self.c.get(k, 0) - p.discount * self.t.get(k, 0)
            ) / denom
        return out

    # -- increments ----------------------------------------------------

    def _base_prob(self, k):
        if self.kind == UNIFORM_BASE:
            return 1.0 / self.base_size
        raise TypeError("only uniform bases provide a fixed atom probability")

    def _weights(self, k):
        """(join-existing-table weight, open-new-table weight sans parent)."""
        p = self.params
        ck = self.c.get(k, 0)
        tk = self.t.get(k, 0)
        denom = p.concentration + self.C
        if self.kind == GEM:
            if ck > 0:
                join = math.exp(self.cache.log_stirling_ratio(ck, 1, 1, 0)) / denom
                return join, 0.0
            return 0.0, (p.concentration + p.discount * self.T) / denom
        if ck > 0:
            join = math.exp(self.cache.log_stirling_ratio(ck, tk, 1, 0)) / denom
            new = (p.concentration + p.discount * self.T) * math.exp(
                self.cache.log_stirling_ratio(ck, tk, 1, 1)
            ) / denom
        else:
            join = 0.0
            new = (p.concentration + p.discount * self.T) / denom
        return join, new

    def add_weight(self, k):
        """Total blocked probability weight of seating one customer at k."""
        if self.kind == UNIFORM_BASE:
            return self._base_prob(k)
        join, new = self._weights(k)
        if self.kind == GEM:
            return join + new  # new-label base weight is 1
        return join + new * self.parent.add_weight(k)

    def add_customer(self, k, rng):
        """Seat one customer at k, sampling table indicators up the chain.

        Returns the list of opened_new_table booleans, one per level
        reached (the chain stops at the first False or at the root).
        """
        if self.kind == UNIFORM_BASE:
            raise TypeError("cannot seat customers directly at a uniform base")
        join, new = self._weights(k)
        if self.kind == GEM:
            opened = self.c.get(k, 0) == 0
            self.c[k] = self.c.get(k, 0) + 1
            self.C += 1
            if opened:
                self.t[k] = 1
                self.T += 1
            return [opened]
        parent_is_base = self.parent.kind == UNIFORM_BASE
        up = new * (self.parent.add_weight(k))
        total = join + up
        if total <= 0.0:
            raise RuntimeError(f"zero seating weight at {self.name} for {k}")
        opened = rng.random() * total < up
        self.c[k] = self.c.get(k, 0) + 1
        self.C += 1
        if not opened:
            return [False]
        self.t[k] = self.t.get(k, 0) + 1
        self.T += 1
        if parent_is_base:
            self.parent.c[k] = self.parent.c.get(k, 0) + 1
            self.parent.C += 1
            return [True]
        return [True] + self.parent.add_customer(k, rng)

    def remove_customer(self, k, rng):
        """Unseat one customer at k, reversing one sequential seating step.

        The table is removed with the exact posterior probability that
        the departing customer was a table opener,
        S(c-1, t-1) / S(c, t), which keeps t >= 1 whenever c >= 1 and
        makes add/remove pairs distribution-preserving.
        """
        if self.kind == UNIFORM_BASE:
            raise TypeError("cannot unseat customers directly at a uniform base")
        ck = self.c.get(k, 0)
        if ck < 1:
            raise ValueError(f"no customer to remove at {self.name} for {k}")
        tk = self.t[k]
        if self.kind == GEM:
            drop_table = ck == 1
        elif ck == 1:
            drop_table = True
        else:
            p_open = math.exp(
                self.cache.log_stirling(ck - 1, tk - 1)
                - self.cache.log_stirling(ck, tk)
            )
            drop_table = rng.random() < p_open
        if ck == 1:
            del self.c[k]
        else:
            self.c[k] = ck - 1
        self.C -= 1
        if not drop_table:
            return [False]
        if tk == 1:
            del self.t[k]
        else:
            self.t[k] = tk - 1
        self.T -= 1
        if self.kind == GEM or self.parent is None:
            return [True]
        if self.parent.kind == UNIFORM_BASE:
            self.parent.c[k] -= 1
            if self.parent.c[k] == 0:
                del self.parent.c[k]
            self.parent.C -= 1
            return [True]
        return [True] + self.parent.remove_customer(k, rng)


def consistency_check(nodes):
    """Verify count invariants across a collection of linked nodes.

    Returns a list of human-readable violation strings; an empty list
    means the state is healthy.
    """
    nodes = list(nodes)
    problems = []
    children = {}
    for node in nodes:
        if node.parent is not None:
            children.setdefault(id(node.parent), []).append(node)
    for node in nodes:
        if node.kind == UNIFORM_BASE:
            continue
        if node.C != sum(node.c.values()):
            problems.append(f"{node.name}: stored C {node.C} != sum(c)")
        if node.T != sum(node.t.values()):
            problems.append(f"{node.name}: stored T {node.T} != sum(t)")
        for k, ck in node.c.items():
            tk = node.t.get(k, 0)
            if ck < 0 or tk < 0:
                problems.append(f"{node.name}: negative count at {k}")
            if tk > ck:
                problems.append(f"{node.name}: t={tk} > c={ck} at {k}")
            if ck >= 1 and tk < 1:
                problems.append(f"{node.name}: c={ck} but no table at {k}")
            if node.kind == GEM and tk > 1:
                problems.append(f"{node.name}: GEM table count {tk} > 1 at {k}")
        for k, tk in node.t.items():
            if k not in node.c and tk != 0:
                problems.append(f"{node.name}: table without customers at {k}")
    for node in nodes:
        kids = children.get(id(node), [])
        if not kids:
            continue
        keys = set()
        for kid in kids:
            keys |= set(kid.t)
        if node.kind == UNIFORM_BASE:
            expected = {k: sum(kid.t.get(k, 0) for kid in kids) for k in keys}
            for k, v in expected.items():
                if node.c.get(k, 0) != v:
                    problems.append(
                        f"{node.name}: customers at {k} != child tables ({node.c.get(k, 0)} vs {v})"
                    )
            continue
        for k in keys | set(node.c):
            inherited = sum(kid.t.get(k, 0) for kid in kids)
            extra = getattr(node, "external_customers", {}).get(k, 0)
            if node.c.get(k, 0) != inherited + extra:
                problems.append(
                    f"{node.name}: customers at {k} ({node.c.get(k, 0)}) != "
                    f"child tables + external ({inherited + extra})"
                )
    return problems
