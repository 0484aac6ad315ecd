"""Tricolored sum-free sets, their border relaxation, and exhaustive search.

A tricolored sum-free set is a 3-dimensional perfect matching M on sets
S, T, U in an abelian group with s+t+u = 0 exactly on M.  The border
variant allows off-matching zero-sum triples as long as integer weights
alpha+beta+gamma are strictly positive there and zero on M.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .fftensor import Matching3
from .groups import (
    Element,
    GroupSpec,
    check_element,
    element_add,
    element_neg,
    is_prime_power,
    largest_primary_block,
)
from .rates import constants, rate_J

DEFAULT_EXHAUSTIVE_GUARD = 9


@dataclass(frozen=True)
class TricoloredSumFreeSet:
    group: GroupSpec
    matching: Matching3

    def __post_init__(self):
        for triple in self.matching.triples:
            for e in triple:
                check_element(self.group, e)

    @property
    def cardinality(self) -> int:
        return len(self.matching)

    def to_dict(self) -> dict:
        return {
            "group": self.group.to_dict(),
            "matching": [[list(s), list(t), list(u)] for s, t, u in self.matching.triples],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TricoloredSumFreeSet":
        group = GroupSpec.from_dict(data["group"])
        triples = tuple(
            (tuple(s), tuple(t), tuple(u)) for s, t, u in data["matching"]
        )
        return cls(group, Matching3(triples))


def _element_key(e: Element) -> str:
    return ",".join(str(int(v)) for v in e)


def _element_from_key(key: str) -> Element:
    if key == "":
        return ()
    return tuple(int(v) for v in key.split(","))


@dataclass(frozen=True)
class BorderSumFreeSet:
    """A matching with integer weights repairing off-matching zero sums."""

    group: GroupSpec
    matching: Matching3
    alpha: dict[Element, int]
    beta: dict[Element, int]
    gamma: dict[Element, int]

    def __post_init__(self):
        s, t, u = self.matching.projections()
        for name, keys, weights in (
            ("alpha", s, self.alpha),
            ("beta", t, self.beta),
            ("gamma", u, self.gamma),
        ):
            if set(keys) != set(weights):
                raise ValueError(f"{name} must be defined exactly on its projection")

    @property
    def cardinality(self) -> int:
        return len(self.matching)

    @property
    def weight_range(self) -> int:
        """Maximum absolute weight across the three functions."""
        values = (
            list(self.alpha.values()) + list(self.beta.values()) + list(self.gamma.values())
        )
        return max((abs(v) for v in values), default=0)

    def to_dict(self) -> dict:
        base = TricoloredSumFreeSet(self.group, self.matching).to_dict()
        base["alpha"] = {_element_key(e): w for e, w in sorted(self.alpha.items())}
        base["beta"] = {_element_key(e): w for e, w in sorted(self.beta.items())}
        base["gamma"] = {_element_key(e): w for e, w in sorted(self.gamma.items())}
        return base

    @classmethod
    def from_dict(cls, data: dict) -> "BorderSumFreeSet":
        plain = TricoloredSumFreeSet.from_dict(data)
        return cls(
            plain.group,
            plain.matching,
            {_element_from_key(k): int(w) for k, w in data["alpha"].items()},
            {_element_from_key(k): int(w) for k, w in data["beta"].items()},
            {_element_from_key(k): int(w) for k, w in data["gamma"].items()},
        )


Violation = tuple[Element, Element, Element]


def verify_sumfree(s: TricoloredSumFreeSet) -> tuple[bool, Optional[Violation]]:
    """Exhaustive check of both matching conditions over all of S x T x U.

    For a fixed pair (s, t) the only third coordinates that can violate
    anything are the matched partner and -(s+t), so the scan is quadratic
    while deciding exactly the cubic condition.  Returns (True, None) or
    (False, first violating triple in lexicographic order); a malformed
    matching is rejected by Matching3 itself.
    """
    g = s.group
    partner = {tr[0]: (tr[1], tr[2]) for tr in s.matching.triples}
    _, tt, uu = s.matching.projections()
    u_set = set(uu)
    for a in sorted(partner):
        t_a, u_a = partner[a]
        for b in sorted(tt):
            bad = []
            sum_ab = element_add(g, a, b)
            c = element_neg(g, sum_ab)
            if b == t_a and element_add(g, sum_ab, u_a) != g.zero():
                bad.append(u_a)
            if c in u_set and not (b == t_a and c == u_a):
                bad.append(c)
            if bad:
                return False, (a, b, min(bad))
    return True, None


def verify_border(b: BorderSumFreeSet) -> tuple[bool, Optional[Violation]]:
    """Check the on-matching equalities and the off-matching disjunction.

    Same quadratic scan as :func:`verify_sumfree`: zero-sum triples off
    the matching must have strictly positive weight sum, matched triples
    must sum to zero in both the group and the weights.
    """
    g = b.group
    partner = {tr[0]: (tr[1], tr[2]) for tr in b.matching.triples}
    _, tt, uu = b.matching.projections()
    u_set = set(uu)
    for s in sorted(partner):
        t_s, u_s = partner[s]
        for t in sorted(tt):
            bad = []
            sum_st = element_add(g, s, t)
            c = element_neg(g, sum_st)
            if t == t_s and (
                element_add(g, sum_st, u_s) != g.zero()
                or b.alpha[s] + b.beta[t] + b.gamma[u_s] != 0
            ):
                bad.append(u_s)
            if (
                c in u_set
                and not (t == t_s and c == u_s)
                and b.alpha[s] + b.beta[t] + b.gamma[c] <= 0
            ):
                bad.append(c)
            if bad:
                return False, (s, t, min(bad))
    return True, None


def _zero_sum_triples(g: GroupSpec) -> list[tuple[Element, Element, Element]]:
    elems = list(g.elements())
    return [
        (s, t, element_neg(g, element_add(g, s, t)))
        for s in elems
        for t in elems
    ]


def _compatible(
    triple, chosen, s_used, t_used, u_used, g: GroupSpec
) -> bool:
    """Can triple extend the partial matching without breaking conditions?

    New off-matching combinations come from mixing the new triple's
    coordinates with the existing ones; each mixed zero-sum triple that is
    not itself in the matching is a violation.
    """
    s, t, u = triple
    if s in s_used or t in t_used or u in u_used:
        return False
    new_set = chosen + [triple]
    ss = [c[0] for c in new_set]
    tt = [c[1] for c in new_set]
    uu = [c[2] for c in new_set]
    members = set(new_set)
    for a in ss:
        for b in tt:
            c = element_neg(g, element_add(g, a, b))
            if c in u_used or c == u:
                if (a, b, c) not in members:
                    return False
    return True


def max_sumfree_exhaustive(
    g: GroupSpec,
    limit: int = DEFAULT_EXHAUSTIVE_GUARD,
    threads: int = 1,
) -> tuple[int, Matching3]:
    """Maximum cardinality of a tricolored sum-free set, by branch and bound.

    Candidates are explored in lexicographic order of sorted triples, so
    the witness is the lexicographically least maximum matching.  The
    guard keeps this to small groups; matching enumeration grows
    super-exponentially.
    """
    if g.order > limit:
        raise ValueError(f"group order {g.order} exceeds the exhaustive guard {limit}")
    candidates = sorted(_zero_sum_triples(g))

    def extend(chosen, start, s_used, t_used, u_used, best):
        size, witness = best
        if len(chosen) > size:
            size, witness = len(chosen), tuple(chosen)
        remaining_s = {
            candidates[i][0]
            for i in range(start, len(candidates))
            if candidates[i][0] not in s_used
        }
        if len(chosen) + len(remaining_s) <= size:
            return size, witness
        for i in range(start, len(candidates)):
            triple = candidates[i]
            if _compatible(triple, chosen, s_used, t_used, u_used, g):
                s, t, u = triple
                size, witness = extend(
                    chosen + [triple],
                    i + 1,
                    s_used | {s},
                    t_used | {t},
                    u_used | {u},
                    (size, witness),
                )
        return size, witness

    if threads <= 1:
        size, witness = extend([], 0, set(), set(), set(), (0, ()))
    else:
        # Partition on the first triple; merge picks the largest size and,
        # on ties, the lexicographically least witness, so the result does
        # not depend on the thread count.
        def branch(i):
            triple = candidates[i]
            if not _compatible(triple, [], set(), set(), set(), g):
                return (0, ())
            s, t, u = triple
            return extend([triple], i + 1, {s}, {t}, {u}, (0, ()))

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(branch, range(len(candidates))))
        size, witness = 0, ()
        for cand_size, cand_witness in results:
            if cand_size > size or (
                cand_size == size and cand_witness and (not witness or cand_witness < witness)
            ):
                size, witness = cand_size, cand_witness
    return size, Matching3(witness)


@dataclass(frozen=True)
class SizeBounds:
    """Upper bounds on tricolored sum-free sets in a group.

    ``exponent_bound`` uses the group exponent m: 3 |H|^(1 - eps/m).
    ``uniform_power_bound`` applies only when the group is (Z/qZ)^n for a
    prime power q: 3 |H|^(1 - delta/log q).  ``primary_block_bound`` uses
    the largest primary block (q, n): 3 |H| J(q)^n.
    """

    exponent_bound: float
    uniform_power_bound: Optional[float]
    primary_block_bound: Optional[float]

    def applicable(self) -> list[float]:
        return [
            b
            for b in (self.exponent_bound, self.uniform_power_bound, self.primary_block_bound)
            if b is not None
        ]

    def to_dict(self) -> dict:
        return {
            "exponent_bound": self.exponent_bound,
            "uniform_power_bound": self.uniform_power_bound,
            "primary_block_bound": self.primary_block_bound,
        }


def size_bounds(g: GroupSpec) -> SizeBounds:
    """Evaluate the three upper bounds for a given group."""
    consts = constants()
    order = g.order
    m = g.exponent
    exponent_bound = 3.0 * order ** (1.0 - consts["epsilon"] / m)

    uniform = None
    if len(g.factors) == 1:
        q, _ = g.factors[0]
        if is_prime_power(q):
            uniform = 3.0 * order ** (1.0 - consts["delta"] / math.log(q))

    block = None
    if order > 1:
        q, n = largest_primary_block(g)
        block = 3.0 * order * rate_J(q).value ** n

    return SizeBounds(
        exponent_bound=exponent_bound,
        uniform_power_bound=uniform,
        primary_block_bound=block,
    )


def progression_free_matching(g: GroupSpec, elements) -> TricoloredSumFreeSet:
    """The matching {(s, s, -2s)} attached to a progression-free set."""
    triples = tuple(
        (s, s, element_neg(g, element_add(g, s, s))) for s in elements
    )
    return TricoloredSumFreeSet(g, Matching3(triples))
