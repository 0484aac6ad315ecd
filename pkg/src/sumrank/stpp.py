"""Triple-product-property constructions and the sum-free pipeline.

A construction is a family of subset triples (A_i, B_i, C_i) of an
abelian group satisfying the simultaneous triple product property.  From
any verified construction the pipeline builds a border tricolored
sum-free set (with explicit quadratic weight repairs), powers it up and
pigeonholes the weights away to obtain a genuine sum-free set, and
reports the packing and omega diagnostics that say how close the
construction comes to certifying fast matrix multiplication.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .fftensor import Matching3
from .groups import (
    Element,
    GroupSpec,
    check_element,
    element_add,
    element_neg,
    element_sub,
    power_element,
)
from .sumfree import BorderSumFreeSet, TricoloredSumFreeSet, verify_border

OMEGA_BISECTION_ITERATIONS = 60
DEFAULT_UNBORDER_GUARD = 200_000
DEFAULT_DISTRIBUTION_GUARD = 200_000


@dataclass(frozen=True)
class STPPConstruction:
    group: GroupSpec
    triples: tuple[tuple[tuple[Element, ...], tuple[Element, ...], tuple[Element, ...]], ...]

    def __post_init__(self):
        for a_set, b_set, c_set in self.triples:
            for part in (a_set, b_set, c_set):
                if len(set(part)) != len(part):
                    raise ValueError("subset lists must be duplicate-free")
                for e in part:
                    check_element(self.group, e)

    @property
    def products(self) -> list[int]:
        return [len(a) * len(b) * len(c) for a, b, c in self.triples]

    def to_dict(self) -> dict:
        return {
            "group": self.group.to_dict(),
            "triples": [
                {
                    "A": [list(e) for e in a],
                    "B": [list(e) for e in b],
                    "C": [list(e) for e in c],
                }
                for a, b, c in self.triples
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "STPPConstruction":
        group = GroupSpec.from_dict(data["group"])
        triples = tuple(
            (
                tuple(tuple(e) for e in t["A"]),
                tuple(tuple(e) for e in t["B"]),
                tuple(tuple(e) for e in t["C"]),
            )
            for t in data["triples"]
        )
        return cls(group, triples)


def difference_list(g: GroupSpec, left: Sequence[Element], right: Sequence[Element]) -> list[Element]:
    return [element_sub(g, a, b) for a in left for b in right]


def verify_tpp(
    g: GroupSpec,
    a_set: Sequence[Element],
    b_set: Sequence[Element],
    c_set: Sequence[Element],
) -> bool:
    """Additive triple product property: a+b+c = 0 only trivially.

    a, b, c range over the difference sets A-A, B-B, C-C.  When the
    property holds, the pairwise difference maps are injective, so
    |A-B| = |A| |B| (asserted; the packing bounds rely on it).
    """
    zero = g.zero()
    aa = set(difference_list(g, a_set, a_set))
    bb = set(difference_list(g, b_set, b_set))
    cc = set(difference_list(g, c_set, c_set))
    for a in aa:
        for b in bb:
            ab = element_add(g, a, b)
            c = element_neg(g, ab)
            if c in cc and not (a == zero and b == zero):
                return False
    for left, right in ((a_set, b_set), (b_set, c_set), (c_set, a_set)):
        diffs = difference_list(g, left, right)
        if len(set(diffs)) != len(left) * len(right):
            raise AssertionError("difference map not injective despite TPP")
    return True


def _difference_triples(c: STPPConstruction):
    """(S_i, T_i, U_i) = (A_i - B_i, B_i - C_i, C_i - A_i) as sets."""
    g = c.group
    out = []
    for a_set, b_set, c_set in c.triples:
        out.append(
            (
                set(difference_list(g, a_set, b_set)),
                set(difference_list(g, b_set, c_set)),
                set(difference_list(g, c_set, a_set)),
            )
        )
    return out


def verify_stpp(c: STPPConstruction) -> bool:
    """Every triple passes the TPP and cross sums force equal indices.

    The cross condition is checked exhaustively: s_i + t_j + u_k = 0 with
    s_i in A_i - B_i, t_j in B_j - C_j, u_k in C_k - A_k implies
    i = j = k.  It follows that the S_i (and T_i, U_i) are pairwise
    disjoint.
    """
    g = c.group
    for a_set, b_set, c_set in c.triples:
        if not verify_tpp(g, a_set, b_set, c_set):
            return False
    diffs = _difference_triples(c)
    n = len(diffs)
    for i, j, k in itertools.product(range(n), repeat=3):
        if i == j == k:
            continue
        s_set, t_set, u_set = diffs[i][0], diffs[j][1], diffs[k][2]
        for s in s_set:
            for t in t_set:
                if element_neg(g, element_add(g, s, t)) in u_set:
                    return False
    return True


@dataclass(frozen=True)
class PackingReport:
    """Packing exponents log(sum |A||B|) / log |H| and the two rotations."""

    ab: float
    bc: float
    ca: float

    def minimum(self) -> float:
        return min(self.ab, self.bc, self.ca)

    def to_dict(self) -> dict:
        return {"c_AB": self.ab, "c_BC": self.bc, "c_CA": self.ca}


def packing_report(c: STPPConstruction) -> Optional[PackingReport]:
    """Packing exponents of a verified construction; None when |H| = 1."""
    order = c.group.order
    if order == 1:
        return None
    log_h = math.log(order)
    sums = [0, 0, 0]
    for a_set, b_set, c_set in c.triples:
        sums[0] += len(a_set) * len(b_set)
        sums[1] += len(b_set) * len(c_set)
        sums[2] += len(c_set) * len(a_set)
    return PackingReport(*(math.log(s) / log_h for s in sums))


@dataclass(frozen=True)
class OmegaReport:
    """The omega diagnostics extracted from sum (|A||B||C|)^(omega/3) <= |H|.

    ``omega_bound`` is the reported bound in [2, 3]; ``raw_omega`` keeps
    the unclamped bisection value, with ``clamped`` set when it fell below
    2 and ``capped`` when even omega = 3 satisfies the inequality.
    ``omega_floor`` = 2 / (1 - eps_pack) is the barrier implied by a
    packing shortfall; ``vacuous`` marks inputs where the inequality does
    not constrain omega at all.
    """

    omega_bound: Optional[float] = None
    raw_omega: Optional[float] = None
    capped: bool = False
    clamped: bool = False
    vacuous: bool = False
    packing: Optional[PackingReport] = None
    omega_floor: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "omega_bound": self.omega_bound,
            "raw_omega": self.raw_omega,
            "capped": self.capped,
            "clamped": self.clamped,
            "vacuous": self.vacuous,
            "packing": self.packing.to_dict() if self.packing else None,
            "omega_floor": self.omega_floor,
        }


def _bisect_omega(products: Sequence[int], order: int, lo: float, hi: float) -> float:
    """Largest omega in [lo, hi] with sum p^(omega/3) <= order (LHS increasing)."""

    def lhs(omega: float) -> float:
        return sum(p ** (omega / 3.0) for p in products)

    for _ in range(OMEGA_BISECTION_ITERATIONS):
        mid = (lo + hi) / 2.0
        if lhs(mid) <= order:
            lo = mid
        else:
            hi = mid
    return lo


def omega_report(
    source: STPPConstruction | Sequence[int],
    order: Optional[int] = None,
) -> OmegaReport:
    """Omega bound by bisection, with packing floor when available.

    Accepts either a verified construction (packing diagnostics included)
    or a bare list of per-triple products |A_i||B_i||C_i| plus the group
    order.
    """
    if isinstance(source, STPPConstruction):
        products = source.products
        order = source.group.order
        packing = packing_report(source)
    else:
        products = list(source)
        if order is None:
            raise ValueError("a bare size list needs an explicit group order")
        packing = None

    floor = None
    if packing is not None:
        eps_pack = (1.0 - packing.minimum()) / 3.0
        floor = 2.0 / (1.0 - eps_pack)

    if order < 2 or all(p < 2 for p in products):
        return OmegaReport(vacuous=True, packing=packing, omega_floor=floor)

    def lhs(omega: float) -> float:
        return sum(p ** (omega / 3.0) for p in products)

    if lhs(3.0) <= order:
        return OmegaReport(
            omega_bound=3.0, raw_omega=3.0, capped=True, packing=packing, omega_floor=floor
        )
    if lhs(2.0) > order:
        raw = _bisect_omega(products, order, 0.0, 2.0) if lhs(0.0) <= order else 0.0
        return OmegaReport(
            omega_bound=2.0, raw_omega=raw, clamped=True, packing=packing, omega_floor=floor
        )
    raw = _bisect_omega(products, order, 2.0, 3.0)
    return OmegaReport(omega_bound=raw, raw_omega=raw, packing=packing, omega_floor=floor)


def border_from_stpp(c: STPPConstruction) -> BorderSumFreeSet:
    """The explicit border tricolored sum-free set of a verified construction.

    Each subset is identified with 1..|subset| in list order; r_i is the
    most frequent index sum (smallest on ties); the matching keeps the
    difference triples hitting r_i, and the quadratic weight split makes
    alpha + beta + gamma = (index sum - r_i)^2 on every zero-sum triple.
    The cardinality is checked against sum |A||B||C| / (|A|+|B|+|C|)
    exactly before returning.
    """
    if not verify_stpp(c):
        raise ValueError("construction does not satisfy the STPP")
    g = c.group
    matching: list[tuple[Element, Element, Element]] = []
    alpha: dict[Element, int] = {}
    beta: dict[Element, int] = {}
    gamma: dict[Element, int] = {}
    for a_set, b_set, c_set in c.triples:
        index_a = {a: idx + 1 for idx, a in enumerate(a_set)}
        index_b = {b: idx + 1 for idx, b in enumerate(b_set)}
        index_c = {cc: idx + 1 for idx, cc in enumerate(c_set)}
        sums: dict[int, int] = {}
        for x, y, z in itertools.product(index_a.values(), index_b.values(), index_c.values()):
            sums[x + y + z] = sums.get(x + y + z, 0) + 1
        best = max(sums.values())
        r = min(v for v, cnt in sums.items() if cnt == best)
        for a, b, cc in itertools.product(a_set, b_set, c_set):
            if index_a[a] + index_b[b] + index_c[cc] != r:
                continue
            s = element_sub(g, a, b)
            t = element_sub(g, b, cc)
            u = element_sub(g, cc, a)
            matching.append((s, t, u))
            for store, key, value in (
                (alpha, s, index_a[a] ** 2 + 2 * index_a[a] * index_b[b] - 2 * index_a[a] * r + r * r),
                (beta, t, index_b[b] ** 2 + 2 * index_b[b] * index_c[cc] - 2 * index_b[b] * r),
                (gamma, u, index_c[cc] ** 2 + 2 * index_c[cc] * index_a[a] - 2 * index_c[cc] * r),
            ):
                if key in store and store[key] != value:
                    raise AssertionError("weight functions must be single-valued")
                store[key] = value
    border = BorderSumFreeSet(g, Matching3(tuple(matching)), alpha, beta, gamma)
    promised = sum(
        Fraction(len(a) * len(b) * len(cc), len(a) + len(b) + len(cc))
        for a, b, cc in c.triples
    )
    if Fraction(border.cardinality) < promised:
        raise AssertionError(
            f"matching of size {border.cardinality} misses the promised {promised}"
        )
    return border


def unborder(
    b: BorderSumFreeSet, n: int, guard: int = DEFAULT_UNBORDER_GUARD
) -> TricoloredSumFreeSet:
    """A genuine sum-free set in the n-th power group, by weight pigeonhole.

    The n-fold power matching carries additive weights; the most frequent
    weight triple (lexicographically least on ties) retains at least a
    1/(2nt+1)^3 fraction of the |M|^n triples, and constant weights drop
    out of the border conditions entirely.
    """
    ok, violation = verify_border(b)
    if not ok:
        raise ValueError(f"border set fails verification at {violation}")
    size = b.cardinality
    if size**n > guard:
        raise ValueError(f"|M|^n = {size**n} exceeds the materialization guard {guard}")
    g = b.group
    power_group = g.power(n)
    buckets: dict[tuple[int, int, int], list] = {}
    for combo in itertools.product(b.matching.triples, repeat=n):
        s = power_element(g, [tr[0] for tr in combo])
        t = power_element(g, [tr[1] for tr in combo])
        u = power_element(g, [tr[2] for tr in combo])
        signature = (
            sum(b.alpha[tr[0]] for tr in combo),
            sum(b.beta[tr[1]] for tr in combo),
            sum(b.gamma[tr[2]] for tr in combo),
        )
        buckets.setdefault(signature, []).append((s, t, u))
    best_count = max(len(v) for v in buckets.values())
    signature = min(k for k, v in buckets.items() if len(v) == best_count)
    kept = buckets[signature]
    t_range = b.weight_range
    denominator = (2 * n * t_range + 1) ** 3
    promised = -(-(size**n) // denominator)  # ceil
    if len(kept) < promised:
        raise AssertionError("pigeonhole selection fell short of its guarantee")
    return TricoloredSumFreeSet(power_group, Matching3(tuple(sorted(kept))))


# ---------------------------------------------------------------------------
# uniformization
# ---------------------------------------------------------------------------


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`, lex order."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def _multinomial(counts: Sequence[int]) -> int:
    total = sum(counts)
    out = math.factorial(total)
    for c in counts:
        out //= math.factorial(c)
    return out


@dataclass(frozen=True)
class SymbolicSTPP:
    """A uniform power construction held symbolically.

    The subsets of the 3N-th power group indexed by (u, v, w) with the
    selected distributions all share the same exact sizes, which are
    stored without ever materializing the sets; ``sampler`` draws explicit
    members on demand.
    """

    base: STPPConstruction
    power: int
    mu1: tuple[int, ...]
    mu2: tuple[int, ...]
    mu3: tuple[int, ...]
    size_a: int
    size_b: int
    size_c: int
    restricted_sums: tuple[int, int, int]
    loss_factor: int

    @property
    def power_group(self) -> GroupSpec:
        return self.base.group.power(3 * self.power)

    def representative_index(self, mu: tuple[int, ...]) -> tuple[int, ...]:
        out = []
        for i, count in enumerate(mu):
            out.extend([i] * count)
        return tuple(out)

    def sample_index(self, mu: tuple[int, ...], rng: random.Random) -> tuple[int, ...]:
        idx = list(self.representative_index(mu))
        rng.shuffle(idx)
        return tuple(idx)

    def sample_member(
        self,
        kind: str,
        u: tuple[int, ...],
        v: tuple[int, ...],
        w: tuple[int, ...],
        rng: random.Random,
    ) -> Element:
        """A uniformly random element of the indexed hat-subset.

        kind "A" draws from prod A_u x prod B_v x prod C_w; "B" and "C"
        rotate the roles, matching the square construction.
        """
        rotation = {"A": (0, 1, 2), "B": (1, 2, 0), "C": (2, 0, 1)}[kind]
        parts: list[Element] = []
        for role, index_tuple in zip(rotation, (u, v, w)):
            for i in index_tuple:
                subset = self.base.triples[i][role]
                parts.append(rng.choice(subset))
        return power_element(self.base.group, parts)

    def to_dict(self) -> dict:
        return {
            "power": self.power,
            "mu1": list(self.mu1),
            "mu2": list(self.mu2),
            "mu3": list(self.mu3),
            "size_A": self.size_a,
            "size_B": self.size_b,
            "size_C": self.size_c,
            "restricted_sums": list(self.restricted_sums),
            "loss_factor": self.loss_factor,
            "power_group": self.power_group.to_dict(),
        }


def uniformize(
    c: STPPConstruction, n_power: int, guard: int = DEFAULT_DISTRIBUTION_GUARD
) -> SymbolicSTPP:
    """Select index distributions making the power construction uniform.

    Among all distributions of N indices over the base triples, each of
    the three restricted packing sums factorizes as (number of index
    words) * (product of per-triple contributions), so the three maxima
    are found independently and their product dominates the unrestricted
    sum divided by (N+1)^(3n).  Sizes come out exactly, as big integers.
    """
    if not verify_stpp(c):
        raise ValueError("construction does not satisfy the STPP")
    n = len(c.triples)
    if n == 0:
        raise ValueError("construction has no triples")
    if (n_power + 1) ** n > guard:
        raise ValueError(
            f"distribution count (N+1)^n = {(n_power + 1) ** n} exceeds the guard {guard}"
        )
    sizes = [(len(a), len(b), len(cc)) for a, b, cc in c.triples]

    def restricted_sum(mu: tuple[int, ...], pick) -> int:
        value = _multinomial(mu)
        for i, count in enumerate(mu):
            value *= pick(sizes[i]) ** count
        return value

    best = {}
    for key, pick in (
        ("ab", lambda s: s[0] * s[1]),
        ("bc", lambda s: s[1] * s[2]),
        ("ca", lambda s: s[2] * s[0]),
    ):
        best_mu, best_value = None, -1
        for mu in _compositions(n_power, n):
            value = restricted_sum(mu, pick)
            if value > best_value:
                best_mu, best_value = mu, value
        best[key] = (best_mu, best_value)

    mu1, sum_ab = best["ab"]
    mu2, sum_bc = best["bc"]
    mu3, sum_ca = best["ca"]

    def hat_size(r1: int, r2: int, r3: int) -> int:
        # role indices into (|A_i|, |B_i|, |C_i|) for the three blocks
        value = 1
        for mu, role in ((mu1, r1), (mu2, r2), (mu3, r3)):
            for i, count in enumerate(mu):
                value *= sizes[i][role] ** count
        return value

    return SymbolicSTPP(
        base=c,
        power=n_power,
        mu1=mu1,
        mu2=mu2,
        mu3=mu3,
        size_a=hat_size(0, 1, 2),
        size_b=hat_size(1, 2, 0),
        size_c=hat_size(2, 0, 1),
        restricted_sums=(sum_ab, sum_bc, sum_ca),
        loss_factor=(n_power + 1) ** (3 * n),
    )


# ---------------------------------------------------------------------------
# seeded search for verified constructions
# ---------------------------------------------------------------------------


def random_stpp(
    g: GroupSpec,
    rng: random.Random,
    n_triples: int = 1,
    max_size: int = 2,
    attempts: int = 300,
) -> Optional[STPPConstruction]:
    """A verified construction found by seeded rejection sampling, or None."""
    elems = list(g.elements())
    for _ in range(attempts):
        triples = []
        for _ in range(n_triples):
            subsets = []
            for _ in range(3):
                size = rng.randint(1, min(max_size, len(elems)))
                subsets.append(tuple(rng.sample(elems, size)))
            triples.append(tuple(subsets))
        candidate = STPPConstruction(g, tuple(triples))
        if any(p > 1 for p in candidate.products) and verify_stpp(candidate):
            return candidate
    return None


def collect_stpp_instances(
    groups: Iterable[GroupSpec],
    count: int,
    seed: int = 0,
    max_size: int = 2,
    attempts: int = 300,
) -> list[STPPConstruction]:
    """Deterministically collect verified constructions across groups.

    Cycles through the groups with one and two triples until `count`
    distinct instances have been found; raises if the search stalls.
    """
    rng = random.Random(seed)
    found: list[STPPConstruction] = []
    seen: set = set()
    group_list = list(groups)
    stale = 0
    while len(found) < count:
        for g in group_list:
            for n_triples in (1, 2):
                candidate = random_stpp(
                    g, rng, n_triples=n_triples, max_size=max_size, attempts=attempts
                )
                if candidate is None:
                    continue
                key = (str(candidate.group), candidate.triples)
                if key in seen:
                    continue
                seen.add(key)
                found.append(candidate)
                stale = 0
                if len(found) == count:
                    return found
        stale += 1
        if stale > 50:
            raise RuntimeError(
                f"STPP search stalled after finding {len(found)} of {count} instances"
            )
    return found
