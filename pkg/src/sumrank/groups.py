"""Finite abelian groups presented as products of cyclic groups.

A group is described by a :class:`GroupSpec`; elements are plain tuples of
residues, one per cyclic coordinate, so they double as axis labels for the
tensors in :mod:`sumrank.fftensor`.  All orders and counts are exact
(arbitrary-precision) integers: power constructions overflow 64 bits fast.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

Element = tuple[int, ...]

_FACTOR_RE = re.compile(r"^Z(\d+)(?:\^(\d+))?$", re.IGNORECASE)


def _factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n as a list of (prime, exponent)."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def prime_power_base(q: int) -> Optional[int]:
    """The prime p with q = p^r, or None if q is not a prime power."""
    if q < 2:
        return None
    fac = _factorize(q)
    return fac[0][0] if len(fac) == 1 else None


def is_prime_power(q: int) -> bool:
    return prime_power_base(q) is not None


@dataclass(frozen=True)
class GroupSpec:
    """A finite abelian group as a product of cyclic factors.

    ``factors`` is a sequence of (modulus, multiplicity) pairs.  The stored
    form is canonical: sorted by modulus, same-modulus factors merged, zero
    multiplicities dropped.  Two specs are equal iff their canonical forms
    are equal.
    """

    factors: tuple[tuple[int, int], ...]

    def __init__(self, factors: Sequence[tuple[int, int]]):
        merged: dict[int, int] = {}
        for modulus, mult in factors:
            if modulus < 2:
                raise ValueError(f"cyclic modulus must be >= 2, got {modulus}")
            if mult < 0:
                raise ValueError(f"multiplicity must be >= 0, got {mult}")
            if mult:
                merged[modulus] = merged.get(modulus, 0) + mult
        canon = tuple(sorted(merged.items()))
        object.__setattr__(self, "factors", canon)

    @property
    def order(self) -> int:
        n = 1
        for modulus, mult in self.factors:
            n *= modulus**mult
        return n

    @property
    def coordinates(self) -> tuple[int, ...]:
        """Moduli of the cyclic coordinates, one entry per coordinate."""
        out = []
        for modulus, mult in self.factors:
            out.extend([modulus] * mult)
        return tuple(out)

    @property
    def exponent(self) -> int:
        """lcm of the orders of all elements (1 for the trivial group)."""
        return math.lcm(1, *(m for m, _ in self.factors))

    def zero(self) -> Element:
        return (0,) * len(self.coordinates)

    def contains(self, x: Element) -> bool:
        coords = self.coordinates
        return len(x) == len(coords) and all(
            0 <= r < m for r, m in zip(x, coords)
        )

    def elements(self) -> Iterator[Element]:
        """All elements in lexicographic order of residue vectors."""
        return itertools.product(*(range(m) for m in self.coordinates))

    def power(self, n: int) -> "GroupSpec":
        """The n-th direct power of this group."""
        if n < 0:
            raise ValueError("power must be >= 0")
        return GroupSpec([(m, k * n) for m, k in self.factors])

    def __str__(self) -> str:
        if not self.factors:
            return "Z1^0"
        return " x ".join(
            f"Z{m}^{k}" if k > 1 else f"Z{m}" for m, k in self.factors
        )

    def to_dict(self) -> dict:
        return {"factors": [[m, k] for m, k in self.factors]}

    @classmethod
    def from_dict(cls, data: dict) -> "GroupSpec":
        return cls([(int(m), int(k)) for m, k in data["factors"]])


def parse_group_spec(text: str) -> GroupSpec:
    """Parse a spec like ``"Z3^4"`` or ``"Z2 x Z4 x Z3"``.

    Raises ValueError on syntax errors or a modulus below 2.
    """
    parts = [p.strip() for p in text.split("x")]
    factors = []
    for part in parts:
        m = _FACTOR_RE.match(part)
        if not m:
            raise ValueError(f"cannot parse group factor {part!r}")
        modulus = int(m.group(1))
        mult = int(m.group(2)) if m.group(2) else 1
        if modulus < 2:
            raise ValueError(f"cyclic modulus must be >= 2, got Z{modulus}")
        factors.append((modulus, mult))
    return GroupSpec(factors)


def check_element(g: GroupSpec, x: Element) -> None:
    if not g.contains(tuple(x)):
        raise ValueError(f"element {x!r} does not conform to {g}")


def element_add(g: GroupSpec, x: Element, y: Element) -> Element:
    coords = g.coordinates
    if len(x) != len(coords) or len(y) != len(coords):
        raise ValueError("element shape does not match group")
    return tuple((a + b) % m for a, b, m in zip(x, y, coords))


def element_neg(g: GroupSpec, x: Element) -> Element:
    coords = g.coordinates
    if len(x) != len(coords):
        raise ValueError("element shape does not match group")
    return tuple((-a) % m for a, m in zip(x, coords))


def element_sub(g: GroupSpec, x: Element, y: Element) -> Element:
    return element_add(g, x, element_neg(g, y))


@dataclass(frozen=True)
class PrimaryDecomposition:
    """Chinese-remainder splitting of a group into prime-power blocks.

    ``blocks`` lists (prime power q, multiplicity n) sorted by the
    underlying prime, then by q.  ``spec`` is the isomorphic product of
    the prime-power cyclic groups; ``coordinate_map[j]`` gives, for the
    j-th source coordinate, its target coordinate positions together with
    their prime-power moduli, so elements can be transported exactly.
    """

    source: GroupSpec
    blocks: tuple[tuple[int, int], ...]
    spec: GroupSpec
    coordinate_map: tuple[tuple[tuple[int, int], ...], ...]

    def to_primary(self, x: Element) -> Element:
        check_element(self.source, x)
        out = [0] * len(self.spec.coordinates)
        for j, targets in enumerate(self.coordinate_map):
            for pos, q in targets:
                out[pos] = x[j] % q
        return tuple(out)

    def from_primary(self, y: Element) -> Element:
        check_element(self.spec, y)
        coords = self.source.coordinates
        out = []
        for j, targets in enumerate(self.coordinate_map):
            m = coords[j]
            residue = 0
            for pos, q in targets:
                # CRT: the q are pairwise coprime prime powers with product m.
                rest = m // q
                residue += y[pos] * rest * pow(rest, -1, q)
            out.append(residue % m)
        return tuple(out)


def crt_primary_decomposition(g: GroupSpec) -> PrimaryDecomposition:
    """Split every cyclic coordinate into coprime prime-power coordinates."""
    coords = g.coordinates
    # (q, source j) pairs for every prime-power part of every coordinate.
    parts: list[tuple[int, int]] = []
    for j, m in enumerate(coords):
        for p, e in _factorize(m):
            parts.append((p**e, j))
    # Target coordinate order must agree with the canonical expansion of
    # the primary spec, i.e. ascending q; ties keep source order.
    parts.sort()
    block_counts: dict[int, int] = {}
    for q, _ in parts:
        block_counts[q] = block_counts.get(q, 0) + 1
    spec = GroupSpec(list(block_counts.items())) if parts else GroupSpec([])
    cmap: list[list[tuple[int, int]]] = [[] for _ in coords]
    for pos, (q, j) in enumerate(parts):
        cmap[j].append((pos, q))
    blocks = tuple(
        sorted(block_counts.items(), key=lambda qn: (_factorize(qn[0])[0][0], qn[0]))
    )
    return PrimaryDecomposition(
        source=g,
        blocks=blocks,
        spec=spec,
        coordinate_map=tuple(tuple(t) for t in cmap),
    )


def largest_primary_block(g: GroupSpec) -> tuple[int, int]:
    """The prime-power block (q, n) with the largest multiplicity.

    Ties are broken by the smallest q.  Raises on the trivial group.
    """
    blocks = crt_primary_decomposition(g).blocks
    if not blocks:
        raise ValueError("trivial group has no primary blocks")
    return max(blocks, key=lambda qn: (qn[1], -qn[0]))


def power_element(g: GroupSpec, parts: Sequence[Element]) -> Element:
    """Assemble an element of ``g.power(len(parts))`` from elements of g.

    Coordinate layout: position ``j*N + i`` of the power element carries
    coordinate j of part i, which matches the canonical coordinate order
    of the power spec.
    """
    n = len(parts)
    d = len(g.coordinates)
    out = [0] * (d * n)
    for i, x in enumerate(parts):
        check_element(g, x)
        for j in range(d):
            out[j * n + i] = x[j]
    return tuple(out)


def split_power_element(g: GroupSpec, n: int, x: Element) -> tuple[Element, ...]:
    """Inverse of :func:`power_element`."""
    d = len(g.coordinates)
    if len(x) != d * n:
        raise ValueError("element shape does not match power group")
    return tuple(tuple(x[j * n + i] for j in range(d)) for i in range(n))
