"""Rank certificates for 3-tensors over prime fields.

Three kinds of certificate live here, all bit-exactly verifiable:

* :class:`SliceDecomposition` writes a tensor as a sum of terms of the
  forms f(x,y)g(z), f(x,z)g(y), f(y,z)g(x); the minimum number of terms
  is the slice rank.
* :class:`TriangleDecomposition` uses only index triples a+b+c < k.
* :class:`InstabilityCertificate` exhibits weighted bases under which the
  tensor's coefficient support sits strictly below the average weight, a
  Hilbert-Mumford style witness.

The exact slice-rank oracle rests on the subspace characterization: the
slice rank is at most a+b+c iff the tensor vanishes (multilinearly) on a
triple of subspaces of codimensions a, b, c.  The forward direction
restricts a decomposition to the common kernels of its univariate
factors; conversely, completing adapted bases turns vanishing subspaces
into a decomposition of exactly that size.  The search is a finite
enumeration of subspaces of F_p^d and is guarded accordingly.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .fftensor import PrimeField, Tensor3, lucas_binom
from .groups import prime_power_base
from . import rates

# ---------------------------------------------------------------------------
# modular linear algebra helpers
# ---------------------------------------------------------------------------


def _rref(mat: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p; returns (rref, pivot columns)."""
    m = (np.array(mat, dtype=np.int64) % p).copy()
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if m[i, c]), None)
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        m[r] = m[r] * pow(int(m[r, c]), -1, p) % p
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] = (m[i] - m[i, c] * m[r]) % p
        pivots.append(c)
        r += 1
    return m, pivots


def _row_space_basis(rows: Sequence[np.ndarray], p: int) -> np.ndarray:
    if len(rows) == 0:
        return np.zeros((0, 0), dtype=np.int64)
    m, pivots = _rref(np.array(rows, dtype=np.int64), p)
    return m[: len(pivots)]


def _complete_to_basis(rows: np.ndarray, d: int, p: int) -> np.ndarray:
    """Extend independent rows to a basis of F_p^d with standard unit vectors."""
    basis = [list(map(int, r)) for r in rows]
    for j in range(d):
        if len(basis) == d:
            break
        unit = [0] * d
        unit[j] = 1
        candidate = basis + [unit]
        if len(_rref(np.array(candidate), p)[1]) == len(candidate):
            basis = candidate
    if len(basis) != d:
        raise ValueError("could not complete rows to a basis")
    return np.array(basis, dtype=np.int64)


def _mat_inv(mat: np.ndarray, p: int) -> np.ndarray:
    n = mat.shape[0]
    if mat.shape != (n, n):
        raise ValueError("matrix must be square")
    aug = np.concatenate([np.array(mat, dtype=np.int64) % p, np.eye(n, dtype=np.int64)], axis=1)
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r, col]), None)
        if piv is None:
            raise ValueError("matrix not invertible mod p")
        aug[[col, piv]] = aug[[piv, col]]
        aug[col] = aug[col] * pow(int(aug[col, col]), -1, p) % p
        for r in range(n):
            if r != col and aug[r, col]:
                aug[r] = (aug[r] - aug[r, col] * aug[col]) % p
    return aug[:, n:]


def _dual_basis(basis: np.ndarray, p: int) -> np.ndarray:
    """Rows f'_a with sum_x f_a(x) f'_b(x) = delta_{ab}."""
    return _mat_inv(basis, p).T % p


def _subspaces(d: int, dim: int, p: int) -> Iterator[np.ndarray]:
    """All dim-dimensional subspaces of F_p^d as RREF basis matrices."""
    if dim == 0:
        yield np.zeros((0, d), dtype=np.int64)
        return
    for pivots in itertools.combinations(range(d), dim):
        free = [
            (i, j)
            for i in range(dim)
            for j in range(d)
            if j > pivots[i] and j not in pivots
        ]
        base = np.zeros((dim, d), dtype=np.int64)
        for i, c in enumerate(pivots):
            base[i, c] = 1
        for values in itertools.product(range(p), repeat=len(free)):
            mat = base.copy()
            for (i, j), v in zip(free, values):
                mat[i, j] = v
            yield mat


# ---------------------------------------------------------------------------
# slice decompositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SliceDecomposition:
    """A sum of slice terms; ``size`` bounds the slice rank from above.

    Term groups: xy_terms are (bivariate on X x Y, univariate on Z),
    xz_terms are (X x Z, univariate on Y), yz_terms are (Y x Z,
    univariate on X).
    """

    field: PrimeField
    dims: tuple[int, int, int]
    xy_terms: tuple[tuple[np.ndarray, np.ndarray], ...] = ()
    xz_terms: tuple[tuple[np.ndarray, np.ndarray], ...] = ()
    yz_terms: tuple[tuple[np.ndarray, np.ndarray], ...] = ()

    @property
    def size(self) -> int:
        return len(self.xy_terms) + len(self.xz_terms) + len(self.yz_terms)

    def reconstruct(self) -> np.ndarray:
        nx, ny, nz = self.dims
        acc = np.zeros(self.dims, dtype=np.int64)
        for biv, univ in self.xy_terms:
            acc += np.einsum("xy,z->xyz", biv, univ)
        for biv, univ in self.xz_terms:
            acc += np.einsum("xz,y->xyz", biv, univ)
        for biv, univ in self.yz_terms:
            acc += np.einsum("yz,x->xyz", biv, univ)
        return acc % self.field.p

    def _check_shapes(self) -> None:
        nx, ny, nz = self.dims
        expect = {
            "xy_terms": ((nx, ny), (nz,)),
            "xz_terms": ((nx, nz), (ny,)),
            "yz_terms": ((ny, nz), (nx,)),
        }
        for name, (bshape, ushape) in expect.items():
            for biv, univ in getattr(self, name):
                if biv.shape != bshape or univ.shape != ushape:
                    raise ValueError(f"{name} factor shapes do not match dims {self.dims}")

    def to_dict(self) -> dict:
        def terms(group):
            return [
                {"bivariate": biv.tolist(), "univariate": univ.tolist()}
                for biv, univ in group
            ]

        return {
            "p": self.field.p,
            "dims": list(self.dims),
            "xy_terms": terms(self.xy_terms),
            "xz_terms": terms(self.xz_terms),
            "yz_terms": terms(self.yz_terms),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SliceDecomposition":
        def terms(group):
            return tuple(
                (
                    np.array(t["bivariate"], dtype=np.int64),
                    np.array(t["univariate"], dtype=np.int64),
                )
                for t in group
            )

        return cls(
            field=PrimeField(int(data["p"])),
            dims=tuple(data["dims"]),
            xy_terms=terms(data["xy_terms"]),
            xz_terms=terms(data["xz_terms"]),
            yz_terms=terms(data["yz_terms"]),
        )


def verify_slice_decomposition(t: Tensor3, d: SliceDecomposition) -> bool:
    """True iff the reconstructed sum equals t entrywise in F_p."""
    if d.dims != t.dims or d.field != t.field:
        raise ValueError("decomposition shape/field does not match tensor")
    d._check_shapes()
    return np.array_equal(d.reconstruct(), t.entries)


# ---------------------------------------------------------------------------
# exact slice rank oracle
# ---------------------------------------------------------------------------

DEFAULT_ORACLE_MAX_DIM = 4
DEFAULT_ORACLE_MAX_P = 3


def _oracle_guard() -> tuple[int, int]:
    """(max axis size, max p); SLICERANK_GUARD="dim" or "dim,p" overrides."""
    env = os.environ.get("SLICERANK_GUARD")
    if not env:
        return DEFAULT_ORACLE_MAX_DIM, DEFAULT_ORACLE_MAX_P
    parts = [int(v) for v in env.replace(",", " ").split()]
    if len(parts) == 1:
        return parts[0], DEFAULT_ORACLE_MAX_P
    return parts[0], parts[1]


def _scan_vanishing(
    entries: np.ndarray,
    a_list: list[np.ndarray],
    b_list: list[np.ndarray],
    c_list: list[np.ndarray],
    p: int,
    threads: int,
) -> Optional[tuple[int, int, int]]:
    """First (lex) triple of subspace indices on which the tensor vanishes."""
    b_stack = np.array(b_list)
    c_stack = np.array(c_list)

    def scan_range(lo: int, hi: int) -> Optional[tuple[int, int, int]]:
        for ia in range(lo, hi):
            ta = np.einsum("ax,xyz->ayz", a_list[ia], entries) % p
            if ta.size and not ta.any() and b_list and c_list:
                return (ia, 0, 0)
            block = np.einsum("jby,kcz,ayz->jkabc", b_stack, c_stack, ta) % p
            ok = ~block.any(axis=(2, 3, 4))
            hits = np.argwhere(ok)
            if len(hits):
                j, k = hits[0]
                return (ia, int(j), int(k))
        return None

    n = len(a_list)
    if threads <= 1 or n < 2:
        return scan_range(0, n)
    chunk = -(-n // threads)
    ranges = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda r: scan_range(*r), ranges))
    found = [r for r in results if r is not None]
    return min(found) if found else None


def _find_vanishing_triple(
    t: Tensor3, threads: int = 1
) -> tuple[int, tuple[int, int, int], tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Smallest a+b+c with vanishing subspaces of codims (a, b, c).

    Returns (k, codims, subspace bases).  Deterministic: codim triples in
    lex order, subspaces in RREF enumeration order, minimum reduction
    across parallel chunks.
    """
    p = t.field.p
    nx, ny, nz = t.dims
    subs = {
        ("x", a): list(_subspaces(nx, nx - a, p)) for a in range(nx + 1)
    }
    subs.update({("y", b): list(_subspaces(ny, ny - b, p)) for b in range(ny + 1)})
    subs.update({("z", c): list(_subspaces(nz, nz - c, p)) for c in range(nz + 1)})
    for k in range(min(t.dims) + 1):
        for a in range(min(k, nx) + 1):
            for b in range(min(k - a, ny) + 1):
                c = k - a - b
                if c > nz:
                    continue
                hit = _scan_vanishing(
                    t.entries, subs[("x", a)], subs[("y", b)], subs[("z", c)], p, threads
                )
                if hit is not None:
                    ia, jb, kc = hit
                    return (
                        k,
                        (a, b, c),
                        (subs[("x", a)][ia], subs[("y", b)][jb], subs[("z", c)][kc]),
                    )
    raise AssertionError("vanishing search must succeed at k = min axis size")


def exact_slice_rank(
    t: Tensor3,
    max_dim: Optional[int] = None,
    max_p: Optional[int] = None,
    threads: int = 1,
) -> int:
    """Exact slice rank by exhaustive subspace search (guarded).

    The default guard admits axes of size at most 4 over F_2 or F_3; the
    SLICERANK_GUARD environment variable overrides it (expert mode).
    """
    env_dim, env_p = _oracle_guard()
    max_dim = env_dim if max_dim is None else max_dim
    max_p = env_p if max_p is None else max_p
    if max(t.dims) > max_dim or t.field.p > max_p:
        raise ValueError(
            f"oracle guard exceeded: dims {t.dims} over F_{t.field.p} "
            f"(guard: dims <= {max_dim}, p <= {max_p})"
        )
    k, _, _ = _find_vanishing_triple(t, threads=threads)
    return k


def extract_slice_decomposition(
    t: Tensor3,
    max_dim: Optional[int] = None,
    max_p: Optional[int] = None,
    threads: int = 1,
) -> SliceDecomposition:
    """A verified decomposition whose size equals the exact slice rank.

    Converts the oracle's vanishing subspaces into slice terms: complete
    adapted bases, transform coordinates, and group every surviving
    coefficient by the first complement coordinate it hits.
    """
    env_dim, env_p = _oracle_guard()
    max_dim = env_dim if max_dim is None else max_dim
    max_p = env_p if max_p is None else max_p
    if max(t.dims) > max_dim or t.field.p > max_p:
        raise ValueError("oracle guard exceeded")
    p = t.field.p
    _, (a, b, c), (sub_x, sub_y, sub_z) = _find_vanishing_triple(t, threads=threads)
    nx, ny, nz = t.dims

    def adapted(sub: np.ndarray, d: int) -> np.ndarray:
        # Full basis with the complement rows first, subspace rows last.
        full = _complete_to_basis(sub, d, p)
        comp = full[len(sub):]
        return np.concatenate([comp, sub]) if len(sub) else full

    qx, qy, qz = adapted(sub_x, nx), adapted(sub_y, ny), adapted(sub_z, nz)
    prime = np.einsum("ix,jy,kz,xyz->ijk", qx, qy, qz, t.entries) % p
    if prime[a:, b:, c:].any():
        raise AssertionError("tensor does not vanish on the reported subspaces")
    ux, uy, uz = _mat_inv(qx, p), _mat_inv(qy, p), _mat_inv(qz, p)

    yz_terms = []
    for i in range(a):
        biv = np.einsum("jk,yj,zk->yz", prime[i], uy, uz) % p
        yz_terms.append((biv, ux[:, i].copy()))
    xz_terms = []
    for j in range(b):
        biv = np.einsum("ik,xi,zk->xz", prime[a:, j, :], ux[:, a:], uz) % p
        xz_terms.append((biv, uy[:, j].copy()))
    xy_terms = []
    for k_ in range(c):
        biv = np.einsum("ij,xi,yj->xy", prime[a:, b:, k_], ux[:, a:], uy[:, b:]) % p
        xy_terms.append((biv, uz[:, k_].copy()))

    d = SliceDecomposition(
        field=t.field,
        dims=t.dims,
        xy_terms=tuple(xy_terms),
        xz_terms=tuple(xz_terms),
        yz_terms=tuple(yz_terms),
    )
    if not verify_slice_decomposition(t, d):
        raise AssertionError("extracted decomposition failed verification")
    return d


# ---------------------------------------------------------------------------
# slice decompositions of tensor products
# ---------------------------------------------------------------------------


def _rank_one_expansion(g: Tensor3) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """One delta-supported rank-one term per nonzero entry of g."""
    terms = []
    nx, ny, nz = g.dims
    for i, j, k in np.argwhere(g.entries):
        alpha = np.zeros(nx, dtype=np.int64)
        beta = np.zeros(ny, dtype=np.int64)
        gamma = np.zeros(nz, dtype=np.int64)
        alpha[i] = g.entries[i, j, k]
        beta[j] = 1
        gamma[k] = 1
        terms.append((alpha, beta, gamma))
    return terms


def product_slice_decomposition(
    f: Tensor3,
    df: SliceDecomposition,
    g: Tensor3,
    mode: str = "max-axis",
    g_rank_terms: Optional[Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]]] = None,
) -> SliceDecomposition:
    """A slice decomposition of the tensor product of f and g.

    ``mode="tensor-rank"`` multiplies every slice term of f by every
    rank-one term of a tensor decomposition of g (supplied via
    ``g_rank_terms``, or the per-support-entry expansion by default),
    giving at most size(df) * #terms.  ``mode="max-axis"`` freezes one
    coordinate of g with a delta function, giving at most
    size(df) * max(axis sizes of g).
    """
    if not verify_slice_decomposition(f, df):
        raise ValueError("input decomposition does not verify against f")
    if f.field != g.field:
        raise ValueError("field mismatch")
    p = f.field.p
    dims = tuple(df.dims[i] * g.dims[i] for i in range(3))

    def pair_bivariate(biv: np.ndarray, right: np.ndarray) -> np.ndarray:
        # f'(x', y') * r(x'', y'') laid out in product-label order.
        out = np.einsum("xy,ab->xayb", biv, right) % p
        return out.reshape(biv.shape[0] * right.shape[0], biv.shape[1] * right.shape[1])

    def pair_univariate(univ: np.ndarray, right: np.ndarray) -> np.ndarray:
        return (np.outer(univ, right) % p).reshape(-1)

    def delta(n: int, i: int) -> np.ndarray:
        d = np.zeros(n, dtype=np.int64)
        d[i] = 1
        return d

    xy_out, xz_out, yz_out = [], [], []
    if mode == "tensor-rank":
        terms = list(g_rank_terms) if g_rank_terms is not None else _rank_one_expansion(g)
        for alpha, beta, gamma in terms:
            for biv, univ in df.xy_terms:
                xy_out.append(
                    (pair_bivariate(biv, np.outer(alpha, beta)), pair_univariate(univ, gamma))
                )
            for biv, univ in df.xz_terms:
                xz_out.append(
                    (pair_bivariate(biv, np.outer(alpha, gamma)), pair_univariate(univ, beta))
                )
            for biv, univ in df.yz_terms:
                yz_out.append(
                    (pair_bivariate(biv, np.outer(beta, gamma)), pair_univariate(univ, alpha))
                )
    elif mode == "max-axis":
        for biv, univ in df.xy_terms:
            for zi in range(g.dims[2]):
                xy_out.append(
                    (
                        pair_bivariate(biv, g.entries[:, :, zi]),
                        pair_univariate(univ, delta(g.dims[2], zi)),
                    )
                )
        for biv, univ in df.xz_terms:
            for yi in range(g.dims[1]):
                xz_out.append(
                    (
                        pair_bivariate(biv, g.entries[:, yi, :]),
                        pair_univariate(univ, delta(g.dims[1], yi)),
                    )
                )
        for biv, univ in df.yz_terms:
            for xi in range(g.dims[0]):
                yz_out.append(
                    (
                        pair_bivariate(biv, g.entries[xi, :, :]),
                        pair_univariate(univ, delta(g.dims[0], xi)),
                    )
                )
    else:
        raise ValueError(f"unknown mode {mode!r}")

    return SliceDecomposition(
        field=f.field,
        dims=dims,
        xy_terms=tuple(xy_out),
        xz_terms=tuple(xz_out),
        yz_terms=tuple(yz_out),
    )


# ---------------------------------------------------------------------------
# triangle decompositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TriangleDecomposition:
    """F(x,y,z) = sum over a+b+c < k of r_{abc} f_a(x) g_b(y) h_c(z).

    ``z_shift`` records that the decomposition targets the tensor whose z
    coordinate is cyclically shifted by that amount (the cyclic
    construction naturally lands on the shifted group tensor).
    """

    field: PrimeField
    k: int
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    coeffs: dict[tuple[int, int, int], int] = field(default_factory=dict)
    z_shift: int = 0

    def __post_init__(self):
        for (a, b, c), r in self.coeffs.items():
            if a + b + c >= self.k:
                raise ValueError(f"coefficient index {(a, b, c)} violates a+b+c < k")
            if not 0 <= a < self.k or not 0 <= b < self.k or not 0 <= c < self.k:
                raise ValueError(f"coefficient index {(a, b, c)} out of range")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.f.shape[1], self.g.shape[1], self.h.shape[1])

    def reconstruct(self) -> np.ndarray:
        p = self.field.p
        acc = np.zeros(self.dims, dtype=np.int64)
        for (a, b, c), r in self.coeffs.items():
            acc += r * np.einsum("x,y,z->xyz", self.f[a], self.g[b], self.h[c])
        return acc % p

    def to_dict(self) -> dict:
        return {
            "p": self.field.p,
            "k": self.k,
            "f": self.f.tolist(),
            "g": self.g.tolist(),
            "h": self.h.tolist(),
            "coeffs": [[a, b, c, int(r)] for (a, b, c), r in sorted(self.coeffs.items())],
            "z_shift": self.z_shift,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TriangleDecomposition":
        return cls(
            field=PrimeField(int(data["p"])),
            k=int(data["k"]),
            f=np.array(data["f"], dtype=np.int64),
            g=np.array(data["g"], dtype=np.int64),
            h=np.array(data["h"], dtype=np.int64),
            coeffs={(a, b, c): r for a, b, c, r in data["coeffs"]},
            z_shift=int(data.get("z_shift", 0)),
        )


def verify_triangle_decomposition(t: Tensor3, td: TriangleDecomposition) -> bool:
    """Bit-exact reconstruction check against t."""
    if td.dims != t.dims or td.field != t.field:
        raise ValueError("decomposition shape/field does not match tensor")
    return np.array_equal(td.reconstruct(), t.entries)


def triangle_decomposition_cyclic(q: int) -> TriangleDecomposition:
    """Width-q triangle decomposition of the shifted cyclic group tensor.

    For q = p^r the binomial coefficient C(., a) with a < q descends to
    Z/qZ via Lucas' theorem, and the shifted tensor D(x, y, z+1), which is
    1 exactly when x+y+z = q-1, equals
    sum_{a+b+c=q-1} C(x,a) C(y,b) C(z,c).
    """
    p = prime_power_base(q)
    if p is None:
        raise ValueError(f"{q} is not a prime power")
    table = np.array(
        [[lucas_binom(x, a, p) for x in range(q)] for a in range(q)], dtype=np.int64
    )
    coeffs = {
        (a, b, q - 1 - a - b): 1
        for a in range(q)
        for b in range(q - a)
    }
    return TriangleDecomposition(
        field=PrimeField(p), k=q, f=table, g=table, h=table, coeffs=coeffs, z_shift=1
    )


def _interpolate_poly(values: Sequence[int], p: int) -> list[int]:
    """Coefficients (degree < p) of the polynomial through (x, values[x])."""
    # Vandermonde solve mod p; the p x p Vandermonde over distinct points
    # of F_p is invertible.
    v = np.array([[pow(x, a, p) for a in range(p)] for x in range(p)], dtype=np.int64)
    vinv = _mat_inv(v, p)
    coeff = vinv @ (np.array(values, dtype=np.int64) % p) % p
    return [int(c) for c in coeff]


def poly_sum_tensor(values: Sequence[int], p: int) -> Tensor3:
    """The tensor (x, y, z) -> P(x + y + z) on F_p with residue labels."""
    labels = tuple(range(p))
    arr = np.empty((p, p, p), dtype=np.int64)
    for x, y, z in itertools.product(range(p), repeat=3):
        arr[x, y, z] = values[(x + y + z) % p]
    return Tensor3(PrimeField(p), labels, labels, labels, arr)


def triangle_decomposition_poly(values: Sequence[int], p: int) -> TriangleDecomposition:
    """Width-p triangle decomposition of (x,y,z) -> P(x+y+z) over F_p.

    P is interpolated as a polynomial of degree < p; expanding the powers
    of x+y+z by multinomials keeps every monomial at total degree < p.
    """
    if len(values) != p:
        raise ValueError("P must be given by its p values on F_p")
    poly = _interpolate_poly(values, p)
    coeffs: dict[tuple[int, int, int], int] = {}
    for deg, cd in enumerate(poly):
        if cd == 0:
            continue
        for a in range(deg + 1):
            for b in range(deg + 1 - a):
                c = deg - a - b
                r = cd * (math.factorial(deg) // (math.factorial(a) * math.factorial(b) * math.factorial(c)))
                key = (a, b, c)
                total = (coeffs.get(key, 0) + r) % p
                if total:
                    coeffs[key] = total
                elif key in coeffs:
                    del coeffs[key]
    powers = np.array([[pow(x, a, p) for x in range(p)] for a in range(p)], dtype=np.int64)
    return TriangleDecomposition(
        field=PrimeField(p), k=p, f=powers, g=powers, h=powers, coeffs=coeffs
    )


def bounded_sum_tuple_count(k: int, n: int) -> int:
    """#{a in {0..k-1}^n : 3 * sum(a) <= (k-1) * n}, by exact DP."""
    counts = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for s, cnt in counts.items():
            for a in range(k):
                nxt[s + a] = nxt.get(s + a, 0) + cnt
        counts = nxt
    return sum(cnt for s, cnt in counts.items() if 3 * s <= (k - 1) * n)


def triangle_to_slice_power_bound(k: int, n: int) -> tuple[int, float]:
    """Slice rank bound for the n-th power of a triangle-rank-k tensor.

    Returns (3 * N(k, n), 3 * (k * J(k))^n) where N(k, n) counts tuples in
    {0..k-1}^n with 3 * sum <= (k-1) * n.  The exact count is the finite-n
    sharpening of the asymptotic form and never exceeds it; the float is
    reported for comparison.
    """
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and n >= 1")
    exact = 3 * bounded_sum_tuple_count(k, n)
    jk = rates.rate_J(k).value
    return exact, 3.0 * (k * jk) ** n


def weighted_tuple_count(weights: Sequence[int], n: int, threshold: Fraction | int) -> int:
    """#{a in weights^n : sum(a) <= n * threshold}, exact.

    The threshold comparison is done in cross-multiplied integer
    arithmetic; the bound boundary is hit exactly at common parameters.
    """
    if not weights:
        raise ValueError("weights must be nonempty")
    thr = Fraction(threshold)
    counts = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for s, cnt in counts.items():
            for a in weights:
                nxt[s + a] = nxt.get(s + a, 0) + cnt
        counts = nxt
    return sum(
        cnt for s, cnt in counts.items() if s * thr.denominator <= n * thr.numerator
    )


def power_slice_bound(dims: tuple[int, int, int], epsilon: Fraction | float, n: int) -> float:
    """(|X|^n + |Y|^n + |Z|^n) * exp(-2 n epsilon^2)."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    e = float(epsilon)
    return (dims[0] ** n + dims[1] ** n + dims[2] ** n) * math.exp(-2.0 * n * e * e)


# ---------------------------------------------------------------------------
# instability certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InstabilityCertificate:
    """Weighted bases witnessing instability at level epsilon.

    Rows of the basis tables are the basis functions; weights are
    integers (rational weights scale to integers), epsilon is an exact
    rational, and the cutoff R is computed exactly.
    """

    field: PrimeField
    x_basis: np.ndarray
    y_basis: np.ndarray
    z_basis: np.ndarray
    u: tuple[int, ...]
    v: tuple[int, ...]
    w: tuple[int, ...]
    epsilon: Fraction

    @property
    def dims(self) -> tuple[int, int, int]:
        return (len(self.u), len(self.v), len(self.w))

    @property
    def nontrivial(self) -> bool:
        """At least one of the three weight vectors is nonconstant."""
        return any(len(set(ws)) > 1 for ws in (self.u, self.v, self.w))

    @property
    def cutoff(self) -> Fraction:
        avg = (
            Fraction(sum(self.u), len(self.u))
            + Fraction(sum(self.v), len(self.v))
            + Fraction(sum(self.w), len(self.w))
        )
        spread = (
            (max(self.u) - min(self.u))
            + (max(self.v) - min(self.v))
            + (max(self.w) - min(self.w))
        )
        return avg - self.epsilon * spread

    def to_dict(self) -> dict:
        return {
            "p": self.field.p,
            "x_basis": self.x_basis.tolist(),
            "y_basis": self.y_basis.tolist(),
            "z_basis": self.z_basis.tolist(),
            "u": list(self.u),
            "v": list(self.v),
            "w": list(self.w),
            "epsilon": f"{self.epsilon.numerator}/{self.epsilon.denominator}",
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InstabilityCertificate":
        num, den = data["epsilon"].split("/")
        return cls(
            field=PrimeField(int(data["p"])),
            x_basis=np.array(data["x_basis"], dtype=np.int64),
            y_basis=np.array(data["y_basis"], dtype=np.int64),
            z_basis=np.array(data["z_basis"], dtype=np.int64),
            u=tuple(data["u"]),
            v=tuple(data["v"]),
            w=tuple(data["w"]),
            epsilon=Fraction(int(num), int(den)),
        )


def instability_from_slice(
    d: SliceDecomposition, dims: tuple[int, int, int]
) -> InstabilityCertificate:
    """Certificate from a decomposition strictly smaller than every axis.

    The univariate slice factors span low-weight subspaces: completing
    them to bases and weighting them -1 (0 elsewhere) places the whole
    coefficient support at total weight <= -1 while the average weight sum
    stays > -1, so the certificate verifies at
    epsilon = (1 + average sum) / (number of nonconstant axes).
    """
    nx, ny, nz = dims
    if d.size >= min(dims):
        raise ValueError(
            "decomposition size must be below the smallest axis to conclude instability"
        )
    p = d.field.p

    def axis_rows(group, dim):
        rows = [univ for _, univ in group]
        basis = _row_space_basis(rows, p) if rows else np.zeros((0, dim), dtype=np.int64)
        return basis

    x_rows = axis_rows(d.yz_terms, nx)
    y_rows = axis_rows(d.xz_terms, ny)
    z_rows = axis_rows(d.xy_terms, nz)
    ranks = [len(x_rows), len(y_rows), len(z_rows)]

    if sum(ranks) == 0:
        # Zero tensor: no coefficients constrain anything, but the weights
        # must still be nontrivial; mark one coordinate on the first axis
        # that has room.
        axis = next((i for i, n in enumerate(dims) if n >= 2), None)
        if axis is None:
            raise ValueError("cannot build nontrivial weights on 1x1x1 axes")
        marker = np.zeros((1, dims[axis]), dtype=np.int64)
        marker[0, 0] = 1
        if axis == 0:
            x_rows = marker
        elif axis == 1:
            y_rows = marker
        else:
            z_rows = marker
        ranks = [len(x_rows), len(y_rows), len(z_rows)]

    x_basis = _complete_to_basis(x_rows, nx, p)
    y_basis = _complete_to_basis(y_rows, ny, p)
    z_basis = _complete_to_basis(z_rows, nz, p)
    u = tuple(-1 if i < ranks[0] else 0 for i in range(nx))
    v = tuple(-1 if j < ranks[1] else 0 for j in range(ny))
    w = tuple(-1 if k < ranks[2] else 0 for k in range(nz))
    avg = Fraction(sum(u), nx) + Fraction(sum(v), ny) + Fraction(sum(w), nz)
    spread = sum(1 for r, n in zip(ranks, dims) if 0 < r < n)
    epsilon = (1 + avg) / spread
    return InstabilityCertificate(
        field=d.field,
        x_basis=x_basis,
        y_basis=y_basis,
        z_basis=z_basis,
        u=u,
        v=v,
        w=w,
        epsilon=epsilon,
    )


def verify_instability_certificate(t: Tensor3, cert: InstabilityCertificate) -> bool:
    """Check a certificate against a tensor, exactly.

    Extracts every coefficient through the dual bases and requires each
    nonzero one to sit at total weight <= the rational cutoff R.  Rejects
    certificates whose three weight vectors are all constant.
    """
    if cert.dims != t.dims or cert.field != t.field:
        raise ValueError("certificate shape/field does not match tensor")
    if not cert.nontrivial:
        return False
    p = t.field.p
    dx = _dual_basis(cert.x_basis, p)
    dy = _dual_basis(cert.y_basis, p)
    dz = _dual_basis(cert.z_basis, p)
    coeffs = np.einsum("ax,by,cz,xyz->abc", dx, dy, dz, t.entries) % p
    r = cert.cutoff
    for a, b, c in np.argwhere(coeffs):
        if Fraction(cert.u[a] + cert.v[b] + cert.w[c]) > r:
            return False
    return True


# -- exhaustive small-weight certificate search -----------------------------


def _flag_bases(d: int, p: int) -> np.ndarray:
    """Adapted dual-basis matrices, one per complete flag of F_p^d.

    Rows e_1..e_d of each matrix satisfy span{e_j..e_d} = V_j for the
    flag's chain of subspaces V_1 > V_2 > ... > V_d (dims d..1).  The
    vanishing pattern of a tensor on products of flag subspaces depends
    only on the flag, so enumerating flags covers all bases.
    """
    by_dim = {k: list(_subspaces(d, k, p)) for k in range(1, d + 1)}

    def contains(big: np.ndarray, small: np.ndarray) -> bool:
        stacked = np.concatenate([big, small])
        return len(_rref(stacked, p)[1]) == len(big)

    chains: list[list[np.ndarray]] = [[s] for s in by_dim[1]]
    for k in range(2, d):
        chains = [
            chain + [sup]
            for chain in chains
            for sup in by_dim[k]
            if contains(sup, chain[-1])
        ]
    if d > 1:
        chains = [chain + [np.eye(d, dtype=np.int64)] for chain in chains]

    out = []
    for chain in chains:
        rows: list[np.ndarray] = []
        for sub in chain:  # ascending dimension
            for r in sub:
                cand = rows + [r]
                if len(_rref(np.array(cand), p)[1]) == len(cand):
                    rows = cand
                    break
        assert len(rows) == d
        out.append(np.array(rows[::-1], dtype=np.int64))
    return np.array(out)


def _sorted_weight_vectors(d: int, max_weight: int) -> list[tuple[int, ...]]:
    """Nondecreasing integer vectors with min 0 and entries <= max_weight.

    Weight translation and positive scaling do not change certificate
    validity, so this normal form spans the small-integer search space.
    """
    out = []
    for tail in itertools.combinations_with_replacement(range(max_weight + 1), d - 1):
        out.append((0,) + tail)
    return out


def search_instability_certificate(
    t: Tensor3, max_weight: int = 2, max_dim: int = 3, max_p: int = 3
) -> Optional[InstabilityCertificate]:
    """Exhaustive small-integer-weight search for an epsilon > 0 certificate.

    Searches all complete flags of dual bases on each axis (the vanishing
    pattern only depends on the flag) against all normalized weight
    vectors with entries in {0..max_weight}.  Returns a verified
    certificate with the largest admissible exact epsilon for the first
    hit in deterministic order, or None when the search space contains no
    valid certificate.  A None result does not preclude certificates with
    larger weights.
    """
    nx, ny, nz = t.dims
    p = t.field.p
    if max(t.dims) > max_dim or p > max_p:
        raise ValueError(
            f"instability search guard exceeded (dims {t.dims} over F_{p})"
        )
    fa, fb, fc = _flag_bases(nx, p), _flag_bases(ny, p), _flag_bases(nz, p)
    coeffs = np.einsum("fax,gby,hcz,xyz->fghabc", fa, fb, fc, t.entries) % p
    nonzero = coeffs != 0
    # Z[f,g,h,a,b,c]: the whole suffix block (>= a, >= b, >= c) vanishes.
    acc = nonzero.copy()
    for axis in (3, 4, 5):
        acc = np.flip(np.logical_or.accumulate(np.flip(acc, axis), axis=axis), axis)
    suffix_zero = ~acc

    nf, ng, nh = len(fa), len(fb), len(fc)
    flat = suffix_zero.reshape(nf * ng * nh, nx * ny * nz)
    weights_bits = 1 << np.arange(flat.shape[1], dtype=np.int64)
    patterns = flat.astype(np.int64) @ weights_bits
    unique_patterns, first_index = np.unique(patterns, return_index=True)
    unique_masks = flat[first_index]  # (npat, nx*ny*nz)

    for u in _sorted_weight_vectors(nx, max_weight):
        for v in _sorted_weight_vectors(ny, max_weight):
            for w in _sorted_weight_vectors(nz, max_weight):
                if len(set(u)) == 1 and len(set(v)) == 1 and len(set(w)) == 1:
                    continue
                avg = Fraction(sum(u), nx) + Fraction(sum(v), ny) + Fraction(sum(w), nz)
                sums = (
                    np.array(u)[:, None, None]
                    + np.array(v)[None, :, None]
                    + np.array(w)[None, None, :]
                )
                required = (sums * avg.denominator >= avg.numerator).reshape(-1)
                ok = ~np.any(required & ~unique_masks, axis=1)
                if not ok.any():
                    continue
                flag_index = int(first_index[ok].min())
                fi, rem = divmod(flag_index, ng * nh)
                gi, hi = divmod(rem, nh)
                ea, eb, ec = fa[fi], fb[gi], fc[hi]
                support = np.argwhere(nonzero[fi, gi, hi])
                spread = (max(u) - min(u)) + (max(v) - min(v)) + (max(w) - min(w))
                if len(support):
                    max_sum = max(u[a] + v[b] + w[c] for a, b, c in support)
                    epsilon = (avg - max_sum) / spread
                else:
                    epsilon = Fraction(1)
                cert = InstabilityCertificate(
                    field=t.field,
                    x_basis=_mat_inv(ea.T % p, p),
                    y_basis=_mat_inv(eb.T % p, p),
                    z_basis=_mat_inv(ec.T % p, p),
                    u=u,
                    v=v,
                    w=w,
                    epsilon=epsilon,
                )
                if epsilon > 0 and verify_instability_certificate(t, cert):
                    return cert
    return None
