"""Dense 3-tensors over prime fields, Lucas binomials, and group tensors.

Axis labels travel with every tensor so that restriction and tensor
products keep their group-element semantics; the sum-free checkers need
element identities, not bare indices.  Storage is dense by design, with a
size guard instead of silent paging: this is desk-scale tooling.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from .groups import GroupSpec

Label = Hashable

DEFAULT_TENSOR_CAP = 1 << 24  # max total entries for dense materialization


@dataclass(frozen=True)
class PrimeField:
    """The field of integers mod p, p prime (checked)."""

    p: int

    def __post_init__(self):
        if self.p < 2 or any(self.p % d == 0 for d in range(2, int(self.p**0.5) + 1)):
            raise ValueError(f"{self.p} is not prime")

    def reduce(self, a: np.ndarray | int):
        return a % self.p

    def inv(self, a: int) -> int:
        return pow(int(a) % self.p, -1, self.p)


def lucas_binom(m: int, k: int, p: int) -> int:
    """binomial(m, k) mod p, computed digit-wise in base p.

    For fixed k < q = p^r, the value depends only on m mod q, so this
    descends to a well-defined function on Z/qZ.
    """
    if m < 0 or k < 0:
        raise ValueError("arguments must be nonnegative")
    PrimeField(p)
    result = 1
    while k > 0 or m > 0:
        mi, ki = m % p, k % p
        if ki > mi:
            return 0
        num = den = 1
        for i in range(ki):
            num = num * (mi - i) % p
            den = den * (i + 1) % p
        result = result * num * pow(den, -1, p) % p
        m //= p
        k //= p
    return result


@dataclass(frozen=True)
class Matching3:
    """A 3-dimensional matching: triples whose three projections are injective.

    The projections are then bijections onto the label sets S, T, U that the
    triples determine.
    """

    triples: tuple[tuple[Label, Label, Label], ...]

    def __post_init__(self):
        for axis in range(3):
            values = [t[axis] for t in self.triples]
            if len(set(values)) != len(values):
                raise ValueError(
                    f"projection onto factor {axis} is not injective"
                )

    def __len__(self) -> int:
        return len(self.triples)

    def projections(self) -> tuple[tuple[Label, ...], tuple[Label, ...], tuple[Label, ...]]:
        s = tuple(tr[0] for tr in self.triples)
        t = tuple(tr[1] for tr in self.triples)
        u = tuple(tr[2] for tr in self.triples)
        return s, t, u


@dataclass(frozen=True, eq=False)
class Tensor3:
    """A dense function X x Y x Z -> F_p with labeled axes.

    ``entries[i, j, k]`` is the value at (x_labels[i], y_labels[j],
    z_labels[k]); values are stored reduced into [0, p).
    """

    field: PrimeField
    x_labels: tuple[Label, ...]
    y_labels: tuple[Label, ...]
    z_labels: tuple[Label, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name, labels in (("x", self.x_labels), ("y", self.y_labels), ("z", self.z_labels)):
            if len(set(labels)) != len(labels):
                raise ValueError(f"duplicate labels on axis {name}")
        arr = np.asarray(self.entries, dtype=np.int64) % self.field.p
        if arr.shape != self.dims:
            raise ValueError(f"entry shape {arr.shape} does not match axes {self.dims}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dims(self) -> tuple[int, int, int]:
        return (len(self.x_labels), len(self.y_labels), len(self.z_labels))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Tensor3)
            and self.field == other.field
            and self.x_labels == other.x_labels
            and self.y_labels == other.y_labels
            and self.z_labels == other.z_labels
            and np.array_equal(self.entries, other.entries)
        )

    def value(self, x: Label, y: Label, z: Label) -> int:
        i = self.x_labels.index(x)
        j = self.y_labels.index(y)
        k = self.z_labels.index(z)
        return int(self.entries[i, j, k])

    def support(self) -> list[tuple[Label, Label, Label]]:
        out = []
        for i, j, k in zip(*np.nonzero(self.entries)):
            out.append((self.x_labels[i], self.y_labels[j], self.z_labels[k]))
        return out

    def relabel(self, fx: Callable[[Label], Label], fy=None, fz=None) -> "Tensor3":
        """Apply label maps per axis; entry order is unchanged."""
        fy = fy or fx
        fz = fz or fx
        return Tensor3(
            self.field,
            tuple(fx(l) for l in self.x_labels),
            tuple(fy(l) for l in self.y_labels),
            tuple(fz(l) for l in self.z_labels),
            self.entries,
        )

    def to_dict(self) -> dict:
        return {
            "p": self.field.p,
            "dims": list(self.dims),
            "labels": {
                "x": [_label_to_json(l) for l in self.x_labels],
                "y": [_label_to_json(l) for l in self.y_labels],
                "z": [_label_to_json(l) for l in self.z_labels],
            },
            "entries": [int(v) for v in self.entries.reshape(-1)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Tensor3":
        dims = tuple(data["dims"])
        entries = np.array(data["entries"], dtype=np.int64).reshape(dims)
        labels = data["labels"]
        return cls(
            PrimeField(int(data["p"])),
            tuple(_label_from_json(l) for l in labels["x"]),
            tuple(_label_from_json(l) for l in labels["y"]),
            tuple(_label_from_json(l) for l in labels["z"]),
            entries,
        )


def _label_to_json(label: Label):
    if isinstance(label, tuple):
        return [int(v) for v in label]
    return label


def _label_from_json(label):
    if isinstance(label, list):
        return tuple(int(v) for v in label)
    return label


def from_function(
    p: int,
    x_labels: Sequence[Label],
    y_labels: Sequence[Label],
    z_labels: Sequence[Label],
    fn: Callable[[Label, Label, Label], int],
) -> Tensor3:
    xs, ys, zs = tuple(x_labels), tuple(y_labels), tuple(z_labels)
    arr = np.empty((len(xs), len(ys), len(zs)), dtype=np.int64)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            for k, z in enumerate(zs):
                arr[i, j, k] = fn(x, y, z)
    return Tensor3(PrimeField(p), xs, ys, zs, arr)


def group_tensor(g: GroupSpec, p: int, cap: int = DEFAULT_TENSOR_CAP) -> Tensor3:
    """The group multiplication tensor: 1 where x + y + z = 0, else 0.

    Axis labels are the group elements in lexicographic order.  Each
    (x, y) pair determines a unique z, so the support has size |H|^2.
    """
    order = g.order
    if order**3 > cap:
        raise ValueError(
            f"group tensor would have {order**3} entries, exceeding the cap {cap}"
        )
    elems = list(g.elements())
    index = {e: i for i, e in enumerate(elems)}
    coords = g.coordinates
    arr = np.zeros((order, order, order), dtype=np.int64)
    for i, x in enumerate(elems):
        for j, y in enumerate(elems):
            z = tuple((-a - b) % m for a, b, m in zip(x, y, coords))
            arr[i, j, index[z]] = 1
    labels = tuple(elems)
    return Tensor3(PrimeField(p), labels, labels, labels, arr)


def restrict(
    t: Tensor3,
    xs: Sequence[Label],
    ys: Sequence[Label],
    zs: Sequence[Label],
) -> Tensor3:
    """Sub-tensor on the given label subsets (in the order given)."""

    def indices(labels, subset, axis):
        pos = {l: i for i, l in enumerate(labels)}
        try:
            return [pos[l] for l in subset]
        except KeyError as e:
            raise ValueError(f"unknown label {e.args[0]!r} on axis {axis}") from None

    ix = indices(t.x_labels, xs, "x")
    iy = indices(t.y_labels, ys, "y")
    iz = indices(t.z_labels, zs, "z")
    entries = t.entries[np.ix_(ix, iy, iz)]
    return Tensor3(t.field, tuple(xs), tuple(ys), tuple(zs), entries)


def tensor_product(f: Tensor3, g: Tensor3) -> Tensor3:
    """Outer product; axis labels are pairs (left label, right label)."""
    if f.field != g.field:
        raise ValueError("tensor product requires a common field")
    p = f.field.p
    entries = np.einsum("xyz,abc->xaybzc", f.entries, g.entries) % p
    dims = (
        f.dims[0] * g.dims[0],
        f.dims[1] * g.dims[1],
        f.dims[2] * g.dims[2],
    )
    pair = lambda left, right: tuple(itertools.product(left, right))
    return Tensor3(
        f.field,
        pair(f.x_labels, g.x_labels),
        pair(f.y_labels, g.y_labels),
        pair(f.z_labels, g.z_labels),
        entries.reshape(dims),
    )


def is_diagonal(t: Tensor3) -> Optional[Matching3]:
    """The support as a matching iff t is a diagonal tensor.

    Requires equal axis sizes and a support that projects bijectively onto
    every axis (in particular every matched entry is nonzero); returns
    None otherwise.
    """
    nx, ny, nz = t.dims
    if not (nx == ny == nz):
        return None
    idx = np.argwhere(t.entries != 0)
    if len(idx) != nx:
        return None
    for axis in range(3):
        if len(set(idx[:, axis])) != nx:
            return None
    triples = tuple(
        (t.x_labels[i], t.y_labels[j], t.z_labels[k]) for i, j, k in idx
    )
    return Matching3(triples)


def _residue(label: Label) -> int:
    """Residue of a Z/qZ label, given either as an int or a 1-tuple."""
    if isinstance(label, tuple):
        if len(label) != 1:
            raise ValueError(f"label {label!r} is not a cyclic residue")
        return int(label[0])
    return int(label)


def cyclic_shift_z(t: Tensor3, shift: int) -> Tensor3:
    """The tensor (x, y, z) -> t(x, y, z + shift) for cyclic z labels mod q.

    Used to verify decompositions of shifted group tensors: axis labels are
    unchanged, entries are re-read at the shifted z label.
    """
    q = len(t.z_labels)
    pos = {_residue(l): i for i, l in enumerate(t.z_labels)}
    perm = [pos[(_residue(l) + shift) % q] for l in t.z_labels]
    return Tensor3(t.field, t.x_labels, t.y_labels, t.z_labels, t.entries[:, :, perm])
