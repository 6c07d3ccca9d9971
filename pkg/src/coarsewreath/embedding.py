"""Explicit coordinate tables for maps into finite-dimensional L^p spaces.

A table is a list of blocks.  A :class:`DenseBlock` holds rational coordinates
``v`` with per-column weights ``w`` so that the coordinate is ``w**(1/p) * v``
and ``|difference|**p`` is the exact rational ``w * |dv|**p``.  A
:class:`PartitionBlock` is the indicator embedding of a partition: every part
gets a coordinate equal to ``(weight/2)**(1/p)`` on its members, so two points
in different parts are at ``p``-th power distance ``weight``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from ._validation import as_fraction, fraction_str


@dataclass
class DenseBlock:
    num: np.ndarray  # (n_points, k) integer numerators
    den: int
    weights: tuple[Fraction, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        self.num = np.asarray(self.num, dtype=np.int64).reshape(len(self.num), len(self.weights))
        self.weights = tuple(as_fraction(w) for w in self.weights)

    @property
    def dim(self) -> int:
        return len(self.weights)


@dataclass
class PartitionBlock:
    labels: np.ndarray  # part index per point
    weight: Fraction
    name: str = "part"

    def __post_init__(self):
        _, self.labels = np.unique(np.asarray(self.labels), return_inverse=True)
        self.labels = self.labels.astype(np.int64).ravel()
        self.weight = as_fraction(self.weight)

    @property
    def dim(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0


@dataclass
class EmbeddingTable:
    points: list
    p: int = 1
    blocks: list = field(default_factory=list)

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("exact tables support integer exponents p >= 1")
        self.p = int(self.p)
        for b in self.blocks:
            n = len(b.labels) if isinstance(b, PartitionBlock) else b.num.shape[0]
            if n != len(self.points):
                raise ValueError("block row count does not match the point list")

    @property
    def dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    def concat(self, other: "EmbeddingTable") -> "EmbeddingTable":
        if other.p != self.p or list(other.points) != list(self.points):
            raise ValueError("tables must share points and exponent")
        return EmbeddingTable(list(self.points), self.p, self.blocks + other.blocks)

    def pnorm_p(self, i: int, j: int) -> Fraction:
        """``||f(i) - f(j)||_p ** p`` as an exact rational."""
        total = Fraction(0)
        p = self.p
        for b in self.blocks:
            if isinstance(b, PartitionBlock):
                if b.labels[i] != b.labels[j]:
                    total += b.weight
            else:
                diff = np.abs(b.num[i] - b.num[j])
                for w, dv in zip(b.weights, diff.tolist()):
                    if dv:
                        total += w * Fraction(dv, b.den) ** p
        return total

    def _scale(self) -> int:
        den = 1
        for b in self.blocks:
            if isinstance(b, PartitionBlock):
                den = lcm(den, b.weight.denominator)
            else:
                for w in b.weights:
                    den = lcm(den, w.denominator * b.den**self.p)
        return den

    def pair_pnorm_ints(self, ia, ib) -> tuple[np.ndarray, int]:
        """Vectorised ``||f(a) - f(b)||_p^p`` as ``(integers, denominator)``."""
        ia = np.asarray(ia, dtype=np.intp)
        ib = np.asarray(ib, dtype=np.intp)
        den = self._scale()
        out = np.zeros(len(ia), dtype=np.int64)
        for b in self.blocks:
            if isinstance(b, PartitionBlock):
                out += (b.labels[ia] != b.labels[ib]) * (b.weight * den).numerator
            else:
                factors = np.array(
                    [(w * den / Fraction(b.den) ** self.p).numerator for w in b.weights], dtype=np.int64
                )
                if b.dim:
                    out += (np.abs(b.num[ia] - b.num[ib]) ** self.p * factors[None, :]).sum(axis=1)
        return out, den

    def pairwise_pnorm_p(self) -> list[list[Fraction]]:
        n = len(self.points)
        ia, ib = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        vals, den = self.pair_pnorm_ints(ia.ravel(), ib.ravel())
        return [[Fraction(int(v), den) for v in row] for row in vals.reshape(n, n)]

    def columns(self) -> list[str]:
        cols = []
        for k, b in enumerate(self.blocks):
            if isinstance(b, PartitionBlock):
                cols += [f"{b.name}[{j}]" for j in range(b.dim)]
            else:
                cols += list(b.names)
        return cols

    def coordinates(self) -> list[list]:
        """Explicit coordinates: exact rationals for ``p = 1``, floats otherwise."""
        rows = []
        for i in range(len(self.points)):
            row = []
            for b in self.blocks:
                if isinstance(b, PartitionBlock):
                    c = b.weight / 2
                    val = c if self.p == 1 else float(c) ** (1 / self.p)
                    row += [val if b.labels[i] == j else 0 for j in range(b.dim)]
                else:
                    for w, v in zip(b.weights, b.num[i].tolist()):
                        q = Fraction(v, b.den)
                        row.append(w * q if self.p == 1 else float(w) ** (1 / self.p) * float(q))
            rows.append(row)
        return rows

    def to_csv(self) -> str:
        lines = ["point," + ",".join(self.columns())]
        for label, row in zip(self.points, self.coordinates()):
            cells = [fraction_str(v) if isinstance(v, (Fraction, int)) else f"{v:.12g}" for v in row]
            lines.append(",".join([str(label)] + cells))
        return "\n".join(lines) + "\n"


def isometry_defect(table: EmbeddingTable, target: Sequence[Sequence[Fraction]]) -> Fraction:
    """Largest ``| ||f(x)-f(y)||_p^p - target(x, y) |`` over all pairs."""
    got = table.pairwise_pnorm_p()
    return max((abs(g - Fraction(t)) for gr, tr in zip(got, target) for g, t in zip(gr, tr)), default=Fraction(0))
