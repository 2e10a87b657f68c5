"""Exact enumeration-based ground truth for the two-setting full-correlation
polytope at small observer counts.

Everything here is integer arithmetic until a quantum table enters: vertex
tables are products of predetermined outcomes, local bounds are maxima over
every deterministic strategy, and membership checks a table against the
complete family of tight inequalities.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, ParameterError
from .functionals import CorrelationTable

MAX_BOUND_QUBITS = 6   # single local_bound calls
MAX_ENUM_QUBITS = 4    # full 2^(2^n) enumeration

# per-site deterministic outcome pairs (a(1), a(2))
_PAIRS = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=np.int64)

_H = np.array([[1, 1], [1, -1]], dtype=np.int64)


@dataclass(frozen=True)
class SignTensor:
    """One sign in {-1, +1} per setting combination k in {1,2}^n."""

    n: int
    signs: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=np.int64).reshape((2,) * self.n)
        if not np.all(np.abs(s) == 1):
            raise ParameterError("sign tensor entries must be exactly +-1")
        object.__setattr__(self, "signs", s)

    def bits_hex(self) -> str:
        """Hex encoding: bit i (row-major flat index, site 1 most significant,
        leftmost bit = index 0) is 1 where the sign is -1."""
        flat = self.signs.reshape(-1)
        value = 0
        for s in flat:
            value = (value << 1) | (1 if s < 0 else 0)
        width = max(1, len(flat) // 4)
        return f"{value:0{width}x}"


@dataclass(frozen=True)
class DeterministicStrategy:
    """Predetermined outcomes (a_j(1), a_j(2)) in {-1,+1}^2 per observer."""

    outcomes: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for pair in self.outcomes:
            if tuple(abs(x) for x in pair) != (1, 1):
                raise ParameterError("outcomes must be +-1 pairs")

    @property
    def n(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True)
class InequalityRecord:
    sign_tensor: SignTensor
    local_bound: int


def strategies(n: int) -> Iterable[DeterministicStrategy]:
    """All 4^n deterministic strategies for n observers."""
    for assign in itertools.product([(1, 1), (1, -1), (-1, 1), (-1, -1)], repeat=n):
        yield DeterministicStrategy(assign)


def strategy_table(strategy: DeterministicStrategy) -> CorrelationTable:
    """The vertex table E(k) = prod_j a_j(k_j) of one strategy."""
    n = strategy.n
    table = np.ones((2,) * n)
    for j, pair in enumerate(strategy.outcomes):
        shape = [1] * n
        shape[j] = 2
        table = table * np.asarray(pair, dtype=float).reshape(shape)
    return CorrelationTable(n, table)


@lru_cache(maxsize=None)
def _vertex_matrix(n: int) -> np.ndarray:
    """(4^n, 2^n) integer matrix: row = one strategy's vertex table."""
    s_idx = np.arange(4**n)
    k_idx = np.arange(2**n)
    out = np.ones((4**n, 2**n), dtype=np.int64)
    for j in range(n):
        dj = (s_idx // 4 ** (n - 1 - j)) % 4
        kb = (k_idx // 2 ** (n - 1 - j)) % 2
        out *= _PAIRS[dj][:, kb]
    out.flags.writeable = False
    return out


def max_over_strategies(coeffs: np.ndarray) -> float:
    """Exact maximum of sum_k coeffs(k) prod_j a_j(k_j) over all strategies."""
    c = np.asarray(coeffs)
    n = c.ndim if c.ndim > 1 else int(np.log2(c.size))
    if c.size != 2**n:
        raise ParameterError(f"coefficient table size {c.size} is not 2^n")
    if n > MAX_BOUND_QUBITS:
        raise CapacityError(f"strategy enumeration capped at n <= {MAX_BOUND_QUBITS}")
    vals = _vertex_matrix(n) @ c.reshape(-1)
    return vals.max()


def local_bound(s: SignTensor) -> int:
    """Largest value any deterministic strategy gives the signed sum."""
    if s.n > MAX_BOUND_QUBITS:
        raise CapacityError(f"local_bound capped at n <= {MAX_BOUND_QUBITS}")
    return int(max_over_strategies(s.signs))


def _all_sign_rows(m: int) -> np.ndarray:
    """(2^m, m) matrix of every +-1 vector; bit 0 of the row index is the
    leftmost entry, 0 bit -> +1."""
    idx = np.arange(2**m, dtype=np.uint64)
    bits = (idx[:, None] >> np.arange(m - 1, -1, -1, dtype=np.uint64)[None, :]) & 1
    return (1 - 2 * bits.astype(np.int64))


def enumerate_inequalities(n: int) -> list[InequalityRecord]:
    """Every +-1 sign tensor with its exact strategy-enumeration bound."""
    if n > MAX_ENUM_QUBITS:
        raise CapacityError(f"enumeration capped at n <= {MAX_ENUM_QUBITS}")
    m = 2**n
    rows = _all_sign_rows(m)
    verts = _vertex_matrix(n)
    bounds = np.empty(2**m, dtype=np.int64)
    chunk = 4096
    for lo in range(0, 2**m, chunk):
        bounds[lo : lo + chunk] = (rows[lo : lo + chunk] @ verts.T).max(axis=1)
    return [
        InequalityRecord(SignTensor(n, rows[i].reshape((2,) * n)), int(bounds[i]))
        for i in range(2**m)
    ]


@lru_cache(maxsize=None)
def _facet_family(n: int):
    """Complete family of tight full-correlation inequalities.

    One inequality per sign choice over the 2^n transform coordinates; the
    coefficient tables are the integer transforms of those sign vectors and
    the bounds come from exact strategy enumeration.  This family describes
    the polytope completely, which the +-1 catalog alone does not.
    """
    m = 2**n
    hk = _H
    for _ in range(n - 1):
        hk = np.kron(hk, _H)
    sigma = _all_sign_rows(m)
    coeffs = sigma @ hk  # (2^m, m) integer coefficient tables
    verts = _vertex_matrix(n)
    bounds = np.empty(2**m, dtype=np.int64)
    chunk = 4096
    for lo in range(0, 2**m, chunk):
        bounds[lo : lo + chunk] = (coeffs[lo : lo + chunk] @ verts.T).max(axis=1)
    return coeffs, bounds


def lhv_member(table: CorrelationTable, atol: float = 1e-9) -> bool:
    """True iff the table admits a local hidden variable model.

    Checks every inequality of the complete sign-choice family at its exact
    enumerated bound.
    """
    if table.n > MAX_ENUM_QUBITS:
        raise CapacityError(f"membership test capped at n <= {MAX_ENUM_QUBITS}")
    coeffs, bounds = _facet_family(table.n)
    vals = coeffs @ table.values.reshape(-1)
    return bool(np.all(vals <= bounds + atol))


def catalog_csv_lines(records: Sequence[InequalityRecord]) -> list[str]:
    lines = ["sign_bits_hex,local_bound"]
    lines += [f"{r.sign_tensor.bits_hex()},{r.local_bound}" for r in records]
    return lines


def write_catalog_csv(records: Sequence[InequalityRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(catalog_csv_lines(records)) + "\n")
