"""States, density matrices and Pauli correlation tensors for qubit registers.

Conventions used throughout the package:

* sites are numbered 1..n, site 1 is the most significant bit of a
  computational basis index (so |10> of two qubits has index 2);
* correlation tensors are stored flat, base-4 row-major with site 1 as the
  most significant digit; digit 0 is the identity, 1/2/3 are Pauli x/y/z;
* |0> and |1> are the +1 and -1 eigenstates of sigma_z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    NumericalIntegrityError,
    ParameterError,
    PostselectionError,
)

MAX_QUBITS = 12  # dense 4^n storage cap
TENSOR_ORDER = "base4-rowmajor-site1-msb"

PAULI = np.stack(
    [
        np.eye(2, dtype=complex),
        np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
        np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
        np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
    ]
)

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not 2 <= n <= MAX_QUBITS:
        raise ParameterError(f"qubit count must be an integer in [2, {MAX_QUBITS}], got {n!r}")


@dataclass(frozen=True)
class GhzParams:
    """Family parameters: qubit count and the mixing angle in radians."""

    n: int
    alpha: float

    def __post_init__(self):
        _check_n(self.n)
        if not (0.0 <= self.alpha <= math.pi / 4 + 1e-15):
            raise ParameterError(f"alpha must lie in [0, pi/4], got {self.alpha!r}")

    @property
    def sin_2alpha(self) -> float:
        return math.sin(2.0 * self.alpha)


@dataclass(frozen=True)
class StateVector:
    """Pure state of n qubits as 2^n complex amplitudes (unit norm)."""

    n: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_n(self.n)
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape != (2**self.n,):
            raise ParameterError(f"expected {2**self.n} amplitudes, got {amp.shape}")
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ParameterError(f"state not normalized: |psi|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", amp)

    def fidelity(self, other: "StateVector") -> float:
        """|<self|other>|^2."""
        if other.n != self.n:
            raise ParameterError("fidelity needs equal qubit counts")
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed or pure state of n qubits as a 2^n x 2^n matrix."""

    n: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_n(self.n)
        m = np.asarray(self.entries, dtype=complex)
        dim = 2**self.n
        if m.shape != (dim, dim):
            raise ParameterError(f"expected a {dim}x{dim} matrix, got {m.shape}")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ParameterError("density matrix is not Hermitian within 1e-12")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > 1e-12:
            raise ParameterError(f"density matrix trace is {tr!r}, not 1")
        object.__setattr__(self, "entries", m)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))


@dataclass(frozen=True)
class CorrelationTensor:
    """Expectation values of all 4^n Pauli products, stored flat.

    entries[i] with i read as base-4 digits (site 1 most significant) is
    Tr[rho sigma_{x1} x ... x sigma_{xn}].
    """

    n: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_n(self.n)
        e = np.asarray(self.entries, dtype=float).reshape(-1)
        if e.shape != (4**self.n,):
            raise ParameterError(f"expected {4**self.n} entries, got {e.shape}")
        if np.abs(e).max() > 1.0 + 1e-12:
            raise ParameterError("tensor entries must lie in [-1, 1]")
        if abs(e[0] - 1.0) > 1e-12:
            raise ParameterError("tensor entry (0,...,0) must equal 1")
        object.__setattr__(self, "entries", e)

    def grid(self) -> np.ndarray:
        """Read-only (4,)*n view of the flat entries."""
        g = self.entries.reshape((4,) * self.n)
        g.flags.writeable = False
        return g

    def entry(self, idx: Sequence[int]) -> float:
        if len(idx) != self.n or any(not 0 <= i <= 3 for i in idx):
            raise ParameterError(f"bad tensor index {idx!r}")
        return float(self.grid()[tuple(idx)])


def index_to_digits(i: int, n: int) -> tuple[int, ...]:
    """Base-4 digits of a flat tensor index, site 1 first."""
    return tuple((i // 4**k) % 4 for k in range(n - 1, -1, -1))


def digits_to_index(digits: Sequence[int]) -> int:
    i = 0
    for d in digits:
        i = 4 * i + int(d)
    return i


def make_ghz(params: GhzParams) -> StateVector:
    """cos(alpha)|0...0> + sin(alpha)|1...1>."""
    amp = np.zeros(2**params.n, dtype=complex)
    amp[0] = math.cos(params.alpha)
    amp[-1] = math.sin(params.alpha)
    return StateVector(params.n, amp)


def density_of(state: StateVector) -> DensityMatrix:
    """Outer product |psi><psi|."""
    return DensityMatrix(state.n, np.outer(state.amplitudes, state.amplitudes.conj()))


def correlation_tensor(rho: DensityMatrix) -> CorrelationTensor:
    """All 4^n Pauli expectation values of rho.

    Contracts rho (as a 2n-index array) with one Pauli stack per site in a
    single einsum; raises if the imaginary residue exceeds 1e-9 before the
    (checked) residue is discarded.
    """
    n = rho.n
    work = rho.entries.reshape((2,) * (2 * n))
    rows, cols, outs = _LETTERS[:n], _LETTERS[n : 2 * n], _LETTERS[2 * n : 3 * n]
    script = (
        rows + cols
        + "," + ",".join(outs[k] + cols[k] + rows[k] for k in range(n))
        + "->" + outs
    )
    t = np.einsum(script, work, *([PAULI] * n), optimize="greedy")
    residue = float(np.abs(t.imag).max())
    if residue > 1e-9:
        raise NumericalIntegrityError(f"imaginary residue {residue:g} in correlation tensor")
    return CorrelationTensor(n, np.ascontiguousarray(t.real).reshape(-1))


def analytic_ghz_tensor(params: GhzParams) -> CorrelationTensor:
    """Closed-form correlation tensor of the generalized GHZ family.

    Full-correlation part: T_{z..z} is 1 for even n and cos(2 alpha) for odd
    n; indices drawn from {x, y} with 2k y's carry (-1)^k sin(2 alpha); every
    entry mixing the xy plane with z or identity vanishes.  Identity-padded
    entries follow from the reduced states: a pattern of m z's among
    identities gives 1 for even m and cos(2 alpha) for odd m.
    """
    n, alpha = params.n, params.alpha
    dim = 4**n
    cos2a, sin2a = math.cos(2 * alpha), math.sin(2 * alpha)

    n_zero = np.zeros(dim, dtype=np.int8)
    n_x = np.zeros(dim, dtype=np.int8)
    n_y = np.zeros(dim, dtype=np.int8)
    idx = np.arange(dim)
    for k in range(n):
        d = (idx // 4**k) % 4
        n_zero += d == 0
        n_x += d == 1
        n_y += d == 2
    n_z = n - n_zero - n_x - n_y

    vals = np.zeros(dim)
    diag = (n_x == 0) & (n_y == 0)
    vals[diag & (n_z % 2 == 0)] = 1.0
    vals[diag & (n_z % 2 == 1)] = cos2a
    plane = (n_zero == 0) & (n_z == 0) & (n_y % 2 == 0)
    vals[plane] = np.where((n_y[plane] // 2) % 2 == 0, sin2a, -sin2a)
    return CorrelationTensor(n, vals)


def _site_axes(n: int, sites: Iterable[int]) -> list[int]:
    axes = sorted(set(int(s) for s in sites))
    if any(not 1 <= s <= n for s in axes):
        raise ParameterError(f"site indices must lie in 1..{n}, got {axes}")
    return axes


def reduce(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Partial trace onto the given (1-based) sites.

    keep must be a nonempty proper subset of 1..n.
    """
    n = rho.n
    kept = _site_axes(n, keep)
    if not kept or len(kept) == n:
        raise ParameterError("keep must be a nonempty proper subset of sites")
    work = rho.entries.reshape((2,) * (2 * n))
    row = list(_LETTERS[:n])
    col = list(_LETTERS[n : 2 * n])
    for s in range(1, n + 1):
        if s not in kept:
            col[s - 1] = row[s - 1]  # repeated index sums over that site
    out = "".join(row[s - 1] for s in kept) + "".join(_LETTERS[n + s - 1] for s in kept)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, work)
    dim = 2 ** len(kept)
    return DensityMatrix(len(kept), reduced.reshape(dim, dim))


_PRIMED = {
    0: np.array([1.0, 1.0]) / math.sqrt(2.0),
    1: np.array([1.0, -1.0]) / math.sqrt(2.0),
}


def postselection_probability(
    state: StateVector, measured_sites: Iterable[int], outcomes: Sequence[int]
) -> float:
    """Probability of the given primed-basis outcome pattern."""
    _, prob = _postselect(state, measured_sites, outcomes)
    return prob


def postselect_primed(
    state: StateVector, measured_sites: Iterable[int], outcomes: Sequence[int]
) -> StateVector:
    """Conditional state of the unmeasured sites after primed-basis results.

    The primed basis is |0'> = (|0>+|1>)/sqrt2, |1'> = (|0>-|1>)/sqrt2.
    outcomes aligns with measured_sites in ascending site order.  Raises
    PostselectionError when the outcome has probability below 1e-14.
    """
    vec, prob = _postselect(state, measured_sites, outcomes)
    if prob < 1e-14:
        raise PostselectionError(f"outcome probability {prob:g} below 1e-14")
    return StateVector(vec.ndim, (vec / math.sqrt(prob)).reshape(-1))


def _postselect(state, measured_sites, outcomes):
    n = state.n
    sites = _site_axes(n, measured_sites)
    if not sites or len(sites) == n:
        raise ParameterError("measured sites must be a nonempty proper subset")
    outcomes = list(outcomes)
    if len(outcomes) != len(sites) or any(o not in (0, 1) for o in outcomes):
        raise ParameterError("need one outcome label in {0, 1} per measured site")
    work = state.amplitudes.reshape((2,) * n)
    for site, out in sorted(zip(sites, outcomes), reverse=True):
        work = np.tensordot(_PRIMED[out], work, axes=(0, site - 1))
    prob = float(np.sum(np.abs(work) ** 2))
    return work, prob


# ---------------------------------------------------------------------------
# serialization


def state_to_json_dict(state: StateVector) -> dict:
    return {
        "n": state.n,
        "re": state.amplitudes.real.tolist(),
        "im": state.amplitudes.imag.tolist(),
    }


def state_from_json_dict(obj: Mapping) -> StateVector:
    amp = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    return StateVector(int(obj["n"]), amp)


def tensor_to_json_dict(t: CorrelationTensor) -> dict:
    return {"n": t.n, "order": TENSOR_ORDER, "entries": t.entries.tolist()}


def tensor_from_json_dict(obj: Mapping) -> CorrelationTensor:
    if obj.get("order", TENSOR_ORDER) != TENSOR_ORDER:
        raise ParameterError(f"unsupported tensor order {obj.get('order')!r}")
    return CorrelationTensor(int(obj["n"]), np.asarray(obj["entries"], dtype=float))
