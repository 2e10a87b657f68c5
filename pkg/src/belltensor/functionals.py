"""Bell functionals on two-setting correlation tables: CHSH, the recursive
MABK family, the single generalized inequality over all sign choices, and
the conditional CHSH with spectators pinned to z.

Settings optimization shares the coordinate-ascent engine used for frame
optimization: multi-start, golden-section line searches over spherical
angles, deterministic per (seed, restart index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import NumericalIntegrityError, ParameterError
from .frames import TWO_PI, _line_search, full_block
from .states import CorrelationTensor, DensityMatrix, StateVector, correlation_tensor, density_of

FUNCTIONALS = ("CHSH", "MABK", "WWZB", "COND-CHSH")
LOCAL_BOUNDS = {"CHSH": 2.0, "MABK": 2.0, "WWZB": 1.0, "COND-CHSH": 2.0}

_H = np.array([[1.0, 1.0], [1.0, -1.0]])


def _unit(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise ParameterError(f"{what} must be a 3-vector, got shape {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ParameterError(f"{what} must have unit norm within 1e-12")
    return v


@dataclass(frozen=True)
class MeasurementSettings:
    """Two unit direction vectors per observer, shape (n, 2, 3)."""

    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 3 or v.shape[1:] != (2, 3):
            raise ParameterError(f"expected an (n, 2, 3) array, got {v.shape}")
        norms = np.linalg.norm(v, axis=2)
        if np.abs(norms - 1.0).max() > 1e-12:
            raise ParameterError("setting vectors must have unit norm within 1e-12")
        object.__setattr__(self, "vectors", v)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    def angles(self) -> np.ndarray:
        """Spherical (theta, phi) per vector, shape (n, 2, 2)."""
        v = self.vectors
        theta = np.arccos(np.clip(v[..., 2], -1.0, 1.0))
        phi = np.arctan2(v[..., 1], v[..., 0])
        return np.stack([theta, phi], axis=-1)

    @staticmethod
    def from_angles(angles: np.ndarray) -> "MeasurementSettings":
        a = np.asarray(angles, dtype=float)
        return MeasurementSettings(_sphere(a[..., 0], a[..., 1]))


def _sphere(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


@dataclass(frozen=True)
class CorrelationTable:
    """Full-correlation values E(k_1..k_n) for two settings per observer."""

    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape((2,) * self.n)
        if np.abs(v).max() > 1.0 + 1e-9:
            raise ParameterError("correlation values must lie in [-1, 1]")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class BellResult:
    functional: str
    value: float
    local_bound: float
    settings: MeasurementSettings

    @property
    def violated(self) -> bool:
        return self.value > self.local_bound + 1e-9


def result_to_json_dict(res: BellResult) -> dict:
    return {
        "functional": res.functional,
        "value": res.value,
        "local_bound": res.local_bound,
        "violated": res.violated,
        "settings": res.settings.angles().tolist(),
    }


# ---------------------------------------------------------------------------
# evaluation


def expectation(state: StateVector, directions: Sequence[np.ndarray]) -> float:
    """<(n_1 . sigma) x ... x (n_n . sigma)> evaluated directly in the state."""
    if len(directions) != state.n:
        raise ParameterError(f"need {state.n} directions, got {len(directions)}")
    from .states import PAULI

    work = state.amplitudes.reshape((2,) * state.n)
    for d in directions:
        d = _unit(d, "measurement direction")
        op = d[0] * PAULI[1] + d[1] * PAULI[2] + d[2] * PAULI[3]
        work = np.tensordot(work, op.T, axes=(0, 0))
    val = complex(np.vdot(state.amplitudes, work.reshape(-1)))
    if abs(val.imag) > 1e-9:
        raise NumericalIntegrityError(f"imaginary residue {val.imag:g} in expectation")
    return float(val.real)


def _table_from_block(t3: np.ndarray, blocks: Sequence[np.ndarray]) -> np.ndarray:
    w = t3
    for b in blocks:
        w = np.tensordot(w, b, axes=(0, 1))
    return w


def correlation_table(state: StateVector, settings: MeasurementSettings) -> CorrelationTable:
    """All 2^n setting combinations, via one tensor contraction per site."""
    if settings.n != state.n:
        raise ParameterError(f"state has {state.n} sites but settings has {settings.n}")
    t3 = full_block(correlation_tensor(density_of(state)))
    table = _table_from_block(t3, list(settings.vectors))
    return CorrelationTable(state.n, table)


_CHSH_SIGNS = [
    np.array([[1.0, 1.0], [1.0, -1.0]]),
    np.array([[1.0, 1.0], [-1.0, 1.0]]),
    np.array([[1.0, -1.0], [1.0, 1.0]]),
    np.array([[-1.0, 1.0], [1.0, 1.0]]),
]


def chsh(table: CorrelationTable) -> float:
    """Max over the eight sign conventions of the CHSH combination (bound 2)."""
    if table.n != 2:
        raise ParameterError("chsh needs a two-observer table")
    return max(float(abs((s * table.values).sum())) for s in _CHSH_SIGNS)


@lru_cache(maxsize=None)
def mabk_coefficients(n: int) -> np.ndarray:
    """Coefficient table of the n-observer MABK polynomial, normalized so the
    local bound is 2 for every n.  Recursion halves the sum and difference of
    the previous polynomial and its settings-swapped twin."""
    if n < 2:
        raise ParameterError("MABK needs n >= 2")
    c = np.array([[1.0, 1.0], [1.0, -1.0]])
    for _ in range(3, n + 1):
        swapped = c[(slice(None, None, -1),) * c.ndim]
        c = np.stack([0.5 * (c + swapped), 0.5 * (c - swapped)], axis=c.ndim)
    out = c.copy()
    out.flags.writeable = False
    return out


def mabk(table: CorrelationTable) -> float:
    return float((mabk_coefficients(table.n) * table.values).sum())


def _sign_transform(values: np.ndarray) -> np.ndarray:
    w = values
    for _ in range(values.ndim):
        w = np.tensordot(w, _H, axes=(0, 1))
    return w


def wwzb(table: CorrelationTable) -> float:
    """2^-n sum over all sign vectors of |transformed table|; at most 1 for
    tables admitting a local realistic model."""
    return float(np.abs(_sign_transform(table.values)).sum()) / 2**table.n


def conditional_chsh(state: StateVector, pair_settings: MeasurementSettings) -> float:
    """CHSH value of E(n_k1, n_k2, z, ..., z) for an even number of qubits.

    Spectator observers 3..n measure along z for both of their settings, so
    the table is the full-correlation function with those slots fixed.
    """
    if state.n % 2 != 0:
        raise ParameterError("conditional CHSH is defined for even n")
    if pair_settings.n != 2:
        raise ParameterError("pair_settings must cover exactly observers 1 and 2")
    t3 = full_block(correlation_tensor(density_of(state)))
    eff = t3[(slice(None), slice(None)) + (2,) * (state.n - 2)]
    table = _table_from_block(eff, list(pair_settings.vectors))
    return chsh(CorrelationTable(2, table))


# ---------------------------------------------------------------------------
# settings optimization


class _SettingsAscent:
    """Coordinate ascent over spherical setting angles for one functional."""

    def __init__(self, t3: np.ndarray, functional: str, tol: float, max_sweeps: int):
        self.n = t3.ndim
        self.functional = functional
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.t3 = t3
        if functional == "MABK":
            coeff = np.asarray(mabk_coefficients(self.n))
            self.coeff_kfirst = [
                np.moveaxis(coeff, k, 0).reshape(2, -1) for k in range(self.n)
            ]

    def _blocks(self, angles: np.ndarray) -> list[np.ndarray]:
        return [_sphere(angles[k, :, 0], angles[k, :, 1]) for k in range(self.n)]

    def _value_kfirst(self, table_kfirst: np.ndarray, k: int) -> float:
        if self.functional == "MABK":
            return float((self.coeff_kfirst[k] * table_kfirst).sum())
        if self.functional == "WWZB":
            return float(np.abs(table_kfirst).sum()) / 2**self.n
        # CHSH on two observers; k-first layout is symmetric
        t = table_kfirst.reshape(2, 2)
        return max(float(abs((s * t).sum())) for s in _CHSH_SIGNS)

    def _others(self, blocks, k) -> np.ndarray:
        use = blocks
        if self.functional == "WWZB":
            use = [_H @ b for b in blocks]
        w = np.moveaxis(self.t3, k, 0)
        for j in range(self.n):
            if j != k:
                w = np.tensordot(w, use[j], axes=(1, 1))
        return w.reshape(3, -1)

    def _row_transform(self, m: np.ndarray) -> np.ndarray:
        return _H @ m if self.functional == "WWZB" else m

    def run(self, angles: np.ndarray):
        blocks = self._blocks(angles)
        value = self._full_value(blocks)
        converged = False
        for _ in range(self.max_sweeps):
            prev = value
            for k in range(self.n):
                w = self._others(blocks, k)
                for vec in range(2):
                    for a in range(2):

                        def f(x, _w=w, _k=k, _vec=vec, _a=a):
                            ang = angles[_k].copy()
                            ang[_vec, _a] = x
                            m = _sphere(ang[:, 0], ang[:, 1])
                            return self._value_kfirst(self._row_transform(m) @ _w, _k)

                        x, value = _line_search(f, angles[k, vec, a], f(angles[k, vec, a]))
                        angles[k, vec, a] = x % TWO_PI
                blocks[k] = _sphere(angles[k, :, 0], angles[k, :, 1])
            if value - prev <= self.tol * max(1.0, abs(value)):
                converged = True
                break
        return value, angles, converged

    def _full_value(self, blocks) -> float:
        table = _table_from_block(self.t3, blocks)
        if self.functional == "MABK":
            return float((np.asarray(mabk_coefficients(self.n)) * table).sum())
        if self.functional == "WWZB":
            return float(np.abs(_sign_transform(table)).sum()) / 2**self.n
        return max(float(abs((s * table).sum())) for s in _CHSH_SIGNS)


def _normalize_label(functional: str) -> str:
    label = functional.strip().upper().replace("_", "-")
    if label not in FUNCTIONALS:
        raise ParameterError(f"unknown functional {functional!r}; choose from {FUNCTIONALS}")
    return label


def _check_applicable(label: str, n: int) -> None:
    if label == "CHSH" and n != 2:
        raise ParameterError("CHSH applies to exactly two observers")
    if label == "COND-CHSH" and n % 2 != 0:
        raise ParameterError("conditional CHSH needs an even number of observers")


def optimize_settings(state: StateVector, functional: str, config) -> BellResult:
    result, _ = optimize_settings_full(state, functional, config)
    return result


def optimize_settings_full(state: StateVector, functional: str, config):
    """Multi-start settings optimization; returns (BellResult, restarts that
    agree with the best value)."""
    label = _normalize_label(functional)
    n = state.n
    _check_applicable(label, n)

    t3 = full_block(correlation_tensor(density_of(state)))
    if label == "COND-CHSH":
        eff = t3[(slice(None), slice(None)) + (2,) * (n - 2)]
        problem = _SettingsAscent(np.ascontiguousarray(eff), "CHSH", config.tolerance,
                                  config.max_iterations)
        sites = 2
    else:
        problem = _SettingsAscent(t3, label, config.tolerance, config.max_iterations)
        sites = n

    records = []
    for r in range(config.restarts):
        if r == 0:
            # z for setting 1, x for setting 2 on every site
            angles0 = np.zeros((sites, 2, 2))
            angles0[:, 1, 0] = math.pi / 2
        else:
            rng = np.random.default_rng([config.seed, r])
            angles0 = np.empty((sites, 2, 2))
            angles0[..., 0] = np.arccos(rng.uniform(-1.0, 1.0, size=(sites, 2)))
            angles0[..., 1] = rng.uniform(0.0, TWO_PI, size=(sites, 2))
        records.append(problem.run(angles0))

    best = max(range(len(records)), key=lambda i: records[i][0])
    value, angles, _ = records[best]
    agree_tol = max(1e-8, 100.0 * config.tolerance) * max(1.0, abs(value))
    agreeing = sum(1 for rec in records if rec[0] >= value - agree_tol)

    if label == "COND-CHSH":
        full = np.zeros((n, 2, 2))
        full[:2] = angles  # spectators keep theta = 0, i.e. z, for both settings
        settings = MeasurementSettings.from_angles(full)
    else:
        settings = MeasurementSettings.from_angles(angles)
    result = BellResult(
        functional=label,
        value=value,
        local_bound=LOCAL_BOUNDS[label],
        settings=settings,
    )
    return result, agreeing
