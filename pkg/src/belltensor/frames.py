"""Local-frame transformations of correlation tensors and the two
plane-sector criteria evaluated and maximized over all local rotations.

The in-plane pair of axes is fixed to (x, y); arbitrary local rotations of
the full tensor sweep every other choice.  Frames are parameterized by Euler
angles in the z, x', z'' convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce as _freduce
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalIntegrityError, ParameterError
from .states import CorrelationTensor, GhzParams, analytic_ghz_tensor

TWO_PI = 2.0 * math.pi

#: verdict threshold for optimizer outputs
VIOLATION_TOL = 1e-6
#: verdict threshold for analytic constructions
EXACT_TOL = 1e-9


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


@dataclass(frozen=True)
class EulerAngles:
    """z/x'/z'' angles in radians, canonicalized into [0, 2pi)."""

    phi: float
    theta: float
    psi: float

    def __post_init__(self):
        for name in ("phi", "theta", "psi"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, v % TWO_PI)

    @property
    def sin_theta(self) -> float:
        return math.sin(self.theta)

    @property
    def cos_theta(self) -> float:
        return math.cos(self.theta)


@dataclass(frozen=True)
class Rotation3:
    """Proper rotation: orthogonal within 1e-12 with determinant +1."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ParameterError(f"rotation must be 3x3, got {m.shape}")
        if np.abs(m.T @ m - np.eye(3)).max() > 1e-12:
            raise ParameterError("matrix is not orthogonal within 1e-12")
        if abs(np.linalg.det(m) - 1.0) > 1e-12:
            raise ParameterError("matrix is not a proper rotation (det != +1)")
        object.__setattr__(self, "matrix", m)


def euler_to_rotation(angles: EulerAngles) -> Rotation3:
    """R = R_z(psi) R_x(theta) R_z(phi)."""
    return Rotation3(rot_z(angles.psi) @ rot_x(angles.theta) @ rot_z(angles.phi))


@dataclass(frozen=True)
class FrameSet:
    """One local coordinate rotation per observer."""

    rotations: tuple[Rotation3, ...]

    def __post_init__(self):
        if not self.rotations:
            raise ParameterError("a frame set needs at least one rotation")
        object.__setattr__(self, "rotations", tuple(self.rotations))

    @property
    def n(self) -> int:
        return len(self.rotations)

    def matrices(self) -> np.ndarray:
        return np.stack([r.matrix for r in self.rotations])

    @staticmethod
    def identity(n: int) -> "FrameSet":
        return FrameSet(tuple(Rotation3(np.eye(3)) for _ in range(n)))

    @staticmethod
    def from_euler(angles: Sequence[EulerAngles]) -> "FrameSet":
        return FrameSet(tuple(euler_to_rotation(a) for a in angles))


@dataclass(frozen=True)
class CVectors:
    """One unit 2-vector per observer for the in-plane contraction."""

    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ParameterError(f"expected an (n, 2) array, got {v.shape}")
        norms = np.linalg.norm(v, axis=1)
        if np.abs(norms - 1.0).max() > 1e-12:
            raise ParameterError("c-vectors must have unit norm within 1e-12")
        object.__setattr__(self, "vectors", v)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    max_iterations: int = 500
    tolerance: float = 1e-9
    seed: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ParameterError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be positive")


@dataclass(frozen=True)
class CriterionResult:
    """Best value found, where it was found, and the verdict."""

    value: float
    frames: FrameSet
    euler: tuple[EulerAngles, ...]
    c: CVectors | None
    violated: bool
    certified: bool
    restarts_agreeing: int
    converged: bool


def result_to_json_dict(res: CriterionResult) -> dict:
    return {
        "value": res.value,
        "violated": res.violated,
        "certified": res.certified,
        "frames": [[a.phi, a.theta, a.psi] for a in res.euler],
        "c": None if res.c is None else res.c.vectors.tolist(),
        "restarts_agreeing": res.restarts_agreeing,
        "converged": res.converged,
    }


# ---------------------------------------------------------------------------
# tensor transformations


def _embed4(m: np.ndarray) -> np.ndarray:
    out = np.eye(4)
    out[1:, 1:] = m
    return out


def _mode_rotate(grid: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
    """Contract axis k of grid with mats[k] for every site (new = M @ old)."""
    w = grid
    for m in mats:
        w = np.tensordot(w, m, axes=(0, 1))  # appends the new axis last
    return w


def rotate_tensor(t: CorrelationTensor, frames: FrameSet) -> CorrelationTensor:
    """Re-express the tensor in new local frames.

    Site k's {1,2,3} indices are contracted with that site's rotation;
    identity indices stay untouched.
    """
    if frames.n != t.n:
        raise ParameterError(f"tensor has {t.n} sites but frame set has {frames.n}")
    mats = [_embed4(r.matrix) for r in frames.rotations]
    rotated = _mode_rotate(t.grid(), mats)
    return CorrelationTensor(t.n, np.ascontiguousarray(rotated).reshape(-1))


def full_block(t: CorrelationTensor) -> np.ndarray:
    """The (3,)*n full-correlation block (no identity indices)."""
    return np.ascontiguousarray(t.grid()[(slice(1, 4),) * t.n])


def xy_sector(t: CorrelationTensor) -> np.ndarray:
    """The (2,)*n sub-table with every index in the plane {x, y}."""
    return np.ascontiguousarray(t.grid()[(slice(1, 3),) * t.n])


def full_norm_squared(t: CorrelationTensor) -> float:
    """Sum of squared entries over indices in {1,2,3}^n (rotation invariant)."""
    return float((full_block(t) ** 2).sum())


def sector_sum_squares(t: CorrelationTensor) -> float:
    """Sum of squared entries over the xy sector."""
    return float((xy_sector(t) ** 2).sum())


def tmod_value(t: CorrelationTensor, c: CVectors) -> float:
    """Contraction of the xy-sector moduli with the per-site unit 2-vectors."""
    if c.n != t.n:
        raise ParameterError(f"tensor has {t.n} sites but c has {c.n}")
    w = np.abs(xy_sector(t))
    for v in c.vectors:
        w = np.tensordot(w, v, axes=(0, 0))
    return float(w)


def _tmod_raw(a: np.ndarray, cs: np.ndarray) -> float:
    w = a
    for v in cs:
        w = np.tensordot(w, v, axes=(0, 0))
    return float(w)


def _ascend_c(a: np.ndarray, cs: np.ndarray, tol: float = 1e-12, max_sweeps: int = 200):
    """Alternating closed-form updates of the unit 2-vectors on a
    nonnegative sector; each c_j is replaced by the normalized contraction
    over the other sites.  Returns (cs, value) at a fixed point."""
    n = a.ndim
    value = _tmod_raw(a, cs)
    for _ in range(max_sweeps):
        prev = value
        for j in range(n):
            g = a
            for m in range(n - 1, -1, -1):
                if m != j:
                    g = np.tensordot(cs[m], g, axes=(0, m))
            norm = math.hypot(float(g[0]), float(g[1]))
            if norm < 1e-300:
                cs[j] = (1.0, 0.0)
            else:
                cs[j] = g / norm
                value = norm
        if value - prev <= tol * max(1.0, value):
            break
    return cs, value


def best_c(t: CorrelationTensor, tol: float = 1e-12, max_sweeps: int = 500):
    """Maximize the modulus contraction over unit 2-vectors.

    Since the sector is taken in absolute value the maximizer can be chosen
    with nonnegative components; for an all-zero sector an arbitrary valid
    choice with value 0 is returned.
    """
    a = np.abs(xy_sector(t))
    cs = np.full((t.n, 2), 1.0 / math.sqrt(2.0))
    if a.max() == 0.0:
        return CVectors(np.tile([1.0, 0.0], (t.n, 1))), 0.0
    cs, value = _ascend_c(a, cs, tol=tol, max_sweeps=max_sweeps)
    return CVectors(cs), value


# ---------------------------------------------------------------------------
# frame optimization


def _euler_matrix(phi: float, theta: float, psi: float) -> np.ndarray:
    return rot_z(psi) @ rot_x(theta) @ rot_z(phi)


def _golden_max(f, a: float, b: float, xtol: float, best):
    """Golden-section maximization on [a, b]; best = (x, value) seen so far."""
    invphi = 0.6180339887498949
    best_x, best_v = best
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    if fc > best_v:
        best_x, best_v = c, fc
    if fd > best_v:
        best_x, best_v = d, fd
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
            if fc > best_v:
                best_x, best_v = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
            if fd > best_v:
                best_x, best_v = d, fd
    return best_x, best_v


def _line_search(f: Callable[[float], float], x0: float, v0: float,
                 coarse: int = 16, xtol: float = 1e-7):
    """Maximize a 2pi-periodic objective along one angle.

    Coarse scan to bracket the best basin, then golden-section refinement.
    Never returns a point worse than (x0, v0).
    """
    step = TWO_PI / coarse
    best_x, best_v = x0, v0
    for i in range(1, coarse):
        x = x0 + i * step
        v = f(x)
        if v > best_v:
            best_x, best_v = x, v
    return _golden_max(f, best_x - step, best_x + step, xtol, (best_x, best_v))


def _sector_matrix(t3: np.ndarray, blocks: list[np.ndarray], k: int) -> np.ndarray:
    """t3 contracted with every site's 2x3 block except site k.

    Returns a (3, 2^(n-1)) matrix: axis 0 is site k's free direction index,
    columns run over the other sites' plane indices in site order.
    """
    w = np.moveaxis(t3, k, 0)
    for j in range(t3.ndim):
        if j != k:
            w = np.tensordot(w, blocks[j], axes=(1, 1))
    return w.reshape(3, -1)


def _kron_vec(vecs) -> np.ndarray:
    return _freduce(np.kron, vecs)


class _FrameAscent:
    """One restart of coordinate ascent over per-site Euler angles."""

    def __init__(self, t3: np.ndarray, mode: str, config: OptimizerConfig):
        self.t3 = t3
        self.n = t3.ndim
        self.mode = mode  # "tmod" or "sumsq"
        self.config = config

    def run(self, angles: np.ndarray):
        n, mode = self.n, self.mode
        tol = self.config.tolerance
        blocks = [_euler_matrix(*angles[k])[:2] for k in range(n)]
        cs = np.full((n, 2), 1.0 / math.sqrt(2.0))
        value = self._resolve(blocks, cs)
        converged = False
        for _ in range(self.config.max_iterations):
            prev = value
            for k in range(n):
                w = _sector_matrix(self.t3, blocks, k)
                for a in range(3):
                    if mode == "tmod":
                        v_others = _kron_vec([cs[j] for j in range(n) if j != k])
                        ck = cs[k]

                        def f(x, _w=w, _vo=v_others, _ck=ck, _k=k, _a=a):
                            ang = angles[_k].copy()
                            ang[_a] = x
                            u = _euler_matrix(*ang)[:2]
                            return float(_ck @ (np.abs(u @ _w) @ _vo))

                    else:

                        def f(x, _w=w, _k=k, _a=a):
                            ang = angles[_k].copy()
                            ang[_a] = x
                            u = _euler_matrix(*ang)[:2]
                            s = u @ _w
                            return float((s * s).sum())

                    x, _ = _line_search(f, angles[k, a], f(angles[k, a]))
                    angles[k, a] = x % TWO_PI
                    blocks[k] = _euler_matrix(*angles[k])[:2]
                    value = self._resolve(blocks, cs)
            if value - prev <= tol * max(1.0, abs(value)):
                converged = True
                break
        return value, angles, cs, converged

    def _resolve(self, blocks, cs) -> float:
        s = self.t3
        for b in blocks:
            s = np.tensordot(s, b, axes=(0, 1))
        if self.mode == "sumsq":
            return float((s * s).sum())
        _, value = _ascend_c(np.abs(s), cs, tol=self.config.tolerance * 1e-3,
                             max_sweeps=50)
        return value


def _multistart(t: CorrelationTensor, mode: str, config: OptimizerConfig) -> CriterionResult:
    t3 = full_block(t)
    n = t.n
    problem = _FrameAscent(t3, mode, config)
    records = []
    for r in range(config.restarts):
        if r == 0:
            angles0 = np.zeros((n, 3))
        else:
            rng = np.random.default_rng([config.seed, r])
            angles0 = rng.uniform(0.0, TWO_PI, size=(n, 3))
        records.append(problem.run(angles0))
    best = max(range(len(records)), key=lambda i: records[i][0])
    value, angles, cs, converged = records[best]
    agree_tol = max(1e-8, 100.0 * config.tolerance) * max(1.0, abs(value))
    agreeing = sum(1 for rec in records if rec[0] >= value - agree_tol)
    euler = tuple(EulerAngles(*angles[k]) for k in range(n))
    result_c = None
    if mode == "tmod":
        norms = np.linalg.norm(cs, axis=1)
        result_c = CVectors(cs / norms[:, None])
    return CriterionResult(
        value=value,
        frames=FrameSet.from_euler(euler),
        euler=euler,
        c=result_c,
        violated=bool(value > 1.0 + VIOLATION_TOL),
        certified=bool(agreeing >= math.ceil(0.9 * config.restarts)),
        restarts_agreeing=agreeing,
        converged=converged,
    )


def maximize_criterion(t: CorrelationTensor, config: OptimizerConfig) -> CriterionResult:
    """Multi-start maximization of the modulus contraction over local frames
    and unit 2-vectors.  A value above 1 witnesses that no local realistic
    model reproduces the full correlations."""
    return _multistart(t, "tmod", config)


def maximize_sum_squares(t: CorrelationTensor, config: OptimizerConfig) -> CriterionResult:
    """Multi-start maximization of the xy-sector sum of squares over local
    frames.  A global maximum at or below 1 certifies that every two-setting
    full-correlation Bell inequality is satisfied."""
    return _multistart(t, "sumsq", config)


# ---------------------------------------------------------------------------
# explicit even-n witness construction


_TILT = np.array([
    [1.0 / math.sqrt(2.0), 0.0, 1.0 / math.sqrt(2.0)],
    [0.0, 1.0, 0.0],
    [-1.0 / math.sqrt(2.0), 0.0, 1.0 / math.sqrt(2.0)],
])

# cyclic relabeling that maps the (z, x) axis pair onto (x, y)
_CYCLE = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


@dataclass(frozen=True)
class EvenWitness:
    """Two-stage frame construction certifying violation for even n."""

    tilt: FrameSet       # applied to the tensor before taking moduli
    readout: FrameSet    # applied to the modulus tensor
    frames: FrameSet     # equivalent frames in the fixed xy convention
    c: CVectors          # completing unit 2-vectors for the xy convention
    value: float         # the exact component, sqrt(1 + sin^2 2alpha)


def even_violation_frames(params: GhzParams) -> EvenWitness:
    """Frames exposing a modulus-tensor component above 1 for even n.

    Sites 1..n-1 are tilted by 45 degrees about their y axes; the modulus
    tensor is then read out along summed directions, the last site along
    z' + sin(2 alpha) x'.  The resulting component is sqrt(1 + sin^2 2alpha),
    which exceeds 1 for every nonzero alpha.  The returned frames/c pair
    witnesses the same value through rotate_tensor + tmod_value.
    """
    n = params.n
    if n % 2 != 0:
        raise ParameterError("the explicit witness construction needs even n")
    s = params.sin_2alpha
    q = math.sqrt(1.0 + s * s)
    last = np.array([
        [s / q, 0.0, 1.0 / q],
        [0.0, 1.0, 0.0],
        [-1.0 / q, 0.0, s / q],
    ])

    tilt_mats = [_TILT] * (n - 1) + [np.eye(3)]
    readout_mats = [_TILT] * (n - 1) + [last]

    t = analytic_ghz_tensor(params)
    staged = _mode_rotate(t.grid(), [_embed4(m) for m in tilt_mats])
    staged = _mode_rotate(np.abs(staged), [_embed4(m) for m in readout_mats])
    achieved = float(staged[(1,) * n])
    if abs(achieved - q) > 1e-12:
        raise NumericalIntegrityError(
            f"witness component {achieved!r} does not match sqrt(1+sin^2 2a) = {q!r}"
        )

    frames = FrameSet(tuple(Rotation3(_CYCLE @ m) for m in tilt_mats))
    cvals = np.full((n, 2), 1.0 / math.sqrt(2.0))
    cvals[n - 1] = (1.0 / q, s / q)
    c = CVectors(cvals)
    witness = tmod_value(rotate_tensor(t, frames), c)
    if abs(witness - q) > 1e-12:
        raise NumericalIntegrityError(
            f"frame/c witness {witness!r} does not match {q!r}"
        )
    return EvenWitness(
        tilt=FrameSet(tuple(Rotation3(m) for m in tilt_mats)),
        readout=FrameSet(tuple(Rotation3(m) for m in readout_mats)),
        frames=frames,
        c=c,
        value=achieved,
    )
