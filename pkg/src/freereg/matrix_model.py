"""Finite-dimensional models: GUE tuples, polynomial evaluation, spectra.

Randomness is counter-based: trial ``t`` of a run with master seed ``s``
draws from a Philox stream keyed by ``(s, t)``, so a trial's matrices do not
depend on how many trials run or in which order they are scheduled.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import eigen
from .nccalc import diff
from .ncpoly import NcPoly, Word
from .scalar import ONE, ZERO, Scalar

__all__ = [
    "NotHermitian",
    "MatrixTuple",
    "EmpiricalMeasure",
    "trial_rng",
    "sample_gue",
    "sample_gue_tuple",
    "sample_bernoulli_diag",
    "rational_hermitian_tuple",
    "check_hermitian",
    "eval_poly",
    "eigenvalues",
    "empirical_measure",
    "mc_moments",
    "bimodule_residual_operator",
    "bimodule_commutator_residual",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1
CSV_SCHEMA_LINE = f"# schema_version={SCHEMA_VERSION}"
HERMITIAN_TOL = 1e-12


class NotHermitian(ValueError):
    pass


# --- randomness ------------------------------------------------------------

def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, keyed by ``(seed, trial)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def sample_gue(N: int, rng: np.random.Generator) -> np.ndarray:
    """GUE matrix normalized so its spectrum fills [-2, 2] as N grows.

    Diagonal entries are N(0, 1/N); off-diagonal entries have independent real
    and imaginary parts with variance 1/(2N) each.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    diag = rng.normal(0.0, math.sqrt(1.0 / N), size=N)
    iu = np.triu_indices(N, 1)
    m = len(iu[0])
    sd = math.sqrt(1.0 / (2 * N))
    off = rng.normal(0.0, sd, size=m) + 1j * rng.normal(0.0, sd, size=m)
    H = np.zeros((N, N), dtype=np.complex128)
    H[iu] = off
    H = H + H.conj().T
    H[np.diag_indices(N)] = diag
    return H


def sample_bernoulli_diag(N: int, rng: np.random.Generator) -> np.ndarray:
    """Diagonal matrix with N//2 entries -1 and the rest +1, randomly placed."""
    signs = np.ones(N)
    signs[: N // 2] = -1.0
    rng.shuffle(signs)
    return np.diag(signs).astype(np.complex128)


def sample_gue_tuple(n: int, N: int, rng: np.random.Generator, control: str | None = None) -> "MatrixTuple":
    mats = [sample_gue(N, rng) for _ in range(n)]
    if control == "bernoulli":
        mats[0] = sample_bernoulli_diag(N, rng)
    elif control is not None:
        raise ValueError(f"unknown control ensemble {control!r}")
    return MatrixTuple(tuple(mats))


def rational_hermitian_tuple(n: int, N: int, rng: np.random.Generator, max_den: int = 5) -> "MatrixTuple":
    """Random Hermitian matrices with exact Gaussian-rational entries (object arrays)."""

    def frac() -> Fraction:
        return Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, max_den + 1)))

    mats = []
    for _ in range(n):
        A = np.empty((N, N), dtype=object)
        for r in range(N):
            A[r, r] = Scalar(frac())
            for c in range(r + 1, N):
                z = Scalar(frac(), frac())
                A[r, c] = z
                A[c, r] = z.conjugate()
        mats.append(A)
    return MatrixTuple(tuple(mats))


# --- matrix tuples ---------------------------------------------------------

def _is_exact(A: np.ndarray) -> bool:
    return A.dtype == object


def check_hermitian(A: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    if _is_exact(A):
        return all(A[r, c] == A[c, r].conjugate() for r in range(A.shape[0]) for c in range(A.shape[1]))
    return A.ndim == 2 and A.shape[0] == A.shape[1] and np.max(np.abs(A - A.conj().T), initial=0.0) <= tol


@dataclass(frozen=True)
class MatrixTuple:
    """n Hermitian matrices of a common size N."""

    matrices: tuple

    def __post_init__(self):
        if not self.matrices:
            raise ValueError("empty matrix tuple")
        shapes = {np.shape(m) for m in self.matrices}
        if len(shapes) != 1:
            raise ValueError(f"matrices have different shapes: {sorted(shapes)}")
        (shape,) = shapes
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"matrices must be square, got {shape}")
        for k, m in enumerate(self.matrices):
            if not check_hermitian(np.asarray(m)):
                raise NotHermitian(f"matrix {k + 1} is not Hermitian")

    @property
    def n(self) -> int:
        return len(self.matrices)

    @property
    def N(self) -> int:
        return np.shape(self.matrices[0])[0]

    @property
    def exact(self) -> bool:
        return _is_exact(np.asarray(self.matrices[0]))

    def __getitem__(self, j: int) -> np.ndarray:
        # 1-based, matching variable indices
        return self.matrices[j - 1]


def _identity(N: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty((N, N), dtype=object)
        for r in range(N):
            for c in range(N):
                out[r, c] = ONE if r == c else ZERO
        return out
    return np.eye(N, dtype=np.complex128)


def _zeros(N: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty((N, N), dtype=object)
        out.fill(ZERO)
        return out
    return np.zeros((N, N), dtype=np.complex128)


class _WordEvaluator:
    """Evaluates words on a tuple, reusing products of shared prefixes."""

    def __init__(self, Y: MatrixTuple):
        self.Y = Y
        self.exact = Y.exact
        self.cache: dict[Word, np.ndarray] = {(): _identity(Y.N, self.exact)}

    def __call__(self, w: Word) -> np.ndarray:
        w = tuple(w)
        if w in self.cache:
            return self.cache[w]
        if len(w) == 1:
            return self.Y[w[0]]
        out = self(w[:-1]) @ self.Y[w[-1]]
        self.cache[w] = out
        return out


def _coef(c, exact: bool):
    return c if exact else complex(c)


def eval_poly(P: NcPoly, Y: MatrixTuple | Sequence[np.ndarray], assert_hermitian: bool = False) -> np.ndarray:
    """Substitute ``Y_j`` for ``X_j``.

    With ``assert_hermitian`` the result is checked to be Hermitian (relative
    tolerance 1e-10) and returned exactly symmetrized; ``NotHermitian`` otherwise.
    """
    if not isinstance(Y, MatrixTuple):
        Y = MatrixTuple(tuple(Y))
    if P.n != Y.n:
        raise ValueError(f"polynomial has {P.n} variables but {Y.n} matrices were given")
    exact = Y.exact
    if not exact and assert_hermitian and P.is_self_adjoint():
        return _eval_self_adjoint(P, Y)
    ev = _WordEvaluator(Y)
    out = _zeros(Y.N, exact)
    # lexicographic order keeps the prefix cache hot; sum order is fixed
    for w in sorted(P.words()):
        out = out + _coef(P.coeff(w), exact) * ev(w)
        if len(ev.cache) > 64:
            ev.cache = {(): ev.cache[()]}
    if assert_hermitian:
        out = _hermitian_part(out)
    return out


def _eval_self_adjoint(P: NcPoly, Y: MatrixTuple) -> np.ndarray:
    # Y_{reverse(w)} = Y_w^H for Hermitian Y, so only one word of each pair is multiplied
    ev = _WordEvaluator(Y)
    out = np.zeros((Y.N, Y.N), dtype=np.complex128)
    for w in sorted(P.words()):
        rw = w[::-1]
        if rw < w:
            continue
        M = complex(P.coeff(w)) * ev(w)
        out += M
        if rw != w:
            out += M.conj().T
        if len(ev.cache) > 64:
            ev.cache = {(): ev.cache[()]}
    return _hermitian_part(out)


def _hermitian_part(A: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    if _is_exact(A):
        if not check_hermitian(A):
            raise NotHermitian("exact evaluation is not Hermitian")
        return A
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if np.max(np.abs(A - A.conj().T), initial=0.0) > rtol * scale:
        raise NotHermitian("evaluated matrix is not Hermitian; is the polynomial self-adjoint?")
    return (A + A.conj().T) / 2


def eigenvalues(A: np.ndarray, backend: str = "native") -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, ascending.

    ``backend="native"`` uses the self-contained solver in :mod:`freereg.eigen`;
    ``"lapack"`` delegates to ``numpy.linalg.eigvalsh``.
    """
    A = np.asarray(A, dtype=np.complex128)
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if np.max(np.abs(A - A.conj().T), initial=0.0) > 1e-10 * scale:
        raise NotHermitian("eigenvalues() needs a Hermitian matrix")
    if backend == "native":
        return eigen.eigvalsh(A)
    if backend == "lapack":
        return np.linalg.eigvalsh(A)
    raise ValueError(f"unknown eigenvalue backend {backend!r}")


# --- empirical spectral measures ------------------------------------------

@dataclass(frozen=True)
class EmpiricalMeasure:
    """Equal-weight point masses at sorted real points."""

    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=np.float64).ravel())
        if pts.size == 0:
            raise ValueError("empirical measure needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("empirical measure has non-finite points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    def cdf(self, x) -> np.ndarray:
        """Right-continuous distribution function."""
        return np.searchsorted(self.points, np.asarray(x, dtype=np.float64), side="right") / self.size

    def cdf_left(self, x) -> np.ndarray:
        return np.searchsorted(self.points, np.asarray(x, dtype=np.float64), side="left") / self.size

    def mass(self, lo: float, hi: float) -> float:
        """Mass of the closed interval [lo, hi]."""
        i = np.searchsorted(self.points, lo, side="left")
        j = np.searchsorted(self.points, hi, side="right")
        return max(0, j - i) / self.size

    def shifted(self, c: float) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self.points + c, dict(self.meta))

    def scaled(self, a: float) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self.points * a, dict(self.meta))

    def merge(self, other: "EmpiricalMeasure") -> "EmpiricalMeasure":
        """Pool two measures, weighting by point count (associative)."""
        return EmpiricalMeasure(np.concatenate([self.points, other.points]), {})

    def to_csv(self) -> str:
        w = repr(1.0 / self.size)
        lines = [CSV_SCHEMA_LINE, "value,weight"]
        lines.extend(f"{x!r},{w}" for x in self.points.tolist())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, meta: dict | None = None) -> "EmpiricalMeasure":
        rows = [r for r in text.strip().splitlines() if not r.startswith("#")]
        if not rows or rows[0].strip() != "value,weight":
            raise ValueError("expected a 'value,weight' header")
        pts = [float(r.split(",")[0]) for r in rows[1:]]
        return cls(np.array(pts), dict(meta or {}))

    def metadata_json(self) -> str:
        return json.dumps({"schema_version": SCHEMA_VERSION, **self.meta}, indent=2, sort_keys=True) + "\n"


def _resolve_threads(threads: int | None) -> int:
    return max(1, int(threads or 1))


def _one_trial_spectrum(P: NcPoly, N: int, seed: int, trial: int, control, backend: str) -> np.ndarray:
    Y = sample_gue_tuple(P.n, N, trial_rng(seed, trial), control)
    return eigenvalues(eval_poly(P, Y, assert_hermitian=True), backend)


def empirical_measure(
    P: NcPoly,
    N: int,
    trials: int,
    seed: int,
    control: str | None = None,
    backend: str = "native",
    threads: int | None = None,
) -> EmpiricalMeasure:
    """Pooled eigenvalues of ``P(Y)`` over independent GUE tuples ``Y``.

    ``control="bernoulli"`` replaces ``Y_1`` with a diagonal +-1 matrix (a
    measure with genuine atoms, used as a positive control).
    """
    if not P.is_self_adjoint():
        raise NotHermitian("empirical_measure needs a self-adjoint polynomial")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    workers = _resolve_threads(threads)
    args = [(P, N, seed, t, control, backend) for t in range(trials)]
    if workers == 1:
        spectra = [_one_trial_spectrum(*a) for a in args]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(lambda a: _one_trial_spectrum(*a), args))
    from .parser import format_poly

    meta = {
        "N": N,
        "trials": trials,
        "seed": seed,
        "polynomial": format_poly(P),
        "n": P.n,
        "control": control,
        "eigen_backend": backend,
    }
    return EmpiricalMeasure(np.concatenate(spectra), meta)


def mc_moments(
    P: NcPoly, k: int, N: int, trials: int, seed: int, threads: int | None = None
) -> np.ndarray:
    """Trial average of ``tr_N(P(Y)^j)``, j = 1..k (normalized trace)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def one(trial: int) -> np.ndarray:
        Y = sample_gue_tuple(P.n, N, trial_rng(seed, trial))
        M = eval_poly(P, Y, assert_hermitian=P.is_self_adjoint())
        out = np.empty(k, dtype=np.complex128)
        power = M
        for j in range(k):
            if j:
                power = power @ M
            out[j] = np.trace(power) / N
        return out

    workers = _resolve_threads(threads)
    if workers == 1:
        rows = [one(t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, range(trials)))
    return np.mean(np.array(rows), axis=0)


# --- matrix bimodule check of the Hochschild-cycle identity --------------

def bimodule_residual_operator(P: NcPoly, Y: MatrixTuple, u: np.ndarray, v: np.ndarray):
    """Realize ``sum_i (u (x) v) # T_i # (y_i (x) 1 - 1 (x) y_i) - (u (x) v) # (P (x) 1 - 1 (x) P)``.

    ``T_i = (diff_i P)(Y)``.  An element ``sum a (x) b`` of the tensor square of
    M_N is realized as the operator ``xi -> sum a tr(b xi)`` on the N^2
    dimensional space M_N; in this picture right multiplication by ``y`` acts
    on either side, which turns the identity into the commutator form
    ``sum_i [u T_i v, J y_i J]``.  Returns the N^2 x N^2 operator matrix and
    the sum of norms of its rank-one pieces (a scale for relative residuals).
    """
    if P.n != Y.n:
        raise ValueError(f"polynomial has {P.n} variables but {Y.n} matrices were given")
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != (Y.N, Y.N) or v.shape != (Y.N, Y.N):
        raise ValueError("u and v must match the matrix dimension")
    exact = Y.exact
    ev = _WordEvaluator(Y)
    lefts, rights = [], []

    def piece(c, left, right):
        lefts.append((_coef(c, exact) * left).ravel())
        rights.append(right.T.ravel())

    for i in range(1, P.n + 1):
        yi = Y[i]
        for (a, b), c in diff(P, i).terms():
            ua = u @ ev(a)
            bv = ev(b) @ v
            piece(c, ua @ yi, bv)
            piece(-c, ua, yi @ bv)
    PY = eval_poly(P, Y)
    minus_one = Scalar(-1) if exact else -1.0
    one = ONE if exact else 1.0
    piece(minus_one, u @ PY, v)
    piece(one, u, PY @ v)

    L = np.array(lefts).T
    R = np.array(rights)
    op = L @ R
    if exact:
        scale = math.fsum(_fro(l) * _fro(r) for l, r in zip(lefts, rights))
    else:
        scale = float(np.sum(np.linalg.norm(np.array(lefts), axis=1) * np.linalg.norm(R, axis=1)))
    return op, scale


def _fro(x: np.ndarray) -> float:
    return math.sqrt(float(sum(Fraction(z.abs2()) for z in x.ravel())))


def bimodule_commutator_residual(
    P: NcPoly, Y: MatrixTuple, u: np.ndarray | None = None, v: np.ndarray | None = None, relative: bool = False
) -> float:
    """Frobenius norm of :func:`bimodule_residual_operator` (0 when the identity holds).

    ``u``/``v`` default to the identity.  For exact (object-dtype) tuples the
    norm is computed from exact entries, so a vanishing residual is exactly 0.
    """
    exact = Y.exact
    if u is None:
        u = _identity(Y.N, exact)
    if v is None:
        v = _identity(Y.N, exact)
    op, scale = bimodule_residual_operator(P, Y, u, v)
    if exact:
        res = math.sqrt(float(sum(z.abs2() for z in op.ravel())))
    else:
        res = float(np.linalg.norm(op))
    if relative:
        return res / scale if scale > 0 else res
    return res
