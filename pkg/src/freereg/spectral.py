"""Analysis of empirical spectral measures.

Histograms, reference laws (semicircle, free Poisson), Kolmogorov-Smirnov
distance, atom detection by sliding windows, local decay exponents and the
logarithmic energy that enters single-variable free entropy.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .matrix_model import CSV_SCHEMA_LINE, SCHEMA_VERSION, EmpiricalMeasure

__all__ = [
    "Histogram",
    "ReferenceCdf",
    "AtomReport",
    "DecayReport",
    "EntropyEstimate",
    "SparseMass",
    "histogram",
    "ks_distance",
    "reference_semicircle",
    "reference_free_poisson",
    "max_window_mass",
    "geometric_grid",
    "decay_exponent",
    "log_energy",
    "ENTROPY_CONSTANT",
]

#: additive constant relating one-variable free entropy to logarithmic energy
ENTROPY_CONSTANT = 0.75 + 0.5 * math.log(2 * math.pi)


class SparseMass(ValueError):
    """Too few grid windows carry mass to fit a decay exponent."""


def _report_json(obj) -> str:
    d = {"schema_version": SCHEMA_VERSION, **asdict(obj)}
    return json.dumps(d, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _finite_or_none(x: float):
    # JSON has no infinities
    return x if math.isfinite(x) else None


# --- histograms --------------------------------------------------------------

@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("histogram edges must be strictly increasing")
        if self.masses.sum() > 1 + 1e-12 or np.any(self.masses < 0):
            raise ValueError("histogram masses must be nonnegative with total <= 1")

    def to_csv(self) -> str:
        lines = [CSV_SCHEMA_LINE, "bin_left,bin_right,mass"]
        for lo, hi, m in zip(self.edges[:-1].tolist(), self.edges[1:].tolist(), self.masses.tolist()):
            lines.append(f"{lo!r},{hi!r},{m!r}")
        return "\n".join(lines) + "\n"

    @property
    def density(self) -> np.ndarray:
        return self.masses / np.diff(self.edges)


def histogram(mu: EmpiricalMeasure, bins: int, range: tuple[float, float] | None = None) -> Histogram:
    """Equal-width bins, left-closed, last bin closed on both sides."""
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if range is None:
        lo, hi = float(mu.points[0]), float(mu.points[-1])
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
    else:
        lo, hi = map(float, range)
    if not hi > lo:
        raise ValueError(f"empty histogram range ({lo}, {hi})")
    counts, edges = np.histogram(mu.points, bins=bins, range=(lo, hi))
    return Histogram(edges, counts / mu.size)


# --- reference laws ----------------------------------------------------------

class ReferenceCdf:
    """Distribution function of an absolutely continuous law on ``[lo, hi]``.

    Values are computed by adaptive quadrature of the density; ``exact`` is an
    optional closed form kept for cross-checking.
    """

    continuous = True

    def __init__(self, density: Callable[[float], float], lo: float, hi: float, name: str,
                 exact: Callable[[np.ndarray], np.ndarray] | None = None, singular: Sequence[float] = ()):
        self.density = density
        self.lo = lo
        self.hi = hi
        self.name = name
        self.exact = exact
        self._singular = tuple(singular)

    def _segment(self, a: float, b: float) -> float:
        if b <= a:
            return 0.0
        pts = [s for s in self._singular if a < s < b] or None
        val, _ = integrate.quad(self.density, a, b, epsabs=1e-12, epsrel=1e-12, limit=200, points=pts)
        return val

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        flat = x.ravel()
        order = np.argsort(flat, kind="stable")
        out = np.empty_like(flat)
        acc, prev = 0.0, self.lo
        for idx in order:
            xi = flat[idx]
            if xi <= self.lo:
                out[idx] = 0.0
                continue
            if xi >= self.hi:
                out[idx] = 1.0
                continue
            # integrate from the previous sorted point; short pieces are cheap
            acc += self._segment(prev, xi)
            prev = xi
            out[idx] = min(1.0, max(0.0, acc))
        return out.reshape(x.shape)

    def quantile(self, q: float) -> float:
        if not 0.0 < q < 1.0:
            return self.lo if q <= 0 else self.hi
        F = self.exact if self.exact is not None else self
        return optimize.brentq(lambda x: float(F(x)) - q, self.lo, self.hi, xtol=1e-14)

    def __repr__(self) -> str:
        return f"ReferenceCdf({self.name})"


def reference_semicircle(variance: float = 1.0) -> ReferenceCdf:
    """Semicircle law with the given variance, supported on [-2s, 2s]."""
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    s2 = float(variance)
    r = 2.0 * math.sqrt(s2)

    def density(x: float) -> float:
        return math.sqrt(max(4.0 * s2 - x * x, 0.0)) / (2.0 * math.pi * s2)

    def exact(x):
        u = np.clip(np.asarray(x, dtype=np.float64) / r, -1.0, 1.0)
        return 0.5 + (u * np.sqrt(1 - u * u) + np.arcsin(u)) / math.pi

    return ReferenceCdf(density, -r, r, f"semicircle(variance={s2})", exact)


def reference_free_poisson() -> ReferenceCdf:
    """Free Poisson (Marchenko-Pastur) law of rate 1: the law of a squared semicircular."""

    def density(x: float) -> float:
        if not 0.0 < x < 4.0:
            return 0.0
        return math.sqrt((4.0 - x) / x) / (2.0 * math.pi)

    def exact(x):
        # F(x) = G(sqrt(x)) - G(-sqrt(x)) for the standard semicircle G
        t = np.sqrt(np.clip(np.asarray(x, dtype=np.float64), 0.0, 4.0)) / 2.0
        return 2.0 * (t * np.sqrt(1 - t * t) + np.arcsin(t)) / math.pi

    return ReferenceCdf(density, 0.0, 4.0, "free_poisson(rate=1)", exact)


# --- KS distance ---------------------------------------------------------------

def ks_distance(mu: EmpiricalMeasure, ref) -> float:
    """Sup distance between distribution functions.

    ``ref`` is a continuous reference (any callable CDF) or another
    :class:`EmpiricalMeasure`; both one-sided limits are compared at every jump.
    """
    if isinstance(ref, EmpiricalMeasure):
        z = np.union1d(mu.points, ref.points)
        right = np.abs(mu.cdf(z) - ref.cdf(z))
        left = np.abs(mu.cdf_left(z) - ref.cdf_left(z))
        return float(max(right.max(), left.max()))
    z = np.unique(mu.points)
    F = np.asarray(ref(z), dtype=np.float64)
    return float(max(np.max(np.abs(mu.cdf(z) - F)), np.max(np.abs(mu.cdf_left(z) - F))))


# --- atoms ---------------------------------------------------------------------

@dataclass(frozen=True)
class AtomReport:
    eps: float
    location: float
    window: tuple[float, float]
    max_mass: float
    threshold: float
    atom_suspected: bool
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return _report_json(self)


def max_window_mass(
    mu: EmpiricalMeasure, eps: float, coefficient: float = 1.0, power: float = 0.4
) -> AtomReport:
    """Largest mass of a closed window ``[x, x + eps]`` starting at a sample point.

    The atom flag is raised when that mass exceeds ``coefficient * eps**power``.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    pts = mu.points
    starts = np.searchsorted(pts, pts, side="left")
    ends = np.searchsorted(pts, pts + eps, side="right")
    counts = ends - starts
    k = int(np.argmax(counts))
    mass = counts[k] / mu.size
    threshold = coefficient * eps**power
    loc = float(pts[k])
    return AtomReport(
        eps=float(eps),
        location=loc,
        window=(loc, loc + float(eps)),
        max_mass=float(mass),
        threshold=float(threshold),
        atom_suspected=bool(mass > threshold),
        meta=dict(mu.meta),
    )


# --- decay -----------------------------------------------------------------------

@dataclass(frozen=True)
class DecayReport:
    t: float
    eps: list
    masses: list
    alpha: float
    residual: float
    one_sided: bool
    points_used: int
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return _report_json(self)


def geometric_grid(start: float, ratio: float, count: int) -> list[float]:
    """``[start * ratio**k for k in range(count)]``."""
    if not start > 0:
        raise ValueError(f"grid start must be positive, got {start}")
    if not 0 < ratio < 1:
        raise ValueError(f"grid ratio must lie in (0, 1), got {ratio}")
    if count < 1:
        raise ValueError(f"grid needs at least one point, got {count}")
    return [start * ratio**k for k in range(count)]


def _check_geometric(grid: np.ndarray) -> None:
    if grid.size < 4:
        raise ValueError(f"decay fit needs >= 4 grid points, got {grid.size}")
    if np.any(grid <= 0):
        raise ValueError("grid values must be positive")
    ratios = grid[1:] / grid[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-9, atol=0):
        raise ValueError("eps grid must be geometric")


def decay_exponent(
    mu: EmpiricalMeasure, t: float, eps_grid: Sequence[float], one_sided: bool = False
) -> DecayReport:
    """Least-squares slope of log mu[t - eps, t + eps] against log eps.

    With ``one_sided`` the windows are ``[t, t + eps]``.  Grid points whose
    window is empty are dropped.
    """
    grid = np.asarray(eps_grid, dtype=np.float64)
    _check_geometric(grid)
    diameter = float(mu.points[-1] - mu.points[0])
    if np.any(grid >= diameter):
        raise ValueError(f"eps grid must stay below the support diameter {diameter:.6g}")
    lo = t if one_sided else t - grid
    masses = np.array([mu.mass(float(a), t + e) for a, e in zip(np.broadcast_to(lo, grid.shape), grid)])
    keep = masses > 0
    if keep.sum() < 2:
        raise SparseMass(
            f"only {int(keep.sum())} grid windows around t={t} carry mass"
        )
    x = np.log(grid[keep])
    y = np.log(masses[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return DecayReport(
        t=float(t),
        eps=grid.tolist(),
        masses=masses.tolist(),
        alpha=float(slope),
        residual=resid,
        one_sided=one_sided,
        points_used=int(keep.sum()),
        meta=dict(mu.meta),
    )


# --- logarithmic energy ------------------------------------------------------------

@dataclass(frozen=True)
class EntropyEstimate:
    log_energy: float
    constant: float
    chi: float
    pair_count: int
    diagonal_excluded: bool
    atom_warning: bool
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        d["log_energy"] = _finite_or_none(self.log_energy)
        d["chi"] = _finite_or_none(self.chi)
        return json.dumps({"schema_version": SCHEMA_VERSION, **d}, indent=2, sort_keys=True) + "\n"


def log_energy(
    mu: EmpiricalMeasure, chunk: int = 512, close_rtol: float = 1e-6, close_fraction: float = 0.01
) -> EntropyEstimate:
    """Mean of ``log|x_i - x_j|`` over ordered pairs ``i != j``.

    The self-pairs are excluded.  ``atom_warning`` is set when points
    coincide or when more than ``close_fraction`` of the pairs lie closer than
    ``close_rtol`` times the spread of the sample; coincident points make the
    value ``-inf``.
    """
    pts = mu.points
    m = pts.size
    if m < 2:
        raise ValueError("log-energy needs at least two points")
    spread = float(pts[-1] - pts[0])
    pairs = m * (m - 1) // 2
    constant = ENTROPY_CONSTANT
    if spread == 0.0:
        return EntropyEstimate(-math.inf, constant, -math.inf, 2 * pairs, True, True, dict(mu.meta))
    partial = []
    zeros = 0
    close = 0
    cutoff = close_rtol * spread
    for s in range(0, m, chunk):
        e = min(m, s + chunk)
        block = np.abs(pts[s:e, None] - pts[None, s:])
        upper = np.arange(m - s)[None, :] > np.arange(e - s)[:, None]
        zeros += int(np.count_nonzero(upper & (block == 0.0)))
        close += int(np.count_nonzero(upper & (block < cutoff)))
        with np.errstate(divide="ignore"):
            partial.append(float(np.sum(np.log(np.where(upper, block, 1.0)))))
    if zeros:
        value = -math.inf
    else:
        value = math.fsum(partial) / pairs
    warn = zeros > 0 or close > close_fraction * pairs
    return EntropyEstimate(value, constant, value + constant, 2 * pairs, True, warn, dict(mu.meta))
