"""Lyapunov exponents, entropy rates, and pointwise-dimension estimators.

Three kinds of number come out of this module: ergodic averages along orbits
(float orbits for absolutely continuous measures, symbolic chains for Gibbs
weightings), closed-form sums over interval partitions, and ball-counting
regressions on sampled point clouds. The dimension checks put them side by
side: entropy over Lyapunov exponent against the measured slope of
log(ball mass) versus log(radius).

Chains are simulated symbolically and only pushed to the interval through
affine contractions at the end; iterating the interval maps in floats instead
would re-weight the orbit toward Lebesgue-typical points and silently corrupt
every singular-measure average.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree
from scipy.special import logsumexp

from .beta import BetaSystem, GlsPartition
from .errors import ConfigError, ConvergenceError
from .gdms import Gdms, geometric_potential
from .rng import task_rng
from .shifts import (
    GibbsMarkovMeasure,
    IncidenceMatrix,
    Potential,
    entropy_from_pressure,
    gibbs_measure,
    rpf_eigendata,
)

# ---------------------------------------------------------------------------
# Lyapunov exponents


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    method: str
    n_steps: int = 0
    n_orbits: int = 0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "method": self.method,
            "n_steps": self.n_steps,
            "n_orbits": self.n_orbits,
        }


class MapOrbit:
    """Float orbits of an interval map, vectorized across orbits.

    Seeds are Lebesgue-uniform unless a start sampler is given; for maps with
    an absolutely continuous invariant measure that makes the orbits generic
    for it. Iterates are clamped away from 0 and 1 so log-derivatives stay
    finite; the clamp is far below every statistic reported here.
    """

    def __init__(self, fn, log_deriv, start=None, eps: float = 1e-15):
        self.fn = fn
        self.log_deriv = log_deriv
        self._start = start
        self.eps = eps

    def start(self, rng, n: int) -> np.ndarray:
        x = self._start(rng, n) if self._start is not None else rng.random(n)
        return np.clip(x, self.eps, 1.0 - self.eps)

    def step(self, x, rng):
        vals = self.log_deriv(x)
        x = self.fn(x)
        return np.clip(x, self.eps, 1.0 - self.eps), vals


def gauss_orbit() -> MapOrbit:
    """x -> 1/x mod 1 with log|T'| = -2 log x."""
    return MapOrbit(lambda x: (1.0 / x) % 1.0, lambda x: -2.0 * np.log(x))


def beta_orbit(beta: float) -> MapOrbit:
    b = float(beta)
    return MapOrbit(lambda x: (b * x) % 1.0, lambda x: np.full(x.shape, math.log(b)))


def _flat_cum(kernel) -> tuple[np.ndarray, int]:
    # Rows of the cumulative kernel shifted by their row index: a single
    # searchsorted then serves every walker regardless of its current state.
    P = np.asarray(kernel.toarray(), dtype=float)
    S = P.shape[0]
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    return (np.arange(S)[:, None] + cum).ravel(), S


class ChainOrbit:
    """Stationary Markov chain walker reading a per-state observable."""

    def __init__(self, mu: GibbsMarkovMeasure, observable):
        self.flat, self.S = _flat_cum(mu.kernel)
        self.obs = np.asarray(observable, dtype=float)
        if self.obs.shape != (self.S,):
            raise ConfigError(
                f"observable has shape {self.obs.shape}, chain has {self.S} states"
            )
        pic = np.cumsum(mu.pi)
        pic[-1] = 1.0
        self._pic = pic

    def start(self, rng, n: int) -> np.ndarray:
        return np.searchsorted(self._pic, rng.random(n))

    def step(self, s, rng):
        vals = self.obs[s]
        idx = np.searchsorted(self.flat, s + rng.random(s.size))
        return idx - s * self.S, vals


def gls_return_observable(mu: GibbsMarkovMeasure, partition: GlsPartition) -> np.ndarray:
    """log of the induced-map derivative on each chain state: (k(n)+1) log beta."""
    logb = math.log(partition.beta)
    return np.array(
        [(partition.cell(s[0] + 1).k + 1) * logb for s in mu.states], dtype=float
    )


def lyapunov_birkhoff(
    driver,
    n_steps: int = 1_000_000,
    n_orbits: int = 32,
    seed: int = 0,
    burn_in: int = 0,
) -> LyapunovEstimate:
    """Birkhoff average of the log-derivative observable over seeded orbits.

    The value is the mean of the per-orbit averages and the standard error is
    taken across orbits, so correlations along a single orbit do not bias the
    reported uncertainty.
    """
    if n_steps < 1 or n_orbits < 1:
        raise ConfigError("need at least one step and one orbit")
    rng = task_rng(seed)
    state = driver.start(rng, n_orbits)
    for _ in range(burn_in):
        state, _ = driver.step(state, rng)
    acc = np.zeros(n_orbits)
    for _ in range(n_steps):
        state, vals = driver.step(state, rng)
        acc += vals
    per_orbit = acc / n_steps
    value = float(per_orbit.mean())
    stderr = float(per_orbit.std(ddof=1) / math.sqrt(n_orbits)) if n_orbits > 1 else 0.0
    return LyapunovEstimate(value, stderr, "birkhoff", n_steps, n_orbits)


def lyapunov_gls_closed_form(
    weights,
    beta: float,
    n_trunc: int | None = None,
    tail_tol: float = 1e-6,
) -> LyapunovEstimate:
    """log beta times the weighted mean return time over partition cells.

    weights is a probability vector over cells 1..len(weights) (or a dict
    keyed by cell number). Mass beyond n_trunc is bounded by the first
    excluded cell's return time and reported as the stderr field.
    """
    if isinstance(weights, dict):
        top = max(weights)
        w = np.zeros(top)
        for n, v in weights.items():
            w[n - 1] = v
    else:
        w = np.asarray(weights, dtype=float)
    if np.any(w < -1e-15):
        raise ConfigError("cell weights must be nonnegative")
    if n_trunc is None:
        n_trunc = len(w)
    n_trunc = min(n_trunc, len(w))
    part = GlsPartition(BetaSystem(beta))
    total_cells = part.total_cells
    if total_cells is not None and len(w) > total_cells:
        raise ConfigError(f"{len(w)} weights but the partition has {total_cells} cells")
    tail_mass = max(0.0, 1.0 - float(w[:n_trunc].sum()))
    if tail_mass > tail_tol:
        raise ConvergenceError(
            f"tail mass {tail_mass:.3g} beyond cell {n_trunc} exceeds {tail_tol:.3g}"
        )
    logb = math.log(beta)
    value = logb * sum(
        (part.cell(n + 1).k + 1) * w[n] for n in range(n_trunc) if w[n] != 0.0
    )
    if tail_mass > 0.0 and (total_cells is None or n_trunc < total_cells):
        bound = logb * (part.cell(n_trunc + 1).k + 1) * tail_mass
    else:
        bound = 0.0
    return LyapunovEstimate(float(value), float(bound), "closed-form-gls")


def golden_lyapunov(w2: float) -> LyapunovEstimate:
    """Two-cell closed form log phi * (1 + w2), w2 the mass of the short cell."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    return LyapunovEstimate(math.log(phi) * (1.0 + w2), 0.0, "closed-form-golden")


# ---------------------------------------------------------------------------
# entropy of the induced chain


def entropy_of_induced(mu: GibbsMarkovMeasure) -> float:
    """Entropy rate of the cell chain; the skew product adds nothing since the
    second coordinate is contracted."""
    return entropy_from_pressure(mu)


def cell_weights(mu: GibbsMarkovMeasure, n_letters: int | None = None) -> np.ndarray:
    """Stationary mass per first letter, one entry per cell."""
    if n_letters is None:
        n_letters = 1 + max(s[0] for s in mu.states)
    w = np.zeros(n_letters)
    for s, p in zip(mu.states, mu.pi):
        w[s[0]] += p
    return w


# ---------------------------------------------------------------------------
# pointwise dimension from ball counts


@dataclass(frozen=True)
class LocalDimensionEstimate:
    slopes: np.ndarray
    mean: float
    std: float
    stderr: float
    mean_upper: float
    j_range: tuple[int, int]
    n_centers: int
    method: str

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "stderr": self.stderr,
            "mean_upper": self.mean_upper,
            "j_range": list(self.j_range),
            "n_centers": self.n_centers,
            "method": self.method,
        }


def _ball_counts_1d(pts: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    order = np.sort(pts)
    hi = np.searchsorted(order, centers[:, None] + radii[None, :], side="right")
    lo = np.searchsorted(order, centers[:, None] - radii[None, :], side="left")
    return hi - lo - 1  # the center is a cloud point; leave it out


def _ball_counts_2d(pts: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    tree = cKDTree(pts)
    cols = [
        np.asarray(tree.query_ball_point(centers, r=r, return_length=True))
        for r in radii
    ]
    return np.stack(cols, axis=1) - 1


def local_dimension(
    cloud,
    j_range: tuple[int, int] | None = None,
    n_centers: int = 64,
    min_count: int = 50,
    max_frac: float = 0.2,
    seed: int = 0,
) -> LocalDimensionEstimate:
    """Pooled slope of log(ball mass) vs log(radius) at centers from the cloud.

    Radii run over 2^-j for j in j_range. A radius counts for a center only
    when its ball holds at least min_count points and at most max_frac of the
    cloud; a center needs three such radii to contribute a slope. mean_upper
    refits each center on the larger-radius half of its usable range, which
    the scaling-regime stability checks compare against the full fit.
    """
    pts = np.asarray(cloud, dtype=float)
    if pts.ndim == 2 and pts.shape[1] == 1:
        pts = pts[:, 0]
    two_d = pts.ndim == 2
    if two_d and pts.shape[1] != 2:
        raise ConfigError(f"clouds must be 1- or 2-dimensional, got shape {pts.shape}")
    M = pts.shape[0]
    if M < 4 * min_count:
        raise ConfigError(f"cloud of {M} points is too small for min_count={min_count}")

    spread = float(np.max(pts.max(axis=0) - pts.min(axis=0))) if two_d else float(
        pts.max() - pts.min()
    )
    if spread < 1e-12:
        # atomic measure: every ball holds everything, the slope is exactly 0
        return LocalDimensionEstimate(
            np.zeros(1), 0.0, 0.0, 0.0, 0.0, (0, 0), 1, "degenerate"
        )

    if j_range is None:
        # r = 2^-2 is a sizable fraction of a unit-box support and saturates
        # max_frac; 2^-10 starves min_count in 2D at desk-scale M
        j_range = (3, 9) if two_d else (4, 15)
    js = np.arange(j_range[0], j_range[1] + 1)
    radii = 2.0 ** (-js.astype(float))

    rng = task_rng(seed)
    r_max = radii[0]
    if two_d:
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        interior = np.all((pts >= lo + r_max) & (pts <= hi - r_max), axis=1)
    else:
        lo, hi = pts.min(), pts.max()
        interior = (pts >= lo + r_max) & (pts <= hi - r_max)
    pool = np.flatnonzero(interior)
    if pool.size < max(8, n_centers // 4):
        pool = np.arange(M)  # heavy trim, fall back to the whole cloud
    idx = rng.choice(pool, size=min(n_centers, pool.size), replace=False)
    centers = pts[idx]

    counts = (_ball_counts_2d if two_d else _ball_counts_1d)(pts, centers, radii)

    log_r = np.log(radii)
    slopes, uppers = [], []
    for row in counts:
        valid = (row >= min_count) & (row <= max_frac * M)
        if valid.sum() < 3:
            continue
        lr = log_r[valid]
        lm = np.log(row[valid] / (M - 1))
        slopes.append(np.polyfit(lr, lm, 1)[0])
        half = max(2, valid.sum() // 2)  # radii are descending, so this is the large-r half
        uppers.append(np.polyfit(lr[:half], lm[:half], 1)[0])
    if not slopes:
        raise ConvergenceError(
            f"no center had {min_count}..{max_frac:.0%} counts on three radii; "
            "widen j_range or enlarge the cloud"
        )
    slopes = np.array(slopes)
    std = float(slopes.std(ddof=1)) if slopes.size > 1 else 0.0
    return LocalDimensionEstimate(
        slopes=slopes,
        mean=float(slopes.mean()),
        std=std,
        stderr=std / math.sqrt(slopes.size) if slopes.size > 1 else 0.0,
        mean_upper=float(np.mean(uppers)),
        j_range=(int(js[0]), int(js[-1])),
        n_centers=int(slopes.size),
        method="kdtree-2d" if two_d else "sorted-1d",
    )


# ---------------------------------------------------------------------------
# sampled clouds


def gauss_acim_cloud(n: int, seed: int = 0) -> np.ndarray:
    """Exact samples of the density 1/((1+x) log 2) via the inverse CDF."""
    u = task_rng(seed).random(n)
    return np.exp2(u) - 1.0


def _walk(flat: np.ndarray, S: int, s0: np.ndarray, depth: int, rng) -> np.ndarray:
    out = np.empty((s0.size, depth), dtype=np.int64)
    s = s0
    for j in range(depth):
        idx = np.searchsorted(flat, s + rng.random(s.size))
        s = idx - s * S
        out[:, j] = s
    return out


def _affine_fold(letters: np.ndarray, lefts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Apply the cells' y-contractions with column 0 outermost."""
    y = np.full(letters.shape[0], 0.5)
    for j in range(letters.shape[1] - 1, -1, -1):
        col = letters[:, j]
        y = lefts[col] + lengths[col] * y
    return y


def _cell_tables(part: GlsPartition, n_letters: int):
    cells = part.cells_up_to(n_letters)
    if len(cells) < n_letters:
        raise ConfigError(
            f"chain uses {n_letters} letters but the partition has {len(cells)} cells"
        )
    lefts = np.array([c.left for c in cells])
    lengths = np.array([c.length for c in cells])
    return lefts, lengths


def _fold_depth(beta: float) -> int:
    # enough contractions to pin the folded point well below float resolution
    return int(40.0 / math.log(beta)) + 8


def fiber_cloud(
    mu: GibbsMarkovMeasure,
    part: GlsPartition,
    n: int,
    depth: int | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Past coordinates conditioned on a fixed present state.

    Runs the reversed chain from the most likely state and folds the past
    letters through the cells' y-contractions, most recent letter outermost.
    """
    letter_of = np.array([s[0] for s in mu.states], dtype=np.int64)
    lefts, lengths = _cell_tables(part, int(letter_of.max()) + 1)
    if depth is None:
        depth = _fold_depth(part.beta)
    rng = task_rng(seed)
    flat_rev, S = _flat_cum(mu.reversed_kernel())
    s0 = np.full(n, int(np.argmax(mu.pi)), dtype=np.int64)
    past = _walk(flat_rev, S, s0, depth, rng)
    return _affine_fold(letter_of[past], lefts, lengths)


def joint_cloud(
    mu: GibbsMarkovMeasure,
    part: GlsPartition,
    n: int,
    depth: int | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Stationary (x, y) samples, one two-sided chain path per point.

    x comes from the forward letters starting at the present state, y from the
    reversed letters; given the present state the two walks are independent,
    which is exactly the Markov structure of the invariant measure.
    """
    letter_of = np.array([s[0] for s in mu.states], dtype=np.int64)
    lefts, lengths = _cell_tables(part, int(letter_of.max()) + 1)
    if depth is None:
        depth = _fold_depth(part.beta)
    rng = task_rng(seed)
    flat_fwd, S = _flat_cum(mu.kernel)
    flat_rev, _ = _flat_cum(mu.reversed_kernel())
    pic = np.cumsum(mu.pi)
    pic[-1] = 1.0
    s0 = np.searchsorted(pic, rng.random(n))
    fwd = _walk(flat_fwd, S, s0, depth, rng)
    bwd = _walk(flat_rev, S, s0, depth, rng)
    x_letters = np.column_stack([s0, fwd])  # present outermost
    xs = _affine_fold(letter_of[x_letters], lefts, lengths)
    ys = _affine_fold(letter_of[bwd], lefts, lengths)
    return np.column_stack([xs, ys])


# ---------------------------------------------------------------------------
# dimension checks


def induced_cell_chain(
    beta: float,
    psi: Potential | None = None,
    n_cells: int | None = None,
    incidence: IncidenceMatrix | str | None = None,
) -> tuple[GibbsMarkovMeasure, GlsPartition]:
    """Gibbs chain over the cell alphabet of the induced map.

    psi defaults to the zero potential; incidence defaults to the full shift
    (the cells genuinely form one), with "golden" selecting the two-letter
    no-11 rule used throughout the worked examples.
    """
    part = GlsPartition(BetaSystem(beta))
    total = part.total_cells
    if n_cells is None:
        n_cells = total if total is not None else 64
    if total is not None and n_cells > total:
        raise ConfigError(f"n_cells={n_cells} but the partition has {total} cells")
    if psi is None:
        psi = Potential.constant(0.0)
    if incidence is None or incidence == "full":
        A = IncidenceMatrix.full()
    elif incidence == "golden":
        A = IncidenceMatrix.golden_mean()
    elif isinstance(incidence, IncidenceMatrix):
        A = incidence
    else:
        raise ConfigError(f"unknown incidence {incidence!r}")
    mu = gibbs_measure(psi, A, n_cells)
    return mu, part


def conditional_dimension_check(
    beta: float,
    psi: Potential | None = None,
    M: int = 200_000,
    seed: int = 0,
    *,
    n_cells: int | None = None,
    incidence: IncidenceMatrix | str | None = None,
    depth: int | None = None,
    j_range: tuple[int, int] | None = None,
    n_centers: int = 64,
    keep_cloud: bool = False,
) -> dict:
    """Fiber slope of the conditional measure against h/chi."""
    mu, part = induced_cell_chain(beta, psi, n_cells, incidence)
    h = entropy_of_induced(mu)
    w = cell_weights(mu)
    chi = lyapunov_gls_closed_form(w, beta, tail_tol=1e-9).value
    target = h / chi
    cloud = fiber_cloud(mu, part, M, depth, seed)
    est = local_dimension(cloud, j_range=j_range, n_centers=n_centers, seed=seed + 1)
    report = {
        "beta": beta,
        "n_cells": len(w),
        "h": h,
        "chi": chi,
        "target": target,
        "fiber": est,
        "deviation": est.mean - target,
        "relative_error": abs(est.mean - target) / target if target > 0 else abs(est.mean),
    }
    if keep_cloud:
        report["cloud"] = cloud
    return report


def global_dimension_check(
    beta: float,
    psi: Potential | None = None,
    M: int = 200_000,
    seed: int = 0,
    *,
    n_cells: int | None = None,
    incidence: IncidenceMatrix | str | None = None,
    depth: int | None = None,
    j_range_2d: tuple[int, int] | None = None,
    j_range_1d: tuple[int, int] | None = None,
    n_centers: int = 64,
    keep_cloud: bool = False,
) -> dict:
    """Joint, base, and fiber slopes against 2h/chi and its even split."""
    mu, part = induced_cell_chain(beta, psi, n_cells, incidence)
    h = entropy_of_induced(mu)
    w = cell_weights(mu)
    chi = lyapunov_gls_closed_form(w, beta, tail_tol=1e-9).value
    cloud = joint_cloud(mu, part, M, depth, seed)
    est_joint = local_dimension(cloud, j_range=j_range_2d, n_centers=n_centers, seed=seed + 1)
    est_base = local_dimension(cloud[:, 0], j_range=j_range_1d, n_centers=n_centers, seed=seed + 2)
    est_fiber = local_dimension(cloud[:, 1], j_range=j_range_1d, n_centers=n_centers, seed=seed + 3)
    gap = est_base.mean + est_fiber.mean - est_joint.mean
    pooled = math.sqrt(est_base.stderr**2 + est_fiber.stderr**2 + est_joint.stderr**2)
    report = {
        "beta": beta,
        "n_cells": len(w),
        "h": h,
        "chi": chi,
        "target_global": 2.0 * h / chi,
        "target_marginal": h / chi,
        "global": est_joint,
        "base": est_base,
        "fiber": est_fiber,
        "additivity_gap": gap,
        "pooled_stderr": pooled,
    }
    if keep_cloud:
        report["cloud"] = cloud
    return report


# ---------------------------------------------------------------------------
# pressure-equation roots


@dataclass(frozen=True)
class TemperatureResult:
    q: float
    t: float
    bracket: tuple[float, float]
    residual: float

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "t": self.t,
            "bracket": list(self.bracket),
            "residual": self.residual,
        }


def _pressure_value(
    system: Gdms,
    t: float,
    q: float,
    theta: Potential | None,
    p_theta: float,
    memory: int,
    truncation: int | None,
) -> float:
    N = truncation if truncation is not None else system.n_edges
    if N is None:
        raise ConfigError("a countable edge set needs an explicit truncation")
    psi = geometric_potential(system, t=t, q=q, theta=theta, p_theta=p_theta, memory=memory)
    A = system.shift_view(N)
    if A.is_full and memory == 1:
        vals = np.array([psi.value((e,)) for e in range(N)])
        return float(logsumexp(vals))
    return rpf_eigendata(psi, A, N).log_rho


def _tail_ratio(system, t, q, theta, p_theta, N) -> float:
    psi = geometric_potential(system, t=t, q=q, theta=theta, p_theta=p_theta, memory=1)
    A = system.shift_view(N)
    sups = np.array([psi.sup_over_letter(e, N, A) for e in range(N)])
    total = logsumexp(sups)
    tail = logsumexp(sups[N // 2 :])
    return float(math.exp(tail - total))


def temperature(
    system: Gdms,
    theta: Potential | None = None,
    q: float = 0.0,
    bracket: tuple[float, float] = (1e-3, 2.0),
    *,
    p_theta: float = 0.0,
    memory: int = 1,
    truncation: int | None = None,
    xtol: float = 1e-13,
) -> TemperatureResult:
    """Root in t of the pressure of t*log|branch'| + q*(theta - p_theta).

    The pressure must change sign over the bracket. For countable systems the
    top-half tail of the letter sums is probed at the endpoints (divergence
    raises) and at a few interior points (slow decay only warns: the root of
    the truncated pressure is still well defined, the ideal-system reading is
    what becomes shaky).
    """
    a, b = float(bracket[0]), float(bracket[1])
    if not a < b:
        raise ConfigError(f"empty bracket {bracket}")
    if q != 0.0 and theta is None:
        raise ConfigError("q != 0 needs a theta potential")

    countable = system.n_edges is None
    N = truncation if truncation is not None else system.n_edges
    if N is None:
        raise ConfigError("a countable edge set needs an explicit truncation")
    if countable:
        for end in (a, b):
            ratio = _tail_ratio(system, end, q, theta, p_theta, N)
            if ratio > 0.5:
                raise ConvergenceError(
                    f"letter sums diverge at t={end}: tail ratio {ratio:.2f}"
                )
        for t_probe in np.linspace(a, b, 10)[1:-1]:
            ratio = _tail_ratio(system, float(t_probe), q, theta, p_theta, N)
            if ratio > 1e-6:
                warnings.warn(
                    f"slow letter-sum decay at t={t_probe:.4g} "
                    f"(tail ratio {ratio:.2g}); treat the root as truncation-dependent",
                    stacklevel=2,
                )

    def f(t: float) -> float:
        return _pressure_value(system, t, q, theta, p_theta, memory, truncation)

    fa, fb = f(a), f(b)
    if not (fa > 0.0 > fb or fa < 0.0 < fb):
        raise ConvergenceError(
            f"pressure does not change sign on the bracket: P({a})={fa:.4g}, P({b})={fb:.4g}"
        )
    root = float(brentq(f, a, b, xtol=xtol))
    residual = abs(f(root))
    if residual >= 1e-9:
        raise ConvergenceError(f"pressure residual {residual:.3g} at t={root}")
    return TemperatureResult(q=q, t=root, bracket=(a, b), residual=residual)


def temperature_sweep(system: Gdms, theta: Potential, qs, **kwargs) -> list[TemperatureResult]:
    return [temperature(system, theta, float(q), **kwargs) for q in qs]


def hd_limit_set(system: Gdms, bracket: tuple[float, float] = (1e-3, 2.0), **kwargs) -> float:
    """Dimension of the limit set: the zero of t -> P(t log|branch'|)."""
    return temperature(system, None, 0.0, bracket, **kwargs).t
