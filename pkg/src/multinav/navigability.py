"""Coverage dynamics and spectral diagnostics of multiplex walks.

The continuous-time walk generated by ``L = I - P`` starts one walker on the
layer-0 replica of every physical node. For each origin j and target i the
survival probability that i is still undiscovered decays at the rate with
which probability mass arrives at any replica of i from other nodes:

    d/dt delta[i,j](t) = -(p_j(t) @ M @ E_i) * delta[i,j](t)

with ``p_j(t) = p_j(0) exp(-L t)`` and M the transition matrix with all
same-node entries zeroed: switching layers atop a node, or idling on it,
never discovers it (the walker already marked it on arrival). Expanding in
the eigenbasis of L makes the time integral of each mode available in
closed form, so curves are evaluated exactly on any grid rather than by
quadrature. Coverage is

    rho(t) = 1 - (1/N^2) * sum_ij delta[i,j](t)

which starts at 1/N and, on a strongly connected supra-graph, tends to 1.

A discrete-step Monte Carlo estimator doubles as an independent oracle; its
step clock relates to continuous time by a Poisson(t) mixture, implemented
in poisson_clock for like-for-like comparisons.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .multiplex import MultiplexNetwork
from .walks import (
    RWC,
    SupraTransitionMatrix,
    build_supra_transition,
    normalize_strategy,
    strength_profile,
)

ZERO_EIGENVALUE_TOL = 1e-9
NOT_REACHED = "not reached"

ANALYTIC = "analytic"
MONTECARLO = "montecarlo"


class DegradedDecompositionError(RuntimeError):
    """Eigendecomposition too ill-conditioned to trust; use coverage_montecarlo."""


def supra_laplacian(supra: SupraTransitionMatrix) -> np.ndarray:
    """Random-walk normalized supra-Laplacian L = I - P (zero row sums)."""
    return np.eye(supra.dim) - supra.matrix


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs of a supra-Laplacian, sorted by ascending real part.

    ``vectors`` holds right eigenvectors as columns; ``inverse`` is the
    matrix of left eigenvectors such that vectors @ diag(eigenvalues) @
    inverse reconstructs the input.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    inverse: np.ndarray
    condition: float
    residual: float


def decompose(
    laplacian: np.ndarray,
    scale: np.ndarray | None = None,
    cond_limit: float = 1e12,
    residual_limit: float = 1e-8,
) -> SpectralDecomposition:
    """Full eigendecomposition of a supra-Laplacian.

    ``scale`` enables the similarity transform diag(s)^(1/2) @ L @
    diag(s)^(-1/2) for strength-normalized walks on undirected networks,
    whose scaled form is symmetric and therefore solvable with the stable
    Hermitian path. Symmetric inputs take that path automatically; anything
    else falls back to the general solver and is rejected as degraded when
    the eigenvector basis is ill-conditioned or reconstruction drifts.
    """
    laplacian = np.asarray(laplacian, dtype=float)
    n = laplacian.shape[0]
    if laplacian.shape != (n, n):
        raise ValueError("supra-Laplacian must be square")
    if n == 0:
        empty = np.zeros((0, 0))
        return SpectralDecomposition(np.zeros(0, dtype=complex), empty, empty, 1.0, 0.0)

    if scale is not None:
        scale = np.asarray(scale, dtype=float)
        if scale.shape != (n,) or np.any(scale <= 0):
            raise ValueError("scale must be a positive vector matching the matrix size")
        root = np.sqrt(scale)
        scaled = laplacian * (root[:, None] / root[None, :])
        if not np.allclose(scaled, scaled.T, atol=1e-10):
            raise ValueError("scaled supra-Laplacian is not symmetric; wrong scale vector")
        values, ortho = np.linalg.eigh(0.5 * (scaled + scaled.T))
        vectors = ortho / root[:, None]
        inverse = ortho.T * root[None, :]
        eigenvalues = values.astype(complex)
    elif np.allclose(laplacian, laplacian.T, atol=1e-12):
        values, ortho = np.linalg.eigh(0.5 * (laplacian + laplacian.T))
        vectors = ortho
        inverse = ortho.T
        eigenvalues = values.astype(complex)
    else:
        values, vectors = np.linalg.eig(laplacian)
        order = np.argsort(values.real, kind="stable")
        values = values[order]
        vectors = vectors[:, order]
        condition = float(np.linalg.cond(vectors))
        if not np.isfinite(condition) or condition > cond_limit:
            raise DegradedDecompositionError(
                f"eigenvector basis condition {condition:.3e} exceeds {cond_limit:.0e}; "
                "fall back to coverage_montecarlo"
            )
        inverse = np.linalg.inv(vectors)
        eigenvalues = values

    reconstructed = (vectors * eigenvalues[None, :]) @ inverse
    norm = np.linalg.norm(laplacian)
    residual = float(np.linalg.norm(laplacian - reconstructed.real))
    condition = float(np.linalg.cond(vectors))
    if norm > 0 and residual > residual_limit * norm:
        raise DegradedDecompositionError(
            f"reconstruction residual {residual:.3e} exceeds {residual_limit:.0e} * |L|; "
            "fall back to coverage_montecarlo"
        )
    if eigenvalues.real.min(initial=0.0) < -ZERO_EIGENVALUE_TOL:
        raise DegradedDecompositionError(
            "negative eigenvalue real part beyond tolerance; "
            "fall back to coverage_montecarlo"
        )
    return SpectralDecomposition(
        eigenvalues=eigenvalues,
        vectors=vectors,
        inverse=inverse,
        condition=condition,
        residual=residual,
    )


@dataclass(frozen=True, eq=False)
class CoverageCurve:
    """A sampled rho(t) curve with its provenance tags."""

    times: np.ndarray
    rho: np.ndarray
    method: str
    strategy: str
    directed: bool

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "rho", rho)
        if times.shape != rho.shape or times.ndim != 1:
            raise ValueError("times and rho must be 1-d arrays of equal length")
        if times.size and (times[0] < 0 or np.any(np.diff(times) <= 0)):
            raise ValueError("times must be non-negative and strictly increasing")
        if rho.size and (rho.min() < -1e-9 or rho.max() > 1 + 1e-9):
            raise ValueError("rho values escape [0, 1]")
        if rho.size and np.diff(rho).min(initial=0.0) < -1e-9:
            raise ValueError("rho must be monotone non-decreasing")


@dataclass(frozen=True, eq=False)
class AnalyticCoverageState:
    """Eigenbasis factors of the survival dynamics.

    The mode-l coefficient of pair (i, j) factors as
    origin_coefficients[j, l] * target_coefficients[l, i], avoiding the
    N*N*NL tensor. ``supra_indicator[:, i]`` has one entry per replica of
    node i; ``initial[j]`` is origin j's starting distribution (layer-0
    replica); initial_survival is 1 - identity.
    """

    eigenvalues: np.ndarray
    origin_coefficients: np.ndarray
    target_coefficients: np.ndarray
    supra_indicator: np.ndarray
    initial: np.ndarray
    initial_survival: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.initial.shape[0]

    def survival(self, times: np.ndarray) -> np.ndarray:
        """delta[t, j, i]: probability target i is unvisited by time t from origin j."""
        times = np.asarray(times, dtype=float)
        lam = self.eigenvalues
        small = np.abs(lam) <= ZERO_EIGENVALUE_TOL
        safe = np.where(small, 1.0, lam)
        out = np.empty((times.size, self.n_nodes, self.n_nodes))
        for start in range(0, times.size, 64):
            chunk = times[start : start + 64]
            with np.errstate(over="ignore"):
                modes = (1.0 - np.exp(-safe[None, :] * chunk[:, None])) / safe[None, :]
            modes = np.where(small[None, :], chunk[:, None] + 0j, modes)
            exponent = np.einsum(
                "tl,jl,li->tji",
                modes,
                self.origin_coefficients,
                self.target_coefficients,
                optimize=True,
            ).real
            out[start : start + 64] = self.initial_survival[None] * np.exp(
                -np.maximum(exponent, 0.0)
            )
        return out


def _symmetrizing_scale(net: MultiplexNetwork, strategy: str) -> np.ndarray | None:
    """Strength vector making the scaled RWC Laplacian symmetric (undirected only)."""
    if net.directed or strategy != RWC:
        return None
    profile = strength_profile(net)
    total = (profile.intra + profile.inter).T.reshape(-1)  # layer-major supra order
    return np.where(total > 0, total, 1.0)


def analytic_state(
    net: MultiplexNetwork,
    strategy: str,
    supra: SupraTransitionMatrix | None = None,
) -> AnalyticCoverageState:
    """Build the eigenbasis survival factors for a network and walk strategy."""
    tag = normalize_strategy(strategy)
    if supra is None:
        supra = build_supra_transition(net, tag)
    laplacian = supra_laplacian(supra)
    decomposition = decompose(laplacian, scale=_symmetrizing_scale(net, tag))
    n, dim = net.n_nodes, supra.dim
    indicator = np.zeros((dim, n))
    indicator[np.arange(dim), np.arange(dim) % n] = 1.0
    initial = np.zeros((n, dim))
    initial[np.arange(n), np.arange(n)] = 1.0  # layer-0 replica of each node
    # Discovery flux: transitions landing on a different physical node. Layer
    # switches and lazy self-moves keep the walker where it is, so they are
    # excluded from the hit rate.
    same_node = (np.arange(dim) % n)[:, None] == (np.arange(dim) % n)[None, :]
    moves = np.where(same_node, 0.0, supra.matrix)
    flux = moves @ indicator
    origin_coeff = initial @ decomposition.vectors
    target_coeff = decomposition.inverse @ flux
    survival0 = 1.0 - np.eye(n)
    return AnalyticCoverageState(
        eigenvalues=decomposition.eigenvalues,
        origin_coefficients=origin_coeff,
        target_coefficients=target_coeff,
        supra_indicator=indicator,
        initial=initial,
        initial_survival=survival0,
    )


def default_time_grid(decades: tuple[float, float] = (-2.0, 7.0), points: int = 400) -> np.ndarray:
    """t = 0 followed by a log-spaced sweep of the given decade range."""
    return np.concatenate([[0.0], np.logspace(decades[0], decades[1], points)])


def _curve_from_state(
    state: AnalyticCoverageState,
    strategy: str,
    directed: bool,
    times: np.ndarray | None,
) -> CoverageCurve:
    if times is None:
        times = default_time_grid()
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("time grid must start at 0 and increase strictly")
    delta = state.survival(times)
    rho = 1.0 - delta.mean(axis=(1, 2))
    drops = np.diff(rho).min(initial=0.0)
    if drops < -1e-9:
        raise DegradedDecompositionError(
            f"analytic coverage decreased by {-drops:.3e}; decomposition unreliable, "
            "fall back to coverage_montecarlo"
        )
    rho = np.maximum.accumulate(np.clip(rho, 0.0, 1.0))
    return CoverageCurve(times=times, rho=rho, method=ANALYTIC, strategy=strategy, directed=directed)


def coverage_analytic(
    net: MultiplexNetwork,
    strategy: str,
    times: np.ndarray | None = None,
) -> CoverageCurve:
    """Evaluate the analytic coverage curve on a time grid starting at 0."""
    tag = normalize_strategy(strategy)
    state = analytic_state(net, tag)
    return _curve_from_state(state, tag, net.directed, times)


def coverage_large_time(state: AnalyticCoverageState, times: np.ndarray) -> np.ndarray:
    """Two-mode large-time approximation of rho(t) (diagnostic only).

    Keeps the stationary mode's linear growth and the slowest decaying
    mode's saturated integral 1/lambda_2, the regime where the curve's tail
    is governed by the spectral gap.
    """
    times = np.asarray(times, dtype=float)
    lam = state.eigenvalues
    if lam.size < 2:
        raise ValueError("large-time approximation needs at least two modes")
    b, f = state.origin_coefficients, state.target_coefficients
    stationary = np.outer(b[:, 0], f[0, :]).real
    lam2 = lam[1]
    if abs(lam2) <= ZERO_EIGENVALUE_TOL:
        second = np.zeros((state.n_nodes, state.n_nodes))
    else:
        second = (np.outer(b[:, 1], f[1, :]) / lam2).real
    exponent = stationary[None, :, :] * times[:, None, None] + second[None, :, :]
    delta = state.initial_survival[None] * np.exp(-np.maximum(exponent, 0.0))
    return 1.0 - delta.mean(axis=(1, 2))


def coverage_montecarlo(
    supra: SupraTransitionMatrix,
    walkers_per_origin: int,
    horizon: int,
    seed: int,
    all_replicas: bool = False,
) -> CoverageCurve:
    """Estimate coverage per discrete step by direct walker simulation.

    One generator per origin, seeded (seed, origin), so the estimate is
    reproducible and origins can run in any order. Origins default to the
    layer-0 replica of every physical node.
    """
    if walkers_per_origin < 1:
        raise ValueError("walkers_per_origin must be >= 1")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    n, dim = supra.n_nodes, supra.dim
    origins = np.arange(dim if all_replicas else n)
    generators = [np.random.default_rng((seed, int(o))) for o in origins]
    walkers = walkers_per_origin * origins.size

    cumulative = np.cumsum(supra.matrix, axis=1)
    states = np.repeat(origins, walkers_per_origin)
    visited = np.zeros((walkers, n), dtype=bool)
    rows = np.arange(walkers)
    visited[rows, states % n] = True
    counts = np.ones(walkers)

    rho = np.empty(horizon + 1)
    rho[0] = counts.mean() / n
    for step in range(1, horizon + 1):
        u = np.concatenate([g.random(walkers_per_origin) for g in generators])
        states = (cumulative[states] < u[:, None]).sum(axis=1)
        np.minimum(states, dim - 1, out=states)
        phys = states % n
        fresh = ~visited[rows, phys]
        counts += fresh
        visited[rows, phys] = True
        rho[step] = counts.mean() / n
    return CoverageCurve(
        times=np.arange(horizon + 1, dtype=float),
        rho=rho,
        method=MONTECARLO,
        strategy=supra.strategy,
        directed=supra.directed,
    )


def poisson_clock(curve: CoverageCurve, times: np.ndarray) -> CoverageCurve:
    """Re-express a discrete-step coverage curve on the continuous clock.

    The continuous-time walk takes Poisson(t) discrete jumps by time t, so
    the continuous curve is the Poisson mixture of the step curve. The step
    curve's horizon should exceed max(times) by several standard deviations;
    the tail beyond the horizon reuses the final value.
    """
    if curve.method != MONTECARLO:
        raise ValueError("poisson_clock applies to discrete-step curves")
    times = np.asarray(times, dtype=float)
    steps = curve.times
    if not np.array_equal(steps, np.arange(steps.size)):
        raise ValueError("discrete curve must be sampled at every integer step")
    weights = stats.poisson.pmf(steps[None, :], np.maximum(times, 1e-300)[:, None])
    weights[times == 0.0] = 0.0
    weights[times == 0.0, 0] = 1.0
    tail = 1.0 - weights.sum(axis=1)
    mixed = weights @ curve.rho + np.maximum(tail, 0.0) * curve.rho[-1]
    mixed = np.maximum.accumulate(np.clip(mixed, 0.0, 1.0))
    return CoverageCurve(
        times=times,
        rho=mixed,
        method=MONTECARLO,
        strategy=curve.strategy,
        directed=curve.directed,
    )


def spectral_gap(supra: SupraTransitionMatrix) -> float:
    """Re(lambda_1) - Re(lambda_2) of the transition matrix, eigenvalues
    sorted by descending real part."""
    if supra.dim < 2:
        raise ValueError("spectral gap needs at least two supra-states")
    values = np.linalg.eigvals(supra.matrix)
    real = np.sort(values.real)[::-1]
    return float(real[0] - real[1])


def time_to_coverage(curve: CoverageCurve, level: float = 0.9) -> float | None:
    """First time rho reaches the level, log-interpolated between samples.

    None signals the curve never attains the level on its grid.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    reached = np.flatnonzero(curve.rho >= level)
    if reached.size == 0:
        return None
    hit = int(reached[0])
    if hit == 0 or curve.rho[hit] == level:
        return float(curve.times[hit])
    t0, t1 = curve.times[hit - 1], curve.times[hit]
    r0, r1 = curve.rho[hit - 1], curve.rho[hit]
    fraction = (level - r0) / (r1 - r0)
    if t0 <= 0.0:
        return float(t0 + fraction * (t1 - t0))
    return float(10 ** (math.log10(t0) + fraction * (math.log10(t1) - math.log10(t0))))


@dataclass(frozen=True, eq=False)
class NavigabilityReport:
    """Spectral gap, t90 and the analytic curve for one network variant."""

    spectral_gap: float
    t90: float | None
    curve: CoverageCurve
    config: dict
    eigenvalue_head: tuple[complex, ...]


def navigability_report(
    net: MultiplexNetwork,
    strategy: str,
    times: np.ndarray | None = None,
    level: float = 0.9,
    stage_label: str = "original",
) -> NavigabilityReport:
    """Full navigability summary for one network variant.

    With the default grid, a curve that misses the coverage level but is
    still climbing faster than 1e-4 per decade gets one 10x grid extension
    before reporting.
    """
    tag = normalize_strategy(strategy)
    supra = build_supra_transition(net, tag)
    gap = spectral_gap(supra)
    state = analytic_state(net, tag, supra)
    curve = _curve_from_state(state, tag, net.directed, times)
    t_level = time_to_coverage(curve, level)
    if t_level is None and times is None and curve.rho.size >= 2:
        slope = (curve.rho[-1] - curve.rho[-2]) / (
            np.log10(curve.times[-1]) - np.log10(curve.times[-2])
        )
        if slope > 1e-4:
            extended = default_time_grid(decades=(-2.0, 8.0), points=445)
            curve = _curve_from_state(state, tag, net.directed, extended)
            t_level = time_to_coverage(curve, level)
    head = tuple(complex(v) for v in state.eigenvalues[:10])
    return NavigabilityReport(
        spectral_gap=gap,
        t90=t_level,
        curve=curve,
        config={"strategy": tag, "directed": net.directed, "stage": stage_label},
        eigenvalue_head=head,
    )


def compare_stages(reports: list[NavigabilityReport]) -> list[dict]:
    """Tabulate gap and t90 across variants, relative to the first report."""
    if not reports:
        raise ValueError("no reports to compare")
    configs = {(r.config["strategy"], r.config["directed"]) for r in reports}
    if len(configs) > 1:
        raise ValueError(f"mixed strategy/directedness in comparison: {sorted(configs)}")
    base = reports[0]
    rows = []
    for report in reports:
        gap_change = None
        if base.spectral_gap != 0.0:
            gap_change = (report.spectral_gap - base.spectral_gap) / base.spectral_gap
        t90_change = None
        if report.t90 is not None and base.t90 not in (None, 0.0):
            t90_change = (report.t90 - base.t90) / base.t90
        rows.append(
            {
                "stage": report.config["stage"],
                "spectral_gap": report.spectral_gap,
                "t90": report.t90,
                "spectral_gap_rel_change": gap_change,
                "t90_rel_change": t90_change,
            }
        )
    return rows


def write_curve_csv(path: str | Path, curve: CoverageCurve) -> None:
    with open(path, "w", encoding="utf-8", newline="") as stream:
        stream.write("time,rho\n")
        for t, r in zip(curve.times.tolist(), curve.rho.tolist()):
            stream.write(f"{t!r},{r!r}\n")


def read_curve_csv(path: str | Path, method: str, strategy: str, directed: bool) -> CoverageCurve:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return CoverageCurve(
        times=data[:, 0], rho=data[:, 1], method=method, strategy=strategy, directed=directed
    )


def report_to_json_dict(report: NavigabilityReport, curve_file: str) -> dict:
    return {
        "config": report.config,
        "spectral_gap": report.spectral_gap,
        "t90": NOT_REACHED if report.t90 is None else report.t90,
        "curve_file": curve_file,
        "eigenvalue_head": [[v.real, v.imag] for v in report.eigenvalue_head],
    }


def write_report_json(path: str | Path, report: NavigabilityReport, curve_file: str) -> None:
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(report_to_json_dict(report, curve_file), stream, indent=2, sort_keys=True)
        stream.write("\n")
