"""Atom positions, pairwise dipole-dipole couplings and splitting statistics.

Units: lengths in um, volumes in um^3, couplings in rad/us.  A pair at
distance r couples with kappa = c3 / r^3; the volume-scale coupling
kappa_bar = c3 / V sets the minimum splitting scale of the doubly-excited
manifold for an ensemble confined to volume V.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

# Coincident-atom guard (um); couplings diverge as r -> 0.
_R_MIN = 1e-9


class GeometryError(ValueError):
    """Degenerate or infeasible geometry (coincident atoms, exclusion cap)."""


@dataclass(frozen=True)
class EnsembleGeometry:
    """Static atom positions inside an axis-aligned box."""

    positions: np.ndarray          # (n, 3) um
    box: tuple[float, float, float]
    seed: int

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]

    @property
    def volume(self) -> float:
        bx, by, bz = self.box
        return bx * by * bz


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric pair couplings kappa_ij = c3 / r_ij^3 (rad/us)."""

    kappa: np.ndarray              # (n, n), zero diagonal
    c3: float


@dataclass(frozen=True)
class SplittingHistogram:
    """Histogram of x = kappa/kappa_bar over sampled configurations."""

    bin_edges: np.ndarray
    counts: np.ndarray
    n_samples: int
    statistic: str
    samples: np.ndarray            # raw x values (n_samples or n_samples*n_pairs)

    def density(self) -> np.ndarray:
        """Per-bin probability density of the in-range samples."""
        total = self.counts.sum()
        widths = np.diff(self.bin_edges)
        if total == 0:
            return np.zeros_like(widths)
        return self.counts / (total * widths)


def sample_positions(
    n: int,
    box: tuple[float, float, float],
    seed: int,
    exclusion_radius: float | None = None,
    max_tries: int = 10_000,
) -> EnsembleGeometry:
    """Draw n uniform positions in the box, optionally with a hard core.

    With an exclusion radius the draw is rejection sampling: candidates
    closer than the radius to an accepted atom are discarded.  Exceeding
    ``max_tries`` consecutive rejections raises GeometryError (the
    constraint is infeasible at this density).  Deterministic for a fixed
    seed.
    """
    if n < 2:
        raise ValueError(f"need at least 2 atoms, got {n}")
    box = tuple(float(b) for b in box)
    if min(box) <= 0:
        raise ValueError(f"box dimensions must be positive, got {box}")
    rng = np.random.default_rng(seed)
    if exclusion_radius is None or exclusion_radius == 0.0:
        pts = rng.uniform(0.0, 1.0, size=(n, 3)) * np.asarray(box)
        return EnsembleGeometry(positions=pts, box=box, seed=seed)

    accepted = np.empty((n, 3))
    count = 0
    tries = 0
    r2_min = exclusion_radius**2
    while count < n:
        cand = rng.uniform(0.0, 1.0, size=3) * np.asarray(box)
        if count == 0 or (((accepted[:count] - cand) ** 2).sum(axis=1) >= r2_min).all():
            accepted[count] = cand
            count += 1
            tries = 0
        else:
            tries += 1
            if tries > max_tries:
                raise GeometryError(
                    f"exclusion radius {exclusion_radius} infeasible: "
                    f"{max_tries} consecutive rejections at atom {count}"
                )
    return EnsembleGeometry(positions=accepted, box=box, seed=seed)


def coupling_matrix(geom: EnsembleGeometry, c3: float) -> CouplingMatrix:
    """Pairwise couplings kappa_ij = c3 / r_ij^3 for a geometry."""
    diff = geom.positions[:, None, :] - geom.positions[None, :, :]
    r = np.sqrt((diff * diff).sum(axis=-1))
    offdiag = ~np.eye(geom.n_atoms, dtype=bool)
    if (r[offdiag] < _R_MIN).any():
        raise GeometryError("coincident atoms: pair distance below 1e-9 um")
    kappa = np.zeros_like(r)
    kappa[offdiag] = c3 / r[offdiag] ** 3
    return CouplingMatrix(kappa=kappa, c3=c3)


def kappa_bar(volume: float, c3: float) -> float:
    """Volume-scale coupling c3 / V, the minimum-splitting scale."""
    if volume <= 0:
        raise ValueError(f"volume must be positive, got {volume}")
    return c3 / volume


def min_pair_splitting(cm: CouplingMatrix) -> float:
    """Smallest off-diagonal coupling (the most distant pair)."""
    n = cm.kappa.shape[0]
    iu, ju = np.triu_indices(n, 1)
    return float(cm.kappa[iu, ju].min())


def _config_positions(n_configs: int, n_atoms: int, box, seed: int) -> np.ndarray:
    """Batch of uniform configurations, one spawned child seed per config.

    Child seeds make the sample order-independent: configuration k is a pure
    function of (seed, k), so chunked or parallel evaluation reproduces the
    serial result.
    """
    children = np.random.SeedSequence(seed).spawn(n_configs)
    box = np.asarray(box, dtype=float)
    out = np.empty((n_configs, n_atoms, 3))
    for k, child in enumerate(children):
        out[k] = np.random.default_rng(child).uniform(0.0, 1.0, size=(n_atoms, 3))
    return out * box


def splitting_distribution(
    n_configs: int,
    n_atoms: int,
    box: tuple[float, float, float],
    c3: float,
    seed: int,
    statistic: str = "min-pair",
    bins: int = 60,
    window: tuple[float, float] | None = None,
) -> SplittingHistogram:
    """Monte-Carlo histogram of x = kappa/kappa_bar over configurations.

    statistic "min-pair" records the smallest pair coupling of each
    configuration (the blockade-limiting splitting); "all-pairs" records
    every pair.  Bins are geometric; by default they span the full sample
    range so the counts sum to the sample count, an explicit window crops
    them (samples stay available in ``samples`` either way).
    """
    if n_configs < 1:
        raise ValueError(f"n_configs must be >= 1, got {n_configs}")
    if statistic not in ("min-pair", "all-pairs"):
        raise ValueError(f"unknown statistic {statistic!r}")
    positions = _config_positions(n_configs, n_atoms, box, seed)
    kb = kappa_bar(float(np.prod(box)), c3)
    if statistic == "min-pair":
        kap = _kernels.min_pair_kappa(positions, c3)
    else:
        kap = _kernels.all_pair_kappa(positions, c3)
    x = kap / kb
    if window is None:
        lo = x.min() * (1.0 - 1e-12)
        hi = x.max() * (1.0 + 1e-12)
        hi = hi if hi > lo else lo * (1.0 + 1e-9)
    else:
        lo, hi = window
    edges = np.geomspace(lo, hi, bins + 1)
    counts, _ = np.histogram(x, bins=edges)
    return SplittingHistogram(
        bin_edges=edges,
        counts=counts,
        n_samples=len(x),
        statistic=statistic,
        samples=x,
    )


def analytic_splitting_pdf(x):
    """Closed-form splitting density sqrt(2) pi exp(-pi^3/(18 x^2)) / (6 x^2).

    Random-gas approximation for the normalized splitting x = kappa/kappa_bar.
    Defined for x > 0; its mass on (0, inf) is not unity, so comparisons
    renormalize on a finite window (see ``splitting_ks``).
    """
    arr = np.asarray(x, dtype=float)
    if (arr <= 0).any():
        raise ValueError("analytic_splitting_pdf requires x > 0")
    out = np.sqrt(2.0) * np.pi * np.exp(-np.pi**3 / (18.0 * arr * arr)) / (6.0 * arr * arr)
    return out if out.ndim else float(out)


def analytic_window_cdf(xgrid: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    """CDF of the analytic pdf renormalized to unit mass on the window."""
    lo, hi = window
    grid = np.geomspace(lo, hi, 8001)
    pdf = analytic_splitting_pdf(grid)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    return np.interp(xgrid, grid, cdf)


def splitting_ks(
    samples: np.ndarray, window: tuple[float, float] = (0.2, 20.0)
) -> float:
    """Two-sided KS distance between sampled x values and the analytic pdf.

    Both distributions are renormalized to unit mass on the window: samples
    outside are dropped, the analytic cdf is rescaled.  Returns the sup
    distance between the empirical cdf and the renormalized analytic cdf.
    """
    lo, hi = window
    xs = np.sort(samples[(samples >= lo) & (samples <= hi)])
    if len(xs) == 0:
        raise ValueError("no samples inside the comparison window")
    fa = analytic_window_cdf(xs, window)
    n = len(xs)
    d_hi = np.abs(np.arange(1, n + 1) / n - fa).max()
    d_lo = np.abs(np.arange(0, n) / n - fa).max()
    return float(max(d_hi, d_lo))
