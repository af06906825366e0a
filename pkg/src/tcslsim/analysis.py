"""Closed-loop channel analysis.

Partitions delay profiles into time clusters, extracts spatial lobes
from angular spectra, and re-fits the generating distribution families
by maximum likelihood, so simulated (or imported) channels can be
checked against the parameters that produced them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, optimize, stats as sps

from .errors import (
    EmptyGridError,
    EmptyProfileError,
    EmptySamplesError,
    InsufficientSamplesError,
    InvalidParamsError,
    NonPositiveSampleError,
    TooFewSamplesError,
)
from .generate import ChannelDrop
from .stats import AZ_CELLS, EL_CELLS, PowerAngularSpectrum, PowerDelayProfile


# --- time-cluster partitioning ---------------------------------------------

@dataclass
class ExtractedCluster:
    start_index: int
    tap_indices: np.ndarray
    excess_delay_ns: float
    power_mw: float


@dataclass
class ClusterPartition:
    clusters: list
    mti_ns: float

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)


def partition_time_clusters(pdp: PowerDelayProfile, mti_ns: float) -> ClusterPartition:
    """Greedy left-to-right grouping of taps into time clusters.

    A tap starts a new cluster when its delay gap to the previous tap
    reaches the minimum inter-cluster time void interval.
    """
    if mti_ns <= 0:
        raise InvalidParamsError(f"mti must be > 0, got {mti_ns}")
    delays = pdp.delays_ns
    if len(delays) == 0:
        raise EmptyProfileError("no taps to partition")
    gaps = np.diff(delays)
    boundaries = np.flatnonzero(gaps >= mti_ns) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [len(delays)]))
    clusters = [
        ExtractedCluster(
            start_index=int(s),
            tap_indices=np.arange(s, e),
            excess_delay_ns=float(delays[s]),
            power_mw=float(pdp.powers_mw[s:e].sum()),
        )
        for s, e in zip(starts, ends)
    ]
    return ClusterPartition(clusters=clusters, mti_ns=mti_ns)


def inter_cluster_offsets(drop: ChannelDrop, mti_ns: float) -> np.ndarray:
    """Invert the cluster-delay construction of a generated drop.

    Returns the per-cluster delay offsets beyond the void interval,
    i.e. tau_n - tau_{n-1} - rho_last,{n-1} - mti for n >= 2. These are
    the sorted-draw offsets, so fitting them recovers the generating
    distribution's order statistics, not its raw parameter.
    """
    offsets = []
    for prev, cur in zip(drop.clusters, drop.clusters[1:]):
        offsets.append(cur.excess_delay_ns - prev.excess_delay_ns
                       - prev.last_intra_delay_ns - mti_ns)
    return np.asarray(offsets)


def intra_delay_samples(drop: ChannelDrop) -> np.ndarray:
    """Intra-cluster delays excluding each cluster's structural zero.

    For exponential draws, the deltas above the cluster minimum are
    again independent exponentials with the same mean, so these samples
    estimate mu_rho without sorting bias.
    """
    parts = [c.intra_delays_ns[1:] for c in drop.clusters if c.num_subpaths > 1]
    if not parts:
        return np.empty(0)
    return np.concatenate(parts)


# --- spatial-lobe extraction -------------------------------------------------

@dataclass
class Lobe:
    index: int
    cells: np.ndarray           # (k, 2) array of (az_deg, el_deg) ints
    peak_az_deg: int
    peak_el_deg: int
    power_mw: float
    mean_az_deg: float
    mean_el_deg: float


@dataclass
class LobeSet:
    lobes: list
    slt_db: float

    @property
    def num_lobes(self) -> int:
        return len(self.lobes)


def interpolate_pas(samples, side: str = "aoa", renormalize: bool = True) -> PowerAngularSpectrum:
    """Spread coarse directional power samples onto the 1-degree grid.

    `samples` is an (n, 3) array of (azimuth deg, elevation deg, power).
    Interpolation is piecewise linear, done per plane: first circularly
    in azimuth along each sampled elevation, then in elevation down each
    azimuth column (no extrapolation beyond the sampled elevation span).
    With `renormalize`, the grid is rescaled to preserve total power.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise InsufficientSamplesError("expected (n, 3) samples of (az, el, power)")
    az = pts[:, 0] % 360.0
    el = pts[:, 1]
    pw = pts[:, 2]
    if len(np.unique(az)) < 2:
        raise InsufficientSamplesError("need at least 2 distinct azimuth samples")

    el_levels = np.unique(el)
    az_grid = np.arange(AZ_CELLS, dtype=float)
    rows = np.zeros((len(el_levels), AZ_CELLS))
    for r, level in enumerate(el_levels):
        at_level = el == level
        az_l, pw_l = _merge_duplicate_azimuths(az[at_level], pw[at_level])
        if len(az_l) == 1:
            rows[r, int(round(az_l[0])) % AZ_CELLS] = pw_l[0]
        else:
            rows[r] = np.interp(az_grid, az_l, pw_l, period=360.0)

    el_grid = np.arange(EL_CELLS, dtype=float) - 90.0
    grid = np.zeros((AZ_CELLS, EL_CELLS))
    if len(el_levels) == 1:
        grid[:, int(round(el_levels[0])) + 90] = rows[0]
    else:
        inside = (el_grid >= el_levels[0]) & (el_grid <= el_levels[-1])
        for a in range(AZ_CELLS):
            grid[a, inside] = np.interp(el_grid[inside], el_levels, rows[:, a])

    if renormalize:
        total = grid.sum()
        if total > 0:
            grid *= pw.sum() / total
    return PowerAngularSpectrum(side=side, grid=grid)


def _merge_duplicate_azimuths(az: np.ndarray, pw: np.ndarray):
    uniq, inverse = np.unique(az, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inverse, pw)
    return uniq, merged


def extract_spatial_lobes(pas: PowerAngularSpectrum, slt_db: float = -10.0) -> LobeSet:
    """Find spatial lobes: connected regions above the lobe threshold.

    Cells within `slt_db` of the spectrum peak are kept and grouped by
    4-neighborhood adjacency (azimuth wraps, elevation does not). Lobes
    are returned strongest first with power-weighted mean directions.
    """
    grid = pas.grid
    peak = grid.max()
    if not peak > 0:
        raise EmptyGridError("spectrum has no power")
    threshold = peak * 10.0 ** (slt_db / 10.0)
    mask = grid >= threshold

    labels, n_labels = ndimage.label(mask)
    labels = _merge_wrapped_labels(labels, mask)

    lobes = []
    for lab in np.unique(labels[labels > 0]):
        cells = np.argwhere(labels == lab)
        powers = grid[cells[:, 0], cells[:, 1]]
        total = powers.sum()
        peak_cell = cells[np.argmax(powers)]
        mean_az = _circular_mean_deg(cells[:, 0].astype(float), powers)
        mean_el = float(np.dot(powers, cells[:, 1] - 90.0) / total)
        lobes.append(Lobe(
            index=0,
            cells=np.column_stack((cells[:, 0], cells[:, 1] - 90)),
            peak_az_deg=int(peak_cell[0]),
            peak_el_deg=int(peak_cell[1]) - 90,
            power_mw=float(total),
            mean_az_deg=mean_az,
            mean_el_deg=mean_el,
        ))
    lobes.sort(key=lambda l: l.power_mw, reverse=True)
    for i, lobe in enumerate(lobes):
        lobe.index = i + 1
    return LobeSet(lobes=lobes, slt_db=slt_db)


def _merge_wrapped_labels(labels: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Union labels that touch across the azimuth 359 -> 0 seam."""
    seam = np.flatnonzero(mask[0] & mask[-1])
    if len(seam) == 0:
        return labels
    remap = {}
    for e in seam:
        a, b = labels[0, e], labels[-1, e]
        ra = _find_root(remap, a)
        rb = _find_root(remap, b)
        if ra != rb:
            remap[max(ra, rb)] = min(ra, rb)
    out = labels.copy()
    for lab in np.unique(labels[labels > 0]):
        root = _find_root(remap, lab)
        if root != lab:
            out[labels == lab] = root
    return out


def _find_root(remap: dict, lab: int) -> int:
    while lab in remap:
        lab = remap[lab]
    return lab


def _circular_mean_deg(angles_deg: np.ndarray, weights: np.ndarray) -> float:
    theta = np.deg2rad(angles_deg)
    vec = np.dot(weights, np.exp(1j * theta))
    return float(np.rad2deg(np.angle(vec)) % 360.0)


# --- distribution fitting -----------------------------------------------------

@dataclass
class FitReport:
    family: str
    params: dict
    log_likelihood: float
    n_samples: int
    extras: dict = field(default_factory=dict)


def fit_poisson_shifted(samples) -> FitReport:
    """MLE for counts distributed as 1 + Poisson(lambda)."""
    x = _check_counts(samples)
    shifted = x - 1
    lam = float(shifted.mean())
    loglik = float(sps.poisson.logpmf(shifted, lam).sum()) if lam > 0 else (
        0.0 if not shifted.any() else -math.inf)
    return FitReport("poisson_shifted", {"lambda": lam}, loglik, len(x))


def fit_composite_subpath(samples) -> FitReport:
    """MLE for the composite subpath-count distribution.

    The likelihood is profiled: for each weight beta the inner optimum
    over mu_s has a closed form (root of a quadratic in q = e^{-1/mu_s}),
    so the outer search is a fine beta grid followed by a bounded refine.
    If every shifted sample is zero the weight is zero and the decay
    scale is undefined (reported as NaN).
    """
    x = _check_counts(samples)
    shifted = x - 1
    n0 = int((shifted == 0).sum())
    pos = shifted[shifted > 0]
    n_pos = len(pos)
    total_pos = int(pos.sum())

    if n_pos == 0:
        return FitReport("composite_subpath", {"beta": 0.0, "mu_s": math.nan}, 0.0, len(x))

    def profile(beta):
        q = _composite_inner_q(beta, n0, n_pos, total_pos)
        return _composite_loglik(beta, q, n0, n_pos, total_pos), q

    betas = np.linspace(1e-3, 1.0, 1000)
    lls = np.array([profile(b)[0] for b in betas])
    best = int(np.argmax(lls))
    lo = betas[max(best - 1, 0)]
    hi = betas[min(best + 1, len(betas) - 1)]
    res = optimize.minimize_scalar(lambda b: -profile(b)[0], bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-10})
    beta_hat = float(min(res.x, 1.0))
    ll_hat, q_hat = profile(beta_hat)
    if lls[best] > ll_hat:  # guard against a refine that did not improve
        beta_hat = float(betas[best])
        ll_hat, q_hat = profile(beta_hat)
    mu_s = -1.0 / math.log(q_hat)
    return FitReport("composite_subpath", {"beta": beta_hat, "mu_s": mu_s}, float(ll_hat), len(x))


def _composite_inner_q(beta: float, n0: int, n_pos: int, total_pos: int) -> float:
    # d/dq log-likelihood = 0 reduces to a*q^2 - b*q + c = 0
    a = beta * (n0 + n_pos + total_pos)
    b = n0 * beta + total_pos * (1.0 + beta) + n_pos
    c = float(total_pos)
    disc = max(b * b - 4.0 * a * c, 0.0)
    q = (b - math.sqrt(disc)) / (2.0 * a)
    return min(max(q, 1e-15), 1.0 - 1e-15)


def _composite_loglik(beta: float, q: float, n0: int, n_pos: int, total_pos: int) -> float:
    if beta <= 0.0:
        return -math.inf if n_pos else 0.0
    return (n0 * math.log1p(-beta * q) + n_pos * math.log(beta)
            + total_pos * math.log(q) + n_pos * math.log1p(-q))


def fit_exponential(samples) -> FitReport:
    """Closed-form exponential MLE (sample mean)."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise EmptySamplesError("no samples")
    if (x < 0).any():
        raise NonPositiveSampleError("exponential samples must be >= 0")
    mu = float(x.mean())
    loglik = float(-x.size * math.log(mu) - x.sum() / mu) if mu > 0 else math.inf
    return FitReport("exponential", {"mu": mu}, loglik, x.size)


def fit_lognormal(samples) -> FitReport:
    """Closed-form lognormal MLE: mean/std of log samples (population std)."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise EmptySamplesError("no samples")
    if (x <= 0).any():
        raise NonPositiveSampleError("lognormal samples must be > 0")
    logs = np.log(x)
    mu = float(logs.mean())
    sigma = float(logs.std())
    if sigma > 0:
        loglik = float(-logs.sum() - x.size * (math.log(sigma) + 0.5 * math.log(2 * math.pi))
                       - ((logs - mu) ** 2).sum() / (2 * sigma * sigma))
    else:
        loglik = math.inf
    return FitReport("lognormal", {"mu": mu, "sigma": sigma}, loglik, x.size)


_FITTERS = {
    "exponential": fit_exponential,
    "lognormal": fit_lognormal,
}


def compare_distributions(samples, families=("exponential", "lognormal")) -> list:
    """Fit each candidate family, attach a KS statistic, rank by likelihood.

    Families whose support does not cover the data (lognormal on zeros)
    are skipped. Requires at least 20 samples.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 20:
        raise TooFewSamplesError(f"need >= 20 samples, got {x.size}")
    reports = []
    for family in families:
        if family not in _FITTERS:
            raise InvalidParamsError(f"unknown family {family!r}")
        try:
            report = _FITTERS[family](x)
        except NonPositiveSampleError:
            continue
        report.extras["ks_stat"] = _ks_stat(x, family, report.params)
        reports.append(report)
    reports.sort(key=lambda r: r.log_likelihood, reverse=True)
    return reports


def _ks_stat(x: np.ndarray, family: str, params: dict) -> float:
    if family == "exponential":
        dist = sps.expon(scale=params["mu"])
    else:
        dist = sps.lognorm(s=max(params["sigma"], 1e-12), scale=math.exp(params["mu"]))
    return float(sps.kstest(x, dist.cdf).statistic)


def _check_counts(samples) -> np.ndarray:
    x = np.asarray(samples)
    if x.size == 0:
        raise EmptySamplesError("no samples")
    if (x < 1).any():
        raise NonPositiveSampleError("counts must be >= 1")
    return x.astype(np.int64)
