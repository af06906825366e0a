"""Secondary channel statistics: delay profiles, angular spectra and spreads."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInputError,
    EmptyProfileError,
    NonPositiveBinWidthError,
)
from .generate import ChannelDrop

AZ_CELLS = 360
EL_CELLS = 181  # -90 .. +90 inclusive at 1 degree


@dataclass
class PowerDelayProfile:
    """Tap list of (excess delay, power), optionally with a binned form."""

    delays_ns: np.ndarray
    powers_mw: np.ndarray
    bin_width_ns: float | None = None
    bin_left_edges_ns: np.ndarray | None = None
    bin_powers_mw: np.ndarray | None = None

    @property
    def num_taps(self) -> int:
        return len(self.delays_ns)

    @property
    def total_power_mw(self) -> float:
        return float(self.powers_mw.sum())


@dataclass
class PowerAngularSpectrum:
    """Power on a 1-degree azimuth x elevation grid.

    grid[a, e] holds the power at azimuth a degrees and elevation
    (e - 90) degrees; azimuth wraps circularly, elevation does not.
    """

    side: str
    grid: np.ndarray  # shape (360, 181), mW

    @property
    def total_power_mw(self) -> float:
        return float(self.grid.sum())

    def cell_power(self, az_deg: int, el_deg: int) -> float:
        return float(self.grid[az_deg % AZ_CELLS, el_deg + 90])


def build_pdp(drop: ChannelDrop, bin_width_ns: float | None = None) -> PowerDelayProfile:
    """Collect the drop's subpaths into a delay-sorted tap list.

    When `bin_width_ns` is given, a binned profile is attached (bin k
    covers [k*w, (k+1)*w), labeled by its left edge). The exact taps are
    kept either way; binning is for export and plotting only.
    """
    if bin_width_ns is not None and bin_width_ns <= 0:
        raise NonPositiveBinWidthError(f"bin width must be > 0, got {bin_width_ns}")
    delays = drop.excess_delays_ns()
    powers = drop.powers_mw()
    order = np.argsort(delays, kind="stable")
    pdp = PowerDelayProfile(delays_ns=delays[order], powers_mw=powers[order])
    if bin_width_ns is not None:
        idx = np.floor(pdp.delays_ns / bin_width_ns).astype(np.int64)
        n_bins = int(idx.max()) + 1 if len(idx) else 0
        binned = np.zeros(n_bins)
        np.add.at(binned, idx, pdp.powers_mw)
        pdp.bin_width_ns = bin_width_ns
        pdp.bin_left_edges_ns = np.arange(n_bins) * bin_width_ns
        pdp.bin_powers_mw = binned
    return pdp


def rms_delay_spread(pdp: PowerDelayProfile) -> float:
    """Power-weighted standard deviation of the exact tap delays, ns."""
    return _weighted_delay_spread(pdp.delays_ns, pdp.powers_mw)


def drop_rms_delay_spread(drop: ChannelDrop) -> float:
    """RMS delay spread straight from the drop's subpaths.

    Power fractions are used as weights, so the value does not depend on
    transmit power or distance in any bit.
    """
    return _weighted_delay_spread(drop.excess_delays_ns(), drop.power_fractions())


def _weighted_delay_spread(delays: np.ndarray, weights: np.ndarray) -> float:
    if len(delays) == 0:
        raise EmptyProfileError("no taps")
    total = weights.sum()
    if not total > 0:
        raise EmptyProfileError("profile has no power")
    mean = float(np.dot(weights, delays) / total)
    second = float(np.dot(weights, delays**2) / total)
    return math.sqrt(max(second - mean * mean, 0.0))


def build_pas(drop: ChannelDrop, side: str) -> PowerAngularSpectrum:
    """Deposit each subpath's power into its nearest 1-degree cell."""
    az = drop.angles_deg(side, "azimuth")
    el = drop.angles_deg(side, "elevation")
    powers = drop.powers_mw()
    grid = np.zeros((AZ_CELLS, EL_CELLS))
    ai = np.rint(az).astype(np.int64) % AZ_CELLS
    ei = np.clip(np.rint(el).astype(np.int64), -90, 90) + 90
    np.add.at(grid, (ai, ei), powers)
    return PowerAngularSpectrum(side=side, grid=grid)


def circular_angular_spread(angles_deg, powers) -> float:
    """Wrapped angular spread in degrees.

    Computed from the power-weighted mean resultant of the angles:
    sqrt(-2 ln |sum p*exp(j*theta)| / sum p). The resultant magnitude is
    clamped below at 1e-12, and magnitudes within 1e-15 of unity count
    as 1 (spread 0), so a single direction is exactly spread-free.
    """
    angles = np.asarray(angles_deg, dtype=float)
    weights = np.asarray(powers, dtype=float)
    if angles.size == 0 or weights.size == 0:
        raise EmptyInputError("no angles")
    total = weights.sum()
    if not total > 0:
        raise EmptyInputError("no power")
    theta = np.deg2rad(angles)
    resultant = float(np.abs(np.dot(weights, np.exp(1j * theta))) / total)
    if resultant >= 1.0 - 1e-15:
        return 0.0
    resultant = max(resultant, 1e-12)
    return math.degrees(math.sqrt(-2.0 * math.log(resultant)))


def global_rms_as(drop: ChannelDrop, side: str, plane: str) -> float:
    """Circular angular spread of the delay-integrated power, degrees.

    `side` is 'aod' or 'aoa'; `plane` is 'azimuth' or 'elevation'.
    Power fractions weight the subpath directions, so the spread is
    invariant to transmit power and distance.
    """
    return circular_angular_spread(drop.angles_deg(side, plane), drop.power_fractions())


def drop_metrics(drop: ChannelDrop) -> dict:
    """All per-drop spread metrics in one pass over the subpaths.

    Equals {rms_ds_ns: drop_rms_delay_spread, as_<side>_<plane>_deg:
    global_rms_as} but shares the concatenated weight vector.
    """
    weights = drop.power_fractions()
    return {
        "rms_ds_ns": _weighted_delay_spread(drop.excess_delays_ns(), weights),
        "as_aod_az_deg": circular_angular_spread(drop.angles_deg("aod", "azimuth"), weights),
        "as_aod_el_deg": circular_angular_spread(drop.angles_deg("aod", "elevation"), weights),
        "as_aoa_az_deg": circular_angular_spread(drop.angles_deg("aoa", "azimuth"), weights),
        "as_aoa_el_deg": circular_angular_spread(drop.angles_deg("aoa", "elevation"), weights),
    }


@dataclass
class Summary:
    """Order statistics of a metric across drops."""

    count: int
    median: float
    mean: float
    cdf_grid: np.ndarray
    cdf_probs: np.ndarray

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "median": self.median,
            "mean": self.mean,
            "cdf_grid": self.cdf_grid.tolist(),
            "cdf_probs": self.cdf_probs.tolist(),
        }


def summarize(values, cdf_grid=None) -> Summary:
    """Median (lower-middle for even counts), mean and empirical CDF.

    The CDF is evaluated at `cdf_grid` when given, otherwise at the
    sorted sample values themselves; P(X <= max) is exactly 1.
    """
    data = np.sort(np.asarray(values, dtype=float))
    if data.size == 0:
        raise EmptyInputError("no values")
    median = float(data[(data.size - 1) // 2])
    grid = data if cdf_grid is None else np.sort(np.asarray(cdf_grid, dtype=float))
    probs = np.searchsorted(data, grid, side="right") / data.size
    return Summary(
        count=int(data.size),
        median=median,
        mean=float(data.mean()),
        cdf_grid=np.asarray(grid, dtype=float),
        cdf_probs=probs,
    )
