"""Omnidirectional channel drop generation.

A drop is one statistical realization of the channel: subpaths grouped
into time clusters (delay structure) and assigned to spatial lobes
(angular structure). Generation runs a fixed sequence of draws, each on
its own labeled substream, so adding or reordering later steps can never
perturb the values produced by earlier ones:

    distance -> shadow -> num_clusters -> num_subpaths -> intra_delay
    -> cluster_delay -> cluster_power -> subpath_power -> phase
    -> num_lobes -> lobe_angle -> angle_offset

Cluster and subpath powers are stored both in absolute mW and as
fractions of the total received power. The fractions never touch the
link budget, so delay- and angle-spread statistics computed from them
are bit-identical across transmit power and distance changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .pathloss import SPEED_OF_LIGHT_M_PER_NS, LinkBudget, link_budget
from .randcore import (
    CompositeSubpath,
    DiscreteUniform,
    Exponential,
    Lognormal,
    Normal,
    PoissonShifted,
    RandomStream,
    StreamFamily,
    Uniform,
)
from .scenario import Scenario, ScenarioParams, SimConfig, resolved_params

SUBSTREAM_LABELS = (
    "distance", "shadow", "num_clusters", "num_subpaths", "intra_delay",
    "cluster_delay", "cluster_power", "subpath_power", "phase",
    "num_lobes", "lobe_angle", "angle_offset",
)


@dataclass(frozen=True)
class SpatialLobe:
    """A main direction of departure or arrival."""

    side: str            # 'aod' or 'aoa'
    index: int           # 1-based lobe number
    mean_az_deg: float   # within the lobe's sector [360(i-1)/L, 360i/L)
    mean_el_deg: float   # elevation above horizon, positive up

    @property
    def mean_zenith_deg(self) -> float:
        return 90.0 - self.mean_el_deg


@dataclass(frozen=True)
class Subpath:
    """Read-only view of one multipath component."""

    cluster_index: int
    subpath_index: int
    power_mw: float
    power_fraction: float
    phase_rad: float
    intra_delay_ns: float
    excess_delay_ns: float
    absolute_delay_ns: float
    aod_az_deg: float
    aod_el_deg: float
    aoa_az_deg: float
    aoa_el_deg: float
    aod_lobe_index: int
    aoa_lobe_index: int

    @property
    def magnitude(self) -> float:
        """Amplitude in sqrt-mW."""
        return math.sqrt(self.power_mw)

    @property
    def aod_zenith_deg(self) -> float:
        return 90.0 - self.aod_el_deg

    @property
    def aoa_zenith_deg(self) -> float:
        return 90.0 - self.aoa_el_deg


@dataclass
class TimeCluster:
    """Subpaths arriving close together in time.

    Per-subpath arrays are ordered by intra-cluster delay ascending;
    the first intra delay is always exactly zero.
    """

    index: int
    excess_delay_ns: float
    power_mw: float
    power_fraction: float
    intra_delays_ns: np.ndarray
    subpath_power_mw: np.ndarray
    subpath_power_fraction: np.ndarray
    phase_rad: np.ndarray
    aod_az_deg: np.ndarray
    aod_el_deg: np.ndarray
    aoa_az_deg: np.ndarray
    aoa_el_deg: np.ndarray
    aod_lobe_index: np.ndarray
    aoa_lobe_index: np.ndarray

    @property
    def num_subpaths(self) -> int:
        return len(self.intra_delays_ns)

    @property
    def subpath_excess_delays_ns(self) -> np.ndarray:
        return self.excess_delay_ns + self.intra_delays_ns

    @property
    def last_intra_delay_ns(self) -> float:
        return float(self.intra_delays_ns[-1])


@dataclass
class ChannelDrop:
    """One realization of the omnidirectional channel."""

    scenario: Scenario
    distance_m: float
    link: LinkBudget
    clusters: list
    aod_lobes: list
    aoa_lobes: list
    master_seed: int
    drop_index: int

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    @property
    def num_subpaths(self) -> int:
        return sum(c.num_subpaths for c in self.clusters)

    @property
    def propagation_delay_ns(self) -> float:
        """First-arrival time assuming a free-space line path."""
        return self.distance_m / SPEED_OF_LIGHT_M_PER_NS

    def excess_delays_ns(self) -> np.ndarray:
        return np.concatenate([c.subpath_excess_delays_ns for c in self.clusters])

    def absolute_delays_ns(self) -> np.ndarray:
        return self.propagation_delay_ns + self.excess_delays_ns()

    def powers_mw(self) -> np.ndarray:
        return np.concatenate([c.subpath_power_mw for c in self.clusters])

    def power_fractions(self) -> np.ndarray:
        return np.concatenate([c.subpath_power_fraction for c in self.clusters])

    def angles_deg(self, side: str, plane: str) -> np.ndarray:
        """Per-subpath angles: side in {aod, aoa}, plane in {azimuth, elevation}."""
        attr = f"{side}_{'az' if plane == 'azimuth' else 'el'}_deg"
        return np.concatenate([getattr(c, attr) for c in self.clusters])

    def subpaths(self) -> Iterator[Subpath]:
        t0 = self.propagation_delay_ns
        for c in self.clusters:
            for m in range(c.num_subpaths):
                excess = float(c.subpath_excess_delays_ns[m])
                yield Subpath(
                    cluster_index=c.index,
                    subpath_index=m + 1,
                    power_mw=float(c.subpath_power_mw[m]),
                    power_fraction=float(c.subpath_power_fraction[m]),
                    phase_rad=float(c.phase_rad[m]),
                    intra_delay_ns=float(c.intra_delays_ns[m]),
                    excess_delay_ns=excess,
                    absolute_delay_ns=t0 + excess,
                    aod_az_deg=float(c.aod_az_deg[m]),
                    aod_el_deg=float(c.aod_el_deg[m]),
                    aoa_az_deg=float(c.aoa_az_deg[m]),
                    aoa_el_deg=float(c.aoa_el_deg[m]),
                    aod_lobe_index=int(c.aod_lobe_index[m]),
                    aoa_lobe_index=int(c.aoa_lobe_index[m]),
                )

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.label(),
            "drop_index": self.drop_index,
            "master_seed": self.master_seed,
            "distance_m": self.distance_m,
            "link": {
                "frequency_hz": self.link.frequency_hz,
                "distance_m": self.link.distance_m,
                "tx_power_dbm": self.link.tx_power_dbm,
                "fspl_1m_db": self.link.fspl_1m_db,
                "shadow_fading_db": self.link.shadow_fading_db,
                "path_loss_db": self.link.path_loss_db,
                "rx_power_dbm": self.link.rx_power_dbm,
                "rx_power_mw": self.link.rx_power_mw,
            },
            "aod_lobes": [
                {"index": l.index, "mean_az_deg": l.mean_az_deg, "mean_el_deg": l.mean_el_deg}
                for l in self.aod_lobes
            ],
            "aoa_lobes": [
                {"index": l.index, "mean_az_deg": l.mean_az_deg, "mean_el_deg": l.mean_el_deg}
                for l in self.aoa_lobes
            ],
            "clusters": [
                {
                    "index": c.index,
                    "excess_delay_ns": c.excess_delay_ns,
                    "power_mw": c.power_mw,
                    "power_fraction": c.power_fraction,
                    "intra_delays_ns": c.intra_delays_ns.tolist(),
                    "subpath_power_mw": c.subpath_power_mw.tolist(),
                    "subpath_power_fraction": c.subpath_power_fraction.tolist(),
                    "phase_rad": c.phase_rad.tolist(),
                    "aod_az_deg": c.aod_az_deg.tolist(),
                    "aod_el_deg": c.aod_el_deg.tolist(),
                    "aoa_az_deg": c.aoa_az_deg.tolist(),
                    "aoa_el_deg": c.aoa_el_deg.tolist(),
                    "aod_lobe_index": c.aod_lobe_index.tolist(),
                    "aoa_lobe_index": c.aoa_lobe_index.tolist(),
                }
                for c in self.clusters
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelDrop":
        link = LinkBudget(**data["link"])
        clusters = [
            TimeCluster(
                index=c["index"],
                excess_delay_ns=c["excess_delay_ns"],
                power_mw=c["power_mw"],
                power_fraction=c["power_fraction"],
                intra_delays_ns=np.asarray(c["intra_delays_ns"], dtype=float),
                subpath_power_mw=np.asarray(c["subpath_power_mw"], dtype=float),
                subpath_power_fraction=np.asarray(c["subpath_power_fraction"], dtype=float),
                phase_rad=np.asarray(c["phase_rad"], dtype=float),
                aod_az_deg=np.asarray(c["aod_az_deg"], dtype=float),
                aod_el_deg=np.asarray(c["aod_el_deg"], dtype=float),
                aoa_az_deg=np.asarray(c["aoa_az_deg"], dtype=float),
                aoa_el_deg=np.asarray(c["aoa_el_deg"], dtype=float),
                aod_lobe_index=np.asarray(c["aod_lobe_index"], dtype=np.int64),
                aoa_lobe_index=np.asarray(c["aoa_lobe_index"], dtype=np.int64),
            )
            for c in data["clusters"]
        ]
        return cls(
            scenario=Scenario.parse(data["scenario"]),
            distance_m=data["distance_m"],
            link=link,
            clusters=clusters,
            aod_lobes=[SpatialLobe("aod", l["index"], l["mean_az_deg"], l["mean_el_deg"])
                       for l in data["aod_lobes"]],
            aoa_lobes=[SpatialLobe("aoa", l["index"], l["mean_az_deg"], l["mean_el_deg"])
                       for l in data["aoa_lobes"]],
            master_seed=data["master_seed"],
            drop_index=data["drop_index"],
        )


# --- generation steps -------------------------------------------------------

def draw_num_time_clusters(params: ScenarioParams, stream: RandomStream) -> int:
    """Number of time clusters: discrete uniform (LOS) or shifted Poisson (NLOS)."""
    if params.n_c_max is not None:
        return int(stream.sample(DiscreteUniform(1, params.n_c_max)))
    return int(stream.sample(PoissonShifted(params.lambda_c)))


def draw_num_subpaths(params: ScenarioParams, stream: RandomStream, num_clusters: int) -> np.ndarray:
    """Per-cluster subpath counts from the composite distribution, each >= 1."""
    return stream.sample(CompositeSubpath(params.beta_s, params.mu_s), num_clusters)


def sort_from_first(values) -> np.ndarray:
    """Ascending order re-anchored at the earliest value (first entry 0)."""
    ordered = np.sort(np.asarray(values, dtype=float))
    return ordered - ordered[0]


def wrap_azimuth_deg(angle_deg):
    return angle_deg % 360.0


def draw_intra_cluster_delays(params: ScenarioParams, stream: RandomStream,
                              num_subpaths: int) -> np.ndarray:
    """Sorted intra-cluster delays, shifted so the first subpath is at 0."""
    return sort_from_first(stream.sample(Exponential(params.mu_rho), num_subpaths))


def cluster_delay_spec(params: ScenarioParams):
    if params.cluster_delay_family == "lognormal":
        return Lognormal(params.mu_tau, params.sigma_tau)
    return Exponential(params.mu_tau)


def place_cluster_delays(draws, intra_delays: Sequence[np.ndarray], mti: float) -> np.ndarray:
    """Lay out cluster start times from raw delay draws.

    The draws are sorted and re-anchored at the smallest one; cluster n
    then starts `mti` plus its sorted offset after the last subpath of
    cluster n-1, which guarantees every inter-cluster gap is at least
    the void interval.
    """
    deltas = sort_from_first(draws)
    tau = np.zeros(len(deltas))
    for n in range(1, len(deltas)):
        prev_end = tau[n - 1] + intra_delays[n - 1][-1]
        tau[n] = prev_end + (mti + deltas[n])
    return tau


def compose_cluster_delays(params: ScenarioParams, stream: RandomStream,
                           num_clusters: int,
                           intra_delays: Sequence[np.ndarray]) -> np.ndarray:
    """Cluster excess delays with a guaranteed inter-cluster void."""
    draws = stream.sample(cluster_delay_spec(params), num_clusters)
    return place_cluster_delays(draws, intra_delays, params.mti)


def cluster_power_fractions(params: ScenarioParams, stream: RandomStream,
                            cluster_delays_ns: np.ndarray) -> np.ndarray:
    """Per-cluster share of total power: exponential decay with lognormal
    shadowing, normalized to sum to one."""
    n = len(cluster_delays_ns)
    z_db = stream.sample(Normal(0.0, params.sigma_z), n)
    raw = np.exp(-cluster_delays_ns / params.gamma_cluster) * 10.0 ** (z_db / 10.0)
    return raw / raw.sum()


def assign_cluster_powers(params: ScenarioParams, link: LinkBudget,
                          stream: RandomStream,
                          cluster_delays_ns: np.ndarray) -> np.ndarray:
    """Cluster powers in mW, summing to the received power."""
    return cluster_power_fractions(params, stream, cluster_delays_ns) * link.rx_power_mw


def subpath_power_fractions(params: ScenarioParams, stream: RandomStream,
                            intra_delays_ns: np.ndarray) -> np.ndarray:
    """Within-cluster subpath power shares, normalized to sum to one."""
    m = len(intra_delays_ns)
    u_db = stream.sample(Normal(0.0, params.sigma_u), m)
    raw = np.exp(-intra_delays_ns / params.gamma_subpath) * 10.0 ** (u_db / 10.0)
    return raw / raw.sum()


def assign_subpath_powers(params: ScenarioParams, stream: RandomStream,
                          cluster: TimeCluster) -> np.ndarray:
    """Subpath powers in mW, summing to the cluster power."""
    return subpath_power_fractions(params, stream, cluster.intra_delays_ns) * cluster.power_mw


def draw_subpath_phases(stream: RandomStream, count: int) -> np.ndarray:
    """Independent phases, uniform on [0, 2*pi)."""
    return stream.sample(Uniform(0.0, 2.0 * math.pi), count)


def draw_num_spatial_lobes(params: ScenarioParams, stream: RandomStream) -> tuple[int, int]:
    """Independent lobe counts for departure and arrival (AOD drawn first)."""
    l_aod = int(stream.sample(DiscreteUniform(1, params.l_aod_max)))
    l_aoa = int(stream.sample(DiscreteUniform(1, params.l_aoa_max)))
    return l_aod, l_aoa


def draw_lobe_mean_angles(params: ScenarioParams, stream: RandomStream,
                          num_lobes: int, side: str) -> list:
    """Lobe mean directions: azimuth uniform within the lobe's sector,
    elevation normal around the side's mean tilt, clamped to +/-90.

    All azimuths are drawn before all elevations.
    """
    u = stream.uniform(num_lobes)
    sector = 360.0 / num_lobes
    azimuths = (np.arange(num_lobes) + u) * sector
    mu_l, sigma_l = params.lobe_elevation_params(side)
    elevations = np.clip(stream.sample(Normal(mu_l, sigma_l), num_lobes), -90.0, 90.0)
    return [
        SpatialLobe(side, i + 1, float(azimuths[i]), float(elevations[i]))
        for i in range(num_lobes)
    ]


def draw_subpath_angle_offsets(params: ScenarioParams, stream: RandomStream,
                               count: int, aod_lobes: list, aoa_lobes: list):
    """Assign every subpath a lobe per side and scatter it around the
    lobe mean: azimuth offsets wrap modulo 360, elevation offsets clamp
    to +/-90.

    Draw order: AOD lobe picks, AOA lobe picks, then the four offset
    vectors (AOD az, AOD el, AOA az, AOA el).
    """
    i_aod = stream.sample(DiscreteUniform(1, len(aod_lobes)), count)
    j_aoa = stream.sample(DiscreteUniform(1, len(aoa_lobes)), count)
    dphi_aod = stream.sample(Normal(0.0, params.sigma_phi_aod), count)
    dtheta_aod = stream.sample(Normal(0.0, params.sigma_theta_aod), count)
    dphi_aoa = stream.sample(Normal(0.0, params.sigma_phi_aoa), count)
    dtheta_aoa = stream.sample(Normal(0.0, params.sigma_theta_aoa), count)

    aod_az_means = np.array([l.mean_az_deg for l in aod_lobes])
    aod_el_means = np.array([l.mean_el_deg for l in aod_lobes])
    aoa_az_means = np.array([l.mean_az_deg for l in aoa_lobes])
    aoa_el_means = np.array([l.mean_el_deg for l in aoa_lobes])

    aod_az = wrap_azimuth_deg(aod_az_means[i_aod - 1] + dphi_aod)
    aod_el = np.clip(aod_el_means[i_aod - 1] + dtheta_aod, -90.0, 90.0)
    aoa_az = wrap_azimuth_deg(aoa_az_means[j_aoa - 1] + dphi_aoa)
    aoa_el = np.clip(aoa_el_means[j_aoa - 1] + dtheta_aoa, -90.0, 90.0)
    return i_aod, j_aoa, aod_az, aod_el, aoa_az, aoa_el


def generate_drop(config: SimConfig, params: ScenarioParams | None = None,
                  drop_index: int = 0) -> ChannelDrop:
    """Run the full generation sequence for one drop."""
    if params is None:
        params = resolved_params(config)
    streams = StreamFamily(config.master_seed, drop_index)

    d_range = config.distance_range()
    if d_range is not None:
        distance_m = float(streams.substream("distance").sample(Uniform(*d_range)))
    else:
        distance_m = float(config.distance_m)

    link = link_budget(config, params, streams.substream("shadow"), distance_m=distance_m)

    n_clusters = draw_num_time_clusters(params, streams.substream("num_clusters"))
    m_per_cluster = draw_num_subpaths(params, streams.substream("num_subpaths"), n_clusters)
    total_subpaths = int(np.sum(m_per_cluster))
    splits = np.cumsum(m_per_cluster)[:-1]

    # batched draws consume the substreams in the same order as
    # cluster-by-cluster calls of the single-cluster operations
    rho_draws = streams.substream("intra_delay").sample(
        Exponential(params.mu_rho), total_subpaths)
    intra = [sort_from_first(part) for part in np.split(rho_draws, splits)]

    tau = compose_cluster_delays(params, streams.substream("cluster_delay"), n_clusters, intra)
    cluster_frac = cluster_power_fractions(params, streams.substream("cluster_power"), tau)

    u_db = streams.substream("subpath_power").sample(Normal(0.0, params.sigma_u), total_subpaths)
    sp_frac_within = []
    for rho, u_part in zip(intra, np.split(u_db, splits)):
        raw = np.exp(-rho / params.gamma_subpath) * 10.0 ** (u_part / 10.0)
        sp_frac_within.append(raw / raw.sum())

    phases = draw_subpath_phases(streams.substream("phase"), total_subpaths)

    l_aod, l_aoa = draw_num_spatial_lobes(params, streams.substream("num_lobes"))
    lobe_stream = streams.substream("lobe_angle")
    aod_lobes = draw_lobe_mean_angles(params, lobe_stream, l_aod, "aod")
    aoa_lobes = draw_lobe_mean_angles(params, lobe_stream, l_aoa, "aoa")

    i_aod, j_aoa, aod_az, aod_el, aoa_az, aoa_el = draw_subpath_angle_offsets(
        params, streams.substream("angle_offset"), total_subpaths, aod_lobes, aoa_lobes)

    rx_mw = link.rx_power_mw
    clusters = []
    offset = 0
    for n in range(n_clusters):
        m = int(m_per_cluster[n])
        sl = slice(offset, offset + m)
        fractions = cluster_frac[n] * sp_frac_within[n]
        clusters.append(TimeCluster(
            index=n + 1,
            excess_delay_ns=float(tau[n]),
            power_mw=float(cluster_frac[n] * rx_mw),
            power_fraction=float(cluster_frac[n]),
            intra_delays_ns=intra[n],
            subpath_power_mw=fractions * rx_mw,
            subpath_power_fraction=fractions,
            phase_rad=phases[sl],
            aod_az_deg=aod_az[sl],
            aod_el_deg=aod_el[sl],
            aoa_az_deg=aoa_az[sl],
            aoa_el_deg=aoa_el[sl],
            aod_lobe_index=i_aod[sl],
            aoa_lobe_index=j_aoa[sl],
        ))
        offset += m

    return ChannelDrop(
        scenario=config.scenario,
        distance_m=distance_m,
        link=link,
        clusters=clusters,
        aod_lobes=aod_lobes,
        aoa_lobes=aoa_lobes,
        master_seed=config.master_seed,
        drop_index=drop_index,
    )


def generate_drops(config: SimConfig, params: ScenarioParams | None = None,
                   start: int = 0, count: int | None = None) -> Iterator[ChannelDrop]:
    """Yield drops for consecutive drop indices."""
    if params is None:
        params = resolved_params(config)
    if count is None:
        count = config.num_drops
    for idx in range(start, start + count):
        yield generate_drop(config, params, idx)
