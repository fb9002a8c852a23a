"""Spatial point processes and nearest-neighbor association.

Base stations follow a Matern type-II hard-core process, each BS carries a
Poisson cluster of reflecting surfaces, and user terminals form an
independent homogeneous Poisson process.  Point collections are float64
arrays of shape (n, 2); the typical user sits at the origin.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Window",
    "TopologyConfig",
    "NetworkTopology",
    "sample_hppp",
    "sample_mhcpp",
    "matern_retained_intensity",
    "matern_parent_intensity",
    "sample_ris_clusters",
    "associate_nearest",
    "associate_serving_ris",
    "build_topology",
    "export_topology_csv",
]


@dataclass(frozen=True)
class Window:
    """Simulation region centered on the origin.

    shape "disk" uses ``radius``; shape "rectangle" uses ``half_extents``
    (half-width, half-height).
    """

    shape: str = "disk"
    radius: float = 1000.0
    half_extents: tuple[float, float] = (1000.0, 1000.0)

    def __post_init__(self):
        if self.shape not in ("disk", "rectangle"):
            raise ValueError(f"unknown window shape {self.shape!r}")
        if self.shape == "disk" and not self.radius > 0:
            raise ValueError("disk radius must be positive")
        if self.shape == "rectangle" and not all(h > 0 for h in self.half_extents):
            raise ValueError("rectangle half extents must be positive")

    def area(self) -> float:
        if self.shape == "disk":
            return math.pi * self.radius**2
        hx, hy = self.half_extents
        return 4.0 * hx * hy

    def dilate(self, margin: float) -> "Window":
        if self.shape == "disk":
            return Window("disk", radius=self.radius + margin)
        hx, hy = self.half_extents
        return Window("rectangle", half_extents=(hx + margin, hy + margin))

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        if self.shape == "disk":
            return np.hypot(pts[:, 0], pts[:, 1]) <= self.radius + 1e-12
        hx, hy = self.half_extents
        return (np.abs(pts[:, 0]) <= hx + 1e-12) & (np.abs(pts[:, 1]) <= hy + 1e-12)

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n == 0:
            return np.empty((0, 2))
        if self.shape == "disk":
            r = self.radius * np.sqrt(rng.random(n))
            theta = rng.uniform(0.0, 2.0 * math.pi, n)
            return np.column_stack((r * np.cos(theta), r * np.sin(theta)))
        hx, hy = self.half_extents
        return np.column_stack(
            (rng.uniform(-hx, hx, n), rng.uniform(-hy, hy, n))
        )


@dataclass(frozen=True)
class TopologyConfig:
    """Densities and radii of the deployed network.

    ``lambda_b`` is the realized hard-core BS density; the parent Poisson
    intensity is inferred from the Matern type-II retention formula so the
    generated field actually carries this density.  ``ris_height_m`` is kept
    for completeness; all link distances are horizontal.
    """

    lambda_b: float = 1e-5
    lambda_r: float = 1e-5
    lambda_u: float = 1e-2
    r_b: float = 50.0
    r_r: float = 10.0
    seed: int = 0
    window: Window = field(default_factory=Window)
    ris_height_m: float = 0.0

    def __post_init__(self):
        for name in ("lambda_b", "lambda_r", "lambda_u"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not self.r_b > 0:
            raise ValueError("r_b must be positive")
        if not self.r_r > 0:
            raise ValueError("r_r must be positive")


@dataclass
class NetworkTopology:
    """One realization of the BS / RIS / UE fields with association maps.

    ``ris_parent[j]`` indexes the BS owning surface j.  ``serving_bs[k]`` is
    the nearest-BS index for UE k.  ``serving_ris[i]`` is the index of BS i's
    closest cluster child, or -1 when the cluster is empty.
    """

    bs: np.ndarray
    ris: np.ndarray
    ris_parent: np.ndarray
    ue: np.ndarray
    serving_bs: np.ndarray
    serving_ris: np.ndarray


def sample_hppp(intensity: float, window: Window, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous Poisson field: Poisson count, uniform locations."""
    if intensity < 0:
        raise ValueError(f"intensity must be nonnegative, got {intensity}")
    n = rng.poisson(intensity * window.area())
    return window.sample_uniform(n, rng)


def matern_retained_intensity(parent_intensity: float, r_b: float) -> float:
    """Density surviving Matern type-II thinning of a Poisson parent field."""
    cell = math.pi * r_b**2
    if parent_intensity == 0.0:
        return 0.0
    return -math.expm1(-parent_intensity * cell) / cell


def matern_parent_intensity(retained_intensity: float, r_b: float) -> float:
    """Parent Poisson intensity whose Matern-II thinning retains the target."""
    cell = math.pi * r_b**2
    if retained_intensity * cell >= 1.0:
        raise ValueError(
            f"retained intensity {retained_intensity} unreachable for r_b={r_b}"
        )
    return -math.log1p(-retained_intensity * cell) / cell


def sample_mhcpp(
    parent_intensity: float, r_b: float, window: Window, rng: np.random.Generator
) -> np.ndarray:
    """Matern type-II hard-core thinning of a Poisson parent process.

    Each parent draws an independent uniform mark; a point survives iff no
    other point within ``r_b`` holds a smaller mark.  Parents are sampled on
    the window dilated by ``r_b`` and clipped back afterwards, so points near
    the boundary see their full competition neighborhood (no edge bias).
    """
    if not r_b > 0:
        raise ValueError("r_b must be positive")
    if parent_intensity < 0:
        raise ValueError("parent intensity must be nonnegative")
    dilated = window.dilate(r_b)
    parents = sample_hppp(parent_intensity, dilated, rng)
    n = parents.shape[0]
    if n == 0:
        return parents
    marks = rng.random(n)
    diff = parents[:, None, :] - parents[None, :, :]
    close = np.einsum("ijk,ijk->ij", diff, diff) <= r_b**2
    np.fill_diagonal(close, False)
    loses = (close & (marks[None, :] < marks[:, None])).any(axis=1)
    kept = parents[~loses]
    return kept[window.contains(kept)]


def sample_ris_clusters(
    bs: np.ndarray,
    lambda_r: float,
    lambda_b: float,
    r_r: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Poisson clusters of surfaces around each BS.

    Per-BS child count is Poisson with mean lambda_r / lambda_b, which makes
    the global surface density match lambda_r.  Children are uniform in the
    disk of radius ``r_r`` around their parent (they may overhang the window
    by at most ``r_r`` when the parent sits on the boundary).

    Returns (positions, parent_indices).
    """
    if not r_r > 0:
        raise ValueError("r_r must be positive")
    if lambda_r < 0:
        raise ValueError("lambda_r must be nonnegative")
    if lambda_r == 0.0:
        return np.empty((0, 2)), np.empty(0, dtype=int)
    if lambda_b <= 0.0:
        raise ValueError("lambda_b must be positive when lambda_r > 0")
    n_bs = bs.shape[0]
    if n_bs == 0:
        raise ValueError("cannot attach surfaces to an empty BS field")
    counts = rng.poisson(lambda_r / lambda_b, size=n_bs)
    total = int(counts.sum())
    parent = np.repeat(np.arange(n_bs), counts)
    r = r_r * np.sqrt(rng.random(total))
    theta = rng.uniform(0.0, 2.0 * math.pi, total)
    offsets = np.column_stack((r * np.cos(theta), r * np.sin(theta)))
    return bs[parent] + offsets, parent


def associate_nearest(ue: np.ndarray, bs: np.ndarray) -> int:
    """Index of the closest BS; ties resolve to the lowest index."""
    if bs.shape[0] == 0:
        raise ValueError("cannot associate against an empty BS field")
    d2 = np.sum((bs - np.asarray(ue, dtype=float)) ** 2, axis=1)
    return int(np.argmin(d2))


def associate_serving_ris(bs_index: int, topology: NetworkTopology) -> int | None:
    """Nearest surface in the BS's own cluster, or None if the cluster is empty."""
    if not 0 <= bs_index < topology.bs.shape[0]:
        raise ValueError(f"bs_index {bs_index} out of range")
    children = np.flatnonzero(topology.ris_parent == bs_index)
    if children.size == 0:
        return None
    d2 = np.sum((topology.ris[children] - topology.bs[bs_index]) ** 2, axis=1)
    return int(children[np.argmin(d2)])


def build_topology(config: TopologyConfig, rng: np.random.Generator) -> NetworkTopology:
    """Sample every field and resolve both association maps."""
    parent_intensity = matern_parent_intensity(config.lambda_b, config.r_b)
    bs = sample_mhcpp(parent_intensity, config.r_b, config.window, rng)
    if bs.shape[0] > 0 and config.lambda_r > 0:
        ris, ris_parent = sample_ris_clusters(
            bs, config.lambda_r, config.lambda_b, config.r_r, rng
        )
    else:
        ris, ris_parent = np.empty((0, 2)), np.empty(0, dtype=int)
    ue = sample_hppp(config.lambda_u, config.window, rng)

    n_ue, n_bs = ue.shape[0], bs.shape[0]
    serving_bs = np.full(n_ue, -1, dtype=int)
    if n_bs > 0 and n_ue > 0:
        d2 = np.sum((ue[:, None, :] - bs[None, :, :]) ** 2, axis=2)
        serving_bs = np.argmin(d2, axis=1)

    serving_ris = np.full(n_bs, -1, dtype=int)
    topo = NetworkTopology(bs, ris, ris_parent, ue, serving_bs, serving_ris)
    for i in range(n_bs):
        j = associate_serving_ris(i, topo)
        serving_ris[i] = -1 if j is None else j
    return topo


def export_topology_csv(topology: NetworkTopology, path: str | Path) -> None:
    """Write (kind, index, x, y, parent_index, serving_index) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "index", "x", "y", "parent_index", "serving_index"])
        for i, (x, y) in enumerate(topology.bs):
            serving = topology.serving_ris[i]
            writer.writerow(["bs", i, repr(x), repr(y), "", "" if serving < 0 else serving])
        for j, (x, y) in enumerate(topology.ris):
            writer.writerow(["ris", j, repr(x), repr(y), topology.ris_parent[j], ""])
        for k, (x, y) in enumerate(topology.ue):
            serving = topology.serving_bs[k]
            writer.writerow(["ue", k, repr(x), repr(y), "", "" if serving < 0 else serving])
