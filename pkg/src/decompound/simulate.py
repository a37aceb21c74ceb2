"""Observation generator for compound random walks at a fixed horizon.

An observation is the position, at time t, of a walk that starts at the
origin and makes N ~ Poisson(intensity * t) zonal steps: each step moves a
law-sampled distance along a uniformly random tangent direction at the
current point.  Two modes:

* iid - independent walks, one per observation;
* trajectory - a single walk observed at times t, 2t, ..., mt, with each
  window's increment carried back to the origin (increments are i.i.d. and
  distributed like a time-t observation, which is what the estimators
  consume).

Optionally each observation is blurred by an independent heat-kernel
displacement whose spectral signature is exactly exp(-tau^2 * kappa / 2).

Reproducibility: a counter-based (Philox) generator keyed by
(seed, block index), one stream per block of 4096 observations, so iid
generation is parallelizable across blocks while output depends only on
(config, m).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .spaces import Space, SpaceKind, parse_space
from .steplaws import HeatZonal, StepLaw, WrappedNormal, parse_law, uniform_tangents

__all__ = [
    "Mode",
    "ProcessConfig",
    "ObservationSet",
    "sample_compound",
    "poisson_draw",
    "observations_text",
    "write_observations",
    "read_observations",
]

BLOCK = 4096
_TRAJECTORY_BLOCK = 1 << 62  # reserved stream index, out of reach of iid blocks
_KNUTH_LIMIT = 30.0


class Mode(Enum):
    IID = "iid"
    TRAJECTORY = "trajectory"


@dataclass(frozen=True)
class ProcessConfig:
    """Everything needed to generate observations: law, clock, mode, noise, seed."""

    law: StepLaw
    intensity: float = 1.0
    time: float = 1.0
    mode: Mode = Mode.IID
    noise_tau: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.intensity <= 0 or self.time <= 0:
            raise ValueError("intensity and time must be positive")
        if self.noise_tau < 0:
            raise ValueError("noise_tau must be >= 0")
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def space(self) -> Space:
        return self.law.space

    @property
    def mean_steps(self) -> float:
        return self.intensity * self.time

    def to_mapping(self) -> dict:
        return {
            "space": self.space.spec_string(),
            "law": self.law.spec_string(),
            "intensity": self.intensity,
            "time": self.time,
            "mode": self.mode.value,
            "noise_tau": self.noise_tau,
            "seed": self.seed,
        }

    @classmethod
    def from_mapping(cls, data: dict) -> "ProcessConfig":
        space = parse_space(data["space"])
        law = parse_law(data["law"], space)
        return cls(
            law=law,
            intensity=float(data["intensity"]),
            time=float(data["time"]),
            mode=Mode(data["mode"]),
            noise_tau=float(data["noise_tau"]),
            seed=int(data["seed"]),
        )


@dataclass(frozen=True)
class ObservationSet:
    """Immutable batch of observation points plus the config that produced it."""

    points: np.ndarray
    config: ProcessConfig

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)  # defensive copy
        if pts.ndim != 2 or pts.shape[1] != self.config.space.ambient_dim:
            raise ValueError("points must have shape (m, ambient_dim)")
        if pts.shape[0] == 0:
            raise ValueError("empty observation set")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite observation coordinates")
        space = self.config.space
        if space.kind is SpaceKind.SPHERE:
            norms = np.linalg.norm(pts, axis=1)
            if np.max(np.abs(norms - 1.0)) > 1e-6:
                raise ValueError("sphere observations must lie on the unit sphere")
        else:
            if pts.min() < -1e-9 or pts.max() >= 2.0 * math.pi + 1e-9:
                raise ValueError("flat observations must be angles in [0, 2*pi)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return self.points.shape[0]


# ---------------------------------------------------------------------------
# RNG and Poisson


def _block_rng(seed: int, block: int) -> np.random.Generator:
    key = np.array([seed % (1 << 64), block % (1 << 64)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _poisson_many(rate: float, n: int, rng) -> np.ndarray:
    """n Poisson(rate) variates: Knuth multiplication for small rates,
    transformed rejection (PTRS) above."""
    if rate <= _KNUTH_LIMIT:
        limit = math.exp(-rate)
        k = np.zeros(n, dtype=np.int64)
        p = rng.random(n)
        active = p > limit
        while active.any():
            k[active] += 1
            p[active] *= rng.random(int(active.sum()))
            active &= p > limit
        return k

    b = 0.931 + 2.53 * math.sqrt(rate)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    log_rate = math.log(rate)
    out = np.empty(n, dtype=np.int64)
    todo = np.arange(n)
    while todo.size:
        u = rng.random(todo.size) - 0.5
        v = rng.random(todo.size)
        us = 0.5 - np.abs(u)
        k = np.floor((2.0 * a / us + b) * u + rate + 0.43).astype(np.int64)
        accept = (us >= 0.07) & (v <= v_r)
        screen = ~accept & (k >= 0) & ~((us < 0.013) & (v > us))
        if screen.any():
            kk = k[screen].astype(float)
            lhs = np.log(v[screen] * inv_alpha / (a / us[screen] ** 2 + b))
            rhs = -rate + kk * log_rate - gammaln(kk + 1.0)
            accept[screen] = lhs <= rhs
        accept &= k >= 0
        out[todo[accept]] = k[accept]
        todo = todo[~accept]
    return out


def poisson_draw(rate: float, rng) -> int:
    """One Poisson(rate) variate."""
    if rate <= 0:
        raise ValueError("rate must be > 0")
    return int(_poisson_many(rate, 1, rng)[0])


# ---------------------------------------------------------------------------
# walk kernels


def _flat_segment_sums(disp: np.ndarray, counts: np.ndarray, dim: int) -> np.ndarray:
    """Sum consecutive displacement runs of the given lengths (zeros allowed)."""
    cs = np.vstack([np.zeros((1, dim)), np.cumsum(disp, axis=0)])
    ends = np.cumsum(counts)
    starts = ends - counts
    return cs[ends] - cs[starts]


def _sphere_walk(law: StepLaw, counts: np.ndarray, rng) -> np.ndarray:
    """Vectorized masked stepping: one round per remaining step count."""
    space = law.space
    n = counts.shape[0]
    pts = np.broadcast_to(space.origin(), (n, space.ambient_dim)).copy()
    remaining = counts.copy()
    while True:
        active = remaining > 0
        na = int(active.sum())
        if na == 0:
            return pts
        dist = law.sample_distances(na, rng)
        dirs = uniform_tangents(pts[active], rng)
        moved = np.cos(dist)[:, None] * pts[active] + np.sin(dist)[:, None] * dirs
        pts[active] = moved / np.linalg.norm(moved, axis=1, keepdims=True)
        remaining[active] -= 1


def _apply_noise(config: ProcessConfig, pts: np.ndarray, rng) -> np.ndarray:
    """Blur each point by an independent heat displacement at time tau^2/2.

    On the circle/torus the heat kernel at time tau^2/2 is the wrapped
    normal with scale tau (coefficients exp(-tau^2 |n|^2 / 2)), so that
    exact sampler is used there.
    """
    if config.noise_tau == 0.0:
        return pts
    space = config.space
    if space.kind is SpaceKind.SPHERE:
        blur = HeatZonal(space, tau0=config.noise_tau**2 / 2.0)
        dist = blur.sample_distances(pts.shape[0], rng)
        dirs = uniform_tangents(pts, rng)
        moved = np.cos(dist)[:, None] * pts + np.sin(dist)[:, None] * dirs
        return moved / np.linalg.norm(moved, axis=1, keepdims=True)
    wn = WrappedNormal(space, sigma=config.noise_tau, mean=(0.0,))
    return np.mod(pts + wn.sample_displacements(pts.shape[0], rng), 2.0 * math.pi)


def _iid_block(config: ProcessConfig, nb: int, rng) -> np.ndarray:
    law = config.law
    space = config.space
    counts = _poisson_many(config.mean_steps, nb, rng)
    if space.is_flat:
        total = int(counts.sum())
        disp = (law.sample_displacements(total, rng) if total
                else np.zeros((0, space.dim)))
        pos = _flat_segment_sums(disp, counts, space.dim)
        pos = _apply_noise(config, pos, rng)
        return np.mod(pos, 2.0 * math.pi)
    pts = _sphere_walk(law, counts, rng)
    return _apply_noise(config, pts, rng)


def _rebase_to_origin(base: np.ndarray, target: np.ndarray, origin: np.ndarray) -> np.ndarray:
    """Rotate each target point by the geodesic rotation taking base -> origin.

    The rotation acts in span(base, origin) and fixes its orthogonal
    complement; zonal step laws make the rebased increments distributed
    exactly like a walk started at the origin.
    """
    c = base @ origin
    raw = origin[None, :] - c[:, None] * base
    s = np.linalg.norm(raw, axis=1)
    out = target.copy()
    ok = s > 1e-12
    if ok.any():
        e1 = base[ok]
        e2 = raw[ok] / s[ok, None]
        y = target[ok]
        y1 = np.einsum("ij,ij->i", y, e1)
        y2 = np.einsum("ij,ij->i", y, e2)
        cc, ss = c[ok], s[ok]
        out[ok] = (y
                   + ((cc - 1.0) * y1 - ss * y2)[:, None] * e1
                   + (ss * y1 + (cc - 1.0) * y2)[:, None] * e2)
    anti = ~ok & (c < 0.0)
    if anti.any():
        # base antipodal to the origin: rotate by pi in the (origin, e_1) plane
        e1 = np.zeros_like(origin)
        e1[0] = 1.0
        y = target[anti]
        out[anti] = y - 2.0 * ((y @ origin)[:, None] * origin + (y @ e1)[:, None] * e1)
    return out


def _trajectory_points(config: ProcessConfig, m: int, rng) -> np.ndarray:
    law = config.law
    space = config.space
    counts = _poisson_many(config.mean_steps, m, rng)
    total = int(counts.sum())
    if space.is_flat:
        disp = (law.sample_displacements(total, rng) if total
                else np.zeros((0, space.dim)))
        inc = _flat_segment_sums(disp, counts, space.dim)
        inc = _apply_noise(config, inc, rng)
        return np.mod(inc, 2.0 * math.pi)

    dim = space.ambient_dim
    dists = law.sample_distances(total, rng) if total else np.zeros(0)
    gauss = rng.standard_normal((total, dim)) if total else np.zeros((0, dim))
    snaps = np.empty((m + 1, dim))
    x = space.origin().copy()
    snaps[0] = x
    i = 0
    for k in range(m):
        for _ in range(int(counts[k])):
            g = gauss[i]
            v = g - (g @ x) * x
            nv = math.sqrt(float(v @ v))
            if nv < 1e-12:
                v = np.zeros(dim)
                v[0] = 1.0
                v = v - (v @ x) * x
                nv = math.sqrt(float(v @ v))
            v /= nv
            d = dists[i]
            x = math.cos(d) * x + math.sin(d) * v
            x /= math.sqrt(float(x @ x))
            i += 1
        snaps[k + 1] = x
    inc = _rebase_to_origin(snaps[:-1], snaps[1:], space.origin())
    inc /= np.linalg.norm(inc, axis=1, keepdims=True)
    return _apply_noise(config, inc, rng)


def sample_compound(config: ProcessConfig, m: int) -> ObservationSet:
    """m observations of the compound process under the given config."""
    if m < 1:
        raise ValueError("m must be >= 1")
    space = config.space
    if config.mode is Mode.TRAJECTORY:
        rng = _block_rng(config.seed, _TRAJECTORY_BLOCK)
        pts = _trajectory_points(config, m, rng)
    else:
        pts = np.empty((m, space.ambient_dim))
        for lo in range(0, m, BLOCK):
            hi = min(lo + BLOCK, m)
            rng = _block_rng(config.seed, lo // BLOCK)
            pts[lo:hi] = _iid_block(config, hi - lo, rng)
    return ObservationSet(points=pts, config=config)


# ---------------------------------------------------------------------------
# CSV round trip


def _column_names(space: Space) -> list[str]:
    if space.kind is SpaceKind.SPHERE:
        return [f"x{j + 1}" for j in range(space.ambient_dim)]
    return [f"theta{j + 1}" for j in range(space.dim)]


def observations_text(obs: ObservationSet) -> str:
    """CSV text with a header comment carrying the full config; 17
    significant digits per coordinate (lossless for doubles)."""
    meta = json.dumps(obs.config.to_mapping(), sort_keys=True)
    lines = [f"# ProcessConfig {meta}", ",".join(_column_names(obs.config.space))]
    for row in obs.points:
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def write_observations(obs: ObservationSet, path) -> None:
    with open(path, "w") as fh:
        fh.write(observations_text(obs))


def read_observations(path) -> ObservationSet:
    with open(path) as fh:
        first = fh.readline().strip()
        if not first.startswith("# ProcessConfig "):
            raise ValueError("missing ProcessConfig header comment")
        config = ProcessConfig.from_mapping(json.loads(first[len("# ProcessConfig "):]))
        fh.readline()  # column names
        rows = [[float(v) for v in line.strip().split(",")]
                for line in fh if line.strip()]
    return ObservationSet(points=np.array(rows, dtype=float), config=config)
