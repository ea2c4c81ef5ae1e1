"""Synthetic symmetric datasets on products of circles.

Four symmetry families are supported:

- "so2": points on a product of D unit circles; planar rotation by a
  common angle acts on circle i with frequency f_i.
- "o2": each circle is doubled into a pair; reflections swap the two
  circles of a pair and negate the angle, so each pair carries a copy
  of the full orthogonal group of the circle.
- "cyclic" / "dihedral": the pair construction restricted to M discrete
  rotations (and reflections); D = floor(M/2) pairs with frequencies
  1..D.  Class 1 is generated from class 0 by a half-step rotation
  (and, for dihedral data, a mirror offset by the half step), so the
  classes are exact unions of group orbits.

Representatives fix one point on the first circle (or pair) and two
random points on every other, giving 2^(D-1) base points with random
binary labels for the continuous families.  Samples draw a uniform
representative, optionally act with a uniform group element, add
tangent noise with re-projection to the unit circle, then ambient
noise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .groups import FiniteGroup
from .irreps import RepSpec, direct_sum, restricted_frequency_rep

__all__ = [
    "DatasetSpec",
    "Sample",
    "SampleSet",
    "generate_synthetic",
    "input_rep_for",
    "load_dataset",
    "randomize_labels",
    "sample",
    "save_dataset",
]

SYMMETRIES = ("so2", "o2", "cyclic", "dihedral")


@dataclass(frozen=True)
class DatasetSpec:
    """Geometry and labeling of one synthetic task.

    D counts circles for "so2" and circle pairs otherwise; frequencies
    has one entry per circle/pair.  M is the discrete rotation order
    (None for continuous symmetries).  Representatives are rows in the
    ambient space with binary labels.
    """

    symmetry: str
    D: int
    M: int | None
    frequencies: tuple[int, ...]
    representatives: np.ndarray
    labels: np.ndarray
    noise_sigma_tangent: float
    noise_sigma_ambient: float
    seed: int

    @property
    def paired(self) -> bool:
        return self.symmetry != "so2"

    @property
    def unit_width(self) -> int:
        return 4 if self.paired else 2

    @property
    def ambient_dim(self) -> int:
        return self.D * self.unit_width

    @property
    def n_representatives(self) -> int:
        return self.representatives.shape[0]


@dataclass(frozen=True)
class Sample:
    """One labeled point with its generation provenance."""

    x: np.ndarray
    y: int
    provenance: tuple


@dataclass(frozen=True)
class SampleSet:
    """A fixed sampled dataset with per-sample provenance arrays.

    provenance of sample i is (rep_index[i], angle[i], reflect[i]);
    original_y keeps the pre-randomization labels once labels have been
    randomized, else it is None.
    """

    X: np.ndarray
    y: np.ndarray
    B: float
    rep_index: np.ndarray
    angle: np.ndarray
    reflect: np.ndarray
    seed: int
    augment: str
    original_y: np.ndarray | None = None

    def __len__(self) -> int:
        return self.X.shape[0]

    def __getitem__(self, i: int) -> Sample:
        return Sample(
            x=self.X[i],
            y=int(self.y[i]),
            provenance=(int(self.rep_index[i]), float(self.angle[i]), int(self.reflect[i])),
        )


def _act(
    points: np.ndarray,
    frequencies: tuple[int, ...],
    paired: bool,
    theta: np.ndarray,
    reflect: np.ndarray | None,
) -> np.ndarray:
    """Apply per-sample group elements: rotate by theta, then mirror.

    The mirror swaps the two circles of each pair and negates their
    angles; it is only defined for paired geometries.
    """
    out = np.array(points, dtype=np.float64)
    width = 4 if paired else 2
    for u, f in enumerate(frequencies):
        ang = f * theta
        c, s = np.cos(ang), np.sin(ang)
        base = u * width
        for sub in range(width // 2):
            xcol = out[:, base + 2 * sub].copy()
            ycol = out[:, base + 2 * sub + 1].copy()
            out[:, base + 2 * sub] = c * xcol - s * ycol
            out[:, base + 2 * sub + 1] = s * xcol + c * ycol
        if reflect is not None and paired:
            mask = reflect.astype(bool)
            block = out[mask][:, base : base + 4]
            out[np.ix_(mask, range(base, base + 4))] = np.column_stack(
                [block[:, 2], -block[:, 3], block[:, 0], -block[:, 1]]
            )
    return out


def _base_representatives(
    n_units: int, paired: bool, rng: np.random.Generator
) -> np.ndarray:
    """All combinations of the fixed per-unit points: 2^(n_units-1) rows.

    Unit 0 contributes a single point (angle 0, first circle of the
    pair); every other unit contributes two points at a random angle
    and its antipode, keeping the alternatives well separated so that
    noisy samples from different representatives stay distinguishable.
    """
    width = 4 if paired else 2
    angles = np.empty((n_units, 2))
    angles[:, 0] = rng.uniform(0.0, 2 * np.pi, size=n_units)
    angles[:, 1] = angles[:, 0] + np.pi
    angles[0] = 0.0
    if paired:
        sides = rng.integers(0, 2, size=(n_units, 2))
        sides[0] = 0
    n_reps = 2 ** (n_units - 1)
    reps = np.zeros((n_reps, n_units * width))
    for r in range(n_reps):
        bits = [0] + [(r >> (u - 1)) & 1 for u in range(1, n_units)]
        for u in range(n_units):
            a = angles[u, bits[u]]
            point = np.array([np.cos(a), np.sin(a)])
            base = u * width
            if paired:
                base += 2 * int(sides[u, bits[u]])
            reps[r, base : base + 2] = point
    return reps


def generate_synthetic(
    symmetry: str,
    size: int,
    max_frequency: int | None = None,
    seed: int = 0,
    noise_sigma_tangent: float = 0.1,
    noise_sigma_ambient: float = 0.01,
) -> DatasetSpec:
    """Build a DatasetSpec.

    For "so2"/"o2", size is the number of circles/pairs D and
    max_frequency F assigns circle i the frequency ((i-1) mod F)+1
    (1-based).  For "cyclic"/"dihedral", size is the rotation order M;
    the construction uses D = floor(M/2) pairs with frequencies 1..D
    and the class-1 representatives are derived, not random.
    """
    if symmetry not in SYMMETRIES:
        raise ValueError(f"unknown symmetry {symmetry!r}")
    if noise_sigma_tangent < 0 or noise_sigma_ambient < 0:
        raise ValueError("noise magnitudes must be nonnegative")
    rng = np.random.default_rng(seed)
    continuous = symmetry in ("so2", "o2")
    if continuous:
        if size < 1:
            raise ValueError("need at least one circle")
        if max_frequency is None or max_frequency < 1:
            raise ValueError("continuous symmetries need max_frequency >= 1")
        D = size
        M = None
        frequencies = tuple((i % max_frequency) + 1 for i in range(D))
        reps = _base_representatives(D, symmetry == "o2", rng)
        labels = rng.integers(0, 2, size=reps.shape[0])
    else:
        if size < 2:
            raise ValueError("discrete symmetries need rotation order M >= 2")
        if max_frequency is not None:
            raise ValueError(
                "discrete symmetries fix the frequency range at floor(M/2)"
            )
        M = size
        D = M // 2
        frequencies = tuple(range(1, D + 1))
        base = _base_representatives(D, True, rng)
        zeros = np.zeros(base.shape[0], dtype=np.int64)
        ones = np.ones(base.shape[0], dtype=np.int64)
        half = np.full(base.shape[0], np.pi / M)
        rotated = _act(base, frequencies, True, half, None)
        if symmetry == "cyclic":
            reps = np.concatenate([base, rotated])
            labels = np.concatenate([zeros, ones])
        else:
            mirrored = _act(base, frequencies, True, half, ones)
            both = _act(base, frequencies, True, 2 * half, ones)
            reps = np.concatenate([base, rotated, mirrored, both])
            labels = np.concatenate([zeros, ones, ones, zeros])
    reps.setflags(write=False)
    labels.setflags(write=False)
    return DatasetSpec(
        symmetry=symmetry,
        D=D,
        M=M,
        frequencies=frequencies,
        representatives=reps,
        labels=labels,
        noise_sigma_tangent=float(noise_sigma_tangent),
        noise_sigma_ambient=float(noise_sigma_ambient),
        seed=seed,
    )


def sample(spec: DatasetSpec, m: int, augment: str, seed: int) -> SampleSet:
    """Draw a fixed set of m samples.

    augment="group" acts with a uniform symmetry-group element (uniform
    angle for continuous families, uniform discrete element otherwise);
    augment="none" keeps representatives in place.  Tangent noise
    perturbs each occupied circle and re-projects it to unit norm;
    ambient noise is added to every coordinate.  B records the largest
    sample norm.
    """
    if m < 1:
        raise ValueError("need at least one sample")
    if augment not in ("none", "group"):
        raise ValueError(f"unknown augment mode {augment!r}")
    rng = np.random.default_rng(seed)
    rep_index = rng.integers(0, spec.n_representatives, size=m)
    angle = np.zeros(m)
    reflect = np.zeros(m, dtype=np.int64)
    if augment == "group":
        if spec.symmetry == "so2":
            angle = rng.uniform(0.0, 2 * np.pi, size=m)
        elif spec.symmetry == "o2":
            angle = rng.uniform(0.0, 2 * np.pi, size=m)
            reflect = rng.integers(0, 2, size=m)
        elif spec.symmetry == "cyclic":
            angle = 2 * np.pi * rng.integers(0, spec.M, size=m) / spec.M
        else:
            angle = 2 * np.pi * rng.integers(0, spec.M, size=m) / spec.M
            reflect = rng.integers(0, 2, size=m)
        X = _act(
            spec.representatives[rep_index],
            spec.frequencies,
            spec.paired,
            angle,
            reflect if spec.paired else None,
        )
    else:
        X = np.array(spec.representatives[rep_index], dtype=np.float64)
    if spec.noise_sigma_tangent > 0:
        noise = spec.noise_sigma_tangent * rng.standard_normal((m, spec.D, 2))
        for u in range(spec.D):
            base = u * spec.unit_width
            if spec.paired:
                first = X[:, base : base + 2]
                second = X[:, base + 2 : base + 4]
                occupied_second = np.linalg.norm(second, axis=1) > 0.5
                offset = base + 2 * occupied_second.astype(np.intp)
            else:
                offset = np.full(m, base, dtype=np.intp)
            cols = np.stack([offset, offset + 1], axis=1)
            block = np.take_along_axis(X, cols, axis=1) + noise[:, u]
            norms = np.maximum(np.linalg.norm(block, axis=1, keepdims=True), 1e-300)
            np.put_along_axis(X, cols, block / norms, axis=1)
    if spec.noise_sigma_ambient > 0:
        X += spec.noise_sigma_ambient * rng.standard_normal(X.shape)
    y = np.array(spec.labels[rep_index], dtype=np.int64)
    B = float(np.max(np.linalg.norm(X, axis=1)))
    for arr in (X, y, rep_index, angle, reflect):
        arr.setflags(write=False)
    return SampleSet(
        X=X,
        y=y,
        B=B,
        rep_index=rep_index,
        angle=angle,
        reflect=reflect,
        seed=seed,
        augment=augment,
    )


def randomize_labels(samples: SampleSet, seed: int) -> SampleSet:
    """Resample labels i.i.d. uniform; features and provenance untouched.

    The first pre-randomization labels are retained in original_y, so
    applying this twice with the same seed is idempotent.
    """
    rng = np.random.default_rng(seed)
    new_y = rng.integers(0, 2, size=len(samples))
    new_y.setflags(write=False)
    original = samples.original_y if samples.original_y is not None else samples.y
    return replace(samples, y=new_y, original_y=original)


def input_rep_for(spec: DatasetSpec, G: FiniteGroup) -> RepSpec:
    """The representation of G on the dataset's ambient space.

    Each circle (or pair) contributes the restriction of the frequency-f
    circle action to G; the pieces are direct-summed in unit order.
    """
    parts = [
        restricted_frequency_rep(G, f, reflected=spec.paired)
        for f in spec.frequencies
    ]
    return direct_sum(parts)


def save_dataset(path: str, spec: DatasetSpec, samples: SampleSet) -> None:
    """Write spec and samples as one JSON file (floats round-trip exactly)."""
    data = {
        "spec": {
            "symmetry": spec.symmetry,
            "D": spec.D,
            "M": spec.M,
            "frequencies": list(spec.frequencies),
            "representatives": spec.representatives.reshape(-1).tolist(),
            "labels": spec.labels.tolist(),
            "noise_sigma_tangent": spec.noise_sigma_tangent,
            "noise_sigma_ambient": spec.noise_sigma_ambient,
            "seed": spec.seed,
        },
        "samples": {
            "X": samples.X.reshape(-1).tolist(),
            "y": samples.y.tolist(),
            "B": samples.B,
            "rep_index": samples.rep_index.tolist(),
            "angle": samples.angle.tolist(),
            "reflect": samples.reflect.tolist(),
            "seed": samples.seed,
            "augment": samples.augment,
            "original_y": None
            if samples.original_y is None
            else samples.original_y.tolist(),
        },
    }
    with open(path, "w") as f:
        json.dump(data, f)


def load_dataset(path: str) -> tuple[DatasetSpec, SampleSet]:
    """Inverse of save_dataset."""
    with open(path) as f:
        data = json.load(f)
    s = data["spec"]
    n_units = int(s["D"])
    width = 2 if s["symmetry"] == "so2" else 4
    reps = np.asarray(s["representatives"], dtype=np.float64).reshape(-1, n_units * width)
    spec = DatasetSpec(
        symmetry=s["symmetry"],
        D=n_units,
        M=None if s["M"] is None else int(s["M"]),
        frequencies=tuple(int(f) for f in s["frequencies"]),
        representatives=reps,
        labels=np.asarray(s["labels"], dtype=np.int64),
        noise_sigma_tangent=float(s["noise_sigma_tangent"]),
        noise_sigma_ambient=float(s["noise_sigma_ambient"]),
        seed=int(s["seed"]),
    )
    d = data["samples"]
    X = np.asarray(d["X"], dtype=np.float64).reshape(-1, spec.ambient_dim)
    samples = SampleSet(
        X=X,
        y=np.asarray(d["y"], dtype=np.int64),
        B=float(d["B"]),
        rep_index=np.asarray(d["rep_index"], dtype=np.int64),
        angle=np.asarray(d["angle"], dtype=np.float64),
        reflect=np.asarray(d["reflect"], dtype=np.int64),
        seed=int(d["seed"]),
        augment=d["augment"],
        original_y=None
        if d["original_y"] is None
        else np.asarray(d["original_y"], dtype=np.int64),
    )
    return spec, samples
