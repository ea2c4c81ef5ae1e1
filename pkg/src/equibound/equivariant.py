"""Equivariant linear layers, network assembly, and margin training.

A layer maps between two RepSpecs and is parametrized purely in the
Fourier domain: for every irrep shared by the input and output reps,
each (output copy, input copy) pair carries one coefficient vector of
length c_psi whose expansion in the intertwiner basis forms the block
of the layer matrix in block coordinates.  The dense matrix
W = Q_out (block matrix) Q_in^T is cached and rebuilt lazily when
coefficients change; by construction it commutes with the group action.

Networks alternate these layers with pointwise ReLU applied in the
represented coordinates (the group domain for regular-representation
features), carry no biases, and end in a trivial-irrep-only layer so
logits are invariant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .groups import FiniteGroup, group_from_json, group_to_json
from .irreps import (
    RepSpec,
    intertwiner_basis,
    regular_representation,
    rep_from_json,
    rep_to_json,
    stack_rep,
    trivial_stack,
)
from .kernels import expand_coefficients, project_coefficients

__all__ = [
    "EquivariantLayer",
    "EquivariantNetwork",
    "MarginNotReached",
    "TrainConfig",
    "TrainResult",
    "build_network",
    "channels_for_width",
    "empirical_margin_loss",
    "load_checkpoint",
    "margins",
    "materialize",
    "save_checkpoint",
    "train",
]


@dataclass(frozen=True, eq=False)
class _SharedBlock:
    """One irrep common to a layer's input and output reps."""

    irrep_id: str
    dim: int
    basis: np.ndarray
    m_in: int
    m_out: int
    in_offset: int
    out_offset: int


class EquivariantLayer:
    """A linear map constrained to commute with the group action.

    Parameters live in `coefficients`, a dict keyed by irrep id holding
    arrays of shape (m_out, m_in, c_psi).  The dense matrix is cached;
    call `mark_dirty` after mutating coefficient arrays in place.
    """

    def __init__(self, in_rep: RepSpec, out_rep: RepSpec):
        if in_rep.group is not out_rep.group:
            raise ValueError("layer reps must share the same group")
        self.in_rep = in_rep
        self.out_rep = out_rep
        G = in_rep.group
        shared = []
        for psi, out_off, m_out in out_rep.layout:
            m_in = in_rep.multiplicity(psi.id)
            if m_in == 0:
                continue
            in_off = next(off for p, off, _ in in_rep.layout if p.id == psi.id)
            shared.append(
                _SharedBlock(
                    irrep_id=psi.id,
                    dim=psi.dim,
                    basis=intertwiner_basis(G, psi),
                    m_in=m_in,
                    m_out=m_out,
                    in_offset=in_off,
                    out_offset=out_off,
                )
            )
        self.shared = tuple(shared)
        self.coefficients = {
            b.irrep_id: np.zeros((b.m_out, b.m_in, b.basis.shape[0]))
            for b in self.shared
        }
        self._matrix: np.ndarray | None = None
        self._dirty = True

    @property
    def group(self) -> FiniteGroup:
        return self.in_rep.group

    @property
    def param_count(self) -> int:
        return sum(a.size for a in self.coefficients.values())

    def mark_dirty(self) -> None:
        self._dirty = True

    def set_coefficients(self, values: dict[str, np.ndarray]) -> None:
        """Replace coefficient arrays (copied; shapes validated)."""
        for pid, arr in values.items():
            if pid not in self.coefficients:
                raise KeyError(f"irrep {pid!r} is not shared by this layer")
            arr = np.asarray(arr, dtype=np.float64)
            if arr.shape != self.coefficients[pid].shape:
                raise ValueError(
                    f"coefficients for {pid!r} must have shape "
                    f"{self.coefficients[pid].shape}, got {arr.shape}"
                )
            self.coefficients[pid] = arr.copy()
        self._dirty = True

    def block_matrix(self) -> np.ndarray:
        """The layer matrix in block coordinates (zero across irreps)."""
        S = np.zeros((self.out_rep.dim, self.in_rep.dim))
        for b in self.shared:
            block = expand_coefficients(
                np.ascontiguousarray(self.coefficients[b.irrep_id]), b.basis
            )
            S[
                b.out_offset : b.out_offset + b.m_out * b.dim,
                b.in_offset : b.in_offset + b.m_in * b.dim,
            ] = block
        return S

    def superblocks(self) -> dict[str, np.ndarray]:
        """Per-irrep dense blocks (m_out*d, m_in*d) in block coordinates."""
        return {
            b.irrep_id: expand_coefficients(
                np.ascontiguousarray(self.coefficients[b.irrep_id]), b.basis
            )
            for b in self.shared
        }

    @property
    def matrix(self) -> np.ndarray:
        """Dense W = Q_out (block matrix) Q_in^T, cached until dirty."""
        if self._dirty or self._matrix is None:
            S = self.block_matrix()
            T = self.in_rep.from_block(S)
            self._matrix = self.out_rep.from_block(T.T).T
            self._dirty = False
        return self._matrix

    def coefficient_sq_sum(self) -> float:
        """Sum of squared Fourier coefficients over all blocks."""
        return float(sum(np.sum(a * a) for a in self.coefficients.values()))

    def __repr__(self) -> str:
        return (
            f"EquivariantLayer({self.in_rep.dim}->{self.out_rep.dim}, "
            f"params={self.param_count})"
        )


def materialize(layer: EquivariantLayer) -> np.ndarray:
    """Return the dense layer matrix, rebuilding the cache if needed."""
    return layer.matrix


class EquivariantNetwork:
    """An invariant classifier: equivariant layers with ReLU in between."""

    def __init__(
        self,
        group: FiniteGroup,
        layers: list[EquivariantLayer],
        hidden_channels: tuple[int, ...],
        n_classes: int,
    ):
        if not layers:
            raise ValueError("network needs at least one layer")
        self.group = group
        self.layers = layers
        self.hidden_channels = tuple(hidden_channels)
        self.n_classes = n_classes

    @property
    def input_rep(self) -> RepSpec:
        return self.layers[0].in_rep

    @property
    def reps(self) -> list[RepSpec]:
        return [self.layers[0].in_rep] + [layer.out_rep for layer in self.layers]

    @property
    def depth(self) -> int:
        return len(self.layers)

    def forward(self, X: np.ndarray) -> np.ndarray:
        """Logits for a batch (rows) or a single vector."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            return self.forward(X[None, :])[0]
        if X.shape[1] != self.input_rep.dim:
            raise ValueError(
                f"input dimension {X.shape[1]} does not match rep "
                f"dimension {self.input_rep.dim}"
            )
        A = X
        last = len(self.layers) - 1
        for l, layer in enumerate(self.layers):
            Z = A @ layer.matrix.T
            A = Z if l == last else np.maximum(Z, 0.0)
        return A

    def loss_and_grads(
        self, X: np.ndarray, y: np.ndarray
    ) -> tuple[float, list[dict[str, np.ndarray]]]:
        """Mean cross-entropy and its gradient per coefficient array.

        Gradients are projected onto the intertwiner basis through the
        fixed orthogonal changes of basis, so they live in the same
        (m_out, m_in, c) layout as the coefficients.
        """
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("need a nonempty 2D batch")
        last = len(self.layers) - 1
        acts: list[np.ndarray] = []
        masks: list[np.ndarray] = []
        A = X
        for l, layer in enumerate(self.layers):
            acts.append(A)
            Z = A @ layer.matrix.T
            if l < last:
                masks.append(Z > 0.0)
                A = np.maximum(Z, 0.0)
            else:
                A = Z
        loss, dZ = _cross_entropy(A, y)
        grads: list[dict[str, np.ndarray]] = []
        for l in range(last, -1, -1):
            layer = self.layers[l]
            gout = layer.out_rep.to_block(dZ)
            gin = layer.in_rep.to_block(acts[l])
            gdict = {}
            for b in layer.shared:
                go = gout[:, b.out_offset : b.out_offset + b.m_out * b.dim]
                gi = gin[:, b.in_offset : b.in_offset + b.m_in * b.dim]
                gdict[b.irrep_id] = project_coefficients(
                    np.ascontiguousarray(go.T @ gi), b.basis
                )
            grads.append(gdict)
            if l > 0:
                dZ = (dZ @ layer.matrix) * masks[l - 1]
        grads.reverse()
        return loss, grads

    def __repr__(self) -> str:
        dims = " -> ".join(str(r.dim) for r in self.reps)
        return f"EquivariantNetwork({self.group!r}, {dims})"


def _cross_entropy(logits: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy loss and gradient with respect to the logits."""
    n = logits.shape[0]
    zmax = logits.max(axis=1, keepdims=True)
    ez = np.exp(logits - zmax)
    total = ez.sum(axis=1, keepdims=True)
    logp = (logits - zmax) - np.log(total)
    rows = np.arange(n)
    loss = float(-logp[rows, y].mean())
    dZ = ez / total
    dZ[rows, y] -= 1.0
    dZ /= n
    return loss, dZ


def channels_for_width(G: FiniteGroup, width: int) -> int:
    """Regular channels whose effective width c*|H| is closest to `width`."""
    if width < 1:
        raise ValueError("width must be positive")
    return max(1, round(width / G.order))


def build_network(
    G: FiniteGroup,
    input_rep: RepSpec,
    hidden_channels: list[int] | tuple[int, ...],
    n_classes: int,
    seed: int = 0,
) -> EquivariantNetwork:
    """Assemble a network with regular hidden features and invariant logits.

    Hidden layer l carries hidden_channels[l] copies of the regular
    representation; the final layer targets n_classes trivial copies.
    Coefficients are initialized i.i.d. Gaussian with variance equal to
    1 over the layer input dimension.
    """
    if len(hidden_channels) == 0:
        raise ValueError("need at least one hidden layer")
    if any(c < 1 for c in hidden_channels):
        raise ValueError("channel counts must be >= 1")
    if n_classes < 2:
        raise ValueError("need at least two classes")
    if input_rep.group is not G:
        raise ValueError("input rep belongs to a different group")
    reg = regular_representation(G)
    reps = [input_rep]
    reps += [stack_rep(reg, int(c)) for c in hidden_channels]
    reps.append(trivial_stack(G, n_classes))
    layers = [EquivariantLayer(reps[i], reps[i + 1]) for i in range(len(reps) - 1)]
    rng = np.random.default_rng(seed)
    for layer in layers:
        std = 1.0 / np.sqrt(layer.in_rep.dim)
        for b in layer.shared:
            layer.coefficients[b.irrep_id] = rng.normal(
                0.0, std, size=(b.m_out, b.m_in, b.basis.shape[0])
            )
        layer.mark_dirty()
    return EquivariantNetwork(G, layers, tuple(int(c) for c in hidden_channels), n_classes)


def margins(net: EquivariantNetwork, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-sample margin: true-class logit minus the best other logit."""
    logits = net.forward(np.asarray(X, dtype=np.float64))
    rows = np.arange(logits.shape[0])
    true = logits[rows, y]
    rest = logits.copy()
    rest[rows, y] = -np.inf
    return true - rest.max(axis=1)


def empirical_margin_loss(
    net: EquivariantNetwork, X: np.ndarray, y: np.ndarray, gamma: float
) -> float:
    """Fraction of samples whose margin fails to exceed gamma.

    gamma = 0 gives the 0-1 training error.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return float(np.mean(margins(net, X, y) <= gamma))


@dataclass
class TrainConfig:
    """Optimization and stopping parameters for margin training."""

    gamma: float
    max_epochs: int = 500
    learning_rate: float = 0.01
    batch_size: int = 256
    seed: int = 0
    target_fraction: float = 0.99
    record_bound_terms: bool = False

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass
class TrainResult:
    """Training trace: stopping epoch plus per-epoch diagnostics."""

    epochs: int
    margin_accuracy: float
    loss_history: list[float] = field(default_factory=list)
    margin_history: list[float] = field(default_factory=list)
    bound_trace: list[dict] | None = None


class MarginNotReached(RuntimeError):
    """Raised when training exhausts max_epochs below the margin target."""

    def __init__(self, epochs: int, achieved: float):
        super().__init__(
            f"margin target not reached after {epochs} epochs "
            f"(achieved fraction {achieved:.4f})"
        )
        self.epochs = epochs
        self.achieved = achieved


def _bound_terms_snapshot(net: EquivariantNetwork) -> dict:
    spec = [
        float(np.linalg.norm(layer.matrix, 2)) for layer in net.layers
    ]
    return {
        "spectral_norms": spec,
        "coefficient_sq_sums": [layer.coefficient_sq_sum() for layer in net.layers],
    }


def train(
    net: EquivariantNetwork,
    X: np.ndarray,
    y: np.ndarray,
    cfg: TrainConfig,
) -> TrainResult:
    """Adam on cross-entropy until the margin criterion is met.

    After each epoch the fraction of training points with margin
    strictly above cfg.gamma is evaluated; training stops once it
    reaches cfg.target_fraction and raises MarginNotReached otherwise.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    m = X.shape[0]
    if m == 0:
        raise ValueError("empty training set")
    if y.min() < 0 or y.max() >= net.n_classes:
        raise ValueError("labels out of range")
    rng = np.random.default_rng(cfg.seed)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    moments = {
        (l, pid): (np.zeros_like(arr), np.zeros_like(arr))
        for l, layer in enumerate(net.layers)
        for pid, arr in layer.coefficients.items()
    }
    step = 0
    result = TrainResult(epochs=0, margin_accuracy=0.0)
    if cfg.record_bound_terms:
        result.bound_trace = []
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(m)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, m, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = net.loss_and_grads(X[idx], y[idx])
            epoch_loss += loss
            n_batches += 1
            step += 1
            corr1 = 1.0 - beta1**step
            corr2 = 1.0 - beta2**step
            for l, layer in enumerate(net.layers):
                for pid, g in grads[l].items():
                    m1, m2 = moments[(l, pid)]
                    m1 *= beta1
                    m1 += (1.0 - beta1) * g
                    m2 *= beta2
                    m2 += (1.0 - beta2) * (g * g)
                    layer.coefficients[pid] -= cfg.learning_rate * (
                        (m1 / corr1) / (np.sqrt(m2 / corr2) + eps)
                    )
                layer.mark_dirty()
        frac = float(np.mean(margins(net, X, y) > cfg.gamma))
        result.epochs = epoch
        result.margin_accuracy = frac
        result.loss_history.append(epoch_loss / max(n_batches, 1))
        result.margin_history.append(frac)
        if result.bound_trace is not None:
            result.bound_trace.append(_bound_terms_snapshot(net))
        if frac >= cfg.target_fraction:
            return result
    raise MarginNotReached(cfg.max_epochs, result.margin_accuracy)


def save_checkpoint(path: str, net: EquivariantNetwork, metadata: dict) -> None:
    """Write the network and training metadata as JSON.

    Coefficients are keyed "irrep_id/j/i" (output copy j, input copy i)
    with one float per intertwiner basis element, so the file round-trips
    the exact float64 values.
    """
    layers_json = []
    for layer in net.layers:
        coeffs = {}
        for b in layer.shared:
            arr = layer.coefficients[b.irrep_id]
            for j in range(b.m_out):
                for i in range(b.m_in):
                    coeffs[f"{b.irrep_id}/{j}/{i}"] = arr[j, i].tolist()
        layers_json.append(
            {
                "in_rep": rep_to_json(layer.in_rep),
                "out_rep": rep_to_json(layer.out_rep),
                "coefficients": coeffs,
            }
        )
    data = {
        "group": group_to_json(net.group),
        "architecture": {
            "input_rep": rep_to_json(net.input_rep),
            "hidden_channels": list(net.hidden_channels),
            "n_classes": net.n_classes,
        },
        "layers": layers_json,
        "metadata": metadata,
    }
    with open(path, "w") as f:
        json.dump(data, f)


def load_checkpoint(path: str) -> tuple[EquivariantNetwork, dict]:
    """Rebuild a checkpointed network with bit-identical forward outputs."""
    with open(path) as f:
        data = json.load(f)
    G = group_from_json(data["group"])
    arch = data["architecture"]
    input_rep = rep_from_json(G, arch["input_rep"])
    net = build_network(
        G,
        input_rep,
        [int(c) for c in arch["hidden_channels"]],
        int(arch["n_classes"]),
        seed=0,
    )
    if len(data["layers"]) != len(net.layers):
        raise ValueError("layer count mismatch in checkpoint")
    for layer, entry in zip(net.layers, data["layers"]):
        fresh = {
            b.irrep_id: np.zeros((b.m_out, b.m_in, b.basis.shape[0]))
            for b in layer.shared
        }
        for key, vals in entry["coefficients"].items():
            pid, j, i = key.rsplit("/", 2)
            fresh[pid][int(j), int(i)] = np.asarray(vals, dtype=np.float64)
        layer.set_coefficients(fresh)
    return net, data["metadata"]
