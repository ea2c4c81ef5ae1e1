"""Real irreducible representations and group Fourier analysis.

Provides the irrep catalogs of the supported groups, Frobenius-Schur
types, intertwiner bases, the regular representation with its
orthonormal Fourier change of basis, numerical decomposition of
arbitrary orthogonal representations, the group Fourier transform and
its inverse, and group circulant matrices.

A RepSpec describes how a feature space transforms: an ordered list of
(irrep id, multiplicity) blocks plus an orthogonal change of basis Q
such that Q^T rho(g) Q is the corresponding block diagonal for every
group element.  Block coordinates group copies of the same irrep
together, copy-major with the irrep component fastest.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .groups import FiniteGroup, build_group
from .kernels import fill_circulant

__all__ = [
    "Irrep",
    "RepSpec",
    "StackInfo",
    "decompose_representation",
    "direct_sum",
    "fourier_transform",
    "fourier_transform_full",
    "group_circulant",
    "intertwiner_basis",
    "inverse_fourier",
    "irrep_by_id",
    "irreps_of",
    "multiplicities",
    "regular_matrices",
    "regular_representation",
    "rep_from_json",
    "rep_to_json",
    "restricted_frequency_rep",
    "stack_rep",
    "trivial_stack",
]


@dataclass(frozen=True, eq=False)
class Irrep:
    """A real irreducible representation given by per-element matrices.

    `matrices` has shape (order, dim, dim); `type_c` is the
    Frobenius-Schur type: 1 (real), 2 (complex), or 4 (quaternionic).
    """

    id: str
    dim: int
    type_c: int
    matrices: np.ndarray

    @cached_property
    def characters(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=1, axis2=2)

    def __repr__(self) -> str:
        return f"Irrep(id={self.id!r}, dim={self.dim}, type_c={self.type_c})"


def _rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


_REFLECT_2D = np.array([[1.0, 0.0], [0.0, -1.0]])


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _cyclic_irreps(N: int) -> list[Irrep]:
    a = np.arange(N)
    out = [Irrep("triv", 1, 1, _freeze(np.ones((N, 1, 1))))]
    for k in range(1, (N + 1) // 2):
        mats = np.stack([_rotation(2 * np.pi * k * g / N) for g in a])
        out.append(Irrep(f"freq:{k}", 2, 2, _freeze(mats)))
    if N % 2 == 0:
        mats = ((-1.0) ** a).reshape(N, 1, 1)
        out.append(Irrep("sign", 1, 1, _freeze(mats)))
    return out


def _dihedral_irreps(N: int) -> list[Irrep]:
    n = 2 * N
    a = np.arange(N)
    ones = np.ones(N)
    out = [Irrep("triv", 1, 1, _freeze(np.ones((n, 1, 1))))]
    refl_parity = np.concatenate([ones, -ones]).reshape(n, 1, 1)
    out.append(Irrep("sign", 1, 1, _freeze(refl_parity)))
    if N % 2 == 0:
        alt = (-1.0) ** a
        out.append(Irrep("alt", 1, 1, _freeze(np.concatenate([alt, alt]).reshape(n, 1, 1))))
        out.append(
            Irrep("alt-sign", 1, 1, _freeze(np.concatenate([alt, -alt]).reshape(n, 1, 1)))
        )
    for k in range(1, (N + 1) // 2):
        rots = [_rotation(2 * np.pi * k * g / N) for g in a]
        refls = [_REFLECT_2D @ r for r in rots]
        out.append(Irrep(f"freq:{k}", 2, 1, _freeze(np.stack(rots + refls))))
    return out


def _q8_left_mult(q: tuple) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ],
        dtype=np.float64,
    )


def _quaternion_irreps() -> list[Irrep]:
    from .groups import _Q8_UNITS

    out = [Irrep("triv", 1, 1, _freeze(np.ones((8, 1, 1))))]
    # The three sign characters are +1 on {+-1, +-axis} and -1 elsewhere.
    for name, axis in (("sign:i", 2), ("sign:j", 4), ("sign:k", 6)):
        chars = np.array(
            [1.0 if idx in (0, 1, axis, axis + 1) else -1.0 for idx in range(8)]
        )
        out.append(Irrep(name, 1, 1, _freeze(chars.reshape(8, 1, 1))))
    mats = np.stack([_q8_left_mult(q) for q in _Q8_UNITS])
    out.append(Irrep("quat", 4, 4, _freeze(mats)))
    return out


@lru_cache(maxsize=None)
def _irreps_cached(kind: str, N: int) -> tuple[Irrep, ...]:
    if kind == "cyclic":
        return tuple(_cyclic_irreps(N))
    if kind == "dihedral":
        return tuple(_dihedral_irreps(N))
    return tuple(_quaternion_irreps())


def irreps_of(G: FiniteGroup) -> tuple[Irrep, ...]:
    """Return the complete catalog of real irreps of G, in a fixed order.

    The catalog satisfies sum_psi dim^2 / c = |G| exactly.
    """
    return _irreps_cached(G.kind, G.N)


def irrep_by_id(G: FiniteGroup, irrep_id: str) -> Irrep:
    """Look up an irrep of G by its stable identifier."""
    for psi in irreps_of(G):
        if psi.id == irrep_id:
            return psi
    raise KeyError(f"group {G!r} has no irrep {irrep_id!r}")


_QUAT_PATTERNS = [
    np.eye(4),
    np.array(
        [
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]
    ),
    np.array(
        [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
        ]
    ),
    np.array(
        [
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]
    ),
]


@lru_cache(maxsize=None)
def _intertwiner_basis_cached(kind: str, N: int, irrep_id: str) -> np.ndarray:
    psi = irrep_by_id(build_group(kind, N), irrep_id)
    d, c = psi.dim, psi.type_c
    if c == 1:
        basis = np.eye(d)[None]
    elif c == 2:
        half = d // 2
        J = np.zeros((d, d))
        J[:half, half:] = -np.eye(half)
        J[half:, :half] = np.eye(half)
        basis = np.stack([np.eye(d), J])
    else:
        quarter = d // 4
        basis = np.stack([np.kron(p, np.eye(quarter)) for p in _QUAT_PATTERNS])
    return _freeze(basis)


def intertwiner_basis(G: FiniteGroup, psi: Irrep) -> np.ndarray:
    """Return the c orthogonal basis matrices of psi's self-intertwiner space.

    Shape (c, dim, dim).  Real type gives {I}; complex type adds the
    block rotation [[0, -I], [I, 0]]; quaternionic type gives the four
    right-multiplication matrices.  Every element commutes with psi(g)
    for all g, and the matrices are pairwise Frobenius-orthogonal.
    """
    return _intertwiner_basis_cached(G.kind, G.N, psi.id)


@dataclass(frozen=True, eq=False)
class StackInfo:
    """Factored structure of a rep built as `channels` copies of a base rep.

    The full change of basis is kron(I_channels, base_Q) with columns
    permuted by `perm` so that copies of the same irrep are grouped.
    Used to apply Q and Q^T without materializing the dense matrix.
    """

    base_Q: np.ndarray
    channels: int
    perm: np.ndarray


@dataclass(frozen=True, eq=False)
class RepSpec:
    """An orthogonal representation described by irrep blocks and a basis Q.

    `blocks` is an ordered tuple of (irrep id, multiplicity); Q is the
    orthogonal dim x dim change of basis with Q^T rho(g) Q block
    diagonal.  The represented action itself is recovered as
    rho(g) = Q (block diagonal) Q^T.
    """

    group: FiniteGroup
    blocks: tuple[tuple[str, int], ...]
    Q: np.ndarray
    stack: StackInfo | None = None

    @cached_property
    def dim(self) -> int:
        return self.Q.shape[0]

    @cached_property
    def is_identity(self) -> bool:
        return bool(
            self.Q.shape[0] == self.Q.shape[1]
            and np.array_equal(self.Q, np.eye(self.Q.shape[0]))
        )

    @cached_property
    def layout(self) -> tuple[tuple[Irrep, int, int], ...]:
        """Per-block (irrep, column offset, multiplicity) in block coordinates."""
        out = []
        offset = 0
        for irrep_id, mult in self.blocks:
            psi = irrep_by_id(self.group, irrep_id)
            out.append((psi, offset, mult))
            offset += mult * psi.dim
        if offset != self.dim:
            raise ValueError("block dimensions do not match Q size")
        return tuple(out)

    def multiplicity(self, irrep_id: str) -> int:
        for pid, mult in self.blocks:
            if pid == irrep_id:
                return mult
        return 0

    def block_diagonal(self, g: int) -> np.ndarray:
        """Materialize the block-diagonal matrix direct-sum of psi(g) copies."""
        out = np.zeros((self.dim, self.dim))
        for psi, offset, mult in self.layout:
            d = psi.dim
            mat = psi.matrices[g]
            for q in range(mult):
                lo = offset + q * d
                out[lo : lo + d, lo : lo + d] = mat
        return out

    def rho(self, g: int) -> np.ndarray:
        """Materialize the represented action of element g."""
        if self.is_identity:
            return self.block_diagonal(g)
        return self.Q @ self.block_diagonal(g) @ self.Q.T

    def to_block(self, X: np.ndarray) -> np.ndarray:
        """Map batch rows X (batch, dim) to block coordinates (rows times Q)."""
        if self.is_identity:
            return X
        if self.stack is not None:
            s = self.stack
            n = s.base_Q.shape[0]
            batch = X.shape[0]
            U = np.matmul(X.reshape(batch, s.channels, n), s.base_Q)
            return U.reshape(batch, self.dim)[:, s.perm]
        return X @ self.Q

    def from_block(self, V: np.ndarray) -> np.ndarray:
        """Map batch rows in block coordinates back (rows times Q^T)."""
        if self.is_identity:
            return V
        if self.stack is not None:
            s = self.stack
            n = s.base_Q.shape[0]
            batch = V.shape[0]
            V0 = np.empty_like(V)
            V0[:, s.perm] = V
            X = np.matmul(V0.reshape(batch, s.channels, n), s.base_Q.T)
            return X.reshape(batch, self.dim)
        return V @ self.Q.T

    def __repr__(self) -> str:
        return f"RepSpec(group={self.group!r}, blocks={self.blocks}, dim={self.dim})"


def multiplicities(rep: RepSpec) -> dict[str, int]:
    """Return the irrep multiplicities of a rep as a dict keyed by irrep id."""
    return {pid: mult for pid, mult in rep.blocks}


def regular_matrices(G: FiniteGroup) -> np.ndarray:
    """Return the permutation matrices of the regular representation.

    Shape (order, order, order); column j of matrix g has its 1 in row
    cayley[g, j], so signals transform by left translation.
    """
    n = G.order
    mats = np.zeros((n, n, n))
    rows = G.cayley
    cols = np.broadcast_to(np.arange(n), (n, n))
    mats[np.arange(n)[:, None], rows, cols] = 1.0
    return mats


@lru_cache(maxsize=None)
def _regular_cached(kind: str, N: int) -> RepSpec:
    G = build_group(kind, N)
    n = G.order
    blocks = []
    cols = []
    for psi in irreps_of(G):
        d, c = psi.dim, psi.type_c
        mult = d // c
        blocks.append((psi.id, mult))
        scale = np.sqrt(d / n)
        for q in range(mult):
            for p in range(d):
                cols.append(scale * psi.matrices[:, p, q])
    Q = _freeze(np.column_stack(cols))
    return RepSpec(group=G, blocks=tuple(blocks), Q=Q)


def regular_representation(G: FiniteGroup) -> RepSpec:
    """Return the regular representation with its orthonormal Fourier basis.

    Every irrep appears with multiplicity dim/c; the columns of Q are the
    scaled matrix coefficients sqrt(dim/|G|) psi(.)[p, q] of the retained
    columns q < dim/c, which form an exactly orthonormal basis.
    """
    return _regular_cached(G.kind, G.N)


def _check_representation(G: FiniteGroup, rho: np.ndarray, tol: float = 1e-8) -> None:
    n = G.order
    if rho.shape[0] != n or rho.shape[1] != rho.shape[2]:
        raise ValueError(f"expected shape ({n}, d, d), got {rho.shape}")
    dim = rho.shape[1]
    if not np.allclose(rho[0], np.eye(dim), atol=tol):
        raise ValueError("rho(identity) is not the identity matrix")
    products = np.einsum("gij,hjk->ghik", rho, rho)
    if not np.allclose(products, rho[G.cayley], atol=tol):
        raise ValueError("input is not a representation (homomorphism fails)")
    gram = np.einsum("gji,gjk->gik", rho, rho)
    if not np.allclose(gram, np.eye(dim)[None], atol=tol):
        raise ValueError("representation matrices must be orthogonal")


def decompose_representation(
    G: FiniteGroup,
    rho: np.ndarray,
    seed: int = 0,
    tol: float = 1e-9,
) -> RepSpec:
    """Decompose an orthogonal representation of G into irrep blocks.

    Multiplicities come from character inner products; the basis is built
    by twirl-averaging seed matrices into intertwiners, sweeping the
    standard basis seeds deterministically first and falling back to
    random seeds (drawn from `seed`) only if the sweep degenerates.
    The result satisfies the RepSpec invariants within `tol`.
    """
    rho = np.asarray(rho, dtype=np.float64)
    _check_representation(G, rho)
    n_group = G.order
    dim = rho.shape[1]
    chars = np.trace(rho, axis1=1, axis2=2)

    blocks = []
    mults = {}
    total = 0
    for psi in irreps_of(G):
        raw = float(chars @ psi.characters) / (n_group * psi.type_c)
        mult = int(round(raw))
        if abs(raw - mult) > 1e-6 or mult < 0:
            raise ValueError(
                f"character inner product for {psi.id} is {raw}, not a multiplicity"
            )
        if mult > 0:
            blocks.append((psi.id, mult))
            mults[psi.id] = mult
            total += mult * psi.dim
    if total != dim:
        raise ValueError("multiplicities do not add up to the representation size")

    rng = np.random.default_rng(seed)
    Q = np.empty((dim, dim))
    offset = 0
    for irrep_id, mult in blocks:
        psi = irrep_by_id(G, irrep_id)
        d = psi.dim
        accepted: list[np.ndarray] = []

        def try_seed(seed_matrix: np.ndarray) -> None:
            T = (
                np.einsum(
                    "gip,pq,gjq->ij", psi.matrices, seed_matrix, rho, optimize=True
                )
                / n_group
            )
            for U in accepted:
                T = T - (T @ U.T) @ U
            lam = float(np.einsum("ij,ij->", T, T)) / d
            if lam > 1e-10:
                accepted.append(T / np.sqrt(lam))

        for p in range(d):
            for q in range(dim):
                if len(accepted) == mult:
                    break
                seed_matrix = np.zeros((d, dim))
                seed_matrix[p, q] = 1.0
                try_seed(seed_matrix)
        tries = 0
        while len(accepted) < mult and tries < 100:
            try_seed(rng.standard_normal((d, dim)))
            tries += 1
        if len(accepted) < mult:
            raise RuntimeError(
                f"failed to extract {mult} copies of {irrep_id}; "
                "input is numerically degenerate"
            )
        for U in accepted:
            Q[:, offset : offset + d] = U.T
            offset += d

    rep = RepSpec(group=G, blocks=tuple(blocks), Q=_freeze(Q))
    _validate_rep_spec(rep, rho, tol)
    return rep


def _validate_rep_spec(rep: RepSpec, rho: np.ndarray, tol: float) -> None:
    gram_err = np.max(np.abs(rep.Q @ rep.Q.T - np.eye(rep.dim)))
    if gram_err > tol:
        raise RuntimeError(f"decomposition basis is not orthogonal ({gram_err:.2e})")
    for g in range(rep.group.order):
        err = np.max(np.abs(rep.Q.T @ rho[g] @ rep.Q - rep.block_diagonal(g)))
        if err > tol:
            raise RuntimeError(f"block diagonalization fails at element {g} ({err:.2e})")


def fourier_transform(G: FiniteGroup, x: np.ndarray) -> dict[str, np.ndarray]:
    """Group Fourier transform with counting measure, retained columns only.

    Returns, per irrep, the matrix sum_g x(g) psi(g) restricted to its
    first dim/c columns (the rest are redundant for real irreps).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (G.order,):
        raise ValueError(f"expected signal of length {G.order}, got shape {x.shape}")
    out = {}
    for psi in irreps_of(G):
        keep = psi.dim // psi.type_c
        out[psi.id] = np.einsum("g,gpq->pq", x, psi.matrices[:, :, :keep])
    return out


def fourier_transform_full(G: FiniteGroup, x: np.ndarray) -> dict[str, np.ndarray]:
    """Group Fourier transform including the redundant columns."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (G.order,):
        raise ValueError(f"expected signal of length {G.order}, got shape {x.shape}")
    return {
        psi.id: np.einsum("g,gpq->pq", x, psi.matrices) for psi in irreps_of(G)
    }


def inverse_fourier(G: FiniteGroup, coeffs: dict[str, np.ndarray]) -> np.ndarray:
    """Invert fourier_transform exactly via the orthonormal regular basis."""
    reg = regular_representation(G)
    n = G.order
    s = np.empty(n)
    offset = 0
    for psi in irreps_of(G):
        keep = psi.dim // psi.type_c
        mat = np.asarray(coeffs[psi.id], dtype=np.float64)
        if mat.shape != (psi.dim, keep):
            raise ValueError(
                f"coefficients for {psi.id} must have shape {(psi.dim, keep)}, "
                f"got {mat.shape}"
            )
        scale = np.sqrt(psi.dim / n)
        span = keep * psi.dim
        s[offset : offset + span] = scale * mat.T.reshape(-1)
        offset += span
    return reg.Q @ s


@lru_cache(maxsize=None)
def _circulant_index(kind: str, N: int) -> np.ndarray:
    G = build_group(kind, N)
    return np.ascontiguousarray(G.cayley[G.inverses, :])


def group_circulant(G: FiniteGroup, w: np.ndarray) -> np.ndarray:
    """Build the group circulant matrix W[a, b] = w(g_a^{-1} g_b).

    Row 0 equals w itself, and W commutes with the regular representation.
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    if w.shape != (G.order,):
        raise ValueError(f"expected filter of length {G.order}, got shape {w.shape}")
    return fill_circulant(_circulant_index(G.kind, G.N), w)


def restricted_frequency_rep(G: FiniteGroup, f: int, reflected: bool) -> RepSpec:
    """Restrict the continuous frequency-f circle action to a finite group.

    With reflected=False this is the 2D rotation representation of a
    single circle; with reflected=True it is the 4D representation of a
    pair of circles where reflections swap the circles and negate the
    angle.  Only cyclic and dihedral groups are supported.
    """
    if G.kind == "quaternion":
        raise ValueError("frequency representations need a rotation group")
    if f < 0:
        raise ValueError("frequency must be nonnegative")
    N = G.N
    angles = 2 * np.pi * f * np.arange(N) / N
    rots = np.stack([_rotation(a) for a in angles])
    if not reflected:
        dim = 2
        rot_mats = rots
        refl = _REFLECT_2D
    else:
        dim = 4
        rot_mats = np.zeros((N, 4, 4))
        rot_mats[:, :2, :2] = rots
        rot_mats[:, 2:, 2:] = rots
        refl = np.zeros((4, 4))
        refl[:2, 2:] = _REFLECT_2D
        refl[2:, :2] = _REFLECT_2D
    if G.kind == "cyclic":
        rho = rot_mats
    else:
        rho = np.concatenate([rot_mats, np.einsum("ij,gjk->gik", refl, rot_mats)])
    return decompose_representation(G, rho, seed=0)


def _grouped_perm(
    G: FiniteGroup, parts: list[RepSpec]
) -> tuple[tuple[tuple[str, int], ...], np.ndarray]:
    """Column permutation grouping same-irrep copies across stacked parts."""
    offsets = np.cumsum([0] + [r.dim for r in parts])
    perm = []
    blocks = []
    for psi in irreps_of(G):
        d = psi.dim
        total = 0
        for r, base in zip(parts, offsets):
            for p, off, mult in r.layout:
                if p.id != psi.id:
                    continue
                start = base + off
                perm.extend(range(start, start + mult * d))
                total += mult
        if total > 0:
            blocks.append((psi.id, total))
    return tuple(blocks), np.asarray(perm, dtype=np.intp)


def direct_sum(parts: list[RepSpec]) -> RepSpec:
    """Direct-sum several reps of the same group, regrouping irrep copies."""
    if not parts:
        raise ValueError("direct_sum needs at least one rep")
    G = parts[0].group
    if any(r.group is not G for r in parts):
        raise ValueError("all parts must share the same group")
    if len(parts) == 1:
        return parts[0]
    dim = sum(r.dim for r in parts)
    Q0 = np.zeros((dim, dim))
    offset = 0
    for r in parts:
        Q0[offset : offset + r.dim, offset : offset + r.dim] = r.Q
        offset += r.dim
    blocks, perm = _grouped_perm(G, parts)
    return RepSpec(group=G, blocks=blocks, Q=_freeze(Q0[:, perm]))


def stack_rep(base: RepSpec, channels: int) -> RepSpec:
    """Stack `channels` independent copies of a rep, grouped by irrep.

    The result keeps the factored structure so Q and Q^T can be applied
    in O(channels * base_dim^2) instead of densely.
    """
    if channels < 1:
        raise ValueError("channels must be >= 1")
    if channels == 1:
        return base
    G = base.group
    blocks, perm = _grouped_perm(G, [base] * channels)
    Q = np.kron(np.eye(channels), base.Q)[:, perm]
    info = StackInfo(base_Q=base.Q, channels=channels, perm=perm)
    return RepSpec(group=G, blocks=blocks, Q=_freeze(Q), stack=info)


def trivial_stack(G: FiniteGroup, n: int) -> RepSpec:
    """n copies of the trivial irrep with the identity basis."""
    if n < 1:
        raise ValueError("need at least one copy")
    return RepSpec(group=G, blocks=(("triv", n),), Q=_freeze(np.eye(n)))


def rep_to_json(rep: RepSpec) -> dict:
    """Serialize a rep as {"blocks": [[id, mult], ...], "Q": ...}.

    Q is "identity" when it is exactly the identity matrix, otherwise a
    row-major flat float list.
    """
    q = "identity" if rep.is_identity else rep.Q.reshape(-1).tolist()
    return {"blocks": [[pid, mult] for pid, mult in rep.blocks], "Q": q}


def rep_from_json(G: FiniteGroup, data: dict) -> RepSpec:
    """Rebuild a rep from its serialized form (dense, without stack info)."""
    blocks = tuple((str(pid), int(mult)) for pid, mult in data["blocks"])
    dim = sum(irrep_by_id(G, pid).dim * mult for pid, mult in blocks)
    if data["Q"] == "identity":
        Q = np.eye(dim)
    else:
        Q = np.asarray(data["Q"], dtype=np.float64).reshape(dim, dim)
    return RepSpec(group=G, blocks=blocks, Q=_freeze(Q))
