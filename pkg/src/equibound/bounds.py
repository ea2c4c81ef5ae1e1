"""Norm computations and PAC-Bayesian generalization bounds.

Implements the margin-based bound for equivariant networks, its
specialization to group-convolutional architectures, and a coarser
norm-based bound whose only group dependence is an explicit 1/sqrt|H|
prefactor, together with the supporting quantities: per-layer spectral
and Fourier norms, the multiplicity factor M(l, eta), the posterior
width sigma0, the KL term, the combinatorial factor xi(m), spectral
tail thresholds for random equivariant matrices, and the perturbation
inequality right-hand side.

Two textual variants of the main bound exist; the canonical mode uses
the product of squared spectral norms and a margin-free confidence
term, while the as-written mode reproduces the alternative reading
(identical leading factor, confidence term divided by gamma^2).  Both
are always computed and reported side by side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .equivariant import EquivariantNetwork
from .irreps import irreps_of

__all__ = [
    "BoundInputs",
    "BoundReport",
    "GroupConvTerms",
    "TailBounds",
    "alternative_bound",
    "compute_report",
    "csv_header",
    "fourier_frobenius_sum",
    "groupconv_bound",
    "kl_term",
    "m_factor",
    "main_bound",
    "perturbation_rhs",
    "posterior_sigma",
    "report_to_csv_row",
    "report_to_json",
    "spectral_norm",
    "tail_threshold",
    "xi",
]


def spectral_norm(W: np.ndarray, tol: float = 1e-10) -> float:
    """Largest singular value, deterministic.

    Small matrices use a dense decomposition; larger ones use power
    iteration on W^T W from a seeded start with an iteration cap and a
    dense fallback if the cap is hit.
    """
    W = np.asarray(W, dtype=np.float64)
    if not np.all(np.isfinite(W)):
        raise ValueError("matrix has non-finite entries")
    if min(W.shape) <= 64:
        return float(np.linalg.svd(W, compute_uv=False)[0])
    rng = np.random.default_rng(0)
    v = rng.standard_normal(W.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(10000):
        w = W @ v
        s = np.linalg.norm(w)
        if s == 0.0:
            return 0.0
        v = W.T @ (w / s)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
        if abs(nv - sigma) <= tol * max(nv, 1.0):
            return float(nv)
        sigma = nv
    if max(W.shape) <= 4096:
        return float(np.linalg.svd(W, compute_uv=False)[0])
    raise RuntimeError("power iteration failed to converge")


def fourier_frobenius_sum(layer) -> float:
    """S_l: squared Frobenius mass of the Fourier blocks, per irrep dim.

    Because the intertwiner basis matrices are orthogonal with
    Frobenius norm sqrt(dim), this equals the plain sum of squared
    coefficients.
    """
    return layer.coefficient_sq_sum()


def _rep_mults(rep) -> dict[str, int]:
    return {pid: mult for pid, mult in rep.blocks}


def m_factor(net: EquivariantNetwork, l: int, eta: float) -> float:
    """Multiplicity factor M(l, eta) for layer l (1-based).

    M = log(total multiplicity of all layer outputs / (1 - eta)) times
    the largest 5 * m_in,psi * m_out,psi * c_psi over shared irreps.
    """
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if not 1 <= l <= net.depth:
        raise ValueError(f"layer index {l} out of range")
    reps = net.reps
    total = sum(mult for rep in reps[1:] for _, mult in rep.blocks)
    mults_in = _rep_mults(reps[l - 1])
    mults_out = _rep_mults(reps[l])
    worst = 0.0
    for psi in irreps_of(net.group):
        m_in = mults_in.get(psi.id, 0)
        m_out = mults_out.get(psi.id, 0)
        worst = max(worst, 5.0 * m_in * m_out * psi.type_c)
    return math.log(total / (1.0 - eta)) * worst


def xi(m: int) -> float:
    """The binomial factor sum_k C(m,k)(k/m)^k(1-k/m)^(m-k), 0^0 = 1.

    Evaluated termwise in the log domain; raises OverflowError rather
    than returning infinity.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    k = np.arange(m + 1, dtype=np.float64)
    log_binom = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
    frac = k / m
    with np.errstate(divide="ignore", invalid="ignore"):
        term_k = np.where(k == 0, 0.0, k * np.log(frac))
        term_mk = np.where(k == m, 0.0, (m - k) * np.log(1.0 - frac))
    value = float(np.exp(logsumexp(log_binom + term_k + term_mk)))
    if not math.isfinite(value):
        raise OverflowError(f"xi({m}) overflows a float")
    return value


def _layer_spectral_norms(net: EquivariantNetwork) -> list[float]:
    return [spectral_norm(layer.matrix) for layer in net.layers]


def posterior_sigma(
    net: EquivariantNetwork, gamma: float, B: float, eta: float
) -> float:
    """Posterior width sigma0 = gamma / (4 e B beta^(L-1) sum_l sqrt(M_l)).

    beta is the geometric mean of the layer spectral norms, matching a
    notional rescaling that equalizes them without changing the
    network function.
    """
    specs = _layer_spectral_norms(net)
    if any(s == 0.0 for s in specs):
        raise ValueError("a layer has zero spectral norm")
    L = net.depth
    beta = float(np.prod(specs)) ** (1.0 / L)
    sum_sqrt_m = sum(math.sqrt(m_factor(net, l, eta)) for l in range(1, L + 1))
    return gamma / (4.0 * math.e * B * beta ** (L - 1) * sum_sqrt_m)


def kl_term(net: EquivariantNetwork, sigma0: float) -> float:
    """KL divergence between posterior and prior: sum_l S_l / (2 sigma0^2)."""
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    return sum(fourier_frobenius_sum(layer) for layer in net.layers) / (
        2.0 * sigma0**2
    )


def perturbation_rhs(
    net: EquivariantNetwork, perturbations: list[np.ndarray], B: float
) -> float:
    """Right side of the output-perturbation inequality.

    Requires the admissibility condition |U_l| <= |W_l| / L for every
    layer; outside it the inequality is not claimed and this raises.
    Returns e * B * prod_l |W_l| * sum_l |U_l| / |W_l| (spectral norms).
    """
    if len(perturbations) != net.depth:
        raise ValueError("need one perturbation per layer")
    specs = _layer_spectral_norms(net)
    if any(s == 0.0 for s in specs):
        raise ValueError("a layer has zero spectral norm")
    L = net.depth
    u_norms = [spectral_norm(U) for U in perturbations]
    for u, w in zip(u_norms, specs):
        if u > w / L:
            raise ValueError(
                f"perturbation norm {u:.3e} exceeds admissible {w / L:.3e}"
            )
    ratio = sum(u / w for u, w in zip(u_norms, specs))
    return math.e * B * float(np.prod(specs)) * ratio


@dataclass(frozen=True)
class TailBounds:
    """Spectral tail for a random equivariant layer at one t."""

    threshold: float
    tight_threshold: float
    probability_bound: float


def tail_threshold(in_rep, out_rep, sigma: float, t: float) -> TailBounds:
    """Spectral-norm tail for Gaussian Fourier coefficients of width sigma.

    threshold is the simplified form sigma * sqrt(max_psi 5 m m' c t);
    tight_threshold keeps the pre-simplification chi-square terms; the
    exceedance probability bound is (sum of output multiplicities on
    shared irreps) * exp(-t) and may exceed 1 (vacuous).
    """
    if sigma <= 0 or t <= 0:
        raise ValueError("sigma and t must be positive")
    mults_in = _rep_mults(in_rep)
    mults_out = _rep_mults(out_rep)
    worst = 0.0
    worst_tight = 0.0
    mult_total = 0
    for psi in irreps_of(in_rep.group):
        m_in = mults_in.get(psi.id, 0)
        m_out = mults_out.get(psi.id, 0)
        if m_in == 0 or m_out == 0:
            continue
        c = psi.type_c
        worst = max(worst, 5.0 * m_in * m_out * c * t)
        worst_tight = max(
            worst_tight,
            m_in * (m_out * c + 2.0 * m_out * c * math.sqrt(t) + 2.0 * t),
        )
        mult_total += m_out
    return TailBounds(
        threshold=sigma * math.sqrt(worst),
        tight_threshold=sigma * math.sqrt(worst_tight),
        probability_bound=mult_total * math.exp(-t),
    )


@dataclass(frozen=True)
class BoundInputs:
    """Everything the bounds need about one trained model and dataset."""

    net: EquivariantNetwork
    m: int
    gamma: float
    B: float
    train_margin_loss: float
    delta: float = 0.05
    eta: float = 0.5
    train_err: float = float("nan")
    test_err: float = float("nan")

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.B <= 0:
            raise ValueError("B must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")


@dataclass
class BoundReport:
    """One row of results: data facts, per-layer norms, and all bounds."""

    group_kind: str
    N: int
    order: int
    m: int
    gamma: float
    eta: float
    delta: float
    B: float
    train_err: float
    train_margin_loss: float
    test_err: float
    generalization_error: float
    spectral_norms: tuple[float, ...]
    frobenius_norms: tuple[float, ...]
    fourier_frobenius_sums: tuple[float, ...]
    m_factors: tuple[float, ...]
    xi_m: float
    sigma0: float
    kl: float
    bound_main: float
    bound_main_as_written: float
    bound_groupconv: float = float("nan")
    bound_alt: float = float("nan")
    D_H: float = float("nan")
    E_H: float = float("nan")
    Q_H: float = float("nan")


def _confidence_terms(inputs: BoundInputs, L: int) -> tuple[float, float, float]:
    """xi(m) and the canonical / as-written confidence terms."""
    xi_m = xi(inputs.m)
    m = inputs.m
    log_arg = math.log(xi_m * L * m ** (1.0 + 1.0 / (2.0 * L)) / inputs.delta)
    return xi_m, log_arg / (2.0 * m), log_arg / (2.0 * inputs.gamma**2 * m)


def main_bound(inputs: BoundInputs) -> BoundReport:
    """Margin bound from the layerwise multiplicity factors.

    Fills every shared intermediate of the report; the group-conv and
    norm-only bounds are added by their own functions (see
    compute_report).
    """
    net = inputs.net
    L = net.depth
    specs = _layer_spectral_norms(net)
    if any(s == 0.0 for s in specs):
        raise ValueError("a layer has zero spectral norm")
    fros = [float(np.linalg.norm(layer.matrix)) for layer in net.layers]
    s_sums = [fourier_frobenius_sum(layer) for layer in net.layers]
    m_facs = [m_factor(net, l, inputs.eta) for l in range(1, L + 1)]
    prod_spec_sq = float(np.prod([s * s for s in specs]))
    sum_sqrt_m = sum(math.sqrt(v) for v in m_facs)
    sum_ratio = sum(s / (w * w) for s, w in zip(s_sums, specs))
    lead = (
        32.0
        * math.e**4
        * inputs.B**2
        * prod_spec_sq
        / (inputs.gamma**2 * inputs.m * inputs.eta)
        * sum_sqrt_m**2
        * sum_ratio
    )
    xi_m, conf, conf_literal = _confidence_terms(inputs, L)
    sigma0 = posterior_sigma(net, inputs.gamma, inputs.B, inputs.eta)
    return BoundReport(
        group_kind=net.group.kind,
        N=net.group.N,
        order=net.group.order,
        m=inputs.m,
        gamma=inputs.gamma,
        eta=inputs.eta,
        delta=inputs.delta,
        B=inputs.B,
        train_err=inputs.train_err,
        train_margin_loss=inputs.train_margin_loss,
        test_err=inputs.test_err,
        generalization_error=inputs.test_err - inputs.train_err,
        spectral_norms=tuple(specs),
        frobenius_norms=tuple(fros),
        fourier_frobenius_sums=tuple(s_sums),
        m_factors=tuple(m_facs),
        xi_m=xi_m,
        sigma0=sigma0,
        kl=kl_term(net, sigma0),
        bound_main=inputs.train_margin_loss + math.sqrt(lead + conf),
        bound_main_as_written=inputs.train_margin_loss
        + math.sqrt(lead + conf_literal),
    )


@dataclass(frozen=True)
class GroupConvTerms:
    """Group-level quantities and the specialized bound."""

    D_H: float
    E_H: float
    Q_H: float
    bound: float


def _channel_counts(net: EquivariantNetwork) -> list[int]:
    """Per-rep channel counts c_0..c_L of a group-convolutional net.

    Hidden reps must be whole stacks of the regular representation;
    the input's effective channel count rounds the densest irrep
    occupancy up, and the output counts its trivial copies.
    """
    G = net.group
    reps = net.reps
    counts = []
    mults0 = _rep_mults(reps[0])
    c0 = max(
        math.ceil(mults0.get(psi.id, 0) * psi.type_c / psi.dim)
        for psi in irreps_of(G)
    )
    counts.append(max(c0, 1))
    for rep in reps[1:-1]:
        mults = _rep_mults(rep)
        c = mults.get("triv", 0)
        for psi in irreps_of(G):
            if mults.get(psi.id, 0) * psi.type_c != c * psi.dim:
                raise ValueError(
                    "hidden layers must be stacks of the regular representation"
                )
        counts.append(c)
    counts.append(net.n_classes)
    return counts


def groupconv_bound(inputs: BoundInputs) -> GroupConvTerms:
    """Specialize the main bound to group-convolutional architectures.

    The multiplicity factors collapse into the group constants
    D_H = max_psi dim^2/c and E_H = sum_psi dim/c, with eta fixed at
    1/2; on all-regular networks this is numerically identical to the
    main bound.  Q_H is the architecture-independent complexity factor
    reported for reference.
    """
    net = inputs.net
    G = net.group
    L = net.depth
    counts = _channel_counts(net)
    irreps = irreps_of(G)
    D_H = max(psi.dim**2 / psi.type_c for psi in irreps)
    E_H = sum(psi.dim / psi.type_c for psi in irreps)
    specs = _layer_spectral_norms(net)
    if any(s == 0.0 for s in specs):
        raise ValueError("a layer has zero spectral norm")
    s_sums = [fourier_frobenius_sum(layer) for layer in net.layers]
    prod_spec_sq = float(np.prod([s * s for s in specs]))
    sum_ratio = sum(s / (w * w) for s, w in zip(s_sums, specs))
    sum_c_out = sum(counts[1:])
    sqrt_cc = sum(math.sqrt(counts[l - 1] * counts[l]) for l in range(1, L + 1))
    complexity = 5.0 * D_H * math.log(2.0 * E_H * sum_c_out) * sqrt_cc**2
    eta = 0.5
    lead = (
        32.0
        * math.e**4
        * inputs.B**2
        * prod_spec_sq
        / (inputs.gamma**2 * inputs.m * eta)
        * complexity
        * sum_ratio
    )
    _, conf, _ = _confidence_terms(inputs, L)
    Q_H = sqrt_cc**2 * D_H * math.log(2.0 * E_H * sum(counts[:-1]))
    return GroupConvTerms(
        D_H=D_H,
        E_H=E_H,
        Q_H=Q_H,
        bound=inputs.train_margin_loss + math.sqrt(lead + conf),
    )


def alternative_bound(inputs: BoundInputs) -> float:
    """Norm-only bound whose group dependence is a 1/sqrt|H| prefactor.

    Order-level (constants dropped); uses the widest feature dimension
    h and the largest irrep dimension of H.
    """
    net = inputs.net
    specs = _layer_spectral_norms(net)
    if any(s == 0.0 for s in specs):
        raise ValueError("a layer has zero spectral norm")
    fros = [float(np.linalg.norm(layer.matrix)) for layer in net.layers]
    L = net.depth
    h = max(rep.dim for rep in net.reps)
    max_dim = max(psi.dim for psi in irreps_of(net.group))
    prod_spec_sq = float(np.prod([s * s for s in specs]))
    sum_ratio = sum((f * f) / (w * w) for f, w in zip(fros, specs))
    inner = (
        max_dim
        * L**2
        * h
        * math.log(2.0 * L * h)
        * prod_spec_sq
        * sum_ratio
        / (inputs.gamma**2 * inputs.m)
    )
    return math.sqrt(inner / net.group.order)


def compute_report(inputs: BoundInputs) -> BoundReport:
    """All three bounds plus intermediates in one report."""
    report = main_bound(inputs)
    gc = groupconv_bound(inputs)
    report.bound_groupconv = gc.bound
    report.D_H = gc.D_H
    report.E_H = gc.E_H
    report.Q_H = gc.Q_H
    report.bound_alt = alternative_bound(inputs)
    return report


def csv_header(depth: int) -> list[str]:
    """Column names for a report with `depth` layers."""
    cols = [
        "group_kind",
        "N",
        "H_order",
        "m",
        "gamma",
        "eta",
        "delta",
        "B",
        "train_err",
        "train_margin_loss",
        "test_err",
        "GE",
    ]
    for name in ("spec", "fro", "S", "M"):
        cols.extend(f"{name}_{l}" for l in range(1, depth + 1))
    cols.extend(
        [
            "xi_m",
            "sigma0",
            "kl",
            "bound_main",
            "bound_main_as_written",
            "bound_groupconv",
            "bound_alt",
            "D_H",
            "E_H",
            "Q_H",
        ]
    )
    return cols


def report_to_csv_row(report: BoundReport) -> list[str]:
    """Stringify one report in csv_header order (repr for floats)."""
    values = [
        report.group_kind,
        str(report.N),
        str(report.order),
        str(report.m),
        repr(float(report.gamma)),
        repr(float(report.eta)),
        repr(float(report.delta)),
        repr(float(report.B)),
        repr(float(report.train_err)),
        repr(float(report.train_margin_loss)),
        repr(float(report.test_err)),
        repr(float(report.generalization_error)),
    ]
    for tup in (
        report.spectral_norms,
        report.frobenius_norms,
        report.fourier_frobenius_sums,
        report.m_factors,
    ):
        values.extend(repr(float(v)) for v in tup)
    values.extend(
        repr(float(v))
        for v in (
            report.xi_m,
            report.sigma0,
            report.kl,
            report.bound_main,
            report.bound_main_as_written,
            report.bound_groupconv,
            report.bound_alt,
            report.D_H,
            report.E_H,
            report.Q_H,
        )
    )
    return values


def report_to_json(report: BoundReport) -> dict:
    """Report as a JSON-ready dict."""
    return {
        "group_kind": report.group_kind,
        "N": report.N,
        "H_order": report.order,
        "m": report.m,
        "gamma": report.gamma,
        "eta": report.eta,
        "delta": report.delta,
        "B": report.B,
        "train_err": report.train_err,
        "train_margin_loss": report.train_margin_loss,
        "test_err": report.test_err,
        "GE": report.generalization_error,
        "spectral_norms": list(report.spectral_norms),
        "frobenius_norms": list(report.frobenius_norms),
        "fourier_frobenius_sums": list(report.fourier_frobenius_sums),
        "m_factors": list(report.m_factors),
        "xi_m": report.xi_m,
        "sigma0": report.sigma0,
        "kl": report.kl,
        "bound_main": report.bound_main,
        "bound_main_as_written": report.bound_main_as_written,
        "bound_groupconv": report.bound_groupconv,
        "bound_alt": report.bound_alt,
        "D_H": report.D_H,
        "E_H": report.E_H,
        "Q_H": report.Q_H,
    }
