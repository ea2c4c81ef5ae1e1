"""Command-line interface: datasets, training, bounds, checks, sweeps.

Subcommands:

- gen-data: generate a synthetic dataset and write train/test JSON.
- train: fit an equivariant network to a dataset file.
- bound: compute all bounds for a trained model (CSV/JSON output).
- verify: run the oracle and Monte-Carlo check suite.
- sweep: run a grid of (dataset, group, m, seed) cells, training one
  model per cell, and emit one CSV row per cell plus correlation
  summaries.  Identical configs and seeds reproduce byte-identical CSV
  bodies.

Exit codes: 0 on success, 2 for invalid configuration, 3 when training
misses the margin target outside of a sweep.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .bounds import (
    BoundInputs,
    compute_report,
    csv_header,
    report_to_csv_row,
    report_to_json,
    spectral_norm,
    tail_threshold,
)
from .datasets import (
    generate_synthetic,
    input_rep_for,
    load_dataset,
    randomize_labels,
    sample,
    save_dataset,
)
from .equivariant import (
    MarginNotReached,
    TrainConfig,
    build_network,
    channels_for_width,
    empirical_margin_loss,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .groups import GROUP_KINDS, build_group
from .irreps import irrep_by_id, irreps_of, regular_representation, restricted_frequency_rep
from .verify import (
    character_type_oracle,
    check_equivariance,
    chi_square_mc_check,
    convolution_theorem_check,
    format_check_result,
    fourier_roundtrip,
    intertwiner_identity_check,
    mc_perturbation_check,
    mc_tail_check,
    rep_invariants_check,
)
from .irreps import regular_matrices

__all__ = ["SweepConfig", "main", "run_sweep"]


def _derive_seed(base: int, tag: str) -> int:
    """Stable sub-seed from a base seed and a purpose tag."""
    digest = hashlib.sha256(f"{base}:{tag}".encode()).hexdigest()
    return int(digest[:16], 16) % (2**63)


# ---------------------------------------------------------------- gen-data


def _cmd_gen_data(args: argparse.Namespace) -> int:
    discrete = args.symmetry in ("cyclic", "dihedral")
    if discrete:
        if args.m_order is None:
            raise ValueError("--m-order is required for discrete symmetries")
        size = args.m_order
        max_frequency = None
    else:
        if args.d is None or args.f is None:
            raise ValueError("--d and --f are required for continuous symmetries")
        size = args.d
        max_frequency = args.f
    spec = generate_synthetic(
        args.symmetry,
        size,
        max_frequency=max_frequency,
        seed=args.seed,
        noise_sigma_tangent=args.noise_tangent,
        noise_sigma_ambient=args.noise_ambient,
    )
    train_set = sample(spec, args.m, args.augment, _derive_seed(args.seed, "train"))
    if args.random_labels:
        train_set = randomize_labels(train_set, _derive_seed(args.seed, "labels"))
    save_dataset(args.train_out, spec, train_set)
    print(
        f"wrote {args.train_out}: {len(train_set)} samples, "
        f"{spec.n_representatives} representatives, B={train_set.B:.4f}"
    )
    if args.test_out:
        test_set = sample(spec, args.test_m, "group", _derive_seed(args.seed, "test"))
        save_dataset(args.test_out, spec, test_set)
        print(f"wrote {args.test_out}: {len(test_set)} samples, B={test_set.B:.4f}")
    return 0


# ------------------------------------------------------------------- train


def _cmd_train(args: argparse.Namespace) -> int:
    spec, train_set = load_dataset(args.data)
    G = build_group(args.group, args.n)
    input_rep = input_rep_for(spec, G)
    channels = [channels_for_width(G, w) for w in args.widths]
    net = build_network(G, input_rep, channels, 2, seed=args.seed)
    cfg = TrainConfig(
        gamma=args.gamma,
        max_epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch,
        seed=_derive_seed(args.seed, "shuffle"),
    )
    result = train(net, train_set.X, train_set.y, cfg)
    print(
        f"trained in {result.epochs} epochs, "
        f"margin accuracy {result.margin_accuracy:.4f}, channels {channels}"
    )
    if args.out:
        save_checkpoint(
            args.out,
            net,
            {
                "gamma": args.gamma,
                "seed": args.seed,
                "epochs": result.epochs,
                "margin_accuracy": result.margin_accuracy,
                "data": args.data,
                "widths": list(args.widths),
                "channels": channels,
                "B": train_set.B,
                "m": len(train_set),
            },
        )
        print(f"wrote {args.out}")
    return 0


# ------------------------------------------------------------------- bound


def _cmd_bound(args: argparse.Namespace) -> int:
    net, metadata = load_checkpoint(args.model)
    spec, train_set = load_dataset(args.data)
    gamma = args.gamma if args.gamma is not None else metadata.get("gamma")
    if gamma is None:
        raise ValueError("no gamma given and none recorded in the checkpoint")
    train_err = empirical_margin_loss(net, train_set.X, train_set.y, 0.0)
    margin_loss = empirical_margin_loss(net, train_set.X, train_set.y, gamma)
    test_err = float("nan")
    if args.test_data:
        _, test_set = load_dataset(args.test_data)
        test_err = empirical_margin_loss(net, test_set.X, test_set.y, 0.0)
    inputs = BoundInputs(
        net=net,
        m=len(train_set),
        gamma=float(gamma),
        B=train_set.B,
        train_margin_loss=margin_loss,
        delta=args.delta,
        eta=args.eta,
        train_err=train_err,
        test_err=test_err,
    )
    report = compute_report(inputs)
    headline = report.bound_main_as_written if args.as_written else report.bound_main
    label = "bound_main_as_written" if args.as_written else "bound_main"
    print(f"train_err={train_err:.4f} test_err={test_err:.4f}")
    print(f"{label}={headline:.6g} groupconv={report.bound_groupconv:.6g} alt={report.bound_alt:.6g}")
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(csv_header(net.depth))
            writer.writerow(report_to_csv_row(report))
        print(f"wrote {args.csv}")
    if args.json:
        with open(args.json, "w") as f:
            json.dump(report_to_json(report), f, indent=2)
        print(f"wrote {args.json}")
    return 0


# ------------------------------------------------------------------ verify


def _verify_suite(trials: int, seed: int) -> list:
    results = []

    worst = 0.0
    n_irreps = 0
    for kind, ns in (("cyclic", range(1, 17)), ("dihedral", range(1, 9)), ("quaternion", (8,))):
        for n in ns:
            G = build_group(kind, n)
            for psi in irreps_of(G):
                c = character_type_oracle(psi, G)
                worst = max(worst, abs(float(np.mean(psi.characters**2)) - c))
                n_irreps += 1
    results.append(
        _result("character-types", worst, n_irreps, 0.01)
    )

    worst = 0.0
    n_reps = 0
    for kind, n in (("cyclic", 8), ("dihedral", 6), ("quaternion", 8)):
        G = build_group(kind, n)
        rep = regular_representation(G)
        r = rep_invariants_check(rep, regular_matrices(G))
        worst = max(worst, r.max_violation)
        n_reps += 1
    for kind, n, reflected in (("cyclic", 8, False), ("dihedral", 6, True)):
        G = build_group(kind, n)
        for f in range(0, 4):
            rep = restricted_frequency_rep(G, f, reflected)
            rho = np.stack([rep.rho(g) for g in range(G.order)])
            r = rep_invariants_check(rep, rho)
            worst = max(worst, r.max_violation)
            n_reps += 1
    results.append(_result("rep-invariants", worst, n_reps, 1e-10))

    for kind, n, pid in (("dihedral", 4, "freq:1"), ("cyclic", 8, "freq:1"), ("quaternion", 8, "quat")):
        G = build_group(kind, n)
        results.append(
            intertwiner_identity_check(G, irrep_by_id(G, pid), trials, seed=seed)
        )

    for kind, n in (("cyclic", 8), ("dihedral", 6)):
        G = build_group(kind, n)
        results.append(fourier_roundtrip(G, trials, seed=seed))
        results.append(convolution_theorem_check(G, trials, seed=seed))

    results.append(chi_square_mc_check(np.array([1.0]), 1.0, max(trials * 50, 10000), seed=seed))
    rng = np.random.default_rng(seed)
    results.append(
        chi_square_mc_check(rng.uniform(0.1, 1.0, size=5), 2.0, max(trials * 50, 10000), seed=seed + 1)
    )

    reg4 = regular_representation(build_group("cyclic", 4))
    results.append(mc_tail_check(reg4, reg4, 1.0, max(trials * 10, 2000), seed=seed))

    for kind, n in (("cyclic", 3), ("dihedral", 4), ("quaternion", 8)):
        G = build_group(kind, n)
        if kind == "quaternion":
            input_rep = regular_representation(G)
        else:
            input_rep = restricted_frequency_rep(G, 1, kind == "dihedral")
        net = build_network(G, input_rep, [4, 2], 2, seed=seed)
        for layer in net.layers:
            r = check_equivariance(layer, 1e-10)
            results.append(
                _result(f"layer-equivariance({kind}{n})", r.max_violation, r.trials, 1e-10)
            )
        r = check_equivariance(net, 1e-8, seed=seed)
        results.append(
            _result(f"network-invariance({kind}{n})", r.max_violation, r.trials, 1e-8)
        )

    G = build_group("cyclic", 4)
    net = build_network(G, restricted_frequency_rep(G, 1, False), [4, 2], 2, seed=seed)
    sigma = _admissible_sigma(net)
    rng = np.random.default_rng(_derive_seed(seed, "inputs"))
    X = rng.standard_normal((20, net.input_rep.dim))
    B = float(np.max(np.linalg.norm(X, axis=1)))
    results.append(
        mc_perturbation_check(net, sigma, min(trials, 200), X, B, seed=seed)
    )
    return results


def _result(name: str, violation: float, trials: int, threshold: float):
    from .verify import CheckResult

    return CheckResult(
        name=name, max_violation=violation, trials=trials, threshold=threshold
    )


def _admissible_sigma(net) -> float:
    """A coefficient scale that keeps drawn perturbations admissible."""
    caps = []
    for layer in net.layers:
        thr_unit = tail_threshold(layer.in_rep, layer.out_rep, 1.0, 1.0).threshold
        caps.append(spectral_norm(layer.matrix) / (net.depth * thr_unit))
    return 0.3 * min(caps)


def _cmd_verify(args: argparse.Namespace) -> int:
    results = _verify_suite(args.trials, args.seed)
    all_passed = True
    for r in results:
        print(format_check_result(r))
        all_passed = all_passed and r.passed
    return 0 if all_passed else 1


# ------------------------------------------------------------------- sweep


@dataclass
class SweepConfig:
    """Grid description for a sweep run.

    `sizes` holds max frequencies F for continuous symmetries and
    rotation orders M for discrete ones.  `groups` is a list of
    (kind, N) pairs.  Every cell (size, m, seed, group) trains one
    model and yields one CSV row.
    """

    symmetry: str = "so2"
    sizes: list[int] = field(default_factory=lambda: [6])
    d: int = 6
    groups: list[tuple[str, int]] = field(
        default_factory=lambda: [("cyclic", 1), ("cyclic", 2), ("cyclic", 4), ("cyclic", 8), ("cyclic", 16)]
    )
    m_grid: list[int] = field(default_factory=lambda: [3200])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    gamma: float = 10.0
    widths: list[int] = field(default_factory=lambda: [2048, 512])
    eta: float = 0.5
    delta: float = 0.05
    noise_tangent: float = 0.1
    noise_ambient: float = 0.01
    augment: str = "none"
    random_labels: bool = False
    test_m: int = 10000
    learning_rate: float = 0.01
    max_epochs: int = 800
    batch_size: int = 256
    out_dir: str = "sweep-out"

    def config_hash(self) -> str:
        """Hash of the experimental grid; where it is written is excluded."""
        payload = {k: v for k, v in asdict(self).items() if k != "out_dir"}
        return hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()
        ).hexdigest()[:12]


def _load_sweep_config(args: argparse.Namespace) -> SweepConfig:
    data = {}
    if args.config:
        with open(args.config) as f:
            data = json.load(f)
    cfg = SweepConfig(**{k: v for k, v in data.items()})
    cfg.groups = [(str(k), int(n)) for k, n in cfg.groups]
    for name in (
        "symmetry",
        "gamma",
        "eta",
        "delta",
        "test_m",
        "learning_rate",
        "max_epochs",
        "batch_size",
        "out_dir",
        "d",
    ):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if args.sizes is not None:
        cfg.sizes = list(args.sizes)
    if args.m_grid is not None:
        cfg.m_grid = list(args.m_grid)
    if args.seeds is not None:
        cfg.seeds = list(args.seeds)
    if args.widths is not None:
        cfg.widths = list(args.widths)
    if args.groups is not None:
        cfg.groups = [_parse_group(s) for s in args.groups]
    if args.random_labels:
        cfg.random_labels = True
    return cfg


def _parse_group(text: str) -> tuple[str, int]:
    """Parse "cyclic:8" / "dihedral:3" / "quaternion" into (kind, N)."""
    if ":" in text:
        kind, n = text.split(":", 1)
        return kind, int(n)
    return text, 8 if text == "quaternion" else 1


def _sweep_datasets(cfg: SweepConfig, size: int, m: int, seed: int):
    """Build (spec, train, test) for one cell; shared across groups."""
    continuous = cfg.symmetry in ("so2", "o2")
    spec = generate_synthetic(
        cfg.symmetry,
        cfg.d if continuous else size,
        max_frequency=size if continuous else None,
        seed=_derive_seed(seed, f"spec:{cfg.symmetry}:{size}"),
        noise_sigma_tangent=cfg.noise_tangent,
        noise_sigma_ambient=cfg.noise_ambient,
    )
    train_set = sample(spec, m, cfg.augment, _derive_seed(seed, "train"))
    if cfg.random_labels:
        train_set = randomize_labels(train_set, _derive_seed(seed, "labels"))
    test_set = sample(spec, cfg.test_m, "group", _derive_seed(seed, "test"))
    return spec, train_set, test_set


def run_sweep(cfg: SweepConfig) -> dict:
    """Train and bound every grid cell; write rows.csv and summary.json.

    Returns {"rows": ..., "csv_path": ..., "summary_path": ..., "summary": ...}.
    MarginNotReached cells are recorded with margin_reached=0 rather
    than dropped.
    """
    import os

    os.makedirs(cfg.out_dir, exist_ok=True)
    chash = cfg.config_hash()
    rows = []
    dataset_cache: dict = {}
    for size in cfg.sizes:
        for m in cfg.m_grid:
            for seed in cfg.seeds:
                key = (size, m, seed)
                if key not in dataset_cache:
                    dataset_cache[key] = _sweep_datasets(cfg, size, m, seed)
                spec, train_set, test_set = dataset_cache[key]
                for kind, N in cfg.groups:
                    G = build_group(kind, N)
                    input_rep = input_rep_for(spec, G)
                    channels = [channels_for_width(G, w) for w in cfg.widths]
                    net = build_network(
                        G, input_rep, channels, 2,
                        seed=_derive_seed(seed, f"model:{kind}:{N}"),
                    )
                    tcfg = TrainConfig(
                        gamma=cfg.gamma,
                        max_epochs=cfg.max_epochs,
                        learning_rate=cfg.learning_rate,
                        batch_size=cfg.batch_size,
                        seed=_derive_seed(seed, f"shuffle:{kind}:{N}"),
                    )
                    try:
                        result = train(net, train_set.X, train_set.y, tcfg)
                        reached = True
                        epochs = result.epochs
                        margin_acc = result.margin_accuracy
                    except MarginNotReached as exc:
                        reached = False
                        epochs = exc.epochs
                        margin_acc = exc.achieved
                    train_err = empirical_margin_loss(net, train_set.X, train_set.y, 0.0)
                    margin_loss = empirical_margin_loss(
                        net, train_set.X, train_set.y, cfg.gamma
                    )
                    test_err = empirical_margin_loss(net, test_set.X, test_set.y, 0.0)
                    report = compute_report(
                        BoundInputs(
                            net=net,
                            m=len(train_set),
                            gamma=cfg.gamma,
                            B=train_set.B,
                            train_margin_loss=margin_loss,
                            delta=cfg.delta,
                            eta=cfg.eta,
                            train_err=train_err,
                            test_err=test_err,
                        )
                    )
                    rows.append(
                        {
                            "config_hash": chash,
                            "symmetry": cfg.symmetry,
                            "size": size,
                            "widths": "x".join(str(w) for w in cfg.widths),
                            "channels": "x".join(str(c) for c in channels),
                            "seed": seed,
                            "epochs": epochs,
                            "margin_reached": int(reached),
                            "margin_accuracy": margin_acc,
                            "random_labels": int(cfg.random_labels),
                            "report": report,
                        }
                    )
    rows.sort(
        key=lambda r: (
            r["symmetry"],
            r["size"],
            r["report"].m,
            r["report"].group_kind,
            r["report"].N,
            r["seed"],
        )
    )
    depth = len(cfg.widths) + 1
    csv_path = os.path.join(cfg.out_dir, "rows.csv")
    prefix = [
        "config_hash",
        "symmetry",
        "size",
        "widths",
        "channels",
        "seed",
        "epochs",
        "margin_reached",
        "margin_accuracy",
        "random_labels",
    ]
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(prefix + csv_header(depth))
        for row in rows:
            writer.writerow(
                [
                    row["config_hash"],
                    row["symmetry"],
                    str(row["size"]),
                    row["widths"],
                    row["channels"],
                    str(row["seed"]),
                    str(row["epochs"]),
                    str(row["margin_reached"]),
                    repr(float(row["margin_accuracy"])),
                    str(row["random_labels"]),
                ]
                + report_to_csv_row(row["report"])
            )
    summary = _sweep_summary(rows)
    summary_path = os.path.join(cfg.out_dir, "summary.json")
    with open(summary_path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    return {
        "rows": rows,
        "csv_path": csv_path,
        "summary_path": summary_path,
        "summary": summary,
    }


def _sweep_summary(rows: list[dict]) -> dict:
    """Correlations of bounds and group size against generalization error.

    Aggregates seeds into per-group means within each (symmetry, size, m)
    cell, then reports Spearman correlations and the least-squares slope
    of GE against 1/sqrt|H|.
    """
    cells: dict = {}
    for row in rows:
        rep = row["report"]
        cell = cells.setdefault((row["symmetry"], row["size"], rep.m), {})
        group = cell.setdefault((rep.group_kind, rep.N, rep.order), [])
        group.append(rep)
    summary = {}
    for (symmetry, size, m), groups in sorted(cells.items()):
        orders = []
        ge = []
        b_main = []
        b_alt = []
        sum_sqrt_m = []
        per_group = {}
        for (kind, N, order), reports in sorted(groups.items(), key=lambda kv: kv[0][2]):
            orders.append(order)
            ge.append(float(np.mean([r.generalization_error for r in reports])))
            b_main.append(float(np.mean([r.bound_main for r in reports])))
            b_alt.append(float(np.mean([r.bound_alt for r in reports])))
            sum_sqrt_m.append(
                float(
                    np.mean(
                        [sum(math.sqrt(v) for v in r.m_factors) for r in reports]
                    )
                )
            )
            per_group[f"{kind}:{N}"] = {
                "order": order,
                "GE": ge[-1],
                "bound_main": b_main[-1],
                "bound_alt": b_alt[-1],
            }
        inv_sqrt = [1.0 / math.sqrt(o) for o in orders]
        entry = {"per_group": per_group}
        if len(orders) >= 2:
            entry["spearman_bound_main_vs_ge"] = _spearman(b_main, ge)
            entry["spearman_bound_alt_vs_ge"] = _spearman(b_alt, ge)
            entry["spearman_sum_sqrt_m_vs_ge"] = _spearman(sum_sqrt_m, ge)
            entry["spearman_ge_vs_inv_sqrt_order"] = _spearman(ge, inv_sqrt)
            slope, intercept = np.polyfit(inv_sqrt, ge, 1)
            entry["ge_vs_inv_sqrt_order_slope"] = float(slope)
            entry["ge_vs_inv_sqrt_order_intercept"] = float(intercept)
        summary[f"symmetry={symmetry},size={size},m={m}"] = entry
    return summary


def _spearman(a: list[float], b: list[float]) -> float:
    rho = spearmanr(a, b).statistic
    return float(rho) if rho is not None else float("nan")


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_sweep_config(args)
    out = run_sweep(cfg)
    n = len(out["rows"])
    failed = sum(1 for r in out["rows"] if not r["margin_reached"])
    print(f"{n} rows -> {out['csv_path']} ({failed} cells missed the margin target)")
    print(f"summary -> {out['summary_path']}")
    return 0


# -------------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equibound",
        description="Equivariant networks with PAC-Bayesian generalization bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset")
    p.add_argument("--symmetry", required=True, choices=("so2", "o2", "cyclic", "dihedral"))
    p.add_argument("--d", type=int, default=None, help="circles/pairs (continuous)")
    p.add_argument("--f", type=int, default=None, help="max frequency (continuous)")
    p.add_argument("--m-order", type=int, default=None, help="rotation order M (discrete)")
    p.add_argument("--m", type=int, default=3200, help="training samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-tangent", type=float, default=0.1)
    p.add_argument("--noise-ambient", type=float, default=0.01)
    p.add_argument("--augment", choices=("none", "group"), default="none")
    p.add_argument("--random-labels", action="store_true")
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", default=None)
    p.add_argument("--test-m", type=int, default=10000)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="train an equivariant network")
    p.add_argument("--data", required=True)
    p.add_argument("--group", required=True, choices=GROUP_KINDS)
    p.add_argument("--n", type=int, default=1, help="rotation order of the group")
    p.add_argument("--widths", type=int, nargs="+", default=[2048, 512])
    p.add_argument("--gamma", type=float, default=10.0)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=800)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="checkpoint path (JSON)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("bound", help="compute bounds for a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="training dataset file")
    p.add_argument("--test-data", default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--as-written", action="store_true")
    p.add_argument("--csv", default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("verify", help="run oracle and Monte-Carlo checks")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sweep", help="run a sweep grid from a JSON config")
    p.add_argument("--config", default=None)
    p.add_argument("--symmetry", choices=("so2", "o2", "cyclic", "dihedral"), default=None)
    p.add_argument("--sizes", type=int, nargs="+", default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--groups", nargs="+", default=None, help='e.g. cyclic:8 dihedral:3')
    p.add_argument("--m-grid", type=int, nargs="+", default=None, dest="m_grid")
    p.add_argument("--seeds", type=int, nargs="+", default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--widths", type=int, nargs="+", default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--test-m", type=int, default=None, dest="test_m")
    p.add_argument("--learning-rate", type=float, default=None, dest="learning_rate")
    p.add_argument("--max-epochs", type=int, default=None, dest="max_epochs")
    p.add_argument("--batch-size", type=int, default=None, dest="batch_size")
    p.add_argument("--random-labels", action="store_true")
    p.add_argument("--out-dir", default=None, dest="out_dir")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MarginNotReached as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, FileNotFoundError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
