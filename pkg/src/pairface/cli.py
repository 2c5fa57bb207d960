"""Command-line entry point.

    pairface run      -- full benchmark: CSVs, summary table, metadata
    pairface plotdata -- turn an aggregate CSV into plot-ready series files
    pairface scatter  -- 2-D principal-component point clouds, clean + noisy
    pairface prep     -- fit a PCA model on a data source and save it

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 training
divergence.
"""

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (DatasetError, LabeledDataset, fig1_preset,
                      load_manifest, load_orl_dataset)
from .evaluation import (ClassTooSmall, EvalError, ExperimentFailure,
                         NoiseSpec, add_noise, multiclass_system,
                         pairwise_system, run_experiment)
from .mlp import DivergedToNonFinite, TrainConfig
from .pca import PcaError, fit_pca, project, save_pca
from .pgm import PgmError
from .seeding import derive_seed

DEFAULT_ALPHAS = "0.0,0.1,0.3,0.5,0.7,0.9,1.1,1.3"


class ConfigError(Exception):
    pass


class SchemaMismatch(Exception):
    pass


def _add_data_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", metavar="DIR",
                     help="ORL-style directory of s<k>/ PGM folders")
    src.add_argument("--manifest", metavar="FILE",
                     help="CSV manifest with header path,label")
    src.add_argument("--synthetic", metavar="PRESET", choices=["fig1"],
                     help="built-in synthetic dataset (fig1: four 2-D blobs)")
    p.add_argument("--subsample", type=int, default=1,
                   help="keep every k-th pixel per axis (default 1)")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="pairface",
        description="Pairwise vs multiclass neural-net noise-robustness "
                    "benchmark on PCA features.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the benchmark grid")
    _add_data_args(run)
    run.add_argument("--config", metavar="FILE",
                     help="key=value file; CLI flags override it")
    run.add_argument("--systems", default="pairwise,multiclass",
                     help="comma list from {pairwise,multiclass}")
    run.add_argument("--alphas", default=DEFAULT_ALPHAS,
                     help=f"comma list of noise levels (default {DEFAULT_ALPHAS})")
    run.add_argument("--folds", type=int, default=5)
    dim = run.add_mutually_exclusive_group()
    dim.add_argument("--pca-dim", type=int, default=None,
                     help="feature dimension (default min(30, d))")
    dim.add_argument("--explained-var", type=float, default=None,
                     help="pick the smallest dimension reaching this "
                          "explained-variance fraction")
    run.add_argument("--hidden-binary", type=int, default=8)
    run.add_argument("--hidden-multi", type=int, default=32)
    run.add_argument("--lr", type=float, default=0.05)
    run.add_argument("--epochs", type=int, default=200)
    run.add_argument("--batch", type=int, default=16)
    run.add_argument("--l2", type=float, default=1e-4)
    run.add_argument("--noise-scope", default="train_and_test",
                     choices=["train_and_test", "test_only"])
    run.add_argument("--no-standardize", action="store_true",
                     help="skip per-component unit-variance scaling")
    run.add_argument("--hard-vote", action="store_true",
                     help="combine sign(f) instead of raw tanh outputs")
    run.add_argument("--pca-global", action="store_true",
                     help="fit PCA once on all data instead of per fold")
    run.add_argument("--nested-noise", action="store_true",
                     help="rescale one shared noise draw across alphas")
    run.add_argument("--threads", type=int, default=1,
                     help="worker threads for pairwise training")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default="out", help="output directory")

    plot = sub.add_parser("plotdata", help="aggregate CSV -> series files")
    plot.add_argument("aggregate", help="aggregate CSV from `run`")
    plot.add_argument("--out", default="out")

    sc = sub.add_parser("scatter", help="first-two-component point clouds")
    _add_data_args(sc)
    sc.add_argument("--alpha", type=float, default=0.5)
    sc.add_argument("--no-standardize", action="store_true")
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--out", default="out")

    prep = sub.add_parser("prep", help="fit and save a PCA model")
    _add_data_args(prep)
    prep.add_argument("--pca-dim", type=int, default=None)
    prep.add_argument("--no-standardize", action="store_true")
    prep.add_argument("--seed", type=int, default=0)
    prep.add_argument("--out", default="pca_model.json")
    return ap


def _apply_config_file(args):
    """Overlay key=value file values under explicit CLI flags."""
    path = Path(args.config)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    explicit = {a.lstrip("-").split("=")[0].replace("-", "_")
                for a in sys.argv if a.startswith("--")}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if attr in explicit:
            continue
        current = getattr(args, attr)
        if isinstance(current, bool):
            setattr(args, attr, value.lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(args, attr, int(value))
        elif isinstance(current, float):
            setattr(args, attr, float(value))
        else:
            setattr(args, attr, value)


def _load_data(args) -> LabeledDataset:
    if args.synthetic:
        return fig1_preset(seed=getattr(args, "seed", 0))
    if args.manifest:
        return load_manifest(args.manifest, subsample=args.subsample)
    return load_orl_dataset(args.data, subsample=args.subsample)


def _parse_alphas(text):
    try:
        alphas = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"bad alpha list {text!r}") from None
    if not alphas:
        raise ConfigError("empty alpha list")
    if any(a < 0 for a in alphas):
        raise ConfigError(f"negative alpha in {alphas}")
    return alphas


def _resolve_systems(text, cfg, args):
    names = [s.strip() for s in text.split(",") if s.strip()]
    specs = []
    for name in names:
        if name == "pairwise":
            specs.append(pairwise_system(cfg, hidden=args.hidden_binary,
                                         hard_vote=args.hard_vote,
                                         n_jobs=args.threads))
        elif name == "multiclass":
            specs.append(multiclass_system(cfg, hidden=args.hidden_multi))
        else:
            raise ConfigError(f"unknown system {name!r}")
    if not specs:
        raise ConfigError("no systems selected")
    return specs


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def cmd_run(args) -> int:
    if args.config:
        _apply_config_file(args)
    alphas = _parse_alphas(args.alphas)
    if args.folds < 2:
        raise ConfigError(f"--folds must be >= 2, got {args.folds}")
    cfg = TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                      batch_size=args.batch, seed=args.seed, l2=args.l2)
    systems = _resolve_systems(args.systems, cfg, args)

    t0 = time.time()
    data = _load_data(args)
    if args.explained_var is not None:
        m = ("var", args.explained_var)
    elif args.pca_dim is not None:
        m = args.pca_dim
    else:
        m = min(30, data.dim)

    report = run_experiment(
        data, systems, alphas, k=args.folds, m=m, seed=args.seed,
        noise_scope=args.noise_scope, standardize=not args.no_standardize,
        pca_per_fold=not args.pca_global, nested_noise=args.nested_noise)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_folds_csv(out / "folds.csv", report)
    _write_aggregate_csv(out / "aggregate.csv", report)
    (out / "summary.txt").write_text(render_summary(report), encoding="utf-8")
    _write_metadata(out / "metadata.txt", args, report, time.time() - t0)
    print(render_summary(report))
    print(f"results written to {out}/")
    return 0


def _write_folds_csv(path, report):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["system", "alpha", "fold", "accuracy"])
        for row in report.rows:
            for fold, acc in enumerate(row.fold_accuracies, 1):
                w.writerow([row.system, repr(row.alpha), fold, repr(acc)])


def _write_aggregate_csv(path, report):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["system", "alpha", "mean", "two_sigma"])
        for row in report.rows:
            w.writerow([row.system, repr(row.alpha),
                        repr(row.mean), repr(row.two_sigma)])


def render_summary(report) -> str:
    """Human-readable table: one mean and 2-sigma line per system."""
    alphas = []
    for row in report.rows:
        if row.alpha not in alphas:
            alphas.append(row.alpha)
    by_sys = {}
    for row in report.rows:
        by_sys.setdefault(row.system, {})[row.alpha] = row
    lines = ["alpha     " + "".join(f"{a:>8.1f}" for a in alphas)]
    for name, cells in by_sys.items():
        mean_line = f"{name}, mean   "
        sig_line = f"{name}, 2sigma "
        for a in alphas:
            row = cells.get(a)
            mean_line += f"{row.mean:>8.3f}" if row else "       -"
            sig_line += f"  {row.two_sigma:>6.3f}" if row else "       -"
        lines.append(mean_line)
        lines.append(sig_line)
    return "\n".join(lines) + "\n"


def _write_metadata(path, args, report, wall_seconds):
    lines = [f"pairface_version={__version__}",
             f"numpy_version={np.__version__}",
             f"wall_seconds={wall_seconds:.2f}"]
    for key, value in sorted(vars(args).items()):
        if key in ("command", "func"):
            continue
        lines.append(f"{key}={value}")
    for key, value in sorted(report.metadata.items(), key=lambda kv: kv[0]):
        lines.append(f"result.{key}={value}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_plotdata(args) -> int:
    rows = []
    with open(args.aggregate, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["system", "alpha", "mean", "two_sigma"]:
            raise SchemaMismatch(f"line 1: bad header {header}")
        for lineno, row in enumerate(reader, 2):
            if len(row) != 4:
                raise SchemaMismatch(f"line {lineno}: expected 4 fields")
            try:
                rows.append((row[0], row[1], float(row[2]), float(row[3])))
            except ValueError:
                raise SchemaMismatch(
                    f"line {lineno}: non-numeric mean/two_sigma") from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if not rows:
        print("warning: no data rows in aggregate CSV", file=sys.stderr)
        return 0
    by_sys = {}
    for system, alpha, mean, two_sigma in rows:
        by_sys.setdefault(system, []).append((alpha, mean, two_sigma))
    for system, series in by_sys.items():
        lines = [f"{alpha} {_fmt(mean)} {_fmt(mean - ts)} {_fmt(mean + ts)}"
                 for alpha, mean, ts in series]
        (out / f"series_{system}.txt").write_text(
            "\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {out / f'series_{system}.txt'}")
    return 0


def cmd_scatter(args) -> int:
    data = _load_data(args)
    if args.alpha < 0:
        raise ConfigError(f"negative alpha {args.alpha}")
    model = fit_pca(data.X, 2, standardize=not args.no_standardize)
    clean = project(model, data.X)
    noisy = add_noise(clean, NoiseSpec(args.alpha,
                                       derive_seed(args.seed, "scatter")))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for tag, pts in (("clean", clean), ("noisy", noisy)):
        for c in range(1, data.num_classes + 1):
            sel = pts[data.y == c]
            lines = [f"{p1:.6f} {p2:.6f}" for p1, p2 in sel]
            (out / f"scatter_{tag}_class{c}.txt").write_text(
                "\n".join(lines) + "\n", encoding="utf-8")
    print(f"scatter files written to {out}/ (alpha={args.alpha})")
    return 0


def cmd_prep(args) -> int:
    data = _load_data(args)
    m = args.pca_dim if args.pca_dim is not None else min(30, data.dim)
    model = fit_pca(data.X, m, standardize=not args.no_standardize)
    save_pca(model, args.out)
    print(f"PCA model (m={m}, d={data.dim}) written to {args.out}")
    return 0


_COMMANDS = {"run": cmd_run, "plotdata": cmd_plotdata,
             "scatter": cmd_scatter, "prep": cmd_prep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SchemaMismatch as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (DatasetError, PgmError, PcaError, ClassTooSmall, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except ExperimentFailure as e:
        print(f"error: training failed: {e}", file=sys.stderr)
        return 4
    except (DivergedToNonFinite, EvalError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
