"""Command-line interface.

Subcommands: ``gen`` (synthetic datasets), ``fit`` (fixed term subset),
``discover`` (best-subset and/or network-path search), ``sweep``
(regularization grids), ``compare-classics`` (classic models vs the
discovered winners) and ``report`` (re-render a bundle from a saved model
file).  All numeric output is locale-independent; exit status is 0 only
when a complete bundle or file was produced.
"""

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .data import Dataset, generate_synthetic, load_csv, save_csv, SyntheticSpec
from .energy import (
    Demiray,
    Gent,
    ModelSpec,
    MooneyRivlin,
    NeoHookean,
    TermParams,
    classic_to_spec,
    load_model,
)
from .estimators import _classic_constants, _FAMILIES
from .exceptions import DataError, HyperdiscoveryError
from .fit import AdamConfig, FitConfig, evaluate_model, fit_subset
from .kinematics import LoadingMode
from .report import ReportColumn, write_bundle, write_sweep_bundle
from .select import (
    SelectionCriterion,
    best_subset_discover,
    elastic_grid,
    hyperparameter_sweep,
    l1_grid,
    l2_grid,
    nn_discover,
)

__all__ = ["RunConfig", "main"]


@dataclass(frozen=True)
class RunConfig:
    """Echo of the flags that shaped a run, for the bundle summary."""

    command: str
    dataset: str
    train: str
    out: str
    extras: tuple[tuple[str, str], ...] = ()

    def echo(self) -> dict[str, str]:
        base = {"command": self.command, "input": self.dataset,
                "train": self.train}
        base.update({key: value for key, value in self.extras})
        return base


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise DataError(f"grid must look like start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise DataError(f"malformed grid {text!r}") from None
    if count < 2:
        raise DataError("grid needs at least 2 points")
    return np.linspace(start, stop, count)


def _parse_term(text: str) -> tuple[int, TermParams]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise DataError(f"term must look like index:outer[:inner], got {text!r}")
    try:
        index = int(parts[0])
        outer = float(parts[1])
        inner = float(parts[2]) if len(parts) == 3 else None
    except ValueError:
        raise DataError(f"malformed term {text!r}") from None
    return index, TermParams(outer, inner)


def _parse_indices(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(piece) for piece in text.split(","))
    except ValueError:
        raise DataError(f"malformed index list {text!r}") from None


def _train_modes(dataset: Dataset, train: str) -> tuple[LoadingMode, ...]:
    if train == "all":
        return dataset.modes
    return (LoadingMode(train),)


def _load_for_training(path: str, train: str):
    dataset = load_csv(path)
    train_modes = _train_modes(dataset, train)
    return dataset, dataset.only(train_modes), train_modes


def _fit_config(args) -> FitConfig:
    return FitConfig(restarts=args.restarts, seed=args.seed)


def _adam_config(args) -> AdamConfig:
    return AdamConfig(alpha1=args.alpha1, alpha2=args.alpha2,
                      learning_rate=args.learning_rate, epochs=args.epochs,
                      seed=args.seed)


# ---------------------------------------------------------------------------
# Commands.

def cmd_gen(args) -> int:
    coefficients: dict[int, TermParams] = {}

    def merge(spec: ModelSpec):
        for kind, params in spec.terms:
            if kind.index in coefficients:
                raise DataError(f"term {kind.index} specified more than once")
            coefficients[kind.index] = params

    if args.neo_hookean is not None:
        merge(classic_to_spec(NeoHookean(args.neo_hookean)))
    if args.mooney_rivlin is not None:
        merge(classic_to_spec(MooneyRivlin(*args.mooney_rivlin)))
    if args.demiray is not None:
        merge(classic_to_spec(Demiray(*args.demiray)))
    if args.gent is not None:
        merge(classic_to_spec(Gent(*args.gent)))
    for text in args.term:
        index, params = _parse_term(text)
        if index in coefficients:
            raise DataError(f"term {index} specified more than once")
        coefficients[index] = params
    if not coefficients:
        raise DataError("no truth model given; use a classic flag or --term")
    truth = ModelSpec(coefficients)

    grids: dict[LoadingMode, np.ndarray] = {}

    def add_grid(mode: LoadingMode, values: np.ndarray):
        if mode in grids:
            raise DataError(f"grid for mode '{mode.value}' given twice")
        grids[mode] = values

    if args.uniaxial is not None:
        full = _parse_grid(args.uniaxial)
        compression = full[full < 1.0]
        tension = full[full >= 1.0]
        if len(compression) >= 2:
            add_grid(LoadingMode.COMPRESSION, compression)
        if len(tension) >= 2:
            add_grid(LoadingMode.TENSION, tension)
        if len(compression) == 1 or len(tension) == 1:
            raise DataError(
                "--uniaxial grid leaves a single point on one side of "
                "lambda = 1; widen the grid or use --tension/--compression")
    if args.tension is not None:
        add_grid(LoadingMode.TENSION, _parse_grid(args.tension))
    if args.compression is not None:
        add_grid(LoadingMode.COMPRESSION, _parse_grid(args.compression))
    if args.shear is not None:
        add_grid(LoadingMode.SHEAR, _parse_grid(args.shear))
    if not grids:
        raise DataError("no control grid given; use --uniaxial/--tension/"
                        "--compression/--shear")

    dataset = generate_synthetic(SyntheticSpec(
        truth=truth, grids=grids, noise=args.noise, seed=args.seed))
    save_csv(args.output, dataset)
    print(f"wrote {dataset.n_points} points to {args.output}")
    return 0


def cmd_fit(args) -> int:
    dataset, train_ds, train_modes = _load_for_training(args.dataset, args.train)
    subset = _parse_indices(args.terms)
    result = fit_subset(train_ds, subset, _fit_config(args))
    column = ReportColumn(label="mr", result=result)
    run = RunConfig("fit", args.dataset, args.train, args.out, (
        ("terms", args.terms), ("restarts", str(args.restarts)),
        ("seed", str(args.seed))))
    write_bundle(args.out, dataset, train_ds, train_modes, [column], run.echo())
    print(f"wrote bundle to {args.out}")
    return 0


def cmd_discover(args) -> int:
    dataset, train_ds, train_modes = _load_for_training(args.dataset, args.train)
    catalog = _parse_indices(args.catalog) if args.catalog else None
    columns = []
    if args.method in ("mr", "both"):
        discovery = best_subset_discover(
            train_ds, SelectionCriterion(args.criterion), _fit_config(args),
            catalog=catalog)
        columns.append(ReportColumn(label="mr", result=discovery.best,
                                    discovery=discovery))
    if args.method in ("nn", "both"):
        discovery = nn_discover(train_ds, _adam_config(args),
                                prune_threshold=args.prune,
                                prune_on=args.prune_on)
        columns.append(ReportColumn(label="nn", result=discovery.best,
                                    discovery=discovery))
    run = RunConfig("discover", args.dataset, args.train, args.out, (
        ("method", args.method), ("criterion", args.criterion),
        ("alpha1", str(args.alpha1)), ("alpha2", str(args.alpha2)),
        ("seed", str(args.seed)), ("restarts", str(args.restarts)),
        ("prune", str(args.prune)), ("epochs", str(args.epochs))))
    write_bundle(args.out, dataset, train_ds, train_modes, columns, run.echo())
    print(f"wrote bundle to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    dataset, train_ds, train_modes = _load_for_training(args.dataset, args.train)
    try:
        values = tuple(float(piece) for piece in args.values.split(","))
    except ValueError:
        raise DataError(f"malformed penalty list {args.values!r}") from None
    maker = {"l1": l1_grid, "l2": l2_grid, "elastic": elastic_grid}[args.penalty]
    grid = maker(values)
    rows = hyperparameter_sweep(train_ds, grid, _adam_config(args),
                                prune_threshold=args.prune)
    run = RunConfig("sweep", args.dataset, args.train, args.out, (
        ("penalty", args.penalty), ("values", args.values),
        ("seed", str(args.seed)), ("epochs", str(args.epochs)),
        ("prune", str(args.prune))))
    write_sweep_bundle(args.out, train_ds, rows, run.echo())
    print(f"wrote sweep to {args.out}")
    return 0


def cmd_compare_classics(args) -> int:
    dataset, train_ds, train_modes = _load_for_training(args.dataset, args.train)
    columns = []
    for family in ("neo-hookean", "mooney-rivlin", "demiray", "gent"):
        result = fit_subset(train_ds, _FAMILIES[family], _fit_config(args))
        columns.append(ReportColumn(
            label=family, result=result,
            constants=_classic_constants(family, result.model)))
    catalog = _parse_indices(args.catalog) if args.catalog else None
    discovery = best_subset_discover(
        train_ds, SelectionCriterion(args.criterion), _fit_config(args),
        catalog=catalog)
    columns.append(ReportColumn(label="mr", result=discovery.best,
                                discovery=discovery))
    discovery = nn_discover(train_ds, _adam_config(args),
                            prune_threshold=args.prune, prune_on=args.prune_on)
    columns.append(ReportColumn(label="nn", result=discovery.best,
                                discovery=discovery))
    run = RunConfig("compare-classics", args.dataset, args.train, args.out, (
        ("criterion", args.criterion), ("seed", str(args.seed)),
        ("restarts", str(args.restarts)), ("alpha1", str(args.alpha1)),
        ("alpha2", str(args.alpha2)), ("epochs", str(args.epochs))))
    write_bundle(args.out, dataset, train_ds, train_modes, columns, run.echo())
    print(f"wrote bundle to {args.out}")
    return 0


def cmd_report(args) -> int:
    dataset, train_ds, train_modes = _load_for_training(args.dataset, args.train)
    model = load_model(args.model)
    result = evaluate_model(train_ds, model)
    label = args.label
    column = ReportColumn(label=label, result=result)
    run = RunConfig("report", args.dataset, args.train, args.out, (
        ("model", args.model), ("label", label)))
    write_bundle(args.out, dataset, train_ds, train_modes, [column], run.echo())
    print(f"wrote bundle to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly.

def _add_train(parser):
    parser.add_argument("--train", choices=["ten", "com", "shr", "all"],
                        default="all",
                        help="train on one mode or on all present modes")


def _add_fit_flags(parser):
    parser.add_argument("--restarts", type=int, default=8,
                        help="restart count of the subset fitter")
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed")


def _add_adam_flags(parser):
    parser.add_argument("--alpha1", type=float, default=0.0,
                        help="L1 penalty weight of the network path")
    parser.add_argument("--alpha2", type=float, default=0.0,
                        help="L2 penalty weight of the network path")
    parser.add_argument("--epochs", type=int, default=20000,
                        help="training epochs of the network path")
    parser.add_argument("--learning-rate", type=float, default=1e-3,
                        dest="learning_rate", help="Adam learning rate")
    parser.add_argument("--prune", type=float, default=1e-3,
                        help="relative pruning threshold of the network path")
    parser.add_argument("--prune-on", choices=["energy", "weight"],
                        default="energy", dest="prune_on",
                        help="prune by energy contribution or by raw weight")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperdiscovery",
        description="Discover sparse hyperelastic models from stress data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p.add_argument("--neo-hookean", type=float, metavar="MU")
    p.add_argument("--mooney-rivlin", nargs=2, type=float, metavar=("MU", "C2"))
    p.add_argument("--demiray", nargs=2, type=float, metavar=("MU", "BETA"))
    p.add_argument("--gent", nargs=2, type=float, metavar=("MU", "ETA"))
    p.add_argument("--term", action="append", default=[],
                   metavar="IDX:OUTER[:INNER]",
                   help="add one catalog term to the truth model (repeatable)")
    p.add_argument("--uniaxial", metavar="A:B:N",
                   help="stretch grid split into com/ten at lambda = 1")
    p.add_argument("--tension", metavar="A:B:N")
    p.add_argument("--compression", metavar="A:B:N")
    p.add_argument("--shear", metavar="A:B:N")
    p.add_argument("--noise", type=float, default=0.0,
                   help="relative Gaussian noise level")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, metavar="FILE")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="fit a fixed term subset")
    p.add_argument("dataset")
    p.add_argument("--terms", required=True, metavar="IDX[,IDX...]")
    _add_train(p)
    _add_fit_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("discover", help="search for the best sparse model")
    p.add_argument("dataset")
    p.add_argument("--method", choices=["mr", "nn", "both"], default="both")
    p.add_argument("--criterion", choices=["bic", "aic", "aicc", "adjr2"],
                   default="bic")
    p.add_argument("--catalog", metavar="IDX[,IDX...]",
                   help="restrict the subset search to these terms")
    _add_train(p)
    _add_fit_flags(p)
    _add_adam_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("sweep", help="sweep L1/L2 penalties of the network path")
    p.add_argument("dataset")
    p.add_argument("--penalty", choices=["l1", "l2", "elastic"], default="l1")
    p.add_argument("--values", default="0,0.01,0.1,1",
                   metavar="A[,A...]", help="penalty weights to visit")
    _add_train(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=20000)
    p.add_argument("--learning-rate", type=float, default=1e-3,
                   dest="learning_rate")
    p.add_argument("--prune", type=float, default=1e-3)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_sweep, alpha1=0.0, alpha2=0.0)

    p = sub.add_parser("compare-classics",
                       help="classic models vs the discovered winners")
    p.add_argument("dataset")
    p.add_argument("--criterion", choices=["bic", "aic", "aicc", "adjr2"],
                   default="bic")
    p.add_argument("--catalog", metavar="IDX[,IDX...]")
    _add_train(p)
    _add_fit_flags(p)
    _add_adam_flags(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_compare_classics)

    p = sub.add_parser("report", help="re-render a bundle from a saved model")
    p.add_argument("dataset")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--label", default="model")
    _add_train(p)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HyperdiscoveryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
