"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import axioms as ax
from .baselines import (
    ConstantClassifier,
    KNNClassifier,
    LinearThresholdClassifier,
    QiiConfig,
    counterfactual_vector,
    lime_influence,
    parzen_influence,
    qii_influence,
)
from .core import (
    CapacityError,
    DegenerateError,
    DomainError,
    FeatureKind,
    InfluenceVector,
    ModeError,
    SchemaError,
    WeightKernel,
    encode_categorical,
)
from .formats import (
    DataError,
    compare_measures,
    influence_to_json,
    load_csv,
    load_image_dir,
    read_influence_json,
    read_pgm,
    render_influence_map,
    shift_poi,
    write_pgm,
    write_text,
)
from .games import (
    GameFormatError,
    banzhaf,
    cost_sharing_influence,
    load_game,
    psi_influence,
    shapley,
    verify_psi_banzhaf,
)
from .mim import mim_influence, mim_regression_influence

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

MEASURES = ("mim", "mim-reg", "parzen", "lime", "counterfactual", "qii")
AXIOM_MEASURES = ("mim", "parzen", "lime", "counterfactual")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_data_args(p):
    src = p.add_argument_group("input data")
    src.add_argument("--data", help="CSV file with a header row")
    src.add_argument("--label-column", default="label")
    src.add_argument("--categorical", default="", help="comma-separated categorical column names")
    src.add_argument("--drop", default="", help="comma-separated columns to ignore")
    src.add_argument("--mode", choices=("binary", "regression"), default="binary")
    src.add_argument("--images", help="directory of P5 PGM images (with --manifest)")
    src.add_argument("--manifest", help="CSV of filename,label for --images")
    p.add_argument("--poi", type=int, default=0, help="0-based index of the point of interest")


def _split(s: str) -> list[str]:
    return [c.strip() for c in s.split(",") if c.strip()]


def _load(args):
    if bool(args.data) == bool(args.images):
        raise UsageError("give exactly one of --data or --images")
    if args.images:
        if not args.manifest:
            raise UsageError("--images needs --manifest")
        ds, _ = load_image_dir(args.images, args.manifest, mode=args.mode)
    else:
        ds = load_csv(args.data, args.label_column, _split(args.categorical), args.mode, _split(args.drop))
    if any(k is FeatureKind.CATEGORICAL for k in ds.schema):
        ds = encode_categorical(ds, args.poi)
    return ds


def _compute(args) -> int:
    ds = _load(args)
    poi = ds.check_index(args.poi)
    kernel = WeightKernel(args.kernel)
    m = args.measure
    if m == "mim":
        phi = mim_influence(ds, poi, kernel, deterministic=args.deterministic)
        params = {"kernel": args.kernel}
    elif m == "mim-reg":
        phi = mim_regression_influence(ds, poi, kernel, deterministic=args.deterministic)
        params = {"kernel": args.kernel}
    elif m == "parzen":
        phi = parzen_influence(ds, poi, args.sigma)
        params = {"sigma": args.sigma}
    elif m == "lime":
        phi = lime_influence(ds, poi, args.rho)
        params = {"rho": args.rho}
    elif m == "counterfactual":
        phi = InfluenceVector(counterfactual_vector(ds, args.cf_tol), poi)
        params = {"tol": args.cf_tol}
    else:
        if args.classifier == "knn":
            clf = KNNClassifier(ds, args.k)
        elif args.classifier == "linear":
            w = [float(v) for v in _split(args.weights)] or [1.0] * ds.n
            if len(w) != ds.n:
                raise UsageError(f"--weights needs {ds.n} values")
            clf = LinearThresholdClassifier(w, args.threshold)
        else:
            clf = ConstantClassifier(args.constant)
        cfg = QiiConfig(args.qii_mode, args.samples, args.seed)
        phi = qii_influence(ds, poi, clf, cfg)
        params = {"classifier": args.classifier, "mode": args.qii_mode, "samples": args.samples, "seed": args.seed}
        if args.classifier == "knn":
            params["k"] = args.k
    text = influence_to_json(phi, m, params)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _measure_handle(args) -> ax.MeasureHandle:
    if args.measure == "mim":
        return ax.mim_measure(WeightKernel(args.kernel))
    if args.measure == "parzen":
        return ax.parzen_measure(args.sigma)
    if args.measure == "lime":
        return ax.lime_measure(args.rho)
    return ax.counterfactual_measure()


def _axioms(args) -> int:
    ds = _load(args)
    poi = ds.check_index(args.poi)
    reports = ax.run_axioms(_measure_handle(args), ds, poi, args.axiom, seed=args.seed, tol=args.tol,
                            nonbias_mode=args.nonbias_mode)
    text = ax.reports_to_jsonl(reports)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    for r in reports:
        print(f"{r.axiom:<13} {r.status:<15} residual={r.residual:.3e}", file=sys.stderr)
    return EXIT_OK


def _game(args) -> int:
    game = load_game(args.file)
    i = args.player - 1
    if not 0 <= i < game.n:
        raise UsageError(f"--player must be in 1..{game.n}")
    if args.verify_psi_banzhaf:
        doc = verify_psi_banzhaf(game, i).to_dict()
        doc["player"] = args.player
    else:
        if args.banzhaf:
            name, value = "banzhaf", banzhaf(game, i)
        elif args.shapley:
            name, value = "shapley", shapley(game, i)
        elif args.psi:
            name, value = "psi", psi_influence(game, i)
        else:
            name, value = "phi_empty", cost_sharing_influence(game, i)
        doc = {"n": game.n, "player": args.player, "quantity": name, "value": value}
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    return EXIT_OK


def _render(args) -> int:
    phi = read_influence_json(args.influence)
    render_influence_map(phi, args.width, args.height, args.out)
    return EXIT_OK


def _shift(args) -> int:
    img = read_pgm(args.image)
    phi = read_influence_json(args.influence)
    shifted = shift_poi(img.reshape(-1).astype(np.float64), phi, args.eta)
    write_pgm(args.out, np.rint(shifted).reshape(img.shape))
    return EXIT_OK


def _compare(args) -> int:
    a, b = read_influence_json(args.a), read_influence_json(args.b)
    sys.stdout.write(json.dumps({"cosine": compare_measures(a, b)}, sort_keys=True) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mimkit", description="Data-driven feature influence measures.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="compute an influence vector")
    _add_data_args(p)
    p.add_argument("--measure", required=True, choices=MEASURES)
    p.add_argument("--kernel", default="inverse_square", choices=("constant", "inverse", "inverse_square"))
    p.add_argument("--sigma", type=float, default=4.7, help="Parzen window width")
    p.add_argument("--rho", type=float, default=3.0, help="LIME kernel width")
    p.add_argument("--cf-tol", type=float, default=0.0, help="counterfactual match tolerance")
    p.add_argument("--classifier", choices=("knn", "linear", "constant"), default="knn")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--weights", default="", help="comma-separated weights for --classifier linear")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--constant", type=float, default=1.0)
    p.add_argument("--qii-mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deterministic", action="store_true", help="fixed reduction order")
    p.add_argument("--out")
    p.set_defaults(run=_compute)

    p = sub.add_parser("axioms", help="run the axiom checks on a measure")
    _add_data_args(p)
    p.add_argument("--measure", required=True, choices=AXIOM_MEASURES)
    p.add_argument("--axiom", default="all", choices=(*ax.AXIOMS, "all"))
    p.add_argument("--kernel", default="inverse_square", choices=("constant", "inverse", "inverse_square"))
    p.add_argument("--sigma", type=float, default=4.7)
    p.add_argument("--rho", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--nonbias-mode", choices=("exact", "mc"), default=None)
    p.add_argument("--out", help="JSON-lines report file")
    p.set_defaults(run=_axioms)

    p = sub.add_parser("game", help="cooperative-game influence values")
    p.add_argument("--file", required=True)
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--banzhaf", action="store_true")
    q.add_argument("--shapley", action="store_true")
    q.add_argument("--psi", action="store_true")
    q.add_argument("--phi-empty", action="store_true")
    q.add_argument("--verify-psi-banzhaf", action="store_true")
    p.add_argument("--player", type=int, required=True, help="1-based player number")
    p.set_defaults(run=_game)

    p = sub.add_parser("render", help="render an influence vector as a PPM image")
    p.add_argument("--influence", required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_render)

    p = sub.add_parser("shift", help="move a PGM image along an influence vector")
    p.add_argument("--image", required=True)
    p.add_argument("--influence", required=True)
    p.add_argument("--eta", type=float, default=0.25)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_shift)

    p = sub.add_parser("compare", help="cosine similarity of two influence vectors")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(run=_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.run(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mimkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateError as exc:
        print(f"mimkit: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, GameFormatError, SchemaError, ModeError, DomainError, CapacityError,
            IndexError, OSError) as exc:
        print(f"mimkit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
