"""Command-line interface: ``morphtda <command> ...``.

Exit status is 0 on full success, 1 when some inputs were skipped, and 2 on
a fatal error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import image_io
from .classify import SvmModel, TrainConfig, predict_many, train_svm
from .errors import KindMismatch, MorphTdaError, ParseError
from .evaluate import LabeledDataset, cross_db, five_fold_cv, format_table
from .featurize import CLI_KINDS, FeatureVector, read_feature_csv, write_feature_csv
from .mciq import CHARACTERISTICS, index_matrices
from .persistence import FiltrationParams, PersistenceBarcode, vr_barcode
from .pipeline import PipelineConfig, canonical, image_features, landmark_barcode
from .synth import alpha_blend, synthetic_dataset
from .ulbp import extract_landmarks

log = logging.getLogger("morphtda")

IMAGE_SUFFIXES = {".pgm", ".png"}
EXIT_OK, EXIT_PARTIAL, EXIT_ERROR = 0, 1, 2


# ---------------------------------------------------------------- datasets

def scan_dataset(root: Path, manifest: Path | None = None) -> list:
    """``(sample_id, label, path)`` for images under ``root/genuine`` and ``root/morph``."""
    items = []
    for label in ("genuine", "morph"):
        sub = root / label
        if not sub.is_dir():
            continue
        for path in sorted(sub.iterdir()):
            if path.suffix.lower() in IMAGE_SUFFIXES:
                items.append([path.stem, label, path])
    if not items:
        raise MorphTdaError(f"{root}: no images found under genuine/ or morph/")
    ids = [i[0] for i in items]
    dupes = sorted({s for s in ids if ids.count(s) > 1})
    if dupes:
        raise MorphTdaError(f"duplicate sample ids: {', '.join(dupes)}")
    if manifest is not None:
        overrides = {}
        with open(manifest, newline="") as fh:
            for row in csv.DictReader(fh):
                overrides[row["sample_id"]] = row["label"]
        for item in items:
            if item[0] in overrides:
                if overrides[item[0]] not in ("genuine", "morph"):
                    raise ParseError(f"manifest label {overrides[item[0]]!r} for {item[0]}")
                item[1] = overrides[item[0]]
    return sorted((tuple(i) for i in items), key=lambda i: i[0])


def _extract_one(job):
    sample_id, label, path, kinds, cfg = job
    try:
        img = image_io.load_grayscale(path)
        return sample_id, image_features(img, kinds, cfg, sample_id, label), None
    except (OSError, MorphTdaError) as exc:
        return sample_id, [], f"{path}: {exc}"


def load_dataset(path, kind: str | None, db_name: str = "") -> LabeledDataset:
    with open(path, newline="") as fh:
        vectors = read_feature_csv(fh)
    kinds = sorted({v.kind for v in vectors})
    if kind is None:
        if len(kinds) != 1:
            raise KindMismatch(f"{path} holds kinds {kinds}; choose one with --kind")
        kind = kinds[0]
    kind = CLI_KINDS.get(kind, kind)
    selected = [v for v in vectors if v.kind == kind]
    if not selected:
        raise KindMismatch(f"{path} has no {kind} rows (found {kinds})")
    return LabeledDataset.from_vectors(selected, db_name or Path(path).stem)


def _train_config(args) -> TrainConfig:
    return TrainConfig(C=args.C, seed=args.seed, standardize=args.standardize,
                       kkt_tolerance=args.kkt_tolerance, scale=args.kernel_scale)


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(threshold=args.threshold, omega=args.omega,
                          resize=not getattr(args, "no_resize", False))


# ---------------------------------------------------------------- commands

def cmd_extract(args) -> int:
    kinds = [CLI_KINDS[k.strip()] for k in args.kinds.split(",") if k.strip()]
    cfg = _pipeline_config(args)
    items = scan_dataset(Path(args.dataset), Path(args.manifest) if args.manifest else None)
    jobs = [(sid, label, path, kinds, cfg) for sid, label, path in items]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_extract_one, jobs, chunksize=4))
    else:
        results = [_extract_one(j) for j in jobs]

    vectors, failures = [], 0
    for sample_id, vecs, error in sorted(results, key=lambda r: r[0]):
        if error:
            failures += 1
            log.error("skipped %s", error)
        vectors.extend(vecs)
    with open(args.out, "w", newline="") as fh:
        write_feature_csv(vectors, fh)
    log.info("wrote %d feature rows for %d images to %s", len(vectors), len(items) - failures, args.out)
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_landmarks(args) -> int:
    img = canonical(image_io.load_grayscale(args.image), _pipeline_config(args))
    text = extract_landmarks(img).to_csv()
    _emit(text, args.out)
    return EXIT_OK


def cmd_barcode(args) -> int:
    img = canonical(image_io.load_grayscale(args.image), _pipeline_config(args))
    barcode = landmark_barcode(img, _pipeline_config(args), max_dim=args.max_dim)
    _emit(barcode.to_json(indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_cloud_barcode(args) -> int:
    with open(args.cloud, newline="") as fh:
        pts = [(int(r["row"]), int(r["col"])) for r in csv.DictReader(fh)]
    barcode = vr_barcode(np.array(pts, dtype=np.int64).reshape(-1, 2),
                         FiltrationParams(args.max_dim, args.threshold))
    _emit(barcode.to_json(indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_matrices(args) -> int:
    img = canonical(image_io.load_grayscale(args.image), _pipeline_config(args))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, mat in index_matrices(img).items():
        np.savetxt(out / f"{Path(args.image).stem}_{name}.csv", mat, delimiter=",", fmt="%.17g")
    log.info("wrote %d matrices to %s", len(CHARACTERISTICS), out)
    return EXIT_OK


def cmd_synth_morph(args) -> int:
    cfg = PipelineConfig()
    a = canonical(image_io.load_grayscale(args.image_a), cfg)
    b = canonical(image_io.load_grayscale(args.image_b), cfg)
    image_io.save_image(alpha_blend(a, b, args.alpha), args.out)
    return EXIT_OK


def cmd_synth_dataset(args) -> int:
    genuine, morphs = synthetic_dataset(args.genuine, args.morphs, seed=args.seed,
                                        alpha=args.alpha, sigma=args.sigma)
    root = Path(args.out_dir)
    for label, images in (("genuine", genuine), ("morph", morphs)):
        (root / label).mkdir(parents=True, exist_ok=True)
        for k, img in enumerate(images):
            image_io.save_image(img, root / label / f"{label[0]}{k:04d}.{args.format}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot_barcode, plot_features

    text = Path(args.input).read_text()
    svg, csv_path = Path(args.out).with_suffix(".svg"), Path(args.out).with_suffix(".csv")
    if text.lstrip().startswith("{"):
        plot_barcode(PersistenceBarcode.from_json(text), svg, csv_path)
    else:
        with open(args.input, newline="") as fh:
            vectors = read_feature_csv(fh)
        if args.sample:
            vectors = [v for v in vectors if v.sample_id in set(args.sample)]
        plot_features(vectors, svg, csv_path)
    return EXIT_OK


def cmd_train(args) -> int:
    ds = load_dataset(args.features, args.kind)
    X, y = ds.arrays()
    model = train_svm(X, y, _train_config(args))
    Path(args.out).write_text(model.to_json())
    acc = np.mean((model.decision_function(X) > 0) == (y > 0))
    log.info("trained on %d samples, %d support vectors, training accuracy %.2f%%",
             len(y), len(model.dual_coefs), 100 * acc)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = SvmModel.from_json(Path(args.model).read_text())
    ds = load_dataset(args.features, args.kind)
    vectors: list[FeatureVector] = list(ds.genuine) + list(ds.morph)
    X = np.array([v.values for v in vectors])
    scores = model.decision_function(X)
    labels = predict_many(model, X)
    lines = ["sample_id,truth,predicted,score"]
    lines += [f"{v.sample_id},{v.label},{lab},{s!r}" for v, lab, s in zip(vectors, labels, scores)]
    _emit("\n".join(lines) + "\n", args.out)
    acc = np.mean([lab == v.label for v, lab in zip(vectors, labels)])
    log.info("accuracy %.2f%% on %d samples", 100 * acc, len(vectors))
    return EXIT_OK


def _write_report(report, args) -> None:
    Path(args.out).write_text(report.to_json() + "\n")
    table = format_table([report])
    if args.table:
        Path(args.table).write_text(table)
    print(table, end="")


def cmd_crossval(args) -> int:
    ds = load_dataset(args.features, args.kind)
    report = five_fold_cv(ds, _train_config(args), repeats=args.repeats, seed=args.seed,
                          pooling=args.pooling)
    _write_report(report, args)
    return EXIT_OK


def cmd_crossdb(args) -> int:
    train_ds = load_dataset(args.train, args.kind, args.train_name)
    test_ds = load_dataset(args.test, args.kind, args.test_name)
    report = cross_db(train_ds, test_ds, _train_config(args), repeats=args.repeats, seed=args.seed)
    _write_report(report, args)
    return EXIT_OK


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    ph = argparse.ArgumentParser(add_help=False)
    ph.add_argument("--threshold", type=float, default=25.0, help="filtration cap")
    ph.add_argument("--omega", type=int, default=24, help="last Betti-binning line")
    ph.add_argument("--no-resize", action="store_true",
                    help="use images as they are instead of resizing to 280x270")

    svm = argparse.ArgumentParser(add_help=False)
    svm.add_argument("--C", type=float, default=1.0, help="box constraint")
    svm.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    svm.add_argument("--kkt-tolerance", type=float, default=1e-3)
    svm.add_argument("--kernel-scale", type=float, default=1.0)
    svm.add_argument("--kind", help="feature kind to use (mciq, bb0, bb1, bs0, bs1)")

    report = argparse.ArgumentParser(add_help=False)
    report.add_argument("--repeats", type=int, default=10)
    report.add_argument("--out", required=True, help="report JSON path")
    report.add_argument("--table", help="also write the text table here")

    parser = argparse.ArgumentParser(prog="morphtda", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common, ph], help="image dataset -> feature CSV")
    p.add_argument("dataset", help="directory with genuine/ and morph/ subdirectories")
    p.add_argument("--kinds", default="mciq,bb0,bb1,bs0,bs1")
    p.add_argument("--manifest", help="CSV with sample_id,label overrides")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("landmarks", parents=[common, ph], help="image -> ULBP point-cloud CSV")
    p.add_argument("image")
    p.add_argument("--out")
    p.set_defaults(func=cmd_landmarks)

    p = sub.add_parser("barcode", parents=[common, ph], help="image -> barcode JSON")
    p.add_argument("image")
    p.add_argument("--max-dim", type=int, choices=(0, 1), default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_barcode)

    p = sub.add_parser("cloud-barcode", parents=[common, ph], help="point-cloud CSV -> barcode JSON")
    p.add_argument("cloud")
    p.add_argument("--max-dim", type=int, choices=(0, 1), default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cloud_barcode)

    p = sub.add_parser("matrices", parents=[common, ph], help="dump the 36x36 MCIQ index matrices")
    p.add_argument("image")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_matrices)

    p = sub.add_parser("synth-morph", parents=[common], help="alpha-blend two images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_morph)

    p = sub.add_parser("synth-dataset", parents=[common], help="write a synthetic genuine/morph set")
    p.add_argument("out_dir")
    p.add_argument("--genuine", type=int, default=60)
    p.add_argument("--morphs", type=int, default=60)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=0.8, help="smoothing applied to morphs")
    p.add_argument("--format", choices=("pgm", "png"), default="pgm")
    p.set_defaults(func=cmd_synth_dataset)

    p = sub.add_parser("plot", parents=[common], help="barcode JSON or feature CSV -> SVG + CSV")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output path prefix (.svg and .csv are written)")
    p.add_argument("--sample", action="append", help="restrict a feature CSV to these sample ids")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("train", parents=[common, svm], help="feature CSV -> model JSON")
    p.add_argument("features")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common, svm], help="apply a model to a feature CSV")
    p.add_argument("model")
    p.add_argument("features")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("crossval", parents=[common, svm, report], help="repeated balanced 5-fold CV")
    p.add_argument("features")
    p.add_argument("--pooling", choices=("micro", "macro"), default="micro")
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("crossdb", parents=[common, svm, report], help="train on one DB, test on another")
    p.add_argument("train")
    p.add_argument("test")
    p.add_argument("--train-name", default="")
    p.add_argument("--test-name", default="")
    p.set_defaults(func=cmd_crossdb)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, MorphTdaError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
