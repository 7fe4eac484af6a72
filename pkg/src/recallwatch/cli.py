"""Command-line front end.

Every subcommand writes ``config.txt`` (key=value, one per line) into its
output directory so a run can be repeated from its echo.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .corpus import CorpusKind, load_corpus, load_labels, load_products, load_recalls
from .evalharness import LabeledEvalSet, auc_trend, run_trials_featurized, write_results, write_roc_points
from .informed_prior import apply_transform_matrix, fit_informed_featurized, read_transform, write_transform
from .linmodel import FitParams, fit, load_model, predict_proba_many, save_model, top_terms, write_top_terms
from .pu_train import PUConfig, featurize, training_set_from, write_sampled_ids
from .recall_match import (
    CATEGORY_KEYWORDS,
    DEFAULT_MIN_REVIEWS,
    ReviewPrediction,
    hazard_rates,
    lead_time,
    match_recalls,
    read_matches,
    read_predictions,
    write_cumulative,
    write_matches,
    write_offsets,
    write_predictions,
)
from .synthgen import SynthConfig, generate, write_synth
from .vectorizer import (
    DEFAULT_MAX_DF_RATIO,
    DEFAULT_MIN_DF,
    build_vocabulary,
    load_vocabulary,
    save_vocabulary,
    vectorize_many,
)

log = logging.getLogger("recallwatch")


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        self.stage = stage
        super().__init__(f"{stage}: {exc}")


@contextmanager
def stage(name: str):
    log.info("%s", name)
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _tau(value: str) -> Optional[int]:
    if value.lower() == "none":
        return None
    tau = int(value)
    if not 1 <= tau <= 5:
        raise argparse.ArgumentTypeError(f"tau must be 1..5 or 'none', got {value}")
    return tau


def _tau_list(value: str) -> list[Optional[int]]:
    return [_tau(v.strip()) for v in value.split(",") if v.strip()]


def _echo_config(args: argparse.Namespace, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    items = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    lines = []
    for key in sorted(items):
        value = items[key]
        if isinstance(value, list):
            value = ",".join("none" if v is None else str(v) for v in value)
        elif value is None:
            value = "none"
        lines.append(f"{key}={value}")
    (out / "config.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _fit_params(args) -> FitParams:
    return FitParams(lam=args.lam, lr=args.lr, epochs=args.epochs)


def _vocab(args, reviews):
    if args.vocab:
        with stage("load vocabulary"):
            return load_vocabulary(args.vocab)
    with stage("build vocabulary"):
        return build_vocabulary(reviews, args.min_df, args.max_df_ratio)


# --- subcommands ------------------------------------------------------------

def cmd_build_vocab(args) -> int:
    out = Path(args.out)
    _echo_config(args, out)
    with stage("load reviews"):
        reviews = load_corpus(args.reviews, CorpusKind.UNLABELED)
    with stage("build vocabulary"):
        vocab = build_vocabulary(reviews, args.min_df, args.max_df_ratio)
        save_vocabulary(vocab, out / "vocab.txt")
    print(f"{vocab.k} terms from {vocab.total_docs} reviews -> {out / 'vocab.txt'}")
    return 0


def cmd_train(args) -> int:
    out = Path(args.out)
    _echo_config(args, out)
    with stage("load complaints"):
        L = load_corpus(args.complaints, CorpusKind.POSITIVE_LABELED)
    with stage("load reviews"):
        U = load_corpus(args.reviews, CorpusKind.UNLABELED)
    vocab = _vocab(args, U)
    save_vocabulary(vocab, out / "vocab.txt")
    cfg = PUConfig(tau=args.tau, s=args.num_neg, seed=args.seed)
    params = _fit_params(args)
    with stage("vectorize"):
        data = featurize(L, U, vocab)
    if args.method == "baseline":
        with stage("fit baseline"):
            ts = training_set_from(data, cfg)
            model = fit(ts.rows, params, seed=args.seed)
    else:
        with stage("fit informed prior"):
            res = fit_informed_featurized(data, cfg, params, args.threshold)
        ts, model = res.training_set, res.informed
        save_model(res.baseline, out / "baseline_model.txt")
        write_top_terms(top_terms(res.baseline, vocab, args.top), out / "top_terms_baseline.csv")
        write_transform(res.transform, vocab, out / "transform.csv")
    if args.method == "baseline":
        for name in ("transform.csv", "baseline_model.txt", "top_terms_baseline.csv"):
            (out / name).unlink(missing_ok=True)
    save_model(model, out / "model.txt")
    write_top_terms(top_terms(model, vocab, args.top), out / "top_terms.csv")
    write_sampled_ids(ts, out / "sampled_ids.txt")
    print(f"{args.method} model: {ts.n_positive} positives, {ts.n_negative} negatives, k={vocab.k} -> {out}")
    return 0


def cmd_predict(args) -> int:
    model_dir = Path(args.model_dir)
    out = Path(args.out)
    _echo_config(args, out)
    with stage("load model"):
        vocab = load_vocabulary(model_dir / "vocab.txt")
        model = load_model(model_dir / "model.txt")
        transform = read_transform(vocab, model_dir / "transform.csv") if (model_dir / "transform.csv").exists() else None
    with stage("load reviews"):
        U = load_corpus(args.reviews, CorpusKind.UNLABELED)
    with stage("score reviews"):
        X = vectorize_many(U, vocab)
        if transform is not None:
            X = apply_transform_matrix(X, transform)
        scores = predict_proba_many(model, X)
    preds = [
        ReviewPrediction(d.id, d.product_id or "", d.date, bool(s >= args.threshold), float(s))
        for d, s in zip(U, scores)
    ]
    write_predictions(preds, out / "predictions.csv")
    n_haz = sum(p.hazardous for p in preds)
    print(f"{n_haz}/{len(preds)} reviews predicted hazardous -> {out / 'predictions.csv'}")
    return 0


def cmd_evaluate(args) -> int:
    out = Path(args.out)
    _echo_config(args, out)
    with stage("load complaints"):
        L = load_corpus(args.complaints, CorpusKind.POSITIVE_LABELED)
    with stage("load reviews"):
        U = load_corpus(args.reviews, CorpusKind.UNLABELED)
    with stage("load evaluation set"):
        E = load_corpus(args.eval, CorpusKind.UNLABELED)
        labels = load_labels(args.labels or args.eval)
    vocab = _vocab(args, U)
    with stage("vectorize"):
        data = featurize(L, U, vocab)
        eval_set = LabeledEvalSet.from_corpus(E, labels, vocab)
    methods = ("baseline", "informed") if args.method == "both" else (args.method,)
    grid = [PUConfig(tau=t, s=args.num_neg, seed=args.seed) for t in args.tau]
    with stage("run trials"):
        reports = run_trials_featurized(data, eval_set, methods, grid, args.trials, _fit_params(args), args.threshold)
    write_results(reports, out / "results.csv")
    write_roc_points(reports, eval_set, out / "roc.csv")
    print(f"{'method':<10}{'tau':>5}{'AUC':>16}{'F1':>16}{'P':>16}{'R':>16}")
    for r in reports:
        cells = "".join(f"{100 * r.mean(m):>9.1f} ± {100 * r.stderr(m):4.2f}" for m in ("roc_auc", "f1", "precision", "recall"))
        print(f"{r.method:<10}{'none' if r.tau is None else r.tau:>5}{cells}")
    for m in methods:
        sub = [r for r in reports if r.method == m]
        if sum(r.tau is not None for r in sub) > 1:
            print(f"{m}: AUC trend over tau is {auc_trend(sub)}")
    return 0


def cmd_match_recalls(args) -> int:
    out = Path(args.out)
    _echo_config(args, out)
    with stage("load recalls"):
        recalls = load_recalls(args.recalls)
    with stage("load products"):
        products = load_products(args.products)
    keywords = [k.strip() for k in args.keywords.split(",") if k.strip()]
    with stage("match recalls"):
        matches = match_recalls(recalls, products, keywords, args.min_shared)
    write_matches(matches, out / "matches.csv")
    print(f"{len(matches)} candidate matches covering {len({m.recall_id for m in matches})} recalls -> {out / 'matches.csv'}")
    return 0


def _load_match_inputs(args):
    with stage("load recalls"):
        recalls = load_recalls(args.recalls)
    with stage("load matches"):
        matches = read_matches(args.matches)
        if args.verified_only:
            matches = [m for m in matches if m.verified]
    with stage("load predictions"):
        preds = read_predictions(args.predictions)
    return recalls, matches, preds


def cmd_leadtime(args) -> int:
    out = Path(args.out)
    _echo_config(args, out)
    recalls, matches, preds = _load_match_inputs(args)
    matched = {m.product_id for m in matches}
    with stage("lead time"):
        report = lead_time([p for p in preds if p.product_id in matched], matches, recalls, args.min_reviews)
    write_offsets(report, out / "offsets.csv")
    write_cumulative(report, out / "cumulative.csv")
    for o in report.offsets:
        when = f"{-o.offset_days} days prior" if o.offset_days < 0 else f"{o.offset_days} days after"
        print(f"{o.product_id}\t{o.review_id}\treview {o.review_date} recall {o.recall_date}\t{o.offset_days:+d} ({when})")
    print(report.summary())
    return 0


def cmd_rates(args) -> int:
    out = Path(args.out)
    _echo_config(args, out)
    _, matches, preds = _load_match_inputs(args)
    with stage("hazard rates"):
        rates = hazard_rates(preds, {m.product_id for m in matches})
    with (out / "watchlist.csv").open("w", encoding="utf-8") as fh:
        fh.write("product_id,hazardous_reviews,max_score\n")
        for pid, n, s in rates.watchlist():
            fh.write(f"{pid},{n},{s!r}\n")
    print(f"hazardous rate: recalled products {100 * rates.rate_recalled:.2f}%, others {100 * rates.rate_other:.2f}%")
    return 0


def cmd_synth(args) -> int:
    out = Path(args.out)
    _echo_config(args, out)
    with stage("generate"):
        cfg = SynthConfig(
            seed=args.seed,
            n_complaints=args.n_complaints,
            n_reviews=args.n_reviews,
            hazard_rate=args.hazard_rate,
            n_products=args.n_products,
            n_eval_hazardous=args.n_eval_hazardous,
            n_eval_benign=args.n_eval_benign,
        )
        sc = generate(cfg)
    with stage("write"):
        paths = write_synth(sc, out)
    print(f"{len(sc.complaints)} complaints, {len(sc.reviews)} reviews, {len(sc.eval_reviews)} eval reviews -> {out}")
    for name, path in paths.items():
        log.info("%s: %s", name, path)
    return 0


# --- parser -----------------------------------------------------------------

def _add_vocab_args(p):
    p.add_argument("--vocab", help="vocabulary file (built from --reviews when omitted)")
    p.add_argument("--min-df", type=int, default=DEFAULT_MIN_DF)
    p.add_argument("--max-df-ratio", type=float, default=DEFAULT_MAX_DF_RATIO)


def _add_fit_args(p):
    p.add_argument("--num-neg", "-s", type=int, default=20_000, help="negatives sampled from the reviews (s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="L2 strength")
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--threshold", type=float, default=0.5)


def _add_match_args(p):
    p.add_argument("--predictions", required=True)
    p.add_argument("--matches", required=True)
    p.add_argument("--recalls", required=True)
    p.add_argument("--verified-only", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recallwatch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-vocab", help="build the n-gram vocabulary from a reviews file")
    p.add_argument("--reviews", required=True)
    p.add_argument("--min-df", type=int, default=DEFAULT_MIN_DF)
    p.add_argument("--max-df-ratio", type=float, default=DEFAULT_MAX_DF_RATIO)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("train", help="fit a baseline or informed-prior classifier")
    p.add_argument("--complaints", required=True)
    p.add_argument("--reviews", required=True)
    _add_vocab_args(p)
    p.add_argument("--method", choices=("baseline", "informed"), default="informed")
    p.add_argument("--tau", type=_tau, default=5, help="minimum star rating of sampled negatives, or 'none'")
    _add_fit_args(p)
    p.add_argument("--top", type=int, default=20, help="rows in top_terms.csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a reviews file with a trained model directory")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--reviews", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="multi-trial evaluation over a tau grid")
    p.add_argument("--complaints", required=True)
    p.add_argument("--reviews", required=True)
    p.add_argument("--eval", required=True, help="labeled reviews (reviews format plus a 'label' field)")
    p.add_argument("--labels", help="separate {id, label} file, if labels are not inline")
    _add_vocab_args(p)
    p.add_argument("--method", choices=("baseline", "informed", "both"), default="both")
    p.add_argument("--tau", type=_tau_list, default=[5], help="comma-separated, e.g. 5,4,3,none")
    p.add_argument("--trials", type=int, default=3)
    _add_fit_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("match-recalls", help="candidate recall/product matches by shared title terms")
    p.add_argument("--recalls", required=True)
    p.add_argument("--products", required=True)
    p.add_argument("--keywords", default=",".join(CATEGORY_KEYWORDS))
    p.add_argument("--min-shared", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_match_recalls)

    p = sub.add_parser("leadtime", help="hazardous-review offsets relative to recall dates")
    _add_match_args(p)
    p.add_argument("--min-reviews", type=int, default=DEFAULT_MIN_REVIEWS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_leadtime)

    p = sub.add_parser("rates", help="hazardous-review rates for recalled vs other products, plus a watchlist")
    _add_match_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("synth", help="generate a synthetic corpus with a planted selection bias")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-complaints", type=int, default=2_000)
    p.add_argument("--n-reviews", type=int, default=100_000)
    p.add_argument("--hazard-rate", type=float, default=0.01)
    p.add_argument("--n-products", type=int, default=1_000)
    p.add_argument("--n-eval-hazardous", type=int, default=200)
    p.add_argument("--n-eval-benign", type=int, default=800)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except StageError as exc:
        print(f"recallwatch {args.command}: error in stage '{exc.stage}': {exc.__cause__}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"recallwatch {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
