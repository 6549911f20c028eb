"""Command-line pipeline: ingest, train, rank, eval, score-resumes, synth.

Exit codes: 0 success, 2 input error, 3 empty corpus, 4 bad criteria,
5 empty evaluation set.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np

from .baselines import FrequencyRanker, LabeledLDA
from .corpus import read_postings, read_skill_dictionary, write_postings
from .documents import dump_documents
from .evaluation import correlate, read_resumes, resume_skill_score
from .exceptions import (CorruptModel, DuplicateSkill, EmptyCorpus, EmptyDictionary, EmptyTestSet,
                         MalformedRecord, SkillPopError, UnknownLabel, VersionMismatch)
from .model_io import load_model, save_model
from .skillnet import SkillNetVectorizer
from .sptm import SPTM, Hyperparameters, held_out_log_likelihood, rank_scores
from .synthetic import documents_as_postings, generate_corpus, load_synthetic, recovery_error, save_synthetic
from .taxonomy import parse_label

logger = logging.getLogger("skillpop")

EXIT_INPUT, EXIT_EMPTY_CORPUS, EXIT_BAD_CRITERIA, EXIT_EMPTY_EVAL = 2, 3, 4, 5

# the company profile used when scoring resumes unless criteria are given
DEFAULT_RESUME_CRITERIA = ["salary=very_high", "location=huge", "scale=big", "financing=listed"]


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    postings: str | None = None
    dictionary: str | None = None
    model: str = "model.json"
    reports: str = "reports"
    alpha: float = 0.01
    beta: float = 0.01
    delta: float = 1.0
    gamma: float = 0.01
    max_iters: int = 800
    tol: float = 1e-3
    burn_in: int = 0
    seed: int = 0
    multiplicity_mode: str = "weighted"
    min_support: int = 1
    skill_normalization: str = "category"

    @classmethod
    def load(cls, path: str | None, overrides: dict[str, Any]) -> "RunConfig":
        values: dict[str, Any] = {}
        if path:
            try:
                with open(path, encoding="utf-8") as fh:
                    values = json.load(fh)
            except (OSError, ValueError) as exc:
                raise CliError(f"cannot read config {path}: {exc}", EXIT_INPUT) from None
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise CliError(f"unknown config fields: {', '.join(sorted(unknown))}", EXIT_INPUT)
        values.update({k: v for k, v in overrides.items() if k in known and v is not None})
        cfg = cls(**values)
        try:
            cfg.hyperparameters()
        except ValueError as exc:
            raise CliError(str(exc), EXIT_INPUT) from None
        if cfg.max_iters < 0 or cfg.burn_in < 0 or cfg.min_support < 1 or cfg.tol < 0:
            raise CliError("max_iters, burn_in and tol must be >= 0 and min_support >= 1", EXIT_INPUT)
        return cfg

    def hyperparameters(self) -> Hyperparameters:
        return Hyperparameters(self.alpha, self.beta, self.delta, self.gamma)

    def estimator(self, cls=SPTM):
        return cls(alpha=self.alpha, beta=self.beta, delta=self.delta, gamma=self.gamma,
                   max_iter=self.max_iters, tol=self.tol, burn_in=self.burn_in, random_state=self.seed,
                   skill_normalization=self.skill_normalization)

    def report_path(self, name: str) -> Path:
        out = Path(self.reports)
        out.mkdir(parents=True, exist_ok=True)
        return out / name


def _write_csv(path: Path | None, header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def _fmt(x: float) -> str:
    return repr(float(x))


def _load_dictionary(cfg: RunConfig):
    if not cfg.dictionary:
        raise CliError("a skill dictionary path is required", EXIT_INPUT)
    try:
        return read_skill_dictionary(cfg.dictionary)
    except (OSError, DuplicateSkill, EmptyDictionary, MalformedRecord, KeyError) as exc:
        raise CliError(f"cannot load dictionary {cfg.dictionary}: {exc}", EXIT_INPUT) from None


def _load_postings(path: str | None, dictionary):
    if not path:
        raise CliError("a postings path is required", EXIT_INPUT)
    try:
        return read_postings(path, dictionary)
    except OSError as exc:
        raise CliError(f"cannot read postings {path}: {exc}", EXIT_INPUT) from None


def _load_model(path: str, dictionary=None):
    try:
        return load_model(path, dictionary.fingerprint() if dictionary is not None else None)
    except OSError as exc:
        raise CliError(f"cannot read model {path}: {exc}", EXIT_INPUT) from None
    except (CorruptModel, VersionMismatch) as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None


# ---------------------------------------------------------------------------
# commands

def cmd_ingest(cfg: RunConfig, args) -> int:
    dictionary = _load_dictionary(cfg)
    postings, report = _load_postings(cfg.postings, dictionary)
    write_postings(postings, dictionary, cfg.report_path("postings.jsonl"))
    with open(cfg.report_path("ingest_report.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump({**asdict(report), "n_dropped": report.n_dropped}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if report.n_malformed:
        logger.warning("%d malformed records skipped", report.n_malformed)
    print(f"parsed={report.n_parsed} dropped={report.n_dropped} "
          f"malformed={report.n_malformed} no_skill={report.n_no_skill}")
    return 0


def _write_iteration_log(cfg: RunConfig, model) -> None:
    rows = [[it, _fmt(ll), f"{sec:.6f}"] for it, ll, sec in model.iteration_log_]
    _write_csv(cfg.report_path("iteration_log.csv"), ["sweep", "log_likelihood", "seconds"], rows)


def cmd_train(cfg: RunConfig, args) -> int:
    baseline = args.baseline or "sptm"
    if args.synthetic:
        try:
            corpus, truth = load_synthetic(args.synthetic)
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(f"cannot read synthetic corpus {args.synthetic}: {exc}", EXIT_INPUT) from None
        if not corpus.documents:
            raise CliError("synthetic corpus is empty", EXIT_EMPTY_CORPUS)
        if baseline == "frequency":
            model = FrequencyRanker(smoothing=cfg.beta, n_labels=corpus.n_topics).fit(
                documents_as_postings(corpus), n_skills=corpus.n_skills)
        else:
            model = cfg.estimator(LabeledLDA if baseline == "llda" else SPTM).fit(corpus)
            per_topic, mean = recovery_error(model, truth)
            rows = [[k, _fmt(v)] for k, v in enumerate(per_topic)] + [["mean", _fmt(mean)]]
            _write_csv(cfg.report_path("recovery.csv"), ["topic", "tv_distance"], rows)
            _write_iteration_log(cfg, model)
            print(f"recovery mean_tv={mean:.6f}")
    else:
        dictionary = _load_dictionary(cfg)
        postings, _ = _load_postings(cfg.postings, dictionary)
        if not postings:
            raise CliError("no usable postings to train on", EXIT_EMPTY_CORPUS)
        if baseline == "frequency":
            model = FrequencyRanker(smoothing=cfg.beta).fit(postings, n_skills=len(dictionary),
                                                           dictionary_hash=dictionary.fingerprint())
        else:
            vec = SkillNetVectorizer(dictionary, cfg.multiplicity_mode, cfg.min_support)
            corpus = vec.fit_transform(postings)
            vec.skillnet_.write(cfg.report_path("skillnet.csv"))
            dump_documents(corpus.documents, cfg.report_path("documents.jsonl"))
            if not corpus.documents:
                raise CliError("the skill network has no connected, labeled skills", EXIT_EMPTY_CORPUS)
            model = cfg.estimator(LabeledLDA if baseline == "llda" else SPTM).fit(corpus)
            _write_iteration_log(cfg, model)
    save_model(model, cfg.model)
    if baseline != "frequency":
        print(f"trained {baseline}: sweeps={model.n_iter_} log_likelihood={model.log_likelihood_:.3f}")
    else:
        print("trained frequency baseline")
    return 0


def _parse_criteria(tokens: list[str], n_labels: int) -> list[int]:
    out = []
    for tok in tokens:
        for part in tok.split(","):
            part = part.strip()
            if not part:
                continue
            if part.isdigit():
                k = int(part)
                if k >= n_labels:
                    raise CliError(f"label index {k} outside [0, {n_labels})", EXIT_BAD_CRITERIA)
                out.append(k)
                continue
            try:
                out.append(parse_label(part).global_index)
            except UnknownLabel as exc:
                raise CliError(exc.args[0], EXIT_BAD_CRITERIA) from None
    if not out:
        raise CliError("at least one criterion is required", EXIT_BAD_CRITERIA)
    if max(out) >= n_labels:
        raise CliError(f"model has only {n_labels} labels", EXIT_BAD_CRITERIA)
    return out


def _n_labels(model) -> int:
    return model.n_labels if isinstance(model, FrequencyRanker) else model.n_topics_


def cmd_rank(cfg: RunConfig, args) -> int:
    dictionary = _load_dictionary(cfg) if cfg.dictionary else None
    model = _load_model(cfg.model, dictionary)
    criteria = _parse_criteria(args.criteria or [], _n_labels(model))
    if isinstance(model, FrequencyRanker):
        scores = model.popularity_scores(criteria, smoothing=0.0)
    else:
        scores = model.popularity_scores(criteria)
    ranked = rank_scores(scores, max(args.k, 0))
    names = getattr(model, "skill_names_", None)
    rows = []
    for rank, (s, score) in enumerate(ranked, 1):
        if dictionary is not None:
            name, cat = dictionary.name_of(s), dictionary.category_name(s)
        else:
            name = names[s] if names else str(s)
            cat = str(model.skill_category_[s]) if hasattr(model, "skill_category_") else ""
        rows.append([rank, name, cat, _fmt(score)])
    text = _write_csv(Path(args.output) if args.output else None, ["rank", "skill", "category", "score"], rows)
    if not args.output:
        sys.stdout.write(text)
    return 0


def _synthetic_split(path: str, fraction: float, seed: int):
    try:
        corpus, _ = load_synthetic(path)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read synthetic corpus {path}: {exc}", EXIT_INPUT) from None
    order = np.random.default_rng(seed).permutation(len(corpus))
    cut = int(round(fraction * len(corpus)))
    return corpus[order[:cut]], corpus[order[cut:]]


def cmd_eval(cfg: RunConfig, args) -> int:
    rows = []
    if args.synthetic:
        train_c, test_c = _synthetic_split(args.synthetic, args.split, cfg.seed)
        test = documents_as_postings(test_c)
        if not test:
            raise CliError("the evaluation split is empty", EXIT_EMPTY_EVAL)
        if not train_c.documents:
            raise CliError("the training split is empty", EXIT_EMPTY_CORPUS)
        train_c.label_prior = None
        models = {
            "SPTM": cfg.estimator(SPTM).fit(train_c),
            "LLDA": cfg.estimator(LabeledLDA).fit(train_c),
            "Frequency": FrequencyRanker(smoothing=cfg.beta, n_labels=train_c.n_topics).fit(
                documents_as_postings(train_c), n_skills=train_c.n_skills),
        }
    else:
        dictionary = _load_dictionary(cfg)
        test, _ = _load_postings(args.test, dictionary)
        paths = args.eval_models or [cfg.model]
        models = {Path(p).stem: _load_model(p, dictionary) for p in paths}
    for name, model in models.items():
        try:
            rows.append([name, _fmt(held_out_log_likelihood(model, test))])
        except EmptyTestSet as exc:
            raise CliError(str(exc), EXIT_EMPTY_EVAL) from None
    text = _write_csv(cfg.report_path("heldout_loglik.csv"), ["model", "log_likelihood"], rows)
    sys.stdout.write(text)
    return 0


def cmd_score_resumes(cfg: RunConfig, args) -> int:
    dictionary = _load_dictionary(cfg)
    try:
        resumes = read_resumes(args.resumes)
    except OSError as exc:
        raise CliError(f"cannot read resumes {args.resumes}: {exc}", EXIT_INPUT) from None
    if not resumes:
        raise CliError("no usable resumes", EXIT_EMPTY_EVAL)
    paths = args.eval_models or [cfg.model]
    corr_rows, score_rows = [], []
    hr = [r.hr_score for r in resumes]
    for path in paths:
        model = _load_model(path, dictionary)
        criteria = _parse_criteria(args.criteria or DEFAULT_RESUME_CRITERIA, _n_labels(model))
        name = Path(path).stem
        scores = []
        for r in resumes:
            counts: dict[int, int] = {}
            for skill in r.skills:
                s = dictionary.get(skill)
                if s is not None:
                    counts[s] = counts.get(s, 0) + 1
            scores.append(resume_skill_score(model, counts, criteria))
            score_rows.append([name, r.resume_id, r.hr_score, _fmt(scores[-1])])
        row = correlate(name, scores, hr)
        if row.warning:
            print(f"warning: {name}: {row.warning}", file=sys.stderr)
        corr_rows.append([row.model, _fmt(row.spearman), _fmt(row.kendall_tau), _fmt(row.z), _fmt(row.p)])
    _write_csv(cfg.report_path("resume_scores.csv"), ["model", "resume_id", "hr_score", "skill_score"], score_rows)
    text = _write_csv(cfg.report_path("correlation.csv"), ["model", "spearman", "kendall_tau", "z", "p"], corr_rows)
    sys.stdout.write(text)
    return 0


def cmd_synth(cfg: RunConfig, args) -> int:
    hp = cfg.hyperparameters()
    try:
        corpus, truth = generate_corpus(hp, args.M, args.N, args.K, args.S, args.L, seed=cfg.seed)
    except SkillPopError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    meta = {"K": args.K, "S": args.S, "L": args.L, "M": args.M, "N": args.N, "seed": cfg.seed,
            "alpha": hp.alpha, "beta": hp.beta, "delta": hp.delta, "gamma": hp.gamma}
    save_synthetic(corpus, truth, args.out, meta)
    print(f"wrote {len(corpus)} documents to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        kind = {"float": float, "int": int}.get(str(f.type).split(" ")[0], str)
        p.add_argument(flag, dest=f.name, type=kind, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skillpop", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse postings and report dropped records")
    _add_config_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="build the skill network and train a model")
    _add_config_flags(p)
    p.add_argument("--baseline", choices=["sptm", "llda", "frequency"], default="sptm")
    p.add_argument("--synthetic", help="train on a corpus written by `skillpop synth`")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rank", help="top-k skills under a set of criteria")
    _add_config_flags(p)
    p.add_argument("--criteria", nargs="+", required=True, help="category=value slugs, e.g. salary=very_high")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--output")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="held-out log likelihood")
    _add_config_flags(p)
    p.add_argument("--test", help="test postings (JSON lines)")
    p.add_argument("--models", dest="eval_models", nargs="+", help="model files to compare")
    p.add_argument("--synthetic", help="synthetic corpus to split and evaluate all three models on")
    p.add_argument("--split", type=float, default=0.8)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("score-resumes", help="score resumes and correlate with HR outcomes")
    _add_config_flags(p)
    p.add_argument("--resumes", required=True)
    p.add_argument("--criteria", nargs="+")
    p.add_argument("--models", dest="eval_models", nargs="+")
    p.set_defaults(func=cmd_score_resumes)

    p = sub.add_parser("synth", help="sample a synthetic corpus with ground truth")
    _add_config_flags(p)
    p.add_argument("--K", type=int, default=6)
    p.add_argument("--S", type=int, default=120)
    p.add_argument("--L", type=int, default=6)
    p.add_argument("--M", type=int, default=200)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config, vars(args))
        return args.func(cfg, args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except EmptyCorpus as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_CORPUS


if __name__ == "__main__":
    raise SystemExit(main())
