"""Command-line entry point: train, predict, score, build-lexicon.

Exit codes: 0 success, 1 other toolkit error, 2 missing or unreadable input,
3 configuration error (e.g. unknown feature), 4 model version or
fingerprint mismatch, 5 input lacks the sentence splits or trees the task
needs, 6 gold/prediction misalignment.
"""

import argparse
import hashlib
import json
import logging
import os
import sys
import time

from . import corpus, eval as evaluation, lexicons
from .errors import (AlignmentError, ConfigError, GumdropError, MissingSyntaxError,
                     ModelVersionError, SchemaMismatchError)
from .pipelines import (EnsembleModel, PipelineConfig, predict_connectives, predict_segments,
                        predict_sentences, train_connective, train_segmenter, train_sentencer)

log = logging.getLogger("gumdrop")

EXIT_OK, EXIT_ERROR, EXIT_MISSING, EXIT_CONFIG, EXIT_MODEL, EXIT_SYNTAX, EXIT_ALIGN = range(7)
TRAINERS = {"sent": train_sentencer, "seg": train_segmenter, "conn": train_connective}


class InputMissing(GumdropError):
    pass


def _file_hash(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _corpus_files(path, what):
    if os.path.isdir(path):
        files = sorted(os.path.join(path, f) for f in os.listdir(path)
                       if f.endswith((".conllu", ".conll", ".tok")))
        if not files:
            raise InputMissing("%s corpus not found: no corpus files in %s" % (what, path))
        return files
    if not os.path.isfile(path):
        raise InputMissing("%s corpus not found: %s" % (what, path))
    return [path]


def _read(path, what, genre_rules=None, mode=None):
    docs = []
    for f in _corpus_files(path, what):
        m = mode or (corpus.FLAT if f.endswith(".tok") else corpus.GOLD)
        try:
            docs.extend(corpus.read_corpus(f, m, genre_rules))
        except OSError as e:
            raise InputMissing("%s corpus not readable: %s" % (what, e)) from None
    return docs


def _is_flat(path):
    return all(f.endswith(".tok") for f in _corpus_files(path, "input"))


def _cache_dir(args):
    return getattr(args, "cache_dir", None) or os.environ.get("GUMDROP_CACHE") or None


def _external(args):
    """``--external-preds [ID=]FILE`` -> {module id: path}; the id defaults
    to the file name without extension."""
    out = {}
    for spec in args.external_preds or ():
        if "=" in spec and not os.path.exists(spec):
            mid, path = spec.split("=", 1)
        else:
            path = spec
            mid = os.path.splitext(os.path.basename(path))[0]
        if not os.path.isfile(path):
            raise InputMissing("external prediction file not found: %s" % path)
        out[mid] = path
    return out


def _config(args):
    if args.config:
        if not os.path.isfile(args.config):
            raise InputMissing("config file not found: %s" % args.config)
        cfg = PipelineConfig.load(args.config, args.task)
    else:
        cfg = PipelineConfig(task=args.task)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.force_sentence_starts is not None:
        cfg.force_sentence_starts = args.force_sentence_starts == "on"
    ext = _external(args)
    if ext:
        cfg.external = tuple(sorted(set(cfg.external) | set(ext)))
    cfg.validate()
    return cfg


def _genre_rules(cfg):
    if not cfg.genre_rules:
        return None
    if not os.path.isfile(cfg.genre_rules):
        raise InputMissing("genre rule file not found: %s" % cfg.genre_rules)
    with open(cfg.genre_rules, encoding="utf-8") as f:
        return corpus.GenreRules.from_text(f.read())


def _write_manifest(path, command, args, inputs, artifacts, started, config_text=None):
    manifest = {
        "command": command,
        "arguments": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "config": config_text,
        "inputs": {p: _file_hash(p) for p in inputs if os.path.isfile(p)},
        "seed": getattr(args, "seed", None),
        "artifacts": artifacts,
        "wall_clock_seconds": round(time.time() - started, 3),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _manifest_path(args, default):
    return args.manifest or default


def cmd_train(args):
    started = time.time()
    for path, what in ((args.train, "training"), (args.dev, "dev")):
        _corpus_files(path, what)
    cfg = _config(args)
    log.info("resolved config:\n%s", cfg.to_text())
    if args.dry_run:
        sys.stderr.write(cfg.to_text())
        return EXIT_OK
    rules = _genre_rules(cfg)
    train_docs = _read(args.train, "training", rules)
    dev_docs = _read(args.dev, "dev", rules)
    model = TRAINERS[args.task](train_docs, dev_docs, cfg, external=_external(args),
                                cache_dir=_cache_dir(args), jobs=args.jobs)
    model.save(args.out)
    inputs = _corpus_files(args.train, "training") + _corpus_files(args.dev, "dev")
    inputs += list(_external(args).values()) + ([args.config] if args.config else [])
    _write_manifest(_manifest_path(args, args.out + ".manifest.json"), "train", args, inputs,
                    {"model": args.out}, started, cfg.to_text())
    return EXIT_OK


def cmd_predict(args):
    started = time.time()
    if not os.path.isfile(args.model):
        raise InputMissing("model not found: %s" % args.model)
    _corpus_files(args.input, "input")
    model = EnsembleModel.load(args.model)
    if model.task != args.task:
        raise SchemaMismatchError("model was trained for task %s, not %s"
                                  % (model.task, args.task))
    external = _external(args)
    if args.dry_run:
        sys.stderr.write(model.config.to_text())
        return EXIT_OK
    rules = _genre_rules(model.config) if model.config.genre_rules else None
    if args.task == "sent":
        docs = _read(args.input, "input", rules, mode=corpus.FLAT)
        pred = predict_sentences(model, docs, external)
    elif args.task == "seg":
        if _is_flat(args.input):
            raise MissingSyntaxError(
                "%s is unsplit .tok text; segmentation needs sentences and dependency trees. "
                "Run 'gumdrop predict --task sent' with a sentencer model, parse the result "
                "with a dependency parser, then segment the parsed file" % args.input)
        docs = _read(args.input, "input", rules)
        force = None if args.force_sentence_starts is None else args.force_sentence_starts == "on"
        pred = predict_segments(model, docs, external, force)
    else:
        docs = _read(args.input, "input", rules)
        pred = predict_connectives(model, docs, external)
    text = corpus.write_conllu(pred, args.task)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    inputs = [args.model] + _corpus_files(args.input, "input") + list(external.values())
    _write_manifest(_manifest_path(args, args.out + ".manifest.json"), "predict", args, inputs,
                    {"predictions": args.out}, started, model.config.to_text())
    return EXIT_OK


def cmd_score(args):
    started = time.time()
    gold = _read(args.gold, "gold")
    pred = _read(args.pred, "prediction")
    if args.dry_run:
        return EXIT_OK
    if args.task == "conn":
        score = evaluation.score_connectives(gold, pred, merge_bi=args.conn_merge_bi)
    else:
        score = evaluation.score_boundaries(gold, pred, args.task)
    name = os.path.basename(args.gold.rstrip(os.sep))
    for suffix in (".conllu", ".conll", ".tok"):
        if name.endswith(suffix):
            name = name[:-len(suffix)]
    sys.stdout.write(evaluation.report([(name, score)]))
    _write_manifest(_manifest_path(args, args.pred.rstrip(os.sep) + ".score.manifest.json"),
                    "score", args,
                    _corpus_files(args.gold, "gold") + _corpus_files(args.pred, "prediction"),
                    {}, started)
    return EXIT_OK


def cmd_build_lexicon(args):
    started = time.time()
    if not os.path.isfile(args.paragraphs):
        raise InputMissing("paragraph file not found: %s" % args.paragraphs)
    try:
        with open(args.paragraphs, encoding="utf-8") as f:
            paragraphs = f.read().splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise InputMissing("cannot read %s: %s" % (args.paragraphs, e)) from None
    if args.dry_run:
        return EXIT_OK
    lex = lexicons.build_initial_lexicon(paragraphs, args.min_freq, args.min_ratio)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        f.write(lex.to_text())
    _write_manifest(_manifest_path(args, args.out + ".manifest.json"), "build-lexicon", args,
                    [args.paragraphs], {"lexicon": args.out}, started)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="gumdrop", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, task=True):
        if task:
            p.add_argument("--task", required=True, choices=("sent", "seg", "conn"))
        p.add_argument("--dry-run", action="store_true",
                       help="validate inputs and configuration without writing anything")
        p.add_argument("--manifest", help="manifest path (default: next to the output)")

    p = sub.add_parser("train", help="train an ensemble")
    p.add_argument("train", help="training corpus (file or directory)")
    p.add_argument("dev", help="dev corpus used for model selection")
    p.add_argument("-o", "--out", required=True, help="model file to write")
    p.add_argument("--config", help="pipeline configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--force-sentence-starts", nargs="?", const="on", choices=("on", "off"))
    p.add_argument("--external-preds", action="append", metavar="[ID=]FILE",
                   help="external base module predictions covering train and dev tokens")
    p.add_argument("--cache-dir", help="multitraining cache (default: $GUMDROP_CACHE)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label a corpus with a trained ensemble")
    p.add_argument("model")
    p.add_argument("input", help="corpus to label (.tok files are read as unsplit text)")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--force-sentence-starts", nargs="?", const="on", choices=("on", "off"))
    p.add_argument("--external-preds", action="append", metavar="[ID=]FILE")
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("score", help="print precision, recall and F")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--conn-merge-bi", action="store_true",
                   help="count B-Conn and I-Conn as one positive class")
    common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("build-lexicon", help="initial-token lexicon from paragraph-per-line text")
    p.add_argument("paragraphs")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--min-freq", type=int, default=10)
    p.add_argument("--min-ratio", type=float, default=0.5)
    common(p, task=False)
    p.set_defaults(func=cmd_build_lexicon)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    codes = ((InputMissing, EXIT_MISSING), (ConfigError, EXIT_CONFIG),
             ((ModelVersionError, SchemaMismatchError), EXIT_MODEL),
             (MissingSyntaxError, EXIT_SYNTAX), (AlignmentError, EXIT_ALIGN))
    try:
        return args.func(args)
    except (GumdropError, ValueError, OSError) as e:
        code = next((c for cls, c in codes if isinstance(e, cls)), EXIT_ERROR)
        sys.stderr.write("gumdrop: error: %s\n" % e)
        return code


if __name__ == "__main__":
    sys.exit(main())
