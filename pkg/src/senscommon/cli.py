"""Command-line entry point wiring the pipeline end to end.

Subcommands: mine, pairs, paths, questions, serve, aggregate, kappa,
dataset, train, cv, eval, demo. ``demo --seed S`` runs the whole loop on
the bundled fixtures with simulated annotators and writes byte-stable
reports.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import annotation, depgraph, embeddings, experiments, mining, service
from .jsonio import read_jsonl, write_jsonl
from .models import ModelConfig, load_checkpoint, save_checkpoint

logger = logging.getLogger(__name__)


def data_path(name: str) -> Path:
    return Path(str(resources.files("senscommon.data").joinpath(name)))


# ---------------------------------------------------------------------------
# config file: flat "key = value" lines, flags win

def load_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("["):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip().strip("\"'")
    return values


def apply_config(args: argparse.Namespace, parser_defaults: dict, argv: list[str]) -> None:
    if not getattr(args, "config", None):
        return
    file_values = load_config_file(args.config)
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, raw in file_values.items():
        if key in explicit or not hasattr(args, key):
            continue
        default = parser_defaults.get(key)
        cast = type(default) if default is not None and not isinstance(default, bool) else str
        if isinstance(default, bool):
            value: object = raw.lower() in ("1", "true", "yes")
        else:
            try:
                value = cast(raw)
            except (TypeError, ValueError):
                value = raw
        setattr(args, key, value)


# ---------------------------------------------------------------------------
# subcommand implementations

def cmd_mine(args) -> int:
    spec = mining.PatternSpec(head_noun=args.pattern, capture_max_tokens=args.max_capture)
    phrases = mining.extract_pattern_phrases(
        mining.iter_corpus(args.corpus), spec, threads=args.threads
    )
    write_jsonl(args.out, (p.to_dict() for p in phrases))
    summary = {
        "phrases": len(phrases),
        "occurrences": sum(p.frequency for p in phrases),
        "bigram_fraction": round(mining.bigram_fraction(phrases), 4),
        "out": str(args.out),
    }
    _emit(args, summary, f"mined {summary['phrases']} phrases "
                         f"({summary['occurrences']} occurrences), "
                         f"bigram fraction {summary['bigram_fraction']:.3f}")
    return 0


def cmd_pairs(args) -> int:
    phrases = [mining.CandidatePhrase.from_dict(rec) for rec in read_jsonl(args.phrases)]
    pairs = mining.filter_bigram_pairs(phrases)
    write_jsonl(args.out, (p.to_dict() for p in pairs))
    summary = {"pairs": len(pairs), "dropped": len(phrases) - len(pairs), "out": str(args.out)}
    _emit(args, summary, f"kept {summary['pairs']} pairs, dropped {summary['dropped']} phrases")
    return 0


def cmd_paths(args) -> int:
    parse = depgraph.parse_conllu(args.parses)
    scenes = depgraph.load_scene_lexicon(args.scenes)
    sound_phrases = []
    if args.sounds:
        sound_phrases = [
            tuple(rec["text"]) for rec in read_jsonl(args.sounds)
            if rec.get("type") == "candidate_phrase"
        ]
    pairs = depgraph.extract_scene_pairs(parse.graphs, scenes, sound_phrases)
    ranked, plausible = depgraph.rank_paths_by_frequency(pairs, min_freq=args.min_freq)
    write_jsonl(args.out, (p.to_dict() for p in plausible))
    summary = {
        "sentences": len(parse.graphs),
        "skipped": parse.skipped,
        "comention_pairs": len(pairs),
        "plausible_pairs": len(plausible),
        "signatures": len(ranked),
        "top_signatures": ranked[:5],
        "out": str(args.out),
    }
    _emit(args, summary,
          f"{summary['sentences']} sentences, {summary['comention_pairs']} co-mentions, "
          f"{summary['plausible_pairs']} plausible pairs over {summary['signatures']} signatures")
    return 0


def _scene_payload(pair: depgraph.SoundScenePair) -> dict:
    return {
        "scene": pair.scene,
        "sound": pair.sound_phrase,
        "path_tokens": pair.path.to_tokens(),
        # punctuation tokens carry no embedding and would OOV-drop the example
        "sentence_tokens": mining.normalize_phrase(" ".join(pair.sentence_text)),
        "sentence_id": list(pair.sentence),
    }


def _smell_contexts(corpus_path: Path, phrases) -> dict[tuple[str, int], str]:
    sentences: dict[tuple[str, int], str] = {}
    wanted = {prov for p in phrases for prov in p.provenance[:1]}
    docs = {doc for doc, _ in wanted}
    for doc_id, tagged in mining.iter_corpus(corpus_path):
        if doc_id not in docs:
            continue
        for idx, toks in enumerate(tagged):
            if (doc_id, idx) in wanted:
                sentences[(doc_id, idx)] = " ".join(t.core for t in toks if t.core)
    return sentences


def cmd_questions(args) -> int:
    questions = []
    if args.relation == "soundSource":
        pairs = [mining.SoundSourcePair.from_dict(r) for r in read_jsonl(args.input)]
        questions = [annotation.generate_question(p, "soundSource") for p in pairs]
    elif args.relation == "soundScene":
        pairs = [depgraph.SoundScenePair.from_dict(r) for r in read_jsonl(args.input)]
        seen = set()
        for p in pairs:
            payload = _scene_payload(p)
            q = annotation.generate_question(payload, "soundScene",
                                             context=" ".join(p.sentence_text))
            if q.id not in seen:
                seen.add(q.id)
                questions.append(q)
    elif args.relation in ("smellSentiment", "soundPhraseCheck", "smellPhraseCheck"):
        phrases = [mining.CandidatePhrase.from_dict(r) for r in read_jsonl(args.input)]
        contexts = {}
        if args.corpus:
            contexts = _smell_contexts(Path(args.corpus), phrases)
        for p in phrases:
            ctx = contexts.get(p.provenance[0]) if p.provenance else None
            questions.append(annotation.generate_question(p, args.relation, context=ctx))
    else:
        raise annotation.UnknownRelationError(f"unknown relation {args.relation!r}")
    questions.sort(key=lambda q: q.id)
    write_jsonl(args.out, (q.to_dict() for q in questions))
    _emit(args, {"questions": len(questions), "relation": args.relation, "out": str(args.out)},
          f"wrote {len(questions)} {args.relation} questions")
    return 0


def cmd_serve(args) -> int:
    store = service.AnnotationStore(args.data_dir, n_raters=args.raters,
                                    serve_timeout=args.timeout)
    if args.questions:
        added = store.add_questions(
            annotation.AnnotationQuestion.from_dict(rec) for rec in read_jsonl(args.questions)
        )
        print(f"loaded {added} new questions", file=sys.stderr)
    server = service.make_server(store, host=args.host, port=args.port, ui_dir=args.ui_dir)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port} (data dir: {store.data_dir})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        store.compact()
        store.close()
    return 0


def _question_args(q: annotation.AnnotationQuestion) -> tuple[str, str]:
    p = q.payload
    if q.relation == "soundSource":
        return p["sound"], p["source"]
    if q.relation == "soundScene":
        return p["scene"], p["sound"]
    return p["phrase"], p.get("kind", "")


def cmd_aggregate(args) -> int:
    questions = {
        rec["id"]: annotation.AnnotationQuestion.from_dict(rec)
        for rec in read_jsonl(args.questions)
    }
    responses = [annotation.AnnotationResponse.from_dict(r) for r in read_jsonl(args.responses)]
    by_q: dict[str, list[annotation.AnnotationResponse]] = {}
    for r in annotation.effective_responses(responses):
        if r.question_id in questions:
            by_q.setdefault(r.question_id, []).append(r)

    rows = []
    for qid in sorted(by_q):
        if len(by_q[qid]) < args.raters:
            continue
        q = questions[qid]
        label = annotation.aggregate_majority(by_q[qid])
        arg1, arg2 = _question_args(q)
        rows.append((q.relation, arg1, arg2, label))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["relation", "arg1", "arg2", "label"])
        writer.writerows(rows)

    kappas = {}
    for rel in sorted({q.relation for q in questions.values()}):
        report = annotation.agreement_report(questions, responses, rel, args.raters)
        kappas[rel] = report.kappa
    _emit(args, {"labels": len(rows), "kappa": kappas, "out": str(out)},
          f"wrote {len(rows)} labels; kappa: " +
          ", ".join(f"{r}={k if k is None else round(k, 4)}" for r, k in kappas.items()))
    return 0


def cmd_kappa(args) -> int:
    rows = []
    with open(args.input, "r", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            if any(not c.strip().lstrip("-").isdigit() for c in row[1:] if c.strip()) and rows == []:
                continue  # header
            values = row[1:] if not row[0].strip().lstrip("-").isdigit() else row
            rows.append([int(c) for c in values])
    kappa = annotation.fleiss_kappa(rows)
    if args.json:
        print(json.dumps({"kappa": kappa, "items": len(rows)}))
    else:
        print(f"{kappa:.6g}")
    return 0


def cmd_dataset(args) -> int:
    questions = [annotation.AnnotationQuestion.from_dict(r) for r in read_jsonl(args.questions)]
    labels_by_args: dict[tuple[str, str, str], str] = {}
    with open(args.labels, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for rel, arg1, arg2, label in reader:
            labels_by_args[(rel, arg1, arg2)] = label
    labels = {}
    for q in questions:
        arg1, arg2 = _question_args(q)
        label = labels_by_args.get((q.relation, arg1, arg2))
        if label is not None:
            labels[q.id] = label
    table = embeddings.load_embeddings(args.embeddings) if args.embeddings else None
    dataset, stats = experiments.build_dataset(questions, labels, args.relation, table)
    write_jsonl(args.out, (
        {"v": 1, "relation": dataset.relation, "payload": payload, "label": label}
        for payload, label in dataset.examples
    ))
    _emit(args, {**stats, "examples": len(dataset), "out": str(args.out)},
          f"{len(dataset)} {args.relation} examples "
          f"(excluded {stats['excluded']}, OOV-dropped {stats['oov_dropped']})")
    return 0


def _load_dataset(path: str | Path, relation: str) -> experiments.LabeledDataset:
    examples = []
    for rec in read_jsonl(path):
        if rec.get("relation") == relation:
            examples.append((rec["payload"], rec["label"]))
    return experiments.LabeledDataset(
        relation=relation,
        examples=tuple(examples),
        classes=tuple(experiments.classes_for_relation(relation)),
    )


def _config_from_args(args, relation: str) -> ModelConfig:
    return ModelConfig(
        family=args.model,
        feature_mode=args.feature_mode,
        hidden_size=args.hidden_size,
        hops=args.hops,
        embed_dim=args.embed_dim,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        n_classes=len(experiments.classes_for_relation(relation)),
    )


def cmd_train(args) -> int:
    dataset = _load_dataset(args.dataset, args.relation)
    table = embeddings.load_embeddings(args.embeddings) if args.embeddings else None
    config = _config_from_args(args, args.relation)
    if args.test_size > 0:
        train, _ = experiments.split_dataset(dataset, args.test_size, args.seed)
        examples = train.examples
    else:
        examples = dataset.examples
    fitted = experiments.train_model(args.relation, examples, dataset.classes, config, table)
    save_checkpoint(fitted.trained, args.out)
    _emit(args, {"trained": config.to_dict(), "examples": len(examples),
                 "final_loss": fitted.trained.training_history[-1], "out": str(args.out)},
          f"trained {experiments.model_display_name(config)} on {len(examples)} examples "
          f"(final loss {fitted.trained.training_history[-1]:.4f})")
    return 0


def cmd_eval(args) -> int:
    trained = load_checkpoint(args.model_file)
    relation = trained.relation or args.relation
    dataset = _load_dataset(args.dataset, relation)
    table = embeddings.load_embeddings(args.embeddings) if args.embeddings else None
    fitted = experiments.fitted_from_checkpoint(trained, table)
    _, test = experiments.split_dataset(dataset, args.test_size, args.seed)
    report = experiments.evaluate(fitted, test, n_train=len(dataset) - len(test))
    payload = {
        "relation": report.relation,
        "model": report.model_name,
        "accuracy": report.accuracy,
        "n_train": report.n_train,
        "n_test": report.n_test,
        "seed": report.seed,
    }
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["payload", "gold", "predicted"])
            writer.writerows(report.predictions)
    _emit(args, payload, f"{report.model_name}: accuracy {report.accuracy:.4f} "
                         f"on {report.n_test} held-out examples")
    return 0


def cmd_cv(args) -> int:
    dataset = _load_dataset(args.dataset, args.relation)
    table = embeddings.load_embeddings(args.embeddings) if args.embeddings else None
    train, _ = experiments.split_dataset(dataset, args.test_size, args.seed) \
        if args.test_size > 0 else (experiments.TrainSplit(
            examples=dataset.examples, classes=dataset.classes, relation=dataset.relation), None)
    grid = experiments.default_grid(args.model, args.feature_mode, epochs=args.epochs)
    best, scored = experiments.cross_validate(train, grid, folds=args.folds, table=table,
                                              seed=args.seed)
    result = {
        "best": best.to_dict(),
        "scores": [{"config": c.to_dict(), "accuracy": a} for c, a in scored],
    }
    _emit(args, result, "best config: " + json.dumps(best.to_dict(), sort_keys=True))
    return 0


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


# ---------------------------------------------------------------------------
# demo: the whole loop on bundled fixtures

DEMO_MODELS = {
    "soundSource": [
        ("logreg", "concat"),
        ("logreg", "diff_src_snd"),
        ("logreg", "diff_snd_src"),
        ("lstm_encoder", None),
        ("memnet", 1),
    ],
    "soundScene": [
        ("lstm_encoder", "sp"),
        ("lstm_encoder", "s"),
        ("lstm_encoder", "sp_s"),
        ("memnet", 1),
    ],
    "smellSentiment": [
        ("logreg", "add"),
        ("lstm_encoder", None),
        ("memnet", 1),
    ],
}


def cmd_demo(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed
    report: list[str] = [f"# senscommon demo report (seed {seed})", ""]

    # 1. mine phrases from the bundled corpus
    corpus = data_path("corpus_fixture.txt")
    sound_phrases = mining.extract_pattern_phrases(
        mining.iter_corpus(corpus), mining.PatternSpec("sound"))
    smell_phrases = mining.extract_pattern_phrases(
        mining.iter_corpus(corpus), mining.PatternSpec("smell"))
    write_jsonl(out / "phrases_sound.jsonl", (p.to_dict() for p in sound_phrases))
    write_jsonl(out / "phrases_smell.jsonl", (p.to_dict() for p in smell_phrases))
    frac = mining.bigram_fraction(sound_phrases)
    report += [
        "## Mining",
        f"- sound phrases: {len(sound_phrases)} "
        f"({sum(p.frequency for p in sound_phrases)} occurrences)",
        f"- smell phrases: {len(smell_phrases)}",
        f"- gerund bi-gram fraction of sound phrases: {frac:.3f}",
        "",
    ]

    # 2. sound-source pairs
    pairs = mining.filter_bigram_pairs(sound_phrases)
    write_jsonl(out / "pairs.jsonl", (p.to_dict() for p in pairs))
    report += ["## Pair filtering",
               f"- plausible sound-source pairs: {len(pairs)} "
               f"(dropped {len(sound_phrases) - len(pairs)} phrases)", ""]

    # 3. dependency paths over the bundled parses
    parse = depgraph.parse_conllu(data_path("parses_fixture.conllu"))
    scene_lex = depgraph.load_scene_lexicon()
    phrase_set = [p.text for p in sound_phrases if len(p.text) == 2]
    scene_pairs = depgraph.extract_scene_pairs(parse.graphs, scene_lex, phrase_set)
    ranked, plausible = depgraph.rank_paths_by_frequency(scene_pairs, min_freq=args.min_freq)
    write_jsonl(out / "scene_pairs.jsonl", (p.to_dict() for p in plausible))
    report += ["## Dependency paths",
               f"- parsed sentences: {len(parse.graphs)} (skipped {parse.skipped})",
               f"- co-mention pairs: {len(scene_pairs)}; plausible: {len(plausible)}",
               "- top path signatures (frequency over distinct pairs):"]
    report += [f"    - `{sig}` x{freq}" for sig, freq in ranked[:5]]
    report.append("")

    # 4. questions for the three relations
    questions: list[annotation.AnnotationQuestion] = []
    for p in pairs:
        questions.append(annotation.generate_question(p, "soundSource"))
    seen = set()
    for sp in plausible:
        q = annotation.generate_question(_scene_payload(sp), "soundScene",
                                         context=" ".join(sp.sentence_text))
        if q.id not in seen:
            seen.add(q.id)
            questions.append(q)
    contexts = _smell_contexts(corpus, smell_phrases)
    for p in smell_phrases:
        ctx = contexts.get(p.provenance[0]) if p.provenance else None
        questions.append(annotation.generate_question(p, "smellSentiment", context=ctx))
    questions.sort(key=lambda q: (q.relation, q.id))
    write_jsonl(out / "questions.jsonl", (q.to_dict() for q in questions))

    # 5. simulated annotators answer through the live service
    store_dir = out / "annotation-store"
    for stale in (store_dir / service.QUESTIONS_FILE, store_dir / service.RESPONSES_LOG):
        if stale.exists():
            stale.unlink()
    tick = {"now": 0.0}

    def logical_clock() -> float:
        tick["now"] += 1.0
        return tick["now"]

    store = service.AnnotationStore(store_dir, n_raters=3, clock=logical_clock)
    store.add_questions(questions)
    simulated = annotation.simulate_responses(questions, n_workers=3, seed=seed)
    by_worker: dict[str, dict[str, str]] = {}
    for r in simulated:
        by_worker.setdefault(r.worker_id, {})[r.question_id] = r.choice

    import urllib.request

    with service.ServiceThread(store) as svc:
        ts = 0.0
        for worker in sorted(by_worker):
            answered = 0
            while True:
                with urllib.request.urlopen(
                        f"{svc.base_url}/api/questions/next?worker={worker}&n=25") as resp:
                    batch = json.loads(resp.read())["questions"]
                if not batch:
                    break
                for q in batch:
                    body = json.dumps({
                        "question_id": q["id"], "worker_id": worker,
                        "choice": by_worker[worker][q["id"]], "timestamp": ts,
                    }).encode()
                    req = urllib.request.Request(
                        f"{svc.base_url}/api/answers", data=body,
                        headers={"Content-Type": "application/json"}, method="POST")
                    with urllib.request.urlopen(req) as resp:
                        assert json.loads(resp.read())["ok"]
                    ts += 1.0
                    answered += 1
        with urllib.request.urlopen(f"{svc.base_url}/api/stats") as resp:
            live_stats = json.loads(resp.read())

    # 6. live vs offline agreement
    report += ["## Annotation (3 simulated raters)"]
    labels: dict[str, str] = {}
    for rel in ("soundSource", "soundScene", "smellSentiment"):
        ids, matrix = store.export_matrix(rel)
        offline_kappa = annotation.fleiss_kappa(matrix) if matrix.shape[0] >= 2 else None
        live_kappa = live_stats["relations"][rel]["kappa"]
        if live_kappa != offline_kappa:
            raise RuntimeError(f"live/offline kappa mismatch for {rel}")
        (out / f"matrix_{rel}.csv").write_text(store.export_csv(rel), encoding="utf-8")
        labels.update(store.majority_labels(rel))
        ref = experiments.REFERENCE_KAPPA[rel]
        shown = "n/a" if offline_kappa is None else f"{offline_kappa:.4f}"
        report.append(
            f"- {rel}: {live_stats['relations'][rel]['questions']} questions, "
            f"fully answered {live_stats['relations'][rel]['fully_answered']}, "
            f"kappa {shown} (live == offline; {ref:.2f} {experiments.REFERENCE_LABEL})")
    report.append("")

    # labels CSV
    with (out / "labels.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["relation", "arg1", "arg2", "label"])
        qindex = {q.id: q for q in questions}
        for qid in sorted(labels):
            q = qindex[qid]
            arg1, arg2 = _question_args(q)
            writer.writerow([q.relation, arg1, arg2, labels[qid]])

    # 7. datasets
    table = embeddings.load_embeddings(data_path("fixture_vectors.txt"))
    datasets = {}
    report.append("## Datasets")
    for rel in ("soundSource", "soundScene", "smellSentiment"):
        ds, stats = experiments.build_dataset(questions, labels, rel, table)
        datasets[rel] = ds
        write_jsonl(out / f"dataset_{rel}.jsonl", (
            {"v": 1, "relation": rel, "payload": p, "label": l} for p, l in ds.examples
        ))
        counts = {c: sum(1 for _, l in ds.examples if l == c) for c in ds.classes}
        report.append(f"- {rel}: {len(ds)} examples {counts} "
                      f"(excluded {stats['excluded']}, OOV-dropped {stats['oov_dropped']})")
    report.append("")

    # 8. train + evaluate
    eval_rows = []
    report.append("## Models")
    for rel, specs in DEMO_MODELS.items():
        ds = datasets[rel]
        class_counts = {c: sum(1 for _, l in ds.examples if l == c) for c in ds.classes}
        present = [c for c, n in class_counts.items() if n > 0]
        if len(ds) < 8 or len(present) < 2:
            report.append(f"### {rel}: skipped (too few labeled examples: {class_counts})")
            continue
        test_size = max(2, len(ds) // 5)
        train, test = experiments.split_dataset(ds, test_size, seed)
        train_present = {l for _, l in train.examples}
        if len(train_present) < 2:
            report.append(f"### {rel}: skipped (degenerate training split)")
            continue
        reports = []
        for family, extra in specs:
            config = ModelConfig(
                family=family,
                feature_mode=extra if isinstance(extra, str) else None,
                hops=extra if isinstance(extra, int) else 1,
                hidden_size=args.hidden_size,
                embed_dim=16,
                learning_rate=args.lr,
                epochs=args.epochs,
                seed=seed,
                n_classes=len(ds.classes),
            )
            fitted = experiments.train_model(rel, train.examples, ds.classes, config, table)
            rep = experiments.evaluate(fitted, test, n_train=len(train))
            reports.append(rep)
            eval_rows.append((rel, rep.model_name, f"{rep.accuracy:.4f}",
                              rep.n_train, rep.n_test))
        report.append(f"### {rel} ({len(train)} train / {len(test)} test)")
        report += experiments.reference_table(rel, reports)
        report.append("")

    with (out / "eval.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["relation", "model", "accuracy", "n_train", "n_test"])
        writer.writerows(eval_rows)

    (out / "report.md").write_text("\n".join(report) + "\n", encoding="utf-8")
    store.close()
    print(f"demo complete: {out}/report.md")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="senscommon",
        description="Mine, annotate and classify sense-perception relations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}

    real_add_parser = sub.add_parser

    def add_parser(name, **kw):
        p = real_add_parser(name, **kw)
        subparsers[name] = p
        return p

    sub.add_parser = add_parser  # type: ignore[method-assign]

    def common(p):
        p.add_argument("--config", help="key=value config file; explicit flags win")
        p.add_argument("--json", action="store_true", help="machine-readable JSON output")
        p.add_argument("--threads", type=int, default=1, help="worker pool cap")

    p = sub.add_parser("mine", help="extract pattern phrases from a corpus")
    p.add_argument("--pattern", choices=("sound", "smell"), required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-capture", type=int, default=5)
    common(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("pairs", help="derive sound-source pairs from mined phrases")
    p.add_argument("--phrases", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("paths", help="rank dependency paths and propose scene pairs")
    p.add_argument("--parses", required=True)
    p.add_argument("--scenes", default=None)
    p.add_argument("--sounds", default=None, help="mined sound phrases JSONL")
    p.add_argument("--min-freq", type=int, default=2)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("questions", help="turn candidates into annotation questions")
    p.add_argument("--relation", required=True, choices=annotation.RELATIONS)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--corpus", default=None, help="corpus for context sentences")
    common(p)
    p.set_defaults(func=cmd_questions)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--questions", default=None)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--ui-dir", default=None)
    p.add_argument("--raters", type=int, default=3)
    p.add_argument("--timeout", type=float, default=service.DEFAULT_SERVE_TIMEOUT)
    common(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("aggregate", help="majority labels + agreement from responses")
    p.add_argument("--questions", required=True)
    p.add_argument("--responses", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--raters", type=int, default=3)
    common(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("kappa", help="Fleiss kappa of a rating-matrix CSV")
    p.add_argument("--in", dest="input", required=True)
    common(p)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("dataset", help="assemble a labeled dataset for one relation")
    p.add_argument("--questions", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--relation", required=True)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_dataset)

    def model_flags(p):
        p.add_argument("--feature-mode", default=None)
        p.add_argument("--hidden-size", type=int, default=50)
        p.add_argument("--hops", type=int, default=1)
        p.add_argument("--embed-dim", type=int, default=32)
        p.add_argument("--lr", type=float, default=0.1)
        p.add_argument("--epochs", type=int, default=200)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--test-size", type=int, default=0)

    p = sub.add_parser("train", help="train one model on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--relation", required=True)
    p.add_argument("--model", required=True, choices=("logreg", "lstm_encoder", "memnet"))
    p.add_argument("--embeddings", default=None)
    p.add_argument("--out", required=True)
    model_flags(p)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="cross-validate a config grid")
    p.add_argument("--dataset", required=True)
    p.add_argument("--relation", required=True)
    p.add_argument("--model", required=True, choices=("logreg", "lstm_encoder", "memnet"))
    p.add_argument("--embeddings", default=None)
    p.add_argument("--folds", type=int, default=5)
    model_flags(p)
    common(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a held-out split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model-file", required=True)
    p.add_argument("--relation", default=None)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--out", default=None, help="per-example predictions CSV")
    p.add_argument("--test-size", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("demo", help="full pipeline on bundled fixtures")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="demo-out")
    p.add_argument("--min-freq", type=int, default=2)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--hidden-size", type=int, default=8)
    common(p)
    p.set_defaults(func=cmd_demo)

    return parser, subparsers


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    defaults = {
        action.dest: action.default
        for action in subparsers[args.command]._actions
        if action.dest != "help"
    }
    try:
        apply_config(args, defaults, argv)
        return args.func(args)
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
