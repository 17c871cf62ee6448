"""CLI entry point for the topic fusion classifier."""

from __future__ import annotations

import argparse
import os
import sys

# Ensure project root is on Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from pathlib import Path

import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from src.config import Settings, apply_overrides, load_config, resolve_path, setup_logging
from src.errors import InvalidParameterError, TopicFusionError
from src.fusion.persistence import load_model, save_model
from src.fusion.variants import assemble_model, variant_spec
from src.pipeline.ablation import run_ablation
from src.pipeline.corpus import generate_corpus, generate_emerging
from src.pipeline.dataset import ingest, write_dataset
from src.pipeline.export import export_bulk
from src.pipeline.inference import evaluate_model, predict, predict_batch, sweep_threshold
from src.rules.rulebook import TopicRuleSet, load_rulebook
from src.rules.tagger import tag
from src.training.data import label_distribution, split_dataset
from src.training.trainer import train

console = Console()


def _load_rules(settings: Settings) -> TopicRuleSet:
    return load_rulebook(resolve_path(settings.rulebook.path))


def _output_dir(args: argparse.Namespace, settings: Settings) -> Path:
    return Path(args.output or settings.output_dir)


def _print_metrics(title: str, report) -> None:
    table = Table(title=title, show_header=False, box=None, padding=(0, 2))
    table.add_column(style="dim")
    table.add_column()
    table.add_row("Samples", str(report.n))
    table.add_row("Threshold", "n/a" if report.threshold is None else f"{report.threshold:g}")
    if report.weighted is None:
        table.add_row("Weighted F1", "n/a (no gold topics)")
    else:
        table.add_row("Weighted precision", f"{report.weighted.precision:.4f}")
        table.add_row("Weighted recall", f"{report.weighted.recall:.4f}")
        table.add_row("Weighted F1", f"{report.weighted.f1:.4f}")
        table.add_row("Micro F1", f"{report.micro.f1:.4f}")
    table.add_row("Emerging rate", f"{report.emerging_rate:.2%}")
    console.print(table)


def cmd_tag(args: argparse.Namespace, settings: Settings) -> None:
    rules = _load_rules(settings)
    fv = tag(args.text, rules, cap=settings.fusion.cap)
    table = Table(title="Regex features")
    table.add_column("Id", justify="right")
    table.add_column("Topic")
    for feature in fv.feature_ids:
        name = "No topic" if feature == rules.no_topic_id else rules.name_of(feature)
        table.add_row(str(feature), name)
    console.print(table)
    if fv.truncated:
        console.print(f"[yellow]Truncated to the first {settings.fusion.cap} matches.[/yellow]")


def cmd_train(args: argparse.Namespace, settings: Settings) -> None:
    rules = _load_rules(settings)
    dataset = ingest(args.data, rules)
    train_set, test_set = split_dataset(
        list(dataset), settings.training.train_ratio, settings.training.seed
    )
    out = _output_dir(args, settings)

    model = assemble_model(settings.variant, settings, rules, [s.text for s in train_set])
    if model.trainable:
        model, history = train(model, train_set, settings.training)
        history.save(out / "history.json")
        console.print(
            f"Best epoch [bold]{history.best_epoch + 1}[/bold] of {history.epochs} "
            f"(val loss {history.best_val_loss:.5f}, "
            f"val F1 {history.val_f1[history.best_epoch]:.4f})"
        )
    save_model(model, out / "model")
    write_dataset(test_set, out / "test.jsonl", rules)
    _print_metrics(
        f"Variant {settings.variant} on held-out split",
        evaluate_model(model, test_set, settings.training.threshold),
    )
    console.print(f"[green]Saved model to {out / 'model'}[/green]")


def cmd_evaluate(args: argparse.Namespace, settings: Settings) -> None:
    rules = _load_rules(settings)
    model = load_model(args.model, rules)
    report = evaluate_model(model, list(ingest(args.data, rules)), settings.training.threshold)
    _print_metrics(f"Variant {model.variant}", report)


def cmd_predict(args: argparse.Namespace, settings: Settings) -> None:
    rules = _load_rules(settings)
    model = load_model(args.model, rules)
    tau = settings.training.threshold
    if args.data:
        preds = predict_batch(model, list(ingest(args.data, rules)), tau)
    else:
        preds = [predict(model, rules, args.text, tau, doc_id=args.doc_id)]

    table = Table(title=f"Predictions (variant {model.variant}, threshold {tau:g})")
    table.add_column("Document")
    table.add_column("Topics")
    for pred in preds:
        if pred.is_emerging:
            topics = "[magenta]Emerging Topic[/magenta]"
        else:
            topics = ", ".join(f"{name} ({p:.2f})" for name, p in pred.topics)
        table.add_row(pred.doc_id or "-", topics)
    console.print(table)


def cmd_ablate(args: argparse.Namespace, settings: Settings) -> None:
    rules = _load_rules(settings)
    if args.data:
        samples = list(ingest(args.data, rules))
    else:
        c = settings.corpus
        samples = generate_corpus(
            rules,
            c.size,
            c.regex_fraction,
            c.seed,
            c.max_labels,
            off_topic_fraction=c.off_topic_fraction,
        )
    out = _output_dir(args, settings)
    result = run_ablation(samples, rules, settings, output_dir=out)

    console.print(
        f"Split {result.train_size} train / {result.test_size} test; "
        f"{result.breakdown.classifiable} test documents regex-classifiable, "
        f"{result.breakdown.unclassifiable} not"
    )
    console.print(result.report.to_text())
    console.print(f"[green]Report written to {out}[/green]")


def cmd_export(args: argparse.Namespace, settings: Settings) -> None:
    rules = _load_rules(settings)
    model = load_model(args.model, rules)
    preds = predict_batch(model, list(ingest(args.data, rules)), settings.training.threshold)
    path = export_bulk(preds, args.output, model.variant)
    console.print(f"[green]Exported {len(preds)} predictions to {path}[/green]")


def _parse_thresholds(text: str) -> list[float]:
    thresholds = []
    for part in text.split(","):
        try:
            tau = float(part)
        except ValueError:
            raise InvalidParameterError("thresholds", part, "comma-separated numbers") from None
        if not 0.0 <= tau <= 1.0:
            raise InvalidParameterError("thresholds", tau, "values in [0, 1]")
        thresholds.append(tau)
    return thresholds


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> None:
    rules = _load_rules(settings)
    model = load_model(args.model, rules)
    samples = list(ingest(args.data, rules))
    thresholds = _parse_thresholds(args.thresholds) if args.thresholds else list(
        np.round(np.arange(0.05, 1.0, 0.05), 2)
    )

    table = Table(title=f"Threshold sweep (variant {model.variant})")
    for column in ("Threshold", "Weighted F1", "Micro F1", "Emerging rate"):
        table.add_column(column, justify="right")
    for point in sweep_threshold(model, samples, thresholds):
        table.add_row(
            f"{point.threshold:.2f}",
            "n/a" if point.weighted_f1 is None else f"{point.weighted_f1:.4f}",
            "n/a" if point.micro_f1 is None else f"{point.micro_f1:.4f}",
            f"{point.emerging_rate:.2%}",
        )
    console.print(table)


def cmd_gen_corpus(args: argparse.Namespace, settings: Settings) -> None:
    rules = _load_rules(settings)
    c = settings.corpus
    out = _output_dir(args, settings)
    samples = generate_corpus(
        rules,
        c.size,
        c.regex_fraction,
        c.seed,
        c.max_labels,
        off_topic_fraction=c.off_topic_fraction,
    )
    emerging = generate_emerging(c.emerging_size, c.seed)
    write_dataset(samples, out / "corpus.jsonl", rules)
    write_dataset(emerging, out / "emerging.jsonl", rules)

    table = Table(title="Label distribution")
    table.add_column("Id", justify="right")
    table.add_column("Topic")
    table.add_column("Count", justify="right")
    table.add_column("Share", justify="right")
    for row in label_distribution(samples, rules):
        table.add_row(str(row.topic_id), row.name, str(row.count), f"{row.percent:.1f}%")
    console.print(table)
    console.print(
        f"[green]Wrote {len(samples)} samples and {len(emerging)} off-topic texts to {out}[/green]"
    )


COMMANDS = {
    "tag": cmd_tag,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "ablate": cmd_ablate,
    "export": cmd_export,
    "sweep-threshold": cmd_sweep,
    "gen-corpus": cmd_gen_corpus,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", default=None, help="Path to config YAML or JSON file")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    common.add_argument("--variant", type=int, default=None, help="Model variant 1-5")
    common.add_argument("--seed", type=int, default=None, help="Random seed")
    common.add_argument("--threshold", type=float, default=None, help="Decision threshold")
    common.add_argument("--d-model", type=int, default=None, help="Encoder width")
    common.add_argument("--epochs", type=int, default=None, help="Maximum training epochs")
    common.add_argument("--lr", type=float, default=None, help="Learning rate")
    common.add_argument("--batch-size", type=int, default=None, help="Mini-batch size")
    common.add_argument("--rulebook", default=None, help="Path to the rulebook TSV")
    common.add_argument("--vectors", default=None, help="Precomputed vectors (JSON lines)")

    parser = argparse.ArgumentParser(
        description="Topic Fusion — regex features fused with dense text representations",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Variants:
  1 → regex rules only
  2 → text encoder, self-attention fusion
  3 → text encoder + bagged regex embeddings, self-attention fusion
  4 → text encoder + regex embeddings, linear fusion
  5 → text encoder + regex embeddings, self-attention fusion
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tag", parents=[common], help="Show the regex features of a text")
    p.add_argument("text")

    p = sub.add_parser("train", parents=[common], help="Train the configured variant")
    p.add_argument("--data", required=True, help="Dataset (JSON lines)")
    p.add_argument("--output", "-o", default=None, help="Output directory")

    p = sub.add_parser("evaluate", parents=[common], help="Evaluate a saved model")
    p.add_argument("--model", required=True, help="Saved model directory")
    p.add_argument("--data", required=True, help="Dataset (JSON lines)")

    p = sub.add_parser("predict", parents=[common], help="Predict topics")
    p.add_argument("--model", required=True, help="Saved model directory")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text", help="A single survey response")
    group.add_argument("--data", help="Dataset (JSON lines)")
    p.add_argument("--doc-id", default="", help="Document id for --text")

    p = sub.add_parser("ablate", parents=[common], help="Train and compare all five variants")
    p.add_argument("--data", default=None, help="Dataset (default: synthetic corpus)")
    p.add_argument("--output", "-o", default=None, help="Output directory")

    p = sub.add_parser("export", parents=[common], help="Write predictions as a bulk file")
    p.add_argument("--model", required=True, help="Saved model directory")
    p.add_argument("--data", required=True, help="Dataset (JSON lines)")
    p.add_argument("--output", "-o", required=True, help="Bulk file path")

    p = sub.add_parser(
        "sweep-threshold", parents=[common], help="F1 and emerging rate by threshold"
    )
    p.add_argument("--model", required=True, help="Saved model directory")
    p.add_argument("--data", required=True, help="Dataset (JSON lines)")
    p.add_argument("--thresholds", default=None, help="Comma-separated thresholds")

    p = sub.add_parser("gen-corpus", parents=[common], help="Write the synthetic corpus")
    p.add_argument("--output", "-o", default=None, help="Output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)

    try:
        settings = apply_overrides(
            load_config(args.config),
            variant=args.variant,
            seed=args.seed,
            threshold=args.threshold,
            d_model=args.d_model,
            epochs=args.epochs,
            lr=args.lr,
            batch_size=args.batch_size,
            rulebook=args.rulebook,
            vectors=args.vectors,
        )
        if args.verbose:
            settings.logging.level = "DEBUG"
        setup_logging(settings.logging)

        console.print(Panel.fit(
            f"[bold cyan]Topic Fusion[/bold cyan] — {args.command} "
            f"(variant {settings.variant}: {variant_spec(settings.variant).fusion_label})",
            border_style="cyan",
        ))
        COMMANDS[args.command](args, settings)
    except ValidationError as exc:
        console.print(f"[red]Invalid configuration:[/red] {exc}")
        return 2
    except TopicFusionError as exc:
        console.print(f"[red]Error:[/red] {exc}")
        return exc.exit_code
    except ValueError as exc:
        console.print(f"[red]Invalid input:[/red] {exc}")
        return 2
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted.[/yellow]")
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())
