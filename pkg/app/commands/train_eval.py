from typing import List, Optional

import typer

from app.commands.common import handle_errors, summary
from app.config import load_pipeline_config
from app.pipeline.train_eval import run_train_eval
from app.schemas.dataset import TdostVariant


@handle_errors
def train_eval_command(
    config: Optional[str] = typer.Option(None, "--config", help="Pipeline config JSON"),
    virtual: Optional[str] = typer.Option(None, "--virtual", help="Virtual windows JSONL"),
    real: Optional[str] = typer.Option(None, "--real", help="Real windows JSONL"),
    real_fraction: Optional[List[float]] = typer.Option(None, "--real-fraction", help="Repeatable"),
    folds: Optional[int] = typer.Option(None, "--folds"),
    seeds: Optional[int] = typer.Option(None, "--seeds", help="Number of seed replicates"),
    seed: Optional[int] = typer.Option(None, "--seed", help="First seed"),
    variant: Optional[TdostVariant] = typer.Option(None, "--variant"),
    mix: Optional[bool] = typer.Option(None, "--mix/--no-mix", help="Fine-tune on virtual + real data"),
    epochs: Optional[int] = typer.Option(None, "--epochs"),
    learning_rate: Optional[float] = typer.Option(None, "--lr"),
    weight_decay: Optional[float] = typer.Option(None, "--weight-decay"),
    optimizer: Optional[str] = typer.Option(None, "--optimizer", help="sgd or adam"),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
) -> None:
    """Compare real-only training against virtual pretraining plus fine-tuning."""
    overrides = {
        "output_dir": out,
        "seed": seed,
        "train_eval.virtual": virtual,
        "train_eval.real": real,
        "train_eval.fractions": list(real_fraction) if real_fraction else None,
        "train_eval.folds": folds,
        "train_eval.seeds": seeds,
        "train_eval.variant": variant.value if variant else None,
        "train_eval.mix": mix,
        "train_eval.train.epochs": epochs,
        "train_eval.train.learning_rate": learning_rate,
        "train_eval.train.weight_decay": weight_decay,
        "train_eval.train.optimizer": optimizer,
    }
    report = run_train_eval(load_pipeline_config(config, overrides))
    typer.echo(report.table, nl=False)
    summary(f"{len(report.runs)} run(s) -> {report.output_dir}")
