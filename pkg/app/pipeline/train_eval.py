import json
import logging
from pathlib import Path
from typing import Any, Dict, List

from pydantic import BaseModel, Field

from app.config import config_hash, settings, validate_inputs
from app.dataset.windows import read_windows_jsonl
from app.exceptions import TrainingError
from app.ml.features import featurize_many
from app.ml.training_pipeline import METRIC_COLUMNS, pretrain_finetune, run_protocol, summarize_grid
from app.schemas.pipeline import PipelineConfig

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.json"
TABLE_FILE = "metrics.txt"
MODEL_FILE = "model.json"
PROVENANCE_FILE = "provenance.json"


class TrainEvalReport(BaseModel):
    config_hash: str
    seed: int
    output_dir: str
    runs: List[Dict[str, Any]] = Field(default_factory=list)
    summary: List[Dict[str, Any]] = Field(default_factory=list)
    table: str = ""


def format_table(summary) -> str:
    """Aligned text rendering of the per-(fraction, arm) summary"""
    if summary.empty:
        return "(no runs)\n"
    return summary.to_string(index=False, float_format=lambda v: f"{v:.4f}") + "\n"


def run_train_eval(config: PipelineConfig) -> TrainEvalReport:
    """Real-only vs virtual-pretrained arms over real-data fractions and seeds"""
    validate_inputs(config, generate=False, train_eval=True)
    protocol = config.train_eval
    virtual = read_windows_jsonl(protocol.virtual)
    real = read_windows_jsonl(protocol.real)
    if not real:
        raise TrainingError(f"no windows in {protocol.real}")
    seeds = [config.seed + i for i in range(protocol.seeds)]
    logger.info(
        f"🚀 Protocol: {len(virtual)} virtual / {len(real)} real window(s), fractions {protocol.fractions}, "
        f"{protocol.folds} fold(s), seeds {seeds}"
    )

    grid = run_protocol(
        virtual,
        real,
        fractions=protocol.fractions,
        folds=protocol.folds,
        seeds=seeds,
        variant=protocol.variant,
        config=protocol.train,
        mix=protocol.mix,
    )
    summary = summarize_grid(grid)
    digest = config_hash(config)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = TrainEvalReport(
        config_hash=digest,
        seed=config.seed,
        output_dir=str(out_dir),
        runs=grid.to_dict(orient="records"),
        summary=summary.to_dict(orient="records"),
        table=format_table(summary),
    )
    with open(out_dir / METRICS_FILE, "w", encoding="utf-8", newline="\n") as f:
        json.dump(
            {
                "config_hash": digest,
                "seed": config.seed,
                "metrics": METRIC_COLUMNS,
                "runs": report.runs,
                "summary": report.summary,
            },
            f,
            indent=2,
        )
        f.write("\n")
    with open(out_dir / TABLE_FILE, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# config {digest} seed {config.seed}\n")
        f.write(report.table)

    train_config = protocol.train.model_copy(update={"seed": config.seed})
    X_virtual = featurize_many(virtual, protocol.variant, train_config.n_features)
    X_real = featurize_many(real, protocol.variant, train_config.n_features)
    model = pretrain_finetune(
        (X_virtual, [r.label for r in virtual]),
        (X_real, [r.label for r in real]),
        train_config,
        mix=protocol.mix,
    )
    model.save(out_dir / MODEL_FILE)

    with open(out_dir / PROVENANCE_FILE, "w", encoding="utf-8", newline="\n") as f:
        json.dump(
            {
                "config_hash": digest,
                "seed": config.seed,
                "version": settings.app_version,
                "outputs": [METRICS_FILE, TABLE_FILE, MODEL_FILE],
            },
            f,
            indent=2,
        )
        f.write("\n")
    logger.info(f"✅ Wrote {len(report.runs)} run(s) to {out_dir}")
    return report
