from app.ml.evaluation import FoldSplit, evaluate, score, stratified_folds, summarize
from app.ml.features import featurize, featurize_many, featurize_sentences
from app.ml.model_trainer import LinearModel, loss_and_gradients, softmax, train
from app.ml.training_pipeline import pretrain_finetune, run_protocol, stratified_subsample, summarize_grid
