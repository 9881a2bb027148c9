from app.pipeline.generate import GenerateReport, HomeSummary, process_script, run_generate
from app.pipeline.train_eval import TrainEvalReport, run_train_eval
