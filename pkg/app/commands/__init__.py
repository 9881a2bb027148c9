from app.commands.export import export_command
from app.commands.generate import generate_command
from app.commands.ground import ground_command
from app.commands.instrument import instrument_command
from app.commands.simulate import simulate_command
from app.commands.stats import stats_command
from app.commands.train_eval import train_eval_command
