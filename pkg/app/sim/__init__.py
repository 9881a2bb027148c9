from app.sim.engine import SimulationResult, effective_step_times, simulate
from app.sim.paths import plan_path, room_adjacency
from app.sim.trajectory import StepRange, Trajectory, TrajectorySample
