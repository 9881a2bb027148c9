from typing import Optional


class VirtualSenseError(ValueError):
    """Base class for every domain error raised by the package"""


class LayoutError(VirtualSenseError):
    """Layout document failed schema or invariant validation"""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class ScriptParseError(VirtualSenseError):
    """A command line does not follow the action grammar"""

    def __init__(self, code: str, column: int, message: str, line: str = ""):
        self.code = code
        self.column = column
        self.line = line
        super().__init__(f"[{code}] column {column}: {message}")


class GroundingError(VirtualSenseError):
    pass


class EmbeddingProviderError(GroundingError):
    """Embedding backend failed for a given token"""

    def __init__(self, token: str, reason: str):
        self.token = token
        super().__init__(f"embedding failed for '{token}': {reason}")


class SimulationError(VirtualSenseError):
    pass


class PathPlanningError(SimulationError):
    pass


class SensorPlacementError(VirtualSenseError):
    pass


class DatasetError(VirtualSenseError):
    pass


class TrainingError(VirtualSenseError):
    pass


class PipelineConfigError(VirtualSenseError):
    pass


class StateChangeError(SimulationError):
    """Unknown object or a state its properties do not allow"""
