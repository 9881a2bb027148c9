from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterator, List, NamedTuple, Union

import numpy as np
import pandas as pd

from app.schemas.layout import Vec3

US_PER_SECOND = 1_000_000


class TrajectorySample(NamedTuple):
    t: float
    position: Vec3


class StepRange(NamedTuple):
    step_index: int
    start_us: int
    end_us: int


@dataclass
class Trajectory:
    """Agent positions on a fixed time grid.

    `t_us` holds integer microseconds since midnight of `origin`; `step_index` is the
    active script step per sample, -1 in gaps between steps.
    """

    origin: datetime
    t_us: np.ndarray
    positions: np.ndarray
    step_index: np.ndarray
    step_ranges: List[StepRange] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.t_us.shape[0])

    @property
    def seconds(self) -> np.ndarray:
        return self.t_us / US_PER_SECOND

    @property
    def span_us(self) -> int:
        return int(self.t_us[-1] - self.t_us[0]) if len(self) else 0

    def timestamp(self, i: int) -> datetime:
        return self.origin + timedelta(microseconds=int(self.t_us[i]))

    def samples(self) -> Iterator[TrajectorySample]:
        for t, (x, y, z) in zip(self.t_us, self.positions):
            yield TrajectorySample(t / US_PER_SECOND, Vec3(x=float(x), y=float(y), z=float(z)))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": self.seconds,
                "x": self.positions[:, 0],
                "y": self.positions[:, 1],
                "z": self.positions[:, 2],
                "step_index": self.step_index,
            }
        )

    def write_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
