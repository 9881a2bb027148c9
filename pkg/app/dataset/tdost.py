from typing import List

from app.schemas.dataset import ActivityWindow, TdostVariant
from app.schemas.sensors import SensorEvent

_ONES = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = ["", "", "twenty", "thirty", "forty", "fifty"]


def number_words(n: int) -> str:
    """0..59 in English words, compounds space separated ("forty five")"""
    if not 0 <= n <= 59:
        raise ValueError(f"expected 0..59, got {n}")
    if n < 20:
        return _ONES[n]
    tens, ones = divmod(n, 10)
    return _TENS[tens] if ones == 0 else f"{_TENS[tens]} {_ONES[ones]}"


def tdost_basic(event: SensorEvent) -> str:
    room = "_".join(event.room.lower().split())
    return f"{event.kind.value} sensor in {room} fired with value {event.value.value}"


def spoken_time(hour: int, minute: int) -> str:
    """Twelve-hour spoken form: 12:06 -> 'twelve hours six minutes PM'"""
    twelve = hour % 12 or 12
    meridiem = "AM" if hour < 12 else "PM"
    return f"{number_words(twelve)} hours {number_words(minute)} minutes {meridiem}"


def tdost_temporal(event: SensorEvent) -> str:
    return f"{tdost_basic(event)} at {spoken_time(event.timestamp.hour, event.timestamp.minute)}"


def render_sentences(window: ActivityWindow, variant: TdostVariant) -> List[str]:
    render = tdost_basic if variant is TdostVariant.BASIC else tdost_temporal
    return [render(event) for event in window.events]
