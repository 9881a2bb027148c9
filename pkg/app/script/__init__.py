from .parser import (
    merge_scripts,
    normalize_steps,
    parse_day,
    parse_line,
    parse_script,
    parse_time_range,
    render_day,
    render_header,
    render_script,
    render_step,
    split_day_blocks,
    ScriptBlock,
)

__all__ = [
    "parse_line",
    "parse_script",
    "parse_day",
    "parse_time_range",
    "render_step",
    "render_script",
    "render_header",
    "render_day",
    "normalize_steps",
    "split_day_blocks",
    "merge_scripts",
    "ScriptBlock",
]
