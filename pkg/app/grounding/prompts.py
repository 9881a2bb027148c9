from typing import Sequence

from jinja2 import DictLoader, Environment, StrictUndefined

REPAIR_TEMPLATE = """\
You convert household routines into simulator commands.
Every command has the form: [action] <object> (HH:MM - HH:MM) (room)
Actions: {{ actions | join(", ") }}
Objects available in {{ room }}: {{ objects | join(", ") }}

The following command is invalid: {{ reason }}
{{ line }}

{% if context %}Surrounding commands:
{% for neighbour in context %}{{ neighbour }}
{% endfor %}{% endif %}
Rewrite the invalid command so it uses only the listed actions and objects and keeps its
time and room. Return ONLY the rewritten command.
"""

LABEL_TEMPLATE = """\
You label smart home activities. Choose ONE label from the label set that best
describes the activity below. Return ONLY the label, spelled exactly as in the set.

Activity Name: {{ activity_name }}
Routine Block:
{{ routine_text }}
Label Set: {{ labels | join(", ") }}
{% if "bed_to_toilet" in labels or "Bed_to_Toilet" in labels %}
Note: 'bed_to_toilet' means walking from the bed to the bathroom.
{% endif %}
Which label fits this activity best? Return ONLY the label.
"""

prompts = Environment(
    loader=DictLoader({"repair.txt": REPAIR_TEMPLATE, "label.txt": LABEL_TEMPLATE}),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    autoescape=False,
)


def render_repair_prompt(
    line: str, reason: str, context: Sequence[str], room: str, actions: Sequence[str], objects: Sequence[str]
) -> str:
    return prompts.get_template("repair.txt").render(
        line=line, reason=reason, context=list(context), room=room, actions=list(actions), objects=list(objects)
    )


def render_label_prompt(activity_name: str, routine_text: str, labels: Sequence[str]) -> str:
    return prompts.get_template("label.txt").render(
        activity_name=activity_name, routine_text=routine_text.strip(), labels=list(labels)
    )
