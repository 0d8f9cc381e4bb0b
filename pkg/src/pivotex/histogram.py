"""Horizontal bar rendering for stage counters and score distributions."""

import re
from collections.abc import Iterable
from dataclasses import dataclass, field

from pivotex.color import bright_blue, dim_white


_ANSI_ESCAPE = re.compile(r"\x1b\[[0-9;]*m")

LABEL_WIDTH = 13


@dataclass
class Histogram:
    """Ordered counts per category.

    Attributes:
        values: Category to count, in insertion order
    """

    values: dict[str, int] = field(default_factory=dict)

    def update(self, key: str, amount: int) -> None:
        self.values[key] = self.values.get(key, 0) + amount


def score_histogram(scores: Iterable[float], bins: int = 5, upper: float = 1.0) -> Histogram:
    """Bucket filter scores into equal-width bins over [0, upper].

    Scores above upper land in a final overflow bin.
    """
    width = upper / bins
    labels = [f"{i * width:.1f}-{(i + 1) * width:.1f}" for i in range(bins)]
    overflow = f">{upper:.1f}"
    histogram = Histogram({label: 0 for label in [*labels, overflow]})
    for value in scores:
        if value > upper:
            histogram.update(overflow, 1)
        else:
            histogram.update(labels[min(int(value / width), bins - 1)], 1)
    return histogram


def _visual_len(text: str) -> int:
    return len(_ANSI_ESCAPE.sub("", text))


def render_histogram(
    histogram: Histogram,
    total_blocks: int,
    scale_to: int | None = None,
    color_enabled: bool = False,
) -> list[str]:
    """Render a histogram as one bar line per category.

    Args:
        histogram: Counts to render
        total_blocks: Bar width of the scale maximum
        scale_to: Count drawn at full width, defaults to the largest count
        color_enabled: Whether to apply colors to the output

    Returns:
        Formatted lines in category order
    """
    peak = scale_to if scale_to is not None else max(histogram.values.values(), default=0)

    lines = []
    for category, value in histogram.values.items():
        name = category[: LABEL_WIDTH - 2] + "." if len(category) > LABEL_WIDTH - 1 else category
        bar_length = int(value / peak * total_blocks) if peak > 0 else 0
        colored_name = dim_white(name, color_enabled)
        colored_bars = bright_blue("█" * bar_length, color_enabled)
        delimiter = dim_white("┊", color_enabled)
        padding = " " * (LABEL_WIDTH - _visual_len(colored_name))
        lines.append(f"{colored_name}{padding}{delimiter}{colored_bars} {value}")

    return lines
