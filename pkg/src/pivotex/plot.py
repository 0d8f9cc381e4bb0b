"""Timeline chart of extracted pairs per publication day."""

from collections import Counter
from collections.abc import Iterable
from datetime import date, timedelta

from pivotex.color import bright_blue, dim_white, magenta


def pair_timeline(days: Iterable[date]) -> dict[date, int]:
    """Count extracted pairs per source publication day."""
    return dict(Counter(days))


def expand_timeline(timeline: dict[date, int], earliest: date, latest: date) -> dict[date, int]:
    """Fill in missing dates with 0 so every day in range is present.

    Args:
        timeline: Sparse day counts
        earliest: First date in the range
        latest: Last date in the range

    Returns:
        Dense day counts from earliest to latest
    """
    expanded: dict[date, int] = {}
    current = earliest
    while current <= latest:
        expanded[current] = timeline.get(current, 0)
        current = current + timedelta(days=1)
    return expanded


def bucket_timeline(timeline: dict[date, int], num_buckets: int) -> list[int]:
    """Sum a dense timeline into num_buckets equal-sized buckets."""
    buckets = [0] * num_buckets
    sorted_dates = sorted(timeline)
    total_days = len(sorted_dates)
    for i, current_date in enumerate(sorted_dates):
        buckets[min((i * num_buckets) // total_days, num_buckets - 1)] += timeline[current_date]
    return buckets


_BAR_LEVELS = [
    (100, "█"),
    (87.5, "▇"),
    (75, "▆"),
    (62.5, "▅"),
    (50, "▄"),
    (37.5, "▃"),
    (25, "▂"),
]


def _map_value_to_bar(value: int, max_value: int) -> str:
    if max_value == 0 or value == 0:
        return " "
    percentage = value / max_value * 100
    for threshold, char in _BAR_LEVELS:
        if percentage >= threshold:
            return char
    return "▁"


def render_timeline_chart(
    timeline: dict[date, int],
    num_buckets: int,
    color_enabled: bool = False,
) -> tuple[str, str, str]:
    """Render day counts as a one-line bar chart framed by its date range.

    Args:
        timeline: Day counts, may be sparse
        num_buckets: Number of bars
        color_enabled: Whether to apply colors to the output

    Returns:
        Tuple of (date_line, chart_line, underline); empty strings for an
        empty timeline
    """
    if not timeline:
        return ("", "", "")

    earliest, latest = min(timeline), max(timeline)
    buckets = bucket_timeline(expand_timeline(timeline, earliest, latest), num_buckets)
    max_value = max(buckets)
    bars = "".join(_map_value_to_bar(value, max_value) for value in buckets)

    chart_width = len(bars) + 2
    start, end = earliest.isoformat(), latest.isoformat()
    date_line = f"{start}{' ' * max(0, chart_width - len(start) - len(end))}{end}"

    max_count = max(timeline.values())
    top_day = min(d for d, count in timeline.items() if count == max_count)
    top_day_str = magenta(f"{max_count} ({top_day.isoformat()})", color_enabled)

    delimiter = dim_white("┊", color_enabled)
    chart_line = f"{delimiter}{bright_blue(bars, color_enabled)}{delimiter} {top_day_str}"
    underline = dim_white("‾" * chart_width, color_enabled)
    return (date_line, chart_line, underline)
