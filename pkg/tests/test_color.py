"""Tests for color helpers."""

from colorama import Fore, Style

from pivotex.color import bright_white, colorize, score_color, should_use_color


def test_should_use_color_respects_flag() -> None:
    """Test explicit flags win over terminal detection."""
    assert should_use_color(True)
    assert not should_use_color(False)


def test_colorize() -> None:
    """Test text is wrapped only when enabled."""
    assert colorize("x", Fore.RED, False) == "x"
    assert colorize("x", Fore.RED, True) == f"{Fore.RED}x{Style.RESET_ALL}"
    assert bright_white("Pairs", True).startswith(Style.BRIGHT)


def test_score_color_bands() -> None:
    """Test exact, close and distant scores get different colors."""
    assert score_color(0.0, True) == Style.BRIGHT + Fore.GREEN
    assert score_color(0.3, True) == Style.BRIGHT + Fore.YELLOW
    assert score_color(0.8, True) == Style.BRIGHT + Fore.RED
    assert score_color(0.0, False) == ""
