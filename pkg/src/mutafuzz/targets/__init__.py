"""Bundled MiniLang target corpus used by the demos and the test suite."""

from importlib import resources
from pathlib import Path

TARGET_NAMES = (
    "arith_basic",
    "bounds_walker",
    "byte_switch",
    "cache_guard",
    "dead_code",
    "loop_sum",
    "magic_gate",
    "multi_fn",
    "overflow_trap",
    "straight_line",
)


def target_source(name: str) -> str:
    return (resources.files(__package__) / f"{name}.mini").read_text(encoding="utf-8")


def target_path(name: str) -> Path:
    return Path(str(resources.files(__package__) / f"{name}.mini"))
