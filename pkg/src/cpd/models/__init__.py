"""Bundled example models, loadable by file name."""

from __future__ import annotations

from importlib import resources

from ..parser import SystemSpec, parse

__all__ = ["load", "model_text", "model_names"]


def model_names() -> list[str]:
    return sorted(
        entry.name
        for entry in resources.files(__package__).iterdir()
        if entry.name.endswith(".cpd")
    )


def model_text(name: str) -> str:
    if not name.endswith(".cpd"):
        name += ".cpd"
    return (resources.files(__package__) / name).read_text(encoding="utf-8")


def load(name: str) -> SystemSpec:
    return parse(model_text(name), name)
