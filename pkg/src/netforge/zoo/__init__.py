"""Bundled architecture fixtures (definitions only, no weights)."""
from __future__ import annotations

from importlib import resources

from netforge.errors import NetforgeError

__all__ = ["ZooError", "fixture_names", "fixture_text", "load_fixture"]


class ZooError(NetforgeError):
    """Requested fixture does not exist."""


def fixture_names() -> list[str]:
    """Names of all bundled fixtures, sorted."""
    root = resources.files(__package__)
    return sorted(
        entry.name[: -len(".prototxt")]
        for entry in root.iterdir()
        if entry.name.endswith(".prototxt")
    )


def fixture_text(name: str) -> str:
    """Raw prototxt source of a bundled fixture."""
    resource = resources.files(__package__).joinpath(f"{name}.prototxt")
    if not resource.is_file():
        raise ZooError(f"unknown fixture {name!r}; available: {', '.join(fixture_names())}")
    return resource.read_text(encoding="utf-8")


def load_fixture(name: str):
    """Import a bundled fixture as an IR model."""
    from netforge.frontends import import_model

    return import_model(fixture_text(name), "caffe")
