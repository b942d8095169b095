"""Bundled scenario files."""
from importlib import resources
from pathlib import Path

__all__ = ["bundled_scenario_paths", "bundled_scenario_path"]


def bundled_scenario_paths() -> list[Path]:
    """All bundled scenario files, sorted by name."""
    root = resources.files(__name__)
    return sorted(
        (Path(str(p)) for p in root.iterdir() if str(p).endswith(".yaml")),
        key=lambda p: p.name,
    )


def bundled_scenario_path(name: str) -> Path:
    """Look up a bundled scenario by file stem (e.g. ``flat_periodic``)."""
    for p in bundled_scenario_paths():
        if p.stem == name:
            return p
    known = ", ".join(p.stem for p in bundled_scenario_paths())
    raise KeyError(f"no bundled scenario {name!r}; known: {known}")
