"""Bundled example specifications with inputs and golden traces."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

CORPUS_DIR = Path(__file__).parent


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    spec_path: Path
    input_path: Path
    golden_path: Path

    def spec_text(self) -> str:
        return self.spec_path.read_text()

    def input_text(self) -> str:
        return self.input_path.read_text()

    def golden_text(self) -> str:
        return self.golden_path.read_text()


def provide_corpus() -> list:
    """Every ``<name>.sl`` that ships with an input and a golden trace, by name."""
    entries = []
    for spec in sorted(CORPUS_DIR.glob("*.sl")):
        entries.append(CorpusEntry(spec.stem, spec, spec.with_suffix(".input"),
                                   spec.with_suffix(".golden")))
    return entries


def entry(name: str) -> CorpusEntry:
    for e in provide_corpus():
        if e.name == name:
            return e
    raise KeyError(f"no corpus entry named {name!r}")
