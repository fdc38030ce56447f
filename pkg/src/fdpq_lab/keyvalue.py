"""Parser for the documented ``key = value`` configuration file format."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from fdpq_lab.errors import ConfigurationError

LOGGER = logging.getLogger(__name__)


@dataclass
class KeyValueDocument:
    """Top-level keys plus the ordered list of ``[section]`` blocks."""

    values: dict[str, str] = field(default_factory=dict)
    sections: list[tuple[str, dict[str, str]]] = field(default_factory=list)

    def sections_named(self, name: str) -> list[dict[str, str]]:
        return [body for section, body in self.sections if section == name]


def parse_key_value_text(text: str, *, source: str = "<string>") -> KeyValueDocument:
    """Parse ``key = value`` lines with ``#`` comments and ``[section]`` headers.

    Keys are case-insensitive and normalised to lower case with dashes mapped to
    underscores. A repeated key inside the same block is an error.
    """

    document = KeyValueDocument()
    current = document.values
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section_name = line[1:-1].strip().lower()
            if not section_name:
                raise ConfigurationError(f"{source}:{line_number}: empty section name")
            current = {}
            document.sections.append((section_name, current))
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{line_number}: expected 'key = value', got {raw_line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if not key:
            raise ConfigurationError(f"{source}:{line_number}: missing key")
        if key in current:
            raise ConfigurationError(f"{source}:{line_number}: duplicate key '{key}'")
        current[key] = value
    return document


def read_key_value_file(path: str | Path) -> KeyValueDocument:
    """Read and parse a key-value file from disk."""

    file_path = Path(path)
    try:
        text = file_path.read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise ConfigurationError(f"Cannot read config file {file_path}: {exc}") from exc
    LOGGER.debug("Parsing key-value config %s", file_path)
    return parse_key_value_text(text, source=str(file_path))


def split_list(value: str) -> list[str]:
    """Split a comma or whitespace separated list, dropping empty items."""

    return [item for item in value.replace(",", " ").split() if item]
