"""Readers for raw bibliographic export files.

Two input formats are supported:

* Field-tagged plain text: every field line starts with a two-character
  uppercase alphanumeric tag followed by one space (``AU Gao, RX``);
  continuation lines start with exactly three spaces; a record ends with a
  bare ``ER`` line.  ``FN``/``VR`` header lines may precede the first record
  and a bare ``EF`` line ends the file.
* CSV: first row is a header; a configurable header map assigns a field tag
  to each column.  Multi-valued cells (authors, keywords, addresses) are
  split on ``"; "``.

Both readers produce :class:`RawRecord` objects, an ordered tag -> values
multimap that preserves unknown tags untouched.  No interpretation of the
values happens here; that is the cleaning step's job.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "RawRecord",
    "AddressEntry",
    "IngestError",
    "MalformedTagLine",
    "UnterminatedRecord",
    "EmptyFile",
    "MissingRequiredColumn",
    "RaggedRow",
    "EmptyAddress",
    "DEFAULT_CSV_HEADER_MAP",
    "parse_tagged",
    "parse_csv",
    "parse_address",
    "format_tagged",
    "read_export_text",
]


class IngestError(Exception):
    """Base class for input parsing failures."""


class MalformedTagLine(IngestError):
    def __init__(self, line_no: int, line: str):
        super().__init__(f"line {line_no}: neither a tag line nor a continuation: {line!r}")
        self.line_no = line_no


class UnterminatedRecord(IngestError):
    def __init__(self, line_no: int):
        super().__init__(f"line {line_no}: end of input before ER terminator")
        self.line_no = line_no


class EmptyFile(IngestError):
    pass


class MissingRequiredColumn(IngestError):
    def __init__(self, columns: list[str]):
        super().__init__(f"required column(s) missing from CSV header: {', '.join(columns)}")
        self.columns = columns


class RaggedRow(IngestError):
    def __init__(self, row_no: int, expected: int, got: int):
        super().__init__(f"row {row_no}: expected {expected} cells, got {got}")
        self.row_no = row_no


class EmptyAddress(IngestError):
    pass


@dataclass
class RawRecord:
    """One unvalidated record: an ordered multimap of 2-char tag -> values."""

    tags: dict[str, list[str]] = field(default_factory=dict)

    def add(self, tag: str, value: str) -> None:
        self.tags.setdefault(tag, []).append(value)

    def first(self, tag: str) -> str | None:
        values = self.tags.get(tag)
        return values[0] if values else None

    def joined(self, tag: str, sep: str = " ") -> str | None:
        """All values of ``tag`` joined, for fields that wrap across lines."""
        values = self.tags.get(tag)
        return sep.join(values) if values else None


@dataclass
class AddressEntry:
    """One parsed address field: optional bracketed author names plus the
    comma-separated postal address segments."""

    author_names: list[str]
    address_parts: list[str]
    raw: str


_TAG_LINE = re.compile(r"^([A-Z0-9]{2})(?: (.*))?$")
_HEADER_TAGS = frozenset({"FN", "VR"})

# Documented defaults for Web of Science style CSV exports; callers may
# extend or override per file.  Unmapped columns are ignored.
DEFAULT_CSV_HEADER_MAP: dict[str, str] = {
    "Authors": "AU",
    "Author Full Names": "AF",
    "Article Title": "TI",
    "Source Title": "SO",
    "Author Keywords": "DE",
    "Keywords Plus": "ID",
    "Abstract": "AB",
    "Addresses": "C1",
    "Publisher": "PU",
    "Publication Year": "PY",
    "DOI": "DI",
    "Times Cited, WoS Core": "TC",
}

# Tags whose CSV cells hold several values separated by "; ".
_MULTI_VALUE_TAGS = frozenset({"AU", "AF", "DE", "ID", "C1"})


def read_export_text(path: str | Path, latin1_fallback: bool = False) -> str:
    """Read an export file as UTF-8.

    Malformed bytes are replaced rather than fatal.  With ``latin1_fallback``
    a file that is not valid UTF-8 is re-read as latin-1 instead.
    """
    data = Path(path).read_bytes()
    if latin1_fallback:
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError:
            return data.decode("latin-1")
    return data.decode("utf-8", errors="replace")


def parse_tagged(stream: str | io.TextIOBase) -> list[RawRecord]:
    """Parse a field-tagged export into raw records.

    Raises :class:`EmptyFile` on an entirely blank input,
    :class:`MalformedTagLine` for lines that fit no rule and
    :class:`UnterminatedRecord` when input ends inside a record.
    A header-only file (``FN``/``VR``/``EF``) yields an empty list.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream.read().splitlines()

    records: list[RawRecord] = []
    current: RawRecord | None = None
    last_tag: str | None = None
    saw_content = False

    for line_no, raw_line in enumerate(lines, start=1):
        line = raw_line.rstrip()
        if not line:
            continue
        saw_content = True

        if line == "EF":
            if current is not None:
                raise UnterminatedRecord(line_no)
            break
        if line == "ER":
            if current is None:
                current = RawRecord()
            records.append(current)
            current, last_tag = None, None
            continue

        if raw_line.startswith("   "):
            if current is None or last_tag is None:
                raise MalformedTagLine(line_no, raw_line)
            current.add(last_tag, raw_line[3:].rstrip())
            continue

        match = _TAG_LINE.match(line)
        if match is None:
            raise MalformedTagLine(line_no, raw_line)
        tag, value = match.group(1), match.group(2) or ""
        if current is None and tag in _HEADER_TAGS:
            continue
        if current is None:
            current = RawRecord()
        current.add(tag, value)
        last_tag = tag

    if not saw_content:
        raise EmptyFile("input contains no records")
    if current is not None:
        raise UnterminatedRecord(len(lines))
    return records


def format_tagged(records: list[RawRecord]) -> str:
    """Serialize records back to the tagged format (the parse round-trip)."""
    out: list[str] = ["FN bibmetrics export", "VR 1.0"]
    for record in records:
        for tag, values in record.tags.items():
            for i, value in enumerate(values):
                out.append(f"{tag} {value}" if i == 0 else f"   {value}")
        out.append("ER")
        out.append("")
    out.append("EF")
    return "\n".join(out) + "\n"


def _split_multi(cell: str) -> list[str]:
    """Split a multi-valued cell on "; " outside bracketed name groups."""
    parts: list[str] = []
    depth = 0
    start = 0
    i = 0
    while i < len(cell):
        ch = cell[i]
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth = max(0, depth - 1)
        elif depth == 0 and ch == ";" and cell[i + 1 : i + 2] == " ":
            parts.append(cell[start:i])
            i += 2
            start = i
            continue
        i += 1
    parts.append(cell[start:])
    return [p.strip() for p in parts if p.strip()]


def parse_csv(
    stream: str | io.TextIOBase,
    header_map: dict[str, str] | None = None,
) -> list[RawRecord]:
    """Parse a CSV export into raw records, one per data row.

    ``header_map`` maps column names to field tags and must cover the TI,
    AU and PY tags; :data:`DEFAULT_CSV_HEADER_MAP` is used when omitted.
    Quoted cells may contain commas and newlines.
    """
    header_map = dict(header_map) if header_map is not None else dict(DEFAULT_CSV_HEADER_MAP)
    if isinstance(stream, str):
        stream = io.StringIO(stream)

    reader = csv.reader(stream, strict=True)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFile("CSV input has no header row") from None
    # Some exports carry a BOM on the first column name.
    if header and header[0].startswith("﻿"):
        header[0] = header[0].lstrip("﻿")

    column_tags = [header_map.get(name.strip()) for name in header]
    present = {tag for tag in column_tags if tag}
    required = {"TI", "AU", "PY"}
    if not required <= present:
        raise MissingRequiredColumn(sorted(required - present))

    records: list[RawRecord] = []
    row_no = 1  # header is row 1
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise RaggedRow(row_no + 1, len(header), -1) from exc
        row_no += 1
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise RaggedRow(row_no, len(header), len(row))
        record = RawRecord()
        for tag, cell in zip(column_tags, row):
            if tag is None:
                continue
            cell = cell.strip()
            if not cell:
                continue
            values = _split_multi(cell) if tag in _MULTI_VALUE_TAGS else [cell]
            for value in values:
                record.add(tag, value)
        records.append(record)
    return records


_BRACKET_PREFIX = re.compile(r"^\[(?P<names>.*?)\]\s*(?P<rest>.*)$", re.DOTALL)


def parse_address(c1_value: str) -> AddressEntry:
    """Split one address field into bracketed author names and address parts.

    ``[Gao, Robert X.] Case Western Reserve Univ, Cleveland, OH 44106 USA``
    yields one author name and three address segments.  Raises
    :class:`EmptyAddress` when nothing remains outside the bracket group.
    """
    raw = c1_value.strip()
    names: list[str] = []
    rest = raw
    match = _BRACKET_PREFIX.match(raw)
    if match is not None:
        names = [n.strip() for n in match.group("names").split("; ") if n.strip()]
        rest = match.group("rest")
    parts = [p.strip() for p in rest.split(", ") if p.strip()]
    if not parts:
        raise EmptyAddress(f"address has no content outside brackets: {c1_value!r}")
    return AddressEntry(author_names=names, address_parts=parts, raw=raw)
