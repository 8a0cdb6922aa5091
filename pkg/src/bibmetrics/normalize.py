"""Raw record cleaning: validated paper records and the cleaned JSON file.

Raw exports leave useful data implicit.  Affiliation country is buried in
the last segment of the address field, author name casing is inconsistent,
and citation counts may simply be missing.  This module turns
:class:`~bibmetrics.ingest.RawRecord` objects into validated
:class:`PaperRecord` objects, deduplicates them, and writes the cleaned
corpus as a single reproducible JSON document.

Nothing in here is fatal: every dropped or repaired record is reported as a
:class:`Diagnostic` instead.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable

from .ingest import AddressEntry, EmptyAddress, RawRecord, parse_address

__all__ = [
    "Affiliation",
    "PaperRecord",
    "Diagnostic",
    "UnrecognizedCountry",
    "DEFAULT_COUNTRY_ALIASES",
    "load_alias_file",
    "extract_country",
    "canonicalize_name",
    "clean",
    "emit_json",
    "load_json",
    "JSON_SCHEMA_VERSION",
]

JSON_SCHEMA_VERSION = "1"


class UnrecognizedCountry(Exception):
    """Raised in strict mode when the final address segment is unknown."""


@dataclass
class Affiliation:
    institution: str
    country: str
    linked_authors: list[str] = field(default_factory=list)


@dataclass
class PaperRecord:
    """One cleaned publication."""

    id: str
    title: str
    doi: str | None
    abstract: str | None
    year: int
    source: str
    publisher: str | None
    authors: list[str]
    affiliations: list[Affiliation]
    keywords: list[str]
    times_cited: int


@dataclass
class Diagnostic:
    """One cleaning event: a dropped record, an imputed value, a repair."""

    code: str
    message: str
    record: str | None = None

    def __str__(self) -> str:
        where = f" [{self.record}]" if self.record else ""
        return f"{self.code}{where}: {self.message}"


# Raw country spellings seen in exports mapped to their canonical names.
DEFAULT_COUNTRY_ALIASES: dict[str, str] = {
    "Peoples R China": "China",
    "England": "United Kingdom",
    "Scotland": "United Kingdom",
    "Wales": "United Kingdom",
    "North Ireland": "United Kingdom",
    "USA": "USA",
}

# Accepted country names for strict mode, beyond alias targets.
_KNOWN_COUNTRIES = frozenset(
    {
        "Argentina", "Australia", "Austria", "Bangladesh", "Belgium", "Brazil",
        "Bulgaria", "Canada", "Chile", "China", "Colombia", "Croatia", "Cuba",
        "Czech Republic", "Denmark", "Ecuador", "Egypt", "Estonia", "Finland",
        "France", "Germany", "Greece", "Hungary", "Iceland", "India",
        "Indonesia", "Iran", "Iraq", "Ireland", "Israel", "Italy", "Japan",
        "Jordan", "Kenya", "Kuwait", "Latvia", "Lebanon", "Lithuania",
        "Luxembourg", "Malaysia", "Mexico", "Morocco", "Netherlands",
        "New Zealand", "Nigeria", "Norway", "Oman", "Pakistan", "Peru",
        "Philippines", "Poland", "Portugal", "Qatar", "Romania", "Russia",
        "Saudi Arabia", "Serbia", "Singapore", "Slovakia", "Slovenia",
        "South Africa", "South Korea", "Spain", "Sri Lanka", "Sweden",
        "Switzerland", "Taiwan", "Thailand", "Tunisia", "Turkey", "Ukraine",
        "United Arab Emirates", "United Kingdom", "Uruguay", "USA", "Vietnam",
    }
)


def load_alias_file(path: str | Path) -> dict[str, str]:
    """Read a country alias file: one ``raw=canonical`` pair per line,
    ``#`` starts a comment, blank lines ignored."""
    aliases: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'raw=canonical', got {line!r}")
        raw, canonical = line.split("=", 1)
        aliases[raw.strip()] = canonical.strip()
    return aliases


_STATE_ZIP = re.compile(r"^[A-Z]{2} \d{5}(?:-\d{4})? (?=USA$)")


def extract_country(
    entry: AddressEntry,
    aliases: dict[str, str] | None = None,
    strict: bool = False,
) -> str:
    """Derive the country from the final address segment.

    A leading US state + ZIP prefix is stripped first (``OH 44106 USA`` ->
    ``USA``), then the alias map is applied.  In strict mode an unknown
    result raises :class:`UnrecognizedCountry`; otherwise the raw segment is
    returned as-is.
    """
    if not entry.address_parts:
        raise ValueError("address entry has no parts")
    aliases = aliases if aliases is not None else DEFAULT_COUNTRY_ALIASES
    last = _STATE_ZIP.sub("", entry.address_parts[-1].strip())
    country = aliases.get(last, last)
    if strict and country not in _KNOWN_COUNTRIES and country not in aliases.values():
        raise UnrecognizedCountry(f"unrecognized country segment: {last!r}")
    return country


def _case_token(token: str) -> str:
    # Leave deliberate mixed case (McDonald, deVries) untouched.
    if not (token.isupper() or token.islower()):
        return token
    return "-".join(seg.capitalize() for seg in token.split("-"))


def canonicalize_name(raw: str, kind: str = "author") -> str:
    """Normalize an author or institution name.

    Authors: whitespace collapsed, ``Surname, Given`` casing normalized and
    trailing periods stripped.  All-caps given tokens up to three letters are
    kept as initials (``Gao, RX`` stays ``Gao, RX``).  Institutions only get
    their whitespace collapsed; casing is preserved.
    """
    if not raw.strip():
        raise ValueError("name must be non-empty")
    collapsed = " ".join(raw.split())
    if kind == "institution":
        return collapsed

    surname, sep, given = collapsed.partition(",")
    surname = " ".join(_case_token(t) for t in surname.split())
    if sep:
        given_tokens = []
        for token in given.split():
            if token.isupper() and len(token.rstrip(".")) <= 3:
                given_tokens.append(token)  # initials block, e.g. RX or AYC
            else:
                given_tokens.append(_case_token(token))
        collapsed = f"{surname}, {' '.join(given_tokens)}" if given_tokens else surname
    else:
        collapsed = surname
    return collapsed.rstrip(".").strip()


def _record_id(doi: str | None, title: str, year: int) -> str:
    if doi:
        return doi
    digest = hashlib.sha1(f"{title.casefold()}|{year}".encode("utf-8")).hexdigest()
    return digest[:16]


def _dedup_keep_order(values: Iterable[str]) -> list[str]:
    return list(dict.fromkeys(values))


def clean(
    records: list[RawRecord],
    aliases: dict[str, str] | None = None,
    strict: bool = False,
    now_year: int | None = None,
) -> tuple[list[PaperRecord], list[Diagnostic]]:
    """Validate, normalize and deduplicate raw records.

    Duplicates (same DOI, or same casefolded title + year) keep the first
    occurrence.  Records without authors, without a title, or with a year
    outside [1900, now_year + 1] are rejected.  A missing citation count is
    imputed as 0.  Every drop and repair is reported as a diagnostic.
    """
    if now_year is None:
        now_year = datetime.now(timezone.utc).year

    papers: list[PaperRecord] = []
    diagnostics: list[Diagnostic] = []
    seen_dois: set[str] = set()
    seen_title_year: set[tuple[str, int]] = set()

    for index, raw in enumerate(records):
        ref = f"record {index + 1}"
        title = raw.joined("TI")
        if not title or not title.strip():
            diagnostics.append(Diagnostic("missing-title", "record has no title; dropped", ref))
            continue
        title = " ".join(title.split())

        year_text = raw.first("PY")
        try:
            year = int(year_text.strip()) if year_text else None
        except ValueError:
            year = None
        if year is None or not 1900 <= year <= now_year + 1:
            diagnostics.append(
                Diagnostic("invalid-year", f"publication year {year_text!r} outside [1900, {now_year + 1}]; dropped", ref)
            )
            continue

        author_values = raw.tags.get("AU", [])
        authors = _dedup_keep_order(canonicalize_name(a, "author") for a in author_values if a.strip())
        if not authors:
            diagnostics.append(Diagnostic("missing-authors", "record has no authors; dropped", ref))
            continue

        doi = raw.first("DI")
        doi = doi.strip() if doi and doi.strip() else None
        title_key = (title.casefold(), year)
        if doi and doi.casefold() in seen_dois:
            diagnostics.append(Diagnostic("duplicate-doi", f"duplicate DOI {doi}; dropped", ref))
            continue
        if title_key in seen_title_year:
            diagnostics.append(Diagnostic("duplicate-title-year", f"duplicate title/year {title!r} ({year}); dropped", ref))
            continue

        source = raw.joined("SO")
        if source is None:
            diagnostics.append(Diagnostic("imputed-source", "missing source; imputed empty string", ref))
            source = ""
        else:
            source = " ".join(source.split())

        tc_text = raw.first("TC")
        if tc_text is None or not tc_text.strip():
            diagnostics.append(Diagnostic("imputed-times-cited", "missing citation count; imputed 0", ref))
            times_cited = 0
        else:
            try:
                times_cited = max(0, int(tc_text.strip()))
            except ValueError:
                diagnostics.append(Diagnostic("imputed-times-cited", f"unreadable citation count {tc_text!r}; imputed 0", ref))
                times_cited = 0

        affiliations: list[Affiliation] = []
        author_set = set(authors)
        for c1_value in raw.tags.get("C1", []):
            if not c1_value.strip():
                continue
            try:
                entry = parse_address(c1_value)
            except EmptyAddress:
                diagnostics.append(Diagnostic("empty-address", f"unusable address {c1_value!r}; skipped", ref))
                continue
            try:
                country = extract_country(entry, aliases, strict)
            except UnrecognizedCountry as exc:
                diagnostics.append(Diagnostic("unrecognized-country", f"{exc}; affiliation skipped", ref))
                continue
            linked = [canonicalize_name(n, "author") for n in entry.author_names]
            kept = [n for n in linked if n in author_set]
            if len(kept) != len(linked):
                dropped = sorted(set(linked) - author_set)
                diagnostics.append(
                    Diagnostic("unlinked-authors", f"address names not in author list: {', '.join(dropped)}", ref)
                )
            affiliations.append(
                Affiliation(
                    institution=canonicalize_name(entry.address_parts[0], "institution"),
                    country=country,
                    linked_authors=kept,
                )
            )

        keywords = _dedup_keep_order(
            k.strip().casefold()
            for tag in ("DE", "ID")
            for k in raw.tags.get(tag, [])
            if k.strip()
        )

        abstract = raw.joined("AB")
        abstract = " ".join(abstract.split()) if abstract and abstract.strip() else None
        publisher = raw.joined("PU")
        publisher = " ".join(publisher.split()) if publisher and publisher.strip() else None

        papers.append(
            PaperRecord(
                id=_record_id(doi, title, year),
                title=title,
                doi=doi,
                abstract=abstract,
                year=year,
                source=source,
                publisher=publisher,
                authors=authors,
                affiliations=affiliations,
                keywords=keywords,
                times_cited=times_cited,
            )
        )
        if doi:
            seen_dois.add(doi.casefold())
        seen_title_year.add(title_key)

    return papers, diagnostics


def _paper_dict(paper: PaperRecord) -> dict:
    return {
        "id": paper.id,
        "title": paper.title,
        "doi": paper.doi,
        "abstract": paper.abstract,
        "year": paper.year,
        "source": paper.source,
        "publisher": paper.publisher,
        "authors": paper.authors,
        "affiliations": [
            {
                "institution": a.institution,
                "country": a.country,
                "linked_authors": a.linked_authors,
            }
            for a in paper.affiliations
        ],
        "keywords": paper.keywords,
        "times_cited": paper.times_cited,
    }


def emit_json(
    records: list[PaperRecord],
    sink: IO[bytes],
    generated_at: str | None = None,
) -> None:
    """Write the cleaned corpus as one JSON document.

    Key order is fixed, so output is byte-identical across runs for the same
    input.  ``generated_at`` should be supplied (any fixed string, e.g. an
    ISO timestamp) when reproducible output is required; otherwise the
    current UTC time is recorded.
    """
    if generated_at is None:
        generated_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    document = {
        "schema_version": JSON_SCHEMA_VERSION,
        "generated_at": generated_at,
        "papers": [_paper_dict(p) for p in records],
    }
    text = json.dumps(document, ensure_ascii=False, indent=2, allow_nan=False)
    sink.write(text.encode("utf-8"))
    sink.write(b"\n")


def load_json(source: IO[bytes] | str | Path) -> list[PaperRecord]:
    """Reload a cleaned-corpus JSON document into paper records."""
    if isinstance(source, (str, Path)):
        payload = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        payload = json.loads(source.read().decode("utf-8"))
    version = payload.get("schema_version")
    if version != JSON_SCHEMA_VERSION:
        raise ValueError(f"unsupported corpus schema version: {version!r}")
    papers = []
    for entry in payload["papers"]:
        papers.append(
            PaperRecord(
                id=entry["id"],
                title=entry["title"],
                doi=entry["doi"],
                abstract=entry["abstract"],
                year=entry["year"],
                source=entry["source"],
                publisher=entry["publisher"],
                authors=list(entry["authors"]),
                affiliations=[
                    Affiliation(
                        institution=aff["institution"],
                        country=aff["country"],
                        linked_authors=list(aff["linked_authors"]),
                    )
                    for aff in entry["affiliations"]
                ],
                keywords=list(entry["keywords"]),
                times_cited=entry["times_cited"],
            )
        )
    return papers
