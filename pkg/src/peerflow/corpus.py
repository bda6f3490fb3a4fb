"""Canonical paper records: Dublin Core parsing, author-name normalization,
reference-list parsing, and the line-delimited corpus codec.

Everything here is a pure function over immutable inputs; no shared state.
"""
from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import SchemaError, ValidationError, XmlParseError

__all__ = [
    "AuthorKey",
    "CitedWork",
    "PaperRecord",
    "normalize_author_name",
    "parse_dc_record",
    "render_dc_record",
    "parse_reference_list",
    "write_corpus",
    "read_corpus",
    "load_corpus",
]


@dataclass(frozen=True)
class AuthorKey:
    """A normalized author identity.

    Equality and hashing use only the canonical form, so the same person
    written two ways collapses to one node. The display form keeps the
    original spelling for presentation.
    """

    canonical: str
    display: str = field(compare=False)

    def __post_init__(self):
        if not self.canonical:
            raise ValidationError("author canonical name must be non-empty")


@dataclass(frozen=True)
class CitedWork:
    """One bibliographic reference: the authors we could extract, plus the
    source line byte-for-byte."""

    authors: tuple[AuthorKey, ...]
    raw: str


@dataclass
class PaperRecord:
    """One metadata record, the unit the graph builder and solicitation consume.

    ``set_spec``, ``title`` and ``source_xml`` are plumbing for the harvesting
    service; they are optional and not part of record identity.
    """

    identifier: str
    authors: list[AuthorKey] = field(default_factory=list)
    references: list[CitedWork] = field(default_factory=list)
    date_stamps: list[str] = field(default_factory=list)
    subjects: list[str] = field(default_factory=list)
    journal_ref_present: bool = False
    title: str | None = None
    set_spec: str | None = None
    source_xml: str | None = None

    def __post_init__(self):
        if not self.identifier:
            raise ValidationError("record identifier must be non-empty")
        seen: set[str] = set()
        deduped = []
        for a in self.authors:
            if a.canonical not in seen:
                seen.add(a.canonical)
                deduped.append(a)
        self.authors = deduped

    @property
    def datestamp(self) -> str | None:
        """Harvest-window datestamp (day granularity)."""
        return self.date_stamps[0] if self.date_stamps else None


# --------------------------------------------------------------------------
# Author-name normalization
# --------------------------------------------------------------------------

# Lowercase surname particles that may precede the family name.
_PARTICLES = {
    "van", "de", "der", "den", "von", "la", "le", "di", "da", "del",
    "dos", "ter", "ten", "du", "el", "al",
}

_ALPHA_RUN = re.compile(r"[^\W\d_]+", re.UNICODE)


def _given_to_initials(given: str) -> str:
    """Reduce a given-name string to dotted initials: 'Marko A.' -> 'm. a.'."""
    initials = [run[0].casefold() + "." for run in _ALPHA_RUN.findall(given)]
    return " ".join(initials)


def normalize_author_name(display: str) -> AuthorKey:
    """Normalize an author display string to 'surname, f.[ m.]' form.

    Deterministic and idempotent: feeding a canonical form back in yields the
    same canonical form. Raises ValidationError on empty input.
    """
    if display is None or not display.strip():
        raise ValidationError("author name must be non-empty")
    collapsed = " ".join(display.split())
    if "," in collapsed:
        surname, _, given = collapsed.partition(",")
    else:
        # 'Given [Middle ...] Surname' ordering; trailing lowercase particles
        # belong to the surname ('Herbert Van de Sompel' -> surname 'Sompel'
        # is wrong, but without a comma the last token is the best guess).
        tokens = collapsed.split(" ")
        if len(tokens) == 1:
            surname, given = tokens[0], ""
        else:
            surname, given = tokens[-1], " ".join(tokens[:-1])
    surname = " ".join(surname.split()).casefold().rstrip(".")
    initials = _given_to_initials(given)
    canonical = f"{surname}, {initials}" if initials else surname
    return AuthorKey(canonical=canonical, display=collapsed)


# --------------------------------------------------------------------------
# Dublin Core record parsing
# --------------------------------------------------------------------------


def _local(tag: str) -> str:
    """Local name of a possibly namespace-qualified ElementTree tag."""
    return tag.rsplit("}", 1)[-1] if "}" in tag else tag.rsplit(":", 1)[-1]


def _byte_offset(text: str, line: int, column: int) -> int:
    """Byte offset of (1-based line, 0-based column) within text."""
    lines = text.split("\n")
    prefix = "\n".join(lines[: line - 1])
    offset = len(prefix.encode("utf-8"))
    if line > 1:
        offset += 1  # the newline before the failing line
    offset += len(lines[line - 1][:column].encode("utf-8")) if line <= len(lines) else 0
    return offset


def _parse_xml(xml: str) -> ET.Element:
    try:
        return ET.fromstring(xml)
    except ET.ParseError as exc:
        line, column = exc.position
        raise XmlParseError(f"malformed XML: {exc.msg}", _byte_offset(xml, line, column)) from exc


def parse_dc_record(xml: str) -> PaperRecord:
    """Parse one oai_dc ``<record>`` into a PaperRecord.

    Namespace-lenient: elements are matched by local name, so both bare and
    fully namespaced records parse identically. Reference strings embedded as
    ``<reference>`` elements (structured citation metadata) are parsed with
    the same heuristic as plain-text reference lists.

    Raises XmlParseError (with byte offset) on malformed input and
    SchemaError when the header identifier is missing.
    """
    root = _parse_xml(xml)
    record = root if _local(root.tag) == "record" else None
    if record is None:
        for el in root.iter():
            if _local(el.tag) == "record":
                record = el
                break
    if record is None:
        raise SchemaError("no <record> element found")

    identifier = None
    set_spec = None
    header_datestamp = None
    creators: list[str] = []
    subjects: list[str] = []
    dates: list[str] = []
    title = None
    reference_lines: list[str] = []
    journal_ref = False

    in_header = None
    for el in record.iter():
        name = _local(el.tag)
        text = (el.text or "").strip()
        if name == "header":
            in_header = el
        if name == "identifier" and identifier is None:
            # the header identifier, not dc:identifier
            if in_header is not None and el in list(in_header):
                identifier = text
        elif name == "datestamp" or name == "timestamp":
            header_datestamp = header_datestamp or text
        elif name == "setSpec":
            set_spec = set_spec or text
        elif name == "creator" and text:
            creators.append(text)
        elif name == "subject" and text:
            subjects.append(text)
            if text.startswith("Journal-Ref:"):
                journal_ref = True
        elif name == "date" and text:
            dates.append(text)
        elif name == "title" and title is None and text:
            title = text
        elif name in ("journal-ref", "journal_ref"):
            journal_ref = True
        elif name == "reference" and text:
            reference_lines.append(text)
        elif name == "references" and text:
            reference_lines.extend(line for line in text.splitlines() if line.strip())

    if not identifier:
        raise SchemaError("record has no header <identifier>")

    authors = [normalize_author_name(c) for c in creators]
    date_stamps = []
    for d in ([header_datestamp] if header_datestamp else []) + dates:
        if d not in date_stamps:
            date_stamps.append(d)
    references = parse_reference_list("\n".join(reference_lines)) if reference_lines else []

    return PaperRecord(
        identifier=identifier,
        authors=authors,
        references=references,
        date_stamps=date_stamps,
        subjects=subjects,
        journal_ref_present=journal_ref,
        title=title,
        set_spec=set_spec,
        source_xml=xml,
    )


_DC_URI = "http://purl.org/dc/elements/1.1/"
_OAI_DC_URI = "http://www.openarchives.org/OAI/2.0/oai_dc/"


def render_dc_record(record: PaperRecord) -> str:
    """Render a PaperRecord back to oai_dc record XML.

    Inverse of parse_dc_record for identifier, creators, dates, subjects and
    title. Used by providers that never saw source XML for a record.
    """
    lines = ["<record>", "  <header>"]
    lines.append(f"    <identifier>{_escape(record.identifier)}</identifier>")
    if record.datestamp:
        lines.append(f"    <datestamp>{_escape(record.datestamp)}</datestamp>")
    if record.set_spec:
        lines.append(f"    <setSpec>{_escape(record.set_spec)}</setSpec>")
    lines.append("  </header>")
    lines.append("  <metadata>")
    lines.append(
        f'    <oai_dc:dc xmlns:oai_dc="{_OAI_DC_URI}" xmlns:dc="{_DC_URI}">'
    )
    if record.title:
        lines.append(f"      <dc:title>{_escape(record.title)}</dc:title>")
    for a in record.authors:
        lines.append(f"      <dc:creator>{_escape(a.display)}</dc:creator>")
    for s in record.subjects:
        lines.append(f"      <dc:subject>{_escape(s)}</dc:subject>")
    for d in record.date_stamps[1:] or record.date_stamps:
        lines.append(f"      <dc:date>{_escape(d)}</dc:date>")
    if record.journal_ref_present:
        lines.append("      <journal-ref/>")
    for ref in record.references:
        lines.append(f"      <reference>{_escape(ref.raw)}</reference>")
    lines.append("    </oai_dc:dc>")
    lines.append("  </metadata>")
    lines.append("</record>")
    return "\n".join(lines)


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


# --------------------------------------------------------------------------
# Plain-text reference parsing
# --------------------------------------------------------------------------

_INITIALS = re.compile(r"^(?:[^\W\d_]\.)+$", re.UNICODE)
_SINGLE_INITIAL = re.compile(r"^[^\W\d_]\.?$", re.UNICODE)
_CAP_WORD = re.compile(r"^[^\W\d_a-z][\w'’\-]*$", re.UNICODE)
_SUFFIXES = {"jr.", "jr", "sr.", "sr", "ii", "iii", "iv"}
_MAX_NAME_TOKENS = 5


def _looks_like_name(segment: str) -> bool:
    """True when a comma-separated segment reads as one person's name."""
    tokens = segment.split()
    if not tokens or len(tokens) > _MAX_NAME_TOKENS:
        return False
    if any(ch.isdigit() for ch in segment) or any(q in segment for q in "\"'“‘*_"):
        return False
    for tok in tokens:
        if _SINGLE_INITIAL.match(tok) or _INITIALS.match(tok):
            continue
        if _CAP_WORD.match(tok):
            continue
        if tok.casefold() in _PARTICLES or tok.casefold() in _SUFFIXES:
            continue
        return False
    return True


_AND_SPLIT = re.compile(r"\s+(?:and|&)\s+")


def parse_reference_list(text: str) -> list[CitedWork]:
    """Parse a plain-text reference list, one reference per line.

    Per line, the leading comma/'and'-separated segments that look like
    personal names become the cited authors; parsing stops at the first
    segment that does not (typically the title or a year). Lines that yield
    nothing still produce a CitedWork with empty authors; blank lines are
    skipped. ``raw`` always preserves the source line exactly.
    """
    works: list[CitedWork] = []
    for raw_line in text.splitlines():
        if not raw_line.strip():
            continue
        authors: list[AuthorKey] = []
        for segment in raw_line.split(","):
            parts = _AND_SPLIT.split(segment.strip())
            ok = True
            for part in parts:
                part = part.strip()
                if part and _looks_like_name(part):
                    authors.append(normalize_author_name(part))
                else:
                    ok = False
                    break
            if not ok:
                break
        # deduplicate while keeping order; a name repeated in one line is noise
        seen: set[str] = set()
        unique = tuple(a for a in authors if not (a.canonical in seen or seen.add(a.canonical)))
        works.append(CitedWork(authors=unique, raw=raw_line))
    return works


# --------------------------------------------------------------------------
# Corpus codec (line-delimited records)
# --------------------------------------------------------------------------


def _record_to_obj(record: PaperRecord) -> dict:
    return {
        "identifier": record.identifier,
        "authors": [[a.canonical, a.display] for a in record.authors],
        "references": [
            {"authors": [[a.canonical, a.display] for a in w.authors], "raw": w.raw}
            for w in record.references
        ],
        "date_stamps": record.date_stamps,
        "subjects": record.subjects,
        "journal_ref_present": record.journal_ref_present,
        "title": record.title,
        "set_spec": record.set_spec,
    }


def _record_from_obj(obj: dict) -> PaperRecord:
    return PaperRecord(
        identifier=obj["identifier"],
        authors=[AuthorKey(c, d) for c, d in obj.get("authors", [])],
        references=[
            CitedWork(
                authors=tuple(AuthorKey(c, d) for c, d in w.get("authors", [])),
                raw=w["raw"],
            )
            for w in obj.get("references", [])
        ],
        date_stamps=obj.get("date_stamps", []),
        subjects=obj.get("subjects", []),
        journal_ref_present=obj.get("journal_ref_present", False),
        title=obj.get("title"),
        set_spec=obj.get("set_spec"),
    )


def write_corpus(records: list[PaperRecord], path) -> None:
    """Write records as one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(_record_to_obj(record), ensure_ascii=False) + "\n")


def read_corpus(path) -> list[PaperRecord]:
    """Read a line-delimited corpus file written by write_corpus."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(_record_from_obj(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise SchemaError(f"corpus line {i}: {exc}") from exc
    return records


def load_corpus(path) -> list[PaperRecord]:
    """Load records from any accepted container: a line-delimited corpus file,
    a single record XML file, a ListRecords response, or a directory of XML
    files."""
    import os

    if os.path.isdir(path):
        records = []
        for name in sorted(os.listdir(path)):
            if name.endswith(".xml"):
                with open(os.path.join(path, name), encoding="utf-8") as fh:
                    records.extend(_records_from_xml(fh.read()))
        return records
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return read_corpus(path)
    return _records_from_xml(text)


def _records_from_xml(xml: str) -> list[PaperRecord]:
    """Extract every <record> from a document (single record or envelope)."""
    spans = list(re.finditer(r"<record[\s>].*?</record>|<record>.*?</record>", xml, re.DOTALL))
    if not spans:
        return [parse_dc_record(xml)]
    return [parse_dc_record(m.group(0)) for m in spans]
