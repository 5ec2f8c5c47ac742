"""Parse normalized protocol transcripts into individually attributed speeches.

Protocol file format (UTF-8 text):

    #id: S/PV.4541
    #date: 2002-05-13
    #agenda: Situation in Afghanistan
    #attendees:
    Khalid | Pakistan
    Lavrov | Russian Federation
    #body:
    Mr. Khalid (Pakistan): ...speech text...
    The President: ...

A speaker turn begins at column 0 with `<Honorific> <Name> (<Affiliation>):`,
`<Honorific> <Name>:` or `The President:`. Interventions by the President are
kept but flagged as excluded, never dropped; speakers whose affiliation cannot
be resolved from the attendee list or the overrides file are likewise flagged.
"""

from __future__ import annotations

import json
import unicodedata
import re
from dataclasses import dataclass, field
from datetime import date as Date
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import DebatemapError

DEFAULT_AGENDAS = frozenset({"Situation in Afghanistan", "Afghanistan"})

PRESIDENT_NAME = "The President"

EXCLUDED_PRESIDENT = "president"
EXCLUDED_UNRESOLVED = "unresolved"

HONORIFICS = ("Mr.", "Mrs.", "Ms.", "Dr.", "Sir", "Baroness")

# A turn marker is anchored at column 0 and ends at the first colon on that
# line; the speech itself may continue on the same line after the colon.
TURN_MARKER = re.compile(
    r"^(?:"
    r"(?P<honorific>Mr\.|Mrs\.|Ms\.|Dr\.|Sir|Baroness)[ \t]+"
    r"(?P<name>[A-Z][^():\n]*?)"
    r"(?:[ \t]*\((?P<affiliation>[^()\n:]+)\))?"
    r"|(?P<president>The President)"
    r"):",
    re.MULTILINE,
)


class CorpusError(DebatemapError):
    """Base class for protocol/corpus parsing errors."""


class NoTurnsFound(CorpusError):
    """A protocol body contains no speaker-turn marker (malformed protocol)."""


class UnterminatedHeader(CorpusError):
    """The attendee block is never closed by a `#body:` line."""


class MalformedHeader(CorpusError):
    """Protocol header is missing its id or date, or a field cannot be parsed."""


class AgendaMismatch(CorpusError):
    """Protocol agenda label is not in the configured accept-list."""


@dataclass(frozen=True)
class Protocol:
    """One meeting protocol: header metadata plus the raw body text."""

    id: str
    date: Date
    agenda_label: str
    attendees: tuple[tuple[str, str], ...]
    body: str


@dataclass(frozen=True)
class Speech:
    """One attributed intervention extracted from a protocol body."""

    id: str
    protocol_id: str
    date: Date
    year: int
    speaker_name: str
    affiliation: str
    text: str
    excluded: bool = False
    exclusion_reason: Optional[str] = None

    @property
    def included(self) -> bool:
        return not self.excluded


@dataclass(frozen=True)
class Corpus:
    """All speeches of a protocol set, in deterministic corpus order."""

    speeches: tuple[Speech, ...]
    protocols: tuple[Protocol, ...]
    affiliations: frozenset[str]

    def included_speeches(self) -> list[Speech]:
        return [s for s in self.speeches if not s.excluded]


@dataclass
class BuildReport:
    """Per-file failures plus the corpus statistics emitted by build_corpus."""

    parsed_files: list[str] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)
    stats: dict = field(default_factory=dict)


def normalize_speaker(name: str) -> str:
    """Strip honorific and diacritics, collapse whitespace, casefold."""
    name = name.strip()
    for honorific in HONORIFICS:
        if name.startswith(honorific + " ") or name == honorific:
            name = name[len(honorific):]
            break
    decomposed = unicodedata.normalize("NFD", name)
    name = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    return " ".join(name.split()).casefold()


def surname_key(name: str) -> str:
    """Matching key for a speaker: the last token of the normalized name."""
    normalized = normalize_speaker(name)
    return normalized.rsplit(" ", 1)[-1] if normalized else ""


class AffiliationOverrides:
    """Manually curated speaker-name to affiliation map."""

    def __init__(self, entries: Optional[dict[str, str]] = None):
        self._by_surname: dict[str, str] = {}
        for name, affiliation in (entries or {}).items():
            self.add(name, affiliation)

    def add(self, name: str, affiliation: str) -> None:
        if not affiliation.strip():
            raise ValueError(f"empty affiliation for override {name!r}")
        self._by_surname[surname_key(name)] = affiliation.strip()

    def lookup(self, name: str) -> Optional[str]:
        return self._by_surname.get(surname_key(name))

    def __len__(self) -> int:
        return len(self._by_surname)


def load_overrides(path: Path | str) -> AffiliationOverrides:
    """Load a `Name | Affiliation` per-line overrides file."""
    overrides = AffiliationOverrides()
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "|" not in line:
            raise MalformedHeader(f"{path}:{line_no}: expected 'Name | Affiliation', got {line!r}")
        name, affiliation = (part.strip() for part in line.split("|", 1))
        overrides.add(name, affiliation)
    return overrides


def segment_speeches(body: str) -> list[tuple[str, str]]:
    """Split a protocol body into (speaker_line, speech_text) turns.

    The speaker_line is the raw marker text through the colon; speech_text is
    everything that follows, up to the next column-0 marker. Concatenating
    marker + text over all turns reproduces the body from the first marker on.
    """
    markers = list(TURN_MARKER.finditer(body))
    if not markers:
        raise NoTurnsFound("no speaker-turn markers in protocol body")
    segments = []
    for i, match in enumerate(markers):
        end = markers[i + 1].start() if i + 1 < len(markers) else len(body)
        segments.append((match.group(0), body[match.end():end]))
    return segments


def resolve_affiliation(
    speaker_name: str,
    attendees: Sequence[tuple[str, str]],
    overrides: AffiliationOverrides,
) -> Optional[str]:
    """Resolve a speaker to an affiliation; None means unresolved.

    The attendee list takes precedence over the overrides map. Matching is
    exact on the normalized surname, insensitive to honorifics and diacritics.
    """
    key = surname_key(speaker_name)
    if not key:
        return None
    for attendee_name, affiliation in attendees:
        if surname_key(attendee_name) == key:
            return affiliation
    return overrides.lookup(speaker_name)


def _parse_header(raw: str) -> tuple[dict[str, str], list[tuple[str, str]], str]:
    """Split raw protocol text into header fields, attendees, and body."""
    fields: dict[str, str] = {}
    attendees: list[tuple[str, str]] = []
    lines = raw.splitlines(keepends=True)
    pos = 0
    in_attendees = False
    body_start = None
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("#body:"):
            body_start = pos + len(line)
            break
        if in_attendees:
            if stripped:
                if "|" not in stripped:
                    raise MalformedHeader(f"attendee line {stripped!r} is not 'Name | Affiliation'")
                name, affiliation = (part.strip() for part in stripped.split("|", 1))
                attendees.append((name, affiliation))
        elif stripped.startswith("#attendees:"):
            in_attendees = True
        elif stripped.startswith("#") and ":" in stripped:
            key, value = stripped[1:].split(":", 1)
            fields[key.strip()] = value.strip()
        pos += len(line)
    if body_start is None:
        raise UnterminatedHeader("header never terminated by a '#body:' line")
    return fields, attendees, raw[body_start:]


def parse_protocol(
    raw: str,
    overrides: AffiliationOverrides,
    accepted_agendas: Iterable[str] = DEFAULT_AGENDAS,
    date_window: Optional[tuple[Date, Date]] = None,
) -> tuple[Protocol, list[Speech]]:
    """Parse one protocol file into its Protocol record and attributed speeches.

    Speeches by the President are flagged excluded (reason "president");
    speeches without a resolvable affiliation are flagged excluded (reason
    "unresolved"). Nothing is silently dropped.
    """
    fields, attendees, body = _parse_header(raw)
    protocol_id = fields.get("id", "")
    if not protocol_id:
        raise MalformedHeader("missing #id")
    if "date" not in fields:
        raise MalformedHeader(f"protocol {protocol_id}: missing #date")
    try:
        protocol_date = Date.fromisoformat(fields["date"])
    except ValueError as exc:
        raise MalformedHeader(f"protocol {protocol_id}: bad date {fields['date']!r}") from exc
    if date_window is not None and not (date_window[0] <= protocol_date <= date_window[1]):
        raise MalformedHeader(
            f"protocol {protocol_id}: date {protocol_date} outside corpus window"
        )
    agenda = fields.get("agenda", "")
    if agenda not in set(accepted_agendas):
        raise AgendaMismatch(f"protocol {protocol_id}: agenda {agenda!r} not accepted")
    seen_attendees = set()
    for name, _ in attendees:
        if name in seen_attendees:
            raise MalformedHeader(f"protocol {protocol_id}: duplicate attendee {name!r}")
        seen_attendees.add(name)

    protocol = Protocol(
        id=protocol_id,
        date=protocol_date,
        agenda_label=agenda,
        attendees=tuple(attendees),
        body=body,
    )

    speeches = []
    for ordinal, (speaker_line, text) in enumerate(segment_speeches(body)):
        match = TURN_MARKER.match(speaker_line)
        assert match is not None
        speech_id = f"{protocol_id}#{ordinal}"
        common = dict(
            id=speech_id,
            protocol_id=protocol_id,
            date=protocol_date,
            year=protocol_date.year,
            text=text.strip(),
        )
        if match.group("president"):
            speeches.append(
                Speech(
                    speaker_name=PRESIDENT_NAME,
                    affiliation="",
                    excluded=True,
                    exclusion_reason=EXCLUDED_PRESIDENT,
                    **common,
                )
            )
            continue
        speaker_name = f"{match.group('honorific')} {match.group('name')}".strip()
        affiliation = match.group("affiliation")
        if affiliation is None:
            affiliation = resolve_affiliation(speaker_name, attendees, overrides)
        if affiliation is None:
            speeches.append(
                Speech(
                    speaker_name=speaker_name,
                    affiliation="",
                    excluded=True,
                    exclusion_reason=EXCLUDED_UNRESOLVED,
                    **common,
                )
            )
        else:
            speeches.append(Speech(speaker_name=speaker_name, affiliation=affiliation.strip(), **common))
    return protocol, speeches


def build_corpus(
    protocol_files: Sequence[Path | str],
    overrides: AffiliationOverrides,
    accepted_agendas: Iterable[str] = DEFAULT_AGENDAS,
    date_window: Optional[tuple[Date, Date]] = None,
) -> tuple[Corpus, BuildReport]:
    """Parse protocol files into a corpus in deterministic order.

    Per-file parse errors go into the report as partial failures; the build
    aborts only if no protocol parses at all.
    """
    if not protocol_files:
        raise CorpusError("no protocol files given")
    report = BuildReport()
    parsed: list[tuple[Protocol, list[Speech]]] = []
    for file in protocol_files:
        path = Path(file)
        try:
            raw = path.read_text(encoding="utf-8")
            parsed.append(parse_protocol(raw, overrides, accepted_agendas, date_window))
            report.parsed_files.append(str(path))
        except CorpusError as exc:
            report.failures[str(path)] = f"{type(exc).__name__}: {exc}"
    if not parsed:
        raise CorpusError(f"all {len(protocol_files)} protocol files failed to parse")

    parsed.sort(key=lambda pair: (pair[0].date, pair[0].id))
    protocols = tuple(protocol for protocol, _ in parsed)
    speeches = tuple(speech for _, batch in parsed for speech in batch)
    affiliations = frozenset(s.affiliation for s in speeches if not s.excluded)
    corpus = Corpus(speeches=speeches, protocols=protocols, affiliations=affiliations)
    _check_invariants(corpus)
    report.stats = corpus_stats(corpus)
    return corpus, report


def _check_invariants(corpus: Corpus) -> None:
    protocol_ids = {p.id for p in corpus.protocols}
    for speech in corpus.speeches:
        if speech.protocol_id not in protocol_ids:
            raise CorpusError(f"speech {speech.id} references unknown protocol")
        if speech.excluded and speech.exclusion_reason not in (EXCLUDED_PRESIDENT, EXCLUDED_UNRESOLVED):
            raise CorpusError(f"speech {speech.id} excluded without a known reason")
        if not speech.excluded and not speech.text:
            raise CorpusError(f"speech {speech.id} is included but has empty text")
        if speech.year != speech.date.year:
            raise CorpusError(f"speech {speech.id} year does not match its date")


def corpus_stats(corpus: Corpus) -> dict:
    """Statistics report: per-year and per-affiliation-per-year speech counts.

    Counts cover included (non-excluded) speeches; exclusions are tallied
    separately by reason so the ledger stays auditable.
    """
    per_year: dict[int, int] = {}
    per_affiliation_year: dict[str, dict[int, int]] = {}
    excluded: dict[str, int] = {}
    for speech in corpus.speeches:
        if speech.excluded:
            assert speech.exclusion_reason is not None
            excluded[speech.exclusion_reason] = excluded.get(speech.exclusion_reason, 0) + 1
            continue
        per_year[speech.year] = per_year.get(speech.year, 0) + 1
        by_year = per_affiliation_year.setdefault(speech.affiliation, {})
        by_year[speech.year] = by_year.get(speech.year, 0) + 1
    return {
        "total_speeches": len(corpus.speeches),
        "included_speeches": sum(per_year.values()),
        "excluded": {reason: excluded[reason] for reason in sorted(excluded)},
        "per_year": {year: per_year[year] for year in sorted(per_year)},
        "per_affiliation_year": {
            affiliation: {year: counts[year] for year in sorted(counts)}
            for affiliation, counts in sorted(per_affiliation_year.items())
        },
        "n_protocols": len(corpus.protocols),
        "n_affiliations": len(corpus.affiliations),
        "affiliations": sorted(corpus.affiliations),
    }


def speech_to_record(speech: Speech) -> dict:
    return {
        "id": speech.id,
        "protocol_id": speech.protocol_id,
        "date": speech.date.isoformat(),
        "year": speech.year,
        "speaker_name": speech.speaker_name,
        "affiliation": speech.affiliation,
        "text": speech.text,
        "excluded": speech.excluded,
        "exclusion_reason": speech.exclusion_reason,
    }


def speech_from_record(record: dict) -> Speech:
    return Speech(
        id=record["id"],
        protocol_id=record["protocol_id"],
        date=Date.fromisoformat(record["date"]),
        year=record["year"],
        speaker_name=record["speaker_name"],
        affiliation=record["affiliation"],
        text=record["text"],
        excluded=record["excluded"],
        exclusion_reason=record["exclusion_reason"],
    )


def write_speeches(
    speeches: Iterable[Speech], path: Path | str, header: Optional[dict] = None
) -> None:
    """Serialize speeches as JSON-lines, one Speech record per line.

    An optional header record (e.g. provenance) goes on the first line; it is
    distinguished from speech records by having no "id" field.
    """
    with open(path, "w", encoding="utf-8") as handle:
        if header is not None:
            handle.write(json.dumps({k: v for k, v in header.items() if k != "id"},
                                    ensure_ascii=False, sort_keys=True))
            handle.write("\n")
        for speech in speeches:
            handle.write(json.dumps(speech_to_record(speech), ensure_ascii=False))
            handle.write("\n")


def read_speeches(path: Path | str) -> list[Speech]:
    """Read speeches back; header records (no "id" field) are skipped."""
    speeches = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                record = json.loads(line)
                if "id" in record:
                    speeches.append(speech_from_record(record))
    return speeches
