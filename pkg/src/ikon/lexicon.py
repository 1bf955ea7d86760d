"""Lexicographic database: lexeme tables plus flexion tables.

Word forms are never stored directly. A lexeme carries a stem and a
flexion-class code; the class is a table of (ending, feature bundle)
rows. Generating a paradigm is plain concatenation stem + ending, and
analysis of a surface form is the inverse lookup over an index built
once at load time, so lookups cost the same no matter how large the
corpus is.

The engine is language-neutral: POS tags and feature names/values are
opaque strings declared in the lexicon file header.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

from .errors import DuplicateId, MalformedLine, UnknownLexeme, UnresolvedClass


class FeatureBundle(Mapping[str, str]):
    """Immutable, hashable feature-name -> value mapping."""

    __slots__ = ("_pairs",)

    def __init__(self, items: Mapping[str, str] | None = None):
        pairs = tuple(sorted((items or {}).items()))
        object.__setattr__(self, "_pairs", pairs)

    def __getitem__(self, key: str) -> str:
        for name, value in self._pairs:
            if name == key:
                return value
        raise KeyError(key)

    def __iter__(self) -> Iterator[str]:
        return (name for name, _ in self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __hash__(self) -> int:
        return hash(self._pairs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FeatureBundle):
            return self._pairs == other._pairs
        if isinstance(other, Mapping):
            return dict(self._pairs) == dict(other)
        return NotImplemented

    def __repr__(self) -> str:
        return f"FeatureBundle({dict(self._pairs)!r})"

    def serialize(self) -> str:
        """Encode as ``name=value,name=value`` with names sorted; empty bundle -> ''."""
        return ",".join(f"{n}={v}" for n, v in self._pairs)

    @classmethod
    def parse(cls, text: str) -> "FeatureBundle":
        """Inverse of serialize. Raises ValueError on duplicates or bad pairs."""
        if not text:
            return cls()
        out: dict[str, str] = {}
        for chunk in text.split(","):
            name, sep, value = chunk.partition("=")
            if not sep or not name:
                raise ValueError(f"bad feature pair {chunk!r}")
            if name in out:
                raise ValueError(f"duplicate feature {name!r}")
            out[name] = value
        return cls(out)


EMPTY_FEATURES = FeatureBundle()


@dataclass(frozen=True)
class FlexionEntry:
    ending: str
    features: FeatureBundle


@dataclass(frozen=True)
class FlexionClass:
    class_id: str
    entries: tuple[FlexionEntry, ...]


@dataclass(frozen=True)
class Lexeme:
    lexeme_id: str
    stem: str
    pos: str
    class_id: str
    sem_tags: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Analysis:
    """One reading of a surface form: which lexeme, which flexion row."""

    lexeme_id: str
    surface: str
    features: FeatureBundle
    pos: str


@dataclass(frozen=True)
class Lexicon:
    """Immutable store of lexemes and flexion classes.

    Safe for unlimited concurrent readers once loaded. ``_by_surface``
    is the inverse index over every generated form, keyed lowercase.
    """

    pos_tags: frozenset[str]
    feature_values: Mapping[str, frozenset[str]]
    classes: Mapping[str, FlexionClass]
    lexemes: Mapping[str, Lexeme]
    _by_surface: Mapping[str, tuple[Analysis, ...]] = field(repr=False, default_factory=dict)

    def __len__(self) -> int:
        return len(self.lexemes)

    def lexeme(self, lexeme_id: str) -> Lexeme:
        try:
            return self.lexemes[lexeme_id]
        except KeyError:
            raise UnknownLexeme(lexeme_id) from None


def generate_paradigm(lexicon: Lexicon, lexeme_id: str) -> list[Analysis]:
    """All surface forms of a lexeme, one per flexion entry, in file order."""
    lex = lexicon.lexeme(lexeme_id)
    cls = lexicon.classes[lex.class_id]
    return [
        Analysis(lex.lexeme_id, lex.stem + entry.ending, entry.features, lex.pos)
        for entry in cls.entries
    ]


def analyze_form(lexicon: Lexicon, surface: str) -> frozenset[Analysis]:
    """Every reading of a surface form; empty set when out of vocabulary.

    Input is lowercased before lookup; grammatical homonyms come back
    as multiple analyses.
    """
    return frozenset(lexicon._by_surface.get(surface.lower(), ()))


def base_form(lexicon: Lexicon, lexeme_id: str) -> str:
    """Citation form of a lexeme: the surface of its first flexion entry."""
    lex = lexicon.lexeme(lexeme_id)
    return lex.stem + lexicon.classes[lex.class_id].entries[0].ending


def load_lexicon(source) -> Lexicon:
    """Parse the lexicon file format from a text stream or string.

    Format (UTF-8, LF, TAB-separated; ``#`` comments and blank lines
    ignored):

    - ``!POS<TAB>tag1,tag2,...`` and ``!FEAT<TAB>name:v1|v2,...`` header
      lines, one each, before any data line;
    - ``F<TAB>class_id<TAB>ending<TAB>feat=val[,feat=val...]`` one flexion
      entry (empty ending / empty bundle encoded as empty fields);
    - ``L<TAB>lexeme_id<TAB>stem<TAB>pos<TAB>class_id<TAB>semtag[,...]``.

    Referential integrity is checked after parsing, so classes may be
    declared after the lexemes that use them.
    """
    text = source if isinstance(source, str) else source.read()

    pos_tags: set[str] = set()
    feature_values: dict[str, frozenset[str]] = {}
    entries: dict[str, list[FlexionEntry]] = {}
    lexemes: dict[str, Lexeme] = {}
    seen_pos_header = False
    seen_feat_header = False
    seen_data = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        fields = raw.split("\t")
        kind = fields[0]

        if kind == "!POS":
            if seen_data:
                raise MalformedLine(line_no, "!POS header after data lines")
            if seen_pos_header:
                raise MalformedLine(line_no, "repeated !POS header")
            if len(fields) != 2:
                raise MalformedLine(line_no, "!POS takes one TAB-separated field")
            pos_tags = {t for t in fields[1].split(",") if t}
            seen_pos_header = True

        elif kind == "!FEAT":
            if seen_data:
                raise MalformedLine(line_no, "!FEAT header after data lines")
            if seen_feat_header:
                raise MalformedLine(line_no, "repeated !FEAT header")
            if len(fields) != 2:
                raise MalformedLine(line_no, "!FEAT takes one TAB-separated field")
            for group in fields[1].split(","):
                if not group:
                    continue
                name, sep, vals = group.partition(":")
                if not sep or not name:
                    raise MalformedLine(line_no, f"bad feature declaration {group!r}")
                if name in feature_values:
                    raise MalformedLine(line_no, f"feature {name!r} declared twice")
                feature_values[name] = frozenset(v for v in vals.split("|") if v)
            seen_feat_header = True

        elif kind == "F":
            seen_data = True
            if len(fields) != 4:
                raise MalformedLine(line_no, f"F line needs 4 fields, got {len(fields)}")
            _, class_id, ending, bundle_text = fields
            if not class_id:
                raise MalformedLine(line_no, "empty class_id")
            try:
                features = FeatureBundle.parse(bundle_text)
            except ValueError as exc:
                raise MalformedLine(line_no, str(exc)) from None
            for name, value in features.items():
                if name not in feature_values:
                    raise MalformedLine(line_no, f"undeclared feature {name!r}")
                if value not in feature_values[name]:
                    raise MalformedLine(line_no, f"undeclared value {value!r} for feature {name!r}")
            entry = FlexionEntry(ending, features)
            rows = entries.setdefault(class_id, [])
            if any(e.ending == entry.ending and e.features == entry.features for e in rows):
                raise MalformedLine(line_no, f"class {class_id!r} repeats entry ({ending!r}, {features.serialize()!r})")
            rows.append(entry)

        elif kind == "L":
            seen_data = True
            if len(fields) != 6:
                raise MalformedLine(line_no, f"L line needs 6 fields, got {len(fields)}")
            _, lexeme_id, stem, pos, class_id, semtags = fields
            if not lexeme_id:
                raise MalformedLine(line_no, "empty lexeme_id")
            if not stem:
                raise MalformedLine(line_no, "empty stem")
            if pos not in pos_tags:
                raise MalformedLine(line_no, f"POS {pos!r} not declared in !POS header")
            if lexeme_id in lexemes:
                raise DuplicateId(lexeme_id)
            tags = frozenset(t for t in semtags.split(",") if t)
            lexemes[lexeme_id] = Lexeme(lexeme_id, stem, pos, class_id, tags)

        else:
            raise MalformedLine(line_no, f"unknown record kind {kind!r}")

    classes = {cid: FlexionClass(cid, tuple(rows)) for cid, rows in entries.items()}
    for lex in lexemes.values():
        if lex.class_id not in classes:
            raise UnresolvedClass(lex.lexeme_id, lex.class_id)

    by_surface: dict[str, list[Analysis]] = {}
    lexicon = Lexicon(
        pos_tags=frozenset(pos_tags),
        feature_values=feature_values,
        classes=classes,
        lexemes=lexemes,
        _by_surface=by_surface,
    )
    for lex in lexemes.values():
        for analysis in generate_paradigm(lexicon, lex.lexeme_id):
            by_surface.setdefault(analysis.surface.lower(), []).append(analysis)
    # freeze the index buckets
    for key in by_surface:
        by_surface[key] = tuple(by_surface[key])
    return lexicon


def format_lexicon(lexicon: Lexicon) -> str:
    """Serialize back to the lexicon file format (headers, then F, then L)."""
    lines = []
    lines.append("!POS\t" + ",".join(sorted(lexicon.pos_tags)))
    feat = ",".join(
        f"{name}:{'|'.join(sorted(vals))}" for name, vals in sorted(lexicon.feature_values.items())
    )
    lines.append("!FEAT\t" + feat)
    for cid in sorted(lexicon.classes):
        for entry in lexicon.classes[cid].entries:
            lines.append(f"F\t{cid}\t{entry.ending}\t{entry.features.serialize()}")
    for lid in sorted(lexicon.lexemes):
        lex = lexicon.lexemes[lid]
        lines.append(
            f"L\t{lex.lexeme_id}\t{lex.stem}\t{lex.pos}\t{lex.class_id}\t{','.join(sorted(lex.sem_tags))}"
        )
    return "\n".join(lines) + "\n"
