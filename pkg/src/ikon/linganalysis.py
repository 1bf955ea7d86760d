"""Sentence-level grammatical analysis.

Three steps per sentence: annotate tokens with every dictionary reading,
reduce grammatical homonymy with agreement/government constraint rules,
then emit a parse graph of labeled head->dependent relations.

Disambiguation semantics: a rule is *applicable* to an ordered token
pair when the direction and distance fit and the POS signature matches
under some reading of each token; an assignment of one reading per token
is *consistent* when every applicable pair is actually realized by the
chosen readings (POS, feature agreement and government included). The
result of disambiguation is the per-token projection of all consistent
assignments. When no consistent assignment exists the original readings
are kept and the sentence is flagged unresolved.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from . import tokens as tok
from .corpus import Document
from .errors import MalformedLine
from .lexicon import Analysis, FeatureBundle, Lexicon, analyze_form


@dataclass(frozen=True)
class Token:
    doc_id: str
    sentence_index: int
    token_index: int
    surface: str
    analyses: frozenset[Analysis]

    @property
    def is_oov(self) -> bool:
        return not self.analyses


@dataclass(frozen=True)
class ConstraintRule:
    rule_id: str
    relation_name: str
    head_pos: str
    dep_pos: str
    direction: str  # 'L' head precedes dependent, 'R' head follows it
    max_distance: int
    agree_on: frozenset[str]
    require: FeatureBundle


@dataclass(frozen=True)
class Edge:
    relation: str
    head: int
    dep: int
    rule_id: str


@dataclass(frozen=True)
class ParseGraph:
    doc_id: str
    sentence_index: int
    nodes: tuple[Token, ...]
    edges: frozenset[Edge]
    unresolved: bool = False


def tokenize(doc: Document) -> list[list[str]]:
    """Sentences of surface tokens; punctuation dropped, casing kept."""
    return tok.sentences(doc.body)


def annotate(lexicon: Lexicon, sentence: list[str], doc_id: str = "", sentence_index: int = 0) -> list[Token]:
    """Attach every dictionary reading to each token; OOV tokens get the empty set."""
    return [
        Token(doc_id, sentence_index, i, surface, analyze_form(lexicon, surface))
        for i, surface in enumerate(sentence)
    ]


def load_rules(source, lexicon: Lexicon | None = None) -> list[ConstraintRule]:
    """Parse the TAB-separated rule file.

    ``R<TAB>rule_id<TAB>relation<TAB>head_pos<TAB>dep_pos<TAB>L|R<TAB>max_dist
    <TAB>agree:f1,f2<TAB>require:f=v[,f=v]`` with possibly empty agree/require
    lists. POS tags are checked against the lexicon inventory when given.
    """
    text = source if isinstance(source, str) else source.read()
    rules: list[ConstraintRule] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        fields = raw.split("\t")
        if fields[0] != "R":
            raise MalformedLine(line_no, f"unknown record kind {fields[0]!r}")
        if len(fields) != 9:
            raise MalformedLine(line_no, f"R line needs 9 fields, got {len(fields)}")
        _, rule_id, relation, head_pos, dep_pos, direction, max_dist, agree_f, require_f = fields
        if rule_id in seen_ids:
            raise MalformedLine(line_no, f"duplicate rule_id {rule_id!r}")
        seen_ids.add(rule_id)
        if direction not in ("L", "R"):
            raise MalformedLine(line_no, f"direction must be L or R, got {direction!r}")
        try:
            distance = int(max_dist)
        except ValueError:
            raise MalformedLine(line_no, f"bad max_dist {max_dist!r}") from None
        if distance < 1:
            raise MalformedLine(line_no, "max_dist must be positive")
        if not agree_f.startswith("agree:") or not require_f.startswith("require:"):
            raise MalformedLine(line_no, "agree:/require: prefixes are mandatory")
        agree = frozenset(f for f in agree_f[len("agree:"):].split(",") if f)
        try:
            require = FeatureBundle.parse(require_f[len("require:"):])
        except ValueError as exc:
            raise MalformedLine(line_no, str(exc)) from None
        if lexicon is not None:
            for pos in (head_pos, dep_pos):
                if pos not in lexicon.pos_tags:
                    raise MalformedLine(line_no, f"POS {pos!r} not in lexicon inventory")
        rules.append(ConstraintRule(rule_id, relation, head_pos, dep_pos, direction, distance, agree, require))
    return rules


def _realizes(rule: ConstraintRule, head: Analysis, dep: Analysis) -> bool:
    """Does this reading pair actually carry the rule?

    Agreement uses unification semantics: a feature absent on either side
    constrains nothing. Government (require) demands presence and equality
    on the dependent.
    """
    if head.pos != rule.head_pos or dep.pos != rule.dep_pos:
        return False
    for feature in rule.agree_on:
        hv = head.features.get(feature)
        dv = dep.features.get(feature)
        if hv is not None and dv is not None and hv != dv:
            return False
    for feature, value in rule.require.items():
        if dep.features.get(feature) != value:
            return False
    return True


def _applicable_pairs(
    analyses: list[frozenset[Analysis]], rules: list[ConstraintRule]
) -> list[tuple[ConstraintRule, int, int]]:
    """All (rule, head_index, dep_index) the sentence makes applicable."""
    n = len(analyses)
    pairs = []
    for rule in rules:
        for head in range(n):
            if not any(a.pos == rule.head_pos for a in analyses[head]):
                continue
            for dep in range(n):
                if dep == head or abs(head - dep) > rule.max_distance:
                    continue
                if rule.direction == "L" and not head < dep:
                    continue
                if rule.direction == "R" and not head > dep:
                    continue
                if any(a.pos == rule.dep_pos for a in analyses[dep]):
                    pairs.append((rule, head, dep))
    return pairs


def disambiguate(tokens: list[Token], rules: list[ConstraintRule]) -> tuple[list[Token], bool]:
    """Project the set of globally consistent reading assignments per token.

    Runs constraint propagation to a fixpoint first, then confirms each
    surviving reading extends to a full consistent assignment (propagation
    alone can leave unsupported readings when constraints form cycles).
    Returns (tokens, unresolved); unresolved means no consistent assignment
    exists and the original readings were kept.
    """
    original = [t.analyses for t in tokens]
    pairs = _applicable_pairs(original, rules)
    variables = [i for i, a in enumerate(original) if a]
    if not variables:
        return list(tokens), False

    domains: dict[int, set[Analysis]] = {i: set(original[i]) for i in variables}
    by_var: dict[int, list[tuple[ConstraintRule, int, int]]] = {i: [] for i in variables}
    for rule, head, dep in pairs:
        by_var[head].append((rule, head, dep))
        by_var[dep].append((rule, head, dep))

    def supported(var: int, value: Analysis) -> bool:
        for rule, head, dep in by_var[var]:
            other = dep if var == head else head
            if var == head:
                if not any(_realizes(rule, value, b) for b in domains[other]):
                    return False
            else:
                if not any(_realizes(rule, a, value) for a in domains[other]):
                    return False
        return True

    changed = True
    while changed:
        changed = False
        for var in variables:
            for value in list(domains[var]):
                if not supported(var, value):
                    domains[var].discard(value)
                    changed = True
        if any(not domains[v] for v in variables):
            return list(tokens), True

    def solve(fixed: dict[int, Analysis]) -> dict[int, Analysis] | None:
        order = sorted((v for v in variables if v not in fixed), key=lambda v: len(domains[v]))

        def consistent_with(assign: dict[int, Analysis], var: int, value: Analysis) -> bool:
            for rule, head, dep in by_var[var]:
                other = dep if var == head else head
                if other in assign:
                    a = value if var == head else assign[other]
                    b = assign[other] if var == head else value
                    if not _realizes(rule, a, b):
                        return False
            return True

        def backtrack(assign: dict[int, Analysis], idx: int) -> dict[int, Analysis] | None:
            if idx == len(order):
                return dict(assign)
            var = order[idx]
            for value in domains[var]:
                if consistent_with(assign, var, value):
                    assign[var] = value
                    found = backtrack(assign, idx + 1)
                    if found is not None:
                        return found
                    del assign[var]
            return None

        base = dict(fixed)
        for var, value in fixed.items():
            if not consistent_with(base, var, value):
                return None
        return backtrack(base, 0)

    witness = solve({})
    if witness is None:
        return list(tokens), True

    kept: dict[int, set[Analysis]] = {v: set() for v in variables}
    pending = {(v, a) for v in variables for a in domains[v]}
    for var, value in witness.items():
        kept[var].add(value)
        pending.discard((var, value))
    while pending:
        var, value = pending.pop()
        solution = solve({var: value})
        if solution is None:
            continue
        for v, a in solution.items():
            kept[v].add(a)
            pending.discard((v, a))

    out = []
    for i, token in enumerate(tokens):
        if i in kept:
            out.append(replace(token, analyses=frozenset(kept[i])))
        else:
            out.append(token)
    return out, False


def parse_sentence(tokens: list[Token], rules: list[ConstraintRule]) -> ParseGraph:
    """Emit one edge per realizable applicable pair, one head per (dependent, relation).

    Head conflicts resolve to the nearest head, then the leftmost; when
    several rules yield the same winning edge the smallest rule_id is
    recorded. Deterministic in the inputs, insensitive to analysis order.
    """
    doc_id = tokens[0].doc_id if tokens else ""
    sentence_index = tokens[0].sentence_index if tokens else 0
    analyses = [t.analyses for t in tokens]
    candidates: dict[tuple[int, str], list[tuple[int, str]]] = {}
    for rule, head, dep in _applicable_pairs(analyses, rules):
        if any(_realizes(rule, a, b) for a in analyses[head] for b in analyses[dep]):
            candidates.setdefault((dep, rule.relation_name), []).append((head, rule.rule_id))

    edges = set()
    for (dep, relation), options in candidates.items():
        head = min(options, key=lambda o: (abs(o[0] - dep), o[0]))[0]
        rule_id = min(rid for h, rid in options if h == head)
        edges.add(Edge(relation, head, dep, rule_id))
    return ParseGraph(doc_id, sentence_index, tuple(tokens), frozenset(edges))


def analyze_document(doc: Document, lexicon: Lexicon, rules: list[ConstraintRule]) -> list[ParseGraph]:
    """Tokenize, annotate, disambiguate and parse every sentence of a document."""
    graphs = []
    for s_idx, sentence in enumerate(tokenize(doc)):
        toks = annotate(lexicon, sentence, doc.doc_id, s_idx)
        reduced, unresolved = disambiguate(toks, rules)
        graph = parse_sentence(reduced, rules)
        graphs.append(replace(graph, unresolved=unresolved))
    return graphs


# -- .psg persistence --------------------------------------------------------

def format_parse_graphs(graphs: list[ParseGraph]) -> str:
    """Line format per sentence: an S header, one N line per surviving
    reading (OOV tokens get a single ``?`` line), then E lines."""
    lines = []
    for g in graphs:
        header = f"S\t{g.sentence_index}"
        if g.unresolved:
            header += "\tUNRESOLVED"
        lines.append(header)
        for token in g.nodes:
            if token.is_oov:
                lines.append(f"N\t{token.token_index}\t{token.surface}\t?\t")
            else:
                for a in sorted(token.analyses, key=lambda a: (a.lexeme_id, a.features.serialize())):
                    lines.append(
                        f"N\t{token.token_index}\t{token.surface}\t{a.lexeme_id}\t{a.features.serialize()}"
                    )
        for e in sorted(g.edges, key=lambda e: (e.dep, e.relation, e.head)):
            lines.append(f"E\t{e.relation}\t{e.head}\t{e.dep}\t{e.rule_id}")
    return "".join(line + "\n" for line in lines)


def parse_graphs_from_text(text: str, doc_id: str, lexicon: Lexicon) -> list[ParseGraph]:
    """Read the .psg format back; readings are re-anchored via the lexicon."""
    graphs: list[ParseGraph] = []
    cur_sentence = -1
    cur_unresolved = False
    node_rows: dict[int, tuple[str, list[tuple[str, str]]]] = {}
    edges: set[Edge] = set()

    def flush() -> None:
        if cur_sentence < 0:
            return
        toks = []
        for idx in sorted(node_rows):
            surface, readings = node_rows[idx]
            selected = set()
            for lexeme_id, feat_text in readings:
                if lexeme_id == "?":
                    continue
                want = FeatureBundle.parse(feat_text)
                for a in analyze_form(lexicon, surface):
                    if a.lexeme_id == lexeme_id and a.features == want:
                        selected.add(a)
            toks.append(Token(doc_id, cur_sentence, idx, surface, frozenset(selected)))
        graphs.append(ParseGraph(doc_id, cur_sentence, tuple(toks), frozenset(edges), cur_unresolved))

    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        fields = raw.split("\t")
        if fields[0] == "S":
            flush()
            cur_sentence = int(fields[1])
            cur_unresolved = len(fields) > 2 and fields[2] == "UNRESOLVED"
            node_rows = {}
            edges = set()
        elif fields[0] == "N":
            if len(fields) != 5:
                raise MalformedLine(line_no, f"N line needs 5 fields, got {len(fields)}")
            idx = int(fields[1])
            surface = fields[2]
            node_rows.setdefault(idx, (surface, []))[1].append((fields[3], fields[4]))
        elif fields[0] == "E":
            if len(fields) != 5:
                raise MalformedLine(line_no, f"E line needs 5 fields, got {len(fields)}")
            edges.add(Edge(fields[1], int(fields[2]), int(fields[3]), fields[4]))
        else:
            raise MalformedLine(line_no, f"unknown record kind {fields[0]!r}")
    flush()
    return graphs


def write_parse_file(path: str | Path, graphs: list[ParseGraph]) -> None:
    Path(path).write_text(format_parse_graphs(graphs), encoding="utf-8")


def read_parse_file(path: str | Path, doc_id: str, lexicon: Lexicon) -> list[ParseGraph]:
    return parse_graphs_from_text(Path(path).read_text(encoding="utf-8"), doc_id, lexicon)
