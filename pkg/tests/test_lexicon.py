import random

import pytest

from ikon.errors import DuplicateId, MalformedLine, UnknownLexeme, UnresolvedClass
from ikon.lexicon import (
    FeatureBundle,
    analyze_form,
    base_form,
    format_lexicon,
    generate_paradigm,
    load_lexicon,
)

from conftest import random_lexicon_text
from oracles import inversion_table

MINI = (
    "!POS\tN,V\n"
    "!FEAT\tnumber:sg|pl,tense:pres|past\n"
    "F\tN1\t\tnumber=sg\n"
    "F\tN1\ts\tnumber=pl\n"
    "F\tV1\t\ttense=pres\n"
    "L\tcat1\tcat\tN\tN1\t\n"
)

SAW = (
    MINI
    + "F\tVP\t\ttense=past\n"
    + "L\tsaw1\tsaw\tN\tN1\t\n"
    + "L\tsaw2\tsaw\tV\tVP\t\n"
)


def test_empty_stream_gives_empty_lexicon():
    lex = load_lexicon("")
    assert len(lex.lexemes) == 0 and len(lex.classes) == 0


def test_minimal_lexicon_parses():
    lex = load_lexicon(MINI)
    assert set(lex.classes) == {"N1", "V1"}
    assert set(lex.lexemes) == {"cat1"}
    assert lex.lexemes["cat1"].stem == "cat"


def test_duplicate_lexeme_id_rejected():
    with pytest.raises(DuplicateId) as err:
        load_lexicon(MINI + "L\tcat1\tcat\tN\tN1\t\n")
    assert err.value.id == "cat1"


def test_unresolved_class_reported_with_both_ids():
    with pytest.raises(UnresolvedClass) as err:
        load_lexicon(MINI + "L\tdog1\tdog\tN\tN9\t\n")
    assert (err.value.lexeme_id, err.value.class_id) == ("dog1", "N9")


@pytest.mark.parametrize(
    "line",
    [
        "F\tN1\ts",  # 3 fields
        "L\tx\tstem\tN\tN1",  # 5 fields
        "L\tx\tstem\tQ\tN1\t",  # undeclared POS
        "F\tN2\t\tgender=m",  # undeclared feature
        "F\tN2\t\tnumber=du",  # undeclared value
        "F\tN1\ts\tnumber=pl",  # duplicate (ending, features) in class
        "Z\toops",  # unknown record kind
    ],
)
def test_malformed_lines(line):
    with pytest.raises(MalformedLine):
        load_lexicon(MINI + line + "\n")


def test_header_after_data_rejected():
    with pytest.raises(MalformedLine):
        load_lexicon("F\tN1\t\t\n!POS\tN\n")


def test_generate_paradigm_concatenates_in_file_order():
    lex = load_lexicon(MINI)
    forms = generate_paradigm(lex, "cat1")
    assert [(a.surface, dict(a.features)) for a in forms] == [
        ("cat", {"number": "sg"}),
        ("cats", {"number": "pl"}),
    ]


def test_identity_ending_paradigm():
    text = "!POS\tN\n!FEAT\t\nF\tC0\t\t\nL\tx\trock\tN\tC0\t\n"
    lex = load_lexicon(text)
    forms = generate_paradigm(lex, "x")
    assert len(forms) == 1 and forms[0].surface == "rock" and len(forms[0].features) == 0


def test_generate_paradigm_unknown_lexeme():
    with pytest.raises(UnknownLexeme):
        generate_paradigm(load_lexicon(MINI), "nope")


def test_analyze_form_unique_match():
    lex = load_lexicon(MINI)
    result = analyze_form(lex, "cats")
    assert {(a.lexeme_id, a.features["number"]) for a in result} == {("cat1", "pl")}


def test_analyze_form_homonyms_match_inversion_oracle():
    lex = load_lexicon(SAW)
    oracle = inversion_table(lex)
    assert analyze_form(lex, "saw") == oracle["saw"]
    assert {(a.lexeme_id, a.pos) for a in analyze_form(lex, "saw")} == {("saw1", "N"), ("saw2", "V")}


def test_analyze_form_out_of_vocabulary_is_empty():
    assert analyze_form(load_lexicon(MINI), "xyzzy") == frozenset()


def test_analyze_form_lowercases_input():
    lex = load_lexicon(MINI)
    assert analyze_form(lex, "Cats") == analyze_form(lex, "cats")


def test_base_form_is_first_entry_surface():
    lex = load_lexicon(SAW)
    assert base_form(lex, "cat1") == "cat"
    assert base_form(lex, "saw2") == "saw"


def test_round_trip_property_on_random_lexicon():
    rng = random.Random(11)
    lex = load_lexicon(random_lexicon_text(rng, n_lexemes=60, n_classes=8))
    for lexeme_id in lex.lexemes:
        for analysis in generate_paradigm(lex, lexeme_id):
            assert analysis in analyze_form(lex, analysis.surface)


def test_oracle_equivalence_on_random_lexicon():
    rng = random.Random(12)
    lex = load_lexicon(random_lexicon_text(rng, n_lexemes=60, n_classes=8))
    oracle = inversion_table(lex)
    for surface, expected in oracle.items():
        assert set(analyze_form(lex, surface)) == expected
    for _ in range(50):
        junk = "zz" + "".join(rng.choice("qrstuvwxyz") for _ in range(6))
        if junk not in oracle:
            assert analyze_form(lex, junk) == frozenset()


def test_repeated_analyze_calls_equal():
    lex = load_lexicon(SAW)
    assert analyze_form(lex, "saw") == analyze_form(lex, "saw")


def test_format_load_round_trip():
    lex = load_lexicon(SAW)
    again = load_lexicon(format_lexicon(lex))
    assert set(again.lexemes) == set(lex.lexemes)
    for lid in lex.lexemes:
        assert generate_paradigm(again, lid) == generate_paradigm(lex, lid)


def test_feature_bundle_behaves_like_mapping():
    bundle = FeatureBundle({"number": "sg", "case": "nom"})
    assert bundle["number"] == "sg"
    assert bundle.get("tense") is None
    assert dict(bundle) == {"case": "nom", "number": "sg"}
    assert bundle == FeatureBundle({"case": "nom", "number": "sg"})
    assert FeatureBundle.parse(bundle.serialize()) == bundle
    with pytest.raises(ValueError):
        FeatureBundle.parse("number=sg,number=pl")
