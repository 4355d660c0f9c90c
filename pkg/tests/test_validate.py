import pytest

from generators import CORPUS_HEADER, INJECTIONS, corrupted_corpus
from kgtk.edges import EdgeStream
from kgtk.errors import AbortOnFirstError
from kgtk.validate import ValidationRule, clean, repair_date, validate

SNIPPET_HEADER = ["node1", "label", "node2", "creator", "source", "id"]
SNIPPET = [
    ['"Moe"', "rdf:type", "Person", '"Hans"', "Wikipedia", "E1"],
    ['"Larry"', "rdf:type", "Person", '"Hans"', "Wikipedia", "E2"],
    ['"Curly"', "rdf:type", "Person", "", "Wikipedia", "E3"],
    ['"Curly"', "hasFriend", '"Moe"', "", "Wikipedia", "E4"],
]


def stream(rows, header=("node1", "label", "node2")):
    return EdgeStream.from_rows(list(header), [list(r) for r in rows])


def run_validate(rows, header=("node1", "label", "node2"), **kw):
    out, report = validate(stream(rows, header), **kw)
    return out.collect(), report


def test_valid_snippet_has_no_findings():
    rows, report = run_validate(SNIPPET, SNIPPET_HEADER)
    assert rows == SNIPPET
    assert report.total_findings == 0
    assert (report.rows_read, report.rows_passed, report.rows_excluded) == (4, 4, 0)


def test_empty_node2_excluded():
    rows, report = run_validate([["Q1", "P1", ""], ["Q1", "P1", "Q2"]], on_error="exclude")
    assert rows == [["Q1", "P1", "Q2"]]
    assert report.counts["empty_required"] == 1
    assert report.rows_excluded == 1


def test_bad_language_tag():
    _, report = run_validate([["Q1", "P1", "'abc'@zzzz9"]])
    assert report.counts == {"language_tag": 1}


@pytest.mark.parametrize("rule", sorted(INJECTIONS))
def test_every_injection_is_detected(rule):
    base = ["Q1", "P1", "Q2", "", "E1"]
    for inject in INJECTIONS[rule]:
        _, report = run_validate([inject(list(base))], CORPUS_HEADER)
        assert report.counts[rule] >= 1, (rule, inject(list(base)), report.counts)


def test_report_mode_never_mutates_or_drops():
    rows, _ = corrupted_corpus(1, 300)
    out, report = run_validate(rows, CORPUS_HEADER)
    assert out == rows
    assert report.rows_passed == report.rows_read == 300


def test_abort_on_first_error():
    with pytest.raises(AbortOnFirstError) as exc:
        run_validate([["Q1", "P1", "Q2"], ["Q1", "P1", "@99/0"]], on_error="abort")
    assert exc.value.finding.line_number == 3


def test_length_bounds_configurable():
    _, report = run_validate([["Q1", "P1", "Q12345"]], max_length=3)
    assert report.counts["value_length"] == 1
    _, report = run_validate([["Q1", "P1", "Q12345"]], min_length=3)
    assert report.counts["value_length"] == 2


def test_custom_rule():
    rule = ValidationRule("no_p99", "line", check=lambda row, h: [("label", "P99 is banned")] if row[1] == "P99" else [])
    _, report = run_validate([["Q1", "P99", "Q2"], ["Q1", "P1", "Q2"]], rules=[rule])
    assert report.counts == {"no_p99": 1}


def test_fix_action_rejected_outside_known_set():
    with pytest.raises(ValueError):
        ValidationRule("x", "line", action="explode")


def test_report_text_and_tsv():
    _, report = run_validate([["Q1", "P1", ""]])
    assert "empty_required: 1" in report.to_text()
    assert "finding:empty_required\t1" in report.to_tsv()


# -- clean ---------------------------------------------------------------------------

def run_clean(rows, header=("node1", "label", "node2"), **kw):
    out, report = clean(stream(rows, header), **kw)
    return out.collect(), report


def test_clean_escapes_stray_pipe():
    rows, report = run_clean([["Q1", "P1", '"a|b"']])
    assert rows == [["Q1", "P1", '"a\\|b"']]
    assert report.fixes["pipe_escape"] == 1 and report.rows_fixed == 1


@pytest.mark.parametrize("policy,expected", [
    ("clamp", "^1839-12-00T00:00:00Z/9"),
    ("zero", "^1839-00-00T00:00:00Z/9"),
    ("drop", None),
])
def test_clean_date_policies(policy, expected):
    rows, report = run_clean([["Q1", "P1", "^1839-13-00T00:00:00Z/9"]], date_policy=policy)
    if expected is None:
        assert rows == [] and report.rows_excluded == 1
    else:
        assert rows == [["Q1", "P1", expected]]
        assert report.fixes["date_" + policy] == 1


def test_repair_date_clamps_day_to_month_length():
    assert repair_date("^2019-02-30T00:00:00Z", "clamp") == "^2019-02-28T00:00:00Z"
    assert repair_date("^2020-01-01T25:61:00Z/11", "clamp") == "^2020-01-01T23:59:00Z/11"


def test_clean_normalizes_literals():
    rows, report = run_clean([["Q1", "P1", "1.50E+3"], ["Q1", "P1", "@43.5/10.25"], ["Q1", "P1", "'x'@EN"]])
    assert [r[2] for r in rows] == ["1.50e+3", "@043.5/010.25", "'x'@en"]


def test_clean_drops_short_row():
    header = ["node1", "label", "node2", "a", "b", "c"]
    rows, report = run_clean([["Q1", "P1"], ["Q1", "P1", "Q2", "", "", ""]], header)
    assert rows == [["Q1", "P1", "Q2", "", "", ""]]
    assert report.rows_excluded == 1


def test_clean_is_sound_and_idempotent():
    rows, _ = corrupted_corpus(2, 2000)
    cleaned, report = run_clean(rows, CORPUS_HEADER, date_policy="clamp")
    assert report.rows_read == len(cleaned) + report.rows_excluded
    again, report2 = run_clean(cleaned, CORPUS_HEADER, date_policy="clamp")
    assert again == cleaned and report2.rows_fixed == 0 and report2.rows_excluded == 0
    _, vreport = run_validate(cleaned, CORPUS_HEADER)
    assert vreport.total_findings == 0
