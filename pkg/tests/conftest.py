import io
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kgtk import kernels  # noqa: E402
from kgtk.cli import main  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


class CliResult:
    def __init__(self, code, out, err):
        self.code = code
        self.out = out
        self.err = err

    @property
    def text(self):
        return self.out.decode("utf-8")


def run_cli(argv, stdin: bytes = b""):
    """Run ``kgtk`` in-process; stdin is replaced for the duration."""
    out = io.BytesIO()
    err = io.StringIO()
    old = sys.stdin
    sys.stdin = io.TextIOWrapper(io.BytesIO(stdin), encoding="utf-8")
    try:
        code = main(list(argv), stdout=out, stderr=err)
    finally:
        sys.stdin = old
    return CliResult(code, out.getvalue(), err.getvalue())


@pytest.fixture
def cli():
    return run_cli


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture(params=sorted(kernels.implementations()))
def backend(request, monkeypatch):
    """Run the test once per kernel backend by swapping the selected functions."""
    impl = kernels.implementations()[request.param]
    for name in ("split_lines", "join_rows", "filter_rows", "value_kind", "row_kinds",
                 "fnv1a64", "hash_tokens", "union_find", "reach_many"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


def write_tsv(path, header, rows):
    path.write_text("\t".join(header) + "\n" + "".join("\t".join(r) + "\n" for r in rows),
                    encoding="utf-8")
    return path


# -- acceptance verdicts ------------------------------------------------------------
# Tests marked ``criterion("name")`` get one PASS/FAIL line each, printed as soon
# as the test finishes and again in the terminal summary. A test may attach a
# short measurement with ``record_property("detail", ...)``.

_VERDICTS = []


def _verdict_line(name, outcome, detail):
    return f"ACCEPTANCE {outcome:<4} {name}" + (f"  [{detail}]" if detail else "")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = dict(rep.user_properties).get("detail", "")
        verdict = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        line = _verdict_line(marker.args[0], verdict, detail)
        _VERDICTS.append(line)
        tr = item.config.pluginmanager.get_plugin("terminalreporter")
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
