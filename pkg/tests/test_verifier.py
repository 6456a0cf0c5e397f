"""校验套件测试"""

import pytest

from src.core.errors import QDomainError, QEvaluationError
from src.core.qcore import make_q_param
from src.core.verifier import SUITES, Verifier, VerifyCheck, VerifyReport


@pytest.fixture(scope="module")
def verifier(qp_half):
    return Verifier(qp_half)


@pytest.mark.parametrize("suite", SUITES)
def test_suite_passes_for_half(verifier, suite):
    report = verifier.run(suite)
    assert report.suite == suite
    assert report.checks
    assert report.passed, [c.identity for c in report.failed_checks()]


def test_unknown_suite(verifier):
    with pytest.raises(QDomainError):
        verifier.run("nope")


def test_window_too_small(qp_half):
    with pytest.raises(QDomainError):
        Verifier(qp_half, 0, 3)


def test_structural_checks_are_skipped(qp_plain):
    report = Verifier(qp_plain).run("trig")
    bounds = next(c for c in report.checks if c.identity == "trig-bounds")
    assert bounds.passed
    assert bounds.max_residual is None
    assert bounds.note.startswith("skipped")


def test_library_errors_become_failed_checks(verifier):
    def broken():
        raise QEvaluationError("boom")

    check = verifier._check("broken", "x = x", 1e-12, broken)
    assert not check.passed
    assert check.note == "QEvaluationError: boom"


def test_report_serialization():
    ok = VerifyCheck("a", "anchor", None, 1e-12, True)
    bad = VerifyCheck("b", "anchor", None, 1e-12, False, "QPoleError: x")
    report = VerifyReport("core", [ok, bad], wall_clock=1.25)
    assert not report.passed
    assert report.failed_checks() == [bad]
    data = report.to_dict()
    assert "wall_clock" not in data
    assert data["checks"][1] == {"identity": "b", "anchor": "anchor", "max_residual": None,
                                 "tolerance": 1e-12, "passed": False, "note": "QPoleError: x"}
    assert report.to_dict(include_wall_clock=True)["wall_clock"] == 1.25


def test_combine_reports():
    first = VerifyReport("core", [VerifyCheck("a", "", None, 0.0, True)], 1.0)
    second = VerifyReport("trig", [VerifyCheck("b", "", None, 0.0, True)], 2.0)
    combined = VerifyReport.combine("all", [first, second])
    assert combined.suite == "all"
    assert [c.identity for c in combined.checks] == ["a", "b"]
    assert combined.wall_clock == 3.0
    assert combined.passed


def _by_identity(report):
    return {check.identity: check for check in report.checks}


def test_core_suite_checks_jackson_identities(verifier):
    checks = _by_identity(verifier.run("core"))
    assert checks["scaling-identity"].tolerance == 1e-12
    assert checks["integration-by-parts"].tolerance == 1e-10
    for identity in ("scaling-identity", "integration-by-parts"):
        assert checks[identity].passed
        assert checks[identity].max_residual is not None
        assert checks[identity].max_residual <= checks[identity].tolerance


def test_off_lattice_remainder_is_marked_skipped(verifier):
    checks = _by_identity(verifier.run("bessel"))
    off_lattice = checks["remainder-decay-alpha-1"]
    assert off_lattice.max_residual is None
    assert off_lattice.note.startswith("skipped")
    assert "|R| =" in off_lattice.note
    on_lattice = checks["remainder-decay-alpha-0.5"]
    assert on_lattice.max_residual is not None
    assert not on_lattice.note.startswith("skipped")


class TestExtendedPrecision:
    @pytest.fixture(scope="class")
    def reports(self, qp_half):
        binary = Verifier(qp_half)
        extended = Verifier(make_q_param(0.5, precision="extended"))
        return {suite: (_by_identity(binary.run(suite)), _by_identity(extended.run(suite)))
                for suite in ("core", "trig")}

    @pytest.mark.parametrize("suite", ["core", "trig"])
    def test_suite_passes(self, reports, suite):
        _, extended = reports[suite]
        assert all(c.passed for c in extended.values()), \
            [identity for identity, c in extended.items() if not c.passed]

    @pytest.mark.parametrize("suite, identity", [
        ("core", "pochhammer-vs-mpmath"),
        ("core", "qgamma-vs-mpmath"),
        ("core", "fundamental-theorem"),
        ("core", "jackson-examples"),
        ("core", "scaling-identity"),
        ("core", "integration-by-parts"),
        ("trig", "q-pythagorean"),
        ("trig", "derivative-relations"),
        ("trig", "recurrence-vs-series"),
        ("trig", "bessel-reductions"),
    ])
    def test_thresholds_are_stricter(self, reports, suite, identity):
        binary, extended = reports[suite]
        assert extended[identity].tolerance < binary[identity].tolerance

    def test_no_threshold_is_looser(self, reports):
        for binary, extended in reports.values():
            assert binary.keys() == extended.keys()
            for identity, check in extended.items():
                assert check.tolerance <= binary[identity].tolerance

    def test_ill_conditioned_points_use_series(self, reports):
        binary, extended = reports["trig"]
        check = extended["q-pythagorean-ill-conditioned"]
        assert check.tolerance == 1e-20
        assert check.max_residual is not None
        assert check.max_residual <= 1e-20
        assert "k ∈" in check.note
        assert binary["q-pythagorean-ill-conditioned"].note.startswith("skipped")
