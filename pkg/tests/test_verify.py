import pytest
from mvprolate.matpoly import Params
from mvprolate.timeband import TBConfig
from mvprolate.verify import anomaly_report, run_suite

PARAMS = Params(4, 1)


@pytest.fixture(scope="module")
def suite():
    return run_suite(TBConfig(PARAMS, 10, 0.3))


def test_suite_passes(suite):
    """Every identity holds for the default configuration."""
    failures = [o.check.name for o in suite.failures()]
    assert failures == []
    assert suite.passed


def test_suite_records(suite):
    records = suite.records()
    names = [r["name"] for r in records]
    assert len(names) == len(set(names))
    for expected in (
        "orthonormality",
        "christoffel_darboux",
        "diff_formula_main",
        "symmetry_dtilde_equations",
        "kernel_identity",
        "commutator",
        "corollary_2",
    ):
        assert expected in names
    assert all(set(r) >= {"name", "residual", "tolerance", "pass"} for r in records)


def test_balanced_parameters_skip_second_corollary():
    report = run_suite(TBConfig(Params(4, 2), 3, 0.3))
    names = [r["name"] for r in report.records()]
    assert "corollary_2" not in names
    assert report.passed


def test_mutation_is_caught():
    """Dropping E0 breaks symmetry and commutation, and the suite says so."""
    report = run_suite(TBConfig(PARAMS, 10, 0.3, include_e0=False))
    assert not report.passed

    failed = {o.check.name for o in report.failures()}
    assert "commutator" in failed
    assert "b_symmetry" in failed
    assert "symmetry_dtilde_equations" in failed
    assert "orthonormality" not in failed

    gated = next(r for r in report.records() if r["name"] == "spectrum_cross_residual")
    assert not gated["pass"]
    assert gated["error"] == "MvProlateError: requires b_symmetry"


def test_anomaly_report():
    report = anomaly_report(TBConfig(PARAMS, 4, 0.3), w_max=6)
    assert not report["norm_ratio"]["w_independent"]
    assert report["h_prefactor"]["n+2w+1"] <= 1e-10
    assert report["h_prefactor"]["2n+2w+1"] > 1e-3
