# tests/integration/test_pipeline.py

import json

import pytest

from src.cli.config import RunConfig
from src.cli.pipeline import report_name, run
from src.cli.report import EXIT_UNVERIFIED, EXIT_VERIFIED, UNVERIFIED_BANNER, bracket_from_dict

DIM_E1011 = "0.146921235390783463311108628515904073067083129676755"


def _e1011(**overrides):
    data = dict(digits=['10', '11'], r=4, h_target='0.01', nu=1, precision=20)
    data.update(overrides)
    return RunConfig(**data)


@pytest.fixture(scope="module")
def e1011_report():
    return run(_e1011())


def test_verified_bracket(e1011_report):
    report = e1011_report
    arith = report.arith
    bracket = report.bracket
    expected = arith.real(DIM_E1011)
    assert report.verified, report.reasons
    assert report.exit_code == EXIT_VERIFIED
    assert bracket.s_l <= expected <= bracket.s_u
    assert abs(bracket.s_mid - expected) < 1e-7
    assert report.certificate.verified
    assert report.coverage.ok
    assert report.mesh.I == 1 and report.mesh.N == 1 and report.mesh.Q == 5


def test_reported_value_is_truncated_lower_end(e1011_report):
    report = e1011_report
    digits = report.reported_digits()
    assert 0 < digits <= report.bracket.digits_guaranteed
    value = str(report.reported_value())
    assert DIM_E1011.startswith(value)


def test_report_sections(e1011_report):
    data = e1011_report.to_dict()
    assert list(data) == ['config', 'domain', 'mesh', 'certificate', 'solver_trace', 'bracket']
    assert data['config']['nu_resolved'] == 1
    assert data['bracket']['overall_verified'] is True
    assert data['solver_trace'][0]['phase'] == "coarse"
    text = e1011_report.render()
    assert UNVERIFIED_BANNER not in text
    assert "VERIFIED" in text


def test_json_is_deterministic(e1011_report):
    assert run(_e1011()).to_json() == e1011_report.to_json()
    rendered = run(_e1011(output_format='json')).render()
    assert json.loads(rendered)['bracket'] == e1011_report.to_dict()['bracket']


def test_bracket_round_trip(e1011_report):
    arith = e1011_report.arith
    data = e1011_report.to_dict()['bracket']
    restored = bracket_from_dict(data, arith)
    assert restored.to_dict(arith) == e1011_report.bracket.to_dict(arith)


def test_timings_only_on_request():
    report = run(_e1011(timings=True))
    assert set(report.to_dict()['timings']) == {'domain', 'mesh', 'stencil', 'solver', 'certificate'}


def test_unverified_run_is_flagged():
    config = RunConfig(digits=['1', '2'], r=4, h_target='0.05', nu=2, precision=17, verify=False)
    report = run(config)
    assert not report.verified
    assert report.exit_code == EXIT_UNVERIFIED
    assert "verification disabled" in report.reasons
    assert report.render().startswith(UNVERIFIED_BANNER)
    assert report.to_dict()['bracket']['overall_verified'] is False


def test_auto_nu():
    report = run(_e1011(nu='auto'))
    assert report.nu == 1
    assert report.to_dict()['config']['nu'] == 'auto'


def test_dump_matrix(tmp_path):
    path = tmp_path / "matrix.txt"
    run(_e1011(dump_matrix=str(path)))
    lines = path.read_text(encoding='utf-8').split()
    assert lines[0] == "5"
    assert len(lines) == 1 + 25


def test_report_name():
    assert report_name(_e1011()) == "E[10,11]_r4_h0.01"
    assert report_name(_e1011(label="row1")) == "row1_r4_h0.01"
