"""
Tests for the click command-line front end
"""

import csv
import io
import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from click.testing import CliRunner

from cli import EXIT_INVALID, EXIT_NUMERIC, EXIT_OK, cli, run
from netsim import coherent_state, finite_m_coefficients, vacuum_state
from serialization import state_to_json
from toeplitz import ChannelParams, build_dim_matrix, transmissivity_spectrum

SCHEMA = json.loads((Path(__file__).resolve().parent.parent / 'schemas' / 'output.schema.json')
                    .read_text(encoding='utf-8'))


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner):
    def call(*args):
        return runner.invoke(cli, [str(arg) for arg in args])
    return call


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text)))

# ============================================================================
# spectrum
# ============================================================================

def test_spectrum_memoryless_column(invoke):
    result = invoke('spectrum', '--n', 6, '--lambda', 0.4)
    assert result.exit_code == EXIT_OK
    assert result.stdout.splitlines()[0] == 'j,eta,eta_symbol'
    rows = read_rows(result.stdout)
    assert [int(row['j']) for row in rows] == [1, 2, 3, 4, 5, 6]
    assert all(float(row['eta']) == pytest.approx(0.4, abs=1e-12) for row in rows)


def test_spectrum_matches_svd(invoke):
    result = invoke('spectrum', '--n', 4, '--lambda', 0.3, '--mu', 0.2)
    entries = build_dim_matrix(4, ChannelParams(lam=0.3, mu=0.2)).entries
    oracle = np.sort(np.linalg.svd(entries, compute_uv=False) ** 2)
    values = [float(row['eta']) for row in read_rows(result.stdout)]
    np.testing.assert_allclose(values, oracle, atol=1e-14)


def test_spectrum_rows_round_trip_exactly(invoke):
    result = invoke('spectrum', '--n', 5, '--lambda', 0.3, '--mu', 0.2)
    values = np.array([float(row['eta']) for row in read_rows(result.stdout)])
    expected = transmissivity_spectrum(5, ChannelParams(lam=0.3, mu=0.2)).values
    np.testing.assert_array_equal(values, expected)


def test_spectrum_json_validates(invoke):
    result = invoke('spectrum', '--n', 3, '--lambda', 0.3, '--mu', 0.2, '--format', 'json')
    document = json.loads(result.stdout)
    jsonschema.validate(document, SCHEMA)
    assert document['meta']['command'] == 'spectrum'
    assert document['meta']['params']['lambda'] == 0.3
    assert len(document['rows']) == 3


def test_output_is_deterministic(invoke):
    first = invoke('spectrum', '--n', 12, '--lambda', 0.3, '--mu', 0.6)
    second = invoke('spectrum', '--n', 12, '--lambda', 0.3, '--mu', 0.6)
    assert first.stdout == second.stdout


def test_out_file(invoke, tmp_path):
    target = tmp_path / 'spectrum.csv'
    result = invoke('spectrum', '--n', 3, '--lambda', 0.5, '--out', target)
    assert result.exit_code == EXIT_OK
    assert result.stdout == ''
    assert '✓' in result.stderr
    text = target.read_bytes().decode('utf-8')
    assert '\r' not in text
    assert len(text.splitlines()) == 4

# ============================================================================
# capacity
# ============================================================================

def test_capacity_memoryless(invoke):
    k = read_rows(invoke('capacity', '--lambda', 0.5, '--kind', 'k').stdout)[0]
    q = read_rows(invoke('capacity', '--lambda', 0.5, '--kind', 'q').stdout)[0]
    assert float(k['value']) == pytest.approx(1.0, abs=1e-9)
    assert float(q['value']) == 0.0
    assert k['exact'] == 'true'


def test_capacity_bracketed(invoke):
    row = read_rows(invoke('capacity', '--lambda', 0.3, '--mu', 0.2).stdout)[0]
    assert float(row['lower']) <= float(row['value']) <= float(row['upper'])


def test_capacity_json_with_noise(invoke):
    result = invoke('capacity', '--lambda', 0.8, '--mu', 0.4, '--nu', 0.5, '--format', 'json')
    document = json.loads(result.stdout)
    jsonschema.validate(document, SCHEMA)
    [row] = document['rows']
    assert row['exact'] is False
    assert row['upper'] is None
    assert row['lower_bound_rule'] == 'coherent_information'


def test_capacity_noise_csv_marks_infinite_upper(invoke):
    row = read_rows(invoke('capacity', '--lambda', 0.8, '--mu', 0.4, '--nu', 0.5).stdout)[0]
    assert row['upper'] == 'inf'

# ============================================================================
# region
# ============================================================================

def test_region_q2_equals_k(invoke):
    q2 = read_rows(invoke('region', '--kind', 'q2', '--grid', '0.2:0.6:2').stdout)
    k = read_rows(invoke('region', '--kind', 'k', '--grid', '0.2:0.6:2').stdout)
    assert len(k) == 4
    assert [row['value'] for row in q2] == [row['value'] for row in k]


def test_region_single_cell(invoke):
    result = invoke('region', '--kind', 'q', '--lambda-grid', '0.25:0.25:1', '--mu-grid', '0.25:0.25:1')
    [row] = read_rows(result.stdout)
    assert row['status'] == 'positive'
    assert float(row['value']) > 0


def test_region_rejects_bad_grid(invoke):
    assert invoke('region', '--grid', '0.2:0.6').exit_code == EXIT_INVALID

# ============================================================================
# converge
# ============================================================================

def test_converge_finite_m_memoryless(invoke):
    result = invoke('converge', '--mode', 'finite_m', '--lambda', 0.3, '--n', 4, '--m-list', '1,10')
    rows = read_rows(result.stdout)
    assert [int(row['m_steps']) for row in rows] == [1, 10]
    assert all(float(row['error']) < 1e-14 for row in rows)


def test_converge_tail(invoke):
    rows = read_rows(invoke('converge', '--lambda', 0.3, '--mu', 0.2).stdout)
    assert [int(row['n']) for row in rows] == [4, 10, 60]
    deviations = [float(row['max_deviation']) for row in rows]
    assert deviations[0] > deviations[1] > deviations[2]


def test_converge_rejects_bad_list(invoke):
    assert invoke('converge', '--mode', 'finite_m', '--lambda', 0.3, '--m-list', '10,x').exit_code == EXIT_INVALID

# ============================================================================
# simulate
# ============================================================================

def test_simulate_vacuum(invoke, tmp_path):
    path = tmp_path / 'vacuum.json'
    path.write_text(state_to_json(vacuum_state(1)), encoding='utf-8')
    result = invoke('simulate', '--state', path, '--lambda', 0.5, '--nu', 1)
    assert result.exit_code == EXIT_OK
    state = json.loads(result.stdout)
    jsonschema.validate(state, SCHEMA)
    np.testing.assert_allclose(state['covariance'], 2.0 * np.eye(2), atol=1e-14)


def test_simulate_routes_agree(invoke, tmp_path):
    path = tmp_path / 'coherent.json'
    path.write_text(state_to_json(coherent_state([0.5, 1j, -0.3 + 0.2j])), encoding='utf-8')
    direct = json.loads(invoke('simulate', '--state', path, '--lambda', 0.5, '--mu', 0.3).stdout)
    routed = json.loads(invoke('simulate', '--state', path, '--lambda', 0.5, '--mu', 0.3,
                               '--route', 'decomposition').stdout)
    np.testing.assert_allclose(routed['covariance'], direct['covariance'], atol=1e-10)
    np.testing.assert_allclose(routed['mean'], direct['mean'], atol=1e-10)


def test_simulate_zero_transmissivity(invoke, tmp_path):
    path = tmp_path / 'coherent.json'
    path.write_text(state_to_json(coherent_state([2.0, -1j])), encoding='utf-8')
    state = json.loads(invoke('simulate', '--state', path, '--lambda', 0, '--mu', 0.4, '--nu', 0.25).stdout)
    np.testing.assert_allclose(state['covariance'], 1.5 * np.eye(4), atol=1e-12)
    np.testing.assert_allclose(state['mean'], 0.0, atol=1e-12)


@pytest.mark.parametrize('content', ['not json', '{"n": 1, "mean": [0, 0]}',
                                     '{"n": 1, "mean": [0, 0], "covariance": [[0.1, 0], [0, 0.1]]}'])
def test_simulate_rejects_malformed_state(invoke, tmp_path, content):
    path = tmp_path / 'bad.json'
    path.write_text(content, encoding='utf-8')
    result = invoke('simulate', '--state', path, '--lambda', 0.5)
    assert result.exit_code == EXIT_INVALID
    assert '✗' in result.stderr


def test_simulate_size_mismatch(invoke, tmp_path):
    path = tmp_path / 'vacuum.json'
    path.write_text(state_to_json(vacuum_state(2)), encoding='utf-8')
    assert invoke('simulate', '--state', path, '--n', 3, '--lambda', 0.5).exit_code == EXIT_INVALID

# ============================================================================
# matrix and threshold
# ============================================================================

def test_matrix_dump(invoke):
    lines = invoke('matrix', '--n', 3, '--lambda', 0.3, '--mu', 0.2).stdout.splitlines()
    parsed = np.array([[float(token) for token in line.split()] for line in lines])
    np.testing.assert_array_equal(parsed, build_dim_matrix(3, ChannelParams(lam=0.3, mu=0.2)).entries)


def test_matrix_dump_lim(invoke):
    lines = invoke('matrix', '--n', 3, '--lambda', 0.3, '--mu', 0.2, '--model', 'lim').stdout.splitlines()
    parsed = np.array([[float(token) for token in line.split()] for line in lines])
    np.testing.assert_array_equal(parsed, finite_m_coefficients(1, 3, 0.3, 0.2).a_matrix)


def test_threshold(invoke):
    row = read_rows(invoke('threshold', '--lambda', 0.25, '--kind', 'q', '--t-e', 1).stdout)[0]
    assert float(row['sqrt_mu_necessary']) == pytest.approx(1 / 3)
    assert float(row['delay_guaranteed']) == pytest.approx(math.log(9.0))
    assert row['exact'] == 'true'

# ============================================================================
# Exit Codes and Configuration
# ============================================================================

@pytest.mark.parametrize('args', [
    ('capacity', '--lambda', 1.5),
    ('capacity', '--mu', 0.2),
    ('capacity', '--lambda', 0.3, '--kind', 'zz'),
    ('capacity', '--lambda', 0.3, '--nu', 0.5, '--kind', 'q', '--lower-bound', 'reverse_coherent_information'),
    ('spectrum', '--n', 0, '--lambda', 0.3),
    ('threshold', '--lambda', 1.0),
    ('nonexistent',),
])
def test_invalid_input_exits_one(invoke, args):
    result = invoke(*args)
    assert result.exit_code == EXIT_INVALID


def test_divergence_exits_two(invoke):
    result = invoke('capacity', '--lambda', 1, '--mu', 0.3)
    assert result.exit_code == EXIT_NUMERIC
    assert '✗' in result.stderr


def test_run_returns_exit_code():
    assert run(['capacity', '--lambda', '1.5']) == EXIT_INVALID
    assert run(['threshold', '--lambda', '0.25']) == EXIT_OK


def test_version(invoke):
    result = invoke('--version')
    assert result.exit_code == EXIT_OK
    assert '0.1.0' in result.stdout


def test_config_file_defaults_and_flag_precedence(invoke, tmp_path):
    path = tmp_path / 'defaults.json'
    path.write_text(json.dumps({'lambda': 0.5, 'kind': 'q', 'format': 'json'}), encoding='utf-8')
    from_file = json.loads(invoke('--config', path, 'capacity').stdout)
    assert from_file['rows'][0]['value'] == 0.0
    assert from_file['rows'][0]['kind'] == 'q'
    overridden = read_rows(invoke('--config', path, 'capacity', '--kind', 'k', '--format', 'csv').stdout)
    assert float(overridden[0]['value']) == pytest.approx(1.0, abs=1e-9)


def test_config_file_rejected(invoke, tmp_path):
    path = tmp_path / 'defaults.json'
    path.write_text('[1, 2]', encoding='utf-8')
    assert invoke('--config', path, 'capacity', '--lambda', 0.5).exit_code == EXIT_INVALID
    assert invoke('--config', tmp_path / 'missing.json', 'capacity', '--lambda', 0.5).exit_code == EXIT_INVALID
