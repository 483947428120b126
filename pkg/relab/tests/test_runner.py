"""
Tests for the instance runner and its reports.
"""
import json

import pytest

from relab.exceptions import InstanceError
from relab.instances import parse_instance
from relab.runner import OPERATIONS, RunOptions, run, run_many, summarize

FX_B_OBJECTS = {
    'S': {'kind': 'relation', 'from': 'H', 'to': 'H',
          'generators': [[[[1, 0], [0, 0]], [[1, 1], [0, 0]]],
                         [[[0, 0], [1, 0]], [[0, 0], [1, 1]]]]},
    'A': {'kind': 'relation', 'from': 'H', 'to': 'H',
          'generators': [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]},
}
SHORT_RELATION = {'kind': 'relation', 'from': 'H', 'to': 1,
                  'generators': [[[1, 0], [0]], [[0, 1], [1]]]}


def _instance(commands, objects=None):
    return parse_instance(json.dumps({
        'name': 'inline',
        'dims': {'H': 2},
        'objects': objects or FX_B_OBJECTS,
        'commands': commands,
    }))


# ============================================================================
# Fixtures end to end
# ============================================================================

class TestFixtures:
    """The four bundled instances run clean."""

    @pytest.mark.parametrize('name', ['fx_a', 'fx_b', 'fx_c', 'fx_d'])
    def test_fixture_passes(self, fixtures_dir, name):
        """Every command of a bundled instance should pass."""
        report = run(fixtures_dir / f'{name}.json')
        failing = [(c.index, c.op, c.message) for c in report.commands if c.status != 'pass']
        assert failing == []
        assert report.status == 'pass'
        assert report.exit_code == 0

    def test_report_is_byte_stable(self, fixtures_dir):
        """Two runs should give identical JSON without timing."""
        first = run(fixtures_dir / 'fx_a.json').to_json()
        second = run(fixtures_dir / 'fx_a.json').to_json()
        assert first == second
        assert 'timing' not in first

    def test_timing_is_opt_in(self, fixtures_dir):
        """Timing should appear only when requested."""
        report = run(fixtures_dir / 'fx_b.json', RunOptions(timing=True))
        assert all('timing' in command.to_dict() for command in report.commands)

    def test_fingerprints_recorded(self, fixtures_dir):
        """Relation arguments and results should be fingerprinted."""
        report = run(fixtures_dir / 'fx_a.json')
        friedrichs = report.commands[1]
        assert set(friedrichs.fingerprints) == {'S', 'result', 'expected'}
        assert friedrichs.fingerprints['result'] == friedrichs.fingerprints['expected']


# ============================================================================
# Expectations
# ============================================================================

class TestExpectations:
    """Tests for the expect kinds."""

    def test_store_and_same_as(self):
        """Stored results should be usable by later same_as checks."""
        report = run(_instance([
            {'op': 'inverse', 'args': {'R': 'S'}, 'store': 'S_inv'},
            {'op': 'inverse', 'args': {'R': 'S_inv'}, 'expect': {'same_as': 'S'}},
        ]))
        assert report.status == 'pass'
        assert report.commands[1].gap < 1e-12

    def test_value_max_min(self):
        """value, max and min expectations should pass when met."""
        report = run(_instance([
            {'op': 'gap', 'args': {'first': 'S', 'second': 'S'}, 'expect': {'value': 0.0, 'max': 1e-12}},
            {'op': 'oracle_gap', 'args': {'S': 'A'}, 'expect': {'min': 0.5}},
        ]))
        assert report.status == 'pass'

    def test_failed_field(self):
        """A wrong field value should fail the command with exit code 1."""
        report = run(_instance([
            {'op': 'sectoriality', 'args': {'R': 'S'}, 'expect': {'fields': {'tan_min': 2.0}}},
        ]))
        entry = report.commands[0]
        assert entry.status == 'fail'
        assert 'tan_min' in entry.message
        assert report.exit_code == 1

    def test_failed_relation(self):
        """A wrong relation should fail with the measured gap."""
        report = run(_instance([
            {'op': 'friedrichs_oracle', 'args': {'S': 'A'}, 'expect': {'same_as': 'S'}},
        ]))
        assert report.commands[0].status == 'fail'
        assert report.commands[0].gap > 0.1

    def test_expected_error(self):
        """An expected error kind should pass."""
        report = run(_instance([
            {'op': 'recover_factorization', 'args': {'S': 'A'}, 'expect': {'error': 'not-factorizable'}},
        ]))
        assert report.commands[0].status == 'pass'
        assert report.commands[0].message.startswith('not-factorizable')

    def test_unexpected_error(self):
        """An unexpected error should not stop later commands."""
        report = run(_instance([
            {'op': 'recover_factorization', 'args': {'S': 'A'}},
            {'op': 'sectoriality', 'args': {'R': 'S'}},
        ]))
        assert [c.status for c in report.commands] == ['error', 'pass']
        assert report.status == 'error'
        assert report.exit_code == 1

    def test_missing_error(self):
        """An expected error that does not occur should fail."""
        report = run(_instance([
            {'op': 'sectoriality', 'args': {'R': 'S'}, 'expect': {'error': 'not-sectorial'}},
        ]))
        assert report.commands[0].status == 'fail'

    def test_literal_argument(self):
        """Non-reference arguments should be passed through as literals."""
        report = run(_instance([
            {'op': 'recover_factorization', 'args': {'S': 'S', 'mode': 'krein'}, 'expect': {'same_as': 'S'}},
        ]))
        assert report.status == 'pass'

    def test_failed_verification(self):
        """decompose_maximal refuses A, so the suite records a failure."""
        report = run(_instance([{'op': 'verify_maximal', 'args': {'H': 'A'}}]))
        entry = report.commands[0]
        assert entry.status == 'fail'
        assert 'decompose_maximal' in entry.message


# ============================================================================
# Input errors
# ============================================================================

class TestInputErrors:
    """Problems found before any command runs."""

    def test_unknown_op(self):
        """An unknown op should be an input error."""
        with pytest.raises(InstanceError) as excinfo:
            run(_instance([{'op': 'frobnicate', 'args': {}}]))
        assert excinfo.value.kind == 'unknown-op'

    def test_undefined_reference(self):
        """A reference to an undefined object should be an input error."""
        with pytest.raises(InstanceError, match='undefined object'):
            run(_instance([{'op': 'parts', 'args': {'R': 'missing'}}]))

    def test_reference_to_later_store(self):
        """A reference to a later store should be an input error."""
        with pytest.raises(InstanceError):
            run(_instance([
                {'op': 'parts', 'args': {'R': 'later'}},
                {'op': 'adjoint', 'args': {'R': 'S'}, 'store': 'later'},
            ]))

    def test_wrong_arguments(self):
        """Missing arguments should be an input error."""
        with pytest.raises(InstanceError, match='expects'):
            run(_instance([{'op': 'compose', 'args': {'outer': 'S'}}]))

    def test_dimension_mismatch_in_objects(self):
        """A bad object vector should be a dimension-mismatch input error."""
        objects = {'S': {'kind': 'relation', 'from': 'H', 'to': 'H',
                         'generators': [[[1, 0, 0], [0, 0]]]}}
        with pytest.raises(InstanceError) as excinfo:
            run(_instance([{'op': 'parts', 'args': {'R': 'S'}}], objects))
        assert excinfo.value.kind == 'dimension-mismatch'

    def test_dimension_mismatch_while_running(self):
        """compose(T, T) with T: C^2 -> C^1 is an input error naming both arguments."""
        objects = dict(FX_B_OBJECTS, T=SHORT_RELATION)
        with pytest.raises(InstanceError) as excinfo:
            run(_instance([{'op': 'compose', 'args': {'outer': 'T', 'inner': 'T'}}], objects))
        assert excinfo.value.kind == 'dimension-mismatch'
        assert "outer='T', inner='T'" in str(excinfo.value)

    def test_dimension_mismatch_exit_code(self):
        """run_many reports the mismatch as unusable input."""
        objects = dict(FX_B_OBJECTS, T=SHORT_RELATION)
        instance = _instance([{'op': 'compose', 'args': {'outer': 'T', 'inner': 'T'}}], objects)
        report = run_many([instance])[0]
        assert report.exit_code == 2
        assert report.error['kind'] == 'dimension-mismatch'

    def test_expected_dimension_mismatch(self):
        """An expected dimension-mismatch error still passes."""
        objects = dict(FX_B_OBJECTS, T=SHORT_RELATION)
        report = run(_instance([{'op': 'compose', 'args': {'outer': 'T', 'inner': 'T'},
                                  'expect': {'error': 'dimension-mismatch'}}], objects))
        assert report.status == 'pass'

    def test_run_many_keeps_order(self, fixtures_dir, tmp_path):
        """run_many should keep input order and report unreadable files with exit code 2."""
        sources = [fixtures_dir / 'fx_b.json', tmp_path / 'absent.json', fixtures_dir / 'fx_a.json']
        reports = run_many(sources, workers=2)
        assert [report.instance for report in reports] == ['fx-b', str(tmp_path / 'absent.json'), 'fx-a']
        assert [report.exit_code for report in reports] == [0, 2, 0]
        assert reports[1].to_dict()['status'] == 'error'


# ============================================================================
# Summaries
# ============================================================================

class TestSummarize:
    """Tests for summarize."""

    def test_floats(self, tol):
        """Floats should be rounded, -0.0 normalized and infinities written as strings."""
        assert summarize(-0.0, tol) == 0.0
        assert summarize(0.1234567890123456, tol) == 0.123456789012
        assert summarize(float('inf'), tol) == 'inf'

    def test_relation(self, fx_a, tol):
        """Relations should be summarized with kind and dimension."""
        summary = summarize(fx_a, tol)
        assert summary['kind'] == 'relation'
        assert summary['dim'] == 1

    def test_every_op_is_registered_once(self):
        """Every op should be registered under its own name."""
        assert 'verify_pair' in OPERATIONS
        assert all(op.name == name for name, op in OPERATIONS.items())
