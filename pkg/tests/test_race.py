"""
Unit tests for exact prime races and their logarithmic measures
"""

import csv

import numpy as np
import pytest

from primerace import race as race_module
from primerace.errors import CacheFormatError, ConfigurationError, DomainError, PreconditionError
from primerace.race import (
    empirical_log_density,
    geometric_checkpoints,
    lead_changes,
    ordering_measures,
    race_counts,
    read_trace,
)


@pytest.fixture(scope="module")
def mod4_trace():
    return race_counts(4, (3, 1), 10 ** 5)


def _row_at(trace, x):
    (index,) = np.flatnonzero(trace.checkpoints == x)
    return tuple(int(c) for c in trace.counts[index])


def test_geometric_checkpoints():
    assert list(geometric_checkpoints(1000, 1)) == [10, 100, 1000]
    xs = geometric_checkpoints(12345, 10)
    assert xs[0] == 2 and xs[-1] == 12345
    assert np.all(np.diff(xs) > 0)
    with pytest.raises(ConfigurationError):
        geometric_checkpoints(1000, 0)


def test_counts_mod_four(mod4_trace):
    assert mod4_trace.complete
    assert _row_at(mod4_trace, 10) == (2, 1)
    assert _row_at(mod4_trace, 100) == (13, 11)
    assert int(mod4_trace.pi[mod4_trace.checkpoints == 100][0]) == 25
    assert mod4_trace.partition_residual() == 0


def test_first_lead_change_mod_four(mod4_trace):
    states = mod4_trace.states()
    ones_lead = race_module._encode_ordering((1, 0), 2)
    assert int(mod4_trace.event_x[states == ones_lead][0]) == 26861
    assert lead_changes(mod4_trace, (1, 0)) >= 1


def test_measures_mod_four(mod4_trace):
    measures = ordering_measures(mod4_trace)
    assert measures.total == pytest.approx(1.0, abs=1e-9)
    assert measures.measures[(0, 1)] > 0.8
    assert measures.measures[(0, 1)] + measures.ties > 0.99
    density = empirical_log_density(mod4_trace, (0, 1))
    assert density.strict_measure == pytest.approx(measures.measures[(0, 1)])
    assert density.notes
    payload = measures.to_dict()
    assert payload["orderings"][0]["ordering"] == [3, 1]


def test_mod_three_race_has_one_leader():
    trace = race_counts(3, (2, 1), 10 ** 5)
    density = empirical_log_density(trace, (0, 1))
    assert density.strict_measure >= 0.95
    assert density.tie_measure < 0.05


def test_partition_identity_over_all_classes():
    trace = race_counts(7, range(1, 7), 2 * 10 ** 5)
    assert trace.partition_residual() == 0
    assert int(trace.pi[-1]) == 17984
    assert race_counts(7, (1, 2, 4), 1000).partition_residual() is None


def test_unknown_ordering_rejected(mod4_trace):
    with pytest.raises(DomainError):
        empirical_log_density(mod4_trace, (0, 0))


def test_bad_classes():
    with pytest.raises(DomainError):
        race_counts(4, (3,), 1000)
    with pytest.raises(DomainError):
        race_counts(4, (1, 5), 1000)
    with pytest.raises(DomainError):
        race_counts(4, (1, 2), 1000)
    with pytest.raises(DomainError):
        race_counts(4, (1, 3), 2)
    with pytest.raises(ConfigurationError):
        race_counts(4, (1, 3), 10 ** 11)


def test_trace_round_trip(tmp_path, mod4_trace):
    path = tmp_path / "mod4.trace"
    written = race_counts(4, (3, 1), 10 ** 5, trace_path=path)
    loaded = read_trace(path)
    for name in ("checkpoints", "counts", "pi", "event_x", "event_counts", "running"):
        assert np.array_equal(getattr(loaded, name), getattr(written, name)), name
    assert loaded.classes == (3, 1)
    assert np.array_equal(loaded.event_x, mod4_trace.event_x)


def test_resume_after_interruption(tmp_path, monkeypatch):
    path = tmp_path / "partial.trace"
    real = race_module.segmented_sieve

    def interrupted(*args, **kwargs):
        for i, segment in enumerate(real(*args, **kwargs)):
            if i == 3:
                raise RuntimeError("interrupted")
            yield segment

    monkeypatch.setattr(race_module, "segmented_sieve", interrupted)
    with pytest.raises(RuntimeError):
        race_counts(4, (3, 1), 300000, trace_path=path, segment_size=2 ** 16, workers=1)
    partial = read_trace(path)
    assert 2 < partial.x_done < 300000
    with pytest.raises(PreconditionError):
        ordering_measures(partial)

    monkeypatch.undo()
    resumed = race_counts(4, (3, 1), 300000, trace_path=path, segment_size=2 ** 16, workers=1)
    fresh = race_counts(4, (3, 1), 300000, segment_size=2 ** 16, workers=1)
    for name in ("checkpoints", "counts", "pi", "event_x", "event_counts"):
        assert np.array_equal(getattr(resumed, name), getattr(fresh, name)), name


def test_corrupt_trace_is_recomputed(tmp_path, mod4_trace):
    path = tmp_path / "corrupt.trace"
    path.write_bytes(b"PRTR" + b"\x00" * 10)
    with pytest.raises(CacheFormatError):
        read_trace(path)
    trace = race_counts(4, (3, 1), 10 ** 5, trace_path=path)
    assert np.array_equal(trace.event_x, mod4_trace.event_x)
    assert read_trace(path).complete


def test_to_csv(tmp_path, mod4_trace):
    path = mod4_trace.to_csv(tmp_path / "mod4.csv")
    with open(path) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["x", "count_3", "count_1"]
    xs = [int(row[0]) for row in rows[1:]]
    assert xs == sorted(set(xs))
    assert ["100", "13", "11"] in rows


@pytest.mark.slow
def test_mod_four_bias_to_ten_million():
    trace = race_counts(4, (3, 1), 10 ** 7)
    density = empirical_log_density(trace, (0, 1))
    assert density.strict_measure >= 0.9
    assert density.strict_measure + density.tie_measure >= 0.99


@pytest.mark.slow
def test_mod_three_bias_to_ten_million():
    trace = race_counts(3, (2, 1), 10 ** 7)
    density = empirical_log_density(trace, (0, 1))
    assert density.strict_measure >= 0.95
    measures = ordering_measures(trace)
    assert measures.total == pytest.approx(1.0, abs=1e-9)


@pytest.mark.slow
def test_mod_seven_squares_every_ordering_occurs():
    trace = race_counts(7, (1, 2, 4), 10 ** 8)
    measures = ordering_measures(trace)
    assert measures.total == pytest.approx(1.0, abs=1e-9)
    assert all(value > 0 for value in measures.measures.values())
