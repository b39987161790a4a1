"""Value types, alignment, and agreement metrics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evenf.core import (EnfTrace, Event, EventStream, GridConfig,
                        PolaritySequence, align_traces, mae, pearson_cc)


# ---------------------------------------------------------------- GridConfig

def test_grid_accepts_50_and_60():
    assert GridConfig(50.0).flicker_hz == 100.0
    assert GridConfig(60.0).flicker_hz == 120.0


def test_grid_rejects_other_frequencies():
    with pytest.raises(ValueError):
        GridConfig(55.0)


# --------------------------------------------------------------- EventStream

def _small_stream():
    return EventStream(4, 4,
                       t=[0.0, 0.001, 0.001, 0.003],
                       x=[0, 1, 2, 3],
                       y=[0, 0, 1, 3],
                       p=[1, -1, 1, -1])


def test_stream_basic_accessors():
    s = _small_stream()
    assert len(s) == 4
    assert s.t_start == 0.0 and s.t_end == 0.003
    assert s.duration == pytest.approx(0.003)
    assert s[1] == Event(0.001, 1, 0, -1)
    assert [e.polarity for e in s] == [1, -1, 1, -1]


def test_stream_rejects_decreasing_timestamps():
    with pytest.raises(ValueError, match="non-decreasing"):
        EventStream(2, 2, [0.0, -0.001], [0, 0], [0, 0], [1, 1])


def test_stream_rejects_out_of_bounds_coordinates():
    with pytest.raises(ValueError, match="outside sensor"):
        EventStream(2, 2, [0.0], [2], [0], [1])


def test_stream_rejects_bad_polarity():
    with pytest.raises(ValueError, match="polarity"):
        EventStream(2, 2, [0.0], [0], [0], [2])


def test_stream_rejects_zero_polarity():
    with pytest.raises(ValueError, match="polarity"):
        EventStream(2, 2, [0.0], [0], [0], [0])


def test_stream_ragged_columns_rejected():
    with pytest.raises(ValueError, match="equal length"):
        EventStream(2, 2, [0.0, 1.0], [0], [0], [1])


def test_stream_arrays_are_read_only():
    s = _small_stream()
    with pytest.raises(ValueError):
        s.t[0] = 99.0
    with pytest.raises(ValueError):
        s.p[0] = -1


def test_from_arrays_stable_sort_keeps_tie_order():
    s = EventStream.from_arrays(4, 4,
                                t=[0.002, 0.001, 0.001],
                                x=[3, 1, 2], y=[0, 0, 0],
                                p=[1, 1, -1], sort=True)
    assert list(s.t) == [0.001, 0.001, 0.002]
    # the two tied events keep their original relative order
    assert list(s.x) == [1, 2, 3]
    assert list(s.p) == [1, -1, 1]


def test_stream_equality():
    assert _small_stream() == _small_stream()
    other = EventStream(4, 4, [0.0], [0], [0], [1])
    assert _small_stream() != other


def test_empty_stream_has_no_time_support():
    s = EventStream(2, 2, [], [], [], [])
    assert len(s) == 0
    with pytest.raises(ValueError):
        s.t_start


# ------------------------------------------------------ EnfTrace / Polarity

def test_trace_times_and_end():
    tr = EnfTrace(2.0, 0.5, [50.0, 50.1, 49.9])
    assert np.allclose(tr.times, [2.0, 2.5, 3.0])
    assert tr.t_end == 3.0
    assert len(tr) == 3


def test_trace_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        EnfTrace(0.0, 0.0, [50.0])


def test_trace_rejects_nonfinite_values():
    with pytest.raises(ValueError, match="finite"):
        EnfTrace(0.0, 1.0, [50.0, np.nan])


def test_trace_rejects_empty_values():
    with pytest.raises(ValueError):
        EnfTrace(0.0, 1.0, [])


def test_polarity_sequence_bounds_and_rate():
    seq = PolaritySequence(0.0, 0.001, [1, 0, -1])
    assert seq.sample_rate == pytest.approx(1000.0)
    with pytest.raises(ValueError):
        PolaritySequence(0.0, 0.001, [2, 0])


# ------------------------------------------------------------- align_traces

def test_align_identical_grids_is_identity():
    a = EnfTrace(0.0, 1.0, [50.0, 50.0, 50.0])
    b = EnfTrace(0.0, 1.0, [50.0, 50.0, 50.0])
    ra, rb = align_traces(a, b)
    assert ra is a and rb is b


def test_align_resamples_to_coarser_grid():
    # linear series so interpolation at grid points is exact
    ta = np.arange(11.0)                          # step 1 over [0, 10]
    a = EnfTrace(0.0, 1.0, 50.0 + 0.1 * ta)
    tb = 2.0 + 0.5 * np.arange(13.0)              # step 0.5 over [2, 8]
    b = EnfTrace(2.0, 0.5, 50.0 + 0.2 * tb)
    ra, rb = align_traces(a, b)
    assert ra.t0 == 2.0 and ra.step == 1.0 and len(ra) == 7
    assert rb.t0 == 2.0 and rb.step == 1.0 and len(rb) == 7
    shared = 2.0 + np.arange(7.0)
    assert np.allclose(ra.values, 50.0 + 0.1 * shared)
    assert np.allclose(rb.values, 50.0 + 0.2 * shared)


def test_align_disjoint_supports_raise():
    a = EnfTrace(0.0, 1.0, np.full(6, 50.0))
    b = EnfTrace(10.0, 1.0, np.full(6, 50.0))
    with pytest.raises(ValueError, match="disjoint traces"):
        align_traces(a, b)


def test_align_is_idempotent():
    a = EnfTrace(0.0, 1.0, [50.0, 50.2, 49.8, 50.1])
    b = EnfTrace(0.5, 0.25, 50.0 + 0.01 * np.arange(12))
    ra, rb = align_traces(a, b)
    ra2, rb2 = align_traces(ra, rb)
    assert ra2 is ra and rb2 is rb


# ------------------------------------------------------------------ metrics

def test_cc_self_correlation_is_one():
    a = EnfTrace(0.0, 1.0, [50.00, 50.01, 49.99])
    assert pearson_cc(a, a) == pytest.approx(1.0)


def test_cc_exact_negation_is_minus_one():
    a = EnfTrace(0.0, 1.0, [1.0, 2.0, 3.0])
    b = EnfTrace(0.0, 1.0, [3.0, 2.0, 1.0])
    assert pearson_cc(a, b) == pytest.approx(-1.0)


def test_cc_hand_computed_value():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    b = np.array([1.0, 2.0, 3.0, 5.0])
    assert pearson_cc(a, b) == pytest.approx(0.9827, abs=1e-4)


def test_cc_constant_input_raises():
    a = EnfTrace(0.0, 1.0, [50.0, 50.0, 50.0])
    b = EnfTrace(0.0, 1.0, [50.0, 50.1, 50.2])
    with pytest.raises(ValueError, match="zero variance"):
        pearson_cc(a, b)


def test_cc_requires_alignment():
    a = EnfTrace(0.0, 1.0, [50.0, 50.1, 50.2])
    b = EnfTrace(0.5, 1.0, [50.0, 50.1, 50.2])
    with pytest.raises(ValueError, match="not aligned"):
        pearson_cc(a, b)
    with pytest.raises(TypeError):
        pearson_cc(a, np.array([50.0, 50.1, 50.2]))


def test_mae_identical_traces_is_zero():
    a = EnfTrace(0.0, 1.0, [50.0, 50.1])
    assert mae(a, a) == 0.0


def test_mae_hand_computed_value():
    a = EnfTrace(0.0, 1.0, [50.00, 50.02])
    b = EnfTrace(0.0, 1.0, [50.01, 50.00])
    assert mae(a, b) == pytest.approx(0.015)


def test_mae_length_mismatch_raises():
    a = EnfTrace(0.0, 1.0, [50.0, 50.1])
    b = EnfTrace(0.0, 1.0, [50.0, 50.1, 50.2])
    with pytest.raises(ValueError, match="length mismatch"):
        mae(a, b)


clean_values = st.lists(
    st.integers(min_value=-1000, max_value=1000),
    min_size=2, max_size=40,
).filter(lambda v: len(set(v)) > 1)


@given(values=clean_values,
       alpha=st.sampled_from([0.25, 0.5, 2.0, 3.0, 7.5]),
       beta=st.integers(min_value=-50, max_value=50))
def test_cc_affine_invariance(values, alpha, beta):
    a = np.array(values, dtype=np.float64)
    rng = np.random.default_rng(len(values))
    b = a + rng.standard_normal(len(a))
    if np.ptp(b) == 0.0:
        b = b + np.arange(len(b))
    base = pearson_cc(a, b)
    scaled = pearson_cc(alpha * a + beta, b)
    assert abs(base - scaled) < 1e-12


@given(values=st.lists(st.floats(min_value=-100, max_value=100,
                                 allow_nan=False), min_size=1, max_size=30),
       other=st.lists(st.floats(min_value=-100, max_value=100,
                                allow_nan=False), min_size=1, max_size=30))
def test_mae_symmetry_and_identity(values, other):
    n = min(len(values), len(other))
    a = np.array(values[:n])
    b = np.array(other[:n])
    assert mae(a, b) == mae(b, a)
    assert mae(a, a) == 0.0


@settings(max_examples=30)
@given(t0=st.floats(min_value=-5, max_value=5),
       step=st.sampled_from([0.25, 0.5, 1.0]),
       n=st.integers(min_value=4, max_value=24))
def test_align_idempotence_property(t0, step, n):
    rng = np.random.default_rng(n)
    a = EnfTrace(t0, step, 50.0 + rng.standard_normal(n))
    b = EnfTrace(t0 + step, 2.0 * step, 50.0 + rng.standard_normal(max(2, n // 2)))
    try:
        ra, rb = align_traces(a, b)
    except ValueError:
        return
    ra2, rb2 = align_traces(ra, rb)
    assert ra2 is ra and rb2 is rb
