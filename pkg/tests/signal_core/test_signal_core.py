from __future__ import annotations

import math

import numpy as np
import pytest  # type: ignore[import-not-found]
from hypothesis import given  # type: ignore[import-not-found]
from hypothesis import strategies as st  # type: ignore[import-not-found]

from sddsim.signal_core.exceptions import SignalDomainException
from sddsim.signal_core.rng import RngStream
from sddsim.signal_core.schemas import ComplexSignal, Flagged
from sddsim.signal_core.service import (
    gaussian,
    memory_polynomial_features,
    power,
    rng_gaussian_pair,
    scale_to_power,
    sinr_db,
)

# ---- power -------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 7, 1000])
def test_power_of_unit_samples_is_one(n: int) -> None:
    assert power(ComplexSignal(np.ones(n))) == 1.0


def test_power_of_empty_signal_is_zero() -> None:
    assert power(ComplexSignal.zeros(0)) == 0.0


def test_power_is_mean_square() -> None:
    assert power(ComplexSignal(np.array([1 + 1j, 0]))) == pytest.approx(1.0)


def test_signal_rejects_non_finite_samples() -> None:
    with pytest.raises(SignalDomainException):
        ComplexSignal(np.array([1.0, np.nan]))


def test_signal_is_read_only() -> None:
    s = ComplexSignal(np.ones(3))
    with pytest.raises(ValueError):
        s.samples[0] = 2.0


def test_signal_sum_zero_pads_shorter_operand() -> None:
    s = ComplexSignal(np.ones(3)) + ComplexSignal(np.array([1.0]))
    np.testing.assert_array_equal(s.samples, [2, 1, 1])


# ---- sinr --------------------------------------------------------------------


def test_sinr_db_examples() -> None:
    assert sinr_db(1, 0, 1) == pytest.approx(0.0)
    assert sinr_db(1, 999.999, 0.001) == pytest.approx(-30.0)
    # 2 / (1 + 1)
    assert sinr_db(2, 1, 1) == pytest.approx(0.0)
    assert sinr_db(2, 0, 1) == pytest.approx(3.0103, abs=1e-4)


@pytest.mark.parametrize(
    "args", [(0.0, 1.0, 1.0), (1.0, 1.0, 0.0), (1.0, -1.0, 1.0)]
)
def test_sinr_db_rejects_out_of_domain(args: tuple[float, float, float]) -> None:
    with pytest.raises(SignalDomainException):
        sinr_db(*args)


# ---- scale_to_power ----------------------------------------------------------


def test_scale_to_power_doubles_unit_signal() -> None:
    s = ComplexSignal(np.array([1, -1j, (1 + 1j) / math.sqrt(2)]))
    out = scale_to_power(s, 4.0)
    np.testing.assert_allclose(out.samples, 2 * s.samples)


def test_scale_to_power_from_quarter_power() -> None:
    s = ComplexSignal(np.full(10, 0.5))
    out = scale_to_power(s, 1.0)
    np.testing.assert_allclose(out.samples, 2 * s.samples)
    assert power(out) == pytest.approx(1.0, abs=1e-12)


@given(
    st.lists(
        st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
        min_size=1,
        max_size=50,
    ).filter(lambda xs: sum(abs(x) ** 2 for x in xs) > 1e-6)
)
def test_scale_to_own_power_is_identity(xs: list[complex]) -> None:
    s = ComplexSignal(np.array(xs))
    out = scale_to_power(s, power(s))
    np.testing.assert_allclose(out.samples, s.samples, rtol=1e-9)


def test_scale_to_power_rejects_zero_signal() -> None:
    with pytest.raises(SignalDomainException):
        scale_to_power(ComplexSignal.zeros(4), 1.0)


# ---- rng ---------------------------------------------------------------------


def test_gaussian_pair_is_deterministic() -> None:
    assert rng_gaussian_pair(RngStream(1, 0)) == rng_gaussian_pair(RngStream(1, 0))


def test_gaussian_moments() -> None:
    z = gaussian(RngStream(1, 0), 100_000)
    assert abs(z.mean()) < 0.02
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.02)


def test_distinct_streams_differ() -> None:
    a = gaussian(RngStream(1, (0, 1)), 8)
    b = gaussian(RngStream(1, (0, 2)), 8)
    assert not np.allclose(a, b)


def test_derive_matches_tuple_stream() -> None:
    a = gaussian(RngStream.derive(3, 1, 2, 3), 4)
    b = gaussian(RngStream(3, (1, 2, 3)), 4)
    np.testing.assert_array_equal(a, b)


def test_longer_draw_extends_shorter_one() -> None:
    short = gaussian(RngStream(5, 9), 10)
    long = gaussian(RngStream(5, 9), 13)
    np.testing.assert_array_equal(long[:10], short)


def test_negative_seed_rejected() -> None:
    with pytest.raises(SignalDomainException):
        RngStream(-1)


# ---- features ----------------------------------------------------------------


def test_memory_polynomial_features_layout() -> None:
    x = np.array([1.0, 2.0, 3.0], dtype=np.complex128)
    f = memory_polynomial_features(x, (1, 3), 2)
    assert f.shape == (3, 4)
    np.testing.assert_allclose(f[:, 0], x)
    np.testing.assert_allclose(f[:, 1], [0, 1, 2])
    np.testing.assert_allclose(f[:, 2], x**3)
    np.testing.assert_allclose(f[:, 3], [0, 1, 8])


def test_flagged_is_float_convertible() -> None:
    assert float(Flagged(3.5, True)) == 3.5
