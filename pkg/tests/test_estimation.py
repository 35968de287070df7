"""
Tests for the θ/b estimator and abundance file reading.
"""

import math

import numpy as np
import pytest

from app.errors import MalformedInputError
from app.reader import read_abundances
from app.rng import stream
from app.services.estimation import (
    abundances_to_fractions,
    estimate_alpha,
    estimate_alpha_from_sticks,
    sticks_from_fractions,
)


def test_estimate_from_known_sticks():
    sticks = [0.5, 0.25, 0.1]
    fractions = [0.5, 0.5 * 0.25, 0.5 * 0.75 * 0.1]
    estimate = estimate_alpha(fractions)
    expected = -3 / sum(math.log1p(-b) for b in sticks)
    assert estimate.alpha_hat == pytest.approx(expected, rel=1e-12)
    assert estimate.sticks == 3
    assert estimate.ci_low < estimate.alpha_hat < estimate.ci_high


def test_last_family_taking_the_rest_is_dropped():
    estimate = estimate_alpha([0.5, 0.5])
    assert estimate.sticks == 1
    assert estimate.alpha_hat == pytest.approx(1.0 / math.log(2.0))


def test_single_family_carries_no_information():
    with pytest.raises(MalformedInputError):
        estimate_alpha([1.0])


@pytest.mark.parametrize("fractions", [[], [0.5, -0.1], [0.6, 0.6]])
def test_bad_fractions(fractions):
    with pytest.raises(MalformedInputError):
        estimate_alpha(fractions)


def test_late_sticks_keep_precision():
    fractions = [0.5**i for i in range(1, 201)]
    sticks = sticks_from_fractions(fractions)
    assert sticks.size == 199
    assert sticks == pytest.approx(np.full(199, 0.5), rel=1e-12)


def test_estimate_recovers_alpha():
    sticks = stream(1).beta(1.0, 2.0, 10_000)
    estimate = estimate_alpha_from_sticks(sticks)
    assert estimate.alpha_hat == pytest.approx(2.0, abs=0.1)


def test_abundances_to_fractions():
    fractions = abundances_to_fractions([(2.0, 1), (0.5, 3), (1.0, 0)])
    assert list(fractions) == [0.75, 0.25]
    with pytest.raises(MalformedInputError):
        abundances_to_fractions([(0.0, 0)])


def test_read_simulate_csv_first_replicate():
    text = (
        "replicate,model,t,type_label,immigration_time,abundance,total\n"
        "0,I,5,1,0.25,4,6\n"
        "0,I,5,2,1.5,2,6\n"
        "1,I,5,1,0.75,9,9\n"
    )
    assert read_abundances("run.csv", text.encode()) == [(0.25, 4), (1.5, 2)]


def test_read_plain_text():
    assert read_abundances("a.txt", b"# sizes\n5\n3\n") == [(0.0, 5), (1.0, 3)]
    assert read_abundances("b.txt", b"0.1 7\n0.4 2\n") == [(0.1, 7), (0.4, 2)]


def test_read_errors():
    with pytest.raises(MalformedInputError):
        read_abundances("empty.txt", b"  \n")
    with pytest.raises(MalformedInputError):
        read_abundances("bad.txt", b"1 two\n")
    with pytest.raises(MalformedInputError):
        read_abundances("bin.dat", b"\xff\xfe")
