import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ncx2

from radargame.detection import detection_probability, marcum_q1
from radargame.model import ModelError


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 30.0), st.floats(0.01, 30.0))
def test_marcum_matches_noncentral_chi2(a, b):
    # Q_1(a, b) is the survival function of a 2-dof noncentral chi-square at b^2
    ref = ncx2.sf(b * b, 2, a * a) if a > 0 else math.exp(-b * b / 2)
    assert marcum_q1(a, b) == pytest.approx(ref, abs=1e-10, rel=1e-8)


@pytest.mark.parametrize("pfa", [1e-2, 1e-4, 1e-6])
def test_zero_sinr_gives_false_alarm_rate(pfa):
    assert abs(detection_probability(0.0, pfa) - pfa) <= 1e-12


def test_edge_values():
    assert marcum_q1(3.0, 0.0) == 1.0
    assert marcum_q1(50.0, 1.0) == 1.0
    assert marcum_q1(1.0, 60.0) == 0.0


def test_monotone_in_sinr():
    vals = [detection_probability(x, 1e-6) for x in np.linspace(0, 60, 61)]
    assert np.all(np.diff(vals) >= 0)
    assert vals[-1] > 0.999


def test_domain_errors():
    with pytest.raises(ModelError):
        detection_probability(1.0, 1.5)
    with pytest.raises(ModelError):
        detection_probability(-1.0, 0.1)
    with pytest.raises(ModelError):
        marcum_q1(-1.0, 1.0)
