import numpy as np
import pytest
from scipy import constants

from pairforge.nonlinear import bandwidth_from_nm, spdc_pair_probability


def test_zero_bandwidth():
    assert spdc_pair_probability(35.0, 0.2, 785.0, 0.0) == 0.0


def test_sweep_brackets_expectation():
    probs = [spdc_pair_probability(35.0, 0.2, 785.0, bandwidth_from_nm(d, 1570.0)) for d in np.linspace(5, 20, 16)]
    assert 1e-9 <= min(probs) and max(probs) <= 1e-8
    assert min(probs) <= 6e-9 <= max(probs)


def test_closed_form():
    # eta[1/W] = 0.35 * 0.2^2 ; E = hc/lambda ; dnu = c dlam / lam^2
    eta = 0.35 * 0.04
    E = constants.h * constants.c / 785e-9
    dnu = constants.c * 10e-9 / (1570e-9) ** 2
    assert spdc_pair_probability(35.0, 0.2, 785.0, dnu) == pytest.approx(eta * E * dnu, rel=1e-12)
    assert bandwidth_from_nm(10.0, 1570.0) == pytest.approx(dnu, rel=1e-12)


def test_linear_in_efficiency():
    a = spdc_pair_probability(10.0, 0.2, 785.0, 1e12)
    assert spdc_pair_probability(30.0, 0.2, 785.0, 1e12) == pytest.approx(3 * a)


def test_validation():
    with pytest.raises(ValueError):
        spdc_pair_probability(35.0, 0.2, 785.0, -1.0)
    with pytest.raises(ValueError):
        spdc_pair_probability(-1.0, 0.2, 785.0, 1.0)
