import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.special import erfc

from intermap_lab.errors import ParameterError
from intermap_lab.stable import StableLaw, stable_cdf


def test_gaussian_case():
    # X(2, c) is centred normal with variance 2c
    law = StableLaw(2.0, 0.5)
    x = np.linspace(-5, 5, 41)
    assert np.max(np.abs(law.cdf(x) - stats.norm.cdf(x))) <= 1e-6


def test_levy_closed_form():
    # p = 1/2, beta = 1, c = 1 is the Levy law with scale 1
    law = StableLaw(0.5, 1.0, 1.0)
    x = np.array([1e-3, 0.01, 0.1, 1.0, 10.0, 1e3, 1e6, 1e9])
    assert np.max(np.abs(law.cdf(x) - erfc(1 / np.sqrt(2 * x)))) <= 1e-6
    assert np.all(law.cdf(np.array([-1e3, -1.0, -1e-3])) <= 1e-6)


@pytest.mark.parametrize("p, c, beta", [(1.5, 0.7, 0.3), (1.2, 1.0, -0.8), (0.7, 0.4, 0.5)])
def test_matches_scipy_levy_stable_in_bulk(p, c, beta):
    ref = stats.levy_stable(p, beta, scale=c ** (1 / p))
    ref.dist.parameterization = "S1"
    x = np.linspace(-4, 4, 17) * c ** (1 / p)
    assert np.max(np.abs(StableLaw(p, c, beta).cdf(x) - ref.cdf(x))) <= 1e-5


@pytest.mark.parametrize("p, beta", [(1.5, 0.3), (0.8, -0.4)])
def test_tail_asymptotics(p, beta):
    law = StableLaw(p, 1.0, beta)
    c1, c2 = law.tail_constants
    t = 1e5
    assert (1 - law.cdf(t)) / (c1 * t ** -p) == pytest.approx(1.0, rel=1e-3)
    assert law.cdf(-t) / (c2 * t ** -p) == pytest.approx(1.0, rel=1e-3)


@given(st.floats(0.2, 1.95).filter(lambda p: abs(p - 1) > 0.05),
       st.floats(0.1, 3.0), st.floats(0.0, 3.0))
def test_from_tails_round_trip(p, c1, c2):
    law = StableLaw.from_tails(p, c1, c2)
    assert law.tail_constants == pytest.approx((c1, c2), rel=1e-10, abs=1e-12)


def test_charfn_definition():
    law = StableLaw(1.5, 0.7, 0.3)
    t = np.array([-2.0, 0.5, 3.0])
    expect = np.exp(-0.7 * np.abs(t) ** 1.5 * (1 - 1j * 0.3 * np.sign(t) * math.tan(0.75 * math.pi)))
    assert np.allclose(law.charfn(t), expect)
    assert law.charfn(0.0) == 1.0


@settings(max_examples=4, deadline=None)
@given(st.floats(0.3, 1.9).filter(lambda p: abs(p - 1) > 0.05), st.floats(-1, 1))
def test_cdf_monotone_table(p, beta):
    law = StableLaw(p, 1.0, beta)
    v = law.cdf(np.linspace(-20, 20, 200))
    assert np.all(np.diff(v) >= -1e-9)
    assert 0 <= v[0] <= v[-1] <= 1


def test_table_matches_direct():
    law = StableLaw(1.5, 0.7, 0.3)
    x = np.linspace(-6, 6, 101)
    direct = np.array([stable_cdf(law, float(v)) for v in x])
    assert np.max(np.abs(law.cdf(x) - direct)) <= 1e-5


@pytest.mark.parametrize("args", [(1.0, 1.0), (2.5, 1.0), (1.5, 0.0), (1.5, 1.0, 1.5)])
def test_invalid(args):
    with pytest.raises(ParameterError):
        StableLaw(*args)
