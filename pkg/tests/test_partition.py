import csv
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intermap_lab import Branch, MapSpec, evaluate, invert_branch
from intermap_lab.errors import CapExceeded, DepthError, DomainError
from intermap_lab.partition import (build_partition, cylinder, distortion_scan, induced_map,
                                    inducing_set, first_return, kac_sum, pair_log_ratio,
                                    scaling_constants, tail_measure, variation_check)

CIRCLE2 = MapSpec.circle(2.0)
HEMMER = MapSpec.hemmer()


@pytest.fixture(scope="module")
def t2():
    return build_partition(CIRCLE2, 2000)


@pytest.fixture(scope="module")
def th():
    return build_partition(HEMMER, 2000)


def test_circle_endpoints_exact():
    # a_{n+1} = ((1 + a_n) / 2)^2 in exact rationals
    t = build_partition(CIRCLE2, 2)
    a = [Fraction(1, 4)]
    for _ in range(2):
        a.append(((1 + a[-1]) / 2) ** 2)
    assert a[1] == Fraction(25, 64) and a[2] == Fraction(7921, 16384)
    assert np.allclose(t.a_plus[:3], [float(v) for v in a], rtol=0, atol=1e-16)
    assert t.b_plus[1] == pytest.approx(9 / 64, abs=1e-15)


def test_hemmer_endpoints():
    t = build_partition(HEMMER, 1)
    assert t.a_minus[0] == pytest.approx(-0.25)
    assert t.a_minus[1] == pytest.approx(-25 / 64)


@pytest.mark.parametrize("g", [1.4, 2.0, 3.5])
def test_circle_table_invariants(g):
    t = build_partition(MapSpec.circle(g), 500)
    assert t.a_plus[0] == pytest.approx(1 / (2 * g))
    assert np.all(np.diff(t.a_plus) > 0) and t.a_plus[-1] < 1
    assert np.array_equal(t.a_minus, -t.a_plus)
    assert np.all(np.diff(t.b_plus[1:]) < 0) and np.all(t.b_plus[1:] > 0)
    assert np.all(t.l[1:] > 0)
    lhs = t.a_plus[1:]
    rhs = t.a_plus[:-1] + (1 - t.a_plus[:-1]) ** g / (2 * g)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-15)


@pytest.mark.parametrize("k, g", [(0.5, 2.0), (0.7, 2.0), (0.3, 2.5)])
def test_interval_table_invariants(k, g):
    spec = MapSpec.interval(k, g)
    t = build_partition(spec, 300)
    assert t.a_plus[0] == pytest.approx((1 / spec.params.b) ** (1 / k))
    assert np.all(np.diff(t.a_minus) < 0) and t.a_minus[-1] > -1
    assert np.all(np.diff(t.b_plus[1:]) < 0)
    # S b_p = a_{p-1} and a_{-(p+1)} is the left preimage of a_{-p}
    for p in (1, 2, 5, 50):
        assert evaluate(spec, t.b_plus[p]) == pytest.approx(t.a_plus[p - 1], abs=1e-12)
        assert evaluate(spec, t.a_minus[p]) == pytest.approx(t.a_minus[p - 1], abs=1e-12)


def test_recursion_matches_inverse_branch():
    # a_{n+1} is the right-branch preimage of a_n
    t = build_partition(CIRCLE2, 1000)
    a = [0.25]
    for _ in range(1000):
        a.append(float(invert_branch(CIRCLE2, Branch.RIGHT, a[-1])))
    assert np.allclose(t.a_plus, a, rtol=0, atol=1e-12)


def test_depth_error():
    # for gamma = 1.5 the spacing of a_n drops below one ulp of 1 before n = 10^6
    with pytest.raises(DepthError, match="max achievable N"):
        build_partition(MapSpec.circle(1.5), 10**6)


def test_scaling_constants_circle():
    sc = scaling_constants(build_partition(CIRCLE2, 10**5))
    assert 3.92 <= sc["one_minus_a"]["value"] <= 4.08
    assert 3.8 <= sc["l"]["value"] <= 4.2
    assert sc["one_minus_a"]["reference"] == pytest.approx(4.0)


def test_scaling_constants_hemmer():
    sc = scaling_constants(build_partition(HEMMER, 10**4))
    assert sc["b"]["value"] == pytest.approx(4.0, rel=0.05)


# -------------------------------------------------------------- cylinders

def test_cylinder_definitions(t2):
    z1 = cylinder(t2, 0, 1)
    assert (z1.lo, z1.hi) == (t2.b_plus[1], t2.a_plus[0])
    z = cylinder(t2, 2, 3)
    assert (z.lo, z.hi) == (t2.b_plus[5], t2.b_plus[4])
    zm = cylinder(t2, 2, 3, "minus")
    assert (zm.lo, zm.hi) == (-t2.b_plus[4], -t2.b_plus[5])


def test_first_return_examples():
    p, y = first_return(CIRCLE2, 0, 0.2)
    assert p == 1 and y == pytest.approx(2 * np.sqrt(0.2) - 1)
    p, y = first_return(CIRCLE2, 0, 0.12)
    assert p == 2 and y == pytest.approx(-0.108476, abs=1e-6)
    assert first_return(CIRCLE2, 0, 0.25 - 1e-12)[0] == 1


def test_first_return_errors(t2):
    with pytest.raises(DomainError):
        first_return(CIRCLE2, 0, 0.3)
    with pytest.raises(CapExceeded) as exc:
        first_return(CIRCLE2, 0, float(t2.b_plus[1500]) * 0.999, t2, cap=50)
    assert exc.value.partial_orbit is not None


@pytest.mark.parametrize("spec", [CIRCLE2, MapSpec.circle(3.0), HEMMER, MapSpec.interval(0.7, 2.0)])
def test_markov_property_sampled(spec):
    t = build_partition(spec, 80)
    rng = np.random.default_rng(0)
    for m in (0, 2):
        for p in (1, 2, 7, 30):
            for side in ("plus", "minus"):
                z = cylinder(t, m, p, side)
                xs = z.lo + (z.hi - z.lo) * rng.uniform(0.01, 0.99, 20)
                for x in xs:
                    assert first_return(spec, m, float(x), t)[0] == p


def test_circle_image_of_cylinder(t2):
    # T^p maps Z+_{m,p>1} into (a_{-m}, a_{-(m-1)})
    m, p = 2, 5
    z = cylinder(t2, m, p)
    xs = np.linspace(z.lo, z.hi, 50)[1:-1]
    for x in xs:
        _, y = first_return(CIRCLE2, m, float(x), t2)
        assert t2.a_minus[m] < y < t2.a_minus[m - 1]


def test_induced_cover(t2):
    im = induced_map(t2, 1, 200)
    lo, hi = inducing_set(t2, 1)
    total = sum(c.length for c in im.cylinders)
    assert total + im.tail_length == pytest.approx(hi - lo, rel=1e-12)


def test_induced_expansion():
    t = build_partition(CIRCLE2, 40)
    rng = np.random.default_rng(1)
    from intermap_lab.partition import induced_derivatives
    beta = np.inf
    for p in range(1, 31):
        z = cylinder(t, 0, p)
        for x in z.lo + (z.hi - z.lo) * rng.uniform(0, 1, 10):
            beta = min(beta, abs(induced_derivatives(CIRCLE2, float(x), p)[1]))
    assert beta > 1.0


# ---------------------------------------------------------- tail measures

def test_tail_measure_examples(t2):
    assert tail_measure(t2, 0, 1) == pytest.approx(9 / 32)
    big = build_partition(CIRCLE2, 10**4)
    n = 10**4
    assert n**2 * tail_measure(big, 0, n) == pytest.approx(8.0, rel=0.02)
    hb = build_partition(HEMMER, 10**4)
    assert n**2 * tail_measure(hb, 0, n) == pytest.approx(8.0, rel=0.05)


def test_tail_measure_depth(t2):
    with pytest.raises(DepthError):
        tail_measure(t2, 5, 1999)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 1500))
def test_tail_identity(n):
    t = build_partition(CIRCLE2, 2000)
    lengths = sum(cylinder(t, 0, p).length * 2 for p in range(n + 1, 2000 + 1 - 0))
    rest = 2 * t.b_plus[2000]
    assert tail_measure(t, 0, n) == pytest.approx(lengths + rest, abs=1e-12)


@pytest.mark.parametrize("spec, depth", [(CIRCLE2, 10**5), (MapSpec.circle(3.0), 10**4), (HEMMER, 10**4)])
def test_kac_length(spec, depth):
    assert kac_sum(build_partition(spec, depth), 0)["total"] == pytest.approx(2.0, rel=0.01)


def test_table_csv(tmp_path, t2):
    p = tmp_path / "t.csv"
    t2.to_csv(p)
    with open(p) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "a_n", "a_minus_n", "b_n", "b_minus_n", "l_n"]
    assert len(rows) == t2.N + 2


# -------------------------------------------------------------- distortion

def test_identity_pair_excluded():
    dl, dt = pair_log_ratio(CIRCLE2, [0.2], [0.2], 1)
    assert dl[0] == 0 and dt[0] == 0


def test_cross_side_pair_ratio_one():
    dl, _ = pair_log_ratio(CIRCLE2, [0.2, 0.17], [-0.2, -0.17], 1)
    assert np.allclose(dl, 0.0, atol=1e-14)


def test_distortion_scan_bounded():
    scan = distortion_scan(CIRCLE2, 0, 20, 40, seed=0)
    assert np.isfinite(scan.K_hat) and scan.K_hat > 0
    assert np.all(np.diff(scan.K_by_p) >= 0)
    assert scan.pairs == 20 * 40 + 20 * 6


def test_variation_check():
    v1 = variation_check(CIRCLE2, 0, 1)
    assert np.isfinite(v1.total) and v1.total > 0
    v = variation_check(CIRCLE2, 0, 100)
    assert v.increments[99] <= 1e-2 * v.increments[9]


def test_variation_hemmer_decay():
    # increments track the cylinder lengths (bounded distortion), so they are summable
    v = variation_check(HEMMER, 0, 50)
    t = build_partition(HEMMER, 60)
    lengths = np.array([cylinder(t, 0, p).length for p in range(1, 51)])
    ratio = v.increments / lengths
    assert ratio.max() / ratio.min() < 2.0
    assert abs(ratio[-1] - ratio[-2]) < 0.01 * ratio[-1]
