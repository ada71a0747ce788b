import numpy as np
import pytest
import scipy.special

from eegtda.errors import NumericError
from eegtda.stats import betainc_reg, student_t_sf, student_t_two_tailed_p


def test_betainc_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = float(rng.uniform(0.1, 20.0))
        b = float(rng.uniform(0.1, 20.0))
        x = float(rng.uniform(0.0, 1.0))
        ref = float(scipy.special.betainc(a, b, x))
        assert abs(betainc_reg(a, b, x) - ref) < 1e-10


def test_betainc_endpoints():
    assert betainc_reg(2.0, 3.0, 0.0) == 0.0
    assert betainc_reg(2.0, 3.0, 1.0) == 1.0


def test_t_sf_symmetry_and_zero():
    assert student_t_sf(0.0, 7) == pytest.approx(0.5, abs=1e-12)
    for t in (0.3, 1.7, 4.0):
        assert student_t_sf(t, 5) + student_t_sf(-t, 5) == pytest.approx(
            1.0, abs=1e-12)


def test_t_pvalue_reference_case():
    # t = 4.2426, df = 4: two-tailed p ~= 0.0132
    t = 4.242640687119285
    p = student_t_two_tailed_p(t, 4)
    ref = 2 * float(scipy.special.stdtr(4, -abs(t)))
    assert p == pytest.approx(ref, abs=1e-10)
    assert p == pytest.approx(0.0132, abs=2e-4)


def test_t_pvalue_matches_scipy_battery():
    rng = np.random.default_rng(1)
    for _ in range(100):
        t = float(rng.uniform(-6, 6))
        df = int(rng.integers(1, 60))
        ref = 2 * float(scipy.special.stdtr(df, -abs(t)))
        assert student_t_two_tailed_p(t, df) == pytest.approx(ref, abs=1e-10)


def test_degenerate_inputs():
    with pytest.raises(NumericError):
        student_t_sf(1.0, 0)
    with pytest.raises(NumericError):
        betainc_reg(-1.0, 2.0, 0.5)
    # x is clamped to [0, 1] rather than rejected
    assert betainc_reg(1.0, 2.0, 1.5) == 1.0
    assert betainc_reg(1.0, 2.0, -0.5) == 0.0
