import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbarrier.barrier import chi, lv_box, nbmp_bounds
from nbarrier.errors import DimensionError, ValidationError
from nbarrier.model import LVSystem
from nbarrier.nonexistence import CERTIFIED, INCONCLUSIVE, check_nonexistence, sigma4_threshold


def with_sigma4(sys, s4):
    sigma = sys.sigma.copy()
    sigma[3] = s4
    return sys.replace(sigma=sigma)


def test_certified_example(lv4):
    cert = check_nonexistence(with_sigma4(lv4, 0.2))
    assert cert.verdict == CERTIFIED and cert.certified
    assert cert.sigma_tilde == pytest.approx((0.8, 0.8, 0.8))
    # reduced box: u_lower = 0.8 / 3 on every axis, alpha* = (1, 1, 1)
    assert cert.h2_lhs == pytest.approx(0.8 / 3)
    assert cert.h2_rhs == 0.2
    assert cert.alpha_star == (1.0, 1.0, 1.0)


def test_inconclusive_example(lv4):
    cert = check_nonexistence(with_sigma4(lv4, 0.3))
    assert cert.verdict == INCONCLUSIVE
    assert cert.h1_holds and not cert.h2_holds
    assert cert.h2_lhs == pytest.approx(0.7 / 3)


def test_h1_failure_skips_h2(lv4):
    cert = check_nonexistence(with_sigma4(lv4, 1.5))
    assert not cert.h1_holds
    assert cert.h2_lhs is None and not cert.h2_holds
    assert cert.verdict == INCONCLUSIVE
    assert set(cert.to_dict()) == {
        "verdict", "h1_holds", "sigma_tilde", "h2_holds", "h2_lhs", "h2_rhs", "alpha_star",
    }


def test_wrong_dimension(may_leonard):
    with pytest.raises(DimensionError):
        check_nonexistence(may_leonard)
    with pytest.raises(DimensionError):
        sigma4_threshold(may_leonard)


def test_bad_diffusion_range(lv4):
    with pytest.raises(ValidationError):
        check_nonexistence(lv4, diffusions="some")


def test_threshold_value(lv4):
    # certified iff (1 - s)/3 >= s, i.e. s <= 1/4
    assert sigma4_threshold(lv4) == pytest.approx(0.25, abs=1e-9)


def test_threshold_scales_with_sigma(lv4):
    doubled = lv4.replace(sigma=2 * lv4.sigma)
    assert sigma4_threshold(doubled) == pytest.approx(0.5, abs=1e-9)


def test_first3_ignores_fourth_diffusion(lv4):
    sys_ = with_sigma4(lv4.replace(d=[1, 1, 1, 10]), 0.2)
    assert check_nonexistence(sys_, "first3").certified
    assert not check_nonexistence(sys_, "all").certified
    assert check_nonexistence(sys_, "all").h2_lhs == pytest.approx(0.8 / 30)


def test_lhs_matches_reduced_nbmp(lv4):
    sys_ = with_sigma4(lv4.replace(d=[1, 2, 0.5, 4]), 0.1)
    cert = check_nonexistence(sys_, "first3")
    reduced = LVSystem(d=sys_.d[:3], sigma=cert.sigma_tilde, c=sys_.c[:3, :3])
    box = lv_box(reduced)
    b = nbmp_bounds(box, reduced.d, cert.alpha_star, 1)
    assert cert.h2_lhs == pytest.approx(b.lambda_lower, rel=1e-12)
    # over all four species the ratio min d / max d drops from 1/4 to 1/8
    full = check_nonexistence(sys_, "all")
    assert full.h2_lhs == pytest.approx(b.lambda_lower * 0.5, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_verdict_monotone_in_sigma4(seed):
    r = np.random.default_rng(seed)
    c = r.uniform(0.3, 3, (4, 4))
    sys_ = LVSystem(d=r.uniform(0.5, 2, 4), sigma=np.r_[r.uniform(0.5, 2, 3), 0.1], c=c)
    s_star = sigma4_threshold(sys_)
    hi = float(np.min(sys_.sigma[:3] * c[3, 3] / c[:3, 3]))
    for frac in np.linspace(0.02, 0.98, 15):
        s4 = frac * hi
        if abs(s4 - s_star) < 1e-8:
            continue
        assert check_nonexistence(with_sigma4(sys_, s4)).certified == (s4 < s_star)
