import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import frozen
from collapse_lab.estimators import LaneEmdenProfile, SelfSimilarCollapse
from collapse_lab.validation import InvalidParameter


def test_clone_and_params():
    est = SelfSimilarCollapse(gamma=1.2, order=30)
    c = clone(est)
    assert c.get_params() == est.get_params()
    assert c.set_params(order=20).order == 20


def test_unfitted_predict_raises():
    with pytest.raises(NotFittedError):
        LaneEmdenProfile().predict([0.5])


def test_lane_emden_estimator():
    est = LaneEmdenProfile()
    assert est.fit() is est
    assert est.w0_ == pytest.approx(frozen.LANE_EMDEN_W0, rel=1e-11)
    w = est.predict([0.0, 1.0])
    assert w.shape == (2,) and w[0] == pytest.approx(est.w0_) and abs(w[1]) < 1e-9


def test_selfsim_estimator(lp_profile):
    est = SelfSimilarCollapse().fit()
    assert est.y_star_ == pytest.approx(frozen.LP_SONIC_POINT_PIPELINE, abs=1e-9)
    out = est.predict(np.array([0.5, 1.0, est.y_star_]))
    assert out.shape == (3, 2) and np.all(out[:, 0] > 0)


@pytest.mark.parametrize("kw", [dict(gamma=1.4), dict(window=(3, 2)), dict(tol=-1.0)])
def test_invalid_parameters(kw):
    with pytest.raises(InvalidParameter):
        SelfSimilarCollapse(**kw).fit()
