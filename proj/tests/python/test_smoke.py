import math

import pytest

import latentacc as la


def test_reference_coefficients():
    model, w, _ = la.reference_binomial()
    c = la.coefficients(model, w, 0.5)
    assert c["ml_type1"] == pytest.approx(8.45207042816571, rel=1e-12)
    assert c["ml_type1"] == c["ml_type2"] == c["ml_type3"]
    assert c["bayes_type1"] == pytest.approx(1.6526530525032967, rel=1e-12)
    assert c["bayes_type2p"] == pytest.approx(2.4672734411339383, rel=1e-12)
    assert sorted(c["eigenvalues"], reverse=True) == pytest.approx(
        [17.33145819616347, 1.572682660167948, 1.0], rel=1e-12
    )


def test_fisher_identities():
    model, w, _ = la.reference_binomial()
    f = la.fisher_set(model, w)
    for i in range(3):
        for j in range(3):
            assert f["j_xy"][i][j] == pytest.approx(f["i_x"][i][j], abs=1e-12)
            assert f["i_y_given_x"][i][j] == pytest.approx(f["i_xy"][i][j] - f["i_x"][i][j], abs=1e-12)
    assert f["i_xy"][0][0] == pytest.approx(4.0, rel=1e-14)


def test_evidence_paths_agree():
    model, _, prior = la.reference_binomial()
    xs = [0, 1, 3, 2, 3, 0, 1, 2]
    grid = la.log_evidence_marginal(model, xs, prior)
    exact = la.log_evidence_marginal_enumerated(model, xs, prior)
    assert exact == pytest.approx(-12.6901262095298, rel=1e-10)
    assert grid == pytest.approx(exact, rel=1e-4)
    ys = [2, 2, 1, 1, 1, 2, 2, 1]
    assert la.log_evidence_complete(model, la.Dataset(xs, ys), prior) == pytest.approx(-14.8679331754522, rel=1e-10)


def test_estimate_is_deterministic():
    model, w, prior = la.reference_binomial()
    ctx = la.StudyContext(model, w, prior, 24)
    ctx.threads = 1
    a = la.estimate(ctx, "type1", "ml", 100, 20, 7)
    ctx.threads = 2
    b = la.estimate(ctx, "type1", "ml", 100, 20, 7)
    assert a.values == b.values
    assert a.replications == 20
    assert math.isfinite(a.scaled_mean)
    t2 = la.estimate(ctx, "type2", "ml", 100, 20, 7)
    assert t2.values == a.values


def test_errors_are_typed():
    model, w, prior = la.reference_binomial()
    ctx = la.StudyContext(model, w, prior, 16)
    with pytest.raises(la.AlphaGridMismatch):
        la.estimate(ctx, "type2p", "bayes", 25, 4, 1, 0.5)
    with pytest.raises(la.DomainError):
        la.estimate(ctx, "type1", "ml", 50, 1, 1)
    with pytest.raises(la.Error):
        la.ParamVec(model, [0.5, 1.2, 0.3])
    assert la.judge(1.04, 0.0, 1.0) == "pass"


def test_identifiability_report():
    model = la.ModelSpec.binomial_mixture(3)
    r = la.validate_identifiability(model, la.ParamVec(model, [0.5, 0.4, 0.4]))
    assert not r.ok
    assert r.component_distance == 0.0
