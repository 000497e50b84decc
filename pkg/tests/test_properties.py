import math

import pytest

from critreg import mobius as mb
from critreg.asymptotics import class_membership
from critreg.errors import DenominatorVanishes, PreconditionViolation
from critreg.nevanlinna_core import (
    MobiusOf, PowerLaw, SpectralMeasure, StieltjesForm, Sum, classify, linear,
)
from critreg.properties import (
    Property, Verdict, b_certify_discretized, b_certify_schur, consistent, d_certify,
    d_certify_single, d_ratio, derive_properties, rank_one_norm,
)

SQRT = PowerLaw(-1.0, 0.5)
INV_SQRT = PowerLaw(1.0, -0.5)
QUARTER = PowerLaw(-math.sqrt(2), 0.25)
SINGULAR = Sum(INV_SQRT, PowerLaw(1.0, -1.0))


def test_d_mirror_sqrt():
    c = d_certify(SQRT, SQRT, "AT_INF")
    assert c.verdict is Verdict.BOUNDED
    assert c.sup_value == pytest.approx(1.0, abs=1e-12) and c.constants["C1"] == c.sup_value
    assert c.cert_id == "D_INF[pair]/GRID_RATIO"


def test_d_singular_example():
    c = d_certify(SINGULAR, SINGULAR, "AT_ZERO")
    assert c.verdict is Verdict.DIVERGENT and c.tail_slope == pytest.approx(-0.5, abs=0.02)
    num, den = d_ratio(SINGULAR, SINGULAR, [0.01])
    assert num[0] == pytest.approx(214.14, abs=0.01) and den[0] == pytest.approx(14.142, abs=1e-3)
    assert num[0] / den[0] == pytest.approx(15.14, abs=0.01)


def test_d_empty_resolvent_pair():
    with pytest.raises(DenominatorVanishes):
        d_certify(linear(), linear(), "AT_INF")


@pytest.mark.parametrize("mp,mm,regime", [(SQRT, QUARTER, "AT_INF"), (SINGULAR, SINGULAR, "AT_ZERO"),
                                          (INV_SQRT, QUARTER, "AT_ZERO"), (SINGULAR, INV_SQRT, "AT_INF")])
def test_d_conjugate_sampling_invariant(mp, mm, regime):
    a = d_certify(mp, mm, regime)
    b = d_certify(mp, mm, regime, conjugate=True)
    assert a.verdict is b.verdict and a.sup_value == pytest.approx(b.sup_value, rel=1e-12)


def test_d_single_subject():
    c = d_certify_single(INV_SQRT, "AT_INF", subject="m_plus")
    assert c.bounded and c.subject == "m_plus"


def test_schur_examples():
    assert b_certify_schur(INV_SQRT, "AT_INF", beta=0.25).verdict is Verdict.BOUNDED
    c = b_certify_schur(INV_SQRT, "AT_ZERO")
    assert c.verdict is Verdict.BOUNDED and c.constants["C2"] > 0
    with pytest.raises(PreconditionViolation):
        b_certify_schur(INV_SQRT, "AT_INF", beta=0.9)


def test_discretized_examples():
    assert b_certify_discretized(INV_SQRT, "AT_INF", N=256).verdict is Verdict.BOUNDED
    assert consistent(b_certify_schur(SINGULAR, "AT_ZERO"), b_certify_discretized(SINGULAR, "AT_ZERO"))


def test_discretized_rank_one():
    sigma = SpectralMeasure(((1.0, 1.0),), ())
    m = StieltjesForm(0.0, sigma)
    c = b_certify_discretized(m, "AT_INF", sigma=sigma)
    exact = rank_one_norm(m, 1.0, 1.0, 1e8)
    assert c.evidence["norm_1e+08"] == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("m", [INV_SQRT, SQRT, SINGULAR, QUARTER])
@pytest.mark.parametrize("regime", ["AT_INF", "AT_ZERO"])
def test_b_methods_and_mobius_invariance(m, regime):
    base = [b_certify_schur(m, regime), b_certify_discretized(m, regime)]
    assert consistent(*base)
    moved = MobiusOf(mb.IDENTITY, mb.normalize(2, 1, 1, 1), m)
    other = [b_certify_schur(moved, regime), b_certify_discretized(moved, regime)]
    decided = [c.verdict for c in base + other if c.verdict is not Verdict.INCONCLUSIVE]
    assert len(set(decided)) <= 1


def _inputs(mp, mm):
    reps = {"m_plus": classify(mp), "m_minus": classify(mm)}
    fits = {k: class_membership(f, reps[k]) for k, f in (("m_plus", mp), ("m_minus", mm))}
    return reps, fits


def test_derive_inverse_sqrt_pair():
    reps, fits = _inputs(INV_SQRT, INV_SQRT)
    got = {(c.property, c.subject) for c in derive_properties(INV_SQRT, INV_SQRT, reps, fits)}
    for side in ("m_plus", "m_minus"):
        assert (Property.B_INF, side) in got and (Property.B_ZERO, side) in got
    assert (Property.D_INF, "pair") in got and (Property.D_ZERO, "pair") in got


def test_derive_partial_information():
    reps, fits = _inputs(INV_SQRT, INV_SQRT)
    certs = derive_properties(INV_SQRT, None, {"m_plus": reps["m_plus"]}, {"m_plus": fits["m_plus"]})
    assert {(c.property, c.subject) for c in certs} == {(Property.B_INF, "m_plus"), (Property.B_ZERO, "m_plus")}


def test_derive_coupling_example():
    reps, fits = _inputs(SQRT, QUARTER)
    certs = derive_properties(SQRT, QUARTER, reps, fits)
    assert len(certs) == 6 and all(c.bounded and c.method.startswith("IMPLIED_BY(") for c in certs)
    pair_inf = next(c for c in certs if c.property is Property.D_INF)
    grid = d_certify(SQRT, QUARTER, "AT_INF")
    assert pair_inf.constants["predicted_limit"] == pytest.approx(grid.evidence["endpoint_value"], rel=0.02)


def test_derive_stieltjes_transfer():
    reps, fits = _inputs(INV_SQRT, INV_SQRT)
    single = {("m_plus", Property.D_INF): d_certify_single(INV_SQRT, "AT_INF", subject="m_plus")}
    certs = derive_properties(INV_SQRT, INV_SQRT, reps, {}, single)
    methods = {c.method for c in certs}
    assert "IMPLIED_BY(STIELTJES_D_GIVES_B)" in methods and "IMPLIED_BY(STIELTJES_D_TRANSFER)" in methods


def test_implied_agrees_with_direct():
    for m in (INV_SQRT, SQRT, QUARTER):
        reps, fits = _inputs(m, m)
        for c in derive_properties(m, None, {"m_plus": reps["m_plus"]}, {"m_plus": fits["m_plus"]}):
            regime = "AT_INF" if c.property is Property.B_INF else "AT_ZERO"
            assert consistent(c, b_certify_schur(m, regime))
            assert consistent(c, b_certify_discretized(m, regime))
