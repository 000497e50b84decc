import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critreg.asymptotics import class_membership
from critreg.coupling import (
    BoundaryMatrixPair, CouplingModel, KernelCondition, RouteResult, NonnegativityResult,
    canonical_pair, classify_boundary, denominator, indicator, nonnegativity, probe_grid,
    probe_resolvent_set, resolvent_identity_residual, resolvent_solve, tabulated_source, verdict,
    veselic_bound,
)
from critreg.errors import MissingConstant, NonSelfAdjoint, NotNonnegative, RankDeficient
from critreg.nevanlinna_core import AffinePlusPower, PowerLaw, Sum, classify, linear
from critreg.properties import (
    Property, PropertyCertificate, Verdict, b_certify_discretized, b_certify_schur, d_certify,
    derive_properties,
)
from critreg.sl_weyl import Side, TripleStyle, free_problem
from critreg.tri import Tri

SQRT = PowerLaw(-1.0, 0.5)
INV_SQRT = PowerLaw(1.0, -0.5)
QUARTER = PowerLaw(-math.sqrt(2), 0.25)
SINGULAR = Sum(INV_SQRT, PowerLaw(1.0, -1.0))


def free_model():
    return CouplingModel(SQRT, SQRT, KernelCondition.TRUE,
                         sl_problem_plus=free_problem(TripleStyle.DIRICHLET_STYLE, Side.PLUS),
                         sl_problem_minus=free_problem(TripleStyle.DIRICHLET_STYLE, Side.MINUS))


def test_denominator_examples():
    for y in (0.5, 4.0, 100.0):
        assert denominator(CouplingModel(SQRT, SQRT), 1j * y) == pytest.approx(-math.sqrt(2 * y))
    assert denominator(CouplingModel(linear(), linear()), 1j) == 0
    d = denominator(CouplingModel(INV_SQRT, QUARTER), 1j)
    assert d == pytest.approx(cmath.exp(1j * math.pi / 4) - math.sqrt(2) * cmath.exp(1j * math.pi / 8))
    with pytest.raises(ValueError):
        denominator(CouplingModel(SQRT, SQRT), 1.0)


def test_probe_grid_and_resolvent_set():
    g = probe_grid(10_000)
    assert g.size == 10_000 and np.all(g.imag != 0)
    assert probe_resolvent_set(CouplingModel(linear(), linear())).empty
    for mp, mm in [(SQRT, SQRT), (SQRT, QUARTER), (INV_SQRT, INV_SQRT), (SINGULAR, SINGULAR)]:
        model = CouplingModel(mp, mm)
        if nonnegativity(model).nonnegative:
            assert not probe_resolvent_set(model, probe_grid(10_000)).empty


def test_nonnegativity_examples():
    r = nonnegativity(CouplingModel(INV_SQRT, INV_SQRT))
    assert r.verdict is Tri.YES
    routes = {x.route: x for x in r.routes}
    assert routes["ZERO_FREE"].verdict is Tri.YES and routes["KREIN"].verdict is Tri.YES
    r = nonnegativity(CouplingModel(SQRT, QUARTER))
    assert r.verdict is Tri.YES and {x.route: x for x in r.routes}["FRIEDRICHS"].verdict is Tri.YES
    r = nonnegativity(CouplingModel(INV_SQRT, AffinePlusPower(-5.0, 1.0, -0.5)))
    assert r.verdict is Tri.NO
    zf = {x.route: x for x in r.routes}["ZERO_FREE"]
    assert zf.evidence["zero_at"] == pytest.approx(-4 / 25, rel=1e-8)


def test_resolvent_free_model():
    model = free_model()
    sol = resolvent_solve(model, 1j, indicator(0.0, 1.0))
    assert sol.ode_residual <= 1e-6 and sol.boundary_residual <= 1e-8
    assert sol.m_plus_numeric == pytest.approx(-cmath.sqrt(-1j), rel=1e-8)
    # the compression alone satisfies the same boundary condition
    single = resolvent_solve(CouplingModel(SQRT, SQRT, sl_problem_plus=model.sl_problem_plus), 1j, indicator(0.0, 1.0))
    assert single.boundary_residual <= 1e-8
    np.testing.assert_allclose(single.f_plus, sol.f_plus, atol=1e-8)
    assert resolvent_identity_residual(model, 1j, 2j, indicator(0.0, 1.0)) <= 1e-5


def test_resolvent_zero_source():
    sol = resolvent_solve(free_model(), 1j, None)
    assert np.max(np.abs(sol.f_plus)) == 0.0


def test_tabulated_source_matches_indicator():
    t = np.linspace(0.0, 1.0, 201)
    a = resolvent_solve(free_model(), 1j, tabulated_source(t, np.ones_like(t)))
    b = resolvent_solve(free_model(), 1j, indicator(0.0, 1.0))
    np.testing.assert_allclose(a.f_plus, b.f_plus, atol=1e-6)


def test_boundary_examples():
    c = classify_boundary(BoundaryMatrixPair(np.zeros((2, 2)), np.eye(2)))
    assert c.canonical_type == 1 and c.separated
    c = classify_boundary(canonical_pair(3, rho=1.0, theta=0.0, sigma=0.0))
    assert c.canonical_type == 3 and not c.separated
    c = classify_boundary(canonical_pair(4, omega=1.0))
    assert c.canonical_type == 4 and not c.separated
    assert classify_boundary(canonical_pair(4, alpha=1.0, beta=-2.0)).separated


def test_boundary_mirrored_type_two():
    c = classify_boundary(BoundaryMatrixPair([[0, 1], [0, 0]], [[0, 0.5], [1, 0]]))
    assert c.canonical_type == 2 and c.parameters == {"alpha": 0.5, "end": "second"}


def test_boundary_rejections():
    with pytest.raises(RankDeficient):
        BoundaryMatrixPair([[1, 0], [2, 0]], [[0, 0], [0, 0]])
    with pytest.raises(NonSelfAdjoint):
        BoundaryMatrixPair([[1, 0], [0, 1]], [[0, 1], [0, 0]])


kinds = st.sampled_from([
    (1, {}), (2, {"alpha": 0.3}), (2, {"alpha": -4.0}), (3, {"rho": 1.0}), (3, {"rho": 2.0, "theta": 0.7, "sigma": -1.3}),
    (4, {"omega": 1.0}), (4, {"alpha": 1.0, "beta": -2.0}), (4, {"alpha": 0.5, "beta": 0.1, "omega": 0.3 - 0.8j}),
])


@settings(max_examples=200, deadline=None)
@given(kinds, st.integers(0, 2**32 - 1))
def test_boundary_left_multiplication_invariance(kind, seed):
    k, params = kind
    base = canonical_pair(k, **params)
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    if abs(np.linalg.det(G)) < 1e-3:
        return
    a, b = classify_boundary(base), classify_boundary(BoundaryMatrixPair(G @ base.M, G @ base.N, tol=1e-9))
    assert a.canonical_type == b.canonical_type == k and a.separated == b.separated
    for key, v in a.parameters.items():
        if isinstance(v, str):
            assert b.parameters[key] == v
        else:
            np.testing.assert_allclose(b.parameters[key], v, atol=1e-7)


def _evidence(mp, mm):
    reps = {"m_plus": classify(mp), "m_minus": classify(mm)}
    mem = {s: class_membership(f, reps[s]) for s, f in (("m_plus", mp), ("m_minus", mm))}
    certs = derive_properties(mp, mm, reps, mem)
    for regime in ("AT_INF", "AT_ZERO"):
        certs.append(d_certify(mp, mm, regime))
        for side, f in (("m_plus", mp), ("m_minus", mm)):
            for c in (b_certify_schur(f, regime), b_certify_discretized(f, regime)):
                c.subject = side
                certs.append(c)
    stj = {s: reps[s].is_stieltjes for s in reps}
    return certs, mem, stj


def test_verdict_singular_example():
    model = CouplingModel(SINGULAR, SINGULAR, KernelCondition.TRUE)
    certs, mem, stj = _evidence(SINGULAR, SINGULAR)
    v = verdict(model, certs, memberships=mem, stieltjes=stj)
    assert v.zero_regular is Tri.NO and v.infinity_regular is Tri.YES and v.fundamentally_reducible is Tri.NO
    assert any(e["theorem"] == "D_NECESSARY" for e in v.justification)
    assert v.necessity_flags and v.necessity_flags[0]["point"] == "zero"


def test_verdict_coupling_example():
    model = CouplingModel(SQRT, QUARTER, KernelCondition.TRUE)
    certs, mem, stj = _evidence(SQRT, QUARTER)
    v = verdict(model, certs, memberships=mem, stieltjes=stj)
    assert v.fundamentally_reducible is Tri.YES
    assert v.justification[-1]["theorem"] == "ALL_ASYMPTOTIC"


def test_verdict_kernel_condition():
    certs, mem, stj = _evidence(INV_SQRT, INV_SQRT)
    v = verdict(CouplingModel(INV_SQRT, INV_SQRT, KernelCondition.UNKNOWN), certs, memberships=mem, stieltjes=stj)
    assert v.infinity_regular is Tri.YES and v.zero_regular is Tri.INCONCLUSIVE
    v = verdict(CouplingModel(INV_SQRT, INV_SQRT, KernelCondition.FALSE), certs, memberships=mem, stieltjes=stj)
    assert v.zero_regular is Tri.NO and v.fundamentally_reducible is Tri.NO


@pytest.mark.parametrize("mp,mm", [(SINGULAR, SINGULAR), (SQRT, QUARTER)])
def test_verdict_monotone_in_evidence(mp, mm):
    model = CouplingModel(mp, mm, KernelCondition.TRUE)
    certs, mem, stj = _evidence(mp, mm)
    nonneg = nonnegativity(model)
    full = verdict(model, certs, nonneg, mem, stj)
    rng = np.random.default_rng(7)
    for _ in range(200):
        keep = rng.random(len(certs)) < 0.5
        sub = [c for c, k in zip(certs, keep) if k]
        sub_mem = mem if rng.random() < 0.5 else {}
        part = verdict(model, sub, nonneg, sub_mem, stj)
        for attr in ("infinity_regular", "zero_regular", "fundamentally_reducible"):
            got = getattr(part, attr)
            assert got is Tri.INCONCLUSIVE or got is getattr(full, attr)


def test_verdict_refuses_without_nonnegativity():
    bad = NonnegativityResult(Tri.NO, [RouteResult("ZERO_FREE", True, Tri.NO)])
    with pytest.raises(NotNonnegative):
        verdict(CouplingModel(INV_SQRT, INV_SQRT), [], bad)
    with pytest.raises(NotNonnegative):
        verdict(CouplingModel(INV_SQRT, AffinePlusPower(-5.0, 1.0, -0.5)), [])


def _cert(prop, verdict_, **constants):
    return PropertyCertificate(prop, verdict_, "pair", "GRID_RATIO", constants=constants)


def test_veselic_bound():
    d = _cert(Property.D_INF, Verdict.BOUNDED, C1=1.0)
    b = _cert(Property.B_INF, Verdict.BOUNDED, C2=2.0)
    assert veselic_bound(d, b, _cert(Property.B_INF, Verdict.BOUNDED, C2=1.5)) == 8.0
    with pytest.raises(MissingConstant):
        veselic_bound(d, b, _cert(Property.B_INF, Verdict.INCONCLUSIVE))
    with pytest.raises(MissingConstant):
        veselic_bound(d, b, _cert(Property.B_INF, Verdict.BOUNDED))


def test_veselic_bound_from_certificates():
    d = d_certify(INV_SQRT, INV_SQRT, "AT_INF")
    b = b_certify_schur(INV_SQRT, "AT_INF")
    val = veselic_bound(d, b, b)
    assert math.isfinite(val) and val > 0


def test_model_round_trip():
    model = free_model()
    again = CouplingModel.from_dict(model.to_dict())
    assert again.kernel_condition is KernelCondition.TRUE
    assert denominator(again, 1 + 1j) == pytest.approx(denominator(model, 1 + 1j))
    assert again.sl_problem_minus.side is Side.MINUS
