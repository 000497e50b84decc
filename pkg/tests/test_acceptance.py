"""The twelve acceptance criteria at their stated tolerances.

Each test prints one PASS/FAIL line (visible with ``pytest -s``) before asserting.
"""
import cmath
import math

import numpy as np
import pytest

from critreg import mobius as mb
from critreg.asymptotics import Regime, d_limit_predict, fit_power_law, forward_residual
from critreg.cli import EXAMPLE_IDS, analyze_model, run_example
from critreg.coupling import (
    BoundaryMatrixPair, CouplingModel, KernelCondition, canonical_pair, classify_boundary,
    indicator, resolvent_identity_residual, resolvent_solve,
)
from critreg.nevanlinna_core import (
    AffinePlusPower, DensitySegment, PowerLaw, SLWeyl, SpectralMeasure, StieltjesForm,
    Sum, classify, evaluate,
)
from critreg.properties import (
    Property, Verdict, b_certify_discretized, b_certify_schur, consistent, d_certify, d_grid,
    d_ratio, derive_properties,
)
from critreg.asymptotics import class_membership, tauberian_sigma_model
from critreg.rkhs import SamplePlan, gram, gram_min_eig_ratio, q_identity_residual, v_transform_check
from critreg.sl_weyl import (
    Side, TripleStyle, closed_form, ex53_constants, ex53_problem, free_problem, smooth_p_problem,
    weyl_function,
)

SQRT = PowerLaw(-1.0, 0.5)
INV_SQRT = PowerLaw(1.0, -0.5)
QUARTER = PowerLaw(-math.sqrt(2), 0.25)
SINGULAR = Sum(INV_SQRT, PowerLaw(1.0, -1.0))
CATALOG = [closed_form(i).closed_form for i in (
    "free-neumann", "free-dirichlet", "ex53-powerlaw(0,0)", "ex53-powerlaw(1,0)", "ex53-powerlaw(0,-1)",
    "ex53-powerlaw(2,0.5)", "kakost-singular", "fourth-order-quarter", "ex52-short-range(1,1)",
    "ex52-short-range(2,0.5)")]
SQRT_DENSITY = SpectralMeasure((), (DensitySegment(0.0, math.inf, 1 / math.pi, 0.5),))


def check(n: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


def test_criterion_01_mirror_sqrt_ratio():
    y = d_grid(Regime.AT_INF)
    num, den = d_ratio(SQRT, SQRT, y)
    err = float(np.max(np.abs(num / den - 1.0)))
    check(1, err <= 1e-10 and y[0] == 1.0 and y[-1] == 1e8, f"mirror ratio max |R - 1| = {err:.2e} on {y.size} nodes")


def test_criterion_02_singular_example():
    cert = d_certify(SINGULAR, SINGULAR, "AT_ZERO")
    num, den = d_ratio(SINGULAR, SINGULAR, [0.01])
    spot = float(num[0] / den[0])
    rep = analyze_model(CouplingModel(SINGULAR, SINGULAR, KernelCondition.TRUE))
    v = rep["verdict"]
    ok = (cert.verdict is Verdict.DIVERGENT and abs(cert.tail_slope + 0.5) <= 0.02 and abs(spot - 15.14) <= 0.01
          and v["zero_regular"] == "NO" and v["infinity_regular"] == "YES")
    check(2, ok, f"D_0 {cert.verdict.value} slope {cert.tail_slope:.4f}, R(0.01) = {spot:.4f}, "
                 f"zero {v['zero_regular']}, infinity {v['infinity_regular']}")


def test_criterion_03_ode_oracle():
    errs = []
    for z in (1j, 1 + 1j, -2 + 0.5j):
        errs.append(abs(weyl_function(free_problem(TripleStyle.NEUMANN_STYLE), z) * cmath.sqrt(-z) - 1))
        errs.append(abs(weyl_function(free_problem(TripleStyle.DIRICHLET_STYLE), z) / -cmath.sqrt(-z) - 1))
    r = 1e6
    asym = abs(weyl_function(smooth_p_problem(), r * 1j) * cmath.sqrt(-r * 1j) - 1)
    check(3, max(errs) <= 1e-6 and asym <= 0.05, f"free oracle max rel err {max(errs):.2e}, high-energy defect {asym:.2e}")


def test_criterion_04_power_law_family():
    lines, ok = [], True
    for alpha, beta in [(0, 0), (1, 0), (0, -1), (2, 0.5)]:
        nu, C = ex53_constants(alpha, beta)
        ok &= math.isclose(nu, (1 - beta) / (alpha - beta + 2))
        m = weyl_function(ex53_problem(alpha, beta), 1j)
        ode = abs(m / (C * (-1j) ** (-nu)) - 1)
        fit = fit_power_law(SLWeyl(ex53_problem(alpha, beta)), Regime.AT_INF, window=(1e2, 1e4), nodes=6)
        fnu, fC = abs(-fit.alpha0 / nu - 1), abs(fit.C0 / C - 1)
        e = closed_form(f"ex53-powerlaw({alpha},{beta})").closed_form
        v = analyze_model(CouplingModel(e, e, KernelCondition.TRUE))["verdict"]
        theorems = {j["theorem"] for j in v["justification"] if j["point"] == "both"}
        ok &= ode <= 1e-3 and fnu <= 0.01 and fC <= 0.01 and v["fundamentally_reducible"] == "YES" and "ALL_ASYMPTOTIC" in theorems
        lines.append(f"({alpha},{beta}) ode {ode:.1e} fit nu {fnu:.1e} C {fC:.1e} FR {v['fundamentally_reducible']}")
    check(4, ok, "; ".join(lines))


def test_criterion_05_tauberian_pair():
    fwd = max(forward_residual(SQRT_DENSITY, 0.5, 1.0, z) for z in (-1.0, 1j, 1e3j))
    ratios = [SQRT_DENSITY.cdf(t) / tauberian_sigma_model(0.5, 1.0, t) for t in (1e3, 1e4)]
    ok = fwd <= 1e-4 and all(0.99 <= r <= 1.01 for r in ratios)
    check(5, ok, f"forward residual {fwd:.2e}, inverse ratios {', '.join(f'{r:.6f}' for r in ratios)}")


def _random_map(rng):
    while True:
        a, b, c, d = rng.normal(size=4)
        if abs(a * d - b * c) > 0.1:
            return mb.normalize(a, b, c, d)


def test_criterion_06_rkhs_invariants():
    rng = np.random.default_rng(6)
    worst_psd = min(gram_min_eig_ratio(gram(f, SamplePlan.random(8, rng))) for f in CATALOG)
    models = [SQRT_DENSITY, SpectralMeasure(((1.0, 1.0),), ()),
              SpectralMeasure(((0.5, 2.0),), (DensitySegment(0.0, 4.0, 1.0, 0.25),))]
    q = max(q_identity_residual(StieltjesForm(0.0, s), s, z, w) / (1 + abs(evaluate(StieltjesForm(0.0, s), z)))
            for s in models for z, w in [(1j, 2j), (1 + 1j, 1 + 1j), (-3 + 0.2j, 5 + 4j)])
    ul = ulu = 0.0
    for _ in range(50):
        f = CATALOG[rng.integers(len(CATALOG))]
        r = v_transform_check(f, _random_map(rng), _random_map(rng), SamplePlan.random(5, rng))
        ul, ulu = max(ul, r.eqUl_residual), max(ulu, r.eqUlu_residual)
    ok = worst_psd >= -1e-9 and q <= 1e-7 and ul <= 1e-8 and ulu <= 1e-8
    check(6, ok, f"min eig/trace {worst_psd:.2e}, Q residual {q:.2e}, V residuals {ul:.2e}/{ulu:.2e}")


def _projective_gap(A, B) -> float:
    # normalized maps are determined up to an overall sign
    a, b = A.matrix, B.matrix
    return min(float(np.abs(a - b).max()), float(np.abs(a + b).max())) / max(1.0, float(np.abs(a).max()))


def test_criterion_07_mobius_layer():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        M1, M2, M3 = _random_map(rng), _random_map(rng), _random_map(rng)
        z, w = complex(rng.normal(), abs(rng.normal()) + 0.1), complex(rng.normal(), abs(rng.normal()) + 0.1)
        left = mb.compose(mb.compose(M1, M2), M3)
        right = mb.compose(M1, mb.compose(M2, M3))
        worst = max(worst, _projective_gap(left, right), _projective_gap(mb.compose(M1, mb.inverse(M1)), mb.IDENTITY))
        v = mb.apply(M2, z)
        comp = abs(mb.apply(mb.compose(M1, M2), z) - mb.apply(M1, v)) / max(1.0, abs(mb.apply(M1, v)))
        worst = max(worst, comp, mb.mobid_residual(M1, z, w))
    sign_ok = True
    for _ in range(100):
        M = _random_map(rng)
        z = complex(rng.normal(), abs(rng.normal()) + 0.1)
        sign_ok &= math.copysign(1.0, mb.apply(M, z).imag) == M.epsilon
    check(7, worst <= 1e-12 and sign_ok, f"worst group-law / difference-identity residual {worst:.2e}, sign rule {'ok' if sign_ok else 'violated'}")


def test_criterion_08_b_cross_method():
    ok, clashes, compared = True, [], 0
    for f in CATALOG:
        rep = classify(f)
        mem = class_membership(f, rep)
        direct = {}
        for regime, prop in (("AT_INF", Property.B_INF), ("AT_ZERO", Property.B_ZERO)):
            s, d = b_certify_schur(f, regime), b_certify_discretized(f, regime)
            direct[prop] = (s, d)
            if not consistent(s, d):
                clashes.append(f"{f} {regime}")
        for c in derive_properties(f, None, {"m_plus": rep}, {"m_plus": mem}):
            for other in direct[c.property]:
                compared += 1
                if not consistent(c, other):
                    clashes.append(f"implied {c.cert_id} vs {other.cert_id} for {f}")
    ok = not clashes
    check(8, ok, f"{len(CATALOG)} catalog functions, {compared} implied/direct comparisons, contradictions: {clashes or 'none'}")


def test_criterion_09_boundary_classification():
    rng = np.random.default_rng(9)
    bad = 0
    for k in range(200):
        kind = k % 4 + 1
        params = {1: {}, 2: {"alpha": rng.normal()},
                  3: {"rho": math.exp(rng.normal()), "theta": rng.uniform(-3, 3), "sigma": rng.normal()},
                  4: {"alpha": rng.normal(), "beta": rng.normal(), "omega": complex(*rng.normal(size=2)) if k % 8 < 4 else 0.0}}[kind]
        base = canonical_pair(kind, **params)
        G = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        got = classify_boundary(BoundaryMatrixPair(G @ base.M, G @ base.N, tol=1e-9))
        separated = kind in (1, 2) or (kind == 4 and params["omega"] == 0)
        bad += got.canonical_type != kind or got.separated != separated
    check(9, bad == 0, f"200 left-multiplied instances, {bad} misclassified")


def test_criterion_10_resolvent_compression():
    model = CouplingModel(SQRT, SQRT, KernelCondition.TRUE,
                          sl_problem_plus=free_problem(TripleStyle.DIRICHLET_STYLE, Side.PLUS),
                          sl_problem_minus=free_problem(TripleStyle.DIRICHLET_STYLE, Side.MINUS))
    h = indicator(0.0, 1.0)
    single = resolvent_solve(CouplingModel(SQRT, SQRT, sl_problem_plus=model.sl_problem_plus), 1j, h)
    ident = resolvent_identity_residual(model, 1j, 2j, h)
    ok = single.ode_residual <= 1e-6 and single.boundary_residual <= 1e-8 and ident <= 1e-5
    check(10, ok, f"ODE residual {single.ode_residual:.2e}, boundary residual {single.boundary_residual:.2e}, "
                  f"resolvent identity {ident:.2e}")


SHIFTED = AffinePlusPower(0.5, -1.0, 0.5)
SHIFTED_STIELTJES = AffinePlusPower(1.0, 1.0, -0.5)
LIMIT_PAIRS = [
    (SQRT, SQRT, "AT_INF"), (SQRT, QUARTER, "AT_INF"), (SQRT, QUARTER, "AT_ZERO"), (INV_SQRT, INV_SQRT, "AT_INF"),
    (INV_SQRT, QUARTER, "AT_ZERO"), (QUARTER, QUARTER, "AT_ZERO"), (SHIFTED, SQRT, "AT_INF"),
    (SHIFTED, QUARTER, "AT_INF"), (SHIFTED_STIELTJES, INV_SQRT, "AT_ZERO"), (INV_SQRT, PowerLaw(-0.5, 0.75), "AT_INF"),
]


def test_criterion_11_d_limit_predictor():
    worst, lines = 0.0, []
    for mp, mm, regime in LIMIT_PAIRS:
        pred = d_limit_predict(fit_power_law(mp, regime), fit_power_law(mm, regime))
        grid = d_certify(mp, mm, regime).evidence["endpoint_value"]
        err = abs(grid / pred - 1)
        worst = max(worst, err)
        lines.append(f"{pred:.4f}")
    check(11, worst <= 0.02, f"{len(LIMIT_PAIRS)} pairs, worst relative gap {worst:.2e}, limits {', '.join(lines)}")


@pytest.mark.parametrize("example_id", EXAMPLE_IDS)
def test_criterion_12_examples(example_id):
    rep = run_example(example_id)
    chain = sorted({j["theorem"] for j in (rep["verdict"] or {}).get("justification", [])})
    check(12, rep["status"] == "PASS" and bool(chain), f"{example_id} {rep['status']} via {', '.join(chain)}")
