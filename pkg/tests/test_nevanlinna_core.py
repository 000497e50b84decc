import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critreg import mobius as mb
from critreg.errors import BranchCut
from critreg.nevanlinna_core import (
    AffinePlusPower, DensitySegment, ExtensionType, MobiusOf, PowerLaw, SpectralMeasure,
    StieltjesForm, Sum, Transpose, classify, densely_defined_check, evaluate, expr_from_dict,
    extension_type, linear, mobius_transform, stieltjes_invert,
)
from critreg.rkhs import SamplePlan, gram, is_psd
from critreg.tri import Tri

SQRT = PowerLaw(-1.0, 0.5)
INV_SQRT = PowerLaw(1.0, -0.5)
SINGULAR = Sum(INV_SQRT, PowerLaw(1.0, -1.0))
ATOMS = [SQRT, INV_SQRT, SINGULAR, PowerLaw(-math.sqrt(2), 0.25), PowerLaw(2.0, -0.75),
         AffinePlusPower(1.0, 1.0, -0.5), AffinePlusPower(-1.0, -2.0, 0.5)]
SQRT_DENSITY = SpectralMeasure((), (DensitySegment(0.0, math.inf, 1 / math.pi, 0.5),))

off_axis = st.builds(complex, st.floats(-50, 50), st.floats(0.01, 50))


def test_evaluate_examples():
    assert abs(evaluate(INV_SQRT, 1j) - cmath.exp(1j * math.pi / 4)) < 1e-15
    assert abs(evaluate(Transpose(INV_SQRT), 1j) + cmath.exp(-1j * math.pi / 4)) < 1e-15
    sf = StieltjesForm(0.0, SQRT_DENSITY)
    assert abs(evaluate(sf, -4.0) - 0.5) < 1e-8


def test_branch_cut():
    with pytest.raises(BranchCut):
        evaluate(INV_SQRT, 2.0)


def test_stieltjes_form_matches_closed_form():
    sf = StieltjesForm(0.0, SQRT_DENSITY)
    for z in (1j, -1 + 1j, 1 + 2j, 100j, 1e-3j, -0.5):
        ref = evaluate(INV_SQRT, z)
        assert abs(evaluate(sf, z) - ref) <= 1e-6 * abs(ref)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(ATOMS), off_axis, st.booleans())
def test_conjugate_symmetry(f, z, lower):
    z = z.conjugate() if lower else z
    v = evaluate(f, z)
    assert abs(evaluate(f, z.conjugate()) - v.conjugate()) <= 1e-10 * (1 + abs(v))


def test_mobius_transform_examples():
    f = SQRT
    for z in (1j, -1 + 2j, 3 + 0.5j):
        assert evaluate(mobius_transform(f, mb.IDENTITY, mb.IDENTITY), z) == pytest.approx(evaluate(f, z))
        assert evaluate(mobius_transform(f, mb.IDENTITY, mb.TRANSPOSE), z) == pytest.approx(
            evaluate(Transpose(f), z))
    # z -> 1/z inside and a sign flip outside reverses the exponent and the sign of C
    for C, a in ((-2.0, 0.5), (3.0, -0.25)):
        g = mobius_transform(PowerLaw(C, a), mb.normalize(0, 1, 1, 0), mb.normalize(-1, 0, 0, 1))
        for z in (1j, -1 + 2j, 3 + 0.5j):
            assert abs(evaluate(g, z) - evaluate(PowerLaw(-C, -a), z)) < 1e-12


def test_mobius_transform_sign_factor():
    M1, M2 = mb.normalize(0, 1, 1, 0), mb.normalize(2, 1, 1, 1)
    g = MobiusOf(M1, M2, SQRT)
    z = 0.3 + 1.1j
    assert evaluate(g, z) == pytest.approx(M1.epsilon * M2.epsilon * mb.apply(M2, evaluate(SQRT, mb.apply(M1, z))))


@pytest.mark.parametrize("f", [Sum(SQRT, INV_SQRT), MobiusOf(mb.normalize(0, 1, 1, 0), mb.normalize(1, 2, 3, 4), SQRT),
                               Transpose(SINGULAR)])
def test_nevanlinna_closure(f, rng):
    G = gram(f, SamplePlan.random(8, rng))
    assert is_psd(G)


def test_classify_examples():
    r = classify(INV_SQRT)
    assert r.is_stieltjes is Tri.YES and r.in_SM is Tri.YES
    assert r.m_minus_inf == pytest.approx(0.0, abs=1e-6) and r.m_zero_minus == math.inf
    r = classify(SQRT)
    assert r.is_inverse_stieltjes is Tri.YES
    assert r.m_zero_minus == pytest.approx(0.0, abs=1e-6) and r.m_minus_inf == -math.inf
    r = classify(SINGULAR)
    assert r.in_SM is Tri.YES and r.pole_on_negative_axis is None and r.m_zero_minus == math.inf


@pytest.mark.parametrize("f", ATOMS)
def test_inverse_stieltjes_round_trip(f):
    # z -> -m(1/z) swaps the Stieltjes and inverse Stieltjes classes
    g = mobius_transform(f, mb.normalize(0, 1, 1, 0), mb.normalize(-1, 0, 0, 1))
    assert classify(f).is_inverse_stieltjes is classify(g).is_stieltjes


def test_extension_type_examples():
    assert extension_type(SQRT) is ExtensionType.FRIEDRICHS
    assert extension_type(INV_SQRT) is ExtensionType.KREIN
    assert extension_type(AffinePlusPower(1.0, 1.0, -0.5)) is ExtensionType.KREIN


def test_stieltjes_invert_density():
    t = np.geomspace(0.1, 10, 9)
    sigma = stieltjes_invert(INV_SQRT, t)
    np.testing.assert_allclose(sigma.density(t), 1 / (math.pi * np.sqrt(t)), rtol=1e-3)
    C, a = 2.0, -0.75
    sigma = stieltjes_invert(PowerLaw(C, a), t)
    np.testing.assert_allclose(sigma.density(t), C * math.sin(math.pi * abs(a)) * t ** a / math.pi, rtol=1e-3)
    sigma = stieltjes_invert(PowerLaw(1.0, -1.0), t)
    assert np.all(np.abs(sigma.density(t)) < 1e-8)
    # the only mass of -1/z is the atom at the origin
    assert sigma.atoms == ((0.0, pytest.approx(1.0)),)


def test_densely_defined():
    assert densely_defined_check(SQRT).verdict is Tri.YES
    assert densely_defined_check(linear()).verdict is Tri.NO
    assert densely_defined_check(PowerLaw(1.0, -1.0)).verdict is Tri.NO


@pytest.mark.parametrize("f", ATOMS + [StieltjesForm(0.5, SQRT_DENSITY), MobiusOf(mb.TRANSPOSE, mb.IDENTITY, SQRT)])
def test_json_round_trip(f):
    g = expr_from_dict(json.loads(json.dumps(f.to_dict())))
    assert evaluate(g, 0.7 + 1.3j) == pytest.approx(evaluate(f, 0.7 + 1.3j), rel=1e-12)
