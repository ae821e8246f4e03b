import math
import random

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from so2deg.checker import (
    ConsistencyError,
    Family,
    MultipleCrossings,
    NoNontrivialLambda0,
    ProblemSpec,
    Zero,
    bif_index,
    check_all,
    check_bif_meets,
    check_continuation,
    check_degenerate,
    check_ls,
    check_so2_1,
    check_so2_2,
    check_so2_3,
    configuration_notes,
)
from so2deg.cli import load_problem
from so2deg.degree import ResonantSlope
from so2deg.euler_ring import EulerElement, TriState
from so2deg.reps import SO2Rep, direct_sum, is_nontrivial
from so2deg.spectra import Custom, Cylinder, Disc, Interval, SpectralLine, lambda0, lines_between, nu, resonant_line, spectrum


def zeros(*slopes):
    return tuple(Zero(float(i), float(s)) for i, s in enumerate(slopes))


def by_id(verdicts):
    return {v.theorem_id: v for v in verdicts}


# -- LS ------------------------------------------------------------------


def test_ls_hypothesis_1_interval():
    p = ProblemSpec(Interval(1.0), zeros(-1, 20, -1), -1.0)
    v = check_ls(p)
    assert v.applies and v.witness["hypothesis"] == 1 and v.witness["nu"] == 2
    assert v.report.ls_total == -2
    assert v.index_crosscheck is TriState.YES


def test_ls_all_odd_fails():
    p = ProblemSpec(Interval(1.0), zeros(-1, 5, -1), -1.0)
    assert not check_ls(p).applies


def test_ls_hypothesis_3_needs_count_other_than_one():
    p = ProblemSpec(Interval(1.0), zeros(30, -1, 5), 20.0)
    assert nu(p.domain, 20.0) % 2 == 0
    v = check_ls(p)
    assert not v.applies and v.witness["even_count"] == 1


def test_ls_rejects_resonance():
    p = ProblemSpec(Interval(1.0), zeros(-1, math.pi**2, -1), -1.0)
    with pytest.raises(ResonantSlope):
        check_ls(p)


# -- SO(2) existence ----------------------------------------------------------


def test_so2_1_disc_slope_5():
    p = ProblemSpec(Disc(), zeros(-1, 5, -1), -1.0)
    v = check_so2_1(p)
    assert v.applies and v.witness["z0_slope"] == 5.0
    assert 3.38 < v.witness["lambda0"] < 3.40


def test_so2_needs_nontrivial_lambda0():
    p = ProblemSpec(Interval(1.0), zeros(-1, 20, -1), -1.0)
    for fn in (check_so2_1, check_so2_2, check_so2_3):
        with pytest.raises(NoNontrivialLambda0):
            fn(p)


def test_so2_2_alternative_1():
    p = ProblemSpec(Disc(), zeros(70, -1, 5), 60.0)
    assert nu(Disc(), 60.0) % 2 == 1
    v = check_so2_2(p)
    assert v.applies and v.witness["alternative"] == 1
    assert v.witness["z0_slope"] == 70.0 and v.witness["z1_slope"] == 5.0
    assert v.index_crosscheck is TriState.YES


def test_so2_2_alternative_2():
    p = ProblemSpec(Disc(), zeros(10), 60.0)
    v = check_so2_2(p)
    assert v.applies and v.witness["alternative"] == 2
    assert v.witness["rep"] == "R[1,3]"


def test_so2_2_requires_odd_nu():
    even = next(x for x in range(40, 120) if nu(Disc(), x + 0.5) % 2 == 0) + 0.5
    p = ProblemSpec(Disc(), zeros(even + 10, -1, 5), even)
    v = check_so2_2(p)
    assert not v.applies
    assert check_so2_3(p).theorem_id == "SO2-existence-3"


def test_so2_3_alternative_1():
    d = Disc()
    assert nu(d, 15.5) % 2 == 0
    p = ProblemSpec(d, zeros(15.5, -1, 16.5), 15.5)
    v = check_so2_3(p)
    assert v.applies and v.witness["alternative"] == 1
    assert v.witness["z0_slope"] == 15.5
    assert v.index_crosscheck is TriState.YES


# -- degenerate ---------------------------------------------------------------


def test_degenerate_cylinder_k3():
    p = ProblemSpec(Cylinder(), zeros(-1, 14, -1, 25, -1), -1.0)
    v = check_degenerate(p)
    assert v.applies
    assert v.witness["k_prime"] == 3 and v.witness["z0_slope"] == 25.0
    k = 3
    assert k * (k + 2) > 14 and 25 > 2 * k * (k + 1)
    assert v.index_crosscheck is TriState.YES


def test_degenerate_all_below_lambda0():
    p = ProblemSpec(Disc(), zeros(-1, 2, -1), -1.0)
    assert not check_degenerate(p).applies


def test_degenerate_resonant_with_fixed_vectors():
    d = Disc()
    x01 = next(ln.eigenvalue for ln in spectrum(d, 15.0) if ln.eigenvalue > 14)
    p = ProblemSpec(d, zeros(-1, x01, -1), -1.0)
    v = check_degenerate(p)
    assert not v.applies
    assert any("condition (1)" in n for n in v.notes)


def test_degenerate_resonant_without_fixed_vectors():
    d = Disc()
    x31 = next(ln.eigenvalue for ln in spectrum(d, 30.0) if ln.rep == SO2Rep({4: 1}))
    p = ProblemSpec(d, zeros(-1, x31, -1), -1.0)
    v = check_degenerate(p)
    assert v.applies
    assert v.witness["k_prime"] != 4
    assert v.index_crosscheck is not TriState.NO


def test_check_all_survives_resonance():
    d = Disc()
    lam = spectrum(d, 4.0)[1].eigenvalue
    p = ProblemSpec(d, zeros(-1, lam, -1), lam)
    verdicts = by_id(check_all(p))
    assert not verdicts["LS-existence"].applies
    assert "degenerate-existence" in verdicts


# -- continuation --------------------------------------------------------------


def test_continuation_follows_existence():
    p = ProblemSpec(Disc(), zeros(-1, 5, -1), -1.0)
    v = check_continuation(p)
    assert v.applies and v.witness["via"] == "SO2-existence-1"
    q = ProblemSpec(Disc(), zeros(-1, 2, -1), -1.0)
    assert not check_continuation(q).applies


# -- bifurcation from infinity ------------------------------------------------


def fam(d, lo, hi, fn=None):
    return ProblemSpec(d, zeros(-1), -1.0, Family(lo, hi, fn(lo) if fn else lo, fn(hi) if fn else hi, fn))


def test_bif_equal_slopes_is_zero():
    el, nz, _ = bif_index(ProblemSpec(Disc(), zeros(-1), -1.0, Family(0, 1, 5.0, 5.0)))
    assert el.is_zero() and not nz


def test_bif_interval_odd_dimension():
    el, nz, trace = bif_index(ProblemSpec(Interval(1.0), zeros(-1), -1.0, Family(0, 1, 5.0, 15.0)))
    assert nz and trace["odd_dimension"]
    assert el == EulerElement(2, {})


def test_bif_disc_nontrivial_line():
    el, nz, trace = bif_index(ProblemSpec(Disc(), zeros(-1), -1.0, Family(0, 1, 3.0, 4.0)))
    assert nz and el.a0 == 0 and el.torus.get(1, 0) != 0
    assert trace["rep_between"] == "R[1,1]"


def test_bif_resonant_endpoint():
    with pytest.raises(ResonantSlope):
        bif_index(ProblemSpec(Interval(1.0), zeros(-1), -1.0, Family(0, 1, math.pi**2, 15.0)))


@given(st.floats(-5, 120), st.floats(-5, 120))
def test_bif_order_symmetry(a, b):
    d = Cylinder()
    assume(not resonant_line(d, a) and not resonant_line(d, b))
    e1, _, _ = bif_index(ProblemSpec(d, zeros(-1), -1.0, Family(0, 1, a, b)))
    e2, _, _ = bif_index(ProblemSpec(d, zeros(-1), -1.0, Family(0, 1, b, a)))
    assert e1 == EulerElement(0) - e2


def random_custom(rng):
    lines, e = [SpectralLine(0.0, SO2Rep({0: 1}))], 0.0
    for _ in range(rng.randint(2, 7)):
        e += rng.uniform(0.5, 4.0)
        mult = {}
        for _ in range(rng.randint(1, 3)):
            k = rng.choice([0, 0, 1, 2, 3, 5])
            mult[k] = mult.get(k, 0) + 1
        lines.append(SpectralLine(round(e, 3), SO2Rep(mult)))
    return Custom(tuple(lines)), e + 2


def test_bif_criterion_on_random_custom_spectra():
    rng = random.Random(7)
    for _ in range(100):
        d, top = random_custom(rng)
        while True:
            a, b = rng.uniform(-1, top), rng.uniform(-1, top)
            if not resonant_line(d, a) and not resonant_line(d, b):
                break
        el, nonzero, _ = bif_index(ProblemSpec(d, zeros(-1), -1.0, Family(0, 1, a, b)))
        between = lines_between(d, a, b)
        rep = direct_sum(*(ln.rep for ln in between))
        assert nonzero == (any(is_nontrivial(ln.rep) for ln in between) or rep.dimension % 2 == 1)


def test_bif_meets_interval():
    p = fam(Interval(1.0), 5.0, 15.0, lambda lam: lam)
    v = check_bif_meets(p)
    assert v.applies and abs(v.witness["lambda0"] - math.pi**2) < 1e-9


def test_bif_meets_disc_scaled():
    p = fam(Disc(), 1.0, 2.5, lambda lam: 2 * lam)
    v = check_bif_meets(p)
    assert v.applies and abs(v.witness["lambda0"] - lambda0(Disc()) / 2) < 1e-9
    assert v.witness["nontrivial"]


def test_bif_meets_even_trivial_crossing():
    d = Custom((SpectralLine(0.0, SO2Rep({0: 1})), SpectralLine(2.0, SO2Rep({0: 2})), SpectralLine(5.0, SO2Rep({1: 1}))))
    v = check_bif_meets(fam(d, 0.5, 1.5, lambda lam: 2 * lam))
    assert not v.applies and v.witness["rep"] == "R[2,0]"


def test_bif_meets_multiple_crossings():
    with pytest.raises(MultipleCrossings):
        check_bif_meets(fam(Interval(1.0), 0.1, 10.0, lambda lam: 5 * lam))


def test_bif_meets_attested_lambda0():
    p = ProblemSpec(Interval(1.0), zeros(-1), -1.0, Family(5.0, 15.0, 5.0, 15.0, None, math.pi**2))
    assert check_bif_meets(p).applies


# -- check_all / fixtures ------------------------------------------------------


def test_empty_zeros_negative_slope():
    p = ProblemSpec(Disc(), (), -1.0)
    assert not any(v.applies for v in check_all(p))


def test_configuration_notes():
    assert configuration_notes(ProblemSpec(Disc(), zeros(-1, 5, -1), -1.0)) == []
    assert configuration_notes(ProblemSpec(Disc(), zeros(5, 5), -1.0))
    assert configuration_notes(ProblemSpec(Disc(), (), 2.0))


@pytest.mark.parametrize(
    "name, theorem, extra",
    [
        ("example51.json", "SO2-existence-2", {"alternative": 1}),
        ("example51_alt1.json", "SO2-existence-2", {"alternative": 1}),
        ("example51_alt2.json", "SO2-existence-2", {"alternative": 2}),
        ("example52.json", "SO2-existence-1", {}),
        ("example53.json", "degenerate-existence", {}),
        ("example53_k3.json", "degenerate-existence", {"k_prime": 3}),
        ("example54_interval.json", "bif-meets", {}),
        ("example54_disc.json", "bif-meets", {"nontrivial": True}),
        ("lsgd_disc.json", "SO2-existence-1", {}),
        ("tanh_interval.json", "LS-existence", {"hypothesis": 1}),
    ],
)
def test_fixture_verdicts(fixture_path, name, theorem, extra):
    lp = load_problem(fixture_path(name))
    v = by_id(check_all(lp.spec))[theorem]
    assert v.applies
    for k, val in extra.items():
        assert v.witness[k] == val


def test_lsgd_fixture_ls_fails_but_so2_applies(fixture_path):
    lp = load_problem(fixture_path("lsgd_disc.json"))
    vs = by_id(check_all(lp.spec))
    assert not vs["LS-existence"].applies
    assert vs["SO2-existence-1"].applies
    r = vs["SO2-existence-1"].report
    assert r.ls_total == 0
    assert r.grad_total.to_element() == EulerElement(0, {1: 1})


def test_verdicts_are_deterministic(fixture_path):
    lp = load_problem(fixture_path("example51_alt1.json"))
    assert check_all(lp.spec) == check_all(lp.spec)


def test_consistency_error_is_assertion():
    assert issubclass(ConsistencyError, AssertionError)
