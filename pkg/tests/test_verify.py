import numpy as np

from caching import OperatorCache
from verify import STATEMENTS, CheckResult, Verifier, manufactured_g, manufactured_w


def test_manufactured_pair():
    x = np.array([0.0, 0.5, 1.0])
    np.testing.assert_allclose(manufactured_w(x), [0.0, 0.0625, 0.0])
    np.testing.assert_allclose(manufactured_g(x), [24.0, 24.0625, 24.0])


def test_generator_checks_pass(ops16):
    verifier = Verifier(ops16, OperatorCache(), seed=3)
    for check in (verifier.check_dissipativity, verifier.check_maximality,
                  verifier.check_contraction, verifier.check_semigroup_law,
                  verifier.check_strong_continuity, verifier.check_spectral_reconstruction):
        result = check()
        assert result.passed, result


def test_constraint_checks_pass(ops16):
    verifier = Verifier(ops16, OperatorCache())
    for check in (verifier.check_coercivity, verifier.check_constraint_spd,
                  verifier.check_weak_form_residual, verifier.check_energy_identity,
                  verifier.check_inverse_bound):
        result = check()
        assert result.passed, result


def test_composite_check_reports_each_radius(ops16):
    results = Verifier(ops16, OperatorCache()).check_lipschitz_composite()
    assert [r.name for r in results] == [f'lipschitz_composite[C={c}]' for c in ('0.1', '1', '10')]
    assert all(r.passed for r in results)


def test_failing_check_is_recorded_not_raised(ops16):
    broken = ops16.replace(A=ops16.A.with_diagonal(0, -ops16.A.diagonal(0)))
    verifier = Verifier(broken, OperatorCache())
    result = verifier.check_dissipativity()
    assert isinstance(result, CheckResult)
    assert not result.passed and result.measured > 1e-12


def test_every_check_states_its_property(ops16):
    verifier = Verifier(ops16, OperatorCache())
    names = {check.__name__.removeprefix('check_') for check in verifier.checks()}
    assert names == set(STATEMENTS)
    assert all(STATEMENTS[name] for name in names)
