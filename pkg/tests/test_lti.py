import dataclasses

import numpy as np
import pytest

from rovtune import (
    AlgebraicLoop,
    DegenerateDenominator,
    Polynomial,
    TransferFunction,
    default_yaw_plant,
    is_stable,
    poly_add,
    poly_mul,
    series,
    to_state_space,
    unity_feedback,
)
from rovtune.sim import PIGains, pi_tf


def test_default_yaw_plant_coefficients():
    g = default_yaw_plant()
    assert g.num.coeffs == (0.01394,)
    assert g.den.coeffs == (1.0, 2.08, 0.4681)


def test_default_yaw_plant_dc_gain():
    g = default_yaw_plant()
    assert g.num(0.0) / g.den(0.0) == pytest.approx(0.01394 / 0.4681, rel=1e-15)


def test_default_yaw_plant_relative_degree():
    g = default_yaw_plant()
    assert g.den.degree - g.num.degree == 2


def test_polynomial_trims_exact_leading_zeros_only():
    assert Polynomial((0.0, 0.0, 1.0, 2.0)).coeffs == (1.0, 2.0)
    assert Polynomial((0.0,)).coeffs == (0.0,)
    # tiny but nonzero leading coefficients are kept: order is never changed silently
    assert Polynomial((1e-300, 1.0)).coeffs == (1e-300, 1.0)


def test_polynomial_rejects_empty_and_nonfinite():
    with pytest.raises(ValueError):
        Polynomial(())
    with pytest.raises(ValueError):
        Polynomial((float("nan"), 1.0))


def test_poly_mul_identity():
    den = Polynomial((1.0, 2.08, 0.4681))
    assert poly_mul(Polynomial((1.0,)), den).coeffs == den.coeffs


def test_poly_mul_s_times_s():
    s = Polynomial((1.0, 0.0))
    assert poly_mul(s, s).coeffs == (1.0, 0.0, 0.0)


def test_poly_mul_ga_numerator():
    prod = poly_mul(Polynomial((260.0, 70.0)), Polynomial((0.01394,)))
    assert prod.coeffs == pytest.approx((3.6244, 0.9758), rel=1e-12)


def test_poly_mul_zero_operand():
    assert poly_mul(Polynomial((0.0,)), Polynomial((1.0, 2.0))).coeffs == (0.0,)


def test_poly_mul_commutative_associative():
    rng = np.random.default_rng(42)
    for _ in range(200):
        a, b, c = (Polynomial(tuple(rng.uniform(-5, 5, size=rng.integers(1, 5)))) for _ in range(3))
        ab = poly_mul(a, b)
        ba = poly_mul(b, a)
        assert ab.coeffs == pytest.approx(ba.coeffs, rel=1e-12)
        left = poly_mul(ab, c)
        right = poly_mul(a, poly_mul(b, c))
        assert left.coeffs == pytest.approx(right.coeffs, rel=1e-12, abs=1e-12)


def test_poly_add_identity_and_cancellation():
    assert poly_add(Polynomial((1.0, 2.0)), Polynomial((0.0,))).coeffs == (1.0, 2.0)
    assert poly_add(Polynomial((1.0, 0.0)), Polynomial((-1.0, 0.0))).coeffs == (0.0,)


def test_poly_add_closed_loop_denominator():
    s = poly_add(Polynomial((1.0, 2.08, 0.4681, 0.0)), Polynomial((0.0, 0.0, 3.6244, 0.9758)))
    assert s.coeffs == pytest.approx((1.0, 2.08, 4.0925, 0.9758), rel=1e-12)


def test_transfer_function_monic_normalization():
    tf = TransferFunction(Polynomial((2.0,)), Polynomial((2.0, 4.0)))
    assert tf.den.coeffs == (1.0, 2.0)
    assert tf.num.coeffs == (1.0,)


def test_transfer_function_rejects_improper_and_zero_den():
    with pytest.raises(ValueError, match="improper"):
        TransferFunction(Polynomial((1.0, 0.0)), Polynomial((1.0,)))
    with pytest.raises(ValueError, match="zero"):
        TransferFunction(Polynomial((1.0,)), Polynomial((0.0,)))


def test_types_are_frozen():
    g = default_yaw_plant()
    with pytest.raises(dataclasses.FrozenInstanceError):
        g.num = Polynomial((1.0,))
    ss = to_state_space(g)
    with pytest.raises(ValueError):
        ss.A[0, 0] = 5.0  # read-only array


def test_series_identity_block():
    g = default_yaw_plant()
    one = TransferFunction(Polynomial((1.0,)), Polynomial((1.0,)))
    cascade = series(one, g)
    assert cascade.num.coeffs == g.num.coeffs
    assert cascade.den.coeffs == g.den.coeffs


def test_series_pi_times_plant():
    loop = series(pi_tf(PIGains(260.0, 70.0)), default_yaw_plant())
    assert loop.num.coeffs == pytest.approx((3.6244, 0.9758), rel=1e-12)
    assert loop.den.coeffs == (1.0, 2.08, 0.4681, 0.0)


def test_series_degree_additivity():
    g = default_yaw_plant()
    h = TransferFunction(Polynomial((1.0,)), Polynomial((1.0, 1.0)))
    assert series(g, h).den.degree == g.den.degree + h.den.degree


def test_unity_feedback_integrator():
    closed = unity_feedback(TransferFunction(Polynomial((1.0,)), Polynomial((1.0, 0.0))))
    assert closed.num.coeffs == (1.0,)
    assert closed.den.coeffs == (1.0, 1.0)


def test_unity_feedback_ga_loop():
    closed = unity_feedback(series(pi_tf(PIGains(260.0, 70.0)), default_yaw_plant()))
    assert closed.den.coeffs == pytest.approx((1.0, 2.08, 4.0925, 0.9758), rel=1e-12)
    # integral action forces unit DC gain, exactly: den(0) == num(0)
    assert closed.num(0.0) / closed.den(0.0) == 1.0


def test_unity_feedback_dc_gain_with_integrating_controller():
    g = default_yaw_plant()
    for kp, ki in ((296.0, 81.0), (230.0, 90.0), (5.0, 2.0)):
        closed = unity_feedback(series(pi_tf(PIGains(kp, ki)), g))
        assert closed.num(0.0) / closed.den(0.0) == pytest.approx(1.0, abs=1e-12)


def test_unity_feedback_algebraic_loop():
    with pytest.raises(AlgebraicLoop):
        unity_feedback(TransferFunction(Polynomial((-1.0,)), Polynomial((1.0,))))


def test_to_state_space_plant_matrices():
    ss = to_state_space(default_yaw_plant())
    np.testing.assert_allclose(ss.A, [[-2.08, -0.4681], [1.0, 0.0]])
    np.testing.assert_allclose(ss.B, [[1.0], [0.0]])
    np.testing.assert_allclose(ss.C, [[0.0, 0.01394]])
    assert ss.D == 0.0
    assert ss.order == 2


def test_to_state_space_constant_gain():
    ss = to_state_space(TransferFunction(Polynomial((3.5,)), Polynomial((1.0,))))
    assert ss.order == 0
    assert ss.D == 3.5


def test_to_state_space_feedthrough_iff_biproper():
    biproper = to_state_space(TransferFunction(Polynomial((2.0, 1.0)), Polynomial((1.0, 3.0))))
    assert biproper.D != 0.0
    strictly = to_state_space(default_yaw_plant())
    assert strictly.D == 0.0


def _recover_tf(ss):
    # C (sI-A)^-1 B + D via det(sI - A + B C) = det(sI - A) (1 + C (sI-A)^-1 B)
    den = np.atleast_1d(np.poly(ss.A)) if ss.order else np.array([1.0])
    num = np.atleast_1d(np.poly(ss.A - ss.B @ ss.C)) - den + ss.D * den if ss.order else np.array([ss.D])
    return num, den


def test_state_space_recovery_for_reference_loops(plant):
    systems = [plant]
    for kp, ki in ((260.0, 70.0), (296.0, 81.0), (230.0, 90.0)):
        systems.append(unity_feedback(series(pi_tf(PIGains(kp, ki)), plant)))
    for tf in systems:
        num, den = _recover_tf(to_state_space(tf))
        np.testing.assert_allclose(den, tf.den.coeffs, rtol=1e-9)
        padded = np.zeros(len(den))
        padded[len(den) - len(tf.num.coeffs):] = tf.num.coeffs
        np.testing.assert_allclose(num, padded, rtol=1e-9, atol=1e-9 * np.max(np.abs(padded)))


def test_state_space_recovery_random():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        den = np.concatenate(([1.0], rng.uniform(-5, 5, n)))
        num = rng.uniform(-5, 5, int(rng.integers(1, n + 2)))
        if num[0] == 0.0:
            num[0] = 1.0
        tf = TransferFunction(Polynomial(tuple(num)), Polynomial(tuple(den)))
        rnum, rden = _recover_tf(to_state_space(tf))
        np.testing.assert_allclose(rden, tf.den.coeffs, rtol=1e-9, atol=1e-12)
        padded = np.zeros(len(rden))
        padded[len(rden) - len(tf.num.coeffs):] = tf.num.coeffs
        np.testing.assert_allclose(rnum, padded, rtol=1e-9, atol=1e-9 * max(1.0, np.max(np.abs(padded))))


def _tf_with_den(coeffs):
    return TransferFunction(Polynomial((1.0,)), Polynomial(coeffs))


def test_is_stable_plant_denominator():
    # roots of s^2 + 2.08 s + 0.4681 are both real negative
    assert is_stable(_tf_with_den((1.0, 2.08, 0.4681))) is True


def test_is_stable_rhp_root():
    assert is_stable(_tf_with_den((1.0, -1.0))) is False


def test_is_stable_ga_closed_loop_denominator():
    assert is_stable(_tf_with_den((1.0, 2.08, 4.0925, 0.9758))) is True


def test_is_stable_marginal_cases_reject():
    assert is_stable(_tf_with_den((1.0, 0.0, 1.0))) is False  # +-j
    assert is_stable(_tf_with_den((1.0, 1.0, 1.0, 1.0))) is False  # (s^2+1)(s+1)
    assert is_stable(_tf_with_den((1.0, 0.0))) is False  # integrator pole
    assert is_stable(_tf_with_den((1.0, 1.0, 0.0))) is False  # pole at origin


def test_is_stable_zero_pivot_row():
    # s^4 + s^3 + 2 s^2 + 2 s + 3: first Routh column hits an exact zero with a
    # nonzero row remainder; the epsilon-perturbed array must classify unstable
    den = (1.0, 1.0, 2.0, 2.0, 3.0)
    assert np.max(np.roots(den).real) > 0
    assert is_stable(_tf_with_den(den)) is False


def test_is_stable_constant_denominator_rejected():
    with pytest.raises(DegenerateDenominator):
        is_stable(TransferFunction(Polynomial((1.0,)), Polynomial((2.0,))))


def test_is_stable_agrees_with_root_oracle():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(1000):
        degree = 3 if rng.uniform() < 0.5 else 4
        coeffs = rng.uniform(-5.0, 5.0, size=degree + 1)
        while coeffs[0] == 0.0:
            coeffs[0] = rng.uniform(-5.0, 5.0)
        roots = np.roots(coeffs)
        if np.min(np.abs(roots.real)) < 1e-6:
            continue  # marginal flukes excluded
        checked += 1
        expected = bool(np.all(roots.real < 0.0))
        assert is_stable(_tf_with_den(tuple(coeffs))) is expected
    assert checked > 900
