from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from solsurf import ode
from solsurf.painleve import PainleveParams, rhs_expr
from solsurf.errors import StepSizeUnderflow


def test_exponential_and_hits_t_eval():
    te = np.linspace(0, 2, 9)
    sol = ode.solve(lambda t, y: -y, 0.0, [1.0], 2.0, t_eval=te)
    np.testing.assert_array_equal(sol.t[sol.t_eval_index], te)
    np.testing.assert_allclose(sol.y[sol.t_eval_index, 0], np.exp(-te), rtol=1e-9)


def test_backward_direction():
    sol = ode.solve(lambda t, y: np.array([y[1], -y[0]]), 1.0, [np.sin(1.0), np.cos(1.0)], -2.0)
    np.testing.assert_allclose(sol.y[-1], [np.sin(-2.0), np.cos(-2.0)], atol=1e-9)


def test_against_scipy_on_van_der_pol():
    f = lambda t, y: np.array([y[1], 2.0 * (1 - y[0] ** 2) * y[1] - y[0]])  # noqa: E731
    ours = ode.solve(f, 0.0, [2.0, 0.0], 5.0, rtol=1e-11, atol=1e-13)
    ref = solve_ivp(f, (0, 5), [2.0, 0.0], method="DOP853", rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(ours.y[-1], ref.y[:, -1], rtol=1e-8, atol=1e-9)


def test_fifth_order_convergence():
    errs = []
    for h in (0.1, 0.05):
        sol = ode.solve(lambda t, y: np.cos(t) * y, 0.0, [1.0], 2.0, fixed_step=h)
        errs.append(abs(sol.y[-1, 0] - np.exp(np.sin(2.0))))
    assert errs[0] / errs[1] > 25  # 2**5 = 32


def test_stop_event_and_complex_state():
    sol = ode.solve(lambda t, y: y * y, 0.0, [1.0], 2.0, stop=lambda t, y: abs(y[0]) > 1e6)
    assert sol.stopped and sol.t[-1] < 1.0
    z = ode.solve(lambda t, y: 1j * y, 0.0, np.array([1 + 0j]), np.pi)
    np.testing.assert_allclose(z.y[-1, 0], -1.0, atol=1e-9)


def test_underflow_raises():
    with pytest.raises(StepSizeUnderflow):
        ode.solve(lambda t, y: np.array([1.0 / (1.0 - t)]), 0.0, [0.0], 2.0)


def test_step_halving_on_rational_p2():
    # x = 1/t solves P2 with alpha = 1; a 5th-order method gains ~32x per halving
    prm = PainleveParams("P2", alpha=1.0)
    f = lambda t, y: np.array([y[1], rhs_expr(prm, t, y[0], y[1])])  # noqa: E731
    errs = [abs(ode.solve(f, 1.0, [1.0, -1.0], 3.0, fixed_step=h).y[-1, 0] - 1 / 3) for h in (0.1, 0.05, 0.025)]
    assert errs[0] / errs[1] >= 8 and errs[1] / errs[2] >= 8
