import numpy as np
import pytest

from gmsphere.jets import Jet

T = np.array([0.4, 1.1, 2.3])


def test_variable_and_derivatives():
    t = Jet.variable(T, 4)
    f = t * t * t
    assert np.allclose(f.derivative(1), 3 * T**2)
    assert np.allclose(f.derivative(2), 6 * T)
    assert np.allclose(f.derivative(3), 6.0)
    assert np.allclose(f.derivative(4), 0.0)


def test_trig_and_quotients():
    t = Jet.variable(T, 5)
    cot = np.cos(t) / np.sin(t)
    assert np.allclose(cot.derivative(1), -1 / np.sin(T) ** 2)
    assert np.allclose(cot.derivative(2), 2 * np.cos(T) / np.sin(T) ** 3)
    tan = np.tan(t)
    assert np.allclose(tan.derivative(1), 1 / np.cos(T) ** 2)


def test_exp_log_chain():
    t = Jet.variable(T, 4)
    u = np.log(np.tan(0.5 * t))
    # d/dtheta ln tan(theta/2) = 1/sin(theta)
    assert np.allclose(u.derivative(1), 1 / np.sin(T))
    assert np.allclose(u.derivative(2), -np.cos(T) / np.sin(T) ** 2)
    e = np.exp(np.cos(t))
    assert np.allclose(e.derivative(1), -np.sin(T) * np.exp(np.cos(T)))
    d2 = (np.sin(T) ** 2 - np.cos(T)) * np.exp(np.cos(T))
    assert np.allclose(e.derivative(2), d2)


def test_diff_lowers_order():
    t = Jet.variable(T, 3)
    s = np.sin(t)
    ds = s.diff()
    assert ds.order == 2
    assert np.allclose(ds.value, np.cos(T))
    assert np.allclose(ds.derivative(1), -np.sin(T))
    with pytest.raises(ValueError):
        Jet.constant(1.0, t).diff().diff().diff().diff()


def test_truncation_to_common_order():
    a = Jet.variable(T, 5)
    b = Jet.variable(T, 2)
    assert (a * b).order == 2
    assert (a + b).order == 2


def test_reciprocal_and_power():
    t = Jet.variable(T, 4)
    r = 1.0 / (1.0 + t * t)
    assert np.allclose(r.derivative(1), -2 * T / (1 + T * T) ** 2)
    assert np.allclose((t**3).value, T**3)
