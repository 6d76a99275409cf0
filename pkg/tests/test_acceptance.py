"""Acceptance criteria at the default truncation ``l_max = 30``.

Each test prints one ``PASS``/``FAIL`` line with the measured values, then
asserts.  Tolerances are pinned here and are never loosened.
"""
import numpy as np
import pytest

from gmsphere import dirac, eigen
from gmsphere.cli import RunConfig, run
from gmsphere.operators import GmParams

L_MAX, BUFFER, BUFFER_EXP = 30, 2, 10

TOL_ALGEBRA = 1e-10
TOL_SCAN_AT = 1e-10
FLOOR_SCAN_AWAY = 1e-3
TOL_GAMMA = 1e-9
TOL_ANOMALY_C = 1e-6
TOL_ANOMALY_POINT = 1e-8
TOL_CASIMIR = 1e-10
TOL_ROTATION = 1e-10
BOOST_RATIO, BOOST_WINDOW = 8.0, 0.5
BOOST_THIRD_ORDER_RTOL = 0.1
TOL_HERMITIAN = 1e-11
FLOOR_NONHERMITIAN = 1e-3
TOL_EIGEN = 1e-10
TOL_OVERLAP = 1e-8
TOL_CROSS_ROUTE = 1e-10
CROSS_ROUTE_LMAX = 12


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        return ok

    return emit


def test_c01_fundamental_algebra(alg30, verdict):
    worst = {}
    for label, a, b in dirac.LITERATURE:
        xx, xp, pp = dirac.fundamental_residuals(alg30, a, b, BUFFER)
        worst[(label, a, b)] = max(xx, xp, pp)
    top = max(worst.values())
    ok = verdict(1, "fundamental commutators, literature rows", top < TOL_ALGEBRA,
                 f"max residual {top:.2e} < {TOL_ALGEBRA:g}")
    assert ok, worst


def test_c02_uniqueness_scan(alg30, verdict):
    s = dirac.scan_compatibility((-1.0, 3.0), (-1.0, 1.0), (21, 11), L_MAX, BUFFER, alg=alg30)
    at = np.isclose(s.alphas[:, None], 1.0) & np.isclose(s.betas[None, :], 0.0)
    at_val = float(s.combined[at][0])
    away = float(s.combined[~at].min())
    ok = at_val < TOL_SCAN_AT and away > FLOOR_SCAN_AWAY and s.argmin == (1.0, 0.0)
    verdict(2, "uniqueness scan 21x11", ok,
            f"R1+R2 at (1,0) = {at_val:.2e}, min elsewhere = {away:.3e}, argmin = {s.argmin}")
    assert ok


def test_c03_gamma_relation(alg30, verdict):
    rng = np.random.default_rng(2026)
    pairs = [(rng.uniform(-1, 3), rng.uniform(-1, 1)) for _ in range(10)]
    res = [dirac.check_gamma(a, b, L_MAX, BUFFER, alg=alg30).residual for a, b in pairs]
    ok = verdict(3, "sum p^2 = L^2 + gamma hbar^2, 10 random pairs", max(res) < TOL_GAMMA,
                 f"max residual {max(res):.2e} < {TOL_GAMMA:g}")
    assert ok


def test_c04_ptheta_anomaly(verdict):
    pointwise, constant = dirac.check_ptheta_anomaly()
    fitted = constant.values["fitted_c"]
    ok = pointwise.residual < TOL_ANOMALY_POINT and constant.residual < TOL_ANOMALY_C
    verdict(4, "p_theta anomaly constant", ok,
            f"c = {', '.join(f'{k}:{v[0]:.12f}' for k, v in fitted.items())}; "
            f"rel err {constant.residual:.1e}, pointwise {pointwise.residual:.1e}")
    assert ok


def test_c05_casimirs(alg30, verdict):
    pl, lp, c1 = dirac.check_casimirs(L_MAX, BUFFER, alg=alg30)
    lam = c1.values["measured"][0]
    small = run(RunConfig(l_max=8, suites=("casimir",)))
    tabulated = small["reference_values"][0]
    ok = (pl.residual < TOL_CASIMIR and lp.residual < TOL_CASIMIR
          and c1.values["off_scalar"] < TOL_CASIMIR and abs(lam - (-1.0)) < TOL_CASIMIR
          and tabulated["published"] == -0.25 and not tabulated["agrees_with_published"])
    verdict(5, "Casimirs", ok,
            f"p.L {pl.residual:.1e}, L.p {lp.residual:.1e}, "
            f"C1 off-scalar {c1.values['off_scalar']:.1e}, C1 = {lam:.12f} hbar^2 "
            f"(independent -1, published -1/4 tabulated as disagreeing)")
    assert ok


def test_c06_rotation_conjugation(alg30, verdict):
    rx, ry = dirac.check_rotation_conjugation(L_MAX, BUFFER, alg=alg30)
    ok = verdict(6, "rotation conjugation", max(rx.residual, ry.residual) < TOL_ROTATION,
                 f"p_x {rx.residual:.1e}, p_y {ry.residual:.1e}")
    assert ok


def test_c07_boost_composition(alg30, verdict):
    r = dirac.check_boost_composition(1e-2, 1e-2, L_MAX, BUFFER_EXP, alg=alg30)
    v = r.values
    ratio = v["ratio"]
    third = abs(v["residual"] / v["third_order_prediction"] - 1.0)
    ok = abs(ratio - BOOST_RATIO) <= BOOST_WINDOW and third < BOOST_THIRD_ORDER_RTOL
    verdict(7, "boost composition", ok,
            f"residual {v['residual']:.3e} (third-order term {v['third_order_prediction']:.3e}), "
            f"halving ratio {ratio:.3f}")
    assert ok


def test_c08_hermiticity_dichotomy(alg30, verdict):
    phys = max(dirac.hermiticity_defects(alg30, 1.0, 0.0, BUFFER))
    others = {(a, b): max(dirac.hermiticity_defects(alg30, a, b, BUFFER))
              for a, b in dirac.HERMITICITY_CONTRAST}
    low = [k for k, d in others.items() if not d > FLOOR_NONHERMITIAN]
    ok = phys < TOL_HERMITIAN and not low
    verdict(8, "hermiticity dichotomy", ok,
            f"(1,0) {phys:.1e}; " + ", ".join(f"{k} {d:.2e}" for k, d in others.items())
            + (f"; at or below floor: {low}" if low else ""))
    assert ok, f"defect not above {FLOOR_NONHERMITIAN:g} for {low}"


def test_c09_pz_eigenfamily(verdict):
    res, overlap, diag, _ = eigen.check_eigen(n_random=20, seed=2026)
    ok = res.residual < TOL_EIGEN and overlap.residual < TOL_OVERLAP and diag.residual < TOL_OVERLAP
    verdict(9, "p_z eigenfamily", ok,
            f"eigen residual {res.residual:.1e}, overlap {overlap.residual:.1e}, "
            f"diagonal {diag.residual:.1e}")
    assert ok


def test_c10_cross_route(verdict):
    r = dirac.check_cross_route(CROSS_ROUTE_LMAX, BUFFER, GmParams())
    ok = verdict(10, "nested application vs matrix commutators", r.residual < TOL_CROSS_ROUTE,
                 f"{r.params['pairs']} pairs, max entry diff {r.residual:.1e}")
    assert ok
