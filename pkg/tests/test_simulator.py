import csv

import numpy as np
import pytest
import scipy.linalg as sla

from avgctrl.certificate import build_certificate
from avgctrl.graph import validate_pattern
from avgctrl.reduction import reduce
from avgctrl.simulator import (
    DISCLAIMER,
    ControlSignal,
    SingularGramian,
    averaged_gramian,
    discretize,
    free_average,
    impulse_response,
    simulate,
    synthesize_control,
    verify_target,
    write_trajectory_csv,
)
from avgctrl.verification import PolynomialEnsemble, oracle_sample

from conftest import FIG1

ONE = PolynomialEnsemble(1, 0, {}, {1: (1,)})
CHAIN = PolynomialEnsemble(2, 0, {(2, 1): (1,)}, {1: (1,)})
STAR_CONST = PolynomialEnsemble(2, 0, {}, {1: (1,), 2: (1,)})


@pytest.fixture(scope="module")
def fig3_ensemble():
    red, _ = reduce(validate_pattern(FIG1))
    return build_certificate(red).ensemble


class TestDiscretize:
    def test_one_node(self):
        de = discretize(ONE, 1)
        assert de.nodes.tolist() == [0.0] and de.weights.tolist() == [1.0]

    def test_two_nodes(self):
        de = discretize(ONE, 2)
        np.testing.assert_allclose(de.nodes, [-1 / np.sqrt(3), 1 / np.sqrt(3)], rtol=1e-15)
        np.testing.assert_allclose(de.weights, [0.5, 0.5], rtol=1e-15)

    def test_constant_ensemble(self):
        de = discretize(CHAIN, 7)
        assert all((de.A[k] == de.A[0]).all() for k in range(7))

    def test_weights_and_compliance(self, fig3_ensemble):
        de = discretize(fig3_ensemble, 16)
        assert (de.weights > 0).all() and abs(de.weights.sum() - 1) < 1e-12
        allowed = np.zeros((9, 9), bool)
        for i, j in fig3_ensemble.a:
            allowed[i - 1, j - 1] = True
        assert not (de.A[:, ~allowed]).any()

    def test_bad_n(self):
        with pytest.raises(ValueError):
            discretize(ONE, 0)


class TestGramian:
    def test_integrator(self):
        de = discretize(ONE, 3)
        W = averaged_gramian(de, 2.0)
        assert W[0, 0] == pytest.approx(2.0, rel=1e-14)

    def test_symmetric_psd(self, fig3_ensemble):
        de = discretize(fig3_ensemble, 16)
        W = averaged_gramian(de, 5.0, 400)
        assert np.allclose(W, W.T, rtol=0, atol=1e-12 * abs(W).max())
        assert np.linalg.eigvalsh(W).min() >= -1e-12

    def test_against_expm_quadrature(self):
        pe = oracle_sample(validate_pattern(FIG1), 1, 3)
        de = discretize(pe, 6)
        T, M = 1.5, 200
        G = impulse_response(de, T, M)
        for m in (0, 37, 200):
            want = de.weights @ np.einsum("kij,kj->ki", sla.expm(de.A * (m * T / M)), de.b)
            np.testing.assert_allclose(G[m], want, rtol=1e-10, atol=1e-12)

    def test_rejects_few_panels(self):
        with pytest.raises(ValueError):
            averaged_gramian(discretize(ONE, 1), 1.0, 100)


class TestSynthesis:
    def test_trivial(self):
        de = discretize(ONE, 4)
        u = synthesize_control(de, [0.0], [2.0], 1.0)
        np.testing.assert_allclose(u.u, 2.0, rtol=1e-12)
        assert u.gramian_condition == pytest.approx(1.0)

    def test_star_is_singular(self):
        with pytest.raises(SingularGramian) as info:
            synthesize_control(discretize(STAR_CONST, 8), [0, 0], [1, 0], 1.0)
        assert info.value.condition > 1e12

    def test_linearity(self, fig3_ensemble):
        de = discretize(fig3_ensemble, 8)
        tgt = np.zeros(9)
        tgt[8] = 1.0
        u1 = synthesize_control(de, np.zeros(9), tgt, 5.0)
        u2 = synthesize_control(de, np.zeros(9), 2 * tgt, 5.0)
        np.testing.assert_allclose(u2.u, 2 * u1.u, rtol=1e-12, atol=1e-12 * abs(u1.u).max())

    def test_matches_gramian_formula_on_well_conditioned_system(self):
        # for a benign system the nodal values approach g(T-t)^T W^-1 delta
        de = discretize(CHAIN, 4)
        T, tgt = 1.0, np.array([1.0, -0.5])
        u = synthesize_control(de, np.zeros(2), tgt, T, M=2000)
        W = averaged_gramian(de, T, 2000)
        G = impulse_response(de, T, 2000)[::-1]
        ref = G @ np.linalg.solve(W, tgt)
        np.testing.assert_allclose(u.u, ref, rtol=1e-5, atol=1e-5)

    def test_nonzero_initial_state(self):
        de = discretize(CHAIN, 4)
        x0, tgt = np.array([0.3, -1.0]), np.array([1.0, 2.0])
        u = synthesize_control(de, x0, tgt, 2.0)
        res = simulate(de, u, x0, target=tgt)
        assert res.terminal_error < 1e-9

    def test_validation(self):
        de = discretize(ONE, 2)
        with pytest.raises(ValueError):
            synthesize_control(de, [0.0], [1.0, 2.0], 1.0)
        with pytest.raises(ValueError):
            synthesize_control(de, [0.0], [1.0], 0.0)


class TestSimulate:
    def test_zero_input_zero_dynamics(self):
        de = discretize(PolynomialEnsemble(1, 0, {}, {1: (1,)}), 3)
        u = ControlSignal(np.linspace(0, 1, 11), np.zeros(11))
        res = simulate(de, u, [0.7])
        assert np.allclose(res.x, 0.7)

    def test_integrates_constant_input(self):
        de = discretize(ONE, 1)
        u = ControlSignal(np.linspace(0, 1, 201), np.full(201, 2.0))
        res = simulate(de, u, [0.0])
        assert abs(res.terminal[0] - 2.0) <= 1e-9

    def test_average_is_weighted_sum(self, fig3_ensemble):
        de = discretize(fig3_ensemble, 8)
        u = ControlSignal(np.linspace(0, 1, 201), np.sin(np.linspace(0, 3, 201)))
        res = simulate(de, u, np.ones(9))
        np.testing.assert_allclose(res.xbar, np.einsum("k,mki->mi", de.weights, res.x), atol=1e-12)

    def test_free_average(self):
        pe = oracle_sample(validate_pattern(FIG1), 1, 8)
        de = discretize(pe, 5)
        x0 = np.linspace(-1, 1, 9)
        u = ControlSignal(np.linspace(0, 0.5, 1001), np.zeros(1001))
        res = simulate(de, u, x0)
        np.testing.assert_allclose(res.terminal, free_average(de, x0, 0.5), rtol=1e-9, atol=1e-11)

    def test_superposition(self):
        pe = oracle_sample(validate_pattern(FIG1), 1, 8)
        de = discretize(pe, 5)
        x0 = np.full(9, 0.2)
        t = np.linspace(0, 1, 401)
        u1, u2 = ControlSignal(t, np.cos(3 * t)), ControlSignal(t, t ** 2)
        x1 = simulate(de, u1, x0).terminal
        x2 = simulate(de, u2, x0).terminal
        x12 = simulate(de, ControlSignal(t, u1.u + u2.u), x0).terminal
        np.testing.assert_allclose(x12, x1 + x2 - free_average(de, x0, 1.0), rtol=1e-9, atol=1e-9)

    def test_horizon_mismatch(self):
        de = discretize(ONE, 1)
        with pytest.raises(ValueError):
            simulate(de, ControlSignal(np.linspace(0, 1, 11), np.zeros(11)), [0.0], T=2.0)


@pytest.fixture(scope="module")
def runs(fig3_ensemble):
    tgt = np.zeros(9)
    tgt[8] = 1.0
    out = {}
    for N in (8, 16, 32, 64):
        de = discretize(fig3_ensemble, N)
        u = synthesize_control(de, np.zeros(9), tgt, 5.0)
        out[N] = (u, simulate(de, u, np.zeros(9), target=tgt))
    return tgt, out


class TestEndToEnd:
    def test_fig3_reaches_target(self, runs):
        tgt, out = runs
        ok, rep = verify_target(out[64][1], tgt, 1e-6)
        assert ok and rep["terminal_error"] <= 1e-6
        assert rep["disclaimer"] == DISCLAIMER

    def test_refinement(self, runs):
        _, out = runs
        errs = [out[N][1].terminal_error for N in (8, 16, 32, 64)]
        assert all(b <= 2 * a for a, b in zip(errs, errs[1:]))

    def test_csv(self, runs, tmp_path):
        _, out = runs
        res = out[64][1]
        path = tmp_path / "traj.csv"
        write_trajectory_csv(res, path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t"] + [f"xbar_{i}" for i in range(1, 10)] + ["u"]
        assert len(rows) == len(res.t) + 1
        assert float(rows[-1][9]) == pytest.approx(res.terminal[8], rel=1e-15)


class TestVerifyTarget:
    def _result(self, end):
        de = discretize(ONE, 1)
        u = ControlSignal(np.linspace(0, 1, 11), np.full(11, end))
        return simulate(de, u, [0.0])

    def test_hit(self):
        ok, _ = verify_target(self._result(2.0), [2.0], 1e-6)
        assert ok

    def test_miss(self):
        ok, rep = verify_target(self._result(2.001), [2.0], 1e-6)
        assert not ok and rep["terminal_error"] == pytest.approx(1e-3, rel=1e-6)
