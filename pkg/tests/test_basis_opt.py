import numpy as np
import pytest
import scipy.optimize

from cohere import basis_opt, measures, qmat
from cohere.basis_opt import OptimizerConfig
from cohere.qmat import PAULI_X, dagger
from cohere.sampling import SeededStream, haar_unitaries, haar_unitary, random_density, random_pure


def l1_batch(rho, us):
    r = us @ rho @ us.conj().transpose(0, 2, 1)
    return np.sum(np.abs(r), axis=(1, 2)) - np.sum(np.abs(np.diagonal(r, axis1=1, axis2=2)), axis=1)


def qubit_grid_oracle(rho, steps=721):
    """max over U = Rz(phi) Ry(theta) of the off-diagonal l1 sum; phases are irrelevant."""
    th, ph = np.meshgrid(np.linspace(0, np.pi, steps), np.linspace(0, 2 * np.pi, steps))
    th, ph = th.ravel(), ph.ravel()
    c, s = np.cos(th / 2), np.sin(th / 2)
    us = np.zeros((th.size, 2, 2), complex)
    us[:, 0, 0], us[:, 0, 1] = c * np.exp(-0.5j * ph), -s * np.exp(-0.5j * ph)
    us[:, 1, 0], us[:, 1, 1] = s * np.exp(0.5j * ph), c * np.exp(0.5j * ph)
    return l1_batch(rho, us).max()


def test_params_zero_is_identity():
    for n in (1, 2, 4):
        np.testing.assert_allclose(basis_opt.unitary_from_params(np.zeros(n * n)), np.eye(n), atol=1e-15)


def test_params_qubit_exponential():
    theta = [0, 0, np.pi / 2, 0]  # H = (pi/2) sigma_x
    np.testing.assert_allclose(basis_opt.hermitian_from_params(theta), np.pi / 2 * PAULI_X)
    np.testing.assert_allclose(basis_opt.unitary_from_params(theta), 1j * PAULI_X, atol=1e-12)


def test_params_any_is_unitary():
    rng = np.random.default_rng(1)
    for n in range(1, 6):
        u = basis_opt.unitary_from_params(rng.normal(scale=3, size=n * n))
        assert np.max(np.abs(dagger(u) @ u - np.eye(n))) <= 1e-10


def test_params_wrong_count():
    with pytest.raises(qmat.PreconditionError):
        basis_opt.unitary_from_params(np.zeros(5))


def test_params_from_unitary_round_trip(stream):
    u = haar_unitary(3, stream)
    np.testing.assert_allclose(basis_opt.unitary_from_params(basis_opt.params_from_unitary(u)), u, atol=1e-10)


def test_maximally_mixed_gives_zero():
    res = basis_opt.maximize_over_basis(np.eye(3) / 3, "l1", OptimizerConfig(restarts=2))
    assert res.value == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("rho,expected", [
    (np.diag([0.75, 0.25]), 0.5),
    (np.diag([1.0, 0.0]), 1.0),
])
def test_qubit_examples_match_grid_oracle(rho, expected):
    grid = qubit_grid_oracle(rho)
    assert grid == pytest.approx(expected, abs=1e-4)
    res = basis_opt.maximize_over_basis(rho, "l1", OptimizerConfig(restarts=4))
    assert res.value == pytest.approx(expected, abs=1e-6)


def test_grid_oracle_agrees_with_bloch_radius(stream):
    for _ in range(5):
        rho = random_density(2, None, stream)
        assert qubit_grid_oracle(rho) == pytest.approx(basis_opt.bloch_radius_c1(rho), abs=1e-4)


def test_c1_uniform_qutrit_brute_force():
    psi = np.ones(3) / np.sqrt(3)
    rho = np.outer(psi, psi)
    # oracle: best of 10^6 Haar samples, then Nelder-Mead on Euler-free exp chart
    st = SeededStream(555)
    best_val, best_u = -1.0, None
    for _ in range(10):
        us = haar_unitaries(3, 100_000, st)
        vals = l1_batch(rho, us)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_u = vals[i], us[i]
    assert 1.8 < best_val <= 2 + 1e-12

    def neg(theta):
        u = scipy.linalg.expm(1j * basis_opt.hermitian_from_params(theta)) @ best_u
        return -l1_batch(rho, u[None])[0]

    ref = scipy.optimize.minimize(neg, np.zeros(9), method="Nelder-Mead",
                                  options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
    assert -ref.fun == pytest.approx(2.0, abs=1e-6)
    assert basis_opt.c1(rho, OptimizerConfig(restarts=4)) == pytest.approx(2.0, abs=1e-6)


def test_c1_examples():
    assert basis_opt.c1(np.eye(2) / 2, OptimizerConfig(restarts=2)) == pytest.approx(0, abs=1e-12)
    assert basis_opt.c1(random_pure(2, 3), OptimizerConfig(restarts=2)) == pytest.approx(1, abs=1e-6)


def test_qubit_c1_oracle_sweep():
    st = SeededStream(600)
    for _ in range(30):
        rho = random_density(2, None, st)
        cfg = OptimizerConfig(restarts=3, stream=st)
        assert abs(basis_opt.c1(rho, cfg) - np.sqrt(2 * qmat.purity(rho) - 1)) <= 1e-6


def test_result_consistency_and_monotone_trace(stream):
    rho = random_density(3, None, stream)
    res = basis_opt.maximize_over_basis(rho, "l1", OptimizerConfig(restarts=3, stream=stream))
    assert res.value == pytest.approx(measures.basis_coherence_l1(rho, res.unitary), abs=1e-10)
    assert all(b >= a for a, b in zip(res.trace, res.trace[1:]))
    uni = measures.basis_coherence_l1(rho, measures.uniformizing_unitary(rho))
    assert res.value >= uni - 1e-12


def test_restart_determinism():
    rho = random_density(3, None, SeededStream(7))
    a = basis_opt.maximize_over_basis(rho, "l1", OptimizerConfig(restarts=3, stream=SeededStream(8)))
    b = basis_opt.maximize_over_basis(rho, "l1", OptimizerConfig(restarts=3, stream=SeededStream(8)))
    assert a.value == b.value and a.restart == b.restart and a.iterations == b.iterations
    assert a.unitary.tobytes() == b.unitary.tobytes()


def test_non_convergence_reported(stream):
    rho = random_density(3, None, stream)
    res = basis_opt.maximize_over_basis(rho, "l1_distance",
                                        OptimizerConfig(restarts=1, max_iters=1, stream=stream))
    assert res.iterations == 1
    assert res.value >= 0


def test_c1_unitary_invariance():
    st = SeededStream(601)
    for _ in range(10):
        rho = random_density(2, None, st)
        u = haar_unitary(2, st)
        a = basis_opt.c1(rho, OptimizerConfig(restarts=3))
        b = basis_opt.c1(u @ rho @ dagger(u), OptimizerConfig(restarts=3))
        assert abs(a - b) <= 1e-5


def test_optimizer_never_beats_closed_forms(stream):
    for _ in range(5):
        rho = random_density(3, None, stream)
        cfg = OptimizerConfig(restarts=2, max_iters=200, stream=stream)
        assert basis_opt.maximize_over_basis(rho, "l2", cfg).value <= measures.c2(rho) + 1e-9
        assert basis_opt.maximize_over_basis(rho, "re", cfg).value <= measures.c_re(rho) + 1e-9


def test_validate_closed_forms(stream):
    rep = basis_opt.validate_closed_forms(np.diag([0.75, 0.25]), 200,
                                          OptimizerConfig(restarts=3, max_iters=500, stream=stream))
    assert rep["re"].optimized == pytest.approx(0.188721875541, abs=1e-6)
    for chk in rep.values():
        assert -1e-9 <= chk.gap
        assert chk.uniformizer_value == pytest.approx(chk.closed_form, abs=1e-9)
    qutrit = random_density(3, None, stream)
    rep = basis_opt.validate_closed_forms(qutrit, 500, OptimizerConfig(restarts=1, max_iters=50, stream=stream))
    assert rep["l2"].sampled_max <= measures.c2(qutrit) + 1e-9


def test_closed_form_violation_carries_witness():
    err = basis_opt.ClosedFormViolation("l2", 1.0, 0.5, np.eye(2))
    assert isinstance(err, AssertionError)
    np.testing.assert_array_equal(err.witness, np.eye(2))


def test_c1_tilde_reported_alongside(stream):
    rho = random_density(3, None, stream)
    cfg = OptimizerConfig(restarts=3, stream=stream)
    # entrywise distance includes the diagonal, so it can only be larger
    assert basis_opt.c1_tilde(rho, cfg) >= basis_opt.c1(rho, cfg) - 1e-9
