"""Geometric discord: closed form, special-class reduction, brute-force oracle."""

import math

import numpy as np
import pytest

from qrsp.qstate import BlochRep, TwoQubitState, from_bloch, to_bloch
from qrsp.states import (
    bell,
    maximally_mixed,
    mix,
    random_state,
    random_zero_discord,
    rho_b,
    werner,
    zero_discord,
)
from qrsp.discord import (
    NotInSpecialClass,
    check_special_class,
    classical_family_bloch,
    discord_special_form,
    geometric_discord,
    geometric_discord_oracle,
    is_zero_discord,
)


def _parallel_case_state():
    # a = 0.4 e_z along the top singular direction of E = diag(-0.1, -0.1, 0.6)
    p00 = np.zeros((4, 4), dtype=complex)
    p00[0, 0] = 1.0
    p11 = np.zeros((4, 4), dtype=complex)
    p11[3, 3] = 1.0
    return mix([(0.05, bell("psi_plus")), (0.15, bell("psi_minus")),
                (0.6, TwoQubitState(p00)), (0.2, TwoQubitState(p11))])


def _skew_state():
    # a = 0.4 e_x is orthogonal to the top singular direction e_y of E
    return from_bloch(BlochRep(a=np.array([0.4, 0.0, 0.0]), b=np.zeros(3),
                               E=np.diag([0.0, 0.8, 0.0])))


def test_closed_form_werner_grid():
    for lam in np.linspace(0.0, 1.0, 21):
        report = geometric_discord(werner(lam))
        assert abs(report.value - lam**2) < 1e-12
        assert abs(report.k_max - lam**2) < 1e-12


def test_closed_form_rho_b_grid():
    for k in np.linspace(-1.0 / 3.0, 1.0, 12):
        for t in np.linspace(-(1 - k) / 2, (1 - k) / 2, 9):
            report = geometric_discord(rho_b(k, t))
            assert abs(report.value - k**2) < 1e-12
            assert abs(report.k_max - (k**2 + t**2)) < 1e-12


def test_closed_form_reference_values():
    assert abs(geometric_discord(werner(1.0 / 3.0)).value - 1.0 / 9.0) < 1e-12
    assert abs(geometric_discord(rho_b(0.2, 0.4)).value - 0.04) < 1e-12
    for kind in ("psi_plus", "psi_minus", "phi_plus", "phi_minus"):
        assert abs(geometric_discord(bell(kind)).value - 1.0) < 1e-12
    assert geometric_discord(maximally_mixed()).value == 0.0


def test_special_class_zero_a():
    report = geometric_discord(werner(0.7))
    assert report.special_class
    assert report.kappa == 0.0


def test_special_class_isotropic():
    flag, kappa = check_special_class(rho_b(0.2, 0.4))
    assert flag
    assert abs(kappa - 0.4) < 1e-12


def test_special_class_parallel():
    state = _parallel_case_state()
    rep = to_bloch(state)
    assert np.abs(rep.a - np.array([0.0, 0.0, 0.4])).max() < 1e-12
    assert np.abs(rep.E - np.diag([-0.1, -0.1, 0.6])).max() < 1e-12
    flag, kappa = check_special_class(state)
    assert flag
    assert abs(kappa - 0.4) < 1e-12
    assert abs(geometric_discord(state).value - 0.01) < 1e-12
    assert abs(discord_special_form(state) - 0.01) < 1e-12


def test_special_form_matches_closed_form_in_class():
    cases = [werner(0.3), werner(0.9), rho_b(0.2, 0.4), rho_b(-0.25, 0.1),
             _parallel_case_state(), bell("phi_minus")]
    for state in cases:
        assert abs(discord_special_form(state)
                   - geometric_discord(state).value) < 1e-12


def test_special_form_rejected_outside_class():
    state = _skew_state()
    report = geometric_discord(state)
    assert not report.special_class
    assert math.isnan(report.kappa)
    assert abs(report.value - 0.08) < 1e-12
    with pytest.raises(NotInSpecialClass):
        discord_special_form(state)


def test_value_stays_in_unit_interval():
    for seed in range(200):
        report = geometric_discord(random_state(seed, rank=1 + seed % 4))
        assert 0.0 <= report.value <= 1.0
    # the maximum is reached exactly on maximally entangled states
    for kind in ("psi_plus", "psi_minus", "phi_plus", "phi_minus"):
        assert abs(geometric_discord(bell(kind)).value - 1.0) < 1e-12


def test_zero_discord_family_scores_zero():
    for seed in range(50):
        assert geometric_discord(random_zero_discord(seed)).value < 1e-12
        assert is_zero_discord(random_zero_discord(seed))
    # hand-built member with mixed conditional states
    state = zero_discord(0.35, [0, 1, 0], np.diag([0.8, 0.2]), np.eye(2) / 2)
    assert geometric_discord(state).value < 1e-12
    assert not is_zero_discord(werner(0.5))


def test_family_bloch_matches_kron_construction():
    # the oracle's Bloch-coordinate objective must agree with the 4x4 definition
    rng = np.random.default_rng(9)
    rho = random_state(21)
    rep = to_bloch(rho)
    for _ in range(50):
        x = rng.uniform([0, 0, 0, -1, -1, -1, -1, -1, -1],
                        [1, np.pi, 2 * np.pi, 1, 1, 1, 1, 1, 1])
        a, b, E = classical_family_bloch(x)
        p = x[0]
        st, ct = np.sin(x[1]), np.cos(x[1])
        v = np.array([st * np.cos(x[2]), st * np.sin(x[2]), ct])
        r1, r2 = x[3:6].copy(), x[6:9].copy()
        r1 /= max(1.0, np.linalg.norm(r1))
        r2 /= max(1.0, np.linalg.norm(r2))
        chi = zero_discord(p, v,
                           _qubit(r1), _qubit(r2)).matrix
        chi_rep = to_bloch(TwoQubitState(chi))
        assert np.abs(a[0] - chi_rep.a).max() < 1e-12
        assert np.abs(b[0] - chi_rep.b).max() < 1e-12
        assert np.abs(E[0] - chi_rep.E).max() < 1e-12
        # Bloch-coordinate distance vs matrix distance
        diff = rho.matrix - chi
        direct = 2.0 * np.trace(diff @ diff).real
        bloch = (np.sum((rep.a - a[0])**2) + np.sum((rep.b - b[0])**2)
                 + np.sum((rep.E - E[0])**2)) / 2.0
        assert abs(direct - bloch) < 1e-12


def _qubit(r):
    return 0.5 * np.array([[1 + r[2], r[0] - 1j * r[1]],
                           [r[0] + 1j * r[1], 1 - r[2]]])


def test_family_clips_conditional_vectors_to_ball():
    x = np.array([0.4, np.pi / 2, 0.0, 2.0, 0.0, 0.0, 0.0, -3.0, 0.0])
    a, b, E = classical_family_bloch(x)
    r1 = np.array([1.0, 0.0, 0.0])
    r2 = np.array([0.0, -1.0, 0.0])
    assert np.abs(b[0] - (0.4 * r1 + 0.6 * r2)).max() < 1e-12
    assert np.abs(E[0] - np.outer([1, 0, 0], 0.4 * r1 - 0.6 * r2)).max() < 1e-12


def test_oracle_reference_states():
    for state, expected in [(werner(1.0 / 3.0), 1.0 / 9.0),
                            (rho_b(0.2, 0.4), 0.04)]:
        found = geometric_discord_oracle(state, restarts=50, tol=1e-4, seed=0)
        assert abs(found - expected) < 1e-3
        assert found >= expected - 1e-6


def test_oracle_deterministic():
    state = random_state(4)
    a = geometric_discord_oracle(state, restarts=10, seed=3)
    b = geometric_discord_oracle(state, restarts=10, seed=3)
    assert a == b


def test_oracle_dominates_closed_form():
    # every candidate is a valid classical-quantum state, so the searched
    # minimum can never undercut the analytic one
    for seed in range(20):
        state = random_state(seed, rank=1 + seed % 4)
        closed = geometric_discord(state).value
        found = geometric_discord_oracle(state, restarts=12, seed=seed)
        assert found >= closed - 1e-6


def test_oracle_validates_restarts():
    with pytest.raises(ValueError, match="restarts"):
        geometric_discord_oracle(werner(0.5), restarts=0)
