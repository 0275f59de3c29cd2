import numpy as np
import pytest
from hypothesis import given
from strategies import finite
import hypothesis.strategies as st

from acsix.exterior import (
    DEFINITE,
    LORENTZ12,
    Form,
    basis,
    frame_from_rows,
    pullback,
    standard_frame,
    top_coefficient,
    from_vector,
)
from acsix.stable3form import (
    DEGENERATE_MINUS,
    DEGENERATE_PLUS,
    ELLIPTIC_STRICT,
    HYPERBOLIC_STRICT,
    LAGRANGIAN,
    NORMAL_FORMS,
    NULL,
    OMEGA_STD,
    ORTHOGONAL_MINUS,
    ORTHOGONAL_PLUS,
    PAIR_CASES,
    SPLIT,
    TYPES,
    UNITARY_DEFINITE,
    UNITARY_INDEFINITE,
    DegenerateOmega,
    IncompatiblePair,
    NotPositive,
    NotType2,
    acs_from_stable,
    acs_residuals,
    certificate_residual,
    classify,
    form22,
    hitchin_invariant,
    j_operator,
    j_operator_sparse,
    matrix_of_22,
    normal_pair,
    pair_stabilizer_dimension,
    quasi_integrable_from_pair,
    random_gl6,
    random_three_form,
    sigma_sqrt,
    square_map,
    stabilizer_dimension,
    symplectic_pair_normal_form,
    unitary_factor,
)

PHI0 = basis(1, 2, 3) + basis(4, 5, 6)
# phi_+ = Re(zeta^123) for the standard frame zeta^k = e^{2k-1} + i e^{2k}
PHI_PLUS = basis(1, 3, 5) - basis(1, 4, 6) - basis(2, 3, 6) - basis(2, 4, 5)
E = basis

real_vectors20 = st.lists(finite, min_size=20, max_size=20).map(lambda v: from_vector(np.array(v, dtype=complex), 3))


class TestJOperator:
    def test_split_golden(self):
        assert np.allclose(j_operator(PHI0), np.diag([1, 1, 1, -1, -1, -1]), atol=0)

    def test_lambda_values(self):
        assert hitchin_invariant(PHI0) == 1
        # in the (zeta, zeta-bar) coframe phi_+ = (f123 + f456)/2 with det = -8i,
        # so lambda = (1/16)(-8i)^2 = -4
        assert hitchin_invariant(PHI_PLUS) == pytest.approx(-4, abs=1e-14)
        assert hitchin_invariant(E(1, 2, 3)) == 0

    def test_decomposable_is_nilpotent_zero(self):
        assert np.max(np.abs(j_operator(E(1, 2, 3)))) == 0

    @given(real_vectors20)
    def test_dense_matches_sparse(self, phi):
        scale = max(1.0, phi.norm() ** 2)
        assert np.max(np.abs(j_operator(phi) - j_operator_sparse(phi))) <= 1e-12 * scale

    @given(real_vectors20)
    def test_traceless_and_square(self, phi):
        K = j_operator(phi)
        lam = hitchin_invariant(phi)
        scale = max(1.0, phi.norm() ** 4)
        assert abs(np.trace(K)) <= 1e-11 * max(1.0, phi.norm() ** 2)
        assert np.max(np.abs(K @ K - lam * np.eye(6))) <= 1e-10 * scale

    def test_equivariance(self, rng):
        for _ in range(50):
            phi, g = random_three_form(rng).real, random_gl6(rng)
            d = np.linalg.det(g)
            K = j_operator(phi)
            K2 = j_operator(pullback(phi, g))
            assert np.max(np.abs(K2 - d * np.linalg.inv(g) @ K @ g)) <= 1e-9 * np.max(np.abs(K2))
            assert hitchin_invariant(pullback(phi, g)) == pytest.approx(d**2 * hitchin_invariant(phi), rel=1e-9)


class TestClassify:
    @pytest.mark.parametrize("kind", TYPES)
    def test_normal_forms(self, kind):
        c = classify(NORMAL_FORMS[kind])
        assert c.kind == kind and c.residual < 1e-12

    def test_phi_plus_is_complex_type(self):
        assert classify(PHI_PLUS).kind == "Type2"

    def test_rank_example(self):
        c = classify(E(1, 2, 5) + E(3, 4, 5))
        assert c.kind == "Type4" and c.residual < 1e-13

    @pytest.mark.parametrize("kind", TYPES[:5])
    def test_gl_invariance(self, rng, kind):
        for _ in range(40):
            g = random_gl6(rng)
            phi = pullback(NORMAL_FORMS[kind], g)
            c = classify(phi)
            assert c.kind == kind
            assert certificate_residual(phi, kind, c.basis) < 1e-8

    @pytest.mark.parametrize("kind,dim", [("Type1", 16), ("Type2", 16), ("Type3", 17), ("Type4", 21),
                                          ("Type5", 26), ("Type6", 36)])
    def test_stabilizer_dimension(self, kind, dim):
        # Type1-3 orbits are open or a hypersurface, Type5 is the cone over Gr(3,6)
        assert stabilizer_dimension(NORMAL_FORMS[kind]) == dim

    def test_generic_is_stable(self, rng):
        kinds = {classify(random_three_form(rng).real).kind for _ in range(100)}
        assert kinds <= {"Type1", "Type2"} and kinds


class TestAcs:
    def test_phi_plus(self):
        res = acs_from_stable(PHI_PLUS)
        expected = E(1, 3, 6) + E(1, 4, 5) + E(2, 3, 5) - E(2, 4, 6)
        assert (res.star_phi - expected).norm() < 1e-13
        assert top_coefficient(PHI_PLUS ^ res.star_phi).real == pytest.approx(4)
        assert all(v < 1e-12 for v in acs_residuals(PHI_PLUS, res).values())

    def test_orientation_flip(self):
        a, b = acs_from_stable(PHI_PLUS, 1), acs_from_stable(PHI_PLUS, -1)
        assert (a.star_phi + b.star_phi).norm() < 1e-13
        assert np.allclose(a.J, -b.J)

    def test_random_type2(self, rng):
        for _ in range(40):
            phi = pullback(PHI_PLUS, random_gl6(rng))
            res = acs_from_stable(phi)
            r = acs_residuals(phi, res)
            assert max(r.values()) < 1e-8 * max(1.0, phi.norm())
            assert (acs_from_stable(res.star_phi).star_phi + phi).norm() < 1e-8 * phi.norm()

    def test_scaling(self):
        a = acs_from_stable(PHI_PLUS)
        b = acs_from_stable(3.0 * PHI_PLUS)
        assert np.allclose(a.J, b.J, atol=1e-13)
        assert (b.star_phi - 3.0 * a.star_phi).norm() < 1e-12

    @pytest.mark.parametrize("kind", ["Type1", "Type3", "Type4", "Type5", "Type6"])
    def test_rejects_other_types(self, kind):
        with pytest.raises(NotType2):
            acs_from_stable(NORMAL_FORMS[kind])

    def test_bad_orientation(self):
        with pytest.raises(ValueError):
            acs_from_stable(PHI_PLUS, 0)


class TestSigma:
    def test_square_map_convention(self, rng):
        # (1/2) form11(h)^2 = form22(adj(h)^T), checked against cofactors
        for _ in range(20):
            h = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            adjT = np.linalg.det(h) * np.linalg.inv(h)
            assert (square_map(h) - form22(adjT.T)).norm() < 1e-11 * max(1.0, np.max(np.abs(h)) ** 2)

    def test_identity_and_lorentz(self):
        assert np.allclose(sigma_sqrt(np.eye(3)), np.eye(3), atol=1e-15)
        D = np.diag([1.0, -1.0, -1.0])
        assert np.allclose(sigma_sqrt(D, LORENTZ12), D, atol=1e-15)

    @pytest.mark.parametrize("branch,signs", [(DEFINITE, [1, 1, 1]), (LORENTZ12, [1, -1, -1])])
    def test_roundtrip(self, rng, branch, signs):
        for _ in range(100):
            U = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
            w = np.array(signs) * rng.uniform(0.3, 3.0, size=3)
            m = U @ np.diag(w) @ U.conj().T
            h = sigma_sqrt(m, branch)
            assert np.max(np.abs(h - h.conj().T)) < 1e-13
            assert (square_map(h) - form22(m)).norm() < 1e-10 * np.max(np.abs(m))
            m2, off = matrix_of_22(form22(m))
            assert np.allclose(m2, m, atol=1e-12) and off < 1e-13

    def test_spread_spectrum_is_inside_cone(self):
        m = np.diag([1e-2, 2e-2, 1e2])
        assert (square_map(sigma_sqrt(m)) - form22(m)).norm() < 1e-12
        D = np.diag([1e2, -1e-2, -3e-2])
        assert (square_map(sigma_sqrt(D, LORENTZ12)) - form22(D)).norm() < 1e-12
        with pytest.raises(NotPositive):
            sigma_sqrt(np.diag([1.0, 1.0, 1e-9]))

    def test_outside_cone(self):
        with pytest.raises(NotPositive):
            sigma_sqrt(np.diag([1.0, 1.0, -1.0]))
        with pytest.raises(NotPositive):
            sigma_sqrt(np.eye(3), LORENTZ12)
        with pytest.raises(NotPositive):
            sigma_sqrt(np.diag([1.0, 1.0, 0.0]))
        with pytest.raises(NotPositive):
            sigma_sqrt(np.array([[1, 1, 0], [0, 1, 0], [0, 0, 1]]))
        with pytest.raises(ValueError):
            sigma_sqrt(np.eye(3), "Nope")

    def test_unitary_factor(self, rng):
        for signs in ([1, 1, 1], [1, -1, -1]):
            U = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
            h = U @ np.diag(np.array(signs) * [2.0, 0.5, 1.5]) @ U.conj().T
            C, S = unitary_factor(h)
            assert list(S) == signs
            assert np.allclose(C.T @ np.diag(S) @ C.conj(), h, atol=1e-13)


def qi_fixture(rng, F, S):
    """(phi, pi, alpha) with phi + i*phi = alpha^123 / F and pi = sum S_k P_k ^ conj(P_k)."""
    alpha = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))) @ standard_frame().matrix()[:3]
    fr = frame_from_rows(alpha)
    phi = (fr.holomorphic_volume() * (1 / F)).real
    z = fr.zeta
    P = [z[1] ^ z[2], z[2] ^ z[0], z[0] ^ z[1]]
    pi = Form()
    for k in range(3):
        pi = pi + S[k] * (P[k] ^ P[k].conj())
    return phi, pi.real, alpha


class TestQuasiIntegrable:
    F = 2 * np.exp(1j * np.pi / 7)

    @pytest.mark.parametrize("S,kind", [([1, 1, 1], ELLIPTIC_STRICT), ([1, -1, -1], HYPERBOLIC_STRICT)])
    def test_recovers_F_with_reference(self, rng, S, kind):
        for _ in range(10):
            phi, pi, alpha = qi_fixture(rng, self.F, S)
            rep = quasi_integrable_from_pair(phi, pi, reference=alpha)
            assert rep.kind == kind
            assert abs(rep.F - self.F) < 1e-8
            assert max(rep.residuals.values()) < 1e-9

    @pytest.mark.parametrize("S", [[1, 1, 1], [1, -1, -1]])
    def test_canonical_frame(self, rng, S):
        phi, pi, _ = qi_fixture(rng, self.F, S)
        rep = quasi_integrable_from_pair(phi, pi)
        assert abs(rep.F - abs(self.F)) < 1e-8
        assert max(rep.residuals.values()) < 1e-9
        assert (2 * (rep.eta ^ rep.eta) - pi).norm() < 1e-9 * pi.norm()

    def test_rejects_non_type2(self):
        with pytest.raises(NotType2):
            quasi_integrable_from_pair(PHI0, form22(np.eye(3)))

    def test_rejects_outside_cones(self):
        with pytest.raises(NotPositive):
            quasi_integrable_from_pair(PHI_PLUS, form22(np.diag([1.0, 1.0, -1.0])).real)
        with pytest.raises(NotPositive):
            quasi_integrable_from_pair(PHI_PLUS, E(1, 2, 3, 4))


RANDOM_PAIR_CASES = [c for c in PAIR_CASES if c != NULL]


def symplectic_gl6(rng):
    """Random g with g^* omega_std = omega_std, built from exp of a Hamiltonian matrix."""
    J = np.block([[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), np.zeros((3, 3))]])
    S = rng.normal(size=(6, 6)) * 0.3
    X = J @ (S + S.T)
    w, V = np.linalg.eig(X)
    return (V @ np.diag(np.exp(w)) @ np.linalg.inv(V)).real


class TestSymplecticPairs:
    @pytest.mark.parametrize("case", PAIR_CASES)
    def test_normal_forms(self, case):
        omega, phi = normal_pair(case)
        c = symplectic_pair_normal_form(omega, phi)
        assert c.case == case and c.residual < 1e-12

    def test_split_modulus(self):
        omega, phi = normal_pair(SPLIT, 2.0)
        c = symplectic_pair_normal_form(omega, phi)
        assert c.case == SPLIT and c.mu == pytest.approx(2.0) and c.residual < 1e-12
        assert c.stabilizer == "SL(3,R)"

    @pytest.mark.parametrize("case", [UNITARY_DEFINITE, UNITARY_INDEFINITE])
    def test_unitary_modulus(self, case):
        omega, phi = normal_pair(case, 0.7)
        c = symplectic_pair_normal_form(omega, phi)
        assert c.case == case and c.mu == pytest.approx(0.7)

    @pytest.mark.parametrize("case", RANDOM_PAIR_CASES)
    def test_gl_invariance(self, rng, case):
        for _ in range(20):
            g = random_gl6(rng)
            omega, phi = normal_pair(case, 1.3)
            w2, p2 = pullback(omega, g), pullback(phi, g)
            c = symplectic_pair_normal_form(w2, p2)
            assert c.case == case
            assert max((pullback(w2, c.basis) - normal_pair(case, c.mu or 1.0)[0]).norm(),
                       (pullback(p2, c.basis) - normal_pair(case, c.mu or 1.0)[1]).norm()) < 1e-7

    def test_omega_pullbacks_preserve_case(self, rng):
        for _ in range(10):
            g = symplectic_gl6(rng)
            assert (pullback(OMEGA_STD, g) - OMEGA_STD).norm() < 1e-9
            omega, phi = normal_pair(SPLIT, 2.0)
            c = symplectic_pair_normal_form(omega, pullback(phi, g))
            assert c.case == SPLIT and c.mu == pytest.approx(2.0, rel=1e-8)

    @pytest.mark.parametrize("case,dim", [(SPLIT, 8), (UNITARY_DEFINITE, 8), (UNITARY_INDEFINITE, 8),
                                          (ORTHOGONAL_PLUS, 8), (ORTHOGONAL_MINUS, 8),
                                          (DEGENERATE_PLUS, 11), (DEGENERATE_MINUS, 11),
                                          (LAGRANGIAN, 14), (NULL, 21)])
    def test_stabilizer_dimensions(self, case, dim):
        assert pair_stabilizer_dimension(*normal_pair(case)) == dim

    def test_degenerate_omega(self):
        with pytest.raises(DegenerateOmega):
            symplectic_pair_normal_form(E(1, 4) + E(2, 5), E(1, 2, 3))

    def test_incompatible(self):
        with pytest.raises(IncompatiblePair):
            symplectic_pair_normal_form(OMEGA_STD, E(1, 2, 4))

    def test_omega_degree_checked(self):
        with pytest.raises(ValueError):
            symplectic_pair_normal_form(E(1, 2, 3), E(1, 2, 3))
