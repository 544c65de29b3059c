import numpy as np
import pytest

from twinwell.operators import (
    SITE_A,
    SITE_B,
    SITE_C,
    SITE_D,
    ModeMonomial,
    ModeVector,
    NormalPoly,
    annihilation,
    beam_splitter,
    bilinear,
    creation,
    number_operator,
    raising_bilinear,
    spin_operators,
)


def poly_close(a: NormalPoly, b: NormalPoly, tol=1e-14) -> bool:
    keys = set(a.terms) | set(b.terms)
    return all(abs(a.terms.get(k, 0j) - b.terms.get(k, 0j)) <= tol for k in keys)


def fock_matrix(poly: NormalPoly, cutoff=4) -> np.ndarray:
    """Dense matrix of a poly on a small four-mode Fock space (oracle)."""
    dim = cutoff + 1
    ladder = np.diag(np.sqrt(np.arange(1, dim)), 1)  # annihilation
    eye = np.eye(dim)

    def op_for(mode, dag):
        mats = [eye] * 4
        mats[mode] = ladder.T if dag else ladder
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    total = np.zeros((dim**4, dim**4), dtype=complex)
    for key, c in poly.terms.items():
        term = np.eye(dim**4, dtype=complex)
        for mode in range(4):
            for _ in range(key[mode]):
                term = term @ op_for(mode, True)
        for mode in range(4):
            for _ in range(key[4 + mode]):
                term = term @ op_for(mode, False)
        total += c * term
    return total


class TestNormalOrdering:
    def test_commutator(self):
        # a a† = a† a + 1 after normal ordering
        got = annihilation(0) * creation(0)
        want = creation(0) * annihilation(0) + NormalPoly.constant(1.0)
        assert poly_close(got, want)

    def test_product_against_fock_matrices(self):
        rng = np.random.default_rng(5)
        for _ in range(6):
            keys = [
                tuple(rng.integers(0, 2, size=8)),
                tuple(rng.integers(0, 2, size=8)),
            ]
            a = NormalPoly({keys[0]: 1.0 + 0.3j})
            b = NormalPoly({keys[1]: 0.7 - 0.1j})
            lhs = fock_matrix(a * b, cutoff=3)
            rhs = fock_matrix(a, cutoff=3) @ fock_matrix(b, cutoff=3)
            # normal ordering only moves population within the cutoff for
            # the probed subspace; compare on the lower block
            n = 3**4
            assert np.allclose(lhs[:n, :n], rhs[:n, :n], atol=1e-10)

    def test_dagger(self):
        p = NormalPoly({(1, 0, 0, 0, 0, 1, 0, 0): 2.0 + 1j})
        pd = p.dagger()
        assert pd.terms == {(0, 1, 0, 0, 1, 0, 0, 0): 2.0 - 1j}
        assert poly_close(p.dagger().dagger(), p)

    def test_expectation_uses_source(self):
        p = NormalPoly({(0,) * 8: 2.0, (1, 0, 0, 0, 1, 0, 0, 0): 3.0})
        val = p.expectation(lambda key: 5.0 if sum(key) else 1.0)
        assert val == pytest.approx(2.0 + 15.0)


class TestBeamSplitter:
    def test_vacuum_first_moments(self):
        # all first moments zero in, zero out: linear map with no offset
        c, d = beam_splitter(SITE_A[0], SITE_B[0])
        for mv in (c, d):
            poly = bilinear(ModeVector((1, 0, 0, 0), mv.nhalf), mv)
            assert all(sum(k) == 2 for k in poly.terms)

    def test_coherent_vacuum_split(self):
        # a coherent alpha, b vacuum: <c> = alpha/sqrt2, <d> = i alpha/sqrt2
        alpha = 1.7 - 0.4j

        def source(key):
            # coherent state in a1 only: <a1†^p a1^q> = conj(alpha)^p alpha^q
            if any(key[1:4]) or any(key[5:8]):
                return 0.0 + 0j
            return alpha.conjugate() ** key[0] * alpha ** key[4]

        c1, d1 = SITE_C[0], SITE_D[0]
        got_c = sum(
            (complex(n) / np.sqrt(2)) * source((0, 0, 0, 0) + tuple(e))
            for n, e in zip(c1.num, np.eye(4, dtype=int))
        )
        got_d = sum(
            (complex(n) / np.sqrt(2)) * source((0, 0, 0, 0) + tuple(e))
            for n, e in zip(d1.num, np.eye(4, dtype=int))
        )
        assert got_c == pytest.approx(alpha / np.sqrt(2))
        assert got_d == pytest.approx(1j * alpha / np.sqrt(2))

    def test_number_conservation_identity(self):
        # c†c + d†d == a†a + b†b as an operator identity
        lhs = number_operator(SITE_C) + number_operator(SITE_D)
        rhs = number_operator(SITE_A) + number_operator(SITE_B)
        assert poly_close(lhs, rhs)

    def test_mixed_normalization_rejected(self):
        with pytest.raises(ValueError):
            beam_splitter(SITE_A[0], SITE_C[0])
        with pytest.raises(ValueError):
            bilinear(SITE_A[0], SITE_C[0])


class TestSpinOperators:
    def test_hermiticity(self):
        pf = np.exp(0.37j)
        for site in (SITE_A, SITE_B, SITE_C, SITE_D):
            jx, jy, jz = spin_operators(site, pf)
            for op in (jx, jy, jz):
                assert poly_close(op, op.dagger())

    def test_decomposition_identity(self):
        # J_C^i - g J_D^i == g- (J_A^i + J_B^i) + g+ K^i  for i in {Z, X}
        from twinwell.criteria import _kx_poly, _kz_poly

        pf = np.exp(-0.81j)
        jax_, _, jaz = spin_operators(SITE_A, pf)
        jbx, _, jbz = spin_operators(SITE_B, pf)
        jcx, _, jcz = spin_operators(SITE_C, pf)
        jdx, _, jdz = spin_operators(SITE_D, pf)
        for g in (-0.3, 0.0, 0.5, 1.0, 1.7):
            gm, gp = 0.5 * (1 - g), 0.5 * (1 + g)
            lhs_z = jcz - g * jdz
            rhs_z = gm * (jaz + jbz) + gp * _kz_poly()
            assert poly_close(lhs_z, rhs_z)
            lhs_x = jcx - g * jdx
            rhs_x = gm * (jax_ + jbx) + gp * _kx_poly(complex(pf))
            assert poly_close(lhs_x, rhs_x)

    def test_raising_bilinear_order(self):
        assert raising_bilinear(SITE_A).terms == {(0, 1, 0, 0, 1, 0, 0, 0): 1.0 + 0j}


class TestModeMonomial:
    def test_constructors_and_dagger(self):
        m = ModeMonomial.site_a(1, 2, 0, 1)
        assert m.key == (1, 2, 0, 0, 0, 1, 0, 0)
        assert m.order == 4
        assert m.dagger().key == (0, 1, 0, 0, 1, 2, 0, 0)
        c = ModeMonomial.cross((1, 0, 0, 1), (0, 1, 1, 0))
        a_part, b_part = c.site_parts()
        assert a_part == (1, 0, 0, 1) and b_part == (0, 1, 1, 0)
