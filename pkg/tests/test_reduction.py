"""Tests for symplectic reduction and pair-adapted decompositions."""

import numpy as np
import pytest

from maslovlab.frames import (
    Frame,
    fredholm_pair_index,
    gap_hat,
    intersect,
    morse_counts,
    orthonormalize,
    subspace_sum,
)
from maslovlab.reduction import (
    check_transitivity,
    complementary_lagrangian,
    composite_coefficients,
    decomposition_from_parts,
    graph_coefficients,
    graph_coefficients_in_bases,
    intersection_form,
    intrinsic_decomposition,
    pair_decomposition,
    reduce_space,
    reduce_subspace,
    reduced_pair,
)
from maslovlab.sampling import (
    perturb_lagrangian,
    random_coisotropic,
    random_isotropic,
    random_lagrangian,
    random_lagrangian_containing,
    random_lagrangian_pair,
    random_symplectic_form,
    rng_from_seed,
)
from maslovlab.symplectic import (
    annihilator,
    classify,
    omega_matrix,
    standard_form,
)


def test_reduce_space_by_full_space_is_identity():
    f = standard_form(2)
    red = reduce_space(f, Frame.full(4))
    assert red.dim == 4
    lam = random_lagrangian(rng_from_seed(1), f)
    img = reduce_subspace(f, Frame.full(4), lam)
    back = Frame(red.representative.matrix @ img.matrix)
    assert gap_hat(back, lam) < 1e-10


def test_reduce_space_by_lagrangian_is_trivial():
    rng = rng_from_seed(2)
    f = random_symplectic_form(rng, 6)
    w = random_lagrangian(rng, f)
    red = reduce_space(f, w)
    assert red.dim == 0
    assert red.induced_form.dim == 0
    other = random_lagrangian(rng, f)
    assert reduce_subspace(f, w, other).dim == 0


def test_reduce_space_rejects_non_coisotropic():
    f = standard_form(2)
    with pytest.raises(ValueError, match="co-isotropic"):
        reduce_space(f, Frame.span([1, 0, 0, 0]))


def test_reduce_c4_explicit():
    f = standard_form(2)
    w = Frame.span([1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0])
    red = reduce_space(f, w)
    assert red.dim == 2
    assert gap_hat(red.representative, Frame.span([1, 0, 0, 0], [0, 0, 1, 0])) < 1e-12
    lam = Frame.span([1, 0, 0, 0], [0, 1, 0, 0])
    img = reduce_subspace(f, w, lam)
    assert img.dim == 1
    assert classify(red.induced_form, img) == "lagrangian"
    e1_coords = red.representative.matrix.conj().T @ np.array([1.0, 0, 0, 0])
    assert gap_hat(img, Frame.span(e1_coords)) < 1e-12


def test_reduction_of_lagrangian_is_lagrangian():
    rng = rng_from_seed(3)
    for dim, codim in ((6, 1), (8, 2), (8, 3)):
        f = random_symplectic_form(rng, dim)
        w = random_coisotropic(rng, f, codim)
        lam = random_lagrangian(rng, f)
        red = reduce_space(f, w)
        img = reduce_subspace(f, w, lam)
        assert img.dim == red.dim // 2
        assert classify(red.induced_form, img) == "lagrangian"


def test_reduction_preserves_isotropic():
    rng = rng_from_seed(4)
    f = random_symplectic_form(rng, 8)
    w = random_coisotropic(rng, f, 2)
    iso = random_isotropic(rng, f, 2)
    red = reduce_space(f, w)
    img = reduce_subspace(f, w, iso)
    assert classify(red.induced_form, img) in ("isotropic", "lagrangian")


def test_quotient_rule_dimensions():
    rng = rng_from_seed(5)
    for dim in (6, 8):
        f = random_symplectic_form(rng, dim)
        for codim in (1, 2, 3):
            w = random_coisotropic(rng, f, codim)
            w_ann = annihilator(f, w)
            mu = random_lagrangian(rng, f)
            assert intersect(w_ann, mu).dim == dim - subspace_sum(w, mu).dim
            seeded = random_lagrangian_containing(rng, f, Frame(w_ann.matrix[:, :1]))
            lhs = intersect(w_ann, seeded).dim
            assert lhs == dim - subspace_sum(w, seeded).dim
            assert lhs >= 1


def test_sandwiched_reductions_form_index0_pairs():
    rng = rng_from_seed(6)
    for dim, k in ((8, 1), (8, 2), (6, 2)):
        f = random_symplectic_form(rng, dim)
        iso = random_isotropic(rng, f, k)
        w = annihilator(f, iso)
        lam = random_lagrangian_containing(rng, f, iso)
        mu = random_lagrangian_containing(rng, f, iso)
        red = reduce_space(f, w)
        lam_red = reduce_subspace(f, w, lam)
        mu_red = reduce_subspace(f, w, mu)
        assert classify(red.induced_form, lam_red) == "lagrangian"
        assert classify(red.induced_form, mu_red) == "lagrangian"
        assert fredholm_pair_index(lam_red, mu_red)[2] == 0


def test_check_transitivity_trivial_cases():
    rng = rng_from_seed(7)
    f = random_symplectic_form(rng, 6)
    w = random_coisotropic(rng, f, 2)
    lam = random_lagrangian(rng, f)
    assert check_transitivity(f, w, w, lam)
    assert check_transitivity(f, w, Frame.full(6), lam)


def test_check_transitivity_nested():
    rng = rng_from_seed(8)
    for _ in range(5):
        f = random_symplectic_form(rng, 6)
        s1 = random_isotropic(rng, f, 2)
        s2 = Frame(s1.matrix[:, :1])
        w1 = annihilator(f, s1)
        w2 = annihilator(f, s2)
        lam = random_lagrangian(rng, f)
        assert check_transitivity(f, w1, w2, lam)


def test_intrinsic_decomposition_equal_pair_c2():
    f = standard_form(1)
    lam = Frame.span([1, 1])
    dec = intrinsic_decomposition(f, lam, lam, seed=3)
    assert (dec.lam0.dim, dec.v.dim, dec.lam1.dim, dec.mu1.dim) == (1, 1, 0, 0)
    assert dec.x0.dim == 2
    assert dec.x1.dim == 0
    assert np.allclose(dec.p0, np.eye(2))
    for coef in graph_coefficients(f, dec, lam, lam):
        assert np.max(np.abs(coef), initial=0.0) < 1e-10
    x0_form, lam_red, mu_red = reduced_pair(f, dec, lam, lam)
    assert x0_form.dim == 2
    assert lam_red.dim == 1
    assert gap_hat(lam_red, mu_red) < 1e-12


def test_intrinsic_decomposition_dimensions_c8():
    rng = rng_from_seed(9)
    f = random_symplectic_form(rng, 8)
    lam, mu = random_lagrangian_pair(rng, f, intersection_dim=1)
    dec = intrinsic_decomposition(f, lam, mu, seed=11)
    assert (dec.lam0.dim, dec.v.dim, dec.lam1.dim, dec.mu1.dim) == (1, 1, 3, 3)
    assert gap_hat(intersect(lam, dec.x1), dec.lam1) < 1e-8
    assert gap_hat(intersect(mu, dec.x1), dec.mu1) < 1e-8
    assert np.max(np.abs(omega_matrix(f, dec.v, dec.v))) < 1e-10


def test_intrinsic_decomposition_transversal_pair():
    rng = rng_from_seed(10)
    f = random_symplectic_form(rng, 6)
    lam, mu = random_lagrangian_pair(rng, f, intersection_dim=0)
    dec = intrinsic_decomposition(f, lam, mu)
    assert dec.lam0.dim == 0
    assert dec.v.dim == 0
    assert dec.x0.dim == 0
    assert dec.x1.dim == 6
    x0_form, lam_red, mu_red = reduced_pair(f, dec, lam, mu)
    assert x0_form.dim == 0
    assert lam_red.dim == 0
    assert mu_red.dim == 0


def test_intrinsic_decomposition_v_choice_validation():
    rng = rng_from_seed(11)
    f = random_symplectic_form(rng, 4)
    lam, mu = random_lagrangian_pair(rng, f, intersection_dim=1)
    bad = Frame(lam.matrix[:, :1])
    with pytest.raises(ValueError, match="complement"):
        intrinsic_decomposition(f, lam, mu, v_choice=bad)
    dec0 = intrinsic_decomposition(f, lam, mu, seed=1)
    dec = intrinsic_decomposition(f, lam, mu, v_choice=dec0.v)
    assert gap_hat(dec.v, dec0.v) < 1e-14


def test_reduction_by_v_plus_member_matches_projection():
    rng = rng_from_seed(12)
    f = random_symplectic_form(rng, 8)
    lam, mu = random_lagrangian_pair(rng, f, intersection_dim=2)
    dec = intrinsic_decomposition(f, lam, mu, seed=5)
    for w_between in (subspace_sum(dec.v, lam), subspace_sum(dec.v, mu)):
        assert classify(f, w_between) == "coisotropic"
        red = reduce_space(f, w_between)
        for sub in (lam, mu):
            img = reduce_subspace(f, w_between, sub)
            ambient = red.representative.matrix @ img.matrix
            through_quotient = orthonormalize(dec.p0 @ ambient)
            direct = orthonormalize(dec.p0 @ sub.matrix)
            assert through_quotient.dim == direct.dim
            assert gap_hat(through_quotient, direct) < 1e-8


def test_graph_coefficients_near_reference_pair():
    rng = rng_from_seed(13)
    f = random_symplectic_form(rng, 8)
    lam, mu = random_lagrangian_pair(rng, f, intersection_dim=2)
    dec = intrinsic_decomposition(f, lam, mu, seed=7)
    lam_s = perturb_lagrangian(rng, f, lam, 0.05)
    mu_s = perturb_lagrangian(rng, f, mu, 0.05)
    dec_s = pair_decomposition(f, dec.lam0, dec.v, lam_s, mu_s)
    a1, a2, b1, b2 = graph_coefficients(f, dec_s, lam_s, mu_s)
    assert a1.shape == (2, 2)
    assert a2.shape == (2, 2)
    assert 0 < np.linalg.norm(a1) < 1.0
    assert 0 < np.linalg.norm(b1) < 1.0
    x0_form, lam_red, mu_red = reduced_pair(f, dec_s, lam_s, mu_s)
    assert x0_form.dim == 4
    assert intersect(lam_red, mu_red).dim == intersect(lam_s, mu_s).dim


def test_intersection_form_kernel_counts_intersection():
    rng = rng_from_seed(14)
    f = random_symplectic_form(rng, 8)
    lam, mu = random_lagrangian_pair(rng, f, intersection_dim=2)
    dec = intrinsic_decomposition(f, lam, mu, seed=3)
    q = intersection_form(f, dec, lam, mu)
    assert np.max(np.abs(q.matrix), initial=0.0) < 1e-9
    lam_s = perturb_lagrangian(rng, f, lam, 0.08)
    dec_s = pair_decomposition(f, dec.lam0, dec.v, lam_s, mu)
    q_s = intersection_form(f, dec_s, lam_s, mu)
    _, _, zero = morse_counts(q_s.matrix)
    assert zero == intersect(lam_s, mu).dim


def test_composite_coefficients_match_direct_extraction():
    rng = rng_from_seed(15)
    for trial in range(5):
        f = random_symplectic_form(rng, 8)
        lam0, mu0 = random_lagrangian_pair(rng, f, intersection_dim=2)
        dec = intrinsic_decomposition(f, lam0, mu0, seed=trial)
        lam = perturb_lagrangian(rng, f, lam0, 0.1)
        mu = perturb_lagrangian(rng, f, mu0, 0.1)
        a1f, a2f, f_basis, g_basis = composite_coefficients(f, dec, lam, mu)
        lam1_new = intersect(annihilator(f, dec.v), lam)
        a1d, a2d, b1d, b2d = graph_coefficients_in_bases(
            f, f_basis, dec.v.matrix, lam1_new.matrix, g_basis, lam, mu
        )
        assert np.max(np.abs(b1d)) < 1e-9
        assert np.max(np.abs(b2d)) < 1e-9
        assert np.max(np.abs(a1d - a1f)) < 1e-8
        assert np.max(np.abs(a2d - a2f)) < 1e-8


def test_composite_coefficients_rejects_singular_core():
    f = standard_form(2)
    dec = decomposition_from_parts(
        f,
        Frame.span([1, 0, 0, 0]),
        Frame.span([0, 0, 1, 0]),
        Frame.span([0, 1, 0, 0]),
        Frame.span([0, 0, 0, 1]),
    )
    lam = Frame.span([1, 0, 0.3, 0], [0, 1, 0, 1.0])
    mu = Frame.span([1, 0, 0.2, 0], [0, 1, 0, 1.0])
    assert classify(f, lam) == "lagrangian"
    assert classify(f, mu) == "lagrangian"
    with pytest.raises(ArithmeticError, match="singular"):
        composite_coefficients(f, dec, lam, mu)


def test_complementary_lagrangian():
    rng = rng_from_seed(16)
    for dim, cap in ((6, 0), (6, 1), (6, 3), (8, 2)):
        f = random_symplectic_form(rng, dim)
        lam, mu = random_lagrangian_pair(rng, f, intersection_dim=cap)
        tilde = complementary_lagrangian(f, lam, mu, seed=cap)
        assert classify(f, tilde) == "lagrangian"
        assert intersect(lam, tilde).dim == 0
        assert subspace_sum(lam, tilde).dim == dim
        assert mu.dim - intersect(mu, tilde).dim == cap
