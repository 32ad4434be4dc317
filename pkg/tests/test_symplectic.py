"""Tests for symplectic forms, splittings, and unitary generators."""

from __future__ import annotations

import numpy as np
import pytest

from maslovlab.frames import Frame, fredholm_pair_index, gap_delta, gap_hat
from maslovlab.sampling import (
    random_lagrangian,
    random_lagrangian_pair,
    random_symplectic_form,
    rng_from_seed,
)
from maslovlab.symplectic import (
    SymplecticForm,
    annihilator,
    classify,
    generator_to_frame,
    normalize_strong,
    omega_eval,
    omega_matrix,
    splitting,
    standard_form,
    transform_form,
    unitary_generator,
)


def test_standard_form_values():
    f = standard_form(1)
    assert np.allclose(f.j, [[0, -1], [1, 0]])
    # omega(e1, e2) = 1 for n = 1.
    assert omega_eval(f, [1, 0], [0, 1]) == pytest.approx(1.0)
    assert omega_eval(f, [0, 1], [1, 0]) == pytest.approx(-1.0)


def test_omega_sesquilinearity_and_skewness():
    rng = rng_from_seed(10)
    f = random_symplectic_form(rng, 4)
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    a = 0.7 - 0.2j
    assert omega_eval(f, a * x, y) == pytest.approx(a * omega_eval(f, x, y))
    assert omega_eval(f, x, a * y) == pytest.approx(np.conj(a) * omega_eval(f, x, y))
    assert omega_eval(f, y, x) == pytest.approx(-np.conj(omega_eval(f, x, y)))


def test_form_constructor_gates():
    with pytest.raises(ValueError):
        SymplecticForm(np.array([[0.0, 1.0], [1.0, 0.0]]))  # not skew
    with pytest.raises(ValueError):
        SymplecticForm(np.zeros((2, 2)))  # singular


def test_annihilator_involution_and_dimension():
    rng = rng_from_seed(11)
    f = random_symplectic_form(rng, 6)
    for k in range(0, 7):
        from maslovlab.sampling import random_subspace

        v = random_subspace(rng, 6, k)
        ann = annihilator(f, v)
        assert v.dim + ann.dim == 6
        assert gap_hat(annihilator(f, ann), v) < 1e-9


def test_classification_examples():
    f = standard_form(1)
    assert classify(f, Frame.span([1, 1])) == "lagrangian"
    assert classify(f, Frame.span([1, 1j])) == "symplectic"
    assert classify(f, Frame.empty(2)) == "isotropic"
    assert omega_eval(f, [1, 1j], [1, 1j]) == pytest.approx(-2j)
    f2 = standard_form(2)
    # A plane spanned by one isotropic and one symplectic direction is generic.
    gen = Frame.span([1, 0, 0, 0], [0, 1j, 0, 1])
    assert classify(f2, gen) == "generic"


def test_splitting_standard_n1():
    f = standard_form(1)
    s = splitting(f)
    target_plus = Frame.span([1, -1j])
    target_minus = Frame.span([1, 1j])
    assert gap_hat(s.x_plus, target_plus) < 1e-12
    assert gap_hat(s.x_minus, target_minus) < 1e-12
    # -i omega is positive on X^+ and negative on X^-.
    vp = s.x_plus.matrix[:, 0]
    vm = s.x_minus.matrix[:, 0]
    assert (-1j * omega_eval(f, vp, vp)).real > 0
    assert (-1j * omega_eval(f, vm, vm)).real < 0
    # The two halves are omega-orthogonal.
    block = omega_matrix(f, s.x_plus, s.x_minus)
    assert np.max(np.abs(block)) < 1e-10


def test_splitting_scale_invariance():
    f = standard_form(2)
    s1 = splitting(f)
    s2 = splitting(SymplecticForm(2.0 * f.j))
    assert gap_hat(s1.x_plus, s2.x_plus) < 1e-12
    assert gap_hat(s1.x_minus, s2.x_minus) < 1e-12
    assert np.allclose(s2.gram_plus, 2.0 * s1.gram_plus)


def test_normalize_strong_properties():
    rng = rng_from_seed(12)
    f = random_symplectic_form(rng, 6)
    fn, t = normalize_strong(f)
    assert np.allclose(fn.j @ fn.j, -np.eye(6), atol=1e-12)
    assert np.allclose(t.conj().T @ fn.j @ t, f.j, atol=1e-10)
    assert gap_hat(splitting(f).x_plus, splitting(fn).x_plus) < 1e-9
    # Doubling the standard form normalizes back to the standard form.
    f2 = SymplecticForm(2.0 * standard_form(1).j)
    fn2, t2 = normalize_strong(f2)
    assert np.allclose(fn2.j, standard_form(1).j, atol=1e-12)
    assert np.allclose(t2, np.sqrt(2.0) * np.eye(2), atol=1e-12)


def test_unitary_generator_round_trip():
    rng = rng_from_seed(13)
    for dim in (2, 4, 8):
        f = random_symplectic_form(rng, dim)
        s = splitting(f)
        lam = random_lagrangian(rng, f, s)
        u = unitary_generator(f, lam, s)
        res = u.conj().T @ s.gram_plus @ u - s.gram_minus
        assert np.max(np.abs(res)) < 1e-10
        rebuilt = generator_to_frame(s, u)
        assert gap_hat(rebuilt, lam) < 1e-9


def test_unitary_generator_rejects_non_lagrangian():
    f = standard_form(1)
    with pytest.raises(ValueError, match="symplectic"):
        unitary_generator(f, Frame.span([1, 1j]))


def test_unitary_generator_rejects_unbalanced_splitting():
    # J = i I has X^+ = C^2 and X^- = {0}: no Lagrangians.
    f = SymplecticForm(1j * np.eye(2))
    with pytest.raises(ValueError, match="no Lagrangians"):
        unitary_generator(f, Frame.span([1, 0]))


def test_lagrangian_dimension_and_pair_index():
    rng = rng_from_seed(14)
    for dim in (2, 4, 8):
        f = random_symplectic_form(rng, dim)
        for _ in range(100):
            lam, mu = random_lagrangian_pair(rng, f)
            assert lam.dim == dim // 2
            cap, codim, index = fredholm_pair_index(lam, mu)
            assert index == 0
        # Prescribed intersection dimensions are hit exactly.
        k = dim // 2 - 1
        lam, mu = random_lagrangian_pair(rng, f, intersection_dim=k)
        assert fredholm_pair_index(lam, mu)[0] == k


def test_naturality_transform():
    rng = rng_from_seed(15)
    from maslovlab.sampling import random_invertible

    f = random_symplectic_form(rng, 4)
    l = random_invertible(rng, 4)
    fp = transform_form(f, l)
    # Pullback identity L^H J' L = J.
    assert np.allclose(l.conj().T @ fp.j @ l, f.j, atol=1e-9)
    lam = random_lagrangian(rng, f)
    moved = Frame(np.linalg.qr(l @ lam.matrix)[0])
    assert classify(fp, moved) == "lagrangian"
