"""Symplectic forms on C^N and the splitting into definite subspaces.

A symplectic form is omega(x, y) = <J x, y> = y^H J x for an invertible
skew-Hermitian J. omega is linear in the first argument, conjugate
linear in the second, and omega(y, x) = -conj(omega(x, y)).

The splitting X = X^- (+) X^+ consists of the negative and positive
eigenspaces of the Hermitian matrix -iJ. The form -i*omega is negative
definite on X^-, positive definite on X^+, and the two eigenspaces are
omega-orthogonal. Every Lagrangian subspace is the graph of a unitary
generator U: X^- -> X^+ with respect to the induced definite metrics,
written as lambda = {v + U v : v in X^-}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import (
    RANK_TOL,
    Frame,
    default_zero_tol,
    gap_delta,
    hermitian_eig,
    intersect,
    orth_complement,
    orthonormalize,
)

__all__ = [
    "SymplecticForm",
    "SymplecticSplitting",
    "standard_form",
    "omega_eval",
    "omega_matrix",
    "annihilator",
    "classify",
    "splitting",
    "normalize_strong",
    "unitary_generator",
    "generator_to_frame",
    "transform_form",
    "hermitian_sqrt",
]


@dataclass(frozen=True)
class SymplecticForm:
    """Invertible skew-Hermitian matrix defining omega(x, y) = y^H J x.

    Construction symmetrizes away anti-skew noise below 1e-12 (relative)
    and rejects anything larger, as well as matrices with smallest
    singular value below 1e-10 times the largest. The 0x0 form is allowed
    and represents the trivial symplectic space, which shows up as the
    reduction of a Lagrangian subspace by itself.
    """

    j: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.j, dtype=complex)
        if j.ndim != 2 or j.shape[0] != j.shape[1]:
            raise ValueError("form matrix must be square")
        if j.shape[0] == 0:
            object.__setattr__(self, "j", j.reshape(0, 0))
            return
        skew = (j - j.conj().T) / 2.0
        scale = max(1.0, np.linalg.norm(j, 2))
        if np.max(np.abs(j - skew)) > 1e-12 * scale:
            raise ValueError(
                "form matrix is not skew-Hermitian "
                f"(residual {np.max(np.abs(j - skew)):.3e})"
            )
        s = np.linalg.svd(skew, compute_uv=False)
        if s[-1] <= 1e-10 * s[0]:
            raise ValueError("form matrix is numerically singular")
        object.__setattr__(self, "j", skew)

    @property
    def dim(self) -> int:
        return self.j.shape[0]


def standard_form(n: int) -> SymplecticForm:
    """Standard form J_2n = [[0, -I], [I, 0]] on C^(2n)."""
    z = np.zeros((n, n))
    eye = np.eye(n)
    return SymplecticForm(np.block([[z, -eye], [eye, z]]))


def omega_eval(form: SymplecticForm, x, y) -> complex:
    """omega(x, y) = <J x, y>."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return complex(y.conj() @ (form.j @ x))


def omega_matrix(form: SymplecticForm, a: Frame, b: Frame) -> np.ndarray:
    """Matrix of omega paired on two frames: entry [i, j] = omega(a_j, b_i).

    For coordinate vectors x (in frame a) and y (in frame b) this gives
    omega(a x, b y) = y^H M x. With a = b it is the skew-Hermitian Gram
    matrix of the restricted form.
    """
    return b.matrix.conj().T @ form.j @ a.matrix


def annihilator(form: SymplecticForm, lam: Frame) -> Frame:
    """Annihilator lambda^omega = (J lambda)^perp."""
    if lam.dim == 0:
        return Frame.full(form.dim)
    return orth_complement(orthonormalize(form.j @ lam.matrix))


def classify(form: SymplecticForm, lam: Frame, rank_tol: float = RANK_TOL) -> str:
    """Position of a subspace relative to its annihilator.

    Returns one of 'lagrangian', 'isotropic', 'coisotropic', 'symplectic',
    'generic'. A Lagrangian subspace is reported as 'lagrangian' rather
    than as both isotropic and coisotropic; the zero subspace is
    'isotropic'.
    """
    ann = annihilator(form, lam)
    tol = 10 * rank_tol
    iso = gap_delta(lam, ann) <= tol
    coiso = gap_delta(ann, lam) <= tol
    if iso and coiso:
        return "lagrangian"
    if iso:
        return "isotropic"
    if coiso:
        return "coisotropic"
    if intersect(lam, ann, rank_tol).dim == 0:
        return "symplectic"
    return "generic"


@dataclass(frozen=True)
class SymplecticSplitting:
    """Eigenspace splitting of -iJ with the induced definite metrics.

    ``x_plus`` and ``x_minus`` are orthonormal frames for the positive
    and negative eigenspaces. ``gram_plus`` is the Gram matrix of the
    positive definite form -i*omega on x_plus, ``gram_minus`` that of
    +i*omega on x_minus (both Hermitian positive definite, diagonal when
    the frames are eigenvector bases).
    """

    form: SymplecticForm
    x_plus: Frame
    x_minus: Frame
    gram_plus: np.ndarray
    gram_minus: np.ndarray


def splitting(form: SymplecticForm, zero_tol: float | None = None) -> SymplecticSplitting:
    """Split C^N into the definite eigenspaces of -iJ.

    Raises if any eigenvalue of -iJ sits within the zero tolerance of 0
    (the form would be degenerate at working precision).
    """
    h = -1j * form.j
    h = (h + h.conj().T) / 2.0
    if zero_tol is None:
        zero_tol = default_zero_tol(h)
    vals, vecs = hermitian_eig(h)
    if np.min(np.abs(vals)) <= zero_tol:
        raise ValueError("splitting is degenerate: -iJ has a near-zero eigenvalue")
    minus = Frame(vecs[:, vals < 0])
    plus = Frame(vecs[:, vals > 0])
    gram_plus = -1j * (plus.matrix.conj().T @ form.j @ plus.matrix)
    gram_minus = 1j * (minus.matrix.conj().T @ form.j @ minus.matrix)
    gram_plus = (gram_plus + gram_plus.conj().T) / 2.0
    gram_minus = (gram_minus + gram_minus.conj().T) / 2.0
    return SymplecticSplitting(form, plus, minus, gram_plus, gram_minus)


def hermitian_sqrt(a: np.ndarray):
    """Square root and inverse square root of a Hermitian positive definite matrix."""
    vals, vecs = hermitian_eig(a)
    if np.min(vals) <= 0:
        raise ValueError("matrix is not positive definite")
    root = (vecs * np.sqrt(vals)) @ vecs.conj().T
    inv_root = (vecs / np.sqrt(vals)) @ vecs.conj().T
    return root, inv_root


def normalize_strong(form: SymplecticForm):
    """Polar-normalize to an equivalent form with J'^2 = -I.

    Writes J = i H with H Hermitian invertible and returns
    (J' = i sign(H), T = |H|^(1/2)) satisfying T^H J' T = J. The
    splitting eigenspaces of J' coincide with those of J.
    """
    h = -1j * form.j
    h = (h + h.conj().T) / 2.0
    vals, vecs = hermitian_eig(h)
    sign = (vecs * np.sign(vals)) @ vecs.conj().T
    t = (vecs * np.sqrt(np.abs(vals))) @ vecs.conj().T
    jn = 1j * sign
    jn = (jn - jn.conj().T) / 2.0
    return SymplecticForm(jn), t


def unitary_generator(
    form: SymplecticForm,
    lam: Frame,
    split: SymplecticSplitting | None = None,
    rank_tol: float = RANK_TOL,
) -> np.ndarray:
    """Coordinate matrix of the generator U: X^- -> X^+ of a Lagrangian.

    The returned matrix maps x_minus coordinates to x_plus coordinates,
    so that lam = span(x_minus + x_plus @ U). It is unitary with respect
    to the induced metrics: U^H gram_plus U = gram_minus to 1e-10.

    Raises
    ------
    ValueError
        If the splitting halves have different dimensions (no Lagrangian
        subspaces exist) or if ``lam`` is not Lagrangian for ``form``.
    """
    split = splitting(form) if split is None else split
    if split.x_plus.dim != split.x_minus.dim:
        raise ValueError(
            "splitting halves have different dimensions "
            f"({split.x_plus.dim} vs {split.x_minus.dim}); no Lagrangians exist"
        )
    kind = classify(form, lam, rank_tol)
    if kind != "lagrangian":
        raise ValueError(f"subspace is {kind}, not lagrangian")
    c_minus = split.x_minus.matrix.conj().T @ lam.matrix
    c_plus = split.x_plus.matrix.conj().T @ lam.matrix
    u = np.linalg.solve(c_minus.T, c_plus.T).T
    res = u.conj().T @ split.gram_plus @ u - split.gram_minus
    scale = max(1.0, np.linalg.norm(split.gram_minus, 2))
    if np.max(np.abs(res)) > 1e-10 * scale:
        raise ArithmeticError(
            f"generator fails metric unitarity (residual {np.max(np.abs(res)):.3e})"
        )
    return u


def generator_to_frame(split: SymplecticSplitting, u: np.ndarray) -> Frame:
    """Lagrangian frame {v + U v} from a generator in splitting coordinates."""
    return orthonormalize(split.x_minus.matrix + split.x_plus.matrix @ u)


def transform_form(form: SymplecticForm, l: np.ndarray) -> SymplecticForm:
    """Push a form through an invertible map: omega'(x, y) = omega(L^-1 x, L^-1 y).

    The pair (L lambda, omega') relates to (lambda, omega) by naturality:
    L^H J' L = J.
    """
    linv = np.linalg.inv(l)
    jp = linv.conj().T @ form.j @ linv
    jp = (jp - jp.conj().T) / 2.0
    return SymplecticForm(jp)
