"""Finite-dimensional unitary representations and the walk's Markov operator.

A representation stores one unitary matrix per positive generator; inverse
generators act by the adjoint.  Construction validates unitarity and every
relator of the (finitely presented) model to 1e-10, so evaluation along any
word of an element is well defined.

The Markov operator of an admissible measure,  T = sum_x mu(x) pi_x,  is a
self-adjoint contraction.  Pairing its spectral resolution with a vector
zeta gives a finite atomic measure m on [-1, 1], and the Cesaro averages

    (1/n) || (I + T + ... + T^{n-1}) zeta ||

are computed both by direct iteration and as the spectral integral
( int |(1 + t + ... + t^{n-1})/n|^2 dm(t) )^{1/2}; the two routes must
agree to 1e-8 and their common limit is sqrt(m({1})).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import (
    ConsistencyError,
    EmptyBandError,
    ModelMismatchError,
    PreconditionError,
)
from .groups import GroupModel, Word
from .linalg import eigenvalue_clusters, hermitian_eig
from .measures import Measure, require_admissible

UNITARY_TOL = 1e-10
RELATOR_TOL = 1e-10
EIG_CLUSTER_TOL = 1e-8
CESARO_AGREE_TOL = 1e-8
CESARO_ERROR_TOL = 1e-6


def ip(u: np.ndarray, v: np.ndarray) -> complex:
    """Complex inner product, linear in the first argument."""
    return complex(np.vdot(v, u))


def _run_length(word: Word) -> list[tuple[int, int]]:
    runs: list[tuple[int, int]] = []
    for letter in word:
        if runs and runs[-1][0] == letter:
            runs[-1] = (letter, runs[-1][1] + 1)
        else:
            runs.append((letter, 1))
    return runs


class UnitaryRep:
    """Unitary representation given by generator matrices, relator-validated."""

    def __init__(self, model: GroupModel, matrices: Mapping[str, np.ndarray],
                 validate: bool = True):
        names = model.positive_generator_names()
        if set(matrices.keys()) != set(names):
            raise PreconditionError(
                f"representation needs matrices exactly for generators {names}, "
                f"got {sorted(matrices.keys())}")
        mats = {}
        dim = None
        for name in names:
            u = np.asarray(matrices[name], dtype=complex)
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise PreconditionError(f"matrix for {name} must be square, got {u.shape}")
            if dim is None:
                dim = u.shape[0]
            elif u.shape[0] != dim:
                raise PreconditionError(
                    f"matrix for {name} has dimension {u.shape[0]}, expected {dim}")
            mats[name] = u
        if dim is None or dim < 1:
            raise PreconditionError("representation must have dimension >= 1")
        self.model = model
        self.dim = dim
        self._mats = mats
        self._names = names
        if validate:
            self._validate()

    def _validate(self) -> None:
        eye = np.eye(self.dim)
        for name, u in self._mats.items():
            err = float(np.linalg.norm(u.conj().T @ u - eye))
            if err > UNITARY_TOL:
                raise PreconditionError(
                    f"matrix for generator {name} is not unitary (residual {err:.3e})")
        if self.model.is_finitely_presented():
            for rel in self.model.relators():
                m = self.evaluate_word(rel)
                err = float(np.linalg.norm(m - eye))
                if err > RELATOR_TOL:
                    raise PreconditionError(
                        f"relator {self.model.word_to_str(rel)} does not evaluate to "
                        f"the identity (residual {err:.3e})")

    def generator_matrix(self, name: str) -> np.ndarray:
        return self._mats[name]

    def letter_matrix(self, letter: int) -> np.ndarray:
        u = self._mats[self._names[abs(letter) - 1]]
        return u if letter > 0 else u.conj().T

    def evaluate_word(self, word: Word) -> np.ndarray:
        """Product of letter matrices; identical-letter runs use matrix powers."""
        out = np.eye(self.dim, dtype=complex)
        for letter, count in _run_length(word):
            mat = self.letter_matrix(letter)
            out = out @ (mat if count == 1 else np.linalg.matrix_power(mat, count))
        return out

    def evaluate(self, g) -> np.ndarray:
        """Matrix of a group element, through any expressing word."""
        return self.evaluate_word(self.model.express(g))


def rep_evaluate(rep: UnitaryRep, target) -> np.ndarray:
    """Evaluate on a Word (tuple of signed letters) or on a group element."""
    if isinstance(target, tuple) and all(
            isinstance(s, int) and s != 0 for s in target) and rep.model.family != "free":
        return rep.evaluate_word(target)
    if rep.model.family == "free":
        # for free groups elements *are* words; both readings agree
        return rep.evaluate_word(target)
    return rep.evaluate(target)


def trivial_rep(model: GroupModel, dim: int = 1) -> UnitaryRep:
    eye = np.eye(dim, dtype=complex)
    return UnitaryRep(model, {name: eye for name in model.positive_generator_names()})


def diagonal_rep(model: GroupModel, phases: Mapping[str, list[complex]]) -> UnitaryRep:
    """Diagonal rep: one list of unit phases per generator, all the same length."""
    mats = {name: np.diag(np.asarray(vals, dtype=complex))
            for name, vals in phases.items()}
    return UnitaryRep(model, mats)


def character_rep(model: GroupModel, values: Mapping[str, complex]) -> UnitaryRep:
    return diagonal_rep(model, {name: [v] for name, v in values.items()})


def regular_minus_constants_rep(model: GroupModel) -> UnitaryRep:
    """Left regular representation of Z/N restricted to the complement of the
    constants: diagonal with phases exp(2 pi i k/N), k = 1..N-1."""
    if model.family != "cyclic":
        raise PreconditionError(
            f"regular-minus-constants rep is built for cyclic models, got {model.spec()}")
    n = model.n  # type: ignore[attr-defined]
    phases = [cmath.exp(2j * math.pi * k / n) for k in range(1, n)]
    return diagonal_rep(model, {"g": phases})


def tensor_conjugate(rep: UnitaryRep) -> UnitaryRep:
    """g -> pi_g (x) conj(pi_g) in the row-major pairing (j, k) -> j*d + k."""
    mats = {name: np.kron(u, u.conj()) for name, u in rep._mats.items()}
    return UnitaryRep(rep.model, mats)


def markov_operator(rep: UnitaryRep, mu: Measure) -> np.ndarray:
    """T = sum_x mu(x) pi_x; self-adjoint contraction for admissible mu."""
    if rep.model != mu.model:
        raise ModelMismatchError(
            f"representation on {rep.model.spec()} paired with measure on "
            f"{mu.model.spec()}")
    require_admissible(mu)
    t = np.zeros((rep.dim, rep.dim), dtype=complex)
    e = rep.model.identity()
    for g, w in mu.items():
        if g == e:
            t += w * np.eye(rep.dim)
        else:
            t += w * rep.evaluate(g)
    herm_err = float(np.linalg.norm(t - t.conj().T))
    if herm_err > UNITARY_TOL:
        raise ConsistencyError(
            f"Markov operator is not self-adjoint (residual {herm_err:.3e})")
    return 0.5 * (t + t.conj().T)


@dataclass
class SpectralMeasure:
    """Finite atomic measure on [-1, 1]: (eigenvalue, mass) pairs, mass >= 0."""

    atoms: list[tuple[float, float]]

    def total_mass(self) -> float:
        return math.fsum(m for _, m in self.atoms)

    def mass_at(self, t: float, tol: float = EIG_CLUSTER_TOL) -> float:
        return math.fsum(m for s, m in self.atoms if abs(s - t) <= tol)


def spectral_measure(t_matrix: np.ndarray, zeta: np.ndarray,
                     max_dim: int | None = None) -> SpectralMeasure:
    """m(.) = <E_T(.) zeta, zeta> for a Hermitian contraction T.

    Eigenvalues within 1e-8 are merged into one atom; values straying past
    [-1, 1] by at most 1e-8 are clipped, beyond that it is an error.
    """
    evals, vecs = hermitian_eig(t_matrix, max_dim=max_dim)
    if evals.size and (evals[0] < -1.0 - EIG_CLUSTER_TOL or evals[-1] > 1.0 + EIG_CLUSTER_TOL):
        raise PreconditionError(
            f"operator is not a contraction: eigenvalue range "
            f"[{evals[0]:.12g}, {evals[-1]:.12g}]")
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    coeffs = vecs.conj().T @ zeta
    atoms = []
    for cluster in eigenvalue_clusters(evals, EIG_CLUSTER_TOL):
        mass = float(math.fsum(abs(coeffs[i]) ** 2 for i in cluster))
        t = float(np.mean([evals[i] for i in cluster]))
        t = min(1.0, max(-1.0, t))
        atoms.append((t, mass))
    sm = SpectralMeasure(atoms)
    norm2 = float(np.vdot(zeta, zeta).real)
    if abs(sm.total_mass() - norm2) > 1e-8 * max(1.0, norm2):
        raise ConsistencyError(
            f"spectral masses sum to {sm.total_mass():.12g}, expected ||zeta||^2 = "
            f"{norm2:.12g}")
    return sm


def _cesaro_symbol(t: float, n: int) -> float:
    """(1 + t + ... + t^{n-1}) / n, stable near t = 1."""
    if abs(1.0 - t) < 1e-12:
        return 1.0
    return (1.0 - t ** n) / (n * (1.0 - t))


def cesaro_norm_pair(t_matrix: np.ndarray, zeta: np.ndarray, n: int,
                     measure: SpectralMeasure | None = None,
                     max_dim: int | None = None) -> tuple[float, float]:
    """(direct, spectral) values of (1/n)||(I + T + ... + T^{n-1}) zeta||."""
    if n < 1:
        raise PreconditionError(f"Cesaro average needs n >= 1, got {n}")
    t_matrix = np.asarray(t_matrix, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    if measure is None:
        measure = spectral_measure(t_matrix, zeta, max_dim=max_dim)
    acc = zeta.copy()
    v = zeta.copy()
    for _ in range(n - 1):
        v = t_matrix @ v
        acc += v
    direct = float(np.linalg.norm(acc)) / n
    spectral = math.sqrt(max(0.0, math.fsum(
        m * _cesaro_symbol(t, n) ** 2 for t, m in measure.atoms)))
    return direct, spectral


def cesaro_norm(t_matrix: np.ndarray, zeta: np.ndarray, n: int,
                measure: SpectralMeasure | None = None,
                max_dim: int | None = None) -> float:
    direct, spectral = cesaro_norm_pair(t_matrix, zeta, n, measure=measure, max_dim=max_dim)
    if abs(direct - spectral) > CESARO_ERROR_TOL:
        raise ConsistencyError(
            f"direct and spectral Cesaro norms disagree: {direct!r} vs {spectral!r}")
    return direct


def cesaro_limit(t_matrix: np.ndarray, zeta: np.ndarray,
                 measure: SpectralMeasure | None = None,
                 max_dim: int | None = None) -> float:
    """Limit of the Cesaro norms: sqrt of the spectral mass at 1."""
    if measure is None:
        measure = spectral_measure(t_matrix, zeta, max_dim=max_dim)
    return math.sqrt(max(0.0, measure.mass_at(1.0)))


def invariant_vectors_dim(rep: UnitaryRep, mu: Measure,
                          max_dim: int | None = None) -> int:
    """Dimension of the fixed space of T = sum mu(x) pi_x (eigenvalue-1 space).

    For a contraction built from an admissible measure this equals the
    dimension of the jointly pi-invariant vectors.
    """
    t = markov_operator(rep, mu)
    evals, _ = hermitian_eig(t, max_dim=max_dim)
    return int(np.count_nonzero(np.abs(evals - 1.0) <= EIG_CLUSTER_TOL))


def spectral_band_vector(t_matrix: np.ndarray, band: tuple[float, float],
                         max_dim: int | None = None) -> tuple[np.ndarray, float]:
    """Deterministic unit vector in the spectral subspace E_T(band).

    Picks the eigenvector of the largest in-band eigenvalue, with the phase
    normalized so its largest-magnitude entry is real positive.  Raises
    ``EmptyBandError`` naming the nearest eigenvalues when the band misses
    the spectrum.
    """
    lo, hi = band
    evals, vecs = hermitian_eig(t_matrix, max_dim=max_dim)
    inside = [i for i, t in enumerate(evals) if lo <= t <= hi]
    if not inside:
        below = [t for t in evals if t < lo]
        above = [t for t in evals if t > hi]
        nearest = tuple(x for x in (max(below) if below else None,
                                    min(above) if above else None) if x is not None)
        raise EmptyBandError(
            f"no spectrum in band [{lo:.12g}, {hi:.12g}]; nearest eigenvalues: "
            f"{', '.join(f'{x:.12g}' for x in nearest) or 'none'}", nearest=nearest)
    i = inside[-1]
    xi = vecs[:, i].copy()
    j = int(np.argmax(np.abs(xi)))
    phase = xi[j] / abs(xi[j])
    xi = xi / phase
    xi = xi / np.linalg.norm(xi)
    return xi, float(evals[i])
