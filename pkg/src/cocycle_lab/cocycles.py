"""1-cocycles with finite-dimensional unitary coefficients.

A cocycle b: G -> C^d satisfying b(gx) = b(g) + pi_g b(x) is determined by
its values on the positive generators; values on inverses follow from
b(x^-1) = -pi_{x^-1} b(x).  Construction validates every relator of the
model, which makes evaluation along any expressing word well defined.

The module turns the cohomological statements into executable checks:

* harmonic projection: the Z^1-orthogonal splitting off the coboundaries,
  solved through the normal equations (I - T_pi) xi = sum_x mu(x) b(x);
* the energy identity sum_x mu^{*n}(x) ||b(x)||^2 = n ||b||_{Z^1}^2 for
  harmonic b;
* the Cesaro quantity (1/n)||sum_x mu^{*n}(x) b(x) (x) conj(b(x))||, both
  by exact convolution and through the spectral measure of the tensor
  square Markov operator (the telescoping identity made executable);
* the inequality chain  |<b(g), xi>|^2 <= 8 delta(mu^n, g mu^n) S  <=
  lambda_g (H(mu^{n+1}) - H(mu^n)) S  with S the split-support second
  moment of <b(.), xi>;
* growth profiles of ||b|| over balls, and the spectral-band construction
  of almost-harmonic cocycles with energy pinned in [2, 4].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .budget import resolve_budget
from .errors import (
    BudgetExceededError,
    CocycleConsistencyError,
    ConsistencyError,
    ModelMismatchError,
    PreconditionError,
)
from .groups import GroupModel
from .measures import (
    ConvolutionTable,
    Measure,
    delta_concavity,
    entropy,
    require_admissible,
    translate,
)
from .reps import (
    UnitaryRep,
    cesaro_limit,
    cesaro_norm_pair,
    hermitian_eig,
    ip,
    markov_operator,
    spectral_band_vector,
    spectral_measure,
    tensor_conjugate,
)

RELATOR_TOL = 1e-9
HARMONIC_TOL = 1e-9
ENERGY_REL_TOL = 1e-8
LEMMA_AGREE_TOL = 1e-7
CHAIN_TOL = 1e-9
IDENTITY_TOL = 1e-8
KERNEL_CUT = 1e-8


class Cocycle:
    """Cocycle stored by its values on the positive generators."""

    def __init__(self, rep: UnitaryRep, values: Mapping[str, np.ndarray],
                 validate: bool = True):
        model = rep.model
        names = model.positive_generator_names()
        if set(values.keys()) != set(names):
            raise PreconditionError(
                f"cocycle needs values exactly for generators {names}, "
                f"got {sorted(values.keys())}")
        vals = {}
        for name in names:
            v = np.asarray(values[name], dtype=complex).reshape(-1)
            if v.shape[0] != rep.dim:
                raise PreconditionError(
                    f"value for {name} has dimension {v.shape[0]}, rep has {rep.dim}")
            vals[name] = v
        self.rep = rep
        self.model = model
        self.values = vals
        self._names = names
        # letter -> value, inverses by b(x^-1) = -pi_{x^-1} b(x)
        self._letter_values: dict[int, np.ndarray] = {}
        for i, name in enumerate(names, start=1):
            v = vals[name]
            self._letter_values[i] = v
            self._letter_values[-i] = -(rep.generator_matrix(name).conj().T @ v)
        if validate:
            self._validate()

    def scale(self) -> float:
        return max((float(np.linalg.norm(v)) for v in self.values.values()), default=0.0)

    def value(self, letter: int) -> np.ndarray:
        return self._letter_values[letter]

    def evaluate_word(self, word) -> np.ndarray:
        """Right fold of the cocycle rule: one matrix-vector product per letter."""
        acc = np.zeros(self.rep.dim, dtype=complex)
        for letter in reversed(word):
            acc = self.value(letter) + self.rep.letter_matrix(letter) @ acc
        return acc

    def evaluate(self, g) -> np.ndarray:
        """b(g) through any expressing word (well defined by relator consistency)."""
        return self.evaluate_word(self.model.express(g))

    def _validate(self) -> None:
        if not self.model.is_finitely_presented():
            raise PreconditionError(
                f"{self.model.spec()}: cocycles need a finitely presented model")
        tol = RELATOR_TOL * max(1.0, self.scale())
        for rel in self.model.relators():
            residual = float(np.linalg.norm(self.evaluate_word(rel)))
            if residual > tol:
                raise CocycleConsistencyError(
                    f"generator values violate relator {self.model.word_to_str(rel)} "
                    f"(residual {residual:.3e})",
                    relator=self.model.word_to_str(rel), residual=residual)


def cocycle_evaluate(b: Cocycle, g) -> np.ndarray:
    return b.evaluate(g)


def coboundary(rep: UnitaryRep, xi) -> Cocycle:
    """b(g) = xi - pi_g xi; relator-consistent by construction."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if xi.shape[0] != rep.dim:
        raise PreconditionError(f"xi has dimension {xi.shape[0]}, rep has {rep.dim}")
    values = {name: xi - rep.generator_matrix(name) @ xi
              for name in rep.model.positive_generator_names()}
    return Cocycle(rep, values, validate=False)


def _mu_values(b: Cocycle, mu: Measure) -> list[tuple[np.ndarray, float]]:
    if b.model != mu.model:
        raise ModelMismatchError(
            f"cocycle on {b.model.spec()} paired with measure on {mu.model.spec()}")
    e = b.model.identity()
    out = []
    for g, w in mu.items():
        if g == e:
            continue
        out.append((b.evaluate(g), w))
    return out


def z1_norm(b: Cocycle, mu: Measure) -> float:
    """|| b ||_{Z^1} = ( sum_x mu(x) ||b(x)||^2 )^{1/2}."""
    return math.sqrt(math.fsum(w * float(np.vdot(v, v).real)
                               for v, w in _mu_values(b, mu)))


def z1_inner(b1: Cocycle, b2: Cocycle, mu: Measure) -> complex:
    """sum_x mu(x) <b1(x), b2(x)> with the inner product linear on the left."""
    total = 0j
    e = b1.model.identity()
    for g, w in mu.items():
        if g == e:
            continue
        total += w * ip(b1.evaluate(g), b2.evaluate(g))
    return total


def harmonicity_defect(b: Cocycle, mu: Measure) -> float:
    """|| sum_x mu(x) b(x) ||; zero exactly for mu-harmonic cocycles."""
    acc = np.zeros(b.rep.dim, dtype=complex)
    for v, w in _mu_values(b, mu):
        acc += w * v
    return float(np.linalg.norm(acc))


def coboundary_pairing(b: Cocycle, mu: Measure, xi) -> tuple[complex, complex]:
    """Both sides of  sum_x mu(x) <b(x), xi - pi_x xi> = 2 <sum_x mu(x) b(x), xi>."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    e = b.model.identity()
    lhs = 0j
    beta = np.zeros(b.rep.dim, dtype=complex)
    for g, w in mu.items():
        if g == e:
            continue
        v = b.evaluate(g)
        lhs += w * ip(v, xi - b.rep.evaluate(g) @ xi)
        beta += w * v
    return lhs, 2.0 * ip(beta, xi)


# --- ball evaluation ---------------------------------------------------------

@dataclass
class _BfsOrder:
    """Left-multiplication BFS of a ball: propagation order with parent links."""

    elements: list
    parents: np.ndarray
    letters: np.ndarray
    shell_start: list[int]  # shell_start[r] = first index of radius r
    index: dict


_BFS_CACHE: dict[tuple, _BfsOrder] = {}


def _bfs_order(model: GroupModel, radius: int, budget: int | None = None) -> _BfsOrder:
    key = (model, radius)
    cached = _BFS_CACHE.get(key)
    if cached is not None:
        return cached
    limit = resolve_budget(budget)
    names = model.positive_generator_names()
    letters = []
    for i in range(1, len(names) + 1):
        letters.append((i, model.generator_element(i)))
        inv = model.generator_element(-i)
        if inv != model.generator_element(i):
            letters.append((-i, inv))
    e = model.identity()
    elements = [e]
    parents = [0]
    letter_arr = [0]
    index = {e: 0}
    shell_start = [0, 1]
    frontier = [0]
    for r in range(1, radius + 1):
        nxt = []
        for pi in frontier:
            x = elements[pi]
            for letter, s in letters:
                y = model.multiply(s, x)
                if y not in index:
                    if len(elements) >= limit:
                        raise BudgetExceededError(
                            f"{model.spec()}: ball of radius {r} exceeds element "
                            f"budget {limit}", partial_radius=r - 1)
                    index[y] = len(elements)
                    elements.append(y)
                    parents.append(pi)
                    letter_arr.append(letter)
                    nxt.append(index[y])
        frontier = nxt
        shell_start.append(len(elements))
    order = _BfsOrder(elements, np.asarray(parents, dtype=np.int64),
                      np.asarray(letter_arr, dtype=np.int64), shell_start, index)
    if len(elements) <= 2_000_000:
        _BFS_CACHE[key] = order
    return order


class BallValues:
    """Values of a cocycle on a ball, aligned with the BFS order."""

    def __init__(self, b: Cocycle, radius: int, budget: int | None = None):
        order = _bfs_order(b.model, radius, budget)
        self.order = order
        self.dim = b.rep.dim
        count = len(order.elements)
        m = len(b.model.positive_generator_names())
        if self.dim == 1:
            # letter lookup tables indexed by letter + m
            bvals = np.zeros(2 * m + 1, dtype=complex)
            phases = np.ones(2 * m + 1, dtype=complex)
            for letter in range(1, m + 1):
                for sl in (letter, -letter):
                    bvals[sl + m] = complex(b.value(sl)[0])
                    phases[sl + m] = complex(b.rep.letter_matrix(sl)[0, 0])
            vals = np.zeros(count, dtype=complex)
            for r in range(1, len(order.shell_start) - 1):
                lo, hi = order.shell_start[r], order.shell_start[r + 1]
                if lo == hi:
                    continue
                ls = order.letters[lo:hi] + m
                vals[lo:hi] = bvals[ls] + phases[ls] * vals[order.parents[lo:hi]]
            self.scalars = vals
            self.vectors = None
        else:
            mats = {letter: b.rep.letter_matrix(letter)
                    for base in range(1, m + 1) for letter in (base, -base)}
            vecs = np.zeros((count, self.dim), dtype=complex)
            letters_list = order.letters
            parents_list = order.parents
            for i in range(1, count):
                letter = int(letters_list[i])
                vecs[i] = b.value(letter) + mats[letter] @ vecs[parents_list[i]]
            self.scalars = None
            self.vectors = vecs

    def radius_of_index(self, i: int) -> int:
        # shells are contiguous; linear scan over few shells is fine
        for r in range(len(self.order.shell_start) - 1):
            if i < self.order.shell_start[r + 1]:
                return r
        return len(self.order.shell_start) - 1

    def norms_sq(self) -> np.ndarray:
        if self.scalars is not None:
            return (self.scalars * self.scalars.conj()).real
        return np.einsum("ni,ni->n", self.vectors, self.vectors.conj()).real

    def inner_with(self, xi) -> np.ndarray:
        """<b(x), xi> for every ball element, inner product linear on the left."""
        xi = np.asarray(xi, dtype=complex).reshape(-1)
        if self.scalars is not None:
            return self.scalars * np.conj(xi[0])
        return self.vectors @ np.conj(xi)

    def lookup(self, g) -> int:
        i = self.order.index.get(g)
        if i is None:
            raise PreconditionError(
                f"element {g!r} lies outside the evaluated ball")
        return i


def _support_word_length(mu: Measure) -> int:
    model = mu.model
    e = model.identity()
    longest = 1
    for g, _ in mu.items():
        if g == e:
            continue
        longest = max(longest, len(model.express(g)))
    return longest


def ball_values(b: Cocycle, radius: int, budget: int | None = None) -> BallValues:
    return BallValues(b, radius, budget)


# --- harmonic projection -----------------------------------------------------

@dataclass
class HarmonicReport:
    harmonic: Cocycle
    xi: np.ndarray
    defect_before: float
    defect_after: float
    z1_before: float
    z1_after: float


def harmonic_projection(b: Cocycle, mu: Measure) -> HarmonicReport:
    """Split off the coboundary part: minimize ||b - d xi||_{Z^1} over xi.

    The normal equations reduce to (I - T_pi) xi = sum_x mu(x) b(x), solved
    by spectral pseudoinverse; directions with eigenvalue within 1e-8 of 1
    are invariant vectors along which coboundaries vanish, so cutting them
    leaves the projection unchanged.
    """
    require_admissible(mu)
    t = markov_operator(b.rep, mu)
    beta = np.zeros(b.rep.dim, dtype=complex)
    for v, w in _mu_values(b, mu):
        beta += w * v
    evals, vecs = hermitian_eig(t, max_dim=max(64, b.rep.dim))
    coeffs = vecs.conj().T @ beta
    xi = np.zeros(b.rep.dim, dtype=complex)
    for i, lam in enumerate(evals):
        gap = 1.0 - lam
        if abs(gap) > KERNEL_CUT:
            xi += (coeffs[i] / gap) * vecs[:, i]
    harm_values = {name: b.values[name]
                   - (xi - b.rep.generator_matrix(name) @ xi)
                   for name in b.model.positive_generator_names()}
    harmonic = Cocycle(b.rep, harm_values, validate=False)
    defect_before = float(np.linalg.norm(beta))
    defect_after = harmonicity_defect(harmonic, mu)
    scale = max(1.0, b.scale())
    if defect_after > HARMONIC_TOL * scale:
        raise ConsistencyError(
            f"projection left harmonicity defect {defect_after:.3e}; the Markov "
            f"operator has near-invariant directions that are not invariant")
    return HarmonicReport(
        harmonic=harmonic, xi=xi,
        defect_before=defect_before, defect_after=defect_after,
        z1_before=z1_norm(b, mu), z1_after=z1_norm(harmonic, mu))


def _stacked_constraints(model: GroupModel, rep: UnitaryRep, mu: Measure) -> np.ndarray:
    """Rows of the linear system cutting out relator-consistent harmonic values."""
    names = model.positive_generator_names()
    m = len(names)
    d = rep.dim
    unknowns = m * d

    def word_map(word) -> np.ndarray:
        """Matrix of v -> b(word) as a function of the stacked generator values."""
        out = np.zeros((d, unknowns), dtype=complex)
        prefix = np.eye(d, dtype=complex)
        for letter in word:
            j = abs(letter) - 1
            block = slice(j * d, (j + 1) * d)
            if letter > 0:
                out[:, block] += prefix
            else:
                u = rep.generator_matrix(names[j])
                out[:, block] -= prefix @ u.conj().T
            prefix = prefix @ rep.letter_matrix(letter)
        return out

    rows = [word_map(rel) for rel in model.relators()]
    harm = np.zeros((d, unknowns), dtype=complex)
    e = model.identity()
    for g, w in mu.items():
        if g == e:
            continue
        harm += w * word_map(model.express(g))
    rows.append(harm)
    return np.vstack(rows) if rows else harm


def harmonic_space_dimension(model: GroupModel, rep: UnitaryRep, mu: Measure) -> int:
    """Complex dimension of {generator values: relator-consistent and harmonic}.

    Computed as the null-space dimension of the stacked system, with rank
    read off the Gram matrix eigenvalues at threshold 1e-8.
    """
    require_admissible(mu)
    a = _stacked_constraints(model, rep, mu)
    gram = a.conj().T @ a
    evals, _ = hermitian_eig(gram, max_dim=max(64, gram.shape[0]))
    lam_max = float(evals[-1]) if evals.size else 0.0
    threshold = 1e-8 * max(1.0, lam_max)
    return int(np.count_nonzero(np.abs(evals) <= threshold))


def consistent_cocycle_basis(model: GroupModel, rep: UnitaryRep) -> list[Cocycle]:
    """Basis of the relator-consistent generator-value space (no harmonicity)."""
    names = model.positive_generator_names()
    m, d = len(names), rep.dim
    rows = []

    def word_map(word) -> np.ndarray:
        out = np.zeros((d, m * d), dtype=complex)
        prefix = np.eye(d, dtype=complex)
        for letter in word:
            j = abs(letter) - 1
            block = slice(j * d, (j + 1) * d)
            if letter > 0:
                out[:, block] += prefix
            else:
                u = rep.generator_matrix(names[j])
                out[:, block] -= prefix @ u.conj().T
            prefix = prefix @ rep.letter_matrix(letter)
        return out

    for rel in model.relators():
        rows.append(word_map(rel))
    if rows:
        a = np.vstack(rows)
        gram = a.conj().T @ a
        evals, vecs = hermitian_eig(gram, max_dim=max(64, gram.shape[0]))
        lam_max = float(evals[-1]) if evals.size else 0.0
        threshold = 1e-8 * max(1.0, lam_max)
        null_cols = [vecs[:, i] for i in range(len(evals)) if abs(evals[i]) <= threshold]
    else:
        null_cols = [np.eye(m * d, dtype=complex)[:, i] for i in range(m * d)]
    basis = []
    for col in null_cols:
        values = {name: col[j * d:(j + 1) * d] for j, name in enumerate(names)}
        basis.append(Cocycle(rep, values))
    return basis


# --- identities and inequality chain ----------------------------------------

def _require_harmonic(b: Cocycle, mu: Measure) -> None:
    defect = harmonicity_defect(b, mu)
    if defect > HARMONIC_TOL * max(1.0, b.scale()):
        raise PreconditionError(
            f"cocycle is not mu-harmonic (defect {defect:.3e})")


def _power(mu: Measure, n: int, table: ConvolutionTable | None,
           budget: int | None) -> Measure:
    if table is not None:
        return table.power(n)
    from .measures import convolution_power
    return convolution_power(mu, n, budget=budget)


@dataclass
class EnergyCheck:
    lhs: float
    rhs: float
    holds: bool


def energy_identity_check(b: Cocycle, mu: Measure, n: int,
                          table: ConvolutionTable | None = None,
                          budget: int | None = None) -> EnergyCheck:
    """sum_x mu^{*n}(x) ||b(x)||^2 against n * ||b||_{Z^1}^2 for harmonic b."""
    if n < 1:
        raise PreconditionError(f"energy identity needs n >= 1, got {n}")
    _require_harmonic(b, mu)
    require_admissible(mu)
    mun = _power(mu, n, table, budget)
    vals = BallValues(b, n * _support_word_length(mu), budget)
    norms = vals.norms_sq()
    lhs = math.fsum(w * norms[vals.lookup(g)] for g, w in mun.items())
    rhs = n * z1_norm(b, mu) ** 2
    holds = abs(lhs - rhs) <= ENERGY_REL_TOL * max(1.0, abs(rhs))
    return EnergyCheck(lhs, rhs, holds)


def _tensor_state(b: Cocycle, mu: Measure) -> np.ndarray:
    """zeta = sum_x mu(x) b(x) (x) conj(b(x)) in the row-major pairing."""
    d = b.rep.dim
    zeta = np.zeros(d * d, dtype=complex)
    for v, w in _mu_values(b, mu):
        zeta += w * np.kron(v, v.conj())
    return zeta


@dataclass
class LemmaQuantity:
    direct: float
    spectral: float
    limit: float


def lemma_quantity(b: Cocycle, mu: Measure, n: int,
                   table: ConvolutionTable | None = None,
                   budget: int | None = None) -> LemmaQuantity:
    """(1/n) || sum_x mu^{*n}(x) b(x) (x) conj(b(x)) ||, three ways.

    direct: exact convolution and ball evaluation; spectral: the Cesaro
    average of zeta under the tensor-square Markov operator (these agree by
    the telescoping identity, enforced to 1e-7); limit: sqrt of the
    spectral mass at 1, the n -> infinity value.
    """
    if n < 1:
        raise PreconditionError(f"Cesaro quantity needs n >= 1, got {n}")
    _require_harmonic(b, mu)
    require_admissible(mu)
    mun = _power(mu, n, table, budget)
    vals = BallValues(b, n * _support_word_length(mu), budget)
    d = b.rep.dim
    if d == 1:
        norms = vals.norms_sq()
        s = math.fsum(w * norms[vals.lookup(g)] for g, w in mun.items())
        direct = abs(s) / n
    else:
        idx = np.fromiter((vals.lookup(g) for g, _ in mun.items()),
                          dtype=np.int64, count=len(mun))
        weights = np.fromiter((w for _, w in mun.items()), dtype=float, count=len(mun))
        vecs = vals.vectors[idx]
        s_mat = np.einsum("n,ni,nj->ij", weights, vecs, vecs.conj())
        direct = float(np.linalg.norm(s_mat.ravel())) / n
    t_ad = markov_operator(tensor_conjugate(b.rep), mu)
    zeta = _tensor_state(b, mu)
    sm = spectral_measure(t_ad, zeta, max_dim=max(64, d * d))
    _, spectral = cesaro_norm_pair(t_ad, zeta, n, measure=sm, max_dim=max(64, d * d))
    if abs(direct - spectral) > LEMMA_AGREE_TOL * max(1.0, abs(spectral)):
        raise ConsistencyError(
            f"direct and spectral Cesaro quantities disagree: {direct!r} vs {spectral!r}")
    limit = cesaro_limit(t_ad, zeta, measure=sm)
    return LemmaQuantity(direct, spectral, limit)


def second_lemma_quantity(b: Cocycle, mu: Measure, n: int, xi,
                          table: ConvolutionTable | None = None,
                          budget: int | None = None) -> float:
    """(1/n) sum_x mu^{*n}(x) |<b(x), xi>|^2 for a unit direction xi.

    Verified against the Cauchy-Schwarz domination by the tensor quantity.
    """
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if float(np.linalg.norm(xi)) > 1.0 + 1e-12:
        raise PreconditionError(f"xi must have norm <= 1, got {np.linalg.norm(xi)}")
    _require_harmonic(b, mu)
    mun = _power(mu, n, table, budget)
    vals = BallValues(b, n * _support_word_length(mu), budget)
    inner2 = np.abs(vals.inner_with(xi)) ** 2
    value = math.fsum(w * inner2[vals.lookup(g)] for g, w in mun.items()) / n
    bound = lemma_quantity(b, mu, n, table=table, budget=budget).direct
    if value > bound + CHAIN_TOL:
        raise ConsistencyError(
            f"direction quantity {value!r} exceeds the tensor quantity {bound!r}")
    return value


@dataclass
class TheoremCheck:
    lhs: float
    mid: float
    rhs: float
    holds: bool
    identity_residual: float
    sum_factor: float

    @property
    def gaps(self) -> tuple[float, float]:
        return (self.mid - self.lhs, self.rhs - self.mid)


def theorem_inequality_check(b: Cocycle, mu: Measure, xi, g, n: int,
                             table: ConvolutionTable | None = None,
                             budget: int | None = None) -> TheoremCheck:
    """The two-step inequality chain at scale n:

        |<b(g), xi>|^2  <=  8 delta(mu^n, g mu^n) S  <=
                            lambda_g (H(mu^{n+1}) - H(mu^n)) S,

    with S = sum_x |<b(x), xi>|^2 (g mu^n + mu^n)(x) and
    lambda_g = 4 / min(mu(e), mu(g)).  Also certifies the opening identity
    <b(g), xi> = sum_x <b(x), xi> (g mu^n - mu^n)(x) to 1e-8.
    """
    if n < 1:
        raise PreconditionError(f"inequality chain needs n >= 1, got {n}")
    _require_harmonic(b, mu)
    require_admissible(mu)
    model = mu.model
    model.validate(g)
    if g not in mu:
        raise PreconditionError(f"g = {model.encode(g)} is not in supp(mu)")
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if float(np.linalg.norm(xi)) > 1.0 + 1e-12:
        raise PreconditionError(f"xi must have norm <= 1, got {np.linalg.norm(xi)}")

    mun = _power(mu, n, table, budget)
    mun1 = _power(mu, n + 1, table, budget)
    gmun = translate(g, mun)
    vals = BallValues(b, (n + 1) * _support_word_length(mu), budget)
    inner = vals.inner_with(xi)
    inner2 = np.abs(inner) ** 2

    lhs_inner = ip(b.evaluate(g), xi)
    lhs = abs(lhs_inner) ** 2

    sum_factor = 0.0
    signed = 0j
    for x, w in mun.items():
        i = vals.lookup(x)
        sum_factor += w * inner2[i]
        signed -= w * inner[i]
    for x, w in gmun.items():
        i = vals.lookup(x)
        sum_factor += w * inner2[i]
        signed += w * inner[i]
    identity_residual = abs(lhs_inner - signed)

    dga = delta_concavity(mun, gmun)
    mid = 8.0 * dga * sum_factor
    lam = 4.0 / min(mu[model.identity()], mu[g])
    if table is not None:
        increment = table.entropy(n + 1) - table.entropy(n)
    else:
        increment = entropy(mun1) - entropy(mun)
    rhs = lam * increment * sum_factor
    holds = (lhs <= mid + CHAIN_TOL and mid <= rhs + CHAIN_TOL
             and identity_residual <= IDENTITY_TOL * max(1.0, abs(lhs_inner)))
    return TheoremCheck(lhs, mid, rhs, holds, identity_residual, sum_factor)


@dataclass
class SublinearityProfile:
    """max_{|g| <= m} ||b(g)|| / m for m = 1..m_max, with its running minimum.

    The numerator is subadditive in m, so the running minimum of the
    profile is the candidate for its limit.  When the cocycle is the
    coboundary of xi, every value obeys ||b(g)|| <= 2 ||xi||.
    """

    values: list[float]
    running_min: list[float]
    limit_candidate: float
    coboundary_bound_ok: bool | None = None


def sublinearity_profile(b: Cocycle, m_max: int, budget: int | None = None,
                         coboundary_xi=None) -> SublinearityProfile:
    if m_max < 1:
        raise PreconditionError(f"profile needs m_max >= 1, got {m_max}")
    vals = BallValues(b, m_max, budget)
    norms = np.sqrt(vals.norms_sq())
    shell_start = vals.order.shell_start
    profile = []
    best = 0.0
    for m in range(1, m_max + 1):
        hi = shell_start[m + 1] if m + 1 < len(shell_start) else len(norms)
        best = max(best, float(np.max(norms[:hi])) if hi else 0.0)
        profile.append(best / m)
    running = []
    cur = math.inf
    for v in profile:
        cur = min(cur, v)
        running.append(cur)
    bound_ok = None
    if coboundary_xi is not None:
        cap = 2.0 * float(np.linalg.norm(np.asarray(coboundary_xi, dtype=complex)))
        bound_ok = bool(np.all(norms <= cap + 1e-9))
    return SublinearityProfile(profile, running, running[-1], bound_ok)


@dataclass
class AppendixReport:
    """Spectral-band coboundary scaled to the energy window [2, 4].

    From a unit vector xi with <T xi, xi> in [1-2eps, 1-eps], the scaled
    coboundary b(x) = eps^{-1/2} (xi - pi_x xi) has energy
    2 (1 - <T xi, xi>)/eps in [2, 4] and harmonicity defect
    eps^{-1/2} ||(I - T) xi|| <= 2 sqrt(eps).
    """

    eps: float
    band: tuple[float, float]
    eigenvalue: float
    energy: float
    defect: float
    defect_bound: float
    energy_ok: bool
    defect_ok: bool
    xi: np.ndarray = field(repr=False)
    cocycle: Cocycle = field(repr=False)


def appendix_construction(rep: UnitaryRep, mu: Measure, eps: float,
                          max_dim: int | None = None) -> AppendixReport:
    if not 0.0 < eps < 0.5:
        raise PreconditionError(f"eps must lie in (0, 0.5), got {eps}")
    require_admissible(mu)
    dim_cap = max_dim if max_dim is not None else max(64, rep.dim)
    t = markov_operator(rep, mu)
    band = (1.0 - 2.0 * eps, 1.0 - eps)
    xi, eigenvalue = spectral_band_vector(t, band, max_dim=dim_cap)
    scale = eps ** -0.5
    values = {name: scale * (xi - rep.generator_matrix(name) @ xi)
              for name in rep.model.positive_generator_names()}
    b = Cocycle(rep, values, validate=False)
    energy = z1_norm(b, mu) ** 2
    defect = harmonicity_defect(b, mu)
    defect_bound = 2.0 * math.sqrt(eps)
    return AppendixReport(
        eps=eps, band=band, eigenvalue=eigenvalue,
        energy=energy, defect=defect, defect_bound=defect_bound,
        energy_ok=2.0 - 1e-6 <= energy <= 4.0 + 1e-6,
        defect_ok=defect <= defect_bound + 1e-6,
        xi=xi, cocycle=b)
