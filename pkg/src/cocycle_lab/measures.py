"""Finitely supported measures on group models.

Sparse maps element -> weight with exact convolution, entropy in nats, and
the concavity gaps that drive the entropy-growth inequalities:

    delta(p, q)  = H((p+q)/2) - (H(p) + H(q))/2  >=  sum |p-q|^2 / (8(p+q))
    (eq1)  sum f |p-q|  <=  sqrt(8 delta(p,q) sum f^2 (p+q))
    (eq2)  H(mu*nu) - H(nu)  >=  2 min(mu(e), mu(g0)) delta(nu, g0 nu)

Determinism: a measure iterates its atoms in the order they were built,
which is itself deterministic (public constructors sort canonically;
convolution scans both factors in stored order), so every sum here is
bit-stable across runs and thread counts.  All arithmetic is double
precision: mass is conserved to 1e-12 and inequality slack is 1e-9.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .budget import resolve_budget
from .errors import (
    BudgetExceededError,
    ModelMismatchError,
    PreconditionError,
)
from .groups import GroupModel

MASS_TOL = 1e-12
INEQ_TOL = 1e-9


class Measure:
    """Immutable sparse non-negative function on a group, usually a probability."""

    __slots__ = ("model", "_atoms")

    def __init__(self, model: GroupModel, weights: Mapping, *, validate_elements: bool = True):
        atoms: dict = {}
        for g, w in sorted(weights.items(), key=lambda kv: model.sort_key(kv[0])):
            w = float(w)
            if w < 0.0 or not math.isfinite(w):
                raise ValueError(f"measure weight must be finite and >= 0, got {w!r} at {g!r}")
            if w == 0.0:
                continue
            if validate_elements:
                model.validate(g)
            atoms[g] = w
        self.model = model
        self._atoms = atoms

    @classmethod
    def _raw(cls, model: GroupModel, atoms: dict) -> "Measure":
        """Internal: trust atoms (valid elements, positive, deterministic order)."""
        m = object.__new__(cls)
        m.model = model
        m._atoms = atoms
        return m

    @classmethod
    def delta(cls, model: GroupModel, g=None) -> "Measure":
        g = model.identity() if g is None else g
        model.validate(g)
        return cls._raw(model, {g: 1.0})

    def __getitem__(self, g) -> float:
        return self._atoms.get(g, 0.0)

    def __contains__(self, g) -> bool:
        return g in self._atoms

    def __len__(self) -> int:
        return len(self._atoms)

    def items(self) -> Iterator:
        return iter(self._atoms.items())

    def support(self) -> Iterable:
        return self._atoms.keys()

    def total_mass(self) -> float:
        return math.fsum(self._atoms.values())

    def is_probability(self, tol: float = MASS_TOL) -> bool:
        return abs(self.total_mass() - 1.0) <= tol

    def __repr__(self) -> str:
        return f"Measure({self.model.spec()}, {len(self._atoms)} atoms, mass={self.total_mass():.12g})"


def dirac(model: GroupModel, g=None) -> Measure:
    return Measure.delta(model, g)


def lazy_measure(model: GroupModel, alpha: float) -> Measure:
    """Hold at the identity with probability alpha, else uniform on the generators."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"lazy hold probability must be in (0,1), got {alpha}")
    gens = model.generators()
    w = (1.0 - alpha) / len(gens)
    atoms = {model.identity(): alpha}
    atoms.update({g: w for g in gens})
    return Measure(model, atoms, validate_elements=False)


def uniform_with_hold(model: GroupModel) -> Measure:
    """Uniform on {identity} + generators."""
    gens = model.generators()
    w = 1.0 / (len(gens) + 1)
    atoms = {model.identity(): w}
    atoms.update({g: w for g in gens})
    return Measure(model, atoms, validate_elements=False)


def is_symmetric(mu: Measure, tol: float = MASS_TOL) -> bool:
    model = mu.model
    return all(abs(w - mu[model.inverse(g)]) <= tol for g, w in mu.items())


def admissibility(mu: Measure, closure_depth: int = 6) -> tuple[bool, str]:
    """Check the walk hypotheses: probability, symmetric, hold at e, generating.

    Generation is decided exactly when supp(mu) contains the model's
    generating set, otherwise by a bounded BFS closure of the support; a
    closure that stabilizes without reaching the generators fails, one that
    is still growing at the depth cap is rejected as unverified.
    """
    if not mu.is_probability():
        return False, f"total mass {mu.total_mass()!r} is not 1"
    if mu[mu.model.identity()] <= 0.0:
        return False, "no mass at the identity"
    if not is_symmetric(mu):
        return False, "measure is not symmetric"
    gens = set(mu.model.generators())
    supp = set(mu.support())
    if gens <= supp:
        return True, "support contains the generating set"
    closure = set(supp)
    frontier = set(supp)
    for _ in range(closure_depth):
        if gens <= closure:
            return True, "support generates (BFS closure reaches the generating set)"
        nxt = set()
        for x in frontier:
            for s in supp:
                y = mu.model.multiply(x, s)
                if y not in closure:
                    closure.add(y)
                    nxt.add(y)
        if not nxt:
            return False, "support closure stabilized without generating"
        frontier = nxt
    if gens <= closure:
        return True, "support generates (BFS closure reaches the generating set)"
    return False, f"generation not verified within closure depth {closure_depth}"


def is_admissible(mu: Measure) -> bool:
    return admissibility(mu)[0]


def require_admissible(mu: Measure) -> None:
    ok, reason = admissibility(mu)
    if not ok:
        raise PreconditionError(f"measure is not admissible: {reason}")


def _require_same_model(a: Measure, b: Measure) -> None:
    if a.model != b.model:
        raise ModelMismatchError(
            f"measures live on different models: {a.model.spec()} vs {b.model.spec()}")


def translate(g, mu: Measure) -> Measure:
    """Left translate (g mu)(x) = mu(g^-1 x); entropy-preserving rearrangement."""
    model = mu.model
    model.validate(g)
    if g == model.identity():
        return mu
    return Measure._raw(model, {model.multiply(g, x): w for x, w in mu.items()})


def convolve(mu: Measure, nu: Measure, budget: int | None = None) -> Measure:
    """Exact sparse convolution (mu*nu)(x) = sum_g mu(g) nu(g^-1 x)."""
    _require_same_model(mu, nu)
    limit = resolve_budget(budget)
    model = mu.model
    multiply = model.multiply
    acc: dict = {}
    for a, wa in mu.items():
        for b, wb in nu.items():
            x = multiply(a, b)
            prev = acc.get(x)
            if prev is None:
                acc[x] = wa * wb
            else:
                acc[x] = prev + wa * wb
        if len(acc) > limit:
            raise BudgetExceededError(
                f"convolution support exceeds element budget {limit}")
    return Measure._raw(model, acc)


def convolution_power(mu: Measure, n: int, budget: int | None = None) -> Measure:
    """n-fold convolution power; n = 0 gives the point mass at the identity."""
    if n < 0:
        raise ValueError(f"convolution power must be >= 0, got {n}")
    acc = Measure.delta(mu.model)
    for k in range(n):
        try:
            acc = convolve(mu, acc, budget=budget)
        except BudgetExceededError as exc:
            raise BudgetExceededError(
                f"{exc} (largest feasible power: {k})", largest_feasible=k) from None
    return acc


@dataclass
class PrunedPower:
    """Convolution power with small atoms dropped; the tail is accounted for.

    Dropping mass eps perturbs the entropy by at most
    eps*log(support size) + h(eps), reported as ``entropy_error_bound``.
    """

    measure: Measure
    dropped_mass: float
    entropy_error_bound: float


def _binary_entropy(eps: float) -> float:
    if eps <= 0.0 or eps >= 1.0:
        return 0.0
    return -eps * math.log(eps) - (1.0 - eps) * math.log(1.0 - eps)


def convolution_power_pruned(mu: Measure, n: int, prune_eps: float,
                             renormalize: bool = False,
                             budget: int | None = None) -> PrunedPower:
    """Convolution power with per-step pruning of atoms below ``prune_eps``.

    No renormalization unless asked; the dropped mass and the induced
    entropy error bound are reported alongside the (sub)probability.
    """
    if prune_eps < 0.0:
        raise ValueError(f"prune_eps must be >= 0, got {prune_eps}")
    acc = Measure.delta(mu.model)
    dropped = 0.0
    max_support = 1
    for _ in range(n):
        acc = convolve(mu, acc, budget=budget)
        max_support = max(max_support, len(acc))
        if prune_eps > 0.0:
            kept = {g: w for g, w in acc.items() if w >= prune_eps}
            dropped += math.fsum(w for g, w in acc.items() if w < prune_eps)
            acc = Measure._raw(mu.model, kept)
    if renormalize and dropped > 0.0 and len(acc):
        mass = acc.total_mass()
        acc = Measure._raw(mu.model, {g: w / mass for g, w in acc.items()})
    bound = dropped * math.log(max(max_support, 2)) + _binary_entropy(min(dropped, 0.5))
    return PrunedPower(acc, dropped, bound)


class ConvolutionTable:
    """Cache of convolution powers of one measure: single writer, many readers."""

    def __init__(self, mu: Measure, budget: int | None = None):
        self.mu = mu
        self.budget = budget
        self._powers: list[Measure] = [Measure.delta(mu.model), mu]
        self._entropies: dict[int, float] = {}
        self._lock = threading.Lock()

    def power(self, n: int) -> Measure:
        if n < 0:
            raise ValueError(f"convolution power must be >= 0, got {n}")
        if n < len(self._powers):
            return self._powers[n]
        with self._lock:
            while len(self._powers) <= n:
                k = len(self._powers)
                try:
                    nxt = convolve(self.mu, self._powers[-1], budget=self.budget)
                except BudgetExceededError as exc:
                    raise BudgetExceededError(
                        f"{exc} (largest feasible power: {k - 1})",
                        largest_feasible=k - 1) from None
                self._powers.append(nxt)
        return self._powers[n]

    def entropy(self, n: int) -> float:
        cached = self._entropies.get(n)
        if cached is not None:
            return cached
        value = entropy(self.power(n))
        with self._lock:
            self._entropies[n] = value
        return value

    def max_cached(self) -> int:
        return len(self._powers) - 1


def entropy(p: Measure) -> float:
    """Shannon entropy in nats, 0 log 0 = 0; accepts subprobabilities."""
    return -math.fsum(w * math.log(w) for _, w in p.items() if w > 0.0)


def _mixture(p: Measure, q: Measure) -> Measure:
    _require_same_model(p, q)
    acc = {g: 0.5 * w for g, w in p.items()}
    for g, w in q.items():
        prev = acc.get(g)
        acc[g] = 0.5 * w if prev is None else prev + 0.5 * w
    return Measure._raw(p.model, acc)


def delta_concavity(p: Measure, q: Measure) -> float:
    """Concavity gap of the entropy functional at the fair mixture of p and q."""
    return entropy(_mixture(p, q)) - 0.5 * (entropy(p) + entropy(q))


def delta_concavity_lower_bound(p: Measure, q: Measure) -> float:
    """Chi-square style minorant: sum |p-q|^2 / (8(p+q)) over the joint support."""
    _require_same_model(p, q)
    total = 0.0
    for g, w in p.items():
        v = q[g]
        s = w + v
        if s > 0.0:
            total += (w - v) * (w - v) / (8.0 * s)
    for g, v in q.items():
        if g not in p:
            total += v / 8.0
    return total


def pointwise_concavity_gap(a: float, b: float) -> tuple[float, float]:
    """Scalar version of the concavity gap and its quadratic lower bound.

    gap  = (a log a + b log b)/2 - ((a+b)/2) log((a+b)/2)
    bound = |a-b|^2 / (8(a+b));   gap >= bound >= 0 for a, b >= 0.
    """
    if a < 0.0 or b < 0.0:
        raise ValueError(f"arguments must be >= 0, got {a}, {b}")
    s = a + b
    if s == 0.0:
        return 0.0, 0.0
    xlogx = lambda t: t * math.log(t) if t > 0.0 else 0.0
    gap = 0.5 * (xlogx(a) + xlogx(b)) - xlogx(0.5 * s)
    bound = (a - b) * (a - b) / (8.0 * s)
    return gap, bound


@dataclass
class InequalityCheck:
    lhs: float
    rhs: float
    holds: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def check_eq1(f: Mapping, p: Measure, q: Measure) -> InequalityCheck:
    """Weighted L1 bound from the concavity gap:

        sum f |p-q|  <=  sqrt(8 delta(p,q) sum f^2 (p+q)).

    ``f`` must be defined (and >= 0) on supp(p) | supp(q).
    """
    _require_same_model(p, q)
    lhs = 0.0
    quad = 0.0
    seen = set()
    for g, w in p.items():
        try:
            fg = float(f[g])
        except KeyError:
            raise PreconditionError(f"f is missing the support element {g!r}") from None
        if fg < 0.0:
            raise PreconditionError(f"f must be >= 0, got {fg} at {g!r}")
        v = q[g]
        lhs += fg * abs(w - v)
        quad += fg * fg * (w + v)
        seen.add(g)
    for g, v in q.items():
        if g in seen:
            continue
        try:
            fg = float(f[g])
        except KeyError:
            raise PreconditionError(f"f is missing the support element {g!r}") from None
        if fg < 0.0:
            raise PreconditionError(f"f must be >= 0, got {fg} at {g!r}")
        lhs += fg * v
        quad += fg * fg * v
    rhs = math.sqrt(max(8.0 * delta_concavity(p, q) * quad, 0.0))
    return InequalityCheck(lhs, rhs, lhs <= rhs + INEQ_TOL)


def check_eq2(mu: Measure, nu: Measure, g0) -> InequalityCheck:
    """Entropy produced by one convolution step dominates a concavity gap:

        H(mu*nu) - H(nu)  >=  2 min(mu(e), mu(g0)) delta(nu, g0 nu).
    """
    _require_same_model(mu, nu)
    model = mu.model
    model.validate(g0)
    if g0 not in mu:
        raise PreconditionError(f"g0 = {model.encode(g0)} is not in supp(mu)")
    if not is_symmetric(mu) or mu[model.identity()] <= 0.0:
        raise PreconditionError("mu must be symmetric with mass at the identity")
    lhs = entropy(convolve(mu, nu)) - entropy(nu)
    lam = min(mu[model.identity()], mu[g0])
    rhs = 2.0 * lam * delta_concavity(nu, translate(g0, nu))
    return InequalityCheck(lhs, rhs, lhs >= rhs - INEQ_TOL)


def l1_distance(p: Measure, q: Measure) -> float:
    _require_same_model(p, q)
    total = 0.0
    for g, w in p.items():
        total += abs(w - q[g])
    for g, v in q.items():
        if g not in p:
            total += v
    return total


def measure_to_json(mu: Measure) -> dict:
    """Canonical wire format: elements as strings, in canonical order."""
    model = mu.model
    items = sorted(mu.items(), key=lambda kv: model.sort_key(kv[0]))
    return {
        "elements": [model.encode(g) for g, _ in items],
        "weights": [w for _, w in items],
    }


def measure_from_json(model: GroupModel, doc: Mapping) -> Measure:
    elements = doc.get("elements")
    weights = doc.get("weights")
    if not isinstance(elements, list) or not isinstance(weights, list):
        raise PreconditionError("measure JSON needs 'elements' and 'weights' lists")
    if len(elements) != len(weights):
        raise PreconditionError(
            f"elements/weights length mismatch: {len(elements)} vs {len(weights)}")
    atoms: dict = {}
    for enc, w in zip(elements, weights):
        g = model.decode(enc)
        atoms[g] = atoms.get(g, 0.0) + float(w)
    return Measure(model, atoms, validate_elements=False)
