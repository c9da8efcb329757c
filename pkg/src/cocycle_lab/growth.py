"""Growth and entropy-growth profiling for admissible random walks.

Profiles collect, per step n: the support size |supp mu^{*n}| (= the ball
|S^n| for walks supported on {e} + generators), the entropy H(mu^{*n}),
the scaled increments a_n = n (H(mu^{*n+1}) - H(mu^{*n})), return
probabilities, and the sqrt(n)-scaled worst generator displacement
n^{1/2} max_{|g|<=1} ||mu^{*n} - g mu^{*n}||_1.

Liminf-style quantities are reported as finite-sample estimates (tail
statistics of the computed range); no asymptotic claim is made.

Free groups get an exact radial fast path: for a measure that is uniform
on the letters with a hold at the identity, the walk on the 2k-regular
tree is isotropic, so mu^{*n} is constant on spheres.  One probability per
distance replaces 3^n atoms, and entropies, return probabilities and
translate distances come out exactly.  The same element budget applies to
the (virtual) support size, so default caps match the materialized path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .budget import resolve_budget
from .errors import BudgetExceededError, PreconditionError
from .groups import FreeGroup, GroupModel
from .measures import (
    ConvolutionTable,
    Measure,
    delta_concavity,
    entropy,
    l1_distance,
    require_admissible,
    translate,
)

# default per-family caps for profiling; the element budget can still bite first
PROFILE_CAPS = {"free": 14, "lamplighter": 20}


def family_profile_cap(model: GroupModel, n_max: int) -> int:
    return min(n_max, PROFILE_CAPS.get(model.family, n_max))


def weak_poly_exponent(ball_sizes, mode: str = "slope") -> float:
    """Finite-sample growth exponent estimate from |B_n|, n = index.

    mode="slope": least-squares slope of log |B_n| against log n over the
    tail half (exact for polynomial data, diverges for exponential data).
    mode="ratio": tail-half minimum of log |B_n| / log n, the literal
    finite surrogate of the liminf; it carries an O(1/log n) bias upward.
    """
    sizes = list(ball_sizes)
    if len(sizes) < 5:
        raise PreconditionError(f"need at least 5 ball sizes, got {len(sizes)}")
    n_max = len(sizes) - 1
    start = max(2, n_max // 2)
    points = [(math.log(n), math.log(sizes[n])) for n in range(start, n_max + 1)
              if sizes[n] > 0]
    if len(points) < 2:
        raise PreconditionError("not enough usable tail points")
    if mode == "ratio":
        return min(y / x for x, y in points)
    if mode != "slope":
        raise PreconditionError(f"unknown estimator mode {mode!r}")
    mx = math.fsum(x for x, _ in points) / len(points)
    my = math.fsum(y for _, y in points) / len(points)
    sxx = math.fsum((x - mx) ** 2 for x, _ in points)
    sxy = math.fsum((x - mx) * (y - my) for x, y in points)
    if sxx == 0.0:
        raise PreconditionError("degenerate tail range for the slope estimate")
    return sxy / sxx


# --- profile engines ---------------------------------------------------------

class _TableEngine:
    """Generic engine over cached exact convolution powers."""

    def __init__(self, mu: Measure, budget: int | None = None):
        self.mu = mu
        self.model = mu.model
        self.table = ConvolutionTable(mu, budget=budget)

    def max_power(self, n: int) -> int:
        try:
            self.table.power(n)
            return n
        except BudgetExceededError as exc:
            return exc.largest_feasible if exc.largest_feasible is not None else 0

    def entropy(self, n: int) -> float:
        return self.table.entropy(n)

    def support_size(self, n: int) -> int:
        return len(self.table.power(n))

    def return_probability(self, n: int) -> float:
        return self.table.power(n)[self.model.identity()]

    def sup_probability(self, n: int) -> float:
        return max(w for _, w in self.table.power(n).items())

    def displacement_l1(self, n: int) -> float:
        mun = self.table.power(n)
        return max(l1_distance(mun, translate(g, mun))
                   for g in self.model.generators())

    def delta_translate(self, n: int, g) -> float:
        mun = self.table.power(n)
        return delta_concavity(mun, translate(g, mun))


class _RadialFreeEngine:
    """Exact sphere-function engine for isotropic walks on free groups."""

    def __init__(self, mu: Measure, budget: int | None = None):
        model = mu.model
        assert isinstance(model, FreeGroup)
        self.model = model
        self.mu = mu
        self.q = 2 * model.k          # tree degree
        self.hold = mu[model.identity()]
        self.step = (1.0 - self.hold) / self.q
        self.limit = resolve_budget(budget)
        # radial[n] = per-vertex probability by distance, length n+1
        self._radial: list[list[float]] = [[1.0]]
        self._virtual_support = [1]

    def sphere(self, r: int) -> int:
        return 1 if r == 0 else self.q * (self.q - 1) ** (r - 1)

    def _extend(self, n: int) -> None:
        while len(self._radial) <= n:
            old = self._radial[-1]
            m = len(old)
            get = lambda i: old[i] if 0 <= i < m else 0.0
            new = [self.hold * get(0) + self.q * self.step * get(1)]
            for r in range(1, m + 1):
                new.append(self.hold * get(r) + self.step * get(r - 1)
                           + (self.q - 1) * self.step * get(r + 1))
            support = sum(self.sphere(r) for r, p in enumerate(new) if p > 0.0)
            if support > self.limit:
                raise BudgetExceededError(
                    f"{self.model.spec()}: support of power {len(self._radial)} "
                    f"({support} atoms) exceeds element budget {self.limit}",
                    largest_feasible=len(self._radial) - 1)
            self._radial.append(new)
            self._virtual_support.append(support)

    def max_power(self, n: int) -> int:
        try:
            self._extend(n)
            return n
        except BudgetExceededError as exc:
            return exc.largest_feasible if exc.largest_feasible is not None else 0

    def radial(self, n: int) -> list[float]:
        self._extend(n)
        return self._radial[n]

    def entropy(self, n: int) -> float:
        prob = self.radial(n)
        return -math.fsum(self.sphere(r) * p * math.log(p)
                          for r, p in enumerate(prob) if p > 0.0)

    def support_size(self, n: int) -> int:
        self._extend(n)
        return self._virtual_support[n]

    def return_probability(self, n: int) -> float:
        return self.radial(n)[0]

    def sup_probability(self, n: int) -> float:
        return max(self.radial(n))

    def displacement_l1(self, n: int) -> float:
        # all letters are equivalent under the isotropy; count first-letter classes
        prob = self.radial(n)
        get = lambda r: prob[r] if 0 <= r < len(prob) else 0.0
        total = abs(get(0) - get(1))
        r = 1
        while get(r) > 0.0 or get(r + 1) > 0.0:
            starts_with = (self.q - 1) ** (r - 1)
            total += starts_with * abs(get(r) - get(r - 1))
            total += (self.sphere(r) - starts_with) * abs(get(r) - get(r + 1))
            r += 1
        return total

    def delta_translate(self, n: int, g=None) -> float:
        prob = self.radial(n)
        get = lambda r: prob[r] if 0 <= r < len(prob) else 0.0
        xlogx = lambda t: t * math.log(t) if t > 0.0 else 0.0
        # mixture entropy grouped by (distance, first-letter class)
        h_mix = -xlogx(0.5 * (get(0) + get(1)))
        r = 1
        while get(r) > 0.0 or get(r + 1) > 0.0 or get(r - 1) > 0.0:
            starts_with = (self.q - 1) ** (r - 1)
            h_mix -= starts_with * xlogx(0.5 * (get(r) + get(r - 1)))
            h_mix -= (self.sphere(r) - starts_with) * xlogx(0.5 * (get(r) + get(r + 1)))
            r += 1
        return h_mix - self.entropy(n)


def _is_radial_free(mu: Measure) -> bool:
    model = mu.model
    if not isinstance(model, FreeGroup):
        return False
    gens = set(model.generators())
    supp = set(mu.support())
    if supp != gens | {model.identity()}:
        return False
    weights = [mu[g] for g in gens]
    return max(weights) - min(weights) <= 1e-15 and mu[model.identity()] > 0.0


def profile_engine(mu: Measure, budget: int | None = None):
    require_admissible(mu)
    if _is_radial_free(mu):
        return _RadialFreeEngine(mu, budget=budget)
    return _TableEngine(mu, budget=budget)


# --- profiling operations ----------------------------------------------------

@dataclass
class IncrementSequence:
    """a_n = n (H(mu^{*n+1}) - H(mu^{*n})) for n = 1..max_n; truncated if the
    element budget stopped the powers before the requested range."""

    values: list[float]
    max_n: int
    truncated: bool


def entropy_increments(mu: Measure, n_max: int, budget: int | None = None,
                       engine=None) -> IncrementSequence:
    if n_max < 1:
        raise PreconditionError(f"increment range needs n_max >= 1, got {n_max}")
    eng = engine if engine is not None else profile_engine(mu, budget=budget)
    feasible = eng.max_power(n_max + 1)
    top = min(n_max, feasible - 1)
    values = [n * (eng.entropy(n + 1) - eng.entropy(n)) for n in range(1, top + 1)]
    return IncrementSequence(values, top, top < n_max)


def slow_entropy_estimate(mu: Measure, n_max: int, budget: int | None = None,
                          engine=None) -> float:
    """Tail-half minimum of a_n: a finite-sample estimate of its liminf."""
    seq = entropy_increments(mu, n_max, budget=budget, engine=engine)
    if not seq.values:
        raise PreconditionError("no increments were computable within budget")
    tail = seq.values[max(0, seq.max_n // 2 - 1):]
    return min(tail)


@dataclass
class SupportEntropyCheck:
    entropy: float
    log_support: float
    holds: bool


def entropy_vs_log_support_check(mu: Measure, n: int, budget: int | None = None,
                                 engine=None) -> SupportEntropyCheck:
    """H(mu^{*n}) <= log |supp mu^{*n}| (exact, unpruned powers)."""
    eng = engine if engine is not None else profile_engine(mu, budget=budget)
    h = eng.entropy(n)
    log_supp = math.log(eng.support_size(n))
    return SupportEntropyCheck(h, log_supp, h <= log_supp + 1e-9)


@dataclass
class ReturnProbabilityReport:
    n_max: int
    worst_symmetry_margin: float   # min over even n, g of mu^n(e) - mu^n(g)
    worst_entropy_margin: float    # min over even n of H(mu^n) + log mu^n(e)
    holds: bool


def return_probability_checks(mu: Measure, n_max: int, budget: int | None = None,
                              engine=None) -> ReturnProbabilityReport:
    """For even n: the walk returns to e at least as often as anywhere else,
    and H(mu^{*n}) >= -log mu^{*n}(e)."""
    eng = engine if engine is not None else profile_engine(mu, budget=budget)
    feasible = eng.max_power(n_max)
    worst_sym = math.inf
    worst_ent = math.inf
    for n in range(0, feasible + 1, 2):
        ret = eng.return_probability(n)
        worst_sym = min(worst_sym, ret - eng.sup_probability(n))
        worst_ent = min(worst_ent, eng.entropy(n) + math.log(ret))
    holds = worst_sym >= -1e-9 and worst_ent >= -1e-9
    return ReturnProbabilityReport(feasible, worst_sym, worst_ent, holds)


def ek_displacement(mu: Measure, n: int, exponent: float = 0.5,
                    budget: int | None = None, engine=None) -> float:
    """n^exponent * max_{|g|<=1} || mu^{*n} - g mu^{*n} ||_1.

    The default +1/2 scaling is the quantity the inequality chain bounds;
    exponent=-0.5 gives the vacuously bounded variant (the L1 norm never
    exceeds 2).
    """
    if n < 1:
        raise PreconditionError(f"displacement needs n >= 1, got {n}")
    eng = engine if engine is not None else profile_engine(mu, budget=budget)
    return (n ** exponent) * eng.displacement_l1(n)


@dataclass
class DisplacementChainCheck:
    """Margins of the chained bound at one (n, g):

    n^{1/2} ||mu^n - g mu^n||_1  <=  n^{1/2} sqrt(16 delta(mu^n, g mu^n))
                                 <=  sqrt(8 n (H(mu^{n+1}) - H(mu^n)) / min(mu(e), mu(g)))
    """

    displacement: float
    delta_bound: float
    entropy_bound: float
    holds: bool


def displacement_chain_check(mu: Measure, n: int, budget: int | None = None,
                             engine=None) -> DisplacementChainCheck:
    eng = engine if engine is not None else profile_engine(mu, budget=budget)
    model = mu.model
    scale = math.sqrt(n)
    disp = scale * eng.displacement_l1(n)
    if isinstance(eng, _RadialFreeEngine):
        worst_delta = eng.delta_translate(n)
        lam = min(mu[model.identity()], eng.step)
    else:
        worst_delta = max(eng.delta_translate(n, g) for g in model.generators())
        lam = min([mu[model.identity()]] + [mu[g] for g in model.generators() if g in mu])
    delta_bound = scale * math.sqrt(16.0 * worst_delta)
    increment = eng.entropy(n + 1) - eng.entropy(n)
    entropy_bound = math.sqrt(max(0.0, 8.0 * n * increment / lam))
    holds = disp <= delta_bound + 1e-9 and delta_bound <= entropy_bound + 1e-9
    return DisplacementChainCheck(disp, delta_bound, entropy_bound, holds)


@dataclass
class GrowthProfile:
    """Per-step profile rows plus summary statistics and identity checks."""

    ns: list[int]
    support_sizes: list[int]
    entropies: list[float]
    increments: list[float]
    return_probs: list[float]
    displacements: list[float]
    slow_entropy_estimate: float | None
    growth_exponent_estimate: float | None
    checks: dict = field(default_factory=dict)
    truncated: bool = False
    max_n: int = 0


def growth_profile(mu: Measure, n_max: int, budget: int | None = None,
                   displacement_exponent: float = 0.5,
                   include_displacement: bool = True,
                   apply_family_cap: bool = True) -> GrowthProfile:
    if n_max < 1:
        raise PreconditionError(f"profile needs n_max >= 1, got {n_max}")
    eng = profile_engine(mu, budget=budget)
    requested = n_max
    capped = family_profile_cap(mu.model, n_max) if apply_family_cap else n_max
    feasible = eng.max_power(capped + 1)
    top = min(capped, feasible - 1) if feasible >= 1 else 0
    if top < 1:
        raise BudgetExceededError(
            f"not even mu^2 fits the element budget", largest_feasible=feasible)
    ns = list(range(1, top + 1))
    entropies = [eng.entropy(n) for n in ns]
    increments = [n * (eng.entropy(n + 1) - eng.entropy(n)) for n in ns]
    support_sizes = [eng.support_size(n) for n in ns]
    return_probs = [eng.return_probability(n) for n in ns]
    displacements = ([ek_displacement(mu, n, exponent=displacement_exponent, engine=eng)
                      for n in ns] if include_displacement else [math.nan] * len(ns))

    tail = increments[max(0, top // 2 - 1):]
    slow = min(tail) if tail else None
    exponent = None
    if top >= 5 and mu.model.family != "free":
        exponent = weak_poly_exponent([1] + support_sizes)
    elif top >= 5:
        exponent = weak_poly_exponent([1] + support_sizes, mode="ratio")

    partial_sums_ok = True
    acc = 0.0
    for n in ns:
        acc = acc + (eng.entropy(n) - eng.entropy(n - 1))
        if abs(acc - eng.entropy(n)) > 1e-9 * max(1.0, eng.entropy(n)):
            partial_sums_ok = False
    checks = {
        "entropy_nondecreasing": all(a >= -1e-9 for a in increments),
        "partial_sum_identity": partial_sums_ok,
        "return_probability": return_probability_checks(mu, top, engine=eng).holds,
        "entropy_le_log_support": all(
            entropy_vs_log_support_check(mu, n, engine=eng).holds for n in ns),
    }
    return GrowthProfile(
        ns=ns, support_sizes=support_sizes, entropies=entropies,
        increments=increments, return_probs=return_probs,
        displacements=displacements, slow_entropy_estimate=slow,
        growth_exponent_estimate=exponent, checks=checks,
        truncated=top < requested, max_n=top)
