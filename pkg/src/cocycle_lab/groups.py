"""Exact models of finitely generated groups.

Five built-in families: free abelian Z^d, the discrete Heisenberg group,
free groups F_k, the lamplighter group (Z/2 wr Z), and cyclic groups Z/N.
Elements are plain hashable Python values (tuples, ints, frozensets of
ints) in a canonical encoding, so they can key sparse measures directly
and equality of encodings is equality in the group.

Words over the generating set are tuples of signed 1-based indices into
the positive generator list: ``+i`` names generator i, ``-i`` its inverse.
Relators are Words evaluating to the identity; they back the
well-definedness checks for representations and cocycles.
"""

from __future__ import annotations

from dataclasses import dataclass

from .budget import resolve_budget
from .errors import BudgetExceededError, InvalidElementError, UnsupportedFamilyError

Word = tuple[int, ...]

# letter alphabet for free-group encodings; 'e' is reserved for the identity
_FREE_LETTERS = "abcdfghijklmnopqrstuvwxyz"


def word_inverse(w: Word) -> Word:
    return tuple(-s for s in reversed(w))


def commutator_word(u: Word, v: Word) -> Word:
    return u + v + word_inverse(u) + word_inverse(v)


@dataclass(frozen=True)
class GroupModel:
    """Common interface: subclasses implement the group law on canonical encodings."""

    def spec(self) -> str:
        raise NotImplementedError

    @property
    def family(self) -> str:
        raise NotImplementedError

    def identity(self):
        raise NotImplementedError

    def multiply(self, a, b):
        raise NotImplementedError

    def inverse(self, a):
        raise NotImplementedError

    def validate(self, g) -> None:
        raise NotImplementedError

    def positive_generator_names(self) -> list[str]:
        raise NotImplementedError

    def positive_generator_elements(self) -> list:
        raise NotImplementedError

    def sort_key(self, g):
        """Total order on elements; fixes deterministic iteration everywhere."""
        raise NotImplementedError

    def encode(self, g) -> str:
        raise NotImplementedError

    def decode(self, s: str):
        raise NotImplementedError

    # finitely presented families override these two
    def express(self, g) -> Word:
        raise UnsupportedFamilyError(
            f"{self.spec()}: no finite presentation available (express unsupported)")

    def relators(self) -> list[Word]:
        raise UnsupportedFamilyError(
            f"{self.spec()}: no finite presentation available (relators unsupported)")

    def is_finitely_presented(self) -> bool:
        try:
            self.relators()
        except UnsupportedFamilyError:
            return False
        return True

    # derived operations -------------------------------------------------

    def generators(self) -> list:
        """Symmetric generating set, identity excluded, deterministic order."""
        out, seen = [], set()
        for el in self.positive_generator_elements():
            for cand in (el, self.inverse(el)):
                if cand != self.identity() and cand not in seen:
                    seen.add(cand)
                    out.append(cand)
        return out

    def generator_element(self, letter: int):
        """Element for a signed word letter."""
        pos = self.positive_generator_elements()
        if not isinstance(letter, int) or letter == 0 or abs(letter) > len(pos):
            raise InvalidElementError(f"{self.spec()}: bad word letter {letter!r}")
        el = pos[abs(letter) - 1]
        return el if letter > 0 else self.inverse(el)

    def evaluate_word(self, w: Word):
        g = self.identity()
        for letter in w:
            g = self.multiply(g, self.generator_element(letter))
        return g

    def word_to_str(self, w: Word) -> str:
        names = self.positive_generator_names()
        parts = []
        for letter in w:
            name = names[abs(letter) - 1]
            parts.append(name if letter > 0 else name + "^-1")
        return " ".join(parts) if parts else "<empty>"

    def ball(self, r: int, budget: int | None = None) -> tuple[set, list[int]]:
        """Exact word-metric ball of radius r by breadth-first search.

        Returns (elements, sizes) with sizes[j] = |B_j| for j <= r.  Raises
        ``BudgetExceededError`` with the partial radius once the element
        budget is passed.
        """
        if r < 0:
            raise ValueError(f"ball radius must be >= 0, got {r}")
        limit = resolve_budget(budget)
        e = self.identity()
        seen = {e}
        sizes = [1]
        frontier = [e]
        gens = self.generators()
        for j in range(1, r + 1):
            nxt = []
            for x in frontier:
                for s in gens:
                    y = self.multiply(x, s)
                    if y not in seen:
                        if len(seen) >= limit:
                            raise BudgetExceededError(
                                f"{self.spec()}: ball of radius {j} exceeds element "
                                f"budget {limit}",
                                partial_radius=j - 1, sizes=sizes)
                        seen.add(y)
                        nxt.append(y)
            nxt.sort(key=self.sort_key)
            frontier = nxt
            sizes.append(len(seen))
        return seen, sizes


def _power_word(letter: int, exponent: int) -> Word:
    if exponent >= 0:
        return (letter,) * exponent
    return (-letter,) * (-exponent)


@dataclass(frozen=True)
class FreeAbelian(GroupModel):
    """Z^d with componentwise addition; elements are integer d-tuples."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"free-abelian rank must be >= 1, got {self.d}")

    def spec(self) -> str:
        return f"zd:{self.d}"

    @property
    def family(self) -> str:
        return "free-abelian"

    def identity(self):
        return (0,) * self.d

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(-x for x in a)

    def validate(self, g) -> None:
        if not (isinstance(g, tuple) and len(g) == self.d
                and all(isinstance(x, int) for x in g)):
            raise InvalidElementError(f"{self.spec()}: invalid element {g!r}")

    def positive_generator_names(self) -> list[str]:
        return [f"e{i}" for i in range(1, self.d + 1)]

    def positive_generator_elements(self) -> list:
        out = []
        for i in range(self.d):
            v = [0] * self.d
            v[i] = 1
            out.append(tuple(v))
        return out

    def sort_key(self, g):
        return g

    def encode(self, g) -> str:
        return ",".join(str(x) for x in g)

    def decode(self, s: str):
        try:
            g = tuple(int(tok) for tok in s.split(","))
        except ValueError as exc:
            raise InvalidElementError(f"{self.spec()}: cannot parse element {s!r}") from exc
        self.validate(g)
        return g

    def express(self, g) -> Word:
        self.validate(g)
        w: list[int] = []
        for i, n in enumerate(g, start=1):
            w.extend(_power_word(i, n))
        return tuple(w)

    def relators(self) -> list[Word]:
        return [commutator_word((i,), (j,))
                for i in range(1, self.d + 1) for j in range(i + 1, self.d + 1)]


# commutator z = x y x^-1 y^-1 in the Heisenberg presentation
_HEIS_Z: Word = (1, 2, -1, -2)


@dataclass(frozen=True)
class Heisenberg(GroupModel):
    """Discrete Heisenberg group: triples (a, b, c) for the upper unitriangular
    matrix with superdiagonal (a, b) and corner c.

    Law: (a1,b1,c1)(a2,b2,c2) = (a1+a2, b1+b2, c1+c2+a1*b2).
    """

    def spec(self) -> str:
        return "heisenberg"

    @property
    def family(self) -> str:
        return "heisenberg"

    def identity(self):
        return (0, 0, 0)

    def multiply(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def inverse(self, a):
        return (-a[0], -a[1], a[0] * a[1] - a[2])

    def validate(self, g) -> None:
        if not (isinstance(g, tuple) and len(g) == 3
                and all(isinstance(x, int) for x in g)):
            raise InvalidElementError(f"heisenberg: invalid element {g!r}")

    def positive_generator_names(self) -> list[str]:
        return ["x", "y"]

    def positive_generator_elements(self) -> list:
        return [(1, 0, 0), (0, 1, 0)]

    def sort_key(self, g):
        return g

    def encode(self, g) -> str:
        return ",".join(str(x) for x in g)

    def decode(self, s: str):
        try:
            g = tuple(int(tok) for tok in s.split(","))
        except ValueError as exc:
            raise InvalidElementError(f"heisenberg: cannot parse element {s!r}") from exc
        self.validate(g)
        return g

    def express(self, g) -> Word:
        # g = x^a y^b z^(c - a*b), z the commutator word
        self.validate(g)
        a, b, c = g
        m = c - a * b
        w = list(_power_word(1, a)) + list(_power_word(2, b))
        z = _HEIS_Z if m >= 0 else word_inverse(_HEIS_Z)
        w.extend(z * abs(m))
        return tuple(w)

    def relators(self) -> list[Word]:
        # [x,y] z^-1 is freely trivial once z is expanded but kept as part of
        # the documented presentation; [x,z] and [y,z] carry the content.
        return [
            _HEIS_Z + word_inverse(_HEIS_Z),
            commutator_word((1,), _HEIS_Z),
            commutator_word((2,), _HEIS_Z),
        ]


@dataclass(frozen=True)
class FreeGroup(GroupModel):
    """Free group F_k; elements are reduced words as tuples of signed letters."""

    k: int

    def __post_init__(self):
        if not 1 <= self.k <= len(_FREE_LETTERS):
            raise ValueError(f"free rank must be in [1, {len(_FREE_LETTERS)}], got {self.k}")

    def spec(self) -> str:
        return f"free:{self.k}"

    @property
    def family(self) -> str:
        return "free"

    def identity(self):
        return ()

    def multiply(self, a, b):
        i, j = len(a), 0
        while i > 0 and j < len(b) and a[i - 1] == -b[j]:
            i -= 1
            j += 1
        return a[:i] + b[j:]

    def inverse(self, a):
        return word_inverse(a)

    def reduce(self, letters) -> tuple:
        """Canonical (freely reduced) element from an arbitrary letter sequence."""
        out: list[int] = []
        for s in letters:
            if out and out[-1] == -s:
                out.pop()
            else:
                out.append(s)
        g = tuple(out)
        self.validate(g)
        return g

    def validate(self, g) -> None:
        if not isinstance(g, tuple):
            raise InvalidElementError(f"{self.spec()}: invalid element {g!r}")
        for idx, s in enumerate(g):
            if not isinstance(s, int) or s == 0 or abs(s) > self.k:
                raise InvalidElementError(f"{self.spec()}: invalid letter {s!r} in {g!r}")
            if idx > 0 and g[idx - 1] == -s:
                raise InvalidElementError(f"{self.spec()}: word {g!r} is not reduced")

    def positive_generator_names(self) -> list[str]:
        return list(_FREE_LETTERS[:self.k])

    def positive_generator_elements(self) -> list:
        return [(i,) for i in range(1, self.k + 1)]

    def sort_key(self, g):
        return (len(g), g)

    def encode(self, g) -> str:
        if not g:
            return "e"
        return "".join(
            _FREE_LETTERS[s - 1] if s > 0 else _FREE_LETTERS[-s - 1].upper() for s in g)

    def decode(self, s: str):
        if s == "e":
            return ()
        out = []
        for ch in s:
            low = ch.lower()
            if low not in _FREE_LETTERS[:self.k]:
                raise InvalidElementError(f"{self.spec()}: cannot parse element {s!r}")
            idx = _FREE_LETTERS.index(low) + 1
            out.append(idx if ch.islower() else -idx)
        g = tuple(out)
        self.validate(g)
        return g

    def express(self, g) -> Word:
        self.validate(g)
        return g

    def relators(self) -> list[Word]:
        return []


@dataclass(frozen=True)
class Lamplighter(GroupModel):
    """Z/2 wr Z: (lit lamp positions, cursor).  Generators: cursor steps and
    the toggle at the cursor.  Infinitely presented, so express/relators are
    unsupported; the family serves the measure and growth machinery only.
    """

    def spec(self) -> str:
        return "lamplighter"

    @property
    def family(self) -> str:
        return "lamplighter"

    def identity(self):
        return (frozenset(), 0)

    def multiply(self, a, b):
        lamps_a, i = a
        lamps_b, j = b
        shifted = frozenset(p + i for p in lamps_b)
        return (lamps_a ^ shifted, i + j)

    def inverse(self, a):
        lamps, i = a
        return (frozenset(p - i for p in lamps), -i)

    def validate(self, g) -> None:
        ok = (isinstance(g, tuple) and len(g) == 2 and isinstance(g[0], frozenset)
              and isinstance(g[1], int) and all(isinstance(p, int) for p in g[0]))
        if not ok:
            raise InvalidElementError(f"lamplighter: invalid element {g!r}")

    def positive_generator_names(self) -> list[str]:
        return ["t", "s"]

    def positive_generator_elements(self) -> list:
        return [(frozenset(), 1), (frozenset([0]), 0)]

    def sort_key(self, g):
        lamps, i = g
        return (i, len(lamps), tuple(sorted(lamps)))

    def encode(self, g) -> str:
        lamps, i = g
        return ",".join(str(p) for p in sorted(lamps)) + "|" + str(i)

    def decode(self, s: str):
        head, sep, tail = s.rpartition("|")
        if not sep:
            raise InvalidElementError(f"lamplighter: cannot parse element {s!r}")
        try:
            cursor = int(tail)
            lamps = frozenset(int(tok) for tok in head.split(",") if tok != "")
        except ValueError as exc:
            raise InvalidElementError(f"lamplighter: cannot parse element {s!r}") from exc
        return (lamps, cursor)


@dataclass(frozen=True)
class Cyclic(GroupModel):
    """Z/N with additive notation; elements are residues in [0, N)."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"cyclic order must be >= 2, got {self.n}")

    def spec(self) -> str:
        return f"cyclic:{self.n}"

    @property
    def family(self) -> str:
        return "cyclic"

    def identity(self):
        return 0

    def multiply(self, a, b):
        return (a + b) % self.n

    def inverse(self, a):
        return (-a) % self.n

    def validate(self, g) -> None:
        if not (isinstance(g, int) and 0 <= g < self.n):
            raise InvalidElementError(f"{self.spec()}: invalid element {g!r}")

    def positive_generator_names(self) -> list[str]:
        return ["g"]

    def positive_generator_elements(self) -> list:
        return [1]

    def sort_key(self, g):
        return g

    def encode(self, g) -> str:
        return str(g)

    def decode(self, s: str):
        try:
            g = int(s)
        except ValueError as exc:
            raise InvalidElementError(f"{self.spec()}: cannot parse element {s!r}") from exc
        self.validate(g)
        return g

    def express(self, g) -> Word:
        self.validate(g)
        return (1,) * g

    def relators(self) -> list[Word]:
        return [(1,) * self.n]


def free_abelian(d: int) -> FreeAbelian:
    return FreeAbelian(d)


def heisenberg() -> Heisenberg:
    return Heisenberg()


def free_group(k: int) -> FreeGroup:
    return FreeGroup(k)


def lamplighter() -> Lamplighter:
    return Lamplighter()


def cyclic(n: int) -> Cyclic:
    return Cyclic(n)
