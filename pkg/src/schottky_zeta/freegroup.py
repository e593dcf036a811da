"""Reduced words and primitive conjugacy classes in the free group of rank g.

Letters are nonzero integers ``+-1 .. +-g``; ``-i`` stands for the inverse of
generator ``i``. Internally letters are mapped to *ranks*
``1 -> 0, -1 -> 1, 2 -> 2, -2 -> 3, ...`` so that the canonical order
``1 < -1 < 2 < -2 < ...`` is the integer order and inversion is ``rank ^ 1``.

A primitive conjugacy class is represented by its cyclically reduced word
that is lexicographically smallest among its rotations. Since the word is
primitive this minimum is strict, i.e. the representative is a Lyndon word;
:func:`class_words` enumerates them with a prenecklace search
(Ruskey-Savage-Wang recursion) pruned by the free-reduction constraint.
Inversion is *not* quotiented out: ``{w}`` and ``{w^-1}`` are distinct classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import BadLetter, NotCyclicallyReduced


def letter_to_rank(x: int) -> int:
    return 2 * (x - 1) if x > 0 else 2 * (-x - 1) + 1


def rank_to_letter(r: int) -> int:
    i = r // 2 + 1
    return -i if r & 1 else i


def _check_letters(letters: Sequence[int], rank: int) -> None:
    for x in letters:
        if not isinstance(x, int) or x == 0 or abs(x) > rank:
            raise BadLetter(f"letter {x!r} not in +-1..+-{rank}")


@dataclass(frozen=True)
class ReducedWord:
    letters: tuple[int, ...]
    rank: int

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        _check_letters(letters, self.rank)
        for x, y in zip(letters, letters[1:]):
            if x == -y:
                raise ValueError(f"word {letters} is not freely reduced")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def _trusted(cls, letters: tuple[int, ...], rank: int) -> "ReducedWord":
        # skips validation; callers guarantee a reduced word
        obj = object.__new__(cls)
        object.__setattr__(obj, "letters", letters)
        object.__setattr__(obj, "rank", rank)
        return obj

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple(-x for x in reversed(self.letters)), self.rank)

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return reduce(self.letters + other.letters, max(self.rank, other.rank))

    def is_cyclically_reduced(self) -> bool:
        return len(self.letters) < 2 or self.letters[0] != -self.letters[-1]

    def rotations(self) -> list[tuple[int, ...]]:
        w = self.letters
        return [w[i:] + w[:i] for i in range(len(w))]

    def sort_key(self) -> tuple[int, ...]:
        return tuple(letter_to_rank(x) for x in self.letters)


@dataclass(frozen=True)
class ConjClass:
    """A primitive conjugacy class, stored as its canonical representative."""

    rep: ReducedWord

    @property
    def length(self) -> int:
        return len(self.rep)

    @property
    def letters(self) -> tuple[int, ...]:
        return self.rep.letters

    def inverse(self) -> "ConjClass":
        return canonical_class(self.rep.inverse())


def reduce(letters: Sequence[int], rank: int) -> ReducedWord:
    """Free reduction by cancelling adjacent ``x, -x`` pairs."""
    letters = tuple(letters)
    _check_letters(letters, rank)
    stack: list[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return ReducedWord(tuple(stack), rank)


def cyclic_reduce(w: ReducedWord) -> tuple[ReducedWord, ReducedWord]:
    """Split ``w = conjugator * core * conjugator^-1`` with ``core`` cyclically reduced."""
    letters = w.letters
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == -letters[j]:
        i += 1
        j -= 1
    core = letters[i : j + 1] if letters else ()
    return ReducedWord(core, w.rank), ReducedWord(letters[:i], w.rank)


def is_primitive(w: ReducedWord) -> bool:
    """True iff the cyclically reduced word ``w`` is not a proper power."""
    n = len(w)
    if n == 0:
        raise NotCyclicallyReduced("the empty word is not a class representative")
    if not w.is_cyclically_reduced():
        raise NotCyclicallyReduced(f"{w.letters} is not cyclically reduced")
    letters = w.letters
    for d in range(1, n):
        if n % d == 0 and letters == letters[:d] * (n // d):
            return False
    return True


def canonical_class(w: ReducedWord) -> ConjClass:
    """Canonical representative of the conjugacy class of a non-power ``w``."""
    core, _ = cyclic_reduce(w)
    if not is_primitive(core):
        raise ValueError(f"{w.letters} is a proper power")
    best = min(core.rotations(), key=lambda r: tuple(letter_to_rank(x) for x in r))
    return ConjClass(ReducedWord(best, w.rank))


def class_words(rank: int, length: int, first: int | None = None) -> list[tuple[int, ...]]:
    """Canonical representatives of length exactly ``length``, as rank tuples.

    Output is in lexicographic order. ``first`` restricts the search to
    representatives whose first rank is ``first``; the partitions over all
    first ranks are disjoint and cover the full output.
    """
    k = 2 * rank
    n = length
    out: list[tuple[int, ...]] = []
    if n < 1 or rank < 1:
        return out
    a = [0] * (n + 1)
    append = out.append

    def gen(t: int, p: int) -> None:
        lo = a[t - p]
        forbid = a[t - 1] ^ 1
        if t == n:
            # Lyndon iff the last letter breaks the period (c > lo); it also
            # may not cancel against the first letter (cyclic reduction)
            first_inv = a[1] ^ 1
            for c in range(lo + 1, k):
                if c != forbid and c != first_inv:
                    a[n] = c
                    append(tuple(a[1:]))
            return
        for c in range(lo, k):
            if c == forbid:
                continue
            a[t] = c
            gen(t + 1, p if c == lo else t)

    firsts = range(k) if first is None else (first,)
    for c in firsts:
        a[1] = c
        if n == 1:
            out.append((c,))
        else:
            gen(2, 1)
    return out


def enumerate_classes(rank: int, max_len: int, first_letter: int | None = None) -> Iterator[ConjClass]:
    """Stream every primitive conjugacy class of word length ``<= max_len``.

    Order is by length, then lexicographic in ``1 < -1 < 2 < -2 < ...``.
    The stream is produced one length at a time.
    """
    first = None if first_letter is None else letter_to_rank(first_letter)
    for n in range(1, max_len + 1):
        for ranks in class_words(rank, n, first):
            yield ConjClass(ReducedWord._trusted(tuple(rank_to_letter(r) for r in ranks), rank))


def enumerate_coset_reps(rank: int, i: int, max_len: int) -> Iterator[ReducedWord]:
    """Reduced words of length ``<= max_len`` whose last letter is not ``+-i``.

    These are representatives of the left cosets ``w <gamma_i>``; the empty
    word (the identity coset) comes first, then by length.
    """
    if not 1 <= i <= rank:
        raise BadLetter(f"generator index {i} not in 1..{rank}")
    letters = [x for j in range(1, rank + 1) for x in (j, -j)]
    level = [()]
    yield ReducedWord._trusted((), rank)
    for _ in range(max_len):
        nxt = []
        for w in level:
            for x in letters:
                if w:
                    if w[0] == -x:
                        continue
                elif abs(x) == i:
                    continue
                nxt.append((x,) + w)
        nxt.sort(key=lambda w: tuple(letter_to_rank(x) for x in w))
        for w in nxt:
            yield ReducedWord._trusted(w, rank)
        level = nxt


def cyclically_reduced_count(rank: int, length: int) -> int:
    """Number of cyclically reduced words of the given length (closed form)."""
    g = rank
    return (2 * g - 1) ** length + (g - 1) * (-1) ** length + g


def _mobius(n: int) -> int:
    result, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    return -result if m > 1 else result


def primitive_class_count(rank: int, length: int) -> int:
    """Number of primitive conjugacy classes of exact word length ``length``."""
    total = sum(
        _mobius(length // d) * cyclically_reduced_count(rank, d)
        for d in range(1, length + 1)
        if length % d == 0
    )
    return total // length
