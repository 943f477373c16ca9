"""Words in a free group, written as strings.

Generator ``i`` is the letter ``chr(ord('a') + i)``; its inverse is the
upper-case letter.  Letters are ordered a < A < b < B < ..., and class
representatives are the lexicographically smallest cyclic rotation (of the
word or, for unoriented classes, of its inverse as well).
"""

import string

from .errors import ConfigurationError

LETTERS = string.ascii_lowercase


def letter(index, inverse=False):
    ch = LETTERS[index]
    return ch.upper() if inverse else ch


def letter_index(ch):
    return LETTERS.index(ch.lower())


def alphabet(rank):
    if not 1 <= rank <= len(LETTERS):
        raise ConfigurationError(f"rank must be between 1 and {len(LETTERS)}")
    return [c for i in range(rank) for c in (letter(i), letter(i, True))]


def validate(word, rank=None):
    for ch in word:
        if ch.lower() not in LETTERS:
            raise ConfigurationError(f"invalid letter {ch!r} in word {word!r}")
        if rank is not None and letter_index(ch) >= rank:
            raise ConfigurationError(f"letter {ch!r} exceeds rank {rank}")
    return word


def inverse(word):
    return word[::-1].swapcase()


def free_reduce(word):
    out = []
    for ch in word:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def is_reduced(word):
    return all(a != b.swapcase() for a, b in zip(word, word[1:]))


def is_cyclically_reduced(word):
    return is_reduced(word) and (len(word) < 2 or word[0] != word[-1].swapcase())


def cyclic_reduce(word):
    """Conjugate a word to its cyclically reduced core."""
    w = free_reduce(word)
    while len(w) >= 2 and w[0] == w[-1].swapcase():
        w = w[1:-1]
    return w


def root(word):
    """(primitive root, exponent) of a cyclically reduced word."""
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d], n // d
    return word, 1


def is_primitive(word):
    return len(word) > 0 and root(word)[1] == 1


def sort_key(word):
    return tuple((letter_index(ch), ch.isupper()) for ch in word)


def rotations(word):
    return [word[i:] + word[:i] for i in range(len(word))] or [word]


def canonical(word, unoriented=True):
    """Representative of the conjugacy class of ``word``."""
    w = cyclic_reduce(word)
    if not w:
        return w
    candidates = rotations(w)
    if unoriented:
        candidates += rotations(inverse(w))
    return min(candidates, key=sort_key)


def exponent_sum(word, index=0):
    ch = letter(index)
    return word.count(ch) - word.count(ch.upper())


def cyclically_reduced_words(rank, length):
    """All cyclically reduced words of the given length, in lexicographic order."""
    alpha = alphabet(rank)
    if length == 0:
        return [""]
    out = []

    def extend(prefix):
        if len(prefix) == length:
            if length < 2 or prefix[0] != prefix[-1].swapcase():
                out.append(prefix)
            return
        for ch in alpha:
            if prefix and prefix[-1] == ch.swapcase():
                continue
            extend(prefix + ch)

    extend("")
    return out
