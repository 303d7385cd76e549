"""Lyndon-word basis of the free Lie algebra truncated at a fixed degree.

Basis words are ordered by length and then lexicographically; this ordering
fixes the public coordinate layout of every log-signature vector produced
by the library.  Each Lyndon word carries the tensor expansion of its
standard right bracketing, which is unitriangular against the words
themselves and therefore supports exact coordinate extraction by
back-substitution.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .tensor_algebra import TruncatedTensor, Word, word_index

__all__ = [
    "LyndonBasis",
    "enumerate_lyndon",
    "lyndon_words",
    "logsig_dim",
    "sig_dim",
    "witt_number",
    "project_to_basis",
    "expand_from_basis",
]


def _mobius(n: int) -> int:
    if n == 1:
        return 1
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def witt_number(width: int, n: int) -> int:
    """Dimension of the degree-n component of the free Lie algebra on ``width`` letters."""
    total = 0
    for k in range(1, n + 1):
        if n % k == 0:
            total += _mobius(k) * width ** (n // k)
    assert total % n == 0
    return total // n


def logsig_dim(width: int, degree: int) -> int:
    """Dimension of the truncated log-signature: cumulative Witt numbers."""
    if width < 1 or degree < 1:
        raise ValueError("width and degree must be positive")
    return sum(witt_number(width, n) for n in range(1, degree + 1))


def sig_dim(width: int, degree: int) -> int:
    """Storage size of a truncated signature, degree-0 scalar included."""
    if width < 1:
        raise ValueError("width must be positive")
    if width == 1:
        return degree + 1
    return (width ** (degree + 1) - 1) // (width - 1)


def lyndon_words(width: int, degree: int) -> list[Word]:
    """All Lyndon words of length <= degree over {1..width}, by length then lex.

    Uses Duval's generation algorithm, which emits the words in plain
    lexicographic order; the result is re-sorted into the public layout.
    """
    if width < 1 or degree < 1:
        raise ValueError("width and degree must be positive")
    words: list[Word] = []
    w = [1]
    while w:
        words.append(tuple(w))
        w = (w * (degree // len(w) + 1))[:degree]
        while w and w[-1] == width:
            w.pop()
        if w:
            w[-1] += 1
    words.sort(key=lambda word: (len(word), word))
    return words


def _standard_factorization(word: Word) -> tuple[Word, Word]:
    # right factor = lexicographically smallest proper suffix
    right = min(word[i:] for i in range(1, len(word)))
    return word[: len(word) - len(right)], right


@lru_cache(maxsize=None)
def _bracket_expansion(word: Word) -> dict[Word, int]:
    """Tensor expansion of the standard bracketing of a Lyndon word."""
    if len(word) == 1:
        return {word: 1}
    left, right = _standard_factorization(word)
    a = _bracket_expansion(left)
    b = _bracket_expansion(right)
    out: dict[Word, int] = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            key = wa + wb
            out[key] = out.get(key, 0) + ca * cb
            key = wb + wa
            out[key] = out.get(key, 0) - ca * cb
    return {k: v for k, v in out.items() if v != 0}


class LyndonBasis:
    """Lyndon basis of the free Lie algebra on ``width`` letters up to ``degree``."""

    def __init__(self, width: int, degree: int):
        self.width = width
        self.degree = degree
        self.words: tuple[Word, ...] = tuple(lyndon_words(width, degree))
        self.expansions: tuple[dict[Word, int], ...] = tuple(
            _bracket_expansion(w) for w in self.words
        )
        self._word_pos = {w: i for i, w in enumerate(self.words)}
        # contiguous slice of self.words holding the words of each length
        self._level_slices: list[slice] = []
        start = 0
        for n in range(1, degree + 1):
            count = sum(1 for w in self.words[start:] if len(w) == n)
            self._level_slices.append(slice(start, start + count))
            start += count
        # per word: flat indices and coefficients of its expansion
        self._flat: list[tuple[np.ndarray, np.ndarray]] = []
        for w, exp in zip(self.words, self.expansions):
            idx = np.array([word_index(u, width) for u in exp], dtype=np.intp)
            coef = np.array(list(exp.values()), dtype=np.float64)
            self._flat.append((idx, coef))
        self._level_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    @property
    def dim(self) -> int:
        return len(self.words)

    def words_of_length(self, n: int) -> tuple[Word, ...]:
        return self.words[self._level_slices[n - 1]]

    def word_position(self, word: Word) -> int:
        return self._word_pos[tuple(word)]

    def level_system(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Lyndon flat indices and the unitriangular change-of-basis matrix at degree n.

        ``matrix[i, j]`` is the coefficient of Lyndon word i (as a plain word)
        in the bracket expansion of Lyndon word j; it is lower triangular with
        unit diagonal in the lexicographic order.
        """
        if n in self._level_cache:
            return self._level_cache[n]
        sl = self._level_slices[n - 1]
        words = self.words[sl]
        pos = {w: i for i, w in enumerate(words)}
        r = len(words)
        idx = np.array([word_index(w, self.width) for w in words], dtype=np.intp)
        matrix = np.zeros((r, r))
        for j, w in enumerate(words):
            for u, c in self.expansions[sl.start + j].items():
                i = pos.get(u)
                if i is not None:
                    matrix[i, j] = c
        self._level_cache[n] = (idx, matrix)
        return idx, matrix

    def __repr__(self) -> str:
        return f"LyndonBasis(width={self.width}, degree={self.degree}, dim={self.dim})"


@lru_cache(maxsize=64)
def enumerate_lyndon(width: int, degree: int) -> LyndonBasis:
    """Construct (and cache) the Lyndon basis for the given width and degree."""
    return LyndonBasis(width, degree)


def project_to_basis(
    t: TruncatedTensor,
    basis: LyndonBasis,
    check: bool = True,
    tol: float = 1e-10,
) -> np.ndarray:
    """Coordinates of a Lie element ``t`` in the Lyndon basis.

    Solved degree by degree through the triangular structure of the
    bracket expansions.  With ``check`` enabled the reconstruction residual
    is verified, so a non-Lie input raises instead of being silently
    approximated.
    """
    if t.width != basis.width or t.degree != basis.degree:
        raise ValueError("tensor and basis have mismatched width or degree")
    if check and abs(t.scalar()) > tol:
        raise ValueError("not a Lie element: nonzero degree-0 coefficient")
    coords = np.zeros(basis.dim)
    for n in range(1, basis.degree + 1):
        sl = basis._level_slices[n - 1]
        if sl.start == sl.stop:
            continue
        idx, matrix = basis.level_system(n)
        block = t.levels[n]
        c = np.linalg.solve(matrix, block[idx])
        coords[sl] = c
        if check:
            recon = np.zeros_like(block)
            for j in range(sl.start, sl.stop):
                widx, wcoef = basis._flat[j]
                recon[widx] += coords[j] * wcoef
            scale = max(1.0, float(np.max(np.abs(block), initial=0.0)))
            if np.max(np.abs(recon - block), initial=0.0) > tol * scale:
                raise ValueError(
                    f"not a Lie element: degree-{n} block is outside the free Lie algebra"
                )
    return coords


def expand_from_basis(coords, basis: LyndonBasis) -> TruncatedTensor:
    """Lie element with the given Lyndon-basis coordinates."""
    coords = np.asarray(coords, dtype=np.float64).reshape(-1)
    if coords.size != basis.dim:
        raise ValueError(
            f"expected {basis.dim} coordinates for {basis!r}, got {coords.size}"
        )
    out = TruncatedTensor.zero(basis.width, basis.degree)
    for j, w in enumerate(basis.words):
        if coords[j] == 0.0:
            continue
        idx, coef = basis._flat[j]
        out.levels[len(w)][idx] += coords[j] * coef
    return out
