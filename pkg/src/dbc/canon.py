"""String and band representations built from words and cycles."""

from __future__ import annotations

from dataclasses import dataclass

from .bunch import DecoratedBunch
from .linalg import FrobeniusBlock, Matrix, companion_lift, tpoly_str
from .reps import Representation
from .scalars import FunctionField
from .words import SIM, Cycle, Word, is_decorated, is_periodic, validate_word


class InvalidWord(ValueError):
    pass


class PeriodicCycle(ValueError):
    pass


class BadPolynomial(ValueError):
    pass


@dataclass(frozen=True)
class StringData:
    word: Word

    def __str__(self):
        return str(self.word)


@dataclass(frozen=True)
class BandData:
    """A band: cycle, multiplicity m and monic irreducible phi.

    ``phi`` is a coefficient tuple (low to high) over k for decorated cycles
    and over K otherwise.
    """

    cycle: Cycle
    m: int
    phi: tuple

    def phi_str(self, ring) -> str:
        return tpoly_str(ring, self.phi)

    def __str__(self):
        return f"band({self.cycle}, m={self.m}, phi={self.phi})"


def _occurrences(letters) -> list[int]:
    """Position of each letter among the occurrences of the same letter."""
    seen: dict = {}
    out = []
    for x in letters:
        out.append(seen.get(x, 0))
        seen[x] = out[-1] + 1
    return out


def _place(b: DecoratedBunch, rows: dict, letters, occ, i: int, j: int, block, size: int):
    """Write ``block`` for the dash joining letter positions i and j."""
    x, y = letters[i], letters[j]
    if b.side[x] == "E":
        key, r, c = (x, y), occ[i], occ[j]
    else:
        key, r, c = (y, x), occ[j], occ[i]
    mat = rows[key]
    for a in range(size):
        for bb in range(size):
            mat[r * size + a][c * size + bb] = block[a][bb]


def _empty_blocks(b: DecoratedBunch, field: FunctionField, sizes: dict) -> dict:
    z = field.zero
    return {(x, y): [[z] * sizes.get(y, 0) for _ in range(sizes.get(x, 0))] for x, y in b.dash_pairs_EF()}


def _finish(b, field, sizes, rows) -> Representation:
    blocks = {k: Matrix(field, v, sizes.get(k[0], 0), sizes.get(k[1], 0)) for k, v in rows.items()}
    return Representation(b, field, sizes, blocks)


def build_string(b: DecoratedBunch, field: FunctionField, w: Word) -> Representation:
    """M(w): one basis vector per letter, z^d on every dash."""
    if isinstance(w, Cycle):
        raise InvalidWord("build_string needs a word, not a cycle")
    bad = validate_word(b, w)
    if bad:
        raise InvalidWord("; ".join(str(v) for v in bad))
    letters = w.letters
    sizes: dict = {}
    for x in letters:
        sizes[x] = sizes.get(x, 0) + 1
    occ = _occurrences(letters)
    rows = _empty_blocks(b, field, sizes)
    for i, c in enumerate(w.conns):
        if c != SIM:
            _place(b, rows, letters, occ, i, i + 1, [[field.monomial(1, c)]], 1)
    return _finish(b, field, sizes, rows)


def frobenius_block(b: DecoratedBunch, field: FunctionField, W: Cycle, m: int, phi) -> FrobeniusBlock:
    mode = "decorated" if is_decorated(b, W) else "plain"
    try:
        return companion_lift(field, phi, m, mode)
    except ValueError as exc:
        raise BadPolynomial(str(exc)) from exc


def build_band(b: DecoratedBunch, field: FunctionField, W: Cycle, m: int, phi) -> Representation:
    """M(W, m, phi): blocks of size m*deg(phi), z^d_i I on interior dashes and
    z^d Phi on the closing dash."""
    if not isinstance(W, Cycle):
        raise InvalidWord("build_band needs a cycle")
    bad = validate_word(b, W)
    if bad:
        raise InvalidWord("; ".join(str(v) for v in bad))
    if is_periodic(W):
        raise PeriodicCycle(f"{W} is periodic")
    fb = frobenius_block(b, field, W, m, phi)
    if not is_decorated(b, W) and any(c != 0 for c in W.cyclic_conns() if c != SIM):
        raise BadPolynomial("a non-decorated cycle must be standardized (all decorations 0)")
    size = fb.size
    letters = W.letters
    sizes: dict = {}
    for x in letters:
        sizes[x] = sizes.get(x, 0) + size
    occ = _occurrences(letters)
    rows = _empty_blocks(b, field, sizes)
    zero = field.zero
    for i, c in enumerate(W.word.conns):
        if c != SIM:
            zc = field.monomial(1, c)
            ident = [[zc if a == bb else zero for bb in range(size)] for a in range(size)]
            _place(b, rows, letters, occ, i, i + 1, ident, size)
    zd = field.monomial(1, W.d)
    phi_block = [[zd * a for a in r] for r in fb.matrix.rows]
    n = len(letters)
    _place(b, rows, letters, occ, n - 1, 0, phi_block, size)
    return _finish(b, field, sizes, rows)


def build(b: DecoratedBunch, field: FunctionField, item) -> Representation:
    if isinstance(item, StringData):
        return build_string(b, field, item.word)
    return build_band(b, field, item.cycle, item.m, item.phi)
