"""Words and cycles over a decorated bunch.

A word is a sequence of letters joined by connectors; a connector is either
``SIM`` (the two letters are ~-partners) or an integer d (the letters are
joined by a dash carrying z^d).  A cycle is a cyclic word plus the integer
on its closing dash.

Equivalence of words is generated by rescaling the basis vector of a
non-decorated ~-group (a partner pair, or a lone letter at an end of the
word) by z^k.  That shifts the decorations of the dashes touching the
group, +k on the side of an E-letter and -k on the side of an F-letter.  The
canonical form sweeps every adjustable decoration to zero, keeping one
invariant per run of non-decorated groups between two decorated ones.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .bunch import DecoratedBunch, Violation

SIM = "~"


class BadShiftIndex(ValueError):
    pass


class WordParseError(ValueError):
    pass


@dataclass(frozen=True)
class Word:
    letters: tuple
    conns: tuple

    def __post_init__(self):
        if len(self.conns) != max(len(self.letters) - 1, 0):
            raise ValueError("a word of n letters needs n-1 connectors")

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        out = [self.letters[0]] if self.letters else []
        for c, x in zip(self.conns, self.letters[1:]):
            out.append("~" if c == SIM else f"-[{c}]-")
            out.append(x)
        return " ".join(out)

    def __repr__(self):
        return f"Word({self})"

    def sort_key(self):
        return (len(self.letters), str(self))


@dataclass(frozen=True)
class Cycle:
    word: Word
    d: int

    @property
    def letters(self):
        return self.word.letters

    def __len__(self):
        return len(self.word)

    def cyclic_conns(self) -> tuple:
        """Connectors r_1..r_n, the last one being the closing dash."""
        return self.word.conns + (self.d,)

    def __str__(self):
        return f"cycle({self.word} ; [{self.d}])"

    def __repr__(self):
        return f"Cycle({self})"

    def sort_key(self):
        return (len(self.word), str(self))


# ---------------------------------------------------------------------------
# text


_TOKEN = re.compile(r"\s*(~|-\[\s*-?\d+\s*\]-|[^\s~\[\]();]+)")


def parse_word(text: str) -> Word:
    text = text.strip()
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise WordParseError(f"cannot parse word {text!r} at {pos}")
        tokens.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    if not tokens or len(tokens) % 2 == 0:
        raise WordParseError(f"malformed word {text!r}")
    letters = tokens[0::2]
    conns = []
    for tok in tokens[1::2]:
        if tok == "~":
            conns.append(SIM)
        elif tok.startswith("-["):
            conns.append(int(tok[2:-2]))
        else:
            raise WordParseError(f"expected a connector, got {tok!r} in {text!r}")
    for x in letters:
        if x == "~" or x.startswith("-["):
            raise WordParseError(f"expected a letter, got {x!r} in {text!r}")
    return Word(tuple(letters), tuple(conns))


_CYCLE = re.compile(r"^\s*cycle\s*\((.*);\s*\[\s*(-?\d+)\s*\]\s*\)\s*$", re.S)


def parse(text: str) -> Word | Cycle:
    """Parse ``WORD`` or ``cycle( WORD ; [INT] )``."""
    m = _CYCLE.match(text)
    if m:
        return Cycle(parse_word(m.group(1)), int(m.group(2)))
    if text.strip().startswith("cycle"):
        raise WordParseError(f"malformed cycle {text!r}")
    return parse_word(text)


# ---------------------------------------------------------------------------
# validity


def validate_word(b: DecoratedBunch, w: Word | Cycle) -> list[Violation]:
    word = w.word if isinstance(w, Cycle) else w
    v: list[Violation] = []
    letters, conns = word.letters, word.conns
    if not letters:
        return [Violation("EmptyWord", ())]
    unknown = [x for x in letters if x not in b.side]
    if unknown:
        return [Violation("UnknownElement", (x,)) for x in dict.fromkeys(unknown)]
    for i, c in enumerate(conns):
        x, y = letters[i], letters[i + 1]
        if c == SIM:
            if b.partner.get(x) != y:
                v.append(Violation("SimViolation", (x, y), f"connector {i + 1} is ~ but {x}~{y} fails"))
        elif not b.dash(x, y):
            v.append(Violation("DashViolation", (x, y), f"connector {i + 1} is a dash but {x}-{y} fails"))
        if i + 1 < len(conns) and (c == SIM) == (conns[i + 1] == SIM):
            v.append(Violation("AlternationViolation", (x, y, letters[i + 2]),
                               f"connectors {i + 1} and {i + 2} do not alternate"))
    if isinstance(w, Cycle):
        n = len(letters)
        if n % 2 or n < 2 or conns[0] != SIM or conns[-1] != SIM:
            v.append(Violation("NotCyclic", (letters[0], letters[-1]), "a cyclic word starts and ends with ~"))
        elif not b.dash(letters[-1], letters[0]):
            v.append(Violation("NotCyclic", (letters[-1], letters[0]), "closing letters are not joined by a dash"))
        return v
    if letters[0] in b.partner and (not conns or conns[0] != SIM):
        v.append(Violation("EndConditionViolation", (letters[0], b.partner[letters[0]]),
                           "a word starting at a letter with a partner must start with ~"))
    if len(letters) > 1 and letters[-1] in b.partner and conns[-1] != SIM:
        v.append(Violation("EndConditionViolation", (letters[-1], b.partner[letters[-1]]),
                           "a word ending at a letter with a partner must end with ~"))
    return v


def is_valid(b: DecoratedBunch, w) -> bool:
    return not validate_word(b, w)


# ---------------------------------------------------------------------------
# elementary operations


def opposite(w: Word | Cycle) -> Word | Cycle:
    if isinstance(w, Cycle):
        return Cycle(opposite(w.word), w.d)
    return Word(tuple(reversed(w.letters)), tuple(reversed(w.conns)))


def shift_parity(b: DecoratedBunch, W: Cycle, k: int) -> int:
    """Number (mod 2) of the first k ~-pairs whose letters lie on one side."""
    x = W.letters
    return sum(1 for i in range(k) if b.parallel(x[2 * i], x[2 * i + 1])) % 2


def shift(b: DecoratedBunch, W: Cycle, k: int) -> tuple[Cycle, str]:
    """The k-th shift: rotate the letters by 2k; parity "even" or "odd"."""
    n = len(W)
    if not 0 <= k < max(n // 2, 1):
        raise BadShiftIndex(f"shift index {k} outside [0, {n // 2})")
    return rotate(W, k), ("odd" if shift_parity(b, W, k) else "even")


def rotate(W: Cycle, k: int) -> Cycle:
    n = len(W)
    k %= max(n // 2, 1)
    if k == 0:
        return W
    letters = W.letters[2 * k:] + W.letters[:2 * k]
    rc = W.cyclic_conns()
    rc = rc[2 * k:] + rc[:2 * k]
    return Cycle(Word(letters, rc[:-1]), rc[-1])


def is_periodic(W: Cycle) -> bool:
    n = len(W)
    seq = list(zip(W.letters, W.cyclic_conns()))
    for p in range(2, n, 2):
        if n % p == 0 and seq[p:] + seq[:p] == seq:
            return True
    return False


def is_decorated(b: DecoratedBunch, w: Word | Cycle) -> bool:
    return any(b.is_decorated(x) for x in w.letters)


# ---------------------------------------------------------------------------
# canonical forms


def _groups(letters, conns, cyclic: bool) -> list[tuple[int, int]]:
    if cyclic:
        return [(i, i + 1) for i in range(0, len(letters), 2)]
    out = []
    i = 0
    n = len(letters)
    while i < n:
        if i + 1 < n and conns[i] == SIM:
            out.append((i, i + 1))
            i += 2
        else:
            out.append((i, i))
            i += 1
    return out


class _Path:
    """Groups joined by dashes; supports the rescaling move."""

    def __init__(self, b: DecoratedBunch, letters, conns, cyclic: bool):
        self.b = b
        self.letters = letters
        self.conns = list(conns)
        self.cyclic = cyclic
        self.groups = _groups(letters, conns, cyclic)
        self.m = len(self.groups)

    def sign(self, i: int) -> int:
        return 1 if self.b.side[self.letters[i]] == "E" else -1

    def decorated(self, j: int) -> bool:
        return self.b.is_decorated(self.letters[self.groups[j][0]])

    def left_dash(self, j: int):
        s = self.groups[j][0]
        if s > 0:
            return s - 1
        return len(self.conns) - 1 if self.cyclic else None

    def right_dash(self, j: int):
        e = self.groups[j][1]
        if e < len(self.conns):
            return e
        return None

    def scale(self, j: int, k: int):
        s, e = self.groups[j]
        ld, rd = self.left_dash(j), self.right_dash(j)
        if ld is not None:
            self.conns[ld] += self.sign(s) * k
        if rd is not None:
            self.conns[rd] += self.sign(e) * k

    def zero_right(self, j: int):
        rd = self.right_dash(j)
        if rd is not None and self.conns[rd] != 0:
            e = self.groups[j][1]
            self.scale(j, -self.conns[rd] * self.sign(e))

    def zero_left(self, j: int):
        ld = self.left_dash(j)
        if ld is not None and self.conns[ld] != 0:
            s = self.groups[j][0]
            self.scale(j, -self.conns[ld] * self.sign(s))


def canonicalize(b: DecoratedBunch, w: Word | Cycle) -> Word | Cycle:
    """Deterministic normal form under the rescaling moves.

    Words: runs of non-decorated groups open at an end of the word are
    swept to zero; a run between two decorated groups keeps its invariant on
    its leftmost dash.  Decorated cycles: the invariant of each run sits on
    the first dash of the run in the cyclic order.  Non-decorated words and
    cycles become standardized (all decorations 0).  The rotation of a cycle
    is left unchanged.
    """
    if isinstance(w, Cycle):
        letters = w.letters
        path = _Path(b, letters, w.cyclic_conns(), True)
        dec = [j for j in range(path.m) if path.decorated(j)]
        if not dec:
            conns = [SIM if c == SIM else 0 for c in path.conns]
        else:
            for idx, a in enumerate(dec):
                nxt = dec[(idx + 1) % len(dec)]
                j = (nxt - 1) % path.m
                while j != a:
                    path.zero_right(j)
                    j = (j - 1) % path.m
            conns = path.conns
        return Cycle(Word(letters, tuple(conns[:-1])), conns[-1])
    letters = w.letters
    path = _Path(b, letters, w.conns, False)
    dec = [j for j in range(path.m) if path.decorated(j)]
    if not dec:
        return Word(letters, tuple(SIM if c == SIM else 0 for c in w.conns))
    for j in range(dec[0] - 1, -1, -1):
        path.zero_right(j)
    for j in range(dec[-1] + 1, path.m):
        path.zero_left(j)
    for a, nb in zip(dec, dec[1:]):
        for j in range(nb - 1, a, -1):
            path.zero_right(j)
    return Word(letters, tuple(path.conns))


def free_groups(b: DecoratedBunch, w: Word | Cycle) -> list[int]:
    """Indices of the groups that may be rescaled."""
    if isinstance(w, Cycle):
        path = _Path(b, w.letters, w.cyclic_conns(), True)
    else:
        path = _Path(b, w.letters, w.conns, False)
    return [j for j in range(path.m) if not path.decorated(j)]


def rescale(b: DecoratedBunch, w: Word | Cycle, j: int, k: int) -> Word | Cycle:
    """Apply the elementary move: rescale group j by z^k."""
    if isinstance(w, Cycle):
        path = _Path(b, w.letters, w.cyclic_conns(), True)
    else:
        path = _Path(b, w.letters, w.conns, False)
    if path.decorated(j):
        raise ValueError("decorated groups cannot be rescaled")
    path.scale(j, k)
    if isinstance(w, Cycle):
        return Cycle(Word(w.letters, tuple(path.conns[:-1])), path.conns[-1])
    return Word(w.letters, tuple(path.conns))


def cycle_matches(b: DecoratedBunch, W: Cycle, W2: Cycle) -> list[tuple[int, bool, str]]:
    """All (k, opposite?, parity) with shift(W, k) equivalent to W2 or W2*."""
    if len(W) != len(W2):
        return []
    target = canonicalize(b, W2)
    target_op = canonicalize(b, opposite(W2))
    out = []
    for k in range(max(len(W) // 2, 1)):
        c = canonicalize(b, rotate(W, k))
        par = "odd" if shift_parity(b, W, k) else "even"
        if c == target:
            out.append((k, False, par))
        if c == target_op:
            out.append((k, True, par))
    return out


def words_equivalent(b: DecoratedBunch, w, w2) -> bool:
    if isinstance(w, Cycle) != isinstance(w2, Cycle):
        return False
    if isinstance(w, Cycle):
        return bool(cycle_matches(b, w, w2))
    if len(w) != len(w2):
        return False
    c = canonicalize(b, w)
    return c == canonicalize(b, w2) or c == canonicalize(b, opposite(w2))


def oriented(b: DecoratedBunch, w: Word) -> Word:
    """The canonical form of w or of its opposite, whichever prints first."""
    return min(canonicalize(b, w), canonicalize(b, opposite(w)), key=str)


def string_key(b: DecoratedBunch, w: Word) -> str:
    """Orientation-independent canonical text of a string word."""
    return str(oriented(b, w))
