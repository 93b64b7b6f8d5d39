"""Cooperative games: setwise influence, Banzhaf/Shapley values, and the psi identity.

Coalitions are bitmasks: bit ``j`` set means player ``j`` (0-based) is in the
coalition. A game stores its characteristic function as a table of ``2**n``
values indexed by bitmask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Union

import numpy as np

from .core import CapacityError, Dataset, Mode, ModeError, WeightKernel
from .mim import mim_influence, mim_regression_influence

MAX_PLAYERS = 20
PSI_MAX_PLAYERS = 14


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def _popcounts(n: int) -> np.ndarray:
    table = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        table[1 << j : 1 << (j + 1)] = table[: 1 << j] + 1
    return table


@dataclass(frozen=True, eq=False)
class CooperativeGame:
    n: int
    values: np.ndarray
    simple: bool = False

    def __post_init__(self):
        if not 1 <= self.n <= MAX_PLAYERS:
            raise CapacityError(f"player count must be in 1..{MAX_PLAYERS}, got {self.n}")
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (1 << self.n,):
            raise ValueError(f"need exactly 2**{self.n} = {1 << self.n} values, got {v.size}")
        if self.simple and not np.all((v == 0) | (v == 1)):
            raise ValueError("a simple game takes values in {0, 1} only")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, mask: int) -> float:
        return float(self.values[mask])

    @property
    def grand(self) -> int:
        return (1 << self.n) - 1

    def is_simple(self) -> bool:
        return bool(np.all((self.values == 0) | (self.values == 1)))

    def check_player(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"player {i} out of range for n={self.n}")
        return int(i)

    @classmethod
    def from_function(cls, n: int, v: Callable[[int], float], simple: bool = False) -> "CooperativeGame":
        return cls(n, [v(mask) for mask in range(1 << n)], simple)

    @classmethod
    def unanimity(cls, n: int, carrier: int | None = None) -> "CooperativeGame":
        """v(S) = 1 iff S contains every player of ``carrier`` (default: all)."""
        carrier = (1 << n) - 1 if carrier is None else carrier
        return cls.from_function(n, lambda s: float(s & carrier == carrier), simple=True)

    @classmethod
    def dictator(cls, n: int, player: int = 0) -> "CooperativeGame":
        return cls.from_function(n, lambda s: float(s >> player & 1), simple=True)

    @classmethod
    def weighted_voting(cls, quota: float, weights: Iterable[float]) -> "CooperativeGame":
        """v(S) = 1 iff the weights in S sum to at least ``quota``."""
        w = np.asarray(list(weights), dtype=np.float64)
        n = len(w)
        masks = np.arange(1 << n)
        bits = (masks[:, None] >> np.arange(n)) & 1
        return cls(n, (bits @ w >= quota).astype(np.float64), simple=True)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, low: float = -1.0, high: float = 1.0) -> "CooperativeGame":
        return cls(n, rng.uniform(low, high, size=1 << n))

    @classmethod
    def random_simple(cls, n: int, rng: np.random.Generator) -> "CooperativeGame":
        return cls(n, rng.integers(0, 2, size=1 << n).astype(np.float64), simple=True)


@dataclass(frozen=True)
class CoalitionSample:
    """Observed (coalition, value) pairs."""

    pairs: tuple[tuple[int, float], ...]

    def __post_init__(self):
        pairs = tuple((int(s), float(v)) for s, v in self.pairs)
        masks = [s for s, _ in pairs]
        if len(set(masks)) != len(masks):
            raise ValueError("coalition sample lists a coalition more than once")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_game(cls, game: CooperativeGame) -> "CoalitionSample":
        return cls(tuple((s, game(s)) for s in range(1 << game.n)))


def game_to_dataset(game: CooperativeGame, regression: bool = False) -> Dataset:
    """One point per coalition: coordinates are the indicator vector of the mask.

    Simple games map value 0 to label -1 and 1 to +1. Other games need
    ``regression=True``, which keeps the raw values as scores.
    """
    masks = np.arange(1 << game.n)
    X = ((masks[:, None] >> np.arange(game.n)) & 1).astype(np.float64)
    if regression:
        return Dataset(X, game.values, mode=Mode.REGRESSION)
    if not game.is_simple():
        raise ModeError("binary conversion needs a simple game; pass regression=True for raw values")
    return Dataset(X, 2 * game.values - 1, mode=Mode.BINARY)


def setwise_influence(game: CooperativeGame, S: int, i: int) -> float:
    """Sum over coalitions T containing i of (v(T) - v(S)) / |S xor T|, for i not in S."""
    i = game.check_player(i)
    if S >> i & 1:
        raise NotImplementedError("setwise influence is only defined here for players outside S")
    masks = np.arange(1 << game.n)
    T = masks[(masks >> i) & 1 == 1]
    dist = _popcounts(game.n)[T ^ S]
    return float(np.sum((game.values[T] - game.values[S]) / dist))


def gt_influence_vector(game: CooperativeGame, S: int) -> np.ndarray:
    """Full vector sum_T (v(S) - v(T)) / |S xor T| * (e_S - e_T), by enumeration."""
    pc = _popcounts(game.n)
    e_S = np.array([S >> j & 1 for j in range(game.n)], dtype=np.float64)
    phi = np.zeros(game.n)
    for T in range(1 << game.n):
        if T == S:
            continue
        e_T = np.array([T >> j & 1 for j in range(game.n)], dtype=np.float64)
        phi += (game(S) - game(T)) / pc[S ^ T] * (e_S - e_T)
    return phi


def cost_sharing_influence(game_or_sample: Union[CooperativeGame, CoalitionSample], i: int, n: int | None = None) -> float:
    """Sum of v(T) / |T| over coalitions T containing i.

    A :class:`CoalitionSample` restricts the sum to the listed coalitions.
    """
    if isinstance(game_or_sample, CooperativeGame):
        i = game_or_sample.check_player(i)
        pairs = ((s, game_or_sample(s)) for s in range(1 << game_or_sample.n))
    else:
        if i < 0 or (n is not None and i >= n):
            raise IndexError(f"player {i} out of range")
        pairs = game_or_sample.pairs
    return float(sum(v / popcount(s) for s, v in pairs if s >> i & 1))


def psi_influence(game: CooperativeGame, i: int) -> float:
    """Setwise influence of i summed over every coalition S without i (pair enumeration)."""
    i = game.check_player(i)
    if game.n > PSI_MAX_PLAYERS:
        raise CapacityError(
            f"direct psi enumeration supports n <= {PSI_MAX_PLAYERS}; "
            "use psi_from_banzhaf for larger games"
        )
    masks = np.arange(1 << game.n)
    has_i = (masks >> i) & 1 == 1
    T = masks[has_i]
    vT = game.values[T]
    pc = _popcounts(game.n)
    total = 0.0
    for S in masks[~has_i]:
        total += float(np.sum((vT - game.values[S]) / pc[T ^ S]))
    return total


def banzhaf(game: CooperativeGame, i: int) -> float:
    """Marginal contributions of i summed over S not containing i, divided by 2**n."""
    i = game.check_player(i)
    masks = np.arange(1 << game.n)
    S = masks[(masks >> i) & 1 == 0]
    return float(np.sum(game.values[S | (1 << i)] - game.values[S]) / (1 << game.n))


def shapley(game: CooperativeGame, i: int) -> float:
    i = game.check_player(i)
    n = game.n
    masks = np.arange(1 << n)
    S = masks[(masks >> i) & 1 == 0]
    k = _popcounts(n)[S]
    weights = np.array([math.factorial(j) * math.factorial(n - j - 1) for j in range(n)], dtype=np.float64)
    return float(np.sum(weights[k] * (game.values[S | (1 << i)] - game.values[S])) / math.factorial(n))


def psi_factor(n: int) -> Fraction:
    """The constant 2**n (2**n - 1) / n linking psi to the Banzhaf value."""
    return Fraction((1 << n) * ((1 << n) - 1), n)


def psi_from_banzhaf(game: CooperativeGame, i: int) -> float:
    return float(psi_factor(game.n)) * banzhaf(game, i)


def zeta(n: int, S: int, i: int) -> tuple[list[int], Fraction]:
    """Count coalitions T of the other players by |S xor T| = k, by enumeration.

    Returns the per-k counts and the exact total ``sum_k count_k / (k + 1)``.
    """
    if not 0 <= i < n:
        raise IndexError(f"player {i} out of range for n={n}")
    if S >> i & 1:
        raise ValueError("S must not contain i")
    if S >> n:
        raise ValueError("S mentions players beyond n")
    per_k = [0] * n
    for T in range(1 << n):
        if T >> i & 1:
            continue
        per_k[popcount(S ^ T)] += 1
    return per_k, sum((Fraction(c, k + 1) for k, c in enumerate(per_k)), Fraction(0))


@dataclass(frozen=True)
class PsiBanzhafReport:
    n: int
    player: int
    psi: float
    banzhaf: float
    factor: Fraction
    residual: float

    def to_dict(self) -> dict:
        return {
            "banzhaf": self.banzhaf,
            "factor": str(self.factor),
            "n": self.n,
            "player": self.player,
            "psi": self.psi,
            "residual": self.residual,
        }


def verify_psi_banzhaf(game: CooperativeGame, i: int) -> PsiBanzhafReport:
    psi = psi_influence(game, i)
    beta = banzhaf(game, i)
    factor = psi_factor(game.n)
    return PsiBanzhafReport(game.n, i, psi, beta, factor, abs(psi - float(factor) * beta))


def mim_game_influence(game: CooperativeGame, S: int) -> np.ndarray:
    """The coalition-influence vector at S recovered from binary MIM.

    Runs MIM with Hamming distance and alpha(d) = 1/d on the +/-1 relabelled
    game, then undoes the label map: with l = 2v - 1, the match indicator is
    l(S) l(T) while v(T) - v(S) = (l(T) - l(S)) / 2, which leaves a
    label-independent offset l(S) sum_T (e_T - e_S) / |S xor T|.
    """
    ds = game_to_dataset(game)
    mim = mim_influence(ds, S, WeightKernel("inverse"), metric="hamming").values
    diffs = ds.X - ds.X[S]
    dist = np.count_nonzero(diffs, axis=1).astype(np.float64)
    dist[S] = 1.0
    offset = (diffs / dist[:, None]).sum(axis=0)
    return ds.y[S] * (mim - offset) / 2


def regression_game_influence(game: CooperativeGame, S: int) -> np.ndarray:
    """Regression MIM on raw values with Hamming distance and alpha(d) = 1/d."""
    ds = game_to_dataset(game, regression=True)
    return mim_regression_influence(ds, S, WeightKernel("inverse"), metric="hamming").values


# --- game files -------------------------------------------------------------


class GameFormatError(ValueError):
    pass


def parse_game(text: str) -> CooperativeGame:
    """Parse a game file.

    Either a first line ``n`` followed by ``2**n`` lines ``bitmask value``, or a
    single line ``wvg q w1 ... wn`` for a weighted voting game. Blank lines and
    ``#`` comments are ignored.
    """
    lines = [(no, ln) for no, ln in enumerate(text.splitlines(), 1) if ln.split("#", 1)[0].strip()]
    lines = [(no, ln.split("#", 1)[0].split()) for no, ln in lines]
    if not lines:
        raise GameFormatError("empty game file")
    no, head = lines[0]
    try:
        if head[0].lower() == "wvg":
            if len(lines) > 1:
                raise GameFormatError(f"line {lines[1][0]}: unexpected content after wvg line")
            if len(head) < 3:
                raise GameFormatError(f"line {no}: wvg needs a quota and at least one weight")
            return CooperativeGame.weighted_voting(float(head[1]), [float(w) for w in head[2:]])
        if len(head) != 1:
            raise GameFormatError(f"line {no}: first line must be the player count")
        n = int(head[0])
        if not 1 <= n <= MAX_PLAYERS:
            raise GameFormatError(f"line {no}: player count must be in 1..{MAX_PLAYERS}")
        values: dict[int, float] = {}
        for no, parts in lines[1:]:
            if len(parts) != 2:
                raise GameFormatError(f"line {no}: expected 'bitmask value'")
            mask = int(parts[0], 0)
            if not 0 <= mask < 1 << n:
                raise GameFormatError(f"line {no}: bitmask {mask} out of range for n={n}")
            if mask in values:
                raise GameFormatError(f"line {no}: coalition {mask} listed twice")
            values[mask] = float(parts[1])
    except ValueError as exc:
        if isinstance(exc, GameFormatError):
            raise
        raise GameFormatError(f"line {no}: {exc}") from exc
    if len(values) != 1 << n:
        raise GameFormatError(f"expected {1 << n} coalition lines, got {len(values)}")
    table = [values[s] for s in range(1 << n)]
    return CooperativeGame(n, table, simple=all(v in (0.0, 1.0) for v in table))


def load_game(path) -> CooperativeGame:
    return parse_game(Path(path).read_text())


def format_game(game: CooperativeGame) -> str:
    rows = [str(game.n)] + [f"{s} {float(v)!r}" for s, v in enumerate(game.values)]
    return "\n".join(rows) + "\n"
