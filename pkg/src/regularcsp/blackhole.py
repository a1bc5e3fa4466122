"""Black Hole solitaire as a finite-domain model.

Cards are ids 0..51 with rank = id mod 13 and suit = id div 13; the ace
of spades is id 0 and starts on the black hole.  A game asks for an
order in which all 52 cards reach the hole such that consecutive ranks
differ by one (with ace-king wraparound) and each fan is played top
first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InvalidInstance
from .model import (
    BinaryAdjacency,
    Csp,
    FixedAssignment,
    InverseChanneling,
    LessThan,
    NotEqual,
    Variable,
    make_domain,
)

NUM_SUITS = 4
NUM_RANKS = 13
NUM_CARDS = NUM_SUITS * NUM_RANKS
NUM_FANS = 17
FAN_SIZE = 3
ACE_OF_SPADES = 0


class Lcg:
    """64-bit linear congruential generator, high 32 bits as output.

    Fully pinned so identical seeds give identical instances on any
    platform.
    """

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u32(self) -> int:
        self.state = (self.state * self.MULTIPLIER + self.INCREMENT) & self.MASK
        return self.state >> 32


def _shuffle(items: list[int], rng: Lcg) -> None:
    # Fisher-Yates, swapping downward from the last position.
    for i in range(len(items) - 1, 0, -1):
        j = rng.next_u32() % (i + 1)
        items[i], items[j] = items[j], items[i]


@dataclass(frozen=True)
class BlackHoleInstance:
    fans: tuple[tuple[int, ...], ...]
    seed: Optional[int] = None


def deal_fans(
    num_cards: int, fan_size: int, seed: Optional[int] = None
) -> tuple[tuple[int, ...], ...]:
    """Deal cards 1..num_cards-1 into consecutive fans.

    ``seed`` None keeps the cards in ascending order; the final fan is
    shorter when the deck does not divide evenly.
    """
    cards = list(range(1, num_cards))
    if seed is not None:
        _shuffle(cards, Lcg(seed))
    return tuple(
        tuple(cards[i : i + fan_size]) for i in range(0, len(cards), fan_size)
    )


def generate_black_hole(
    seed: Optional[int] = None, enumerated: bool = False
) -> BlackHoleInstance:
    """Deal the 51 non-ace-of-spades cards into 17 fans of 3.

    ``enumerated`` deals ids 1..51 in order; otherwise the deal is the
    pinned shuffle for ``seed``.
    """
    if enumerated:
        used_seed = None
    else:
        if seed is None:
            raise ValueError("a seed is required unless enumerated is set")
        used_seed = seed
    return BlackHoleInstance(
        fans=deal_fans(NUM_CARDS, FAN_SIZE, used_seed), seed=used_seed
    )


def build_black_hole_csp(inst: BlackHoleInstance) -> Csp:
    """Standard 52-card model; raises InvalidInstance on a bad deal."""
    if len(inst.fans) != NUM_FANS or any(len(f) != FAN_SIZE for f in inst.fans):
        raise InvalidInstance("a deal is 17 fans of 3 cards")
    return build_game_csp(inst.fans, NUM_SUITS, NUM_RANKS)


def build_game_csp(
    fans: Sequence[Sequence[int]], num_suits: int, num_ranks: int
) -> Csp:
    """Game model for an arbitrary deck size.

    Sequence variables y_t give the card played at step t (y_0 is the
    hole's starting ace); position variables p_c give the step at which
    card c is played.  Consecutive plays must be rank-adjacent mod
    num_ranks, fan cards are played top first, and the y variables are
    pairwise distinct (channeling plus inequalities).
    """
    num_cards = num_suits * num_ranks
    dealt = [c for fan in fans for c in fan]
    if sorted(dealt) != list(range(1, num_cards)):
        raise InvalidInstance(
            f"fans must hold each of the cards 1..{num_cards - 1} exactly once"
        )
    variables = tuple(Variable(t, f"y{t}") for t in range(num_cards)) + tuple(
        Variable(num_cards + c, f"p{c}") for c in range(num_cards)
    )
    full = make_domain(range(num_cards))
    domains = tuple(full for _ in range(2 * num_cards))

    y = list(range(num_cards))
    p = list(range(num_cards, 2 * num_cards))
    wrap = num_ranks - 1
    constraints = [FixedAssignment(scope=(y[0],), value=ACE_OF_SPADES)]
    for t in range(num_cards - 1):
        constraints.append(
            BinaryAdjacency(
                scope=(y[t], y[t + 1]), modulus=num_ranks, diffs=(1, wrap)
            )
        )
    constraints.append(InverseChanneling(scope=tuple(y) + tuple(p)))
    for fan in fans:
        for above, below in zip(fan, fan[1:]):
            constraints.append(LessThan(scope=(p[above], p[below])))
    for i in range(num_cards):
        for j in range(i + 1, num_cards):
            constraints.append(NotEqual(scope=(y[i], y[j])))
    return Csp(variables, domains, tuple(constraints))


def adjacency_selections(csp: Csp) -> tuple[tuple[int, ...], ...]:
    """One singleton selection per rank-adjacency constraint."""
    return tuple(
        (i,)
        for i, c in enumerate(csp.constraints)
        if isinstance(c, BinaryAdjacency)
    )
