"""Integer-lattice random walks and their exact occurrence probabilities.

Two stepping policies live here: the uniform walker (each of the 2d signed
unit vectors with probability 1/2d) and the self-avoiding walker (uniform
over the unvisited neighbors, a dead end when there are none). For a
recorded self-avoiding path, the chance that a fresh walker reproduces it
is the product over steps of 1/(2d - blocked_i), where blocked_i counts the
already-visited neighbors of the walker's position just before step i.
A brute-force enumerator doubles as the oracle for that product.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Union

Point = tuple[int, ...]

MAX_ENUM_DIMENSION = 3
MAX_ENUM_STEPS = 8


class WalkBoundsError(ValueError):
    """Enumeration request outside the tractable bounds."""


class DegeneratePatternError(ValueError):
    """Pattern contains a step no self-avoiding walker could have taken."""


def unit_steps(dimension: int) -> tuple[Point, ...]:
    """The 2d signed unit vectors, ordered +e0, -e0, +e1, -e1, ..."""
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    steps = []
    for axis in range(dimension):
        for sign in (1, -1):
            vec = [0] * dimension
            vec[axis] = sign
            steps.append(tuple(vec))
    return tuple(steps)


def _add(p: Point, q: Point) -> Point:
    return tuple(a + b for a, b in zip(p, q))


def neighbors(point: Point) -> tuple[Point, ...]:
    return tuple(_add(point, s) for s in unit_steps(len(point)))


@dataclass(frozen=True)
class WalkState:
    """Immutable walker snapshot; stepping returns a new state."""

    dimension: int
    start: Point
    position: Point
    visited: frozenset[Point]
    history: tuple[Point, ...]

    @classmethod
    def begin(cls, dimension: int, start: Point | None = None) -> "WalkState":
        if start is None:
            start = (0,) * dimension
        if len(start) != dimension:
            raise ValueError("start point has wrong dimension")
        return cls(dimension, start, start, frozenset({start}), ())

    @property
    def num_steps(self) -> int:
        return len(self.history)

    def displacement(self) -> Point:
        """Sum of the step vectors; always equals position - start."""
        total = [0] * self.dimension
        for step in self.history:
            for i, c in enumerate(step):
                total[i] += c
        return tuple(total)


@dataclass(frozen=True)
class Stuck:
    """Terminal outcome of a self-avoiding walker with no open neighbor."""

    state: WalkState


def _advance(state: WalkState, step: Point) -> WalkState:
    pos = _add(state.position, step)
    return WalkState(
        state.dimension,
        state.start,
        pos,
        state.visited | {pos},
        state.history + (step,),
    )


def step_simple(state: WalkState, rng: random.Random) -> WalkState:
    """Take one uniform step: each signed unit vector with probability 1/2d."""
    moves = unit_steps(state.dimension)
    return _advance(state, moves[rng.randrange(len(moves))])


def step_self_avoiding(state: WalkState, rng: random.Random) -> Union[WalkState, Stuck]:
    """Step uniformly over the unvisited neighbors; Stuck when all are taken."""
    open_moves = [
        step
        for step in unit_steps(state.dimension)
        if _add(state.position, step) not in state.visited
    ]
    if not open_moves:
        return Stuck(state)
    return _advance(state, open_moves[rng.randrange(len(open_moves))])


@dataclass(frozen=True)
class WalkPattern:
    """A recorded lattice path of m unit steps through m+1 points."""

    dimension: int
    points: tuple[Point, ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError("pattern needs at least the start point")
        for p in self.points:
            if len(p) != self.dimension:
                raise ValueError(f"point {p} has wrong dimension")
        for prev, cur in zip(self.points, self.points[1:]):
            if sum(abs(a - b) for a, b in zip(prev, cur)) != 1:
                raise ValueError(f"{prev} -> {cur} is not a unit step")

    @classmethod
    def from_state(cls, state: WalkState) -> "WalkPattern":
        points = [state.start]
        for step in state.history:
            points.append(_add(points[-1], step))
        return cls(state.dimension, tuple(points))

    @classmethod
    def from_steps(
        cls, dimension: int, steps: Iterable[Point], start: Point | None = None
    ) -> "WalkPattern":
        points = [start if start is not None else (0,) * dimension]
        for step in steps:
            points.append(_add(points[-1], step))
        return cls(dimension, tuple(points))

    @property
    def num_steps(self) -> int:
        return len(self.points) - 1

    @cached_property
    def blocked_counts(self) -> tuple[int, ...]:
        """blocked_i = visited neighbors of the source point of step i."""
        counts = []
        occupied = set()
        for i in range(1, len(self.points)):
            occupied.add(self.points[i - 1])
            src = self.points[i - 1]
            counts.append(sum(1 for q in neighbors(src) if q in occupied))
        return tuple(counts)

    def is_self_avoiding(self) -> bool:
        return len(set(self.points)) == len(self.points)


def match_probability(pattern: WalkPattern) -> Fraction:
    """Exact probability that a self-avoiding walker reproduces the pattern.

    Product over steps of 1/(2d - blocked_i). Raises DegeneratePatternError
    when the pattern revisits a point or some step had no open move; such a
    path cannot occur under the self-avoiding policy.
    """
    two_d = 2 * pattern.dimension
    seen = {pattern.points[0]}
    prob = Fraction(1)
    for i in range(1, len(pattern.points)):
        blocked = pattern.blocked_counts[i - 1]
        dest = pattern.points[i]
        if dest in seen or blocked >= two_d:
            raise DegeneratePatternError(
                f"step {i} ({pattern.points[i - 1]} -> {dest}) is impossible "
                "for a self-avoiding walker"
            )
        prob *= Fraction(1, two_d - blocked)
        seen.add(dest)
    return prob


@dataclass(frozen=True)
class SawEnumeration:
    """Every self-avoiding walk of a given length, with exact probabilities.

    complete holds the walks that reached the requested length; stuck holds
    the shorter dead-end prefixes. Together their probabilities sum to 1.
    """

    complete: tuple[tuple[WalkPattern, Fraction], ...]
    stuck: tuple[tuple[WalkPattern, Fraction], ...]

    def total_mass(self) -> Fraction:
        return sum((p for _, p in self.complete), Fraction(0)) + sum(
            (p for _, p in self.stuck), Fraction(0)
        )


def enumerate_saws_full(dimension: int, num_steps: int) -> SawEnumeration:
    """Brute-force enumeration of all self-avoiding walks from the origin."""
    if not 1 <= dimension <= MAX_ENUM_DIMENSION:
        raise WalkBoundsError(f"dimension must be in [1, {MAX_ENUM_DIMENSION}]")
    if not 0 <= num_steps <= MAX_ENUM_STEPS:
        raise WalkBoundsError(f"num_steps must be in [0, {MAX_ENUM_STEPS}]")

    complete: list[tuple[WalkPattern, Fraction]] = []
    stuck: list[tuple[WalkPattern, Fraction]] = []
    origin = (0,) * dimension

    def recurse(path: list[Point], occupied: set[Point], prob: Fraction) -> None:
        if len(path) - 1 == num_steps:
            complete.append((WalkPattern(dimension, tuple(path)), prob))
            return
        open_moves = [q for q in neighbors(path[-1]) if q not in occupied]
        if not open_moves:
            stuck.append((WalkPattern(dimension, tuple(path)), prob))
            return
        share = Fraction(1, len(open_moves))
        for q in open_moves:
            path.append(q)
            occupied.add(q)
            recurse(path, occupied, prob * share)
            occupied.remove(q)
            path.pop()

    recurse([origin], {origin}, Fraction(1))
    return SawEnumeration(tuple(complete), tuple(stuck))


def enumerate_saws(
    dimension: int, num_steps: int
) -> list[tuple[WalkPattern, Fraction]]:
    """The complete walks of enumerate_saws_full, as a plain list."""
    return list(enumerate_saws_full(dimension, num_steps).complete)


_AXIS_LETTERS = (("E", "W"), ("N", "S"), ("U", "D"))


def pattern_from_letters(dimension: int, text: str) -> WalkPattern:
    """Build a pattern from comma-separated step letters (E/W, N/S, U/D)."""
    if not 1 <= dimension <= len(_AXIS_LETTERS):
        raise ValueError(f"dimension must be in [1, {len(_AXIS_LETTERS)}]")
    steps: list[Point] = []
    for token in text.split(","):
        letter = token.strip().upper()
        if not letter:
            continue
        for axis, (pos, neg) in enumerate(_AXIS_LETTERS[:dimension]):
            if letter == pos:
                sign = 1
                break
            if letter == neg:
                sign = -1
                break
        else:
            raise ValueError(
                f"step {letter!r} is not valid for dimension {dimension}"
            )
        vec = [0] * dimension
        vec[axis] = sign
        steps.append(tuple(vec))
    return WalkPattern.from_steps(dimension, steps)
