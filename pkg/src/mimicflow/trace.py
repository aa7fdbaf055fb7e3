"""Packet-level traffic model: packets, sessions, and application profiles.

An application profile holds per-direction histograms of packet size and
inter-arrival time. Profiles serve two masters: the shaper mimics them, and
the classifiers use them as signatures. Sessions are synthesized from
profiles so every experiment is reproducible from a seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

MAX_PACKET_SIZE = 65535


class Direction(Enum):
    OUTBOUND = "out"
    INBOUND = "in"


class ProfileParseError(ValueError):
    """Profile text did not follow the file format."""


class ProfileValidationError(ValueError):
    """Profile text parsed but violated a histogram invariant."""


class EmptySessionError(ValueError):
    """Operation needs at least one packet."""


@dataclass(frozen=True)
class Packet:
    """One observed packet: virtual time in microseconds, size in bytes."""

    timestamp: int
    size: int
    direction: Direction

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ValueError(f"negative timestamp: {self.timestamp}")
        if not 1 <= self.size <= MAX_PACKET_SIZE:
            raise ValueError(f"packet size out of range: {self.size}")


@dataclass(frozen=True)
class Session:
    """An ordered packet trace, optionally labeled with its application."""

    packets: tuple[Packet, ...]
    label: str | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        for prev, cur in zip(self.packets, self.packets[1:]):
            if cur.timestamp < prev.timestamp:
                raise ValueError("session timestamps must be non-decreasing")

    def __len__(self) -> int:
        return len(self.packets)


@dataclass(frozen=True)
class Histogram:
    """Probabilities over half-open integer bins [edges[i], edges[i+1])."""

    edges: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.probs) < 1:
            raise ProfileValidationError("histogram needs at least one bin")
        if len(self.edges) != len(self.probs) + 1:
            raise ProfileValidationError("edge count must be bin count + 1")
        for lo, hi in zip(self.edges, self.edges[1:]):
            if hi <= lo:
                raise ProfileValidationError(
                    f"bin edges must be strictly increasing, got {lo} then {hi}"
                )
        if any(p < 0 for p in self.probs):
            raise ProfileValidationError("bin probabilities must be non-negative")
        total = sum(self.probs)
        if abs(total - 1.0) > 1e-9:
            raise ProfileValidationError(f"bin probabilities sum to {total!r}, not 1")

    @property
    def num_bins(self) -> int:
        return len(self.probs)

    def sample(self, rng: random.Random) -> int:
        """Draw one value: pick a bin by probability, then uniform within it."""
        r = rng.random()
        acc = 0.0
        idx = self.num_bins - 1
        for i, p in enumerate(self.probs):
            acc += p
            if r < acc:
                idx = i
                break
        return rng.randrange(self.edges[idx], self.edges[idx + 1])

    def cdf(self, x: int) -> float:
        """P(sample <= x) under integer-uniform sampling within bins."""
        total = 0.0
        for i, p in enumerate(self.probs):
            lo, hi = self.edges[i], self.edges[i + 1]
            if x >= hi - 1:
                total += p
            elif x >= lo:
                total += p * (x - lo + 1) / (hi - lo)
        return total

    def contains(self, x: int) -> bool:
        """True when x lies in a bin with positive probability."""
        for i, p in enumerate(self.probs):
            if p > 0 and self.edges[i] <= x < self.edges[i + 1]:
                return True
        return False


@dataclass(frozen=True)
class ApplicationProfile:
    """Per-direction size and inter-arrival distributions for one application."""

    name: str
    size_out: Histogram
    size_in: Histogram
    iat_out: Histogram
    iat_in: Histogram
    outbound_fraction: float = 0.5

    def __post_init__(self) -> None:
        if not self.name:
            raise ProfileValidationError("profile name must be non-empty")
        if not 0.0 <= self.outbound_fraction <= 1.0:
            raise ProfileValidationError("outbound_fraction must be in [0, 1]")
        for hist in (self.size_out, self.size_in):
            if hist.edges[0] < 1 or hist.edges[-1] > MAX_PACKET_SIZE + 1:
                raise ProfileValidationError(
                    f"size bins must lie within [1, {MAX_PACKET_SIZE}]"
                )
        for hist in (self.iat_out, self.iat_in):
            if hist.edges[0] < 0:
                raise ProfileValidationError("inter-arrival bins must be non-negative")

    def size_hist(self, direction: Direction) -> Histogram:
        return self.size_out if direction is Direction.OUTBOUND else self.size_in

    def iat_hist(self, direction: Direction) -> Histogram:
        return self.iat_out if direction is Direction.OUTBOUND else self.iat_in


@dataclass(frozen=True)
class ProfileDatabase:
    """Ordered, name-unique collection of profiles.

    Ordering is load-order stable: profile index i is the walk axis the
    shaper associates with that application, so two endpoints must load the
    same files in the same order.
    """

    profiles: tuple[ApplicationProfile, ...]

    def __post_init__(self) -> None:
        names = [p.name for p in self.profiles]
        if len(set(names)) != len(names):
            raise ProfileValidationError(f"duplicate profile names in {names}")

    def __len__(self) -> int:
        return len(self.profiles)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.profiles)

    def index(self, name: str) -> int:
        for i, p in enumerate(self.profiles):
            if p.name == name:
                return i
        raise KeyError(name)

    def get(self, name: str) -> ApplicationProfile:
        return self.profiles[self.index(name)]

    @classmethod
    def load_dir(cls, directory: str | Path) -> "ProfileDatabase":
        """Load every *.profile file in sorted filename order."""
        directory = Path(directory)
        paths = sorted(directory.glob("*.profile"))
        if not paths:
            raise ProfileParseError(f"no .profile files in {directory}")
        return cls(tuple(ingest_profile(p.read_text()) for p in paths))


_STANZA_KEYS = {
    ("size", "out"): "size_out",
    ("size", "in"): "size_in",
    ("iat", "out"): "iat_out",
    ("iat", "in"): "iat_in",
}


def ingest_profile(text: str) -> ApplicationProfile:
    """Parse one profile from its line-oriented text form.

    Format: a `profile <name>` header, then four stanzas `size out:`,
    `size in:`, `iat out:`, `iat in:`, each followed by `<lo> <hi> <prob>`
    bin lines over half-open ranges [lo, hi). `#` starts a comment and blank
    lines are ignored. Gaps between consecutive bins become zero-probability
    bins so the edge list stays contiguous.
    """
    name: str | None = None
    stanzas: dict[str, list[tuple[int, int, float]]] = {}
    current: list[tuple[int, int, float]] | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "profile":
            if name is not None:
                raise ProfileParseError(
                    f"line {lineno}: second profile header (one profile per file)"
                )
            if len(fields) != 2:
                raise ProfileParseError(f"line {lineno}: malformed profile header")
            name = fields[1]
        elif (fields[0], fields[1].rstrip(":") if len(fields) > 1 else "") in _STANZA_KEYS:
            if name is None:
                raise ProfileParseError(f"line {lineno}: stanza before profile header")
            if len(fields) != 2 or not fields[1].endswith(":"):
                raise ProfileParseError(f"line {lineno}: malformed stanza header")
            key = _STANZA_KEYS[(fields[0], fields[1].rstrip(":"))]
            if key in stanzas:
                raise ProfileParseError(f"line {lineno}: duplicate stanza {key}")
            current = stanzas.setdefault(key, [])
        else:
            if current is None:
                raise ProfileParseError(f"line {lineno}: unknown key {fields[0]!r}")
            if len(fields) != 3:
                raise ProfileParseError(f"line {lineno}: bin line needs lo hi prob")
            try:
                lo, hi = int(fields[0]), int(fields[1])
                prob = float(fields[2])
            except ValueError as exc:
                raise ProfileParseError(f"line {lineno}: {exc}") from exc
            current.append((lo, hi, prob))

    if name is None:
        raise ProfileParseError("missing profile header")
    missing = set(_STANZA_KEYS.values()) - set(stanzas)
    if missing:
        raise ProfileParseError(f"missing stanzas: {sorted(missing)}")

    hists = {key: _bins_to_histogram(bins) for key, bins in stanzas.items()}
    return ApplicationProfile(name=name, **hists)


def _bins_to_histogram(bins: list[tuple[int, int, float]]) -> Histogram:
    if not bins:
        raise ProfileValidationError("empty histogram stanza")
    edges: list[int] = [bins[0][0]]
    probs: list[float] = []
    for lo, hi, prob in bins:
        if lo < edges[-1]:
            raise ProfileValidationError(
                f"bin [{lo}, {hi}) overlaps or precedes previous bin"
            )
        if lo > edges[-1]:
            # gap between declared bins: keep edges contiguous with a zero bin
            edges.append(lo)
            probs.append(0.0)
        edges.append(hi)
        probs.append(prob)
    return Histogram(tuple(edges), tuple(probs))


def serialize_profile(profile: ApplicationProfile) -> str:
    """Inverse of ingest_profile; emits every bin, including zero-probability ones."""
    lines = [f"profile {profile.name}"]
    for (kind, side), key in _STANZA_KEYS.items():
        hist: Histogram = getattr(profile, key)
        lines.append(f"{kind} {side}:")
        for i, p in enumerate(hist.probs):
            lines.append(f"{hist.edges[i]} {hist.edges[i + 1]} {p!r}")
    return "\n".join(lines) + "\n"


def sample_session(
    profile: ApplicationProfile, n_packets: int, seed: int
) -> Session:
    """Synthesize a session of exactly n_packets from a profile.

    Deterministic: the same (profile, n_packets, seed) always yields the
    same packets. The first packet sits at t=0; every later packet adds an
    inter-arrival gap drawn from the profile for that packet's direction.
    """
    if n_packets < 0:
        raise ValueError("n_packets must be >= 0")
    rng = random.Random(seed)
    packets: list[Packet] = []
    t = 0
    for i in range(n_packets):
        direction = (
            Direction.OUTBOUND
            if rng.random() < profile.outbound_fraction
            else Direction.INBOUND
        )
        size = profile.size_hist(direction).sample(rng)
        if i > 0:
            t += profile.iat_hist(direction).sample(rng)
        packets.append(Packet(t, size, direction))
    return Session(tuple(packets), label=profile.name, seed=seed)


FeatureTriple = tuple[int, int, Direction]


def session_features(session: Session) -> tuple[FeatureTriple, ...]:
    """(inter-arrival gap, size, direction) per packet; the first gap is 0.

    Lossless up to the first timestamp: prefix-summing the gaps and adding
    packets[0].timestamp reproduces every timestamp exactly.
    """
    if not session.packets:
        raise EmptySessionError("cannot extract features from an empty session")
    triples: list[FeatureTriple] = []
    prev_t = session.packets[0].timestamp
    for i, pkt in enumerate(session.packets):
        gap = 0 if i == 0 else pkt.timestamp - prev_t
        triples.append((gap, pkt.size, pkt.direction))
        prev_t = pkt.timestamp
    return tuple(triples)


def ks_distance(samples: Sequence[int], hist: Histogram) -> float:
    """Exact Kolmogorov-Smirnov distance between integer samples and a histogram.

    The model CDF is the true CDF of Histogram.sample (integer-uniform
    within bins), so the statistic carries no discretization bias.
    """
    if not samples:
        raise ValueError("ks_distance needs at least one sample")
    xs = sorted(samples)
    n = len(xs)
    best = 0.0
    i = 0
    while i < n:
        v = xs[i]
        j = i
        while j < n and xs[j] == v:
            j += 1
        emp_above = j / n
        emp_below = i / n
        best = max(
            best,
            abs(emp_above - hist.cdf(v)),
            abs(emp_below - hist.cdf(v - 1)),
        )
        i = j
    return best


def save_session(session: Session, path: str | Path) -> None:
    """Write a session as text: a label line then one packet per line."""
    lines = [f"label {session.label if session.label is not None else '-'}"]
    for pkt in session.packets:
        lines.append(f"{pkt.timestamp} {pkt.size} {pkt.direction.value}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_session(path: str | Path) -> Session:
    text = Path(path).read_text()
    label: str | None = None
    packets: list[Packet] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "label":
            label = None if fields[1] == "-" else fields[1]
            continue
        if len(fields) != 3:
            raise ValueError(f"{path}: line {lineno}: expected 'ts size dir'")
        direction = Direction(fields[2])
        packets.append(Packet(int(fields[0]), int(fields[1]), direction))
    return Session(tuple(packets), label=label)


def load_sessions_dir(directory: str | Path) -> list[Session]:
    """Load every *.session file in sorted filename order."""
    paths = sorted(Path(directory).glob("*.session"))
    if not paths:
        raise ValueError(f"no .session files in {directory}")
    return [load_session(p) for p in paths]
