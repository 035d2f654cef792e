"""Folksonomy data model, dump parsing, cleaning, p-core pruning and the
frozen training index."""

from __future__ import annotations

import csv
import io
import logging
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence, TextIO

_log = logging.getLogger(__name__)

DEFAULT_BLACKLIST = frozenset({"no-tag", "bibtex-import"})

SNAPSHOT_MAGIC = "FOLKREC-IDX"
SNAPSHOT_VERSION = 1


class DatasetError(ValueError):
    """Raised for unreadable or malformed input data."""


class SnapshotError(ValueError):
    """Raised when an index snapshot cannot be loaded."""


@dataclass(frozen=True, order=True)
class TagAssignment:
    user: str
    resource: str
    tag: str
    timestamp: int


@dataclass(frozen=True, order=True)
class Post:
    """One bookmark: a user's full tag set on one resource.

    ``tags`` is kept as a sorted tuple so posts compare and hash
    deterministically.
    """

    user: str
    resource: str
    tags: tuple[str, ...]
    timestamp: int

    def __post_init__(self) -> None:
        if not self.tags:
            raise ValueError(f"post ({self.user}, {self.resource}) has no tags")
        ordered = tuple(sorted(set(self.tags)))
        if ordered != self.tags:
            object.__setattr__(self, "tags", ordered)
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")

    def assignments(self) -> Iterator[TagAssignment]:
        for tag in self.tags:
            yield TagAssignment(self.user, self.resource, tag, self.timestamp)


@dataclass(frozen=True)
class Folksonomy:
    """An immutable collection of posts, at most one per (user, resource)."""

    posts: tuple[Post, ...] = ()

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.posts))
        seen = set()
        for post in ordered:
            key = (post.user, post.resource)
            if key in seen:
                raise ValueError(f"duplicate post for {key}")
            seen.add(key)
        object.__setattr__(self, "posts", ordered)

    def __len__(self) -> int:
        return len(self.posts)

    def __iter__(self) -> Iterator[Post]:
        return iter(self.posts)

    @cached_property
    def users(self) -> frozenset[str]:
        return frozenset(p.user for p in self.posts)

    @cached_property
    def resources(self) -> frozenset[str]:
        return frozenset(p.resource for p in self.posts)

    @cached_property
    def tags(self) -> frozenset[str]:
        return frozenset(t for p in self.posts for t in p.tags)

    @property
    def n_tas(self) -> int:
        return sum(len(p.tags) for p in self.posts)

    def stats(self) -> dict[str, int]:
        """Counts in the layout of the usual dataset-properties table."""
        return {
            "B": len(self.posts),
            "U": len(self.users),
            "R": len(self.resources),
            "T": len(self.tags),
            "TAS": self.n_tas,
        }

    def assignments(self) -> Iterator[TagAssignment]:
        for post in self.posts:
            yield from post.assignments()

    @classmethod
    def from_assignments(cls, rows: Iterable[TagAssignment]) -> "Folksonomy":
        return cls(tuple(_group_posts(rows)))


# --------------------------------------------------------------------------
# parsing


@dataclass(frozen=True)
class ColumnFormat:
    """Column layout of a tag-assignment dump.

    ``delimiter`` of ``None`` splits on runs of whitespace; any other value
    is handed to :mod:`csv`, so quoted fields work for comma files.
    """

    user: int = 0
    resource: int = 1
    tag: int = 2
    timestamp: int = 3
    delimiter: str | None = None
    header: bool = False

    @classmethod
    def from_order(cls, order: str, delimiter: str | None = None, header: bool = False) -> "ColumnFormat":
        """Build from a comma list such as ``"user,tag,resource,timestamp"``.

        Unneeded columns may be named ``_``.
        """
        names = [n.strip() for n in order.split(",")]
        required = ("user", "resource", "tag", "timestamp")
        missing = [n for n in required if n not in names]
        if missing:
            raise ValueError(f"column order lacks {', '.join(missing)}")
        return cls(
            **{n: names.index(n) for n in required},
            delimiter=delimiter,
            header=header,
        )

    @property
    def width(self) -> int:
        return max(self.user, self.resource, self.tag, self.timestamp) + 1


def parse_timestamp(text: str) -> int:
    """Epoch seconds (int or float, truncated) or ISO-8601; naive times are UTC."""
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        pass
    else:
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"bad timestamp {text!r}")
        return int(value)
    iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    dt = datetime.fromisoformat(iso)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _split_lines(stream: TextIO, fmt: ColumnFormat) -> Iterator[tuple[int, list[str]]]:
    if fmt.delimiter is None:
        for lineno, line in enumerate(stream, 1):
            yield lineno, line.split()
    else:
        reader = csv.reader(stream, delimiter=fmt.delimiter)
        for fields in reader:
            yield reader.line_num, fields


def read_assignments(stream: TextIO, fmt: ColumnFormat = ColumnFormat()) -> Iterator[TagAssignment]:
    """Yield raw tag assignments; blank lines and ``#`` comments are skipped."""
    first = True
    for lineno, fields in _split_lines(stream, fmt):
        if not fields or (len(fields) == 1 and not fields[0].strip()):
            continue
        if fields[0].startswith("#"):
            continue
        if first and fmt.header:
            first = False
            continue
        first = False
        if len(fields) < fmt.width:
            raise DatasetError(f"line {lineno}: expected {fmt.width} columns, got {len(fields)}")
        user = fields[fmt.user].strip()
        resource = fields[fmt.resource].strip()
        tag = fields[fmt.tag].strip()
        if not user or not resource or not tag:
            raise DatasetError(f"line {lineno}: empty user, resource or tag")
        try:
            ts = parse_timestamp(fields[fmt.timestamp])
        except ValueError as exc:
            raise DatasetError(f"line {lineno}: {exc}") from None
        if ts < 0:
            raise DatasetError(f"line {lineno}: negative timestamp {ts}")
        yield TagAssignment(user, resource, tag, ts)


def _group_posts(rows: Iterable[TagAssignment]) -> Iterator[Post]:
    # (user, resource) -> latest timestamp and the tags recorded at it;
    # a later re-bookmark replaces the earlier one wholesale
    latest: dict[tuple[str, str], tuple[int, set[str]]] = {}
    for row in rows:
        key = (row.user, row.resource)
        cur = latest.get(key)
        if cur is None or row.timestamp > cur[0]:
            latest[key] = (row.timestamp, {row.tag})
        elif row.timestamp == cur[0]:
            cur[1].add(row.tag)
    for (user, resource), (ts, tags) in latest.items():
        yield Post(user, resource, tuple(tags), ts)


def parse_dataset(stream: TextIO | str, fmt: ColumnFormat = ColumnFormat()) -> Folksonomy:
    """Parse a line-oriented dump into a :class:`Folksonomy`.

    ``stream`` may be an open text file or a string holding the data.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    folk = Folksonomy.from_assignments(read_assignments(stream, fmt))
    if not folk.posts:
        raise DatasetError("empty dataset")
    return folk


def write_dataset(folk: Folksonomy, stream: TextIO) -> None:
    """Write one ``user resource tag timestamp`` TSV line per assignment."""
    for a in folk.assignments():
        stream.write(f"{a.user}\t{a.resource}\t{a.tag}\t{a.timestamp}\n")


# --------------------------------------------------------------------------
# cleaning


def preprocess(folk: Folksonomy, blacklist: Iterable[str] = DEFAULT_BLACKLIST) -> Folksonomy:
    """Lowercase tags, drop blacklisted ones and any post left without tags."""
    banned = {b.lower() for b in blacklist}
    posts = []
    for post in folk.posts:
        tags = {t.lower() for t in post.tags} - banned
        if tags:
            posts.append(Post(post.user, post.resource, tuple(tags), post.timestamp))
    return Folksonomy(tuple(posts))


def sample_users(folk: Folksonomy, fraction: float, seed: int) -> Folksonomy:
    """Keep the posts of a seeded uniform sample of users."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    users = sorted(folk.users)
    if fraction == 1 or not users:
        return folk
    n = max(1, round(fraction * len(users)))
    keep = set(random.Random(seed).sample(users, n))
    return Folksonomy(tuple(p for p in folk.posts if p.user in keep))


def p_core(folk: Folksonomy, p: int) -> Folksonomy:
    """Largest sub-folksonomy where every user, resource and tag occurs in at
    least ``p`` posts.

    Under-threshold users and resources take their posts with them; an
    under-threshold tag is stripped from the posts that carry it, and posts
    left empty disappear. Repeats until nothing changes.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    posts = {(q.user, q.resource): (set(q.tags), q.timestamp) for q in folk.posts}
    if p == 1:
        return folk
    while True:
        n_user: Counter[str] = Counter()
        n_res: Counter[str] = Counter()
        n_tag: Counter[str] = Counter()
        for (u, r), (tags, _) in posts.items():
            n_user[u] += 1
            n_res[r] += 1
            n_tag.update(tags)
        weak_tags = {t for t, c in n_tag.items() if c < p}
        changed = False
        for key in list(posts):
            u, r = key
            if n_user[u] < p or n_res[r] < p:
                del posts[key]
                changed = True
                continue
            tags = posts[key][0]
            if tags & weak_tags:
                tags -= weak_tags
                changed = True
                if not tags:
                    del posts[key]
        if not changed:
            break
    result = Folksonomy(tuple(Post(u, r, tuple(tags), ts) for (u, r), (tags, ts) in posts.items()))
    if not result.posts:
        _log.warning("%d-core is empty", p)
    return result


# --------------------------------------------------------------------------
# training index


def _freeze(d: Mapping) -> Mapping:
    return MappingProxyType(dict(sorted(d.items())))


class TrainingIndex:
    """Read-only lookup tables over a training folksonomy.

    Attributes:
        user_tag_times: user -> tag -> sorted tuple of usage timestamps.
        user_tag_counts: user -> tag -> number of assignments.
        resource_tag_counts: resource -> tag -> number of assignments.
        tag_counts: tag -> number of assignments overall.
        user_assignments: user -> number of assignments.
        user_latest: user -> latest post timestamp.
    """

    __slots__ = (
        "folksonomy",
        "user_tag_times",
        "user_tag_counts",
        "resource_tag_counts",
        "tag_counts",
        "user_assignments",
        "user_latest",
        "_cache",
    )

    def __init__(self, folk: Folksonomy) -> None:
        times: dict[str, dict[str, list[int]]] = defaultdict(lambda: defaultdict(list))
        res: dict[str, Counter[str]] = defaultdict(Counter)
        glob: Counter[str] = Counter()
        latest: dict[str, int] = {}
        for post in folk.posts:
            for tag in post.tags:
                times[post.user][tag].append(post.timestamp)
                res[post.resource][tag] += 1
                glob[tag] += 1
            if post.timestamp > latest.get(post.user, -1):
                latest[post.user] = post.timestamp

        s = object.__setattr__
        s(self, "folksonomy", folk)
        s(self, "user_tag_times", _freeze({
            u: _freeze({t: tuple(sorted(ts)) for t, ts in tags.items()}) for u, tags in times.items()
        }))
        s(self, "user_tag_counts", _freeze({
            u: _freeze({t: len(ts) for t, ts in tags.items()}) for u, tags in self.user_tag_times.items()
        }))
        s(self, "resource_tag_counts", _freeze({r: _freeze(c) for r, c in res.items()}))
        s(self, "tag_counts", _freeze(glob))
        s(self, "user_assignments", _freeze({u: sum(c.values()) for u, c in self.user_tag_counts.items()}))
        s(self, "user_latest", _freeze(latest))
        # per-index memo for derived structures (graph, CF norms); filled
        # before any concurrent querying
        s(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("TrainingIndex is immutable")

    @property
    def n_tas(self) -> int:
        return self.folksonomy.n_tas

    def tag_times(self, user: str, tag: str) -> tuple[int, ...]:
        return self.user_tag_times.get(user, {}).get(tag, ())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TrainingIndex) and self.folksonomy == other.folksonomy

    def __hash__(self) -> int:
        return hash(self.folksonomy)

    def __repr__(self) -> str:
        st = self.folksonomy.stats()
        return "TrainingIndex(" + ", ".join(f"{k}={v}" for k, v in st.items()) + ")"


def build_index(folk: Folksonomy) -> TrainingIndex:
    return TrainingIndex(folk)


# --------------------------------------------------------------------------
# snapshots
#
# Layout (UTF-8, "\n" line ends):
#   FOLKREC-IDX v1
#   posts<TAB>N
#   N lines: user<TAB>resource<TAB>timestamp<TAB>tag[<TAB>tag...]   (sorted)
#   end
# Fields escape backslash, tab and newline.

_ESC = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESC = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def _escape(s: str) -> str:
    return "".join(_ESC.get(c, c) for c in s)


def _unescape(s: str) -> str:
    out = []
    it = iter(s)
    for c in it:
        if c == "\\":
            nxt = next(it, None)
            if nxt not in _UNESC:
                raise SnapshotError(f"bad escape in {s!r}")
            out.append(_UNESC[nxt])
        else:
            out.append(c)
    return "".join(out)


def snapshot(index: TrainingIndex) -> bytes:
    posts: Sequence[Post] = index.folksonomy.posts
    lines = [f"{SNAPSHOT_MAGIC} v{SNAPSHOT_VERSION}", f"posts\t{len(posts)}"]
    for p in posts:
        fields = [_escape(p.user), _escape(p.resource), str(p.timestamp)]
        fields.extend(_escape(t) for t in p.tags)
        lines.append("\t".join(fields))
    lines.append("end")
    return ("\n".join(lines) + "\n").encode("utf-8")


def load_snapshot(data: bytes) -> TrainingIndex:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SnapshotError(f"snapshot is not UTF-8: {exc}") from None
    lines = text.split("\n")
    if not lines or not lines[0].startswith(SNAPSHOT_MAGIC + " v"):
        raise SnapshotError("missing FOLKREC-IDX header")
    version = lines[0][len(SNAPSHOT_MAGIC) + 2:]
    if version != str(SNAPSHOT_VERSION):
        raise SnapshotError(f"unsupported snapshot version {version!r} (expected {SNAPSHOT_VERSION})")
    if len(lines) < 2:
        raise SnapshotError("truncated snapshot")
    head = lines[1].split("\t")
    if len(head) != 2 or head[0] != "posts" or not head[1].isdigit():
        raise SnapshotError(f"bad length field {lines[1]!r}")
    n = int(head[1])
    # header, length, n records, "end", trailing empty string
    if len(lines) != n + 4 or lines[n + 2] != "end" or lines[n + 3] != "":
        raise SnapshotError("truncated or corrupt snapshot: record count does not match length field")
    posts = []
    for i, line in enumerate(lines[2:n + 2], 3):
        fields = line.split("\t")
        if len(fields) < 4 or not fields[2].isdigit():
            raise SnapshotError(f"line {i}: malformed record")
        tags = tuple(_unescape(t) for t in fields[3:])
        try:
            posts.append(Post(_unescape(fields[0]), _unescape(fields[1]), tags, int(fields[2])))
        except ValueError as exc:
            raise SnapshotError(f"line {i}: {exc}") from None
    try:
        folk = Folksonomy(tuple(posts))
    except ValueError as exc:
        raise SnapshotError(str(exc)) from None
    return TrainingIndex(folk)
