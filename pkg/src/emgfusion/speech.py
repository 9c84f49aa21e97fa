"""Map raw recogniser output to one of the five arm commands.

Recognisers misfire in predictable ways: a phrase is caught twice, filler
words creep in, or a command comes back as an unrelated word ("override" for
"move right"). An :class:`AliasTable` folds all of these onto a command.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType

from .errors import ConflictingAlias, ParseError, UnknownCommand, UnknownLabel
from .labels import SpeechCommand

_NON_ALNUM = re.compile(r"[^0-9a-z]+")

DEFAULT_ALIASES = {"override": SpeechCommand.MOVE_RIGHT}


def normalize_text(raw: str) -> str:
    tokens = _NON_ALNUM.sub(" ", raw.lower()).split()
    # halve while the sequence is an exact doubling, so the result is stable
    while tokens and len(tokens) % 2 == 0 and tokens[: len(tokens) // 2] == tokens[len(tokens) // 2:]:
        tokens = tokens[: len(tokens) // 2]
    return " ".join(tokens)


class NoMatch:
    """Singleton result: the utterance names no known command."""

    def __repr__(self):
        return "NO_MATCH"

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Ambiguous:
    candidates: tuple[SpeechCommand, ...]

    def __bool__(self):
        return False


NO_MATCH = NoMatch()


class AliasTable:
    """Immutable many-to-one map from normalised alias to command."""

    def __init__(self, entries: dict[str, SpeechCommand] | None = None):
        merged = {cmd.canonical: cmd for cmd in SpeechCommand}
        for alias, cmd in (entries or {}).items():
            key = normalize_text(alias)
            if not key:
                raise ValueError(f"alias {alias!r} is empty after normalisation")
            if merged.get(key, cmd) != cmd:
                raise ConflictingAlias(f"alias {key!r} maps to both {merged[key].canonical!r} and {cmd.canonical!r}")
            merged[key] = SpeechCommand(cmd)
        self.entries = MappingProxyType(merged)
        self._token_aliases = [(tuple(k.split()), v) for k, v in merged.items()]

    def __len__(self):
        return len(self.entries)

    def __contains__(self, alias):
        return alias in self.entries

    def __getitem__(self, alias):
        return self.entries[alias]

    def resolve(self, raw: str):
        """Command for ``raw``, else :data:`NO_MATCH` or an :class:`Ambiguous`.

        Exact alias lookup wins. Otherwise a command matches when every token
        of one of its aliases occurs, in order, inside the utterance.
        """
        text = normalize_text(raw)
        if text in self.entries:
            return self.entries[text]
        words = text.split()
        hits = sorted({cmd for toks, cmd in self._token_aliases if _is_subsequence(toks, words)})
        if not hits:
            return NO_MATCH
        if len(hits) > 1:
            return Ambiguous(tuple(hits))
        return hits[0]


def _is_subsequence(needle, haystack) -> bool:
    it = iter(haystack)
    return all(tok in it for tok in needle)


def default_alias_table() -> AliasTable:
    return AliasTable(DEFAULT_ALIASES)


def resolve(raw: str, table: AliasTable | None = None):
    return (table or default_alias_table()).resolve(raw)


def parse_alias_lines(lines) -> AliasTable:
    entries: dict[str, SpeechCommand] = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=>" not in line:
            raise ParseError("expected 'alias => command'", lineno)
        alias, command = (part.strip() for part in line.split("=>", 1))
        try:
            cmd = SpeechCommand.parse(command)
        except UnknownLabel:
            raise UnknownCommand(f"unknown command {command!r}", lineno) from None
        key = normalize_text(alias)
        if not key:
            raise ParseError("empty alias", lineno)
        canonical = {c.canonical: c for c in SpeechCommand}
        previous = entries.get(key, canonical.get(key, cmd))
        if previous != cmd:
            raise ConflictingAlias(f"alias {key!r} already maps to {previous.canonical!r}", lineno)
        entries[key] = cmd
    return AliasTable(entries)


def load_alias_table(path) -> AliasTable:
    with open(Path(path), encoding="utf-8") as fh:
        return parse_alias_lines(fh.read().splitlines())
