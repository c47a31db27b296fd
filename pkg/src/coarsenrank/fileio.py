"""Text formats for preferences, ground-truth rankings, scores and DIC curves.

Preferences file: one preference per line, item IDs separated by ``>``, most
preferred first.  Blank lines and lines starting with ``#`` are skipped.

    # three judges
    a > b > c
    b > a

Truth file: one item ID per line, best first.  Scores file: CSV with header
``item,score,rank``.  DIC file: CSV with header ``alpha,f,g,dic``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import FloatArray, IntArray, PreferenceDataset, scores_to_ranking
from .gibbs import DicPoint

SCORES_HEADER = ("item", "score", "rank")
DIC_HEADER = ("alpha", "f", "g", "dic")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1, token: str = "") -> None:
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.token = token

    def __str__(self) -> str:
        where = f"line {self.line}, column {self.column}"
        suffix = f" ({self.token!r})" if self.token else ""
        return f"{where}: {self.message}{suffix}"


def _lines(text: str) -> Iterator[tuple[int, str]]:
    """Yield ``(1-based line number, line)``, accepting LF or CR-LF endings."""
    for number, line in enumerate(text.split("\n"), start=1):
        yield number, line.removesuffix("\r")


def _content(line: str) -> bool:
    stripped = line.strip()
    return bool(stripped) and not stripped.startswith("#")


def parse_preferences(text: str) -> PreferenceDataset:
    """Parse a preferences file; IDs get indices in order of first appearance."""
    index: dict[str, int] = {}
    prefs: list[list[int]] = []
    last = 0
    for number, line in _lines(text):
        last = number
        if not _content(line):
            continue
        items: list[int] = []
        seen: set[str] = set()
        col = 0
        for raw in line.split(">"):
            token = raw.strip()
            column = col + (len(raw) - len(raw.lstrip())) + 1
            col += len(raw) + 1
            if not token:
                raise ParseError("empty item id", number, column)
            if token in seen:
                raise ParseError("duplicate item", number, column, token)
            seen.add(token)
            items.append(index.setdefault(token, len(index)))
        if len(items) < 2:
            raise ParseError("a preference needs at least 2 items", number, 1, line.strip())
        prefs.append(items)
    if not prefs:
        raise ParseError("no preferences found", max(last, 1))
    return PreferenceDataset.from_lists(prefs, item_ids=list(index))


def _ids(items: PreferenceDataset | Sequence[str]) -> tuple[str, ...]:
    return items.item_ids if isinstance(items, PreferenceDataset) else tuple(items)


def parse_truth(text: str, items: PreferenceDataset | Sequence[str]) -> IntArray:
    """Parse a ground-truth ranking against a dataset (or a list of item IDs)."""
    ids = _ids(items)
    index = {item_id: i for i, item_id in enumerate(ids)}
    order: list[int] = []
    seen: set[str] = set()
    last = 0
    for number, line in _lines(text):
        last = number
        if not _content(line):
            continue
        token = line.strip()
        column = len(line) - len(line.lstrip()) + 1
        if token not in index:
            raise ParseError("unknown item", number, column, token)
        if token in seen:
            raise ParseError("duplicate item", number, column, token)
        seen.add(token)
        order.append(index[token])
    missing = [item_id for item_id in ids if item_id not in seen]
    if missing:
        raise ParseError("missing items: " + ", ".join(missing), max(last, 1))
    return np.asarray(order, dtype=np.int64)


def write_truth(ranking: Iterable[int], items: PreferenceDataset | Sequence[str]) -> str:
    ids = _ids(items)
    return "".join(f"{ids[i]}\n" for i in ranking)


def write_preferences(ds: PreferenceDataset) -> str:
    return "".join(">".join(ds.item_ids[i] for i in p.items) + "\n"
                   for p in ds.preferences)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _csv_rows(text: str, header: Sequence[str]) -> Iterator[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text.replace("\r\n", "\n")))
    first = next(reader, None)
    if first != list(header):
        raise ParseError(f"expected header {','.join(header)}", 1, 1,
                         ",".join(first or []))
    for row in reader:
        if row:
            yield reader.line_num, row


def _float(token: str, line: int, column: int) -> float:
    # float() accepts only "." as the decimal separator, whatever the locale.
    try:
        return float(token)
    except ValueError:
        raise ParseError("not a number", line, column, token) from None


def write_scores(theta: Sequence[float], items: PreferenceDataset | Sequence[str]) -> str:
    """Scores as CSV rows sorted by rank (1 = best), 12 significant digits."""
    ids = _ids(items)
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (len(ids),):
        raise ValueError("one score per item required")
    rows = [(ids[i], f"{theta[i]:.12g}", str(r))
            for r, i in enumerate(scores_to_ranking(theta), start=1)]
    return _csv_text(SCORES_HEADER, rows)


@dataclass(frozen=True)
class ScoresTable:
    item_ids: tuple[str, ...]
    scores: FloatArray
    ranks: IntArray

    @property
    def ranking(self) -> IntArray:
        """Row indices ordered best first."""
        return np.argsort(self.ranks, kind="stable").astype(np.int64)


def parse_scores(text: str) -> ScoresTable:
    ids, scores, ranks = [], [], []
    for line, row in _csv_rows(text, SCORES_HEADER):
        if len(row) != 3:
            raise ParseError("expected 3 fields", line, 1, ",".join(row))
        item_id, score, rank = row
        if item_id in ids:
            raise ParseError("duplicate item", line, 1, item_id)
        ids.append(item_id)
        scores.append(_float(score, line, 2))
        try:
            ranks.append(int(rank))
        except ValueError:
            raise ParseError("rank is not an integer", line, 3, rank) from None
    if sorted(ranks) != list(range(1, len(ranks) + 1)):
        raise ParseError("ranks must be 1..M without gaps", 1)
    return ScoresTable(tuple(ids), np.asarray(scores), np.asarray(ranks, dtype=np.int64))


def _format_alpha(alpha: float) -> str:
    return "inf" if math.isinf(alpha) else f"{alpha:.12g}"


def write_dic_curve(points: Iterable[DicPoint]) -> str:
    rows = [(_format_alpha(p.alpha), f"{p.f:.12g}", f"{p.g:.12g}", f"{p.dic:.12g}")
            for p in points]
    return _csv_text(DIC_HEADER, rows)


def parse_dic_curve(text: str) -> list[DicPoint]:
    points = []
    for line, row in _csv_rows(text, DIC_HEADER):
        if len(row) != 4:
            raise ParseError("expected 4 fields", line, 1, ",".join(row))
        alpha, f, g, dic = (_float(tok, line, col) for col, tok in enumerate(row, start=1))
        points.append(DicPoint(alpha=alpha, f=f, g=g, dic=dic))
    return points
