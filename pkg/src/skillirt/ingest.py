"""Reading response logs into an immutable, integer-interned interaction table."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence, TextIO, Union

import numpy as np

from .rng import partial_shuffle

log = logging.getLogger(__name__)

Column = Union[str, int]


class SchemaError(ValueError):
    """The input cannot be read with the given column schema."""


class EmptyTableError(ValueError):
    pass


@dataclass(frozen=True)
class ColumnSchema:
    """Where to find each field in a delimited log.

    Columns given as strings are looked up in the header row; integers are
    zero-based positions. ``true_values``/``false_values`` form the
    correctness vocabulary; anything else is ambiguous and dropped.
    """

    student_column: Column = "student"
    skill_column: Column = "skill"
    correct_column: Column = "correct"
    order_column: Column | None = None
    delimiter: str = ","
    multi_skill_separator: str | None = None
    expand_multi_skill: bool = False
    true_values: tuple[str, ...] = ("1",)
    false_values: tuple[str, ...] = ("0",)
    has_header: bool = True

    def __post_init__(self):
        required = [self.student_column, self.skill_column, self.correct_column]
        if len(set(required)) != 3:
            raise SchemaError("student, skill and correct columns must be distinct")
        if len(self.delimiter) != 1 or self.delimiter in "\r\n":
            raise SchemaError(f"bad delimiter {self.delimiter!r}")
        if set(self.true_values) & set(self.false_values):
            raise SchemaError("a value cannot be both true and false")
        if not self.has_header and not all(
            isinstance(c, int) for c in required + ([self.order_column] if self.order_column is not None else [])
        ):
            raise SchemaError("named columns need a header row")


@dataclass(frozen=True)
class ResponseRecord:
    """One graded attempt as read from the file.

    ``correct`` is None when the raw cell fell outside the vocabulary.
    ``multi_skill`` marks an unexpanded cell listing several skills.
    Records produced by expanding one row share that row's ``order``.
    """

    student: str
    skill: str
    correct: int | None
    order: int
    multi_skill: bool = False
    row: int | None = field(default=None, compare=False)

    @property
    def source_row(self) -> int:
        return self.order if self.row is None else self.row


@dataclass(frozen=True)
class RowError:
    row: int
    line: int
    message: str


@dataclass
class CleaningReport:
    rows_read: int = 0
    rows_dropped_missing_field: int = 0
    rows_dropped_bad_correctness: int = 0
    rows_dropped_multi_skill: int = 0
    rows_expanded_multi_skill: int = 0
    rows_kept: int = 0

    def balanced(self) -> bool:
        dropped = (
            self.rows_dropped_missing_field
            + self.rows_dropped_bad_correctness
            + self.rows_dropped_multi_skill
        )
        return self.rows_kept + dropped == self.rows_read + self.rows_expanded_multi_skill

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _resolve(col: Column, header: list[str] | None) -> int:
    if isinstance(col, int):
        return col
    assert header is not None
    try:
        return header.index(col)
    except ValueError:
        raise SchemaError(f"column {col!r} not in header {header}") from None


def parse_records(
    source: TextIO | str,
    schema: ColumnSchema = ColumnSchema(),
    errors: list[RowError] | None = None,
) -> list[ResponseRecord]:
    """Parse a delimited log into raw records.

    A row whose width does not match the header is reported in ``errors``
    (when given) and kept as a record with empty labels, so that cleaning
    counts it as a missing-field drop. A missing required column raises
    :class:`SchemaError`.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source, delimiter=schema.delimiter)
    header = None
    width = None
    if schema.has_header:
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError("input has no header row") from None
        width = len(header)
    cols = [_resolve(c, header) for c in (schema.student_column, schema.skill_column, schema.correct_column)]
    order_col = _resolve(schema.order_column, header) if schema.order_column is not None else None
    needed = max(cols + ([order_col] if order_col is not None else []))
    if width is not None and needed >= width:
        raise SchemaError(f"column index {needed} outside header of width {width}")

    truthy = set(schema.true_values)
    falsy = set(schema.false_values)
    sep = schema.multi_skill_separator
    records: list[ResponseRecord] = []
    for row, cells in enumerate(reader):
        if width is not None and len(cells) != width or len(cells) <= needed:
            msg = f"expected {width if width is not None else needed + 1} fields, got {len(cells)}"
            if errors is not None:
                errors.append(RowError(row, reader.line_num, msg))
            log.debug("row %d: %s", row, msg)
            records.append(ResponseRecord("", "", None, row, row=row))
            continue
        student, skill, raw = (cells[c].strip() for c in cols)
        correct = 1 if raw in truthy else 0 if raw in falsy else None
        order = row
        if order_col is not None:
            try:
                order = int(cells[order_col])
            except ValueError:
                if errors is not None:
                    errors.append(RowError(row, reader.line_num, f"bad order value {cells[order_col]!r}"))
                records.append(ResponseRecord("", "", None, row, row=row))
                continue
        if sep and sep in skill:
            parts = [p.strip() for p in skill.split(sep)]
            if schema.expand_multi_skill:
                records.extend(ResponseRecord(student, p, correct, order, row=row) for p in parts)
            else:
                records.append(ResponseRecord(student, skill, correct, order, multi_skill=True, row=row))
            continue
        records.append(ResponseRecord(student, skill, correct, order, row=row))
    return records


def clean(records: Sequence[ResponseRecord]) -> tuple[list[ResponseRecord], CleaningReport]:
    """Drop incomplete or ambiguous records, counting every drop.

    Expanded multi-skill rows are recognised by consecutive records sharing
    a source row; the extras are counted in ``rows_expanded_multi_skill``
    so that kept + dropped == read + expanded.
    """
    report = CleaningReport()
    kept = []
    prev_row = None
    for i, rec in enumerate(records):
        if i > 0 and rec.source_row == prev_row:
            report.rows_expanded_multi_skill += 1
        else:
            report.rows_read += 1
        prev_row = rec.source_row
        if not rec.student or not rec.skill:
            report.rows_dropped_missing_field += 1
        elif rec.multi_skill:
            report.rows_dropped_multi_skill += 1
        elif rec.correct not in (0, 1):
            report.rows_dropped_bad_correctness += 1
        else:
            kept.append(rec)
    report.rows_kept = len(kept)
    assert report.balanced()
    return kept, report


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class InteractionTable:
    """Cleaned responses with students and skills interned to dense indices.

    Arrays are read-only. Records are sorted by ``order`` (stable).
    """

    student: np.ndarray
    skill: np.ndarray
    correct: np.ndarray
    order: np.ndarray
    student_labels: tuple[str, ...]
    skill_labels: tuple[str, ...]
    attempts_per_student: np.ndarray = field(init=False)
    attempts_per_skill: np.ndarray = field(init=False)

    def __post_init__(self):
        for name in ("student", "skill", "order"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=np.int64)))
        object.__setattr__(self, "correct", _frozen(np.asarray(self.correct, dtype=np.int8)))
        n = len(self.student)
        if not (len(self.skill) == len(self.correct) == len(self.order) == n):
            raise ValueError("record arrays differ in length")
        if n == 0:
            raise EmptyTableError("empty table")
        object.__setattr__(
            self, "attempts_per_student", _frozen(np.bincount(self.student, minlength=self.num_students))
        )
        object.__setattr__(self, "attempts_per_skill", _frozen(np.bincount(self.skill, minlength=self.num_skills)))
        if len(self.attempts_per_student) != self.num_students or len(self.attempts_per_skill) != self.num_skills:
            raise ValueError("index outside label range")
        if self.attempts_per_student.min() == 0 or self.attempts_per_skill.min() == 0:
            raise ValueError("every student and skill must have at least one record")

    @property
    def num_students(self) -> int:
        return len(self.student_labels)

    @property
    def num_skills(self) -> int:
        return len(self.skill_labels)

    def __len__(self) -> int:
        return len(self.student)

    def __eq__(self, other):
        if not isinstance(other, InteractionTable):
            return NotImplemented
        return (
            self.student_labels == other.student_labels
            and self.skill_labels == other.skill_labels
            and all(
                np.array_equal(getattr(self, a), getattr(other, a))
                for a in ("student", "skill", "correct", "order")
            )
        )

    def records(self) -> list[ResponseRecord]:
        return [
            ResponseRecord(self.student_labels[s], self.skill_labels[k], int(y), int(o))
            for s, k, y, o in zip(self.student, self.skill, self.correct, self.order)
        ]

    def take(self, rows) -> "InteractionTable":
        """Sub-table of the given row positions, re-interned."""
        rows = np.sort(np.asarray(rows, dtype=np.int64))
        return _intern(
            [self.student_labels[i] for i in self.student[rows]],
            [self.skill_labels[i] for i in self.skill[rows]],
            self.correct[rows],
            self.order[rows],
        )

    def to_csv(self, stream: TextIO) -> None:
        """Write the canonical ``student,skill,correct,order`` layout."""
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["student", "skill", "correct", "order"])
        for s, k, y, o in zip(self.student, self.skill, self.correct, self.order):
            w.writerow([self.student_labels[s], self.skill_labels[k], int(y), int(o)])


def _intern(students: Iterable[str], skills: Iterable[str], correct, order) -> InteractionTable:
    s_index: dict[str, int] = {}
    k_index: dict[str, int] = {}
    s_idx = [s_index.setdefault(s, len(s_index)) for s in students]
    k_idx = [k_index.setdefault(k, len(k_index)) for k in skills]
    return InteractionTable(
        student=s_idx,
        skill=k_idx,
        correct=correct,
        order=order,
        student_labels=tuple(s_index),
        skill_labels=tuple(k_index),
    )


def build_table(records: Sequence[ResponseRecord]) -> InteractionTable:
    """Intern labels in first-appearance order after a stable sort on ``order``."""
    if not records:
        raise EmptyTableError("empty table")
    recs = sorted(records, key=lambda r: r.order)
    for r in recs:
        if r.correct not in (0, 1) or not r.student or not r.skill:
            raise ValueError(f"uncleaned record {r}")
    return _intern(
        (r.student for r in recs),
        (r.skill for r in recs),
        [r.correct for r in recs],
        [r.order for r in recs],
    )


def subsample(table: InteractionTable, n: int, seed: int) -> InteractionTable:
    """Uniform sample of ``n`` records without replacement.

    Indices come from :func:`skillirt.rng.partial_shuffle`; the sample keeps
    the table's record order and is re-interned, so entities without any
    sampled record disappear.
    """
    if n < 1 or n > len(table):
        raise ValueError(f"subsample size must be in [1, {len(table)}], got {n}")
    return table.take(partial_shuffle(len(table), n, seed))


def holdout_split(table: InteractionTable, fraction: float, seed: int) -> tuple[InteractionTable, InteractionTable]:
    """Record-level (train, test) split; ``fraction`` of records go to test."""
    if not 0 < fraction < 1:
        raise ValueError("holdout fraction must be in (0, 1)")
    n_test = int(round(fraction * len(table)))
    if not 0 < n_test < len(table):
        raise ValueError("holdout leaves an empty side")
    test_rows = partial_shuffle(len(table), n_test, seed)
    mask = np.ones(len(table), dtype=bool)
    mask[test_rows] = False
    return table.take(np.flatnonzero(mask)), table.take(test_rows)


def load_table(
    path, schema: ColumnSchema = ColumnSchema(), errors: list[RowError] | None = None
) -> tuple[InteractionTable, CleaningReport]:
    with open(path, newline="", encoding="utf-8") as f:
        records = parse_records(f, schema, errors)
    kept, report = clean(records)
    return build_table(kept), report
