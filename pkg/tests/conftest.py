import numpy as np
import pytest

from skillirt.ingest import ResponseRecord, build_table


def table_from(rows):
    """Table from (student, skill, correct) triples in file order."""
    return build_table([ResponseRecord(str(s), str(k), int(y), i) for i, (s, k, y) in enumerate(rows)])


def random_table(rng, n_students, n_skills, n_records):
    # guarantee coverage, then fill the rest at random
    students = np.concatenate([np.arange(n_students), rng.integers(0, n_students, max(0, n_records - n_students))])
    skills = np.concatenate([np.arange(n_skills), rng.integers(0, n_skills, max(0, len(students) - n_skills))])
    students = students[: len(skills)]
    rng.shuffle(students)
    ys = rng.integers(0, 2, len(skills))
    return table_from(zip(students, skills, ys))


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    """Record one acceptance outcome; the lines are echoed at the end of the run."""
    line = f"acceptance {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
