import numpy as np
import pytest

ACCEPTANCE_LINES = []


def central_difference(f, x, h):
    """Plain central differences, independent of the package's own harness.

    ``f`` maps a 1-D float array to a scalar or 1-D array; returns (out_dim, len(x)).
    """
    x = np.asarray(x, dtype=float)
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
    cols = []
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        cols.append((np.atleast_1d(f(xp)) - np.atleast_1d(f(xm))) / (xp[i] - xm[i]))
    return np.column_stack(cols)


@pytest.fixture
def fd():
    return central_difference


@pytest.fixture
def acceptance_report():
    def report(number, title, passed, detail):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title} ({detail})"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
