"""Oracle accounting and per-iteration run traces."""
import csv
import io
import math
import time
from dataclasses import dataclass

COLUMNS = ("iter", "grad_calls", "proj_calls", "value", "gap_upper", "dist_sq", "wall_ms")


@dataclass
class OracleCounter:
    """Running totals shared by nested solvers so outer traces see inner work."""

    grad: int = 0
    proj: int = 0
    prox: int = 0

    def snapshot(self):
        return self.grad, self.proj


def _fmt(v):
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def _parse(s):
    return math.nan if s == "" else float(s)


class RunTrace:
    """Rows of (iter, grad_calls, proj_calls, value, gap_upper, dist_sq, wall_ms).

    Extra per-iteration diagnostics can be attached by keyword; they live in
    ``extras`` and are not written to CSV. Wall-clock is recorded only when
    ``record_wall`` is set, otherwise the column holds 0 so traces of seeded
    runs are byte-identical.
    """

    def __init__(self, counter=None, record_wall=False):
        self.counter = counter if counter is not None else OracleCounter()
        self.record_wall = record_wall
        self.rows = []
        self.extras = {}
        self._t0 = time.perf_counter()

    def log(self, it, value=math.nan, gap_upper=math.nan, dist_sq=math.nan, **extra):
        wall = int(round(1000 * (time.perf_counter() - self._t0))) if self.record_wall else 0
        g, p = self.counter.snapshot()
        self.rows.append((int(it), g, p, float(value), float(gap_upper), float(dist_sq), wall))
        for k, v in extra.items():
            self.extras.setdefault(k, []).append(v)

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        i = COLUMNS.index(name)
        return [r[i] for r in self.rows]

    @property
    def last(self):
        return self.rows[-1] if self.rows else None

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([r[0], r[1], r[2], _fmt(r[3]), _fmt(r[4]), _fmt(r[5]), r[6]])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.reader(io.StringIO(text)))
        if tuple(rows[0]) != COLUMNS:
            raise ValueError(f"unexpected trace header {rows[0]}")
        tr = cls()
        for r in rows[1:]:
            tr.rows.append((int(r[0]), int(r[1]), int(r[2]), _parse(r[3]), _parse(r[4]), _parse(r[5]), int(r[6])))
        return tr
