"""Flat experiment configuration files.

Grammar, one entry per line::

    # comment (also after a value, when preceded by whitespace)
    section.key = value

Sections are ``problem``, ``solver`` and ``output``; keys may contain further
dots. Blank lines are ignored and a key may appear only once. Values are
parsed in this order:

* ``true`` / ``false`` -> bool, ``none`` -> None
* integer or float literal
* a list of numbers separated by commas, e.g. ``1.0, 2.0``
* a matrix, rows separated by ``;`` and entries by commas, e.g. ``1, 0; 0, 1``
* anything else is kept as a string, with surrounding quotes removed

Relative paths in the ``output`` section and in ``problem.anchors_csv`` are
resolved against the directory of the config file.
"""
import os
import re
from dataclasses import dataclass, field

from .errors import ConfigError

SECTIONS = ("problem", "solver", "output")
_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)+$")
_NUM = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$|^[+-]?(inf|nan)$")


def _number(tok):
    tok = tok.strip()
    if not _NUM.match(tok):
        return None
    if re.match(r"^[+-]?\d+$", tok):
        return int(tok)
    return float(tok)


def parse_value(text):
    s = text.strip()
    low = s.lower()
    if low in ("true", "false"):
        return low == "true"
    if low == "none":
        return None
    n = _number(s)
    if n is not None:
        return n
    if ";" in s:
        rows = []
        for r in s.split(";"):
            if not r.strip():
                continue
            vals = [_number(t) for t in r.split(",")]
            if any(v is None for v in vals):
                break
            rows.append([float(v) for v in vals])
        else:
            if rows and len({len(r) for r in rows}) == 1:
                return rows
            raise ValueError(f"ragged matrix {s!r}")
    if "," in s:
        vals = [_number(t) for t in s.split(",")]
        if all(v is not None for v in vals):
            return [float(v) for v in vals]
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "\"'":
        return s[1:-1]
    return s


def _strip_comment(line):
    m = re.search(r"(^|\s)#", line)
    return line if m is None else line[: m.start()]


def parse_text(text):
    """Parse config text into ``{section: {key: value}}``."""
    out = {s: {} for s in SECTIONS}
    for num, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {num}: expected 'key = value'", key=f"line{num}")
        key, val = (p.strip() for p in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(f"line {num}: malformed key", key=key)
        section, sub = key.split(".", 1)
        if section not in SECTIONS:
            raise ConfigError(f"unknown section, expected one of {', '.join(SECTIONS)}", key=key)
        if sub in out[section]:
            raise ConfigError("duplicate key", key=key)
        try:
            out[section][sub] = parse_value(val)
        except ValueError as e:
            raise ConfigError(str(e), key=key) from None
    return out


def dump_value(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        if v and isinstance(v[0], (list, tuple)):
            return "; ".join(", ".join(repr(float(a)) for a in row) for row in v)
        return ", ".join(repr(float(a)) for a in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class ExperimentConfig:
    problem: dict
    solver: dict
    output: dict = field(default_factory=dict)
    base_dir: str = "."

    @classmethod
    def from_text(cls, text, base_dir="."):
        d = parse_text(text)
        cfg = cls(d["problem"], d["solver"], d["output"], base_dir)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e.strerror}", key=str(path)) from None
        return cls.from_text(text, base_dir=os.path.dirname(os.path.abspath(path)))

    def to_text(self):
        lines = []
        for section in SECTIONS:
            for k, v in getattr(self, section).items():
                lines.append(f"{section}.{k} = {dump_value(v)}")
        return "\n".join(lines) + "\n"

    def path(self, key):
        """Resolved output path for ``output.<key>``, or None."""
        p = self.output.get(key)
        if p is None:
            return None
        return p if os.path.isabs(p) else os.path.join(self.base_dir, p)

    def get(self, section, key, default=None):
        return getattr(self, section).get(key, default)

    def validate(self):
        from .registry import PROBLEMS, SOLVERS, solver_keys

        name = self.problem.get("name")
        if name is None:
            raise ConfigError("missing problem name", key="problem.name")
        if name not in PROBLEMS:
            raise ConfigError(f"unknown problem {name!r}; known: {', '.join(sorted(PROBLEMS))}", key="problem.name")
        allowed = PROBLEMS[name].keys | {"name", "seed"}
        for k in self.problem:
            if k not in allowed:
                raise ConfigError(f"not a parameter of {name}", key=f"problem.{k}")
        seed = self.problem.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ConfigError("seed must be a nonnegative integer", key="problem.seed")
        sname = self.solver.get("name")
        if sname is None:
            raise ConfigError("missing solver name", key="solver.name")
        if sname not in SOLVERS:
            raise ConfigError(f"unknown solver {sname!r}; known: {', '.join(SOLVERS)}", key="solver.name")
        for k in self.solver:
            if k not in solver_keys(sname):
                raise ConfigError(f"not an option of {sname}", key=f"solver.{k}")
        eps = self.solver.get("epsilon")
        if eps is not None and (isinstance(eps, (bool, str, list)) or not eps > 0):
            raise ConfigError("epsilon must be a positive number", key="solver.epsilon")
        budget = self.solver.get("max_iter")
        if budget is not None and (not isinstance(budget, int) or isinstance(budget, bool) or budget < 0):
            raise ConfigError("max_iter must be a nonnegative integer", key="solver.max_iter")
        for k in self.output:
            if k not in ("csv", "plot", "fixture"):
                raise ConfigError("unknown output, expected csv, plot or fixture", key=f"output.{k}")
        kind = PROBLEMS[name].kind
        if kind != SOLVERS[sname]:
            raise ConfigError(
                f"solver {sname} needs a {SOLVERS[sname]} problem but {name} is {kind}", key="solver.name"
            )
