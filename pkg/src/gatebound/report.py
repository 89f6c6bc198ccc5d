"""Machine- and human-readable reports with byte-deterministic rendering.

The JSON and CSV emitters are written by hand rather than delegated to the
stdlib: every numeric must appear as a finite IEEE double rendered with 17
significant digits, independent of locale, so that identical runs produce
identical bytes.  Schema (stable, version "1"):

    { "schema_version": "1", "command": str,
      "records": [ {"name": str, "expected": num|null, "measured": num,
                    "tolerance": num, "pass": bool} ],
      "summary": {"passed": int, "failed": int} }

CSV reports carry the header ``name,expected,measured,tolerance,pass``;
sweep tables carry their own documented headers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SCHEMA_VERSION = "1"

__all__ = [
    "SCHEMA_VERSION",
    "CheckRecord",
    "Report",
    "render_float",
    "render_report",
    "render_table",
]


def render_float(x: float) -> str:
    """A finite double with 17 significant digits, locale independent."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"refusing to render non-finite value {x!r}")
    return format(x, ".17g")


def _json_str(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


@dataclass(frozen=True)
class CheckRecord:
    """One named check: what was expected, what was measured, did it pass."""

    name: str
    expected: float | None
    measured: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class Report:
    command: str
    records: tuple

    def __init__(self, command: str, records):
        object.__setattr__(self, "command", command)
        object.__setattr__(self, "records", tuple(records))

    @property
    def n_passed(self) -> int:
        return sum(1 for r in self.records if r.passed)

    @property
    def n_failed(self) -> int:
        return len(self.records) - self.n_passed

    @property
    def all_passed(self) -> bool:
        return self.n_failed == 0


def _record_json(r: CheckRecord) -> str:
    expected = "null" if r.expected is None else render_float(r.expected)
    return ("{" + f'"name": {_json_str(r.name)}, '
            f'"expected": {expected}, '
            f'"measured": {render_float(r.measured)}, '
            f'"tolerance": {render_float(r.tolerance)}, '
            f'"pass": {"true" if r.passed else "false"}' + "}")


def _report_json(rep: Report) -> str:
    body = ", ".join(_record_json(r) for r in rep.records)
    return ("{" + f'"schema_version": {_json_str(SCHEMA_VERSION)}, '
            f'"command": {_json_str(rep.command)}, '
            f'"records": [{body}], '
            f'"summary": {{"passed": {rep.n_passed}, "failed": {rep.n_failed}}}' + "}\n")


def _report_csv(rep: Report) -> str:
    lines = ["name,expected,measured,tolerance,pass"]
    for r in rep.records:
        expected = "" if r.expected is None else render_float(r.expected)
        lines.append(",".join([r.name, expected, render_float(r.measured),
                               render_float(r.tolerance),
                               "true" if r.passed else "false"]))
    return "\n".join(lines) + "\n"


def _report_text(rep: Report) -> str:
    width = max((len(r.name) for r in rep.records), default=4)
    lines = [f"# {rep.command}"]
    for r in rep.records:
        expected = "-" if r.expected is None else render_float(r.expected)
        status = "pass" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  expected={expected} "
                     f"measured={render_float(r.measured)} "
                     f"tol={render_float(r.tolerance)}  {status}")
    lines.append(f"summary: passed={rep.n_passed} failed={rep.n_failed}")
    return "\n".join(lines) + "\n"


def render_report(rep: Report, fmt: str) -> str:
    if fmt == "json":
        return _report_json(rep)
    if fmt == "csv":
        return _report_csv(rep)
    if fmt == "text":
        return _report_text(rep)
    raise ValueError(f"unknown format {fmt!r}")


def render_table(header, rows, fmt: str) -> str:
    """Render a sweep-style table; cells are rendered by python type.

    Floats get the 17-digit treatment, booleans become true/false, everything
    else prints via ``str``.
    """
    def cell(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return render_float(v)
        return str(v)

    if fmt == "csv":
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(cell(v) for v in row))
        return "\n".join(lines) + "\n"
    if fmt == "text":
        rendered = [[cell(v) for v in row] for row in rows]
        widths = [max([len(h)] + [len(r[i]) for r in rendered])
                  for i, h in enumerate(header)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        for r in rendered:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown table format {fmt!r}")
