"""
gainscope - System File Loader

Reads and writes the sectioned system text format:

    [dims]      n = 1, m = 1, p = 1, ntheta = 2   (one key per line, or "1, 1, 1, 2")
    [A] [B] [C] [D]   one matrix row per line, entries separated by commas
    [nominal]   theta_star = v1, v2, ...
    [domain]    g1 = <poly>; g2 = <poly>   (';' or newline separated)
    [options]   normalize = true|false
    [box]       t1 = lo, hi                (optional sampling box)

Lines starting with '#' are comments.
"""
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ..polycore import ParseError, Polynomial, parse_polynomial, parse_rational
from .models import ParamMatrix, UncertainSystem, parameter_names


SECTIONS = ("dims", "A", "B", "C", "D", "nominal", "domain", "options", "box")
DIM_KEYS = ("n", "m", "p", "ntheta")

_HEADER_RE = re.compile(r"^\[\s*([A-Za-z]+)\s*\]$")


class SystemFormatError(Exception):
    """Raised when a system file is malformed; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class _Line:
    __slots__ = ("number", "text", "offset")

    def __init__(self, number: int, text: str, offset: int):
        self.number = number
        self.text = text
        self.offset = offset


def _split_with_columns(text: str, offset: int, separators: str) -> List[Tuple[str, int]]:
    """Split on separator characters, keeping the 1-based column of each stripped piece."""
    pieces = []
    start = 0
    for i, ch in enumerate(text + separators[0]):
        if ch in separators:
            raw = text[start:i]
            stripped = raw.strip()
            lead = len(raw) - len(raw.lstrip())
            pieces.append((stripped, offset + start + lead + 1))
            start = i + 1
    return pieces


def _split_sections(text: str) -> Tuple[Dict[str, List[_Line]], Dict[str, int]]:
    """Content lines per section and the line number of each section header."""
    sections: Dict[str, List[_Line]] = {}
    current: Optional[str] = None
    header_lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        stripped = body.strip()
        if not stripped:
            continue
        offset = len(body) - len(body.lstrip())
        match = _HEADER_RE.match(stripped)
        if match:
            name = match.group(1)
            if name not in SECTIONS:
                raise SystemFormatError(f"Unknown section [{name}]", number, offset + 1)
            if name in sections:
                raise SystemFormatError(
                    f"Duplicate section [{name}] (first at line {header_lines[name]})", number, offset + 1
                )
            sections[name] = []
            header_lines[name] = number
            current = name
            continue
        if current is None:
            raise SystemFormatError("Content before first section header", number, offset + 1)
        sections[current].append(_Line(number, body.strip(), offset))
    return sections, header_lines


def _key_value(line: _Line) -> Tuple[str, str, int]:
    if "=" not in line.text:
        raise SystemFormatError("Expected 'key = value'", line.number, line.offset + 1)
    key, value = line.text.split("=", 1)
    value_col = line.offset + len(key) + 2 + (len(value) - len(value.lstrip()))
    return key.strip(), value.strip(), value_col


def _parse_float(text: str, line: int, column: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise SystemFormatError(f"Expected a number, got {text!r}", line, column)


def _parse_dims(lines: List[_Line]) -> Dict[str, int]:
    dims: Dict[str, int] = {}
    for line in lines:
        if "=" in line.text:
            for piece, col in _split_with_columns(line.text, line.offset, ","):
                if "=" not in piece:
                    raise SystemFormatError("Expected 'key = value'", line.number, col)
                key, value = (s.strip() for s in piece.split("=", 1))
                if key not in DIM_KEYS:
                    raise SystemFormatError(f"Unknown dimension {key!r}", line.number, col)
                dims[key] = int(_parse_float(value, line.number, col))
        else:
            pieces = _split_with_columns(line.text, line.offset, ",")
            if len(pieces) != 4:
                raise SystemFormatError("Expected 'n, m, p, ntheta'", line.number, line.offset + 1)
            for key, (piece, col) in zip(DIM_KEYS, pieces):
                dims[key] = int(_parse_float(piece, line.number, col))
    for key in DIM_KEYS:
        if key not in dims:
            raise SystemFormatError(f"Missing dimension {key!r}", lines[0].number if lines else 1)
        if dims[key] < 1:
            raise SystemFormatError(f"Dimension {key} must be >= 1", lines[0].number)
    return dims


def _parse_matrix(
    name: str,
    lines: List[_Line],
    nrows: int,
    ncols: int,
    allowed: Tuple[str, ...],
    header_line: int,
) -> ParamMatrix:
    if len(lines) != nrows:
        where = lines[nrows].number if len(lines) > nrows else header_line
        raise SystemFormatError(f"[{name}] has {len(lines)} rows, expected {nrows}", where)
    rows = []
    for line in lines:
        pieces = _split_with_columns(line.text, line.offset, ",")
        if len(pieces) != ncols:
            raise SystemFormatError(
                f"[{name}] row has {len(pieces)} entries, expected {ncols}", line.number, line.offset + 1
            )
        row = []
        for piece, col in pieces:
            try:
                row.append(parse_rational(piece, allowed))
            except ParseError as e:
                raise SystemFormatError(e.message, line.number, col + e.column - 1)
        rows.append(row)
    return ParamMatrix.from_rows(rows, ncols=ncols)


def _parse_domain(lines: List[_Line], allowed: Tuple[str, ...]) -> List[Polynomial]:
    polys = []
    for line in lines:
        for piece, col in _split_with_columns(line.text, line.offset, ";"):
            if not piece:
                continue
            expr, expr_col = piece, col
            if "=" in piece:
                key, value = piece.split("=", 1)
                expr = value.strip()
                expr_col = col + len(key) + 1 + (len(value) - len(value.lstrip()))
            try:
                polys.append(parse_polynomial(expr, allowed))
            except ParseError as e:
                raise SystemFormatError(e.message, line.number, expr_col + e.column - 1)
    return polys


def _parse_bool(text: str, line: int, column: int) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise SystemFormatError(f"Expected true/false, got {text!r}", line, column)


def load_system(text: str) -> UncertainSystem:
    """
    Parse and validate a system description.

    Raises:
        SystemFormatError: Malformed text (with line/column)
        ShapeMismatchError: Inconsistent matrix shapes
        NominalOutsideDomainError: theta* violates some g_j
        ParameterSingularityError: A denominator vanishes at theta*
    """
    sections, header_lines = _split_sections(text)
    for required in ("dims", "A", "B", "C", "nominal"):
        if required not in sections:
            raise SystemFormatError(f"Missing section [{required}]", 1)

    dims = _parse_dims(sections["dims"])
    n, m, p, k = dims["n"], dims["m"], dims["p"], dims["ntheta"]
    names = parameter_names(k)

    A = _parse_matrix("A", sections["A"], n, n, names, header_lines["A"])
    B = _parse_matrix("B", sections["B"], n, m, names, header_lines["B"])
    C = _parse_matrix("C", sections["C"], p, n, names, header_lines["C"])
    if "D" in sections:
        D = _parse_matrix("D", sections["D"], p, m, names, header_lines["D"])
    else:
        D = ParamMatrix.zeros(p, m)

    theta_star: Optional[List[float]] = None
    for line in sections["nominal"]:
        key, value, col = _key_value(line)
        if key != "theta_star":
            raise SystemFormatError(f"Unknown nominal key {key!r}", line.number, line.offset + 1)
        theta_star = [
            _parse_float(piece, line.number, c)
            for piece, c in _split_with_columns(value, col - 1, ",")
        ]
        if len(theta_star) != k:
            raise SystemFormatError(f"theta_star has {len(theta_star)} values, expected {k}", line.number, col)
    if theta_star is None:
        raise SystemFormatError("Missing theta_star", 1)

    domain = _parse_domain(sections.get("domain", []), names)

    normalize = False
    normalized = False
    for line in sections.get("options", []):
        key, value, col = _key_value(line)
        if key == "normalize":
            normalize = _parse_bool(value, line.number, col)
        elif key == "normalized":
            normalized = _parse_bool(value, line.number, col)
        else:
            raise SystemFormatError(f"Unknown option {key!r}", line.number, line.offset + 1)

    box: Optional[List[Tuple[float, float]]] = None
    if "box" in sections:
        intervals: Dict[str, Tuple[float, float]] = {}
        for line in sections["box"]:
            key, value, col = _key_value(line)
            if key not in names:
                raise SystemFormatError(f"Unknown parameter {key!r} in [box]", line.number, line.offset + 1)
            pieces = _split_with_columns(value, col - 1, ",")
            if len(pieces) != 2:
                raise SystemFormatError("Expected 'lo, hi'", line.number, col)
            lo, hi = (_parse_float(s, line.number, c) for s, c in pieces)
            if not lo < hi:
                raise SystemFormatError(f"Empty interval [{lo}, {hi}]", line.number, col)
            intervals[key] = (lo, hi)
        missing = [v for v in names if v not in intervals]
        if missing:
            raise SystemFormatError(f"[box] missing parameters {missing}", sections["box"][0].number)
        box = [intervals[v] for v in names]

    if normalize:
        return _normalized_system(A, B, C, D, theta_star, domain, names, box, sections)

    return UncertainSystem(
        A=A, B=B, C=C, D=D,
        theta_star=tuple(theta_star),
        domain=tuple(domain),
        param_names=names,
        box=tuple(box) if box is not None else None,
        normalized=normalized,
    )


def _normalized_system(A, B, C, D, theta_star, domain, names, box, sections) -> UncertainSystem:
    """Rewrite in relative coordinates theta_i = theta*_i (1 + theta~_i)."""
    for name, value in zip(names, theta_star):
        if value == 0.0:
            line = sections["nominal"][0].number
            raise SystemFormatError(f"normalize requires nonzero theta*, {name} = 0", line)
    mapping = {
        name: Polynomial.constant(value) * (Polynomial.variable(name) + 1.0)
        for name, value in zip(names, theta_star)
    }
    new_box = None
    if box is not None:
        new_box = tuple(
            tuple(sorted((lo / s - 1.0, hi / s - 1.0)))
            for (lo, hi), s in zip(box, theta_star)
        )
    return UncertainSystem(
        A=A.substitute(mapping),
        B=B.substitute(mapping),
        C=C.substitute(mapping),
        D=D.substitute(mapping),
        theta_star=tuple(0.0 for _ in theta_star),
        domain=tuple(g.substitute(mapping) for g in domain),
        param_names=names,
        box=new_box,
        normalized=True,
    )


def load_system_file(path: Union[str, Path]) -> UncertainSystem:
    """Read a system file (UTF-8)."""
    return load_system(Path(path).read_text(encoding="utf-8"))


def _real(value: float) -> str:
    return format(float(value), ".17g")


def serialize_system(system: UncertainSystem) -> str:
    """
    Canonical text form.

    Coordinates are written as stored (already normalized systems carry
    `normalized = true` and `normalize = false`), so the text reparses to an
    identical system.
    """
    lines = [
        "[dims]",
        f"n = {system.n}",
        f"m = {system.m}",
        f"p = {system.p}",
        f"ntheta = {system.n_theta}",
    ]
    for label, matrix in (("A", system.A), ("B", system.B), ("C", system.C), ("D", system.D)):
        lines.append("")
        lines.append(f"[{label}]")
        for row in matrix.entries:
            lines.append(", ".join(v.to_string() for v in row))
    lines += ["", "[nominal]", "theta_star = " + ", ".join(_real(v) for v in system.theta_star)]
    if system.domain:
        lines += ["", "[domain]"]
        lines += [f"g{j + 1} = {g.to_string()}" for j, g in enumerate(system.domain)]
    lines += [
        "",
        "[options]",
        "normalize = false",
        f"normalized = {'true' if system.normalized else 'false'}",
    ]
    if system.box is not None:
        lines += ["", "[box]"]
        lines += [
            f"{name} = {_real(lo)}, {_real(hi)}"
            for name, (lo, hi) in zip(system.param_names, system.box)
        ]
    return "\n".join(lines) + "\n"
