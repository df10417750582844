"""Text file formats for atomic and gridded measures.

Both formats are line-oriented, diff-friendly, and round-trip floats at
full precision (shortest repr).  See the CLI ``--schema`` output for the
authoritative description:

    varifold-atoms v1 n=<n> d=<d> count=<N>
    x_1 ... x_n | b_11 ... b_1n ; ... ; b_d1 ... b_dn | m

    varifold-grid v1 n=<n> d=<d> h=<h> origin=<o_1,...,o_n> counts=<c_1,...,c_n>
    i_1 ... i_n | b_11 ... b_1n ; ... ; b_d1 ... b_dn | m

Writes are atomic: a temporary file in the destination directory is
renamed over the target.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .atomic import AtomicVarifold
from .errors import ValidationError
from .gridding import CartesianGrid, DiscreteVarifold

ATOMS_MAGIC = "varifold-atoms v1"
GRID_MAGIC = "varifold-grid v1"


def format_float(x: float) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(x))


def write_text_atomic(path: str | Path, text: str) -> None:
    """Write a whole text file atomically (temp file + rename)."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _basis_text(basis: np.ndarray) -> str:
    return " ; ".join(" ".join(format_float(v) for v in row) for row in basis)


def _parse_basis(text: str, d: int, n: int, where: str) -> np.ndarray:
    rows = [chunk.split() for chunk in text.split(";")]
    if len(rows) != d or any(len(r) != n for r in rows):
        raise ValidationError(f"{where}: expected a {d} x {n} basis block")
    return np.array([[float(v) for v in row] for row in rows])


def _parse_header_fields(line: str, magic: str, keys: list[str], path: str) -> dict[str, str]:
    if not line.startswith(magic):
        raise ValidationError(f"{path}: expected header starting with {magic!r}")
    fields: dict[str, str] = {}
    for token in line[len(magic):].split():
        if "=" not in token:
            raise ValidationError(f"{path}: malformed header token {token!r}")
        key, value = token.split("=", 1)
        fields[key] = value
    missing = [k for k in keys if k not in fields]
    if missing:
        raise ValidationError(f"{path}: header missing fields {missing}")
    return fields


def atoms_to_text(v: AtomicVarifold) -> str:
    lines = [f"{ATOMS_MAGIC} n={v.n} d={v.d} count={v.count}"]
    for i in range(v.count):
        pos = " ".join(format_float(x) for x in v.points[i])
        lines.append(f"{pos} | {_basis_text(v.bases[i])} | {format_float(v.masses[i])}")
    return "\n".join(lines) + "\n"


def write_atoms(path: str | Path, v: AtomicVarifold) -> None:
    write_text_atomic(path, atoms_to_text(v))


def read_atoms(path: str | Path) -> AtomicVarifold:
    path = str(path)
    with open(path, "r") as handle:
        lines = [line.rstrip("\n") for line in handle]
    if not lines:
        raise ValidationError(f"{path}: empty file")
    fields = _parse_header_fields(lines[0], ATOMS_MAGIC, ["n", "d", "count"], path)
    try:
        n, d, count = int(fields["n"]), int(fields["d"]), int(fields["count"])
    except ValueError as exc:
        raise ValidationError(f"{path}: non-integer header field") from exc
    body = [line for line in lines[1:] if line.strip()]
    if len(body) != count:
        raise ValidationError(f"{path}: header promises {count} atoms, found {len(body)}")
    points = np.empty((count, n))
    bases = np.empty((count, d, n))
    masses = np.empty(count)
    for i, line in enumerate(body):
        parts = line.split("|")
        if len(parts) != 3:
            raise ValidationError(f"{path}:{i + 2}: expected 'position | basis | mass'")
        pos = parts[0].split()
        if len(pos) != n:
            raise ValidationError(f"{path}:{i + 2}: expected {n} coordinates")
        points[i] = [float(v) for v in pos]
        bases[i] = _parse_basis(parts[1], d, n, f"{path}:{i + 2}")
        masses[i] = float(parts[2])
    return AtomicVarifold(n=n, d=d, points=points, bases=bases, masses=masses)


def grid_to_text(dv: DiscreteVarifold) -> str:
    grid = dv.grid
    origin = ",".join(format_float(o) for o in grid.origin)
    counts = ",".join(str(c) for c in grid.counts)
    lines = [
        f"{GRID_MAGIC} n={grid.n} d={dv.d} h={format_float(grid.h)} "
        f"origin={origin} counts={counts}"
    ]
    for i in range(dv.cell_count):
        idx = " ".join(str(int(v)) for v in dv.indices[i])
        lines.append(f"{idx} | {_basis_text(dv.bases[i])} | {format_float(dv.masses[i])}")
    return "\n".join(lines) + "\n"


def write_grid(path: str | Path, dv: DiscreteVarifold) -> None:
    write_text_atomic(path, grid_to_text(dv))


def read_grid(path: str | Path) -> DiscreteVarifold:
    path = str(path)
    with open(path, "r") as handle:
        lines = [line.rstrip("\n") for line in handle]
    if not lines:
        raise ValidationError(f"{path}: empty file")
    fields = _parse_header_fields(lines[0], GRID_MAGIC, ["n", "d", "h", "origin", "counts"], path)
    try:
        n, d = int(fields["n"]), int(fields["d"])
        h = float(fields["h"])
        origin = tuple(float(v) for v in fields["origin"].split(","))
        counts = tuple(int(v) for v in fields["counts"].split(","))
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed header field") from exc
    if len(origin) != n or len(counts) != n:
        raise ValidationError(f"{path}: origin/counts length does not match n={n}")
    grid = CartesianGrid(origin=origin, h=h, counts=counts)
    body = [line for line in lines[1:] if line.strip()]
    m = len(body)
    if m == 0:
        raise ValidationError(f"{path}: grid file has no cells")
    indices = np.empty((m, n), dtype=np.int64)
    bases = np.empty((m, d, n))
    masses = np.empty(m)
    for i, line in enumerate(body):
        parts = line.split("|")
        if len(parts) != 3:
            raise ValidationError(f"{path}:{i + 2}: expected 'index | basis | mass'")
        idx = parts[0].split()
        if len(idx) != n:
            raise ValidationError(f"{path}:{i + 2}: expected {n} cell indices")
        indices[i] = [int(v) for v in idx]
        bases[i] = _parse_basis(parts[1], d, n, f"{path}:{i + 2}")
        masses[i] = float(parts[2])
    return DiscreteVarifold(grid=grid, d=d, indices=indices, masses=masses, bases=bases)


def sniff(path: str | Path) -> str:
    """Return 'atoms' or 'grid' according to the file header."""
    with open(path, "r") as handle:
        head = handle.readline()
    if head.startswith(ATOMS_MAGIC):
        return "atoms"
    if head.startswith(GRID_MAGIC):
        return "grid"
    raise ValidationError(f"{path}: unrecognized header {head.strip()!r}")
