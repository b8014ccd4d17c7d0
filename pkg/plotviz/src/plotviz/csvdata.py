"""Reader for the benchmark CSV contract.

Files carry '#' key=value metadata lines, one header row, then data rows;
empty cells decode to None.  This package deliberately reads only these
files and never imports the benchmark library.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class DataError(ValueError):
    """Input CSV is missing, malformed, or lacks required columns."""


@dataclass
class Table:
    path: str
    meta: dict[str, str] = field(default_factory=dict)
    header: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)

    def column(self, name: str) -> list:
        try:
            idx = self.header.index(name)
        except ValueError:
            raise DataError(
                f"column '{name}' missing from {self.path}; "
                f"found: {', '.join(self.header) or '(no header)'}") from None
        return [row[idx] for row in self.rows]

    def require(self, *names: str) -> None:
        for name in names:
            self.column(name)

    def schedule(self) -> list[tuple[float, int, int]]:
        """Parse the schedule metadata line: 't:w:d;t:w:d;...'."""
        text = self.meta.get("schedule", "")
        out = []
        for part in filter(None, text.split(";")):
            try:
                t, w, d = part.split(":")
                out.append((float(t), int(w), int(d)))
            except ValueError:
                raise DataError(f"bad schedule entry {part!r} in {self.path}")
        return out


def _coerce(cell: str):
    if cell == "":
        return None
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_table(path: str) -> Table:
    table = Table(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        key, _, value = body.partition("=")
                        table.meta[key.strip()] = value.strip()
                    continue
                cells = line.split(",")
                if not table.header:
                    table.header = cells
                    continue
                if len(cells) != len(table.header):
                    raise DataError(
                        f"row with {len(cells)} cells does not match "
                        f"{len(table.header)}-column header in {path}")
                table.rows.append([_coerce(c) for c in cells])
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not table.header:
        raise DataError(f"{path} has no header row")
    if not table.rows:
        raise DataError(f"{path} has no data rows")
    return table
