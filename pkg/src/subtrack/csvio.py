"""CSV emission and ingestion for the experiment harness.

All files are UTF-8, comma-separated, with a mandatory header row.  Floats
are serialized with 17 significant digits so every value round-trips
bit-exactly; complex quantities appear as ``_re``/``_im`` column pairs.
"""

import csv
import hashlib
from pathlib import Path

import numpy as np

from .channel_sim import ChannelTrajectory
from .errors import ConfigError, InvalidInputError


def format_value(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows) -> None:
    """Write rows (iterables matching ``header``) with deterministic formatting."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def read_csv(path):
    """Read back an emitted CSV: returns (header, rows) with numeric parsing.

    Every cell is returned as int when it parses as one, else float, else the
    raw string; with 17-significant-digit emission this reproduces the
    written values exactly.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidInputError(f"read_csv: {path} is empty") from None
        rows = []
        for raw in reader:
            row = []
            for cell in raw:
                try:
                    row.append(int(cell))
                except ValueError:
                    try:
                        row.append(float(cell))
                    except ValueError:
                        row.append(cell)
            rows.append(row)
    return header, rows


def file_digest(path) -> str:
    hasher = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


def load_cir_csv(path, t_tap: float = 1.0, t_snapshot: float = 1.0) -> ChannelTrajectory:
    """Load a recorded tap trajectory from columns (n, k, h_re, h_im).

    Step and tap indices must form a complete 0-based (or 1-based) grid.
    """
    header, rows = read_csv(path)
    expected = ["n", "k", "h_re", "h_im"]
    if [h.strip() for h in header] != expected:
        raise ConfigError(f"load_cir_csv: header must be {expected}, got {header}")
    if not rows:
        raise ConfigError("load_cir_csv: no data rows")
    data = np.asarray(rows, dtype=np.float64)
    n_idx = data[:, 0].astype(int)
    k_idx = data[:, 1].astype(int)
    base_n, base_k = n_idx.min(), k_idx.min()
    n_idx -= base_n
    k_idx -= base_k
    n_steps, n_taps = n_idx.max() + 1, k_idx.max() + 1
    if len(rows) != n_steps * n_taps:
        raise ConfigError(
            f"load_cir_csv: expected {n_steps * n_taps} rows for a complete "
            f"{n_steps} x {n_taps} grid, got {len(rows)}")
    h = np.full((n_steps, n_taps), np.nan + 0j, dtype=np.complex128)
    h[n_idx, k_idx] = data[:, 2] + 1j * data[:, 3]
    if np.isnan(h.real).any():
        raise ConfigError("load_cir_csv: grid has missing (n, k) entries")
    return ChannelTrajectory(h=h, t_tap=t_tap, t_snapshot=t_snapshot)
