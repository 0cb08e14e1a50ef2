"""CSV writers with JSON mirrors.

Floats are written with ``repr`` so every value round-trips exactly and
repeated runs produce byte-identical files.
"""

import csv
import json
from pathlib import Path


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_table(out_dir, name: str, columns: dict, comment: str = None) -> Path:
    """Write ``name.csv`` and ``name.json`` from equal-length columns."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    keys = list(columns)
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for row in zip(*(columns[k] for k in keys)):
            w.writerow([_cell(v) for v in row])
    write_json(out_dir, name, columns)
    return path


def write_json(out_dir, name: str, payload) -> Path:
    path = Path(out_dir) / f"{name}.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    return path


def signal_columns(signal) -> dict:
    x = signal.samples
    return {
        "index": list(range(x.size)),
        "re": [float(v) for v in x.real],
        "im": [float(v) for v in x.imag],
        "abs": [float(v) for v in abs(x)],
    }


def symbol_columns(symbols) -> dict:
    n_car, n_bits = symbols.shape
    cols = {"carrier": [], "bit": [], "re": [], "im": []}
    for m in range(n_bits):
        for n in range(n_car):
            v = symbols.codes[n, m]
            cols["carrier"].append(n)
            cols["bit"].append(m)
            cols["re"].append(float(v.real))
            cols["im"].append(float(v.imag))
    return cols


def ambiguity_columns(grid) -> dict:
    cols = {"delay": [], "doppler": [], "magnitude": []}
    for i, tau in enumerate(grid.delays):
        for j, nu in enumerate(grid.dopplers):
            cols["delay"].append(int(tau))
            cols["doppler"].append(float(nu))
            cols["magnitude"].append(float(grid.magnitudes[i, j]))
    return cols
