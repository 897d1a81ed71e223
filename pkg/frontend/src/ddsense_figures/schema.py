"""CSV schemas of the simulator's artifacts and their validation.

The column sets are closed: a missing or unknown column is a
``SchemaError`` naming the offending column, so silently mismatched
inputs never reach a renderer.
"""

import csv


class SchemaError(Exception):
    """Input CSV does not match the expected artifact schema."""


CUTS_COLUMNS = ("waveform", "axis_kind", "normalized_value", "magnitude_db")
RDMAP_COLUMNS = ("delay_bin", "doppler_bin", "power_db")
PD_COLUMNS = ("waveform", "snr_db", "trials", "hits", "pd",
              "pd_wilson_lo", "pd_wilson_hi")
MSE_COLUMNS = ("waveform", "snr_db", "trials", "mse_delay_bins2",
               "mse_doppler_bins2", "mse_delay_s2", "mse_doppler_hz2")

SCHEMAS = {
    "cuts": CUTS_COLUMNS,
    "rdmap": RDMAP_COLUMNS,
    "pd": PD_COLUMNS,
    "mse": MSE_COLUMNS,
}


def read_rows(path: str, schema: str) -> list[dict]:
    """Rows of a schema-validated CSV, values kept as the exact strings
    written by the producer (conversion happens at plot-model build)."""
    expected = SCHEMAS[schema]
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file, expected header "
                                  f"{','.join(expected)}") from None
            for col in expected:
                if col not in header:
                    raise SchemaError(f"{path}: missing column {col!r}")
            for col in header:
                if col not in expected:
                    raise SchemaError(f"{path}: unknown column {col!r}")
            if len(header) != len(expected):
                raise SchemaError(f"{path}: duplicated column in header")
            index = [header.index(col) for col in expected]
            rows = []
            for line, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise SchemaError(f"{path}:{line}: expected "
                                      f"{len(header)} fields, got {len(row)}")
                rows.append({col: row[i] for col, i in zip(expected, index)})
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows
