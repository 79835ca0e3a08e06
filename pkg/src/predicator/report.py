"""Result bundles: the best network, its bitmask, the converted program and
the search history, as plain text plus CSV/TSV tables."""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .features import fmt6
from .tuner import OracleResult, TuneResult

FORMATS = {"csv": ",", "tsv": "\t"}
HISTORY_COLUMNS = ("generation", "best_fitness", "mean_fitness", "species_count", "best_bitmask")


def _table(rows, delimiter: str) -> str:
    buf = io.StringIO()
    csv.writer(buf, delimiter=delimiter, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _delimiter(fmt: str) -> str:
    try:
        return FORMATS[fmt]
    except KeyError:
        raise ValueError(f"unknown report format {fmt!r}; use csv or tsv") from None


def history_table(r: TuneResult, fmt: str = "csv") -> str:
    rows = [HISTORY_COLUMNS]
    rows += [(h.generation, fmt6(h.best_fitness), fmt6(h.mean_fitness), h.species_count,
              h.best_bitmask) for h in r.history]
    return _table(rows, _delimiter(fmt))


def oracle_table(r: OracleResult, fmt: str = "csv") -> str:
    rows = [("bitmask", "speedup")]
    entries = r.table if r.table is not None else [(r.optimal_bitmask, r.optimal_speedup)]
    rows += [(b, fmt6(s)) for b, s in entries]
    return _table(rows, _delimiter(fmt))


def summary_table(r: TuneResult | OracleResult, fmt: str = "csv") -> str:
    if isinstance(r, TuneResult):
        rows = [("best_speedup", fmt6(r.best_fitness)),
                ("best_bitmask", r.best_bitmask),
                ("baseline_bitmask", r.baseline_bitmask),
                ("candidates", r.candidates),
                ("generations", len(r.history))]
        rows += [(f"baseline_cycles.{name}", c) for name, c in r.baseline_cycles.items()]
        rows += [("note", n) for n in r.notes]
    else:
        rows = [("best_speedup", fmt6(r.optimal_speedup)),
                ("best_bitmask", r.optimal_bitmask),
                ("baseline_bitmask", r.baseline_bitmask),
                ("candidates", r.candidates)]
    return _table(rows, _delimiter(fmt))


def emit_report(r: TuneResult | OracleResult, fmt: str = "csv") -> dict[str, str]:
    """File name -> contents for every artifact of ``r``."""
    _delimiter(fmt)
    ext = fmt
    if isinstance(r, TuneResult):
        return {
            "genome.txt": r.best_genome.to_text(),
            "bitmask.txt": r.best_bitmask + "\n",
            "converted.ir": r.converted_text,
            f"history.{ext}": history_table(r, fmt),
            f"summary.{ext}": summary_table(r, fmt),
        }
    return {f"oracle.{ext}": oracle_table(r, fmt), f"summary.{ext}": summary_table(r, fmt)}


def write_bundle(r: TuneResult | OracleResult, out: str | Path, fmt: str = "csv") -> list[Path]:
    files = emit_report(r, fmt)
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in files.items():
            p = out / name
            with open(p, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            written.append(p)
    except OSError as e:
        raise OSError(f"cannot write report to {out}: {e.strerror or e}") from e
    return written


def read_summary(bundle: str | Path) -> list[tuple[str, str]]:
    """Key/value rows from a bundle's summary file, whichever format it uses."""
    bundle = Path(bundle)
    for fmt, delim in FORMATS.items():
        p = bundle / f"summary.{fmt}"
        if p.exists():
            rows = csv.reader(io.StringIO(p.read_text(encoding="utf-8")), delimiter=delim)
            return [(row[0], row[1]) for row in rows if row]
    raise FileNotFoundError(f"{bundle}: no summary.csv or summary.tsv found")
