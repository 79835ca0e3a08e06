import random

import pytest

from predicator.neat import NeatConfig, init_population
from predicator.report import emit_report, read_summary, write_bundle
from predicator.tuner import GenerationStats, OracleResult, TuneResult


def tune_result(fitness=1.05):
    g = init_population(NeatConfig(population_size=2), random.Random(0)).genomes[0]
    hist = [GenerationStats(0, 1.0, 0.9, 2, "10", 1.0), GenerationStats(1, fitness, 1.0, 3, "11", fitness)]
    return TuneResult(g, "11", fitness, hist, {"w": 120}, "10", "func @f() {\n}\n", 2)


def test_summary_line():
    files = emit_report(tune_result(1.05))
    assert files["summary.csv"].splitlines()[0] == "best_speedup,1.050000"


def test_bundle_contents():
    files = emit_report(tune_result())
    assert set(files) == {"genome.txt", "bitmask.txt", "converted.ir", "history.csv", "summary.csv"}
    assert files["bitmask.txt"] == "11\n"
    assert files["history.csv"].splitlines() == [
        "generation,best_fitness,mean_fitness,species_count,best_bitmask",
        "0,1.000000,0.900000,2,10",
        "1,1.050000,1.000000,3,11",
    ]


def test_tsv_same_values():
    csv_files, tsv_files = emit_report(tune_result(), "csv"), emit_report(tune_result(), "tsv")
    assert tsv_files["history.tsv"] == csv_files["history.csv"].replace(",", "\t")


def test_oracle_rows():
    o = OracleResult("01", 1.2, [("00", 1.0), ("01", 1.2), ("10", 0.9), ("11", 1.1)], 2, "11")
    rows = emit_report(o)["oracle.csv"].splitlines()
    assert rows[0] == "bitmask,speedup" and len(rows) == 5
    assert rows[2] == "01,1.200000"


def test_oracle_without_table():
    o = OracleResult("1" * 14, 1.3, None, 14, "0" * 14)
    assert emit_report(o)["oracle.csv"].splitlines()[1:] == ["1" * 14 + ",1.300000"]


def test_write_and_read(tmp_path):
    write_bundle(tune_result(), tmp_path / "b", "tsv")
    assert read_summary(tmp_path / "b")[0] == ("best_speedup", "1.050000")


def test_unknown_format():
    with pytest.raises(ValueError):
        emit_report(tune_result(), "xml")


def test_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="cannot write"):
        write_bundle(tune_result(), blocker / "sub")
