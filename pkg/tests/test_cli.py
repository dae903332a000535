import csv
import io
import subprocess
import sys

import pytest

from cfrpsro import bench, cli
from cfrpsro.games import GameSpec


def run(capsys, *argv):
  code = cli.main(list(argv))
  out, err = capsys.readouterr()
  return code, out, err


def parse(text):
  lines = text.splitlines()
  assert lines[0].startswith("# ")
  meta = dict(kv.split("=", 1) for kv in lines[0][2:].split())
  rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
  return meta, rows


def test_cfr_trace_shape_and_threshold(capsys):
  code, out, _ = run(capsys, "cfr", "--game", "kuhn", "--players", "2",
                     "--variant", "cfr_plus", "--iterations", "1000",
                     "--eval-every", "10")
  assert code == 0
  meta, rows = parse(out)
  assert len(rows) == 100
  assert list(rows[0]) == list(bench.CFR_COLUMNS)
  its = [int(r["iteration"]) for r in rows]
  assert its == list(range(10, 1001, 10))
  values = [float(r["exploitability"]) for r in rows]
  assert min(values) >= 0
  assert values[-1] <= 1e-3
  assert meta["variant"] == "cfr_plus" and meta["update_mode"] == "alternating"
  assert meta["backend"] in ("cython", "python")


def test_eval_every_equal_to_horizon_gives_one_row(capsys):
  _, out, _ = run(capsys, "cfr", "--variant", "cfr", "--iterations", "1000",
                  "--eval-every", "1000")
  assert [r["iteration"] for r in parse(out)[1]] == ["1000"]


def test_final_row_is_always_recorded(capsys):
  _, out, _ = run(capsys, "cfr", "--iterations", "25", "--eval-every", "10")
  assert [r["iteration"] for r in parse(out)[1]] == ["10", "20", "25"]


@pytest.mark.parametrize("argv, needle", [
    (["cfr", "--variant", "hs_pcfr_plus"], "hs_pcfr_plus"),
    (["cfr", "--eval-every", "0"], "eval_every"),
    (["cfr", "--game", "kuhn", "--players", "1"], "player"),
    (["psro", "--players", "3", "--train-mss", "nash_lp", "--eval-mss",
      "uniform", "--epochs", "2"], "two-player"),
    (["psro", "--players", "3", "--train-mss", "uniform", "--eval-mss",
      "nash_lp", "--epochs", "2"], "two-player"),
    (["psro", "--train-mss", "alpharank"], "AlphaRank"),
    (["psro", "--eval-mss", "shor"], "shor"),
    (["psro", "--epochs", "0"], "epochs"),
])
def test_rejections(capsys, argv, needle):
  code, out, err = run(capsys, *argv)
  assert code == cli.EXIT_CONFIG
  assert out == ""
  assert needle in err


def test_psro_uniform_population_column(capsys):
  _, out, _ = run(capsys, "psro", "--train-mss", "uniform", "--eval-mss",
                  "uniform", "--epochs", "5")
  meta, rows = parse(out)
  assert list(rows[0]) == list(bench.PSRO_COLUMNS)
  assert [int(r["population_size"]) for r in rows] == [
      1 + e for e in range(1, 6)]
  assert [int(r["epoch"]) for r in rows] == [1, 2, 3, 4, 5]
  assert all(float(r["eval_exploitability"]) >= 0 for r in rows)
  assert (meta["train_mss"], meta["eval_mss"]) == ("uniform", "uniform")


def test_psro_eval_every_keeps_last_epoch(capsys):
  _, out, _ = run(capsys, "psro", "--train-mss", "uniform", "--eval-mss",
                  "uniform", "--epochs", "7", "--eval-every", "3")
  assert [r["epoch"] for r in parse(out)[1]] == ["3", "6", "7"]


def test_config_file_and_flag_precedence(tmp_path, capsys):
  cfg = tmp_path / "run.cfg"
  cfg.write_text("# comment\niterations = 40\neval-every = 20\n"
                 "variant = dcfr\ndcfr.gamma = 3\n")
  _, out, _ = run(capsys, "cfr", "--config", str(cfg))
  meta, rows = parse(out)
  assert meta["variant"] == "dcfr"
  assert [r["iteration"] for r in rows] == ["20", "40"]
  _, out, _ = run(capsys, "cfr", "--config", str(cfg), "--iterations", "60")
  assert parse(out)[1][-1]["iteration"] == "60"


def test_config_params_change_the_run(tmp_path, capsys):
  cfg = tmp_path / "run.cfg"
  cfg.write_text("dcfr.gamma = 3\n")
  base = ["cfr", "--variant", "dcfr", "--iterations", "30",
          "--eval-every", "30"]
  _, a, _ = run(capsys, *base)
  _, b, _ = run(capsys, *base, "--config", str(cfg))
  assert parse(a)[1][0]["exploitability"] != parse(b)[1][0]["exploitability"]


@pytest.mark.parametrize("text, needle", [
    ("vad.nonsense = 1\n", "nonsense"),
    ("bogus.x = 1\n", "bogus"),
    ("color = red\n", "color"),
    ("no equals sign\n", "key = value"),
    ("iterations = many\n", "integer"),
    ("aod.ema_alpha = 0\n", "invalid configuration"),
])
def test_bad_config(tmp_path, capsys, text, needle):
  cfg = tmp_path / "bad.cfg"
  cfg.write_text(text)
  code, _, err = run(capsys, "cfr", "--variant", "aod_cfr", "--config",
                     str(cfg))
  assert code == cli.EXIT_CONFIG
  assert needle in err


def test_missing_config(capsys, tmp_path):
  code, _, err = run(capsys, "cfr", "--config", str(tmp_path / "nope.cfg"))
  assert code == cli.EXIT_CONFIG and "cannot read" in err


def test_fitness_single_game(capsys):
  code, out, _ = run(capsys, "fitness", "--game", "kuhn", "--variant",
                     "cfr_plus", "--iterations", "200")
  assert code == 0
  lines = out.strip().splitlines()
  game_line = [l for l in lines if l.startswith("kuhn(2)")]
  value = float(game_line[0].split("\t")[1])
  assert lines[-1] == f"fitness\t{-value:.12g}"
  assert -value <= 0


def test_fitness_function():
  result = bench.fitness([GameSpec("kuhn", 2), GameSpec("kuhn", 3)], "cfr",
                         iterations=50)
  assert result.fitness <= 0
  assert result.fitness == pytest.approx(
      -sum(result.components.values()) / 2, abs=1e-15)


def test_suites():
  assert [s.name for s in bench.SUITES["train"]] == [
      "kuhn(3)", "leduc(2)", "goofspiel(4)", "liars_dice(5)"]
  assert [s.name for s in bench.SUITES["test"]] == [
      "kuhn(4)", "leduc(3)", "goofspiel(5)", "liars_dice(6)"]


def test_output_file(tmp_path, capsys):
  path = tmp_path / "trace.csv"
  code, out, _ = run(capsys, "cfr", "--iterations", "20", "--out", str(path))
  assert code == 0 and out == ""
  assert len(parse(path.read_text())[1]) == 2


def _strip_elapsed(text):
  meta, rows = parse(text)
  return meta, [{k: v for k, v in r.items() if k != "elapsed_ms"}
                for r in rows]


@pytest.mark.parametrize("argv", [
    ["cfr", "--variant", "vad_cfr", "--iterations", "120"],
    ["psro", "--train-mss", "shor", "--eval-mss", "shor_eval", "--epochs",
     "6"],
])
def test_csv_determinism(capsys, argv):
  _, a, _ = run(capsys, *argv)
  _, b, _ = run(capsys, *argv)
  assert _strip_elapsed(a) == _strip_elapsed(b)


def test_module_entry_point():
  out = subprocess.run(
      [sys.executable, "-m", "cfrpsro", "cfr", "--iterations", "10"],
      capture_output=True, text=True, check=True).stdout
  assert len(parse(out)[1]) == 1


def test_format_value():
  assert bench.format_value(1 / 3) == "0.333333333333"
  assert bench.format_value(1.23456789e-9) == "1.23456789e-09"
  assert bench.format_value(7) == "7"


@pytest.mark.slow
def test_vad_fitness_beats_vanilla_on_train_suite():
  suite = bench.SUITES["train"]
  vad = bench.fitness(suite, "vad_cfr")
  vanilla = bench.fitness(suite, "cfr")
  assert vanilla.fitness <= vad.fitness <= 0
