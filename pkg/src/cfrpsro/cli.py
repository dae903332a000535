"""Command-line runner: `cfrpsro {cfr,psro,fitness} ...`.

Settings come from flags and optionally from a flat `key = value` config
file (`--config`), with flags taking precedence. Besides the flag names
(dashes or underscores), the file accepts solver parameters under a
namespace prefix, e.g. `vad.base_alpha = 1.4`, `aod.ema_alpha = 0.2`,
`dcfr.gamma = 3`, `shor_train.momentum = 0.4`, `shor_eval.blend = 0`,
`rm.iterations = 5000` or `prd.step = 0.01`.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import Sequence

from cfrpsro import bench, kernels, meta_solvers
from cfrpsro.cfr import VARIANTS, UnknownVariantError, make_components
from cfrpsro.evolved import AodParams, VadParams
from cfrpsro.games import GameError, GameSpec, new_game

EXIT_CONFIG = 2

_FIELDS = {
    "vad": {f.name for f in dataclasses.fields(VadParams)},
    "aod": {f.name for f in dataclasses.fields(AodParams)},
    "dcfr": {"alpha", "beta", "gamma"},
    "shor_train": {f.name for f in dataclasses.fields(meta_solvers.ShorTrainParams)},
    "shor_eval": {f.name for f in dataclasses.fields(meta_solvers.ShorEvalParams)},
    "rm": {"iterations"},
    "prd": {"iterations", "step", "floor"},
}
_VARIANT_NS = {"vad_cfr": "vad", "aod_cfr": "aod", "dcfr": "dcfr"}
_SOLVER_NS = {"shor": "shor_train", "shor_eval": "shor_eval", "rm": "rm",
              "prd": "prd"}

DEFAULTS = {
    "game": "kuhn", "players": 2, "cards": 4, "dice_sides": 5,
    "variant": "cfr_plus", "train_mss": "shor", "eval_mss": "shor_eval",
    "iterations": 1000, "epochs": 100, "seed": 0, "out": None,
    "update_mode": None, "suite": None,
}
_INT_KEYS = {"players", "cards", "dice_sides", "iterations", "epochs",
             "eval_every", "seed"}


class ConfigError(ValueError):
  pass


def parse_value(text: str):
  low = text.lower()
  if low in ("true", "false"):
    return low == "true"
  for cast in (int, float):
    try:
      return cast(text)
    except ValueError:
      pass
  return text


def load_config(path: str) -> tuple[dict, dict]:
  """Reads a config file into (plain settings, {namespace: params})."""
  settings, params = {}, {}
  try:
    with open(path) as f:
      lines = f.readlines()
  except OSError as e:
    raise ConfigError(f"cannot read config {path!r}: {e.strerror}") from None
  for num, raw in enumerate(lines, 1):
    line = raw.split("#", 1)[0].strip()
    if not line:
      continue
    if "=" not in line:
      raise ConfigError(f"{path}:{num}: expected 'key = value'")
    key, value = (s.strip() for s in line.split("=", 1))
    key = key.replace("-", "_")
    if "." in key:
      ns, name = key.split(".", 1)
      if ns not in _FIELDS:
        raise ConfigError(f"{path}:{num}: unknown parameter namespace {ns!r}")
      if name not in _FIELDS[ns]:
        raise ConfigError(f"{path}:{num}: {ns} has no parameter {name!r}")
      params.setdefault(ns, {})[name] = parse_value(value)
    elif key in DEFAULTS or key == "eval_every":
      settings[key] = parse_value(value)
    else:
      raise ConfigError(f"{path}:{num}: unknown setting {key!r}")
  return settings, params


def _add_game_flags(p):
  p.add_argument("--game", choices=["kuhn", "leduc", "goofspiel", "liars_dice"])
  p.add_argument("--players", type=int)
  p.add_argument("--cards", type=int, help="goofspiel hand size")
  p.add_argument("--dice-sides", type=int)
  p.add_argument("--seed", type=int, help="recorded in the output metadata")
  p.add_argument("--out", help="output CSV path (default: stdout)")
  p.add_argument("--config", help="flat key = value settings file")


def build_parser() -> argparse.ArgumentParser:
  parser = argparse.ArgumentParser(
      prog="cfrpsro",
      description="Exact-exploitability CFR and PSRO experiments.")
  sub = parser.add_subparsers(dest="mode", required=True)

  c = sub.add_parser("cfr", help="CFR convergence trace")
  _add_game_flags(c)
  c.add_argument("--variant", help=f"one of {', '.join(VARIANTS)}")
  c.add_argument("--iterations", type=int)
  c.add_argument("--eval-every", type=int, help="default 10")
  c.add_argument("--update-mode", choices=["simultaneous", "alternating"])

  s = sub.add_parser("psro", help="PSRO convergence trace")
  _add_game_flags(s)
  s.add_argument("--train-mss",
                 help=f"one of {', '.join(meta_solvers.TRAIN_SOLVERS)}")
  s.add_argument("--eval-mss",
                 help=f"one of {', '.join(meta_solvers.EVAL_SOLVERS)}")
  s.add_argument("--epochs", type=int)
  s.add_argument("--eval-every", type=int, help="default 1")

  fz = sub.add_parser("fitness", help="negative mean final exploitability")
  _add_game_flags(fz)
  fz.add_argument("--variant")
  fz.add_argument("--iterations", type=int)
  fz.add_argument("--suite", choices=sorted(bench.SUITES),
                  help="built-in game set (default: the single --game)")
  fz.add_argument("--update-mode", choices=["simultaneous", "alternating"])
  return parser


def resolve(args: argparse.Namespace) -> tuple[dict, dict]:
  settings = dict(DEFAULTS)
  settings["eval_every"] = 10 if args.mode == "cfr" else 1
  params = {}
  if args.config:
    file_settings, params = load_config(args.config)
    settings.update(file_settings)
  for key, value in vars(args).items():
    if value is not None and key not in ("mode", "config"):
      settings[key] = value
  for key in _INT_KEYS:
    if not isinstance(settings[key], int) or isinstance(settings[key], bool):
      raise ConfigError(f"{key} must be an integer, got {settings[key]!r}")
  return settings, params


def _game_spec(settings) -> GameSpec:
  return GameSpec(settings["game"], settings["players"], settings["cards"],
                  settings["dice_sides"])


def _emit(settings, columns, rows, metadata):
  if settings["out"]:
    with open(settings["out"], "w") as f:
      bench.write_csv(f, columns, rows, metadata)
  else:
    bench.write_csv(sys.stdout, columns, rows, metadata)


def _run_cfr(settings, params):
  spec = _game_spec(settings)
  game = new_game(spec)
  variant = settings["variant"]
  vparams = params.get(_VARIANT_NS.get(variant, ""), {})
  mode = make_components(variant, vparams, settings["update_mode"]).update_mode
  rows = bench.cfr_trace(game, variant, settings["iterations"],
                         settings["eval_every"], update_mode=mode.value,
                         params=vparams)
  _emit(settings, bench.CFR_COLUMNS, rows, {
      "mode": "cfr", "game": game.name, "variant": variant,
      "update_mode": mode.value, "seed": settings["seed"],
      "backend": kernels.BACKEND})


def _run_psro(settings, params):
  game = new_game(_game_spec(settings))
  train, eval_ = settings["train_mss"], settings["eval_mss"]
  # Build both first so name errors surface before any work.
  meta_solvers.make_solver(train, params.get(_SOLVER_NS.get(train, ""), {}))
  meta_solvers.make_solver(eval_, params.get(_SOLVER_NS.get(eval_, ""), {}),
                           role="eval")
  if settings["epochs"] < 1:
    raise ConfigError(f"epochs must be >= 1, got {settings['epochs']}")
  rows = bench.psro_trace(
      game, train, eval_, settings["epochs"], settings["eval_every"],
      train_params=params.get(_SOLVER_NS.get(train, ""), {}),
      eval_params=params.get(_SOLVER_NS.get(eval_, ""), {}))
  _emit(settings, bench.PSRO_COLUMNS, rows, {
      "mode": "psro", "game": game.name, "train_mss": train,
      "eval_mss": eval_, "seed": settings["seed"], "backend": kernels.BACKEND})


def _run_fitness(settings, params):
  if settings["suite"]:
    specs = bench.SUITES[settings["suite"]]
  else:
    specs = (_game_spec(settings),)
    specs[0].validate()
  variant = settings["variant"]
  vparams = params.get(_VARIANT_NS.get(variant, ""), {})
  make_components(variant, vparams, settings["update_mode"])
  result = bench.fitness(specs, variant, settings["iterations"],
                         update_mode=settings["update_mode"], params=vparams,
                         log=sys.stderr if settings["out"] else sys.stdout)
  if settings["out"]:
    _emit(settings, ("game", "exploitability"),
          list(result.components.items()),
          {"mode": "fitness", "variant": variant,
           "fitness": bench.format_value(result.fitness),
           "seed": settings["seed"], "backend": kernels.BACKEND})
  print(f"fitness\t{result.fitness:.12g}")


def main(argv: Sequence[str] | None = None) -> int:
  args = build_parser().parse_args(argv)
  try:
    settings, params = resolve(args)
    if settings["eval_every"] < 1:
      raise ConfigError(f"eval_every must be >= 1, got {settings['eval_every']}")
    if settings.get("iterations", 1) < 1:
      raise ConfigError(f"iterations must be >= 1, got {settings['iterations']}")
    {"cfr": _run_cfr, "psro": _run_psro,
     "fitness": _run_fitness}[args.mode](settings, params)
  except (ConfigError, GameError, UnknownVariantError,
          meta_solvers.MetaSolverError) as e:
    print(f"cfrpsro {args.mode}: error: {e}", file=sys.stderr)
    return EXIT_CONFIG
  except (TypeError, ValueError) as e:
    # Raised by parameter dataclasses on out-of-range or mistyped values.
    print(f"cfrpsro {args.mode}: invalid configuration: {e}", file=sys.stderr)
    return EXIT_CONFIG
  return 0


if __name__ == "__main__":
  sys.exit(main())
