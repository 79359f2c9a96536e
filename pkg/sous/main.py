from typing import *
import argparse
import os

import sous.config as config
import sous.log as log
from sous.errors import SousError
from sous.episode import run_episode
from sous.format_trace import load_trace, save_trace
from sous.judge import CachedJudge, HttpJudge, Judge
from sous.kitchen import Kitchen, load_kitchen
from sous.loading import show_progress
from sous.methods import MethodConfig, bundled_methods, load_method
from sous.metrics import COLUMNS, compute_metrics
from sous.repl import Session
from sous.suite import (
  audit_bank, format_sweep, format_table, run_suite, suite_experiments, sweep, write_outputs,
)


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED_EPISODES = 2

DEFAULT_METHOD = 'known-goals-bank-ask'
DEFAULT_SWEEP = [0.5, 1.0, 2.0, 4.0, 8.0]


def build_parser() -> argparse.ArgumentParser:
  common = argparse.ArgumentParser(add_help=False)
  common.add_argument('--seed', type=int, default=None, help='experiment and sampling seed')
  common.add_argument('--judge-endpoint', default=None, help='relevance judge URL (default: keyword judge)')
  common.add_argument('--horizon', type=int, default=None, help='override the method planning horizon')
  common.add_argument('--topk', type=int, default=None, help='override the method branching cap')
  common.add_argument('--verbose', action='store_true', help='print debug messages')
  common.add_argument('--domain', default=None, help='domain file (default: bundled kitchen)')
  common.add_argument('--bank', dest='bank_path', default=None, help='goal bank file (default: bundled recipes)')

  parser = argparse.ArgumentParser(
    prog='sous',
    description='Goal inference and receding-horizon planning for a shared kitchen.',
  )
  parser.add_argument('--version', action='version', version='sous ' + config.version_str('.'))
  sub = parser.add_subparsers(dest='command', required=True)

  run = sub.add_parser('run', parents=[common], help='run the experiment suite')
  run.add_argument('--method', action='append', default=None,
    help=f'method name or JSON path, repeatable (default: {DEFAULT_METHOD})')
  run.add_argument('--out', default=None, help='output directory for CSV and JSON results')
  run.add_argument('--parallel', type=int, default=1, help='episodes run at once')
  run.add_argument('--limit', type=int, default=None, help='run only the first N experiments')
  run.add_argument('--profile', action='store_true', help='print robot turn phase timings')

  episode = sub.add_parser('episode', parents=[common], help='run a single experiment')
  episode.add_argument('--method', default=DEFAULT_METHOD)
  episode.add_argument('--index', type=int, default=0, help='experiment index in the generated suite')
  episode.add_argument('--out', default=None, help='trace JSON path')

  repl = sub.add_parser('repl', parents=[common], help='play the human yourself')
  repl.add_argument('--method', default=DEFAULT_METHOD)
  repl.add_argument('--goal', default=None, help='goal id of the dish you will make')
  repl.add_argument('--prefs', default=None, help='comma separated stated preferences')
  repl.add_argument('--out', default=None, help='trace JSON path')

  bank = sub.add_parser('bank', help='goal bank tools')
  bank_sub = bank.add_subparsers(dest='bank_command', required=True)
  bank_sub.add_parser('check', parents=[common], help='audit the domain and goal bank')

  sweep_cmd = sub.add_parser('sweep', parents=[common], help='rerun the suite across interruption costs')
  sweep_cmd.add_argument('--method', default=DEFAULT_METHOD)
  sweep_cmd.add_argument('--c-max', type=float, nargs='+', default=DEFAULT_SWEEP)
  sweep_cmd.add_argument('--parallel', type=int, default=1)
  sweep_cmd.add_argument('--limit', type=int, default=None)
  sweep_cmd.add_argument('--out', default=None, help='output directory for per-cost results')

  metrics = sub.add_parser('metrics', parents=[common], help='recompute the metrics row of a saved trace')
  metrics.add_argument('trace', help='trace JSON path')

  sub.add_parser('methods', help='list the bundled methods')
  return parser


def make_judge(endpoint: Optional[str]) -> Optional[Judge]:
  """The HTTP judge behind the on-disk cache, or None for the keyword judge."""
  url = config.judge_endpoint(endpoint)
  if url is None:
    return None
  log.info('Using judge at', url)
  return CachedJudge(HttpJudge(url, config.judge_timeout()), config.cache_file)


def open_kitchen(args: argparse.Namespace, seed: int) -> Kitchen:
  kitchen = show_progress(load_kitchen(
    make_judge(args.judge_endpoint),
    seed=seed,
    domain_path=args.domain,
    bank_path=args.bank_path,
  ))
  log.timer.get_num_requests = lambda: kitchen.judge.requests
  return kitchen


def method(args: argparse.Namespace, name: str) -> MethodConfig:
  return load_method(name).with_overrides(horizon=args.horizon, top_k=args.topk)


def save_judge_cache(kitchen: Kitchen) -> None:
  if isinstance(kitchen.judge, CachedJudge):
    kitchen.judge.save()


def cmd_run(args: argparse.Namespace, seed: int) -> int:
  kitchen = open_kitchen(args, seed)
  methods = [method(args, name) for name in (args.method or [DEFAULT_METHOD])]
  experiments = suite_experiments(kitchen, seed, args.limit)
  out = args.out or config.output_directory
  results = []
  log.timer.reset()
  try:
    for cfg in methods:
      result = show_progress(run_suite(experiments, cfg, kitchen, seed, args.parallel))
      for path in write_outputs(result, out):
        log.info('Wrote', path)
      results.append(result)
  finally:
    save_judge_cache(kitchen)
  for line in format_table(results):
    print(line)
  if args.profile:
    print()
    for line in log.timer.format(log.timer.get_summaries()):
      print(line)
  return EXIT_FAILED_EPISODES if any(r.failures() for r in results) else EXIT_OK


def cmd_episode(args: argparse.Namespace, seed: int) -> int:
  kitchen = open_kitchen(args, seed)
  cfg = method(args, args.method)
  experiments = suite_experiments(kitchen, seed)
  if not 0 <= args.index < len(experiments):
    raise SousError(f'Experiment index must be in [0, {len(experiments)})')
  exp = experiments[args.index]
  try:
    trace = run_episode(exp, cfg, kitchen)
  finally:
    save_judge_cache(kitchen)
  path = args.out or os.path.join(config.output_directory, f'{cfg.name}-{exp.id}.json')
  save_trace(trace, path)
  log.info('Saved trace to', path)
  _print_row(compute_metrics(trace).row())
  return EXIT_OK if trace.failure is None else EXIT_FAILED_EPISODES


def cmd_repl(args: argparse.Namespace, seed: int) -> int:
  kitchen = open_kitchen(args, seed)
  cfg = method(args, args.method)
  prefs = None if args.prefs is None else [p.strip() for p in args.prefs.split(',') if p.strip()]
  path = args.out or os.path.join(config.output_directory, 'repl.json')
  try:
    trace = Session(kitchen, cfg).run(args.goal, prefs, seed, path)
  finally:
    save_judge_cache(kitchen)
  return EXIT_OK if trace.completed else EXIT_FAILED_EPISODES


def cmd_bank_check(args: argparse.Namespace, seed: int) -> int:
  kitchen = open_kitchen(args, seed)
  audit = audit_bank(kitchen, seed)
  for line in audit.lines:
    print(line)
  for problem in audit.problems:
    log.error(problem)
  return EXIT_OK if audit.ok else EXIT_FAILED_EPISODES


def cmd_sweep(args: argparse.Namespace, seed: int) -> int:
  kitchen = open_kitchen(args, seed)
  cfg = method(args, args.method)
  experiments = suite_experiments(kitchen, seed, args.limit)
  try:
    results = show_progress(sweep(experiments, cfg, kitchen, args.c_max, seed, args.parallel))
  finally:
    save_judge_cache(kitchen)
  if args.out is not None:
    for c_max, result in results:
      write_outputs(result, os.path.join(args.out, f'c_max-{c_max:g}'))
  for line in format_sweep(results):
    print(line)
  return EXIT_FAILED_EPISODES if any(r.failures() for _, r in results) else EXIT_OK


def cmd_metrics(args: argparse.Namespace, seed: int) -> int:
  _print_row(compute_metrics(load_trace(args.trace)).row())
  return EXIT_OK


def cmd_methods(args: argparse.Namespace, seed: int) -> int:
  for name in bundled_methods():
    print(name)
  return EXIT_OK


def _print_row(row: Dict[str, str]) -> None:
  print(','.join(COLUMNS))
  print(','.join(row[c] for c in COLUMNS))


COMMANDS: Dict[str, Callable[[argparse.Namespace, int], int]] = {
  'run': cmd_run,
  'episode': cmd_episode,
  'repl': cmd_repl,
  'bank': cmd_bank_check,
  'sweep': cmd_sweep,
  'metrics': cmd_metrics,
  'methods': cmd_methods,
}


def run(argv: Optional[List[str]] = None) -> int:
  args = build_parser().parse_args(argv)
  if getattr(args, 'verbose', False):
    log.set_console_level(log.LogLevel.DEBUG)
  seed = args.seed if getattr(args, 'seed', None) is not None else int(config.settings.get('seed', 0) or 0)
  try:
    return COMMANDS[args.command](args, seed)
  except SousError as e:
    log.error(str(e))
    return EXIT_ERROR


__all__ = ['build_parser', 'run']
