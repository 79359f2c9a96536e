from __future__ import annotations

from typing import *
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
import csv
import json
import os

import numpy as np

import sous.log as log
from sous.belief import BigramClassifier
from sous.episode import run_episode
from sous.goal_bank import ExperimentSpec, PolicyBank, count_linearizations, generate_experiments
from sous.kitchen import Kitchen
from sous.loading import Loading, in_progress, load_child
from sous.methods import MethodConfig
from sous.metrics import COLUMNS, NUMERIC, MetricsReport, compute_metrics
from sous.trace import EpisodeTrace
from sous.util import format_align


METRIC_GROUPS = [
  ('timing', [('first correct %', 'first_correct_pct'), ('last incorrect %', 'last_incorrect_pct')]),
  ('accuracy', [('top-1 %', 'top1_acc'), ('top-3 %', 'top3_acc')]),
  ('effort', [('questions', 'n_questions'), ('extra steps', 'extra_steps')]),
]


@dataclass
class SuiteResult:
  method: str
  seed: int
  reports: List[MetricsReport]

  def failures(self) -> List[MetricsReport]:
    return [r for r in self.reports if r.failed]

  def values(self, metric: str) -> np.ndarray:
    return np.array([float(getattr(r, metric)) for r in self.reports])

  def mean(self, metric: str) -> float:
    return float(np.mean(self.values(metric))) if len(self.reports) > 0 else 0.0

  def sd(self, metric: str) -> float:
    return float(np.std(self.values(metric))) if len(self.reports) > 0 else 0.0

  def aggregate(self) -> Dict[str, Dict[str, float]]:
    return {m: {'mean': self.mean(m), 'sd': self.sd(m)} for m in NUMERIC}


def run_one(exp: ExperimentSpec, cfg: MethodConfig, kitchen: Kitchen) -> MetricsReport:
  """One episode's metrics. Errors escaping the episode become a failed row."""
  try:
    trace = run_episode(exp, cfg, kitchen)
  except Exception as e:
    log.warn(f'Episode {exp.id} ({cfg.name}) raised {type(e).__name__}: {e}')
    trace = EpisodeTrace(
      exp,
      kitchen.policy.ground_truth_len(exp.true_goal.id),
      cfg.name,
      exp.seed,
      failure=f'{type(e).__name__}: {e}',
    )
  return compute_metrics(trace)


def run_suite(
  experiments: Sequence[ExperimentSpec],
  cfg: MethodConfig,
  kitchen: Kitchen,
  seed: int = 0,
  parallelism: int = 1,
) -> Loading[SuiteResult]:
  """Run every experiment and collect the rows in experiment order.

  Episodes share only the kitchen, whose caches are lock protected, so the
  rows are the same whatever the parallelism.
  """
  if len(experiments) == 0:
    raise ValueError('A suite needs at least one experiment')
  if parallelism < 1:
    raise ValueError(f'Parallelism must be positive, got {parallelism}')

  n = len(experiments)
  reports: List[Optional[MetricsReport]] = [None] * n
  yield in_progress(0.0, f'{cfg.name}: 0/{n}')
  with ThreadPoolExecutor(max_workers=parallelism) as pool:
    futures = {pool.submit(run_one, exp, cfg, kitchen): i for i, exp in enumerate(experiments)}
    for done, future in enumerate(as_completed(futures)):
      reports[futures[future]] = future.result()
      yield in_progress((done + 1) / n, f'{cfg.name}: {done + 1}/{n}')

  result = SuiteResult(cfg.name, seed, [r for r in reports if r is not None])
  log.info(
    f'{cfg.name}: {n} episodes, {len(result.failures())} failed,',
    f'top-1 {result.mean("top1_acc"):.2f}%,',
    f'questions {result.mean("n_questions"):.2f},',
    f'extra steps {result.mean("extra_steps"):.2f}',
  )
  return result


def suite_experiments(kitchen: Kitchen, seed: int, limit: Optional[int] = None) -> List[ExperimentSpec]:
  experiments = generate_experiments(kitchen.bank.prefs, seed)
  return experiments if limit is None else experiments[:limit]


def sweep(
  experiments: Sequence[ExperimentSpec],
  cfg: MethodConfig,
  kitchen: Kitchen,
  c_max_values: Sequence[float],
  seed: int = 0,
  parallelism: int = 1,
) -> Loading[List[Tuple[float, SuiteResult]]]:
  """Rerun the suite for each interruption cost ceiling."""
  results = []
  for i, c_max in enumerate(c_max_values):
    result = yield from load_child(
      i / len(c_max_values),
      (i + 1) / len(c_max_values),
      f'c_max={c_max:g} ',
      run_suite(experiments, cfg.with_overrides(c_max=c_max), kitchen, seed, parallelism),
    )
    results.append((c_max, result))
  return results


def write_csv(result: SuiteResult, path: str) -> None:
  _ensure_parent(path)
  with open(path, 'w', newline='') as f:
    writer = csv.DictWriter(f, fieldnames=COLUMNS, lineterminator='\n')
    writer.writeheader()
    for report in result.reports:
      writer.writerow(report.row())


def write_summary(result: SuiteResult, path: str) -> None:
  _ensure_parent(path)
  with open(path, 'w') as f:
    json.dump(summary_json(result), f, indent=2)


def summary_json(result: SuiteResult) -> Dict[str, Any]:
  return {
    'method': result.method,
    'seed': result.seed,
    'episodes': len(result.reports),
    'failures': len(result.failures()),
    'metrics': result.aggregate(),
  }


def write_outputs(result: SuiteResult, directory: str) -> List[str]:
  csv_path = os.path.join(directory, f'{result.method}.csv')
  json_path = os.path.join(directory, f'{result.method}.json')
  write_csv(result, csv_path)
  write_summary(result, json_path)
  return [csv_path, json_path]


def _ensure_parent(path: str) -> None:
  directory = os.path.dirname(path)
  if directory:
    os.makedirs(directory, exist_ok=True)


def format_table(results: Sequence[SuiteResult]) -> List[str]:
  """Plain-text metric table, one block per metric group."""
  lines: List[str] = []
  for group, metrics in METRIC_GROUPS:
    lines.append(f'[{group}]')
    header: List[object] = ['method'] + [label for label, _ in metrics]
    rows = [header] + [
      [r.method] + [f'{r.mean(m):.2f} ± {r.sd(m):.2f}' for _, m in metrics]
        for r in results
    ]
    fmt = '  '.join('{%d}%%s%%a' % i for i in range(len(header)))
    lines.extend(line.rstrip() for line in format_align(fmt, rows))
  return lines


def format_sweep(results: Sequence[Tuple[float, SuiteResult]]) -> List[str]:
  rows = [('c_max', 'questions', 'extra steps', 'top-1 %')] + [
    (
      f'{c_max:g}',
      f'{r.mean("n_questions"):.2f}',
      f'{r.mean("extra_steps"):.2f}',
      f'{r.mean("top1_acc"):.2f}',
    )
      for c_max, r in results
  ]
  return [line.rstrip() for line in format_align('{0}%s%a  {1}%s%a  {2}%s%a  {3}%s%a', rows)]


@dataclass
class BankAudit:
  lines: List[str] = field(default_factory=list)
  problems: List[str] = field(default_factory=list)

  @property
  def ok(self) -> bool:
    return len(self.problems) == 0


HOLDOUT_EVERY = 5


def audit_bank(kitchen: Kitchen, seed: int = 0) -> BankAudit:
  """Check the bundled data against the invariants episodes rely on.

  The policy bank was replayed when the kitchen was built, so only the
  statistics are checked here, plus the sequence classifier on every fifth
  stored sequence held out from its training data.
  """
  audit = BankAudit()
  bank = kitchen.bank
  policy = kitchen.policy

  try:
    bank.prefs.validate()
  except ValueError as e:
    audit.problems.append(str(e))

  rows = []
  for goal in bank.goals:
    total = count_linearizations(bank.networks[goal.id])
    stored = len(policy.sequences[goal.id])
    rows.append((goal.id, goal.recipe_type, policy.ground_truth_len(goal.id), total, stored))
    if stored > total:
      audit.problems.append(f'{goal.id}: {stored} stored sequences but only {total} linearizations')
  audit.lines.extend(format_align(
    '{0}%s%a  {1}%s%a  {2}%s%a steps  {3}%s%a orders  {4}%s%a stored',
    rows,
  ))

  pairs = bank.prefs.count_intersecting_pairs()
  audit.lines.append(f'{len(bank.goals)} goals, {len(bank.prefs.preferences)} preferences, {pairs} intersecting pairs')
  experiments = generate_experiments(bank.prefs, seed)
  if len(experiments) != pairs:
    audit.problems.append(f'{len(experiments)} experiments generated for {pairs} pairs')

  accuracy = holdout_accuracy(policy)
  audit.lines.append(f'Sequence classifier held-out top-1: {accuracy:.2f}%')
  return audit


def holdout_accuracy(policy: PolicyBank) -> float:
  """Top-1 accuracy of the sequence classifier on held-out full sequences."""
  train: Dict[str, list] = {}
  test = []
  for goal_id in policy.ids():
    seqs = policy.sequences[goal_id]
    held = [s for i, s in enumerate(seqs) if i % HOLDOUT_EVERY == HOLDOUT_EVERY - 1]
    kept = [s for i, s in enumerate(seqs) if i % HOLDOUT_EVERY != HOLDOUT_EVERY - 1]
    train[goal_id] = kept or list(seqs)
    test.extend((goal_id, s) for s in held)
  if len(test) == 0:
    return 0.0
  classifier = BigramClassifier(PolicyBank(list(policy.goals), train))
  correct = sum(1 for goal_id, seq in test if classifier.classify(seq).argmax() == goal_id)
  return 100.0 * correct / len(test)


__all__ = [
  'METRIC_GROUPS',
  'SuiteResult',
  'run_one',
  'run_suite',
  'suite_experiments',
  'sweep',
  'write_csv',
  'write_summary',
  'summary_json',
  'write_outputs',
  'format_table',
  'format_sweep',
  'BankAudit',
  'audit_bank',
  'holdout_accuracy',
]
