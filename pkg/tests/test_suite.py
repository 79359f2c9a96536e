from typing import *
import json

import pytest

import sous.suite as suite
from sous.episode import run_episode
from sous.errors import StuckError
from sous.goal_bank import ExperimentSpec
from sous.kitchen import Kitchen
from sous.loading import finish_loading
from sous.methods import load_method
from sous.metrics import COLUMNS
from sous.suite import (
  SuiteResult, audit_bank, format_sweep, format_table, holdout_accuracy, run_one, run_suite,
  suite_experiments, sweep, write_csv, write_outputs,
)
from sous.trace import QUESTION


def run(experiments: Sequence[ExperimentSpec], method: str, kitchen: Kitchen, parallelism: int = 1) -> SuiteResult:
  return finish_loading(run_suite(experiments, load_method(method), kitchen, 0, parallelism))


def test_suite_csv_is_reproducible(tmp_path: Any, kitchen: Kitchen) -> None:
  experiments = suite_experiments(kitchen, 0, limit=6)
  assert len(experiments) == 6
  paths = []
  for i, parallelism in enumerate((1, 1, 3)):
    result = run(experiments, 'known-goals-bank-ask', kitchen, parallelism)
    path = str(tmp_path / f'run{i}.csv')
    write_csv(result, path)
    paths.append(path)
  contents = []
  for path in paths:
    with open(path, 'rb') as f:
      contents.append(f.read())
  assert contents[0] == contents[1] == contents[2]
  header, *rows = contents[0].decode('utf-8').split('\n')[:-1]
  assert header.split(',') == COLUMNS
  assert [row.split(',')[0] for row in rows] == [e.id for e in experiments]


def test_passive_suite_has_no_extra_steps(kitchen: Kitchen) -> None:
  result = run(suite_experiments(kitchen, 0, limit=8), 'passive', kitchen)
  assert result.mean('extra_steps') == 0.0
  assert result.mean('n_questions') == 0.0
  assert result.failures() == []


def test_suite_validation(kitchen: Kitchen) -> None:
  with pytest.raises(ValueError):
    finish_loading(run_suite([], load_method('passive'), kitchen))
  with pytest.raises(ValueError):
    finish_loading(run_suite(suite_experiments(kitchen, 0, 1), load_method('passive'), kitchen, parallelism=0))


def test_errors_become_failed_rows(kitchen: Kitchen, monkeypatch: Any) -> None:
  def stuck(*args: Any, **kwargs: Any) -> Any:
    raise StuckError('nowhere to go')
  monkeypatch.setattr(suite, 'run_episode', stuck)
  exp = suite_experiments(kitchen, 0, 1)[0]
  report = run_one(exp, load_method('passive'), kitchen)
  assert report.failed
  assert 'StuckError' in cast(str, report.failure)
  assert report.ground_truth_len == kitchen.policy.ground_truth_len(exp.true_goal.id)


def test_unexpected_errors_keep_the_row(kitchen: Kitchen, monkeypatch: Any) -> None:
  def broken(*args: Any, **kwargs: Any) -> Any:
    raise ValueError('bad weights')
  monkeypatch.setattr(suite, 'run_episode', broken)
  experiments = suite_experiments(kitchen, 0, 3)
  result = finish_loading(run_suite(experiments, load_method('passive'), kitchen))
  assert len(result.reports) == 3
  assert all(r.failed for r in result.reports)
  assert result.failures()[0].failure == 'ValueError: bad weights'


def test_outputs_and_tables(tmp_path: Any, kitchen: Kitchen) -> None:
  experiments = suite_experiments(kitchen, 0, limit=4)
  passive = run(experiments, 'passive', kitchen)
  bank = run(experiments, 'known-goals-bank', kitchen)
  csv_path, json_path = write_outputs(bank, str(tmp_path / 'out'))
  assert csv_path.endswith('known-goals-bank.csv')
  with open(json_path, 'r') as f:
    summary = json.load(f)
  assert summary['episodes'] == 4
  assert set(summary['metrics']) == {
    'first_correct_pct', 'last_incorrect_pct', 'top1_acc', 'top3_acc', 'n_questions', 'extra_steps',
  }
  assert summary['metrics']['top1_acc']['mean'] == pytest.approx(bank.mean('top1_acc'))

  lines = format_table([passive, bank])
  assert lines[0] == '[timing]'
  assert any(line.startswith('known-goals-bank ') for line in lines)
  assert sum(1 for line in lines if line.startswith('[')) == 3


def test_sweep(kitchen: Kitchen) -> None:
  experiments = suite_experiments(kitchen, 0, limit=3)
  results = finish_loading(sweep(experiments, load_method('known-goals-bank-ask'), kitchen, [0.5, 4.0]))
  assert [c for c, _ in results] == [0.5, 4.0]
  assert all(len(r.reports) == 3 for _, r in results)
  lines = format_sweep(results)
  assert lines[0].split() == ['c_max', 'questions', 'extra', 'steps', 'top-1', '%']
  assert lines[1].startswith('0.5 ')


def test_bank_audit(kitchen: Kitchen) -> None:
  audit = audit_bank(kitchen)
  assert audit.ok, audit.problems
  assert any('967 intersecting pairs' in line for line in audit.lines)
  assert any(line.startswith('honey_oatmeal ') for line in audit.lines)


def test_classifier_held_out_accuracy(kitchen: Kitchen) -> None:
  assert holdout_accuracy(kitchen.policy) >= 85.0


@pytest.mark.slow
def test_full_suite_acceptance(tmp_path: Any, kitchen: Kitchen) -> None:
  experiments = suite_experiments(kitchen, 0)
  assert len(experiments) == 967
  asking = run(experiments, 'known-goals-bank-ask', kitchen, 4)
  assert asking.mean('extra_steps') <= 0.5
  assert asking.mean('top1_acc') >= 85.0
  assert 0.5 <= asking.mean('n_questions') <= 2.5

  bank = run(experiments, 'known-goals-bank', kitchen, 4)
  known = run(experiments, 'known-goals', kitchen, 4)
  actions = run(experiments, 'actions-only', kitchen, 4)
  extra = [r.mean('extra_steps') for r in (asking, bank, known, actions)]
  assert extra == sorted(extra)

  again = run(experiments, 'known-goals-bank-ask', kitchen, 1)
  write_csv(asking, str(tmp_path / 'a.csv'))
  write_csv(again, str(tmp_path / 'b.csv'))
  with open(tmp_path / 'a.csv', 'rb') as a, open(tmp_path / 'b.csv', 'rb') as b:
    assert a.read() == b.read()


@pytest.mark.slow
def test_answers_settle_the_goal(kitchen: Kitchen) -> None:
  cfg = load_method('known-goals-bank-ask')
  settled = 0
  asked = 0
  for exp in suite_experiments(kitchen, 0):
    trace = run_episode(exp, cfg, kitchen)
    questions = [i for i, e in enumerate(trace.events) if e.kind == QUESTION]
    if len(questions) == 0:
      continue
    asked += 1
    after = [e for e in trace.events[questions[0] + 1:] if e.kind != QUESTION]
    if all(e.prediction == exp.true_goal.id for e in after):
      settled += 1
  assert asked > 0
  assert settled / asked >= 0.95


@pytest.mark.slow
def test_questions_fall_as_cost_rises(kitchen: Kitchen) -> None:
  experiments = suite_experiments(kitchen, 0)
  results = finish_loading(sweep(experiments, load_method('known-goals-bank-ask'), kitchen, [0.5, 2.0, 8.0], parallelism=4))
  counts = [r.mean('n_questions') for _, r in results]
  assert counts == sorted(counts, reverse=True)
