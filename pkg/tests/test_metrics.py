from typing import *

import pytest

from sous.goal_bank import ExperimentSpec, Goal
from sous.metrics import COLUMNS, NUMERIC, compute_metrics
from sous.trace import ACTION, QUESTION, WAIT, EpisodeTrace, TraceEvent
from sous.world import ActionInstance, HUMAN, ROBOT


def make_trace(predictions: Sequence[str], truth: str = 'D') -> EpisodeTrace:
  exp = ExperimentSpec(('sweet', 'warm'), Goal(truth, truth, 'Oatmeal'), 0)
  trace = EpisodeTrace(exp, len(predictions), 'test', 0)
  for i, guess in enumerate(predictions):
    belief = ((guess, 0.7), ('X', 0.2), ('Y', 0.1))
    trace.add(TraceEvent(i, HUMAN, ACTION, ActionInstance('gather', 'oats'), belief=belief))
  return trace


def test_definition_example() -> None:
  report = compute_metrics(make_trace(['W', 'D', 'W', 'D', 'D']))
  assert report.first_correct_pct == pytest.approx(40.0)
  assert report.last_incorrect_pct == pytest.approx(60.0)
  assert report.top1_acc == pytest.approx(60.0)
  assert report.top3_acc == pytest.approx(60.0)


def test_all_correct() -> None:
  report = compute_metrics(make_trace(['D'] * 4))
  assert report.first_correct_pct == pytest.approx(25.0)
  assert report.last_incorrect_pct == 0.0
  assert report.top1_acc == 100.0


def test_never_correct() -> None:
  report = compute_metrics(make_trace(['W'] * 3))
  assert report.top1_acc == 0.0
  assert report.first_correct_pct == 100.0
  assert report.last_incorrect_pct == 100.0


def test_top3_counts_runner_up() -> None:
  trace = make_trace(['W', 'W'], truth='X')
  assert compute_metrics(trace).top3_acc == 100.0
  assert compute_metrics(trace).top1_acc == 0.0


def test_questions_are_not_timesteps() -> None:
  trace = make_trace(['W'])
  trace.add(TraceEvent(1, ROBOT, QUESTION, question_id='temperature', question='Warm?', answer='warm', belief=(('D', 1.0),)))
  trace.add(TraceEvent(2, ROBOT, WAIT, belief=(('D', 1.0),)))
  report = compute_metrics(trace)
  assert report.n_questions == 1
  assert report.first_correct_pct == pytest.approx(100.0)
  assert report.last_incorrect_pct == pytest.approx(50.0)
  assert report.top1_acc == pytest.approx(50.0)


def test_extra_steps() -> None:
  trace = make_trace(['D', 'D', 'D'])
  trace.ground_truth_len = 2
  trace.completed = True
  assert compute_metrics(trace).extra_steps == 1

  trace.ground_truth_len = 5
  assert compute_metrics(trace).extra_steps == 0

  failed = make_trace(['D', 'D'])
  failed.add(TraceEvent(2, ROBOT, ACTION, ActionInstance('gather', 'salt', agent=ROBOT), mistake=True))
  failed.failure = 'Step cap of 6 reached'
  report = compute_metrics(failed)
  assert report.extra_steps == 1
  assert report.robot_mistakes == 1
  assert report.failed

  failed.ground_truth_len = 6
  assert compute_metrics(failed).extra_steps == 5

  crashed = make_trace([])
  crashed.ground_truth_len = 9
  crashed.failure = 'ValueError: bad weights'
  assert compute_metrics(crashed).extra_steps == 9


def test_row_format() -> None:
  report = compute_metrics(make_trace(['W', 'D', 'D']))
  row = report.row()
  assert list(row) == COLUMNS
  assert row['first_correct_pct'] == '66.6667'
  assert row['experiment'] == 'sweet+warm'
  assert row['failed'] == '0' and row['failure'] == ''
  assert set(NUMERIC) <= set(COLUMNS)


def test_empty_trace() -> None:
  report = compute_metrics(make_trace([]))
  assert report.top1_acc == 0.0
  assert report.first_correct_pct == 100.0
  assert report.last_incorrect_pct == 0.0
