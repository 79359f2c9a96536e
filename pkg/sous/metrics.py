from __future__ import annotations

from typing import *
from dataclasses import dataclass

from sous.trace import ACTION, QUESTION, EpisodeTrace


NEVER_CORRECT_PCT = 100.0
NEVER_INCORRECT_PCT = 0.0


@dataclass(frozen=True)
class MetricsReport:
  experiment: str
  goal: str
  method: str
  seed: int
  first_correct_pct: float
  last_incorrect_pct: float
  top1_acc: float
  top3_acc: float
  n_questions: int
  extra_steps: int
  robot_mistakes: int
  total_actions: int
  ground_truth_len: int
  failure: Optional[str] = None

  @property
  def failed(self) -> bool:
    return self.failure is not None

  def row(self) -> Dict[str, str]:
    """The CSV row. Floats are fixed to four places so reruns match byte for byte."""
    return {
      'experiment': self.experiment,
      'goal': self.goal,
      'method': self.method,
      'seed': str(self.seed),
      'first_correct_pct': f'{self.first_correct_pct:.4f}',
      'last_incorrect_pct': f'{self.last_incorrect_pct:.4f}',
      'top1_acc': f'{self.top1_acc:.4f}',
      'top3_acc': f'{self.top3_acc:.4f}',
      'n_questions': str(self.n_questions),
      'extra_steps': str(self.extra_steps),
      'robot_mistakes': str(self.robot_mistakes),
      'total_actions': str(self.total_actions),
      'ground_truth_len': str(self.ground_truth_len),
      'failed': '1' if self.failed else '0',
      'failure': self.failure or '',
    }


COLUMNS = [
  'experiment',
  'goal',
  'method',
  'seed',
  'first_correct_pct',
  'last_incorrect_pct',
  'top1_acc',
  'top3_acc',
  'n_questions',
  'extra_steps',
  'robot_mistakes',
  'total_actions',
  'ground_truth_len',
  'failed',
  'failure',
]

# Metrics averaged over a suite
NUMERIC = [
  'first_correct_pct',
  'last_incorrect_pct',
  'top1_acc',
  'top3_acc',
  'n_questions',
  'extra_steps',
]


def compute_metrics(trace: EpisodeTrace) -> MetricsReport:
  """Score one trace.

  Timesteps are the events at which someone moved or waited; a question
  event is not a timestep. A robot that is never right reports
  first_correct_pct = 100, one that is never wrong reports
  last_incorrect_pct = 0.
  """
  truth = trace.experiment.true_goal.id
  events = trace.turn_events()
  n = len(events)

  first_correct = NEVER_CORRECT_PCT
  last_incorrect = NEVER_INCORRECT_PCT
  top1 = 0
  top3 = 0
  for i, event in enumerate(events):
    if event.prediction == truth:
      top1 += 1
      if first_correct == NEVER_CORRECT_PCT:
        first_correct = 100.0 * (i + 1) / n
    else:
      last_incorrect = 100.0 * (i + 1) / n
    if truth in event.top(3):
      top3 += 1

  total_actions = len(trace.actions())
  mistakes = sum(1 for e in trace.events if e.mistake)
  if trace.completed:
    extra_steps = max(0, total_actions - trace.ground_truth_len)
  else:
    # Charged for the wrong moves and for the recipe steps never reached.
    progress = sum(1 for e in trace.events if e.kind == ACTION and not e.mistake)
    extra_steps = mistakes + max(0, trace.ground_truth_len - progress)

  return MetricsReport(
    experiment=trace.experiment.id,
    goal=truth,
    method=trace.method,
    seed=trace.seed,
    first_correct_pct=first_correct,
    last_incorrect_pct=last_incorrect,
    top1_acc=100.0 * top1 / n if n > 0 else 0.0,
    top3_acc=100.0 * top3 / n if n > 0 else 0.0,
    n_questions=sum(1 for e in trace.events if e.kind == QUESTION),
    extra_steps=extra_steps,
    robot_mistakes=mistakes,
    total_actions=total_actions,
    ground_truth_len=trace.ground_truth_len,
    failure=trace.failure,
  )


__all__ = [
  'MetricsReport',
  'COLUMNS',
  'NUMERIC',
  'compute_metrics',
]
