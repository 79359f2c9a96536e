from __future__ import annotations

from typing import *
from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.stats import entropy as _entropy

import sous.log as log
from sous.belief import GoalBelief, InteractionSummary, entropy
from sous.errors import MissingLikelihoodError, UnknownAnswerError


SUPPORT_FLOOR = 1e-6


@dataclass(frozen=True)
class CostSchedule:
  c_min: float = 0.2
  c_max: float = 2.0
  t_q: int = 5
  last_asked: Optional[int] = None

  def __post_init__(self) -> None:
    if self.c_min < 0:
      raise ValueError('c_min must be nonnegative')
    if self.c_max < self.c_min:
      raise ValueError('c_max must be at least c_min')
    if self.t_q < 1:
      raise ValueError('t_q must be positive')

  def asked(self, t: int) -> CostSchedule:
    return replace(self, last_asked=t)


def interruption_cost(sched: CostSchedule, t: int) -> float:
  """Asking right after a question costs c_max, falling linearly to c_min over t_q steps."""
  if sched.last_asked is None:
    return sched.c_min
  dt = t - sched.last_asked
  if dt < 0:
    raise ValueError(f'Time {t} precedes the last question at {sched.last_asked}')
  if dt >= sched.t_q:
    return sched.c_min
  return sched.c_max - (sched.c_max - sched.c_min) * (dt / sched.t_q)


@dataclass(frozen=True)
class Question:
  id: str
  text: str
  category: str
  answers: Tuple[str, ...]
  likelihoods: Dict[str, Dict[str, float]] # goal id -> answer -> p(answer | goal)
  phrases: Dict[str, str] = field(default_factory=dict)

  def __post_init__(self) -> None:
    if len(set(self.answers)) != len(self.answers) or len(self.answers) < 2:
      raise ValueError(f'Question {self.id} needs at least two distinct answers')
    for goal_id, row in self.likelihoods.items():
      if set(row) != set(self.answers):
        raise ValueError(f'Question {self.id}: likelihoods for {goal_id} do not cover its answers')
      if any(p < 0 for p in row.values()) or abs(sum(row.values()) - 1.0) > 1e-9:
        raise ValueError(f'Question {self.id}: likelihoods for {goal_id} are not a distribution')

  def phrase(self, answer: str) -> str:
    return self.phrases.get(answer, answer)

  def row(self, goal_id: str) -> Dict[str, float]:
    row = self.likelihoods.get(goal_id)
    if row is None:
      raise MissingLikelihoodError(f'Question {self.id} has no likelihoods for goal {goal_id!r}')
    return row

  def most_likely_answer(self, goal_id: str) -> str:
    row = self.row(goal_id)
    return min(self.answers, key=lambda answer: (-row[answer], answer))

  def goals_answering(self, answer: str) -> List[str]:
    """Goals whose most likely answer is `answer`."""
    return sorted(g for g in self.likelihoods if self.most_likely_answer(g) == answer)


@dataclass(frozen=True)
class AskDecision:
  ask: bool
  h_now: float
  c_scaled: float
  chosen: Optional[Question] = None
  delta_h: float = 0.0


def should_ask(belief: GoalBelief, sched: CostSchedule, t: int) -> AskDecision:
  h_now = entropy(belief)
  n = len(belief.support(SUPPORT_FLOOR))
  c_scaled = interruption_cost(sched, t) * math.log2(n) if n > 1 else 0.0
  return AskDecision(h_now > c_scaled, h_now, c_scaled)


def _likelihood_matrix(q: Question, belief: GoalBelief) -> Tuple[np.ndarray, np.ndarray]:
  """Prior over the belief's support and p(answer | goal), goals by answers."""
  ids = [goal_id for goal_id in belief.ids() if belief.prob(goal_id) > 0]
  prior = np.array([belief.prob(goal_id) for goal_id in ids])
  matrix = np.array([[q.row(goal_id)[answer] for answer in q.answers] for goal_id in ids])
  return prior, matrix


def question_value(q: Question, belief: GoalBelief) -> float:
  """Expected entropy reduction in bits, with every answer taken as equally likely.

  An answer no goal could give leaves the belief as it was.
  """
  prior, matrix = _likelihood_matrix(q, belief)
  h_prior = float(_entropy(prior, base=2)) if len(prior) > 1 else 0.0
  expected = 0.0
  for column in range(len(q.answers)):
    joint = prior * matrix[:, column]
    if joint.sum() <= 0:
      expected += h_prior
    elif len(joint) > 1:
      expected += float(_entropy(joint, base=2))
  expected /= len(q.answers)
  value = h_prior - expected
  if value < -1e-12:
    log.warn(f'Question {q.id} has negative value {value:.4f} bits')
  return value


def select_question(candidates: Sequence[Question], belief: GoalBelief) -> Question:
  if len(candidates) == 0:
    raise ValueError('select_question needs at least one candidate')
  best: Optional[Question] = None
  best_value = -math.inf
  for q in sorted(candidates, key=lambda q: q.id):
    value = question_value(q, belief)
    if value > best_value:
      best, best_value = q, value
  assert best is not None
  return best


def apply_answer(
  belief: GoalBelief,
  summary: InteractionSummary,
  q: Question,
  answer: str,
) -> Tuple[GoalBelief, InteractionSummary]:
  if answer not in q.answers:
    raise UnknownAnswerError(f'{answer!r} is not an answer to {q.text!r}')
  likelihood = {}
  for goal_id in belief.ids():
    if belief.prob(goal_id) > 0:
      likelihood[goal_id] = q.row(goal_id)[answer]
    else:
      likelihood[goal_id] = q.likelihoods.get(goal_id, {}).get(answer, 0.0)
  return (
    belief.reweighted(likelihood),
    summary.with_answer(q.text, q.phrase(answer), answer),
  )


def decide(
  belief: GoalBelief,
  sched: CostSchedule,
  t: int,
  candidates: Union[Sequence[Question], Callable[[], Sequence[Question]]],
  asked: AbstractSet[str] = frozenset(),
) -> AskDecision:
  """Gate on entropy against cost, then pick the best question not yet asked.

  No question is asked when the best one is not expected to reduce entropy.
  A callable `candidates` is only built once the gate is open.
  """
  gate = should_ask(belief, sched, t)
  if not gate.ask:
    return gate
  if callable(candidates):
    candidates = candidates()
  pool = [q for q in candidates if q.id not in asked]
  if len(pool) == 0:
    return replace(gate, ask=False)
  chosen = select_question(pool, belief)
  delta_h = question_value(chosen, belief)
  if delta_h <= 1e-12:
    return replace(gate, ask=False, delta_h=delta_h)
  log.debug(f'Asking {chosen.id!r} at t={t}: H={gate.h_now:.3f} > {gate.c_scaled:.3f}, dH={delta_h:.3f}')
  return replace(gate, chosen=chosen, delta_h=delta_h)


__all__ = [
  'CostSchedule',
  'interruption_cost',
  'Question',
  'AskDecision',
  'should_ask',
  'question_value',
  'select_question',
  'apply_answer',
  'decide',
]
