from __future__ import annotations

from typing import *

import numpy as np

import sous.log as log
from sous.errors import StuckError, WrongTurnError
from sous.goal_bank import ActionSequence, Goal
from sous.inquiry import Question
from sous.judge import Judge
from sous.world import ActionInstance, DomainSpec, WorldState, HUMAN, is_completed, is_legal, is_terminal


class SimHuman:
  """Scripted human following one stored sequence of its goal.

  Steps the robot has already completed are skipped when the human reaches
  them. Answers are the goal's most likely answer unless `noise` is set.
  Questions with no row for the true goal are answered through `judge`.
  """

  def __init__(
    self,
    true_goal: Goal,
    script: ActionSequence,
    stated_prefs: Sequence[str],
    noise: float = 0.0,
    reveal_at: Optional[int] = None,
    seed: int = 0,
    judge: Optional[Judge] = None,
  ) -> None:
    if not 0.0 <= noise <= 1.0:
      raise ValueError(f'Answer noise must be a probability, got {noise}')
    self.true_goal = true_goal
    self.script = tuple(a.without_agent() for a in script)
    self.stated_prefs = list(stated_prefs)
    self.noise = noise
    self.reveal_at = reveal_at
    self.cursor = 0
    self.rng = np.random.default_rng(seed)
    self.judge = judge

  def opening_prefs(self) -> List[str]:
    """Preferences spoken when the interaction starts."""
    if self.reveal_at is None:
      return list(self.stated_prefs)
    return self.stated_prefs[:1]

  def revealed_prefs(self, step_index: int) -> List[str]:
    """Preferences first spoken at this world step."""
    if self.reveal_at is not None and step_index == self.reveal_at:
      return self.stated_prefs[1:]
    return []

  def remaining(self) -> ActionSequence:
    return self.script[self.cursor:]

  def finished(self, state: WorldState, spec: DomainSpec) -> bool:
    """Whether every step left in the script holds in `state`."""
    return all(is_completed(a, state, spec) for a in self.remaining())


def next_human_action(h: SimHuman, state: WorldState, spec: DomainSpec) -> Optional[ActionInstance]:
  """The human's next script step, or None once the dish is served."""
  if state.turn != HUMAN:
    raise WrongTurnError(f'Asked the human to move on the {state.turn} turn')
  if is_terminal(state, spec):
    return None
  while h.cursor < len(h.script) and is_completed(h.script[h.cursor], state, spec):
    h.cursor += 1
  if h.cursor >= len(h.script):
    log.warn(f'Human for {h.true_goal.id} has no script left but nothing is served')
    raise StuckError(f'Script for {h.true_goal.id} ran out before the dish was served')
  action = h.script[h.cursor]
  if not is_legal(state, action, spec):
    log.warn(f'Human for {h.true_goal.id} is stuck at step {h.cursor}: {action.text()}')
    raise StuckError(f'{action.text()} is no longer possible for {h.true_goal.id}')
  h.cursor += 1
  return action.with_agent(HUMAN)


def _best_answer(h: SimHuman, q: Question) -> str:
  if h.true_goal.id in q.likelihoods or h.judge is None:
    return q.most_likely_answer(h.true_goal.id)
  name = h.true_goal.name
  scores = {a: h.judge.score(q.phrase(a), [name], q.text).get(name, 0.0) for a in q.answers}
  return min(q.answers, key=lambda a: (-scores[a], a))


def answer(h: SimHuman, q: Question) -> str:
  """The true goal's most likely answer; ties go to the first answer alphabetically."""
  best = _best_answer(h, q)
  if h.noise > 0 and h.rng.random() < h.noise:
    others = sorted(a for a in q.answers if a != best)
    return others[int(h.rng.integers(len(others)))]
  return best


__all__ = [
  'SimHuman',
  'next_human_action',
  'answer',
]
