from __future__ import annotations

from typing import *
from dataclasses import dataclass, field

from sous.errors import UnknownSourceError, MissingFieldError
from sous.goal_bank import PolicyBank, PreferenceMap
from sous.judge import Judge, clamp01
from sous.world import ActionInstance

if TYPE_CHECKING:
  from sous.belief import GoalBelief


@dataclass(frozen=True)
class AttractorField:
  """Nonnegative pull of one source over a set of targets.

  Targets are action texts (`pour(oats,bowl)`) or answer strings; absent
  targets have zero pull.
  """
  source: str
  scores: Dict[str, float] = field(default_factory=dict)

  def __post_init__(self) -> None:
    for target, value in self.scores.items():
      if value < 0:
        raise ValueError(f'Negative attractor score {value} for {target!r}')

  def __getitem__(self, target: str) -> float:
    return self.scores.get(target, 0.0)

  def of(self, action: ActionInstance) -> float:
    return self.scores.get(action.text(), 0.0)


@dataclass(frozen=True)
class ScoreWeights:
  w_goal: float = 1.0
  w_pref: float = 1.0

  def __post_init__(self) -> None:
    if self.w_goal < 0 or self.w_pref < 0:
      raise ValueError('Score weights must be nonnegative')
    if self.w_goal == 0 and self.w_pref == 0:
      raise ValueError('Score weights cannot both be zero')

  def scaled(self, factor: float) -> ScoreWeights:
    return ScoreWeights(self.w_goal * factor, self.w_pref * factor)


def field_from_goals(source: str, goal_ids: Sequence[str], bank: PolicyBank) -> AttractorField:
  """Share of the goals' stored sequences that contain each action."""
  if len(goal_ids) == 0:
    raise UnknownSourceError(f'{source!r} is associated with no goal')
  counts: Dict[str, float] = {}
  total = 0
  for goal_id in goal_ids:
    n = len(bank.sequences[goal_id])
    total += n
    for action, frequency in bank.frequency(goal_id).items():
      key = action.text()
      counts[key] = counts.get(key, 0.0) + frequency * n
  return AttractorField(source, {key: count / total for key, count in counts.items()})


def field_from_policy_bank(source: str, bank: PolicyBank, prefs: PreferenceMap) -> AttractorField:
  if source in bank.sequences:
    return field_from_goals(source, [source], bank)
  if source in prefs.preferences:
    return field_from_goals(source, prefs.goals_for(source), bank)
  raise UnknownSourceError(f'Unknown goal or preference {source!r}')


def field_from_judge(source: str, targets: Sequence[str], context: str, judge: Judge) -> AttractorField:
  if len(targets) == 0:
    raise ValueError('field_from_judge needs at least one target')
  scores = judge.score(source, list(targets), context)
  return AttractorField(source, {target: clamp01(scores[target]) for target in targets})


def aggregate_score(
  action: ActionInstance,
  belief: GoalBelief,
  goal_fields: Mapping[str, AttractorField],
  pref_fields: Sequence[AttractorField],
  weights: ScoreWeights,
  goals: Optional[Iterable[str]] = None,
) -> float:
  """Belief-weighted goal pull plus preference pull on one action.

  `goals` limits the goal terms to a subset of the belief's candidates.
  """
  key = action.text()
  total = 0.0
  for goal_id in (belief.ids() if goals is None else goals):
    goal_field = goal_fields.get(goal_id)
    if goal_field is None:
      raise MissingFieldError(f'No attractor field for goal {goal_id!r}')
    total += belief.prob(goal_id) * weights.w_goal * goal_field.scores.get(key, 0.0)
  for pref_field in pref_fields:
    total += weights.w_pref * pref_field.scores.get(key, 0.0)
  return total


class ScoreTable:
  """Memoized `aggregate_score` for one belief and set of fields.

  Terms are summed in the same order, so lookups equal the direct score.
  """

  def __init__(
    self,
    belief: GoalBelief,
    goal_fields: Mapping[str, AttractorField],
    pref_fields: Sequence[AttractorField],
    weights: ScoreWeights,
    goals: Optional[Iterable[str]] = None,
  ) -> None:
    self.terms: List[Tuple[float, AttractorField]] = []
    for goal_id in (belief.ids() if goals is None else goals):
      goal_field = goal_fields.get(goal_id)
      if goal_field is None:
        raise MissingFieldError(f'No attractor field for goal {goal_id!r}')
      self.terms.append((belief.prob(goal_id) * weights.w_goal, goal_field))
    self.terms.extend((weights.w_pref, pref_field) for pref_field in pref_fields)
    self.scores: Dict[str, float] = {}

  def __call__(self, action: ActionInstance) -> float:
    key = action.text()
    score = self.scores.get(key)
    if score is None:
      score = 0.0
      for weight, term_field in self.terms:
        score += weight * term_field.scores.get(key, 0.0)
      self.scores[key] = score
    return score


__all__ = [
  'AttractorField',
  'ScoreWeights',
  'field_from_goals',
  'field_from_policy_bank',
  'field_from_judge',
  'aggregate_score',
  'ScoreTable',
]
