from __future__ import annotations

from typing import *
from abc import abstractmethod
from dataclasses import dataclass, field
import bisect
import functools
import math
import re

import numpy as np
from scipy.special import logsumexp
from scipy.stats import entropy as _entropy

from sous.attractor import AttractorField
from sous.errors import EmptyBankError, MissingFieldError, ZeroLikelihoodError
from sous.goal_bank import Goal, PolicyBank, PreferenceMap
from sous.judge import Judge
from sous.world import ActionInstance

if TYPE_CHECKING:
  from sous.trace import EpisodeTrace


TOLERANCE = 1e-9

DEFAULT_EPSILON = 0.01
PREFERENCE_EPSILON = 0.1
INTERPOLATION = 0.5

DROP_THRESHOLD = 0.02
DROP_AFTER = 2
PRIOR_BLEND = 0.5


@dataclass(frozen=True)
class GoalBelief:
  """A normalized distribution over a candidate goal set.

  `stale` counts, per candidate, the consecutive proposal rounds in which
  the judge scored it below the drop threshold.
  """
  candidates: Tuple[Goal, ...]
  probs: Dict[str, float]
  stale: Dict[str, int] = field(default_factory=dict, compare=False)

  def __post_init__(self) -> None:
    ids = [goal.id for goal in self.candidates]
    if len(set(ids)) != len(ids):
      raise ValueError('Duplicate candidate goals')
    if set(ids) != set(self.probs):
      raise ValueError('Belief probabilities do not match its candidates')
    if any(p < 0 for p in self.probs.values()):
      raise ValueError('Negative belief probability')
    if len(ids) > 0 and abs(sum(self.probs.values()) - 1.0) > TOLERANCE:
      raise ValueError(f'Belief sums to {sum(self.probs.values())}')

  @staticmethod
  def uniform(goals: Sequence[Goal]) -> GoalBelief:
    if len(goals) == 0:
      raise EmptyBankError('Cannot form a belief over no goals')
    return GoalBelief(tuple(goals), {goal.id: 1.0 / len(goals) for goal in goals})

  @staticmethod
  def from_weights(
    goals: Sequence[Goal],
    weights: Mapping[str, float],
    stale: Optional[Dict[str, int]] = None,
  ) -> GoalBelief:
    if len(goals) == 0:
      raise EmptyBankError('Cannot form a belief over no goals')
    values = np.array([max(float(weights[goal.id]), 0.0) for goal in goals])
    total = values.sum()
    if total <= 0 or not np.isfinite(total):
      raise ZeroLikelihoodError('Every candidate goal has zero likelihood')
    values = values / total
    return GoalBelief(
      tuple(goals),
      {goal.id: float(p) for goal, p in zip(goals, values)},
      dict(stale or {}),
    )

  def ids(self) -> List[str]:
    return [goal.id for goal in self.candidates]

  def goal(self, goal_id: str) -> Goal:
    for goal in self.candidates:
      if goal.id == goal_id:
        return goal
    raise KeyError(goal_id)

  def prob(self, goal_id: str) -> float:
    return self.probs.get(goal_id, 0.0)

  def top(self, k: int) -> List[Tuple[str, float]]:
    ranked = sorted(self.probs.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]

  def argmax(self) -> str:
    return self.top(1)[0][0]

  def unique_argmax(self) -> Optional[str]:
    """The most likely goal, or None when two goals tie for it."""
    ranked = self.top(2)
    if len(ranked) == 0:
      return None
    if len(ranked) == 2 and abs(ranked[0][1] - ranked[1][1]) <= TOLERANCE:
      return None
    return ranked[0][0]

  def support(self, floor: float = 1e-6) -> List[str]:
    return [goal_id for goal_id in self.ids() if self.probs[goal_id] > floor]

  def reweighted(self, likelihood: Mapping[str, float]) -> GoalBelief:
    """Posterior after multiplying by a per-goal likelihood."""
    return GoalBelief.from_weights(
      self.candidates,
      {goal_id: self.probs[goal_id] * likelihood[goal_id] for goal_id in self.ids()},
      self.stale,
    )


def entropy(belief: GoalBelief) -> float:
  """Shannon entropy in bits."""
  values = list(belief.probs.values())
  if len(values) <= 1:
    return 0.0
  return float(_entropy(values, base=2))


def update_from_action(
  belief: GoalBelief,
  action: ActionInstance,
  fields: Mapping[str, AttractorField],
  epsilon: float = DEFAULT_EPSILON,
) -> GoalBelief:
  likelihood = {}
  for goal_id in belief.ids():
    goal_field = fields.get(goal_id)
    if goal_field is None:
      raise MissingFieldError(f'No attractor field for goal {goal_id!r}')
    likelihood[goal_id] = goal_field.of(action) + epsilon
  return belief.reweighted(likelihood)


def preference_prior(
  goals: Sequence[Goal],
  stated: Iterable[str],
  prefs: PreferenceMap,
  epsilon: float = PREFERENCE_EPSILON,
) -> GoalBelief:
  """Prior favouring goals that map to every stated preference.

  Statements outside the preference vocabulary carry no weight.
  """
  vocabulary = set(prefs.preferences)
  weights = {}
  for goal in goals:
    mapped = prefs.goal_to_prefs.get(goal.id, frozenset())
    weight = 1.0
    for pref in stated:
      if pref in vocabulary and pref not in mapped:
        weight *= epsilon
    weights[goal.id] = weight
  return GoalBelief.from_weights(goals, weights)


class SequenceClassifier(Protocol):
  @abstractmethod
  def classify(self, history: Sequence[ActionInstance]) -> GoalBelief: ...


_START = '<start>'


class BigramClassifier:
  """Generative classifier over stored sequences.

  Per goal, an add-one smoothed bigram model interpolated with an add-one
  unigram model. The vocabulary is shared by all goals, plus one slot for
  actions no goal contains.
  """

  def __init__(self, policy: PolicyBank, interpolation: float = INTERPOLATION) -> None:
    if len(policy.goals) == 0:
      raise EmptyBankError('Cannot train a classifier on an empty policy bank')
    self.policy = policy
    self.interpolation = interpolation

    vocabulary: Set[str] = set()
    self.unigrams: Dict[str, Dict[str, int]] = {}
    self.bigrams: Dict[str, Dict[Tuple[str, str], int]] = {}
    self.contexts: Dict[str, Dict[str, int]] = {}
    self.totals: Dict[str, int] = {}
    for goal in policy.goals:
      unigrams: Dict[str, int] = {}
      bigrams: Dict[Tuple[str, str], int] = {}
      contexts: Dict[str, int] = {}
      for seq in policy.sequences[goal.id]:
        previous = _START
        for action in seq:
          key = action.text()
          vocabulary.add(key)
          unigrams[key] = unigrams.get(key, 0) + 1
          bigrams[(previous, key)] = bigrams.get((previous, key), 0) + 1
          contexts[previous] = contexts.get(previous, 0) + 1
          previous = key
      self.unigrams[goal.id] = unigrams
      self.bigrams[goal.id] = bigrams
      self.contexts[goal.id] = contexts
      self.totals[goal.id] = sum(unigrams.values())
    self.vocabulary_size = len(vocabulary) + 1

  def log_likelihood(self, goal_id: str, history: Sequence[ActionInstance]) -> float:
    v = self.vocabulary_size
    lam = self.interpolation
    unigrams = self.unigrams[goal_id]
    bigrams = self.bigrams[goal_id]
    contexts = self.contexts[goal_id]
    total = self.totals[goal_id]
    result = 0.0
    previous = _START
    for action in history:
      key = action.text()
      p_uni = (unigrams.get(key, 0) + 1) / (total + v)
      p_bi = (bigrams.get((previous, key), 0) + 1) / (contexts.get(previous, 0) + v)
      result += math.log(lam * p_bi + (1 - lam) * p_uni)
      previous = key
    return result

  def classify(self, history: Sequence[ActionInstance]) -> GoalBelief:
    goals = self.policy.goals
    if len(history) == 0:
      return GoalBelief.uniform(goals)
    scores = np.array([self.log_likelihood(goal.id, history) for goal in goals])
    probs = np.exp(scores - logsumexp(scores))
    probs = probs / probs.sum()
    return GoalBelief(tuple(goals), {goal.id: float(p) for goal, p in zip(goals, probs)})


@functools.lru_cache(maxsize=8)
def _classifier_for(policy: PolicyBank) -> BigramClassifier:
  return BigramClassifier(policy)


def classify_sequence(history: Sequence[ActionInstance], policy: PolicyBank) -> GoalBelief:
  if len(policy.goals) == 0:
    raise EmptyBankError('Cannot classify against an empty policy bank')
  return _classifier_for(policy).classify(history)


def slug(name: str) -> str:
  return re.sub(r'[^a-z0-9]+', '_', name.lower()).strip('_') or 'goal'


def resolve_by_name(goals: Sequence[Goal]) -> Callable[[str], Goal]:
  """Map judge-proposed names onto known goals, minting goals for the rest."""
  by_name = {goal.name.lower(): goal for goal in goals}
  by_name.update({goal.id: goal for goal in goals})

  def resolve(name: str) -> Goal:
    known = by_name.get(name.strip().lower())
    if known is not None:
      return known
    return Goal(slug(name), name.strip(), 'Unknown')
  return resolve


def propose_goals(
  summary: InteractionSummary,
  judge: Judge,
  current: Optional[GoalBelief],
  max_goals: int = 8,
  resolve: Optional[Callable[[str], Goal]] = None,
) -> GoalBelief:
  """Refresh the open-case candidate set from the judge.

  Candidates the judge keeps scoring below the drop threshold are removed;
  fresh proposals fill the free slots. The result blends the surviving prior
  mass with the normalized judge scores.
  """
  resolve = resolve or resolve_by_name([])
  context = summary.render()
  existing = list(current.candidates) if current is not None else []

  proposed: List[Goal] = []
  seen = {goal.id for goal in existing}
  for name in judge.propose(context, max_goals):
    goal = resolve(name)
    if goal.id not in seen:
      seen.add(goal.id)
      proposed.append(goal)

  if len(proposed) == 0:
    if current is None or len(existing) == 0:
      raise EmptyBankError('The judge proposed no goals')
    return current

  pool = existing + proposed
  raw = judge.score(context, [goal.name for goal in pool], context)
  scores = _normalized({goal.id: raw[goal.name] for goal in pool})

  previous = current.stale if current is not None else {}
  survivors: List[Goal] = []
  stale: Dict[str, int] = {}
  for goal in existing:
    count = previous.get(goal.id, 0) + 1 if scores[goal.id] < DROP_THRESHOLD else 0
    if count < DROP_AFTER:
      survivors.append(goal)
      stale[goal.id] = count
  if len(existing) > 0 and len(survivors) == 0:
    best = max(existing, key=lambda goal: (scores[goal.id], goal.id))
    survivors.append(best)
    stale[best.id] = 0

  candidates = list(survivors)
  for goal in sorted(proposed, key=lambda goal: (-scores[goal.id], goal.id)):
    if len(candidates) >= max_goals:
      break
    if scores[goal.id] >= DROP_THRESHOLD or len(candidates) == 0:
      candidates.append(goal)
      stale[goal.id] = 0

  judged = _normalized({goal.id: scores[goal.id] for goal in candidates})
  if current is None or len(existing) == 0:
    prior = {goal.id: 1.0 / len(candidates) for goal in candidates}
  else:
    prior = _normalized({goal.id: current.prob(goal.id) for goal in candidates})
  return GoalBelief.from_weights(
    candidates,
    {goal.id: PRIOR_BLEND * prior[goal.id] + (1 - PRIOR_BLEND) * judged[goal.id] for goal in candidates},
    stale,
  )


def _normalized(values: Dict[str, float]) -> Dict[str, float]:
  total = sum(values.values())
  if total <= 0:
    return {key: 1.0 / len(values) for key in values}
  return {key: value / total for key, value in values.items()}


PHASES = ('gathering', 'assembling', 'cooking', 'finishing')

# Lower bounds on the processed share of gathered items for each phase after gathering.
_PHASE_BOUNDS = (0.25, 0.75, 1.0)


@dataclass(frozen=True)
class InteractionSummary:
  likely_dish: Optional[str]
  phase: str
  items_in_play: FrozenSet[str]
  stated_prefs: Tuple[str, ...] = ()
  answers: Tuple[Tuple[str, str], ...] = ()
  recent_actions: Tuple[ActionInstance, ...] = ()

  def with_answer(self, question: str, phrase: str, answer: str) -> InteractionSummary:
    return InteractionSummary(
      self.likely_dish,
      self.phase,
      self.items_in_play,
      self.stated_prefs + (phrase,),
      self.answers + ((question, answer),),
      self.recent_actions,
    )

  def render(self) -> str:
    """One line of text, used as judge context."""
    parts = [
      f'likely dish: {self.likely_dish or "unknown"}',
      f'phase: {self.phase}',
      'items: ' + (', '.join(sorted(self.items_in_play)) or 'none'),
      'preferences: ' + (', '.join(self.stated_prefs) or 'none'),
    ]
    if len(self.answers) > 0:
      parts.append('answers: ' + ', '.join(f'{q} {a}' for q, a in self.answers))
    parts.append('recent: ' + (' '.join(a.render() for a in self.recent_actions) or 'none'))
    return '; '.join(parts)


def _items_touched(action: ActionInstance) -> List[str]:
  if action.verb == 'collect_water':
    return ['water']
  if action.verb in ('gather', 'pour', 'blend') and action.item is not None:
    return [action.item]
  return []


def _phase(actions: Sequence[ActionInstance]) -> int:
  """Phase index from how many gathered items have gone into a container. Serving ends it."""
  if any(a.verb == 'serve' for a in actions):
    return len(PHASES) - 1
  gathered = {item for a in actions if a.verb in ('gather', 'collect_water') for item in _items_touched(a)}
  if len(gathered) == 0:
    return 0
  processed = {a.item for a in actions if a.verb in ('pour', 'blend') and a.item in gathered}
  return bisect.bisect_right(_PHASE_BOUNDS, len(processed) / len(gathered))


def summarize(trace: EpisodeTrace, belief: Optional[GoalBelief], k: int = 5) -> InteractionSummary:
  actions = trace.actions()
  phase = _phase(actions)
  items = frozenset(item for a in actions for item in _items_touched(a))
  return InteractionSummary(
    belief.unique_argmax() if belief is not None else None,
    PHASES[phase],
    items,
    tuple(trace.stated_prefs),
    tuple(trace.answers()),
    tuple(actions[-k:]) if k > 0 else (),
  )


__all__ = [
  'GoalBelief',
  'entropy',
  'update_from_action',
  'preference_prior',
  'SequenceClassifier',
  'BigramClassifier',
  'classify_sequence',
  'resolve_by_name',
  'propose_goals',
  'PHASES',
  'InteractionSummary',
  'summarize',
]
