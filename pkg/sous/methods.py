from __future__ import annotations

from typing import *
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
import dataclasses
import itertools
import json
import os

import numpy as np

import sous.config as config
import sous.log as log
from sous.attractor import AttractorField, ScoreTable, ScoreWeights, field_from_goals
from sous.belief import (
  GoalBelief, InteractionSummary, classify_sequence, preference_prior, propose_goals,
  resolve_by_name, summarize, update_from_action,
)
from sous.errors import ConfigError
from sous.goal_bank import Goal
from sous.inquiry import CostSchedule, Question, apply_answer, decide
from sous.kitchen import Kitchen
from sous.planner import ActionFilter, PlannerConfig, choose_robot_action, expand, ranked_actions
from sous.trace import EpisodeTrace
from sous.world import ActionInstance, WorldState, ROBOT, legal_actions, step


ROBOTS = ('planning', 'passive', 'judge-only', 'actions-only')
GOAL_SOURCES = ('bank', 'judge')
FIELD_SOURCES = ('policy-bank', 'judge')

DIVERGENCE_WEIGHT = 0.5
JUDGE_PRIOR_FLOOR = 0.01
LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class MethodConfig:
  name: str
  robot: str = 'planning'
  goals: str = 'bank'
  fields: str = 'policy-bank'
  classifier: bool = True
  policy_filter: bool = True
  preferences: bool = True
  questions: bool = False
  horizon: int = 2
  top_k: Optional[int] = 4
  w_goal: float = 1.0
  w_pref: float = 1.0
  include_human_terms: bool = True
  epsilon: float = 0.01
  plausible_floor: float = 0.01
  max_goals: int = 8
  answer_noise: float = 0.0
  reveal_at: Optional[int] = None
  cost: CostSchedule = CostSchedule()

  def __post_init__(self) -> None:
    if self.robot not in ROBOTS:
      raise ConfigError(f'{self.name}: unknown robot {self.robot!r}, expected one of {", ".join(ROBOTS)}')
    if self.goals not in GOAL_SOURCES:
      raise ConfigError(f'{self.name}: unknown goal source {self.goals!r}')
    if self.fields not in FIELD_SOURCES:
      raise ConfigError(f'{self.name}: unknown field source {self.fields!r}')
    if self.goals == 'judge' and (self.classifier or self.policy_filter):
      raise ConfigError(f'{self.name}: the classifier and policy filter need the goal bank')
    if self.epsilon < 0 or not 0 <= self.plausible_floor < 1:
      raise ConfigError(f'{self.name}: epsilon and plausible_floor are out of range')
    if self.max_goals < 1:
      raise ConfigError(f'{self.name}: max_goals must be positive')
    if not 0 <= self.answer_noise <= 1:
      raise ConfigError(f'{self.name}: answer_noise must be a probability')
    try:
      self.planner()
    except ValueError as e:
      raise ConfigError(f'{self.name}: {e}') from e

  def planner(self) -> PlannerConfig:
    return PlannerConfig(
      self.horizon,
      self.top_k,
      ScoreWeights(self.w_goal, self.w_pref),
      self.include_human_terms,
    )

  def with_overrides(
    self,
    horizon: Optional[int] = None,
    top_k: Optional[int] = None,
    c_max: Optional[float] = None,
  ) -> MethodConfig:
    changes: Dict[str, Any] = {}
    if horizon is not None:
      changes['horizon'] = horizon
    if top_k is not None:
      changes['top_k'] = top_k
    if c_max is not None:
      try:
        changes['cost'] = replace(self.cost, c_max=c_max)
      except ValueError as e:
        raise ConfigError(f'{self.name}: {e}') from e
    return replace(self, **changes)


_KEYS = {f.name for f in dataclasses.fields(MethodConfig)}
_COST_KEYS = ('c_min', 'c_max', 't_q')


def method_from_json(data: Dict[str, Any], origin: str) -> MethodConfig:
  if not isinstance(data, dict):
    raise ConfigError(f'{origin}: a method config must be a JSON object')
  unknown = sorted(set(data) - _KEYS)
  if len(unknown) > 0:
    raise ConfigError(f'{origin}: unknown method keys {", ".join(unknown)}')
  values = dict(data)
  values.setdefault('name', os.path.splitext(os.path.basename(origin))[0])
  cost = values.pop('cost', {})
  if not isinstance(cost, dict) or len(set(cost) - set(_COST_KEYS)) > 0:
    raise ConfigError(f'{origin}: "cost" takes only {", ".join(_COST_KEYS)}')
  try:
    values['cost'] = CostSchedule(**cost)
    return MethodConfig(**values)
  except (TypeError, ValueError) as e:
    raise ConfigError(f'{origin}: {e}') from e


def load_method(name_or_path: str) -> MethodConfig:
  """Load a method from a JSON path, or by name from the bundled methods."""
  path = name_or_path if os.path.exists(name_or_path) else config.asset('methods', name_or_path + '.json')
  if not os.path.exists(path):
    raise ConfigError(f'No method named {name_or_path!r} (available: {", ".join(bundled_methods())})')
  with open(path, 'r') as f:
    try:
      data = json.load(f)
    except ValueError as e:
      raise ConfigError(f'{path}: {e}') from e
  return method_from_json(data, path)


def bundled_methods() -> List[str]:
  directory = config.asset('methods')
  if not os.path.isdir(directory):
    return []
  return sorted(os.path.splitext(name)[0] for name in os.listdir(directory) if name.endswith('.json'))


class Robot(ABC):
  """One episode's robot.

  The episode calls `observe` after every human move, then on the robot's
  turn `ask` (and `hear` if a question was asked) and `act`. `t` counts
  robot turns and is the clock of the cost schedule.
  """

  def __init__(self, kitchen: Kitchen, cfg: MethodConfig) -> None:
    self.kitchen = kitchen
    self.cfg = cfg
    self.belief: Optional[GoalBelief] = None
    self.summary: Optional[InteractionSummary] = None
    self.sched = cfg.cost
    self.asked: Set[str] = set()
    self.answers: List[Tuple[Question, str]] = []
    self.answer_phrases: Dict[str, Tuple[Question, str]] = {}

  @abstractmethod
  def infer(self, state: WorldState, trace: EpisodeTrace) -> GoalBelief: ...

  def observe(self, state: WorldState, trace: EpisodeTrace) -> GoalBelief:
    log.timer.begin('summarize')
    self.summary = summarize(trace, self.belief)
    log.timer.end()
    log.timer.begin('infer')
    self.belief = self.infer(state, trace)
    log.timer.end()
    return self.belief

  def current(self) -> GoalBelief:
    assert self.belief is not None, 'observe must run before the robot acts'
    return self.belief

  def ask(self, state: WorldState, trace: EpisodeTrace, t: int) -> Optional[Question]:
    return None

  def hear(self, q: Question, answer: str, t: int) -> InteractionSummary:
    assert self.summary is not None
    self.belief, self.summary = apply_answer(self.current(), self.summary, q, answer)
    self.sched = self.sched.asked(t)
    self.asked.add(q.id)
    self.answers.append((q, answer))
    self.answer_phrases[q.phrase(answer)] = (q, answer)
    return self.summary

  def act(self, state: WorldState, trace: EpisodeTrace) -> Optional[ActionInstance]:
    return None

  def opening_prefs(self, trace: EpisodeTrace) -> List[str]:
    """Stated preferences that did not come from answers."""
    return [p for p in trace.stated_prefs if p not in self.answer_phrases]

  def plausible(self) -> List[str]:
    belief = self.current()
    return belief.support(self.cfg.plausible_floor) or [belief.argmax()]

  def ready_to_serve(self, state: WorldState) -> Set[ActionInstance]:
    """Serve steps that come next for some plausible goal; empty without the goal bank."""
    if self.cfg.goals == 'judge':
      return set()
    policy = self.kitchen.policy
    ready: Set[ActionInstance] = set()
    for goal_id in self.plausible():
      ready.update(a for a in policy.frontier(goal_id, state, self.kitchen.spec) if a.verb == 'serve')
    return ready

  def serve_guard(self) -> ActionFilter:
    """Robot moves that leave serving alone until a plausible dish is finished."""
    universe = self.kitchen.spec.universe

    def allowed(state: WorldState, agent: str) -> Optional[Iterable[ActionInstance]]:
      if agent != ROBOT:
        return None
      ready = self.ready_to_serve(state)
      return [a for a in universe if a.verb != 'serve' or a in ready]
    return allowed

  def _open_belief(self, summary: InteractionSummary) -> GoalBelief:
    return propose_goals(
      summary,
      self.kitchen.judge,
      self.belief,
      self.cfg.max_goals,
      resolve_by_name(self.kitchen.bank.goals),
    )


class PlanningRobot(Robot):
  """Infers the goal, asks when uncertain enough and plans over a short horizon."""

  def __init__(self, kitchen: Kitchen, cfg: MethodConfig) -> None:
    super().__init__(kitchen, cfg)
    self.goals: List[Goal] = list(kitchen.bank.goals)
    self.action_belief: Optional[GoalBelief] = None
    self.seen_actions = 0
    self.derived_fields: Dict[str, AttractorField] = {}

  def infer(self, state: WorldState, trace: EpisodeTrace) -> GoalBelief:
    if self.cfg.goals == 'judge':
      assert self.summary is not None
      return self._open_belief(self.summary)
    return self._closed_belief(trace)

  def _closed_belief(self, trace: EpisodeTrace) -> GoalBelief:
    n = len(self.goals)
    log_weights = np.zeros(n)

    if self.cfg.classifier:
      history = [a.without_agent() for a in trace.actions()]
      evidence = classify_sequence(history, self.kitchen.policy)
    else:
      if self.action_belief is None:
        self.action_belief = GoalBelief.uniform(self.goals)
      fields = self.kitchen.goal_fields(self.goals, self.cfg.fields)
      human = trace.human_actions()
      for action in human[self.seen_actions:]:
        self.action_belief = update_from_action(self.action_belief, action, fields, self.cfg.epsilon)
      self.seen_actions = len(human)
      evidence = self.action_belief
    log_weights += [np.log(max(evidence.prob(g.id), LOG_FLOOR)) for g in self.goals]

    if self.cfg.preferences:
      prior = self._prior(self.opening_prefs(trace))
      log_weights += [np.log(max(prior.prob(g.id), LOG_FLOOR)) for g in self.goals]

    for q, answer in self.answers:
      log_weights += [np.log(max(q.row(g.id)[answer], LOG_FLOOR)) for g in self.goals]

    weights = np.exp(log_weights - log_weights.max())
    return GoalBelief.from_weights(self.goals, {g.id: float(w) for g, w in zip(self.goals, weights)})

  def _prior(self, stated: Sequence[str]) -> GoalBelief:
    if self.cfg.fields == 'policy-bank':
      return preference_prior(self.goals, stated, self.kitchen.bank.prefs)
    # Judge prior: each statement weighs goals by their judged relevance.
    names = [g.name for g in self.goals]
    weights = {g.id: 1.0 for g in self.goals}
    for pref in stated:
      scores = self.kitchen.judge.score(pref, names, '')
      for g in self.goals:
        weights[g.id] *= JUDGE_PRIOR_FLOOR + scores[g.name]
    return GoalBelief.from_weights(self.goals, weights)

  def ask(self, state: WorldState, trace: EpisodeTrace, t: int) -> Optional[Question]:
    if not self.cfg.questions:
      return None
    decision = decide(self.current(), self.sched, t, self._candidates, self.asked)
    return decision.chosen if decision.ask else None

  def _candidates(self) -> List[Question]:
    belief = self.current()
    if self.cfg.goals == 'bank' and self.cfg.fields == 'policy-bank':
      return self.kitchen.closed_questions.candidates(self.plausible())
    goals = list(belief.candidates)
    return self.kitchen.open_questions().candidates(goals, self.kitchen.goal_fields(goals, self.cfg.fields))

  def preference_fields(self, trace: EpisodeTrace) -> List[AttractorField]:
    if not self.cfg.preferences:
      return []
    result = []
    for phrase in dict.fromkeys(trace.stated_prefs):
      pref_field = self._phrase_field(phrase)
      if pref_field is not None:
        result.append(pref_field)
    return result

  def _phrase_field(self, phrase: str) -> Optional[AttractorField]:
    if self.cfg.fields == 'judge':
      return self.kitchen.judge_field(phrase)
    known = self.kitchen.preference_field(phrase)
    if known is not None:
      return known
    if phrase not in self.answer_phrases:
      return None
    if phrase not in self.derived_fields:
      q, answer = self.answer_phrases[phrase]
      goal_ids = [g for g in q.goals_answering(answer) if g in self.kitchen.policy_fields]
      if len(goal_ids) == 0:
        return None
      self.derived_fields[phrase] = field_from_goals(phrase, goal_ids, self.kitchen.policy)
    return self.derived_fields[phrase]

  def frontier_filter(self) -> Callable[[WorldState, str], Optional[Iterable[ActionInstance]]]:
    plausible = self.plausible()
    policy = self.kitchen.policy
    spec = self.kitchen.spec

    def allowed(state: WorldState, agent: str) -> Iterable[ActionInstance]:
      actions: Set[ActionInstance] = set()
      for goal_id in plausible:
        actions.update(policy.frontier(goal_id, state, spec))
      return actions
    return allowed

  def act(self, state: WorldState, trace: EpisodeTrace) -> Optional[ActionInstance]:
    belief = self.current()
    goals = list(belief.candidates)
    tree = expand(
      state,
      belief,
      self.preference_fields(trace),
      self.kitchen.goal_fields(goals, self.cfg.fields),
      self.cfg.planner(),
      self.kitchen.spec,
      self.frontier_filter() if self.cfg.policy_filter else self.serve_guard(),
    )
    return choose_robot_action(tree, self.cfg.include_human_terms)


class PassiveRobot(PlanningRobot):
  """Infers like the planning robot but never asks or acts."""

  def ask(self, state: WorldState, trace: EpisodeTrace, t: int) -> Optional[Question]:
    return None

  def act(self, state: WorldState, trace: EpisodeTrace) -> Optional[ActionInstance]:
    return None


def _jaccard_distance(a: AbstractSet[ActionInstance], b: AbstractSet[ActionInstance]) -> float:
  union = a | b
  if len(union) == 0:
    return 0.0
  return 1.0 - len(a & b) / len(union)


class ActionsOnlyRobot(PlanningRobot):
  """Reads only the action history.

  With the goal bank it scores moves by goal pull alone, plus a bonus for
  moves after which the plausible goals disagree most about what comes
  next. Without it the judge scores moves as continuations of recent actions.
  """

  def infer(self, state: WorldState, trace: EpisodeTrace) -> GoalBelief:
    if self.cfg.goals == 'judge':
      assert self.summary is not None
      actions_only = replace(self.summary, stated_prefs=(), answers=())
      return self._open_belief(actions_only)
    return self._closed_belief(trace)

  def opening_prefs(self, trace: EpisodeTrace) -> List[str]:
    return []

  def divergence(self, state: WorldState, plausible: Sequence[str]) -> float:
    if len(plausible) < 2:
      return 0.0
    policy = self.kitchen.policy
    frontiers = [frozenset(policy.frontier(g, state, self.kitchen.spec)) for g in plausible]
    pairs = list(itertools.combinations(frontiers, 2))
    return sum(_jaccard_distance(a, b) for a, b in pairs) / len(pairs)

  def act(self, state: WorldState, trace: EpisodeTrace) -> Optional[ActionInstance]:
    spec = self.kitchen.spec
    if self.cfg.goals == 'judge':
      recent = ' '.join(a.text() for a in trace.actions()[-5:]) or 'start'
      continuation = self.kitchen.judge_field(recent)
      ranked = ranked_actions(state, ROBOT, spec, continuation.of, self.cfg.top_k, self.serve_guard())
      if len(ranked) == 0 or ranked[0][1] <= 0:
        return None
      return ranked[0][0]

    belief = self.current()
    goals = list(belief.candidates)
    score = ScoreTable(belief, self.kitchen.goal_fields(goals, self.cfg.fields), [], self.cfg.planner().weights)
    ranked = ranked_actions(state, ROBOT, spec, score, self.cfg.top_k, self.serve_guard())
    if len(ranked) == 0 or ranked[0][1] <= 0:
      return None
    plausible = self.plausible()
    best: Optional[ActionInstance] = None
    best_value = -np.inf
    for action, value in ranked:
      total = value + DIVERGENCE_WEIGHT * self.divergence(step(state, action, spec), plausible)
      if total > best_value:
        best, best_value = action, total
    return best


class JudgeOnlyRobot(Robot):
  """Takes the judge's top valid action each turn, without lookahead or belief updates."""

  def infer(self, state: WorldState, trace: EpisodeTrace) -> GoalBelief:
    if self.cfg.goals == 'judge':
      assert self.summary is not None
      return self._open_belief(self.summary)
    goals = self.kitchen.bank.goals
    names = [g.name for g in goals]
    source = ', '.join(self.opening_prefs(trace)) or 'any dish'
    scores = self.kitchen.judge.score(source, names, '')
    return GoalBelief.from_weights(goals, {g.id: scores[g.name] + 1e-6 for g in goals})

  def act(self, state: WorldState, trace: EpisodeTrace) -> Optional[ActionInstance]:
    legal = legal_actions(state, self.kitchen.spec, ROBOT, self.serve_guard()(state, ROBOT))
    if len(legal) == 0:
      return None
    belief = self.current()
    parts = [belief.goal(belief.argmax()).name] + self.opening_prefs(trace)
    texts = [a.text() for a in legal]
    scores = self.kitchen.judge.score('; '.join(parts), texts, '')
    best = min(legal, key=lambda a: (-scores[a.text()], a.sort_key()))
    if scores[best.text()] <= 0:
      return None
    return best


def make_robot(kitchen: Kitchen, cfg: MethodConfig) -> Robot:
  if cfg.robot == 'passive':
    return PassiveRobot(kitchen, cfg)
  if cfg.robot == 'actions-only':
    return ActionsOnlyRobot(kitchen, cfg)
  if cfg.robot == 'judge-only':
    return JudgeOnlyRobot(kitchen, cfg)
  return PlanningRobot(kitchen, cfg)


__all__ = [
  'ROBOTS',
  'GOAL_SOURCES',
  'FIELD_SOURCES',
  'MethodConfig',
  'method_from_json',
  'load_method',
  'bundled_methods',
  'Robot',
  'PlanningRobot',
  'PassiveRobot',
  'ActionsOnlyRobot',
  'JudgeOnlyRobot',
  'make_robot',
]
