from __future__ import annotations

from typing import *
from dataclasses import dataclass, field
import itertools

import numpy as np

import sous.log as log
from sous.errors import CyclicPrecedenceError, InexecutableLinearizationError, UnknownSourceError
from sous.util import topological_sort
from sous.world import (
  ActionInstance, DomainSpec, WorldState, initial_state, is_completed, is_terminal,
)


RECIPE_TYPES = ('Pasta', 'Stew', 'Salad', 'Oatmeal', 'Smoothie', 'Parfait')

DEFAULT_CAP = 200

ActionSequence = Tuple[ActionInstance, ...]


@dataclass(frozen=True)
class Goal:
  id: str
  name: str
  recipe_type: str

  def __str__(self) -> str:
    return self.id


@dataclass(frozen=True)
class Stage:
  kind: str # clique | chain
  actions: Tuple[ActionInstance, ...]


@dataclass(frozen=True)
class TaskNetwork:
  nodes: Tuple[ActionInstance, ...]
  chains: Tuple[Tuple[ActionInstance, ActionInstance], ...]
  cliques: Tuple[Tuple[ActionInstance, ...], ...]

  @staticmethod
  def from_stages(stages: Sequence[Stage]) -> TaskNetwork:
    """Stages run in order; members of a clique stage are unordered."""
    nodes: List[ActionInstance] = []
    chains: List[Tuple[ActionInstance, ActionInstance]] = []
    cliques: List[Tuple[ActionInstance, ...]] = []
    previous: Tuple[ActionInstance, ...] = ()
    for stage in stages:
      nodes.extend(stage.actions)
      for a in previous:
        for b in stage.actions[:1] if stage.kind == 'chain' else stage.actions:
          chains.append((a, b))
      if stage.kind == 'chain':
        chains.extend(zip(stage.actions, stage.actions[1:]))
        previous = stage.actions[-1:]
      else:
        cliques.append(stage.actions)
        previous = stage.actions
    return TaskNetwork(tuple(nodes), tuple(chains), tuple(cliques))

  def predecessors(self) -> Dict[ActionInstance, List[ActionInstance]]:
    result: Dict[ActionInstance, List[ActionInstance]] = {node: [] for node in self.nodes}
    for a, b in self.chains:
      result[b].append(a)
    return result

  def validate(self) -> None:
    if len(set(self.nodes)) != len(self.nodes):
      raise ValueError('Task network repeats a step')
    members = [a for clique in self.cliques for a in clique]
    if len(set(members)) != len(members):
      raise ValueError('A step appears in more than one clique')
    for a, b in self.chains:
      if a not in self.nodes or b not in self.nodes:
        raise ValueError(f'Chain {a.text()} -> {b.text()} references an unknown step')
    if topological_sort(self.predecessors()) is None:
      raise CyclicPrecedenceError('Task network precedence has a cycle')


class _Counter:
  """Counts linear extensions by memoising over completed step sets."""

  def __init__(self, net: TaskNetwork) -> None:
    self.nodes = net.nodes
    preds = net.predecessors()
    self.index = {node: i for i, node in enumerate(self.nodes)}
    self.pred_masks = [
      sum(1 << self.index[p] for p in preds[node]) for node in self.nodes
    ]
    self.full = (1 << len(self.nodes)) - 1
    self.memo: Dict[int, int] = {self.full: 1}

  def available(self, done: int) -> List[int]:
    return [
      i for i in range(len(self.nodes))
        if not done & (1 << i) and self.pred_masks[i] & done == self.pred_masks[i]
    ]

  def count(self, done: int = 0) -> int:
    cached = self.memo.get(done)
    if cached is not None:
      return cached
    total = sum(self.count(done | (1 << i)) for i in self.available(done))
    self.memo[done] = total
    return total


def count_linearizations(net: TaskNetwork) -> int:
  net.validate()
  return _Counter(net).count()


def linearizations(
  net: TaskNetwork,
  cap: Optional[int] = DEFAULT_CAP,
  seed: int = 0,
) -> List[ActionSequence]:
  """Distinct topological orders of a task network.

  All orders are returned, in declaration order, when there are at most
  `cap` of them (or `cap` is None). Otherwise `cap` distinct orders are drawn
  uniformly at random with the given seed.
  """
  net.validate()
  if cap is not None and cap < 1:
    raise ValueError('cap must be positive')
  counter = _Counter(net)
  total = counter.count()
  if cap is None or total <= cap:
    return _enumerate(counter)

  rng = np.random.default_rng(seed)
  seen: Set[ActionSequence] = set()
  result: List[ActionSequence] = []
  while len(result) < cap:
    order = _sample(counter, rng)
    if order not in seen:
      seen.add(order)
      result.append(order)
  return result


def _enumerate(counter: _Counter) -> List[ActionSequence]:
  result: List[ActionSequence] = []
  def visit(done: int, prefix: List[int]) -> None:
    if done == counter.full:
      result.append(tuple(counter.nodes[i] for i in prefix))
      return
    for i in counter.available(done):
      prefix.append(i)
      visit(done | (1 << i), prefix)
      prefix.pop()
  visit(0, [])
  return result


def _sample(counter: _Counter, rng: np.random.Generator) -> ActionSequence:
  done = 0
  order = []
  while done != counter.full:
    options = counter.available(done)
    weights = np.array([counter.count(done | (1 << i)) for i in options], dtype=float)
    choice = options[int(rng.choice(len(options), p=weights / weights.sum()))]
    order.append(counter.nodes[choice])
    done |= 1 << choice
  return tuple(order)


@dataclass
class PreferenceMap:
  preferences: List[str]
  goal_to_prefs: Dict[str, FrozenSet[str]]
  goals: Dict[str, Goal] = field(default_factory=dict)

  def __post_init__(self) -> None:
    self._by_pref: Dict[str, List[str]] = {p: [] for p in self.preferences}
    for goal_id in sorted(self.goal_to_prefs):
      for pref in self.goal_to_prefs[goal_id]:
        if pref not in self._by_pref:
          raise UnknownSourceError(f'Goal {goal_id} maps to undeclared preference {pref!r}')
        self._by_pref[pref].append(goal_id)

  def validate(self) -> None:
    for goal_id, prefs in self.goal_to_prefs.items():
      if len(prefs) == 0:
        raise ValueError(f'Goal {goal_id} has no preferences')
    for pref, goal_ids in self._by_pref.items():
      if len(goal_ids) == 0:
        raise ValueError(f'Preference {pref!r} maps to no goal')

  def goals_for(self, pref: str) -> List[str]:
    if pref not in self._by_pref:
      raise UnknownSourceError(f'Unknown preference {pref!r}')
    return self._by_pref[pref]

  def intersecting_pairs(self) -> List[Tuple[str, str]]:
    return [
      (a, b) for a, b in itertools.combinations(self.preferences, 2)
        if not set(self._by_pref[a]).isdisjoint(self._by_pref[b])
    ]

  def count_intersecting_pairs(self) -> int:
    return len(self.intersecting_pairs())


@dataclass
class GoalBank:
  goals: List[Goal]
  networks: Dict[str, TaskNetwork]
  prefs: PreferenceMap
  version: int = 1

  def __post_init__(self) -> None:
    self._by_id = {goal.id: goal for goal in self.goals}

  def goal(self, goal_id: str) -> Goal:
    goal = self._by_id.get(goal_id)
    if goal is None:
      raise UnknownSourceError(f'Unknown goal {goal_id!r}')
    return goal

  def __contains__(self, goal_id: object) -> bool:
    return goal_id in self._by_id

  def ids(self) -> List[str]:
    return [goal.id for goal in self.goals]

  def subset(self, goal_ids: Iterable[str]) -> GoalBank:
    keep = [self.goal(goal_id) for goal_id in goal_ids]
    kept = {goal.id for goal in keep}
    prefs = PreferenceMap(
      [p for p in self.prefs.preferences
        if any(p in self.prefs.goal_to_prefs[g] for g in kept)],
      {g: self.prefs.goal_to_prefs[g] for g in kept},
      {g: self.prefs.goals[g] for g in kept if g in self.prefs.goals},
    )
    return GoalBank(keep, {g: self.networks[g] for g in kept}, prefs, self.version)


class PolicyBank:
  """Stored linearizations per goal, with the statistics derived from them."""

  def __init__(self, goals: List[Goal], sequences: Dict[str, List[ActionSequence]]) -> None:
    self.goals = goals
    self.sequences = sequences
    self._frequency: Dict[str, Dict[ActionInstance, float]] = {}
    self._must_precede: Dict[str, Dict[ActionInstance, FrozenSet[ActionInstance]]] = {}
    for goal in goals:
      seqs = sequences[goal.id]
      counts: Dict[ActionInstance, int] = {}
      for seq in seqs:
        for action in set(seq):
          counts[action] = counts.get(action, 0) + 1
      self._frequency[goal.id] = {a: c / len(seqs) for a, c in counts.items()}
      self._must_precede[goal.id] = _must_precede(seqs)

  def ids(self) -> List[str]:
    return [goal.id for goal in self.goals]

  def frequency(self, goal_id: str) -> Dict[ActionInstance, float]:
    if goal_id not in self._frequency:
      raise UnknownSourceError(f'Unknown goal {goal_id!r}')
    return self._frequency[goal_id]

  def steps(self, goal_id: str) -> List[ActionInstance]:
    return list(self.frequency(goal_id))

  def must_precede(self, goal_id: str) -> Dict[ActionInstance, FrozenSet[ActionInstance]]:
    """For each step, the steps that come before it in every stored sequence."""
    if goal_id not in self._must_precede:
      raise UnknownSourceError(f'Unknown goal {goal_id!r}')
    return self._must_precede[goal_id]

  def frontier(self, goal_id: str, state: WorldState, spec: DomainSpec) -> List[ActionInstance]:
    """Uncompleted steps of a goal whose required predecessors are all completed."""
    precede = self.must_precede(goal_id)
    completed = {a for a in precede if is_completed(a, state, spec)}
    return [
      a for a in precede
        if a not in completed and precede[a] <= completed
    ]

  def ground_truth_len(self, goal_id: str) -> int:
    return len(self.sequences[goal_id][0])


def _must_precede(seqs: List[ActionSequence]) -> Dict[ActionInstance, FrozenSet[ActionInstance]]:
  result: Dict[ActionInstance, Set[ActionInstance]] = {}
  for seq in seqs:
    seen: Set[ActionInstance] = set()
    for action in seq:
      if action in result:
        result[action] &= seen
      else:
        result[action] = set(seen)
      seen.add(action)
  return {a: frozenset(s) for a, s in result.items()}


def replay(
  goal_id: str,
  seq: ActionSequence,
  spec: DomainSpec,
  start: Optional[WorldState] = None,
) -> WorldState:
  literals = (start or initial_state(spec)).literals
  for i, action in enumerate(seq):
    ground = spec.grounded.get(action.without_agent())
    if ground is None or not ground.applicable(literals):
      raise InexecutableLinearizationError(goal_id, i, action.text())
    literals = ground.apply(literals)
  return WorldState(literals, (start or initial_state(spec)).turn, len(seq))


def build_policy_bank(
  bank: GoalBank,
  spec: DomainSpec,
  cap: Optional[int] = DEFAULT_CAP,
  seed: int = 0,
) -> PolicyBank:
  sequences: Dict[str, List[ActionSequence]] = {}
  for goal in bank.goals:
    net = bank.networks[goal.id]
    seqs = linearizations(net, cap, seed)
    for seq in seqs:
      final = replay(goal.id, seq, spec)
      if not is_terminal(final, spec) or seq[-1].verb != 'serve':
        raise InexecutableLinearizationError(goal.id, len(seq) - 1, seq[-1].text())
    sequences[goal.id] = seqs
    log.debug('Policy bank:', goal.id, len(seqs), 'sequences of length', len(seqs[0]))
  log.info(f'Built policy bank for {len(bank.goals)} goals')
  return PolicyBank(list(bank.goals), sequences)


def sample_script(policy: PolicyBank, goal_id: str, seed: int) -> ActionSequence:
  seqs = policy.sequences[goal_id]
  rng = np.random.default_rng(seed)
  return seqs[int(rng.integers(len(seqs)))]


@dataclass(frozen=True)
class ExperimentSpec:
  preference_pair: Tuple[str, str]
  true_goal: Goal
  seed: int

  @property
  def id(self) -> str:
    return f'{self.preference_pair[0]}+{self.preference_pair[1]}'


def generate_experiments(prefs: PreferenceMap, seed: int) -> List[ExperimentSpec]:
  """One experiment per unordered preference pair whose goal sets overlap."""
  rng = np.random.default_rng(seed)
  experiments = []
  for a, b in prefs.intersecting_pairs():
    shared = sorted(set(prefs.goals_for(a)) & set(prefs.goals_for(b)))
    goal_id = shared[int(rng.integers(len(shared)))]
    goal = prefs.goals.get(goal_id) or Goal(goal_id, goal_id, '')
    experiments.append(ExperimentSpec((a, b), goal, int(rng.integers(2**31))))
  log.info(f'Generated {len(experiments)} experiments')
  return experiments


__all__ = [
  'RECIPE_TYPES',
  'DEFAULT_CAP',
  'Goal',
  'Stage',
  'TaskNetwork',
  'count_linearizations',
  'linearizations',
  'PreferenceMap',
  'GoalBank',
  'PolicyBank',
  'replay',
  'build_policy_bank',
  'sample_script',
  'ExperimentSpec',
  'generate_experiments',
]
