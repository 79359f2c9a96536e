from __future__ import annotations

from typing import *
from dataclasses import dataclass, field, replace
import itertools
import re

from sous.errors import IllegalActionError, WrongTurnError, SousError


HUMAN = 'human'
ROBOT = 'robot'
AGENTS = (HUMAN, ROBOT)

VERBS = (
  'gather',
  'pour',
  'mix',
  'cook',
  'turn_on',
  'collect_water',
  'blend',
  'reduce_heat',
  'serve',
)

PARAM_TYPES = ('item', 'container', 'appliance', 'location')

WILDCARD = '*'

Literal = Tuple[str, ...]


def other_agent(agent: str) -> str:
  return ROBOT if agent == HUMAN else HUMAN

def lit(predicate: str, *args: str) -> Literal:
  return (predicate,) + args

def format_literal(literal: Literal) -> str:
  return literal[0] + '(' + ','.join(literal[1:]) + ')'


_ACTION_RE = re.compile(r'^\s*([a-z_]+)\s*\(([^()]*)\)\s*$')


@dataclass(frozen=True)
class ActionInstance:
  verb: str
  item: Optional[str] = None
  destination: Optional[str] = None
  agent: str = HUMAN

  def __post_init__(self) -> None:
    if self.verb not in VERBS:
      raise ValueError(f'Unknown verb {self.verb!r}')
    if self.verb == 'pour' and self.destination is None:
      raise ValueError('pour requires a destination')
    if self.verb != 'pour' and self.destination is not None:
      raise ValueError(f'{self.verb} takes no destination')
    if self.agent not in AGENTS:
      raise ValueError(f'Unknown agent {self.agent!r}')

  @property
  def args(self) -> Tuple[str, ...]:
    return tuple(a for a in (self.item, self.destination) if a is not None)

  def with_agent(self, agent: str) -> ActionInstance:
    return replace(self, agent=agent)

  def without_agent(self) -> ActionInstance:
    return replace(self, agent=HUMAN)

  def sort_key(self) -> Tuple[str, str, str, str]:
    return (self.verb, self.item or '', self.destination or '', self.agent)

  def text(self) -> str:
    return self.verb + '(' + ','.join(self.args) + ')'

  def render(self) -> str:
    return self.verb + '(' + ','.join(self.args + (self.agent,)) + ')'

  def __str__(self) -> str:
    return self.render()

  @staticmethod
  def parse(text: str, agent: Optional[str] = None) -> ActionInstance:
    """Parse `verb(args...)`, optionally ending in an agent name."""
    match = _ACTION_RE.match(text)
    if match is None:
      raise ValueError(f'Not an action: {text!r}')
    verb = match.group(1)
    args = [a.strip() for a in match.group(2).split(',') if a.strip() != '']
    parsed_agent = agent or HUMAN
    if len(args) > 0 and args[-1] in AGENTS:
      parsed_agent = args.pop()
    if len(args) > 2:
      raise ValueError(f'Too many arguments: {text!r}')
    return ActionInstance(
      verb,
      args[0] if len(args) > 0 else None,
      args[1] if len(args) > 1 else None,
      parsed_agent,
    )


@dataclass(frozen=True)
class Condition:
  positive: bool
  predicate: str
  args: Tuple[str, ...]

  def __str__(self) -> str:
    return ('' if self.positive else '!') + self.predicate + '(' + ','.join(self.args) + ')'


@dataclass(frozen=True)
class Param:
  name: str
  type: str


@dataclass(frozen=True)
class Rule:
  verb: str
  params: Tuple[Param, ...]
  pre: Tuple[Condition, ...]
  eff: Tuple[Condition, ...]


@dataclass(frozen=True)
class GroundRule:
  """A rule with its parameters bound, compiled to set operations."""
  action: ActionInstance
  pre_pos: FrozenSet[Literal]
  pre_neg: FrozenSet[Literal]
  adds: FrozenSet[Literal]
  deletes: FrozenSet[Literal]
  wildcard_deletes: Tuple[Literal, ...]
  completion: FrozenSet[Literal]

  def applicable(self, literals: FrozenSet[Literal]) -> bool:
    return self.pre_pos <= literals and self.pre_neg.isdisjoint(literals)

  def apply(self, literals: FrozenSet[Literal]) -> FrozenSet[Literal]:
    result = set(literals)
    result -= self.deletes
    for pattern in self.wildcard_deletes:
      for literal in list(result):
        if _matches(pattern, literal):
          result.discard(literal)
    result |= self.adds
    return frozenset(result)


def _matches(pattern: Literal, literal: Literal) -> bool:
  if len(pattern) != len(literal):
    return False
  return all(p == WILDCARD or p == l for p, l in zip(pattern, literal))


@dataclass
class DomainSpec:
  items: List[str]
  containers: List[str]
  appliances: List[str]
  locations: List[str]
  predicates: Dict[str, int]
  families: Dict[str, List[str]]
  initial: FrozenSet[Literal]
  rules: Dict[str, Rule]
  location_predicate: str = 'at'
  terminal_predicate: str = 'served'

  grounded: Dict[ActionInstance, GroundRule] = field(init=False, repr=False, compare=False)
  universe: List[ActionInstance] = field(init=False, repr=False, compare=False)

  def __post_init__(self) -> None:
    self.grounded = {}
    for verb in sorted(self.rules):
      rule = self.rules[verb]
      domains = [self.identifiers_of(p.type) for p in rule.params]
      for binding in itertools.product(*domains):
        action = ActionInstance(
          verb,
          binding[0] if len(binding) > 0 else None,
          binding[1] if len(binding) > 1 else None,
        )
        self.grounded[action] = _ground_rule(rule, action, binding, self.location_predicate)
    self.universe = sorted(self.grounded, key=ActionInstance.sort_key)

  def identifiers_of(self, type_: str) -> List[str]:
    return {
      'item': self.items,
      'container': self.containers,
      'appliance': self.appliances,
      'location': self.locations,
    }[type_]

  def declared(self) -> Set[str]:
    return set(self.items) | set(self.containers) | set(self.appliances) | set(self.locations)

  def ground(self, action: ActionInstance) -> GroundRule:
    ground = self.grounded.get(action.without_agent())
    if ground is None:
      raise IllegalActionError(f'{action.text()} is not a ground action of this domain')
    return ground


def _ground_rule(
  rule: Rule,
  action: ActionInstance,
  binding: Tuple[str, ...],
  location_predicate: str,
) -> GroundRule:
  env = {p.name: value for p, value in zip(rule.params, binding)}
  def bind(c: Condition) -> Literal:
    return (c.predicate,) + tuple(env.get(a, a) for a in c.args)
  eff_del = [bind(c) for c in rule.eff if not c.positive]
  adds = frozenset(bind(c) for c in rule.eff if c.positive)
  persistent = frozenset(l for l in adds if l[0] != location_predicate)
  return GroundRule(
    action = action,
    pre_pos = frozenset(bind(c) for c in rule.pre if c.positive),
    pre_neg = frozenset(bind(c) for c in rule.pre if not c.positive),
    adds = adds,
    deletes = frozenset(l for l in eff_del if WILDCARD not in l),
    wildcard_deletes = tuple(l for l in eff_del if WILDCARD in l),
    completion = persistent if len(persistent) > 0 else adds,
  )


@dataclass(frozen=True)
class WorldState:
  literals: FrozenSet[Literal]
  turn: str = HUMAN
  step_index: int = 0

  def holds(self, predicate: str, *args: str) -> bool:
    return (predicate,) + args in self.literals

  def describe(self) -> List[str]:
    return sorted(format_literal(l) for l in self.literals)


def initial_state(spec: DomainSpec, turn: str = HUMAN) -> WorldState:
  return WorldState(spec.initial, turn, 0)


def is_terminal(state: WorldState, spec: DomainSpec) -> bool:
  return any(l[0] == spec.terminal_predicate for l in state.literals)


def legal_actions(
  state: WorldState,
  spec: DomainSpec,
  agent: str,
  among: Optional[Iterable[ActionInstance]] = None,
) -> List[ActionInstance]:
  """Ground actions whose preconditions hold, sorted by verb then arguments.

  `among` restricts the check to a subset of the ground-action universe.
  """
  if is_terminal(state, spec):
    return []
  if among is None:
    candidates: Iterable[ActionInstance] = spec.universe
  else:
    candidates = sorted({a.without_agent() for a in among}, key=ActionInstance.sort_key)
  result = []
  for action in candidates:
    ground = spec.grounded.get(action)
    if ground is not None and ground.applicable(state.literals):
      result.append(action.with_agent(agent))
  return result


def is_legal(state: WorldState, action: ActionInstance, spec: DomainSpec) -> bool:
  ground = spec.grounded.get(action.without_agent())
  return ground is not None and not is_terminal(state, spec) and ground.applicable(state.literals)


def step(state: WorldState, action: ActionInstance, spec: DomainSpec) -> WorldState:
  if action.agent != state.turn:
    raise WrongTurnError(f'{action} attempted on {state.turn} turn')
  if not is_legal(state, action, spec):
    raise IllegalActionError(f'{action} is not legal in the current state')
  literals = spec.ground(action).apply(state.literals)
  return WorldState(literals, other_agent(state.turn), state.step_index + 1)


def pass_turn(state: WorldState) -> WorldState:
  """The wait pseudo-action: hand the turn over without changing the world."""
  return WorldState(state.literals, other_agent(state.turn), state.step_index + 1)


def completion_literals(action: ActionInstance, spec: DomainSpec) -> FrozenSet[Literal]:
  """The lasting facts an action leaves behind, ignoring where things sit."""
  return spec.ground(action).completion

def is_completed(action: ActionInstance, state: WorldState, spec: DomainSpec) -> bool:
  return completion_literals(action, spec) <= state.literals


def validate_state(state: WorldState, spec: DomainSpec) -> None:
  """Raise if an item has no single location or a family holds twice."""
  locations: Dict[str, int] = {}
  for literal in state.literals:
    if literal[0] == spec.location_predicate and literal[1] in spec.items:
      locations[literal[1]] = locations.get(literal[1], 0) + 1
  for item in spec.items:
    if locations.get(item, 0) != 1:
      raise SousError(f'Item {item} has {locations.get(item, 0)} locations')
  for family, members in spec.families.items():
    held: Dict[Tuple[str, ...], int] = {}
    for literal in state.literals:
      if literal[0] in members:
        held[literal[1:]] = held.get(literal[1:], 0) + 1
    for args, count in held.items():
      if count > 1:
        raise SousError(f'{",".join(args)} holds {count} {family} conditions')


__all__ = [
  'HUMAN',
  'ROBOT',
  'AGENTS',
  'VERBS',
  'Literal',
  'lit',
  'format_literal',
  'other_agent',
  'ActionInstance',
  'Condition',
  'Param',
  'Rule',
  'GroundRule',
  'DomainSpec',
  'WorldState',
  'initial_state',
  'is_terminal',
  'legal_actions',
  'is_legal',
  'step',
  'pass_turn',
  'completion_literals',
  'is_completed',
  'validate_state',
]
