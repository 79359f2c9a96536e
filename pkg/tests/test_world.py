from typing import *
import itertools

import numpy as np
import pytest

from sous.errors import IllegalActionError, WrongTurnError
from sous.goal_bank import PolicyBank, replay
from sous.world import (
  ActionInstance, DomainSpec, HUMAN, ROBOT, VERBS, WorldState, initial_state, is_completed,
  is_legal, is_terminal, legal_actions, pass_turn, step, validate_state,
)


def random_walk(spec: DomainSpec, seed: int, length: int) -> List[WorldState]:
  rng = np.random.default_rng(seed)
  state = initial_state(spec)
  states = [state]
  for _ in range(length):
    if is_terminal(state, spec):
      break
    options = [a for a in legal_actions(state, spec, state.turn) if a.verb != 'serve']
    if len(options) == 0 or rng.random() < 0.1:
      state = pass_turn(state)
    else:
      state = step(state, options[int(rng.integers(len(options)))], spec)
    states.append(state)
  return states


def test_action_text_and_render() -> None:
  action = ActionInstance('pour', 'oats', 'bowl', ROBOT)
  assert action.text() == 'pour(oats,bowl)'
  assert action.render() == 'pour(oats,bowl,robot)'
  assert ActionInstance.parse('pour(oats, bowl, robot)') == action
  assert ActionInstance.parse('collect_water()') == ActionInstance('collect_water')


def test_action_grammar() -> None:
  with pytest.raises(ValueError):
    ActionInstance('pour', 'oats')
  with pytest.raises(ValueError):
    ActionInstance('gather', 'oats', 'bowl')
  with pytest.raises(ValueError):
    ActionInstance('fry', 'oats')
  with pytest.raises(ValueError):
    ActionInstance.parse('gather oats')


def test_bundled_domain_has_every_verb(spec: DomainSpec) -> None:
  assert sorted(spec.rules) == sorted(VERBS)
  assert 'blender' in spec.containers and 'blender' in spec.appliances


def test_initial_human_actions(spec: DomainSpec) -> None:
  actions = legal_actions(initial_state(spec), spec, HUMAN)
  assert ActionInstance('gather', 'oats', None, HUMAN) in actions
  assert ActionInstance('blend', 'oats', None, HUMAN) not in actions
  assert all(a.agent == HUMAN for a in actions)
  assert actions == sorted(actions, key=ActionInstance.sort_key)


def preconditions_hold(state: WorldState, spec: DomainSpec) -> List[ActionInstance]:
  """Legal robot actions found by checking each rule's preconditions literal by literal."""
  if any(literal[0] == spec.terminal_predicate for literal in state.literals):
    return []
  found = []
  for verb, rule in spec.rules.items():
    domains = [spec.identifiers_of(p.type) for p in rule.params]
    for binding in itertools.product(*domains):
      env = {p.name: value for p, value in zip(rule.params, binding)}
      ok = True
      for condition in rule.pre:
        args = tuple(env.get(a, a) for a in condition.args)
        if state.holds(condition.predicate, *args) != condition.positive:
          ok = False
          break
      if ok:
        found.append(ActionInstance(verb, *binding, agent=ROBOT))
  return sorted(found, key=ActionInstance.sort_key)


def episode_states(spec: DomainSpec, policy: PolicyBank, goal_id: str) -> List[WorldState]:
  state = initial_state(spec)
  states = [state]
  for action in policy.sequences[goal_id][0]:
    state = step(state, action.with_agent(state.turn), spec)
    states.append(state)
  return states


def test_legal_actions_match_rule_preconditions(spec: DomainSpec, policy: PolicyBank) -> None:
  states = episode_states(spec, policy, 'honey_oatmeal') + random_walk(spec, 3, 30)
  assert is_terminal(states[len(policy.sequences['honey_oatmeal'][0])], spec)
  for state in states:
    assert legal_actions(state, spec, ROBOT) == preconditions_hold(state, spec)
    validate_state(state, spec)


def test_step_alternates_turns(spec: DomainSpec) -> None:
  state = initial_state(spec)
  state = step(state, ActionInstance('gather', 'oats', None, HUMAN), spec)
  assert state.turn == ROBOT and state.step_index == 1
  assert state.holds('at', 'oats', 'counter')
  assert not state.holds('at', 'oats', 'shelf')
  state = pass_turn(state)
  assert state.turn == HUMAN and state.step_index == 2


def test_step_rejects_wrong_turn_and_illegal_moves(spec: DomainSpec) -> None:
  state = initial_state(spec)
  with pytest.raises(WrongTurnError):
    step(state, ActionInstance('gather', 'oats', None, ROBOT), spec)
  with pytest.raises(IllegalActionError):
    step(state, ActionInstance('blend', 'oats', None, HUMAN), spec)


def test_pour_moves_the_item(spec: DomainSpec) -> None:
  state = step(initial_state(spec), ActionInstance('gather', 'oats'), spec)
  state = pass_turn(state)
  state = step(state, ActionInstance('pour', 'oats', 'bowl'), spec)
  assert state.holds('at', 'oats', 'bowl')
  assert not state.holds('at', 'oats', 'counter')
  assert state.holds('filled', 'bowl')
  validate_state(state, spec)


def test_completion_survives_later_steps(spec: DomainSpec) -> None:
  gather = ActionInstance('gather', 'oats')
  state = step(initial_state(spec), gather, spec)
  assert is_completed(gather, state, spec)
  state = step(state, ActionInstance('pour', 'oats', 'bowl', ROBOT), spec)
  assert is_completed(gather, state, spec)


def test_served_state_is_terminal(spec: DomainSpec, policy: PolicyBank) -> None:
  goal_id = policy.ids()[0]
  final = replay(goal_id, policy.sequences[goal_id][0], spec)
  assert is_terminal(final, spec)
  assert legal_actions(final, spec, HUMAN) == []
  assert not is_legal(final, ActionInstance('gather', 'salt'), spec)
