from __future__ import annotations

from typing import *
from dataclasses import replace

import sous.log as log
from sous.episode import robot_turn, snapshot
from sous.errors import SousError
from sous.format_trace import save_trace
from sous.goal_bank import ExperimentSpec, Goal
from sous.inquiry import Question
from sous.kitchen import Kitchen
from sous.methods import MethodConfig, Robot, make_robot
from sous.trace import ACTION, WAIT, EpisodeTrace, TraceEvent
from sous.world import (
  ActionInstance, HUMAN, WorldState, initial_state, is_completed, is_terminal,
  legal_actions, pass_turn, step,
)


QUIT = ('quit', 'exit', 'q')
WAIT_WORDS = ('wait', 'pass')


class _Quit(Exception):
  pass


class Session:
  """Line-oriented kitchen session with a person playing the human.

  Input and output are injected so that scripted sessions can be driven
  from tests.
  """

  def __init__(
    self,
    kitchen: Kitchen,
    cfg: MethodConfig,
    input_fn: Callable[[str], str] = input,
    print_fn: Callable[[str], None] = print,
  ) -> None:
    self.kitchen = kitchen
    self.cfg = cfg
    self.input_fn = input_fn
    self.print_fn = print_fn

  def read(self, prompt: str) -> str:
    try:
      line = self.input_fn(prompt).strip()
    except EOFError:
      raise _Quit()
    if line.lower() in QUIT:
      raise _Quit()
    return line

  def choose_goal(self, goal_id: Optional[str]) -> Goal:
    goals = self.kitchen.bank.goals
    if goal_id is not None:
      return self.kitchen.bank.goal(goal_id)
    for i, goal in enumerate(goals):
      self.print_fn(f'  {i + 1:2}. {goal.name} ({goal.recipe_type})')
    while True:
      line = self.read('Which dish are you making? ')
      picked = _pick(line, [g.id for g in goals], [g.name.lower() for g in goals])
      if picked is not None:
        return goals[picked]
      self.print_fn(f'Pick a number from 1 to {len(goals)}.')

  def choose_prefs(self, prefs: Optional[Sequence[str]]) -> List[str]:
    if prefs is not None:
      return list(prefs)
    line = self.read('Preferences (comma separated, blank for none): ')
    return [p.strip() for p in line.split(',') if p.strip() != '']

  def human_move(self, state: WorldState) -> Optional[ActionInstance]:
    """The player's action, or None to wait. Re-prompts until valid."""
    options = legal_actions(state, self.kitchen.spec, HUMAN)
    self.print_fn('Your move:')
    for i, action in enumerate(options):
      self.print_fn(f'  {i + 1:2}. {action.text()}')
    while True:
      line = self.read('> ')
      if line.lower() in WAIT_WORDS:
        return None
      picked = _pick(line, [a.text() for a in options], [])
      if picked is not None:
        return options[picked]
      self.print_fn(f'Not a legal action: {line!r}. Enter a number, an action, "wait" or "quit".')

  def answer(self, q: Question) -> str:
    self.print_fn(f'Robot asks: {q.text}')
    for i, ans in enumerate(q.answers):
      self.print_fn(f'  {i + 1}. {ans}')
    while True:
      line = self.read('answer> ')
      picked = _pick(line, list(q.answers), [])
      if picked is not None:
        return q.answers[picked]
      self.print_fn(f'Choose one of: {", ".join(q.answers)}')

  def show_belief(self, robot: Robot) -> None:
    if robot.belief is None:
      return
    parts = [f'{goal_id} {p:.2f}' for goal_id, p in robot.belief.top(3)]
    self.print_fn('Robot thinks: ' + ', '.join(parts))

  def run(
    self,
    goal_id: Optional[str] = None,
    prefs: Optional[Sequence[str]] = None,
    seed: int = 0,
    out_path: Optional[str] = None,
  ) -> EpisodeTrace:
    """Play until something is served or the player quits.

    The trace is saved to `out_path` in either case.
    """
    kitchen = self.kitchen
    spec = kitchen.spec
    trace: Optional[EpisodeTrace] = None
    try:
      goal = self.choose_goal(goal_id)
      stated = self.choose_prefs(prefs)
      pair = tuple((stated + ['none', 'none'])[:2])
      exp = ExperimentSpec(cast(Tuple[str, str], pair), goal, seed)
      trace = EpisodeTrace(exp, kitchen.policy.ground_truth_len(goal.id), self.cfg.name, seed, stated)
      robot = make_robot(kitchen, self.cfg)
      state = initial_state(spec)
      robot_turns = 0
      while not is_terminal(state, spec):
        if state.turn == HUMAN:
          action = self.human_move(state)
          if action is None:
            state = pass_turn(state)
            trace.add(TraceEvent(trace.next_timestep(), HUMAN, WAIT))
          else:
            state = step(state, action, spec)
            trace.add(TraceEvent(trace.next_timestep(), HUMAN, ACTION, action))
          robot.observe(state, trace)
          trace.events[-1] = replace(trace.events[-1], **snapshot(robot))
        else:
          state = robot_turn(robot, self.answer, state, trace, kitchen, robot_turns)
          robot_turns += 1
          last = trace.events[-1]
          if last.kind == ACTION and last.action is not None:
            self.print_fn(f'Robot does {last.action.text()}')
          else:
            self.print_fn('Robot waits')
        self.show_belief(robot)
      trace.completed = all(is_completed(a, state, spec) for a in kitchen.policy.steps(goal.id))
      if not trace.completed:
        trace.failure = f'Served something other than {goal.name}'
      self.print_fn('Served!' if trace.completed else trace.failure)
    except _Quit:
      self.print_fn('Bye.')
      if trace is not None:
        trace.failure = 'Session ended before serving'
    finally:
      if trace is not None and out_path is not None:
        save_trace(trace, out_path)
        log.info('Saved trace to', out_path)
    if trace is None:
      raise SousError('Session ended before it started')
    return trace


def _pick(line: str, keys: Sequence[str], aliases: Sequence[str]) -> Optional[int]:
  """Index chosen by a 1-based number, a key or an alias."""
  if line.isdigit():
    i = int(line) - 1
    return i if 0 <= i < len(keys) else None
  if line in keys:
    return list(keys).index(line)
  if line.lower() in aliases:
    return list(aliases).index(line.lower())
  return None


__all__ = ['Session']
