from __future__ import annotations

from typing import *
from dataclasses import replace

import sous.log as log
from sous.errors import StuckEpisodeError, StuckError
from sous.goal_bank import ExperimentSpec, sample_script
from sous.inquiry import Question
from sous.kitchen import Kitchen
from sous.methods import MethodConfig, Robot, make_robot
from sous.sim_human import SimHuman, answer, next_human_action
from sous.trace import ACTION, QUESTION, WAIT, EpisodeTrace, TraceEvent
from sous.world import HUMAN, ROBOT, WorldState, initial_state, is_terminal, pass_turn, step


STEP_CAP_FACTOR = 3


def snapshot(robot: Robot) -> Dict[str, Any]:
  belief = robot.belief
  return {
    'belief': tuple(belief.top(3)) if belief is not None else (),
    'summary': robot.summary.render() if robot.summary is not None else '',
  }


def run_episode(
  exp: ExperimentSpec,
  cfg: MethodConfig,
  kitchen: Kitchen,
  seed: Optional[int] = None,
) -> EpisodeTrace:
  """Play one experiment to the end, alternating simulated human and robot.

  The episode fails, without raising, when the human gets stuck, the step
  cap is hit or a dish is served before the recipe is complete.
  """
  seed = exp.seed if seed is None else seed
  spec = kitchen.spec
  goal_id = exp.true_goal.id
  script = sample_script(kitchen.policy, goal_id, seed)
  human = SimHuman(
    exp.true_goal, script, exp.preference_pair, cfg.answer_noise, cfg.reveal_at, seed, kitchen.judge,
  )
  robot = make_robot(kitchen, cfg)
  trace = EpisodeTrace(exp, len(script), cfg.name, seed, human.opening_prefs())

  cap = STEP_CAP_FACTOR * len(script)
  state = initial_state(spec)
  robot_turns = 0
  try:
    while not is_terminal(state, spec):
      if state.step_index >= cap:
        raise StuckEpisodeError(f'Step cap of {cap} reached')
      if state.turn == HUMAN:
        trace.stated_prefs.extend(human.revealed_prefs(state.step_index))
        action = next_human_action(human, state, spec)
        if action is None:
          break
        state = step(state, action, spec)
        trace.add(TraceEvent(trace.next_timestep(), HUMAN, ACTION, action))
        robot.observe(state, trace)
        trace.events[-1] = replace(trace.events[-1], **snapshot(robot))
      else:
        state = robot_turn(robot, lambda q: answer(human, q), state, trace, kitchen, robot_turns)
        robot_turns += 1
  except (StuckError, StuckEpisodeError) as e:
    trace.failure = str(e)

  if trace.failure is None and not human.finished(state, spec):
    trace.failure = 'A dish was served before the recipe was complete'
  trace.completed = trace.failure is None and is_terminal(state, spec)
  if trace.failure is not None:
    log.warn(f'Episode {exp.id} ({cfg.name}, goal {goal_id}) failed: {trace.failure}')
  return trace


def robot_turn(
  robot: Robot,
  answerer: Callable[[Question], str],
  state: WorldState,
  trace: EpisodeTrace,
  kitchen: Kitchen,
  t: int,
) -> WorldState:
  """Ask if the robot wants to, then act or wait. Returns the next state."""
  if robot.belief is None:
    robot.observe(state, trace)

  log.timer.begin('ask')
  q = robot.ask(state, trace, t)
  log.timer.end()
  if q is not None:
    reply = answerer(q)
    summary = robot.hear(q, reply, t)
    trace.stated_prefs[:] = list(summary.stated_prefs)
    log.debug(f'{trace.experiment.id}: asked {q.text!r}, human answered {reply!r}')
    trace.add(TraceEvent(
      trace.next_timestep(), ROBOT, QUESTION,
      question_id=q.id, question=q.text, answer=reply,
      **snapshot(robot),
    ))

  log.timer.begin('plan')
  action = robot.act(state, trace)
  log.timer.end()
  if action is None:
    trace.add(TraceEvent(trace.next_timestep(), ROBOT, WAIT, **snapshot(robot)))
    return pass_turn(state)

  frontier = kitchen.policy.frontier(trace.experiment.true_goal.id, state, kitchen.spec)
  mistake = action.without_agent() not in frontier
  action = action.with_agent(ROBOT)
  next_state = step(state, action, kitchen.spec)
  trace.add(TraceEvent(trace.next_timestep(), ROBOT, ACTION, action, mistake=mistake, **snapshot(robot)))
  return next_state


__all__ = ['STEP_CAP_FACTOR', 'run_episode', 'robot_turn', 'snapshot']
