from typing import *

import pytest

from sous.episode import STEP_CAP_FACTOR, robot_turn, run_episode
from sous.format_bank import parse_bank
from sous.format_questions import parse_questions
from sous.goal_bank import ExperimentSpec, build_policy_bank
from sous.judge import KeywordJudge
from sous.kitchen import Kitchen
from sous.methods import MethodConfig, load_method, make_robot
from sous.metrics import compute_metrics
from sous.suite import suite_experiments
from sous.trace import ACTION, QUESTION, WAIT, EpisodeTrace
from sous.world import DomainSpec, HUMAN, ROBOT, initial_state


TOY_BANK = '''sous-bank 1
preferences:
  warm chilled breakfast

goal porridge "Porridge" Oatmeal
  clique gather(oats) gather(milk)
  clique pour(oats,pot) pour(milk,pot) turn_on(stove)
  chain cook(pot) mix(pot) serve(pot)
  prefs warm breakfast
end

goal overnight_oats "Overnight Oats" Oatmeal
  clique gather(oats) gather(milk)
  clique pour(oats,bowl) pour(milk,bowl)
  chain mix(bowl) serve(bowl)
  prefs chilled breakfast
end
'''

TOY_QUESTIONS = '''sous-questions 1
temperature: Should the dish be warm or chilled? | warm = warm | chilled = chilled
'''


@pytest.fixture(scope='module')
def toy_kitchen(spec: DomainSpec) -> Kitchen:
  bank = parse_bank(TOY_BANK, 'toy.bank')
  policy = build_policy_bank(bank, spec)
  return Kitchen(spec, bank, policy, KeywordJudge(bank), parse_questions(TOY_QUESTIONS))


def first_experiment(kitchen: Kitchen, goal_id: str) -> ExperimentSpec:
  a, b = sorted(kitchen.bank.prefs.goal_to_prefs[goal_id])[:2]
  return ExperimentSpec((a, b), kitchen.bank.goal(goal_id), 0)


def test_passive_robot_leaves_the_work_to_the_human(kitchen: Kitchen) -> None:
  exp = first_experiment(kitchen, 'honey_oatmeal')
  trace = run_episode(exp, load_method('passive'), kitchen)
  assert trace.completed and trace.failure is None
  assert len(trace.human_actions()) == trace.ground_truth_len
  assert trace.robot_actions() == []
  assert all(e.kind in (ACTION, WAIT) for e in trace.events)
  report = compute_metrics(trace)
  assert report.extra_steps == 0
  assert report.n_questions == 0


def test_episodes_are_deterministic(kitchen: Kitchen) -> None:
  exp = first_experiment(kitchen, 'vegetable_stew')
  cfg = load_method('known-goals-bank-ask')
  first = run_episode(exp, cfg, kitchen)
  second = run_episode(exp, cfg, kitchen)
  assert first.events == second.events
  assert first.stated_prefs == second.stated_prefs
  assert compute_metrics(first) == compute_metrics(second)


def test_episode_shape(kitchen: Kitchen) -> None:
  exp = first_experiment(kitchen, 'banana_smoothie')
  trace = run_episode(exp, load_method('known-goals-bank'), kitchen)
  timesteps = [e.timestep for e in trace.events]
  assert timesteps == sorted(set(timesteps))
  assert trace.events[0].agent == HUMAN
  assert len(trace.actions()) <= STEP_CAP_FACTOR * trace.ground_truth_len
  assert all(len(e.belief) <= 3 for e in trace.events)
  assert all(e.summary != '' for e in trace.events)
  assert trace.stated_prefs[:2] == list(exp.preference_pair)


def test_toy_bank_asks_once_and_converges(toy_kitchen: Kitchen) -> None:
  cfg = MethodConfig('toy', preferences=False, questions=True)
  goal = toy_kitchen.bank.goal('porridge')
  exp = ExperimentSpec(('warm', 'breakfast'), goal, 0)
  trace = run_episode(exp, cfg, toy_kitchen)
  questions = [e for e in trace.events if e.kind == QUESTION]
  assert len(questions) == 1
  assert questions[0].question_id == 'temperature'
  assert questions[0].answer == 'warm'
  assert trace.turn_events()[-1].prediction == 'porridge'
  assert 'warm' in trace.stated_prefs


def test_revealed_preferences_arrive_later(kitchen: Kitchen) -> None:
  exp = first_experiment(kitchen, 'honey_oatmeal')
  cfg = MethodConfig('staged', reveal_at=4)
  trace = run_episode(exp, cfg, kitchen)
  assert trace.stated_prefs[:2] == list(exp.preference_pair)
  early = trace.events[0].summary
  assert exp.preference_pair[1] not in early.split('preferences: ', 1)[1].split(';', 1)[0].split(', ')


def test_robot_turn_waits_or_acts(kitchen: Kitchen) -> None:
  exp = first_experiment(kitchen, 'honey_oatmeal')
  trace = EpisodeTrace(exp, 20, 'passive', 0, list(exp.preference_pair))
  robot = make_robot(kitchen, load_method('passive'))
  state = initial_state(kitchen.spec, ROBOT)
  next_state = robot_turn(robot, lambda q: q.answers[0], state, trace, kitchen, 0)
  assert next_state.turn == HUMAN
  assert next_state.literals == state.literals
  assert [e.kind for e in trace.events] == [WAIT]
  assert robot.belief is not None


def test_open_ask_episodes_answer_every_question(kitchen: Kitchen) -> None:
  cfg = load_method('open-ask')
  for exp in suite_experiments(kitchen, 0, 6):
    trace = run_episode(exp, cfg, kitchen)
    questions = [e for e in trace.events if e.kind == QUESTION]
    for event in questions:
      assert event.answer is not None and event.answer != ''
    assert trace.completed or trace.failure is not None
