from typing import *

import numpy as np
import pytest

from sous.attractor import (
  AttractorField, ScoreTable, ScoreWeights, aggregate_score, field_from_goals,
  field_from_judge, field_from_policy_bank,
)
from sous.belief import GoalBelief
from sous.errors import MissingFieldError, UnknownSourceError
from sous.goal_bank import Goal, GoalBank, PolicyBank
from sous.judge import CachedJudge, KeywordJudge
from sous.world import ActionInstance


def act(text: str) -> ActionInstance:
  return ActionInstance.parse(text)


def toy_policy() -> PolicyBank:
  a, b, c, d = act('gather(oats)'), act('gather(milk)'), act('gather(honey)'), act('serve(bowl)')
  goals = [Goal('oatmeal', 'Oatmeal', 'Oatmeal'), Goal('porridge', 'Porridge', 'Oatmeal')]
  return PolicyBank(goals, {
    'oatmeal': [(a, b, d), (b, a, d), (a, c, d)],
    'porridge': [(b, d)],
  })


def test_policy_frequencies_match_hand_counts() -> None:
  field = field_from_goals('oatmeal', ['oatmeal'], toy_policy())
  assert field['gather(oats)'] == pytest.approx(1.0)
  assert field['gather(milk)'] == pytest.approx(2 / 3)
  assert field['gather(honey)'] == pytest.approx(1 / 3)
  assert field['blend(tomato)'] == 0.0


def test_pooled_frequencies_weight_by_sequences() -> None:
  field = field_from_goals('sweet', ['oatmeal', 'porridge'], toy_policy())
  assert field['gather(milk)'] == pytest.approx(3 / 4)
  assert field['gather(oats)'] == pytest.approx(3 / 4)
  assert field['gather(honey)'] == pytest.approx(1 / 4)
  assert field['serve(bowl)'] == pytest.approx(1.0)


def test_bundled_goal_field(bank: GoalBank, policy: PolicyBank) -> None:
  field = field_from_policy_bank('honey_oatmeal', policy, bank.prefs)
  assert field['gather(oats)'] == 1.0
  assert field['blend(tomato)'] == 0.0
  pref = field_from_policy_bank('sweet', policy, bank.prefs)
  assert all(0.0 <= v <= 1.0 for v in pref.scores.values())
  with pytest.raises(UnknownSourceError):
    field_from_policy_bank('unicorn', policy, bank.prefs)


def test_negative_scores_are_rejected() -> None:
  with pytest.raises(ValueError):
    AttractorField('x', {'a': -0.1})


def test_weights() -> None:
  with pytest.raises(ValueError):
    ScoreWeights(0.0, 0.0)
  with pytest.raises(ValueError):
    ScoreWeights(-1.0, 1.0)
  assert ScoreWeights(1.0, 2.0).scaled(3.0) == ScoreWeights(3.0, 6.0)


def test_judge_field(judge: KeywordJudge) -> None:
  field = field_from_judge('sweet', ['gather(strawberry)', 'gather(salt)'], '', judge)
  assert field['gather(strawberry)'] > field['gather(salt)']
  with pytest.raises(ValueError):
    field_from_judge('sweet', [], '', judge)


def test_judge_field_hits_cache(judge: KeywordJudge) -> None:
  cached = CachedJudge(judge)
  before = judge.requests
  field_from_judge('warm', ['cook(pot)', 'gather(ice)'], '', cached)
  field_from_judge('warm', ['cook(pot)', 'gather(ice)'], '', cached)
  assert judge.requests == before + 1


def test_aggregate_score_direct_sum() -> None:
  belief = GoalBelief.uniform([Goal('g', 'G', 'Pasta')])
  goal_fields = {'g': AttractorField('g', {'mix(pot)': 0.8})}
  pref_fields = [AttractorField('warm', {'mix(pot)': 0.5})]
  assert aggregate_score(act('mix(pot)'), belief, goal_fields, pref_fields, ScoreWeights()) == pytest.approx(1.3)
  assert aggregate_score(act('mix(pot)'), belief, goal_fields, [], ScoreWeights(), goals=[]) == 0.0


def test_aggregate_score_missing_field() -> None:
  belief = GoalBelief.uniform([Goal('g', 'G', 'Pasta'), Goal('h', 'H', 'Stew')])
  with pytest.raises(MissingFieldError):
    aggregate_score(act('mix(pot)'), belief, {'g': AttractorField('g')}, [], ScoreWeights())
  with pytest.raises(MissingFieldError):
    ScoreTable(belief, {'g': AttractorField('g')}, [], ScoreWeights())


def test_aggregate_score_matches_resummation() -> None:
  rng = np.random.default_rng(7)
  actions = [act(f'gather({item})') for item in ('oats', 'milk', 'honey', 'salt', 'kale')]
  texts = [a.text() for a in actions]
  for _ in range(50):
    goals = [Goal(f'g{i}', f'G{i}', 'Pasta') for i in range(3)]
    belief = GoalBelief.from_weights(goals, {g.id: float(w) for g, w in zip(goals, rng.random(3) + 0.01)})
    goal_fields = {g.id: AttractorField(g.id, dict(zip(texts, rng.random(5)))) for g in goals}
    pref_fields = [AttractorField(f'p{j}', dict(zip(texts, rng.random(5)))) for j in range(2)]
    weights = ScoreWeights(float(rng.random() + 0.1), float(rng.random() + 0.1))
    table = ScoreTable(belief, goal_fields, pref_fields, weights)
    for action in actions:
      key = action.text()
      expected = sum(belief.prob(g.id) * weights.w_goal * goal_fields[g.id][key] for g in goals)
      expected += sum(weights.w_pref * f[key] for f in pref_fields)
      direct = aggregate_score(action, belief, goal_fields, pref_fields, weights)
      assert direct == pytest.approx(expected, abs=1e-12)
      assert table(action) == direct
      assert aggregate_score(action, belief, goal_fields, pref_fields, weights.scaled(2.5)) == pytest.approx(2.5 * direct)


def test_score_is_monotone_in_fields() -> None:
  belief = GoalBelief.uniform([Goal('g', 'G', 'Pasta')])
  low = {'g': AttractorField('g', {'mix(pot)': 0.2})}
  high = {'g': AttractorField('g', {'mix(pot)': 0.3})}
  assert aggregate_score(act('mix(pot)'), belief, high, [], ScoreWeights()) >= aggregate_score(act('mix(pot)'), belief, low, [], ScoreWeights())
