from typing import *

import pytest

import sous.config as config
from sous.format_bank import load_bank
from sous.format_domain import load_domain
from sous.format_questions import load_questions
from sous.goal_bank import GoalBank, PolicyBank, build_policy_bank
from sous.judge import KeywordJudge, load_lexicon
from sous.kitchen import Kitchen
from sous.world import DomainSpec


@pytest.fixture(scope='session')
def spec() -> DomainSpec:
  return load_domain(config.asset('kitchen.domain'))


@pytest.fixture(scope='session')
def bank() -> GoalBank:
  return load_bank(config.asset('recipes.bank'))


@pytest.fixture(scope='session')
def policy(bank: GoalBank, spec: DomainSpec) -> PolicyBank:
  return build_policy_bank(bank, spec)


@pytest.fixture(scope='session')
def judge(bank: GoalBank) -> KeywordJudge:
  return KeywordJudge(bank, load_lexicon(config.asset('lexicon.txt')))


@pytest.fixture(scope='session')
def kitchen(spec: DomainSpec, bank: GoalBank, policy: PolicyBank, judge: KeywordJudge) -> Kitchen:
  templates = load_questions(config.asset('questions.txt'))
  return Kitchen(spec, bank, policy, judge, templates)


@pytest.fixture(scope='session')
def domain_text() -> str:
  with open(config.asset('kitchen.domain'), 'r') as f:
    return f.read()
