from __future__ import annotations

from typing import *
import threading

import sous.config as config
import sous.log as log
from sous.attractor import AttractorField, field_from_goals, field_from_judge, field_from_policy_bank
from sous.format_bank import load_bank
from sous.format_domain import load_domain
from sous.format_questions import ClosedQuestions, OpenQuestions, Template, load_questions
from sous.goal_bank import DEFAULT_CAP, Goal, GoalBank, PolicyBank, build_policy_bank
from sous.judge import Judge, KeywordJudge, load_lexicon
from sous.loading import Loading, in_progress
from sous.world import DomainSpec


class Kitchen:
  """Everything episodes share: domain, banks, judge and cached fields.

  Field caches are filled lazily under a lock, so one kitchen can serve
  episodes running on several threads.
  """

  def __init__(
    self,
    spec: DomainSpec,
    bank: GoalBank,
    policy: PolicyBank,
    judge: Judge,
    templates: Mapping[str, Template],
  ) -> None:
    self.spec = spec
    self.bank = bank
    self.policy = policy
    self.judge = judge
    self.templates = templates
    self.universe_texts = [action.text() for action in spec.universe]
    self.recipe_types = sorted({goal.recipe_type for goal in bank.goals})
    self.policy_fields = {goal.id: field_from_goals(goal.id, [goal.id], policy) for goal in policy.goals}
    self._judge_fields: Dict[str, AttractorField] = {}
    self._pref_fields: Dict[str, AttractorField] = {}
    self._closed_questions: Optional[ClosedQuestions] = None
    self._lock = threading.Lock()

  def judge_field(self, source: str) -> AttractorField:
    """Judge pull of `source` over every ground action."""
    field = self._judge_fields.get(source)
    if field is None:
      with self._lock:
        field = self._judge_fields.get(source)
        if field is None:
          field = field_from_judge(source, self.universe_texts, '', self.judge)
          self._judge_fields[source] = field
    return field

  def goal_fields(self, goals: Sequence[Goal], source: str) -> Dict[str, AttractorField]:
    if source == 'policy-bank':
      return {goal.id: self.policy_fields[goal.id] for goal in goals}
    return {goal.id: self.judge_field(goal.name) for goal in goals}

  def preference_field(self, pref: str) -> Optional[AttractorField]:
    """Policy-bank field of a vocabulary preference, or None for other phrases."""
    if pref not in self.bank.prefs.preferences:
      return None
    field = self._pref_fields.get(pref)
    if field is None:
      with self._lock:
        field = self._pref_fields.get(pref)
        if field is None:
          field = field_from_policy_bank(pref, self.policy, self.bank.prefs)
          self._pref_fields[pref] = field
    return field

  @property
  def closed_questions(self) -> ClosedQuestions:
    if self._closed_questions is None:
      with self._lock:
        if self._closed_questions is None:
          self._closed_questions = ClosedQuestions(self.templates, self.policy, self.spec)
          log.debug(f'Generated {len(self._closed_questions.questions)} closed questions')
    return self._closed_questions

  def open_questions(self) -> OpenQuestions:
    return OpenQuestions(self.templates, self.judge, self.spec, self.recipe_types)


def load_kitchen(
  judge: Optional[Judge] = None,
  cap: Optional[int] = DEFAULT_CAP,
  seed: int = 0,
  domain_path: Optional[str] = None,
  bank_path: Optional[str] = None,
  questions_path: Optional[str] = None,
) -> Loading[Kitchen]:
  """Load the bundled assets, or the given files, and build the policy bank.

  Without a judge, the keyword judge over the loaded bank is used.
  """
  yield in_progress(0.0, 'Loading domain')
  spec = load_domain(domain_path or config.asset('kitchen.domain'))
  yield in_progress(0.1, 'Loading goal bank')
  bank = load_bank(bank_path or config.asset('recipes.bank'))
  templates = load_questions(questions_path or config.asset('questions.txt'))
  yield in_progress(0.2, 'Building policy bank')
  policy = build_policy_bank(bank, spec, cap, seed)
  yield in_progress(0.9, 'Preparing judge')
  if judge is None:
    judge = KeywordJudge(bank, load_lexicon(config.asset('lexicon.txt')))
  kitchen = Kitchen(spec, bank, policy, judge, templates)
  yield in_progress(1.0, 'Ready')
  return kitchen


__all__ = ['Kitchen', 'load_kitchen']
