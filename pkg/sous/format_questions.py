"""Question templates and the candidate questions built from them.

    sous-questions 1
    ingredient: Will the dish include {item}? | yes = {item} | no = no {item}

Each answer may name the phrase that joins the stated preferences when it
is given; a bare answer is its own phrase. `{recipe_types}` as the only
answer expands to one answer per recipe type.
"""

from __future__ import annotations

from typing import *
from dataclasses import dataclass
import re

from sous.errors import QuestionParseError
from sous.goal_bank import Goal, PolicyBank
from sous.inquiry import Question
from sous.judge import Judge
from sous.attractor import AttractorField
from sous.world import ActionInstance, DomainSpec


QUESTIONS_VERSION = 1

ATTRIBUTES = ('recipe_type', 'ingredient', 'appliance', 'container', 'temperature')

_PLACEHOLDER = {
  'ingredient': '{item}',
  'appliance': '{appliance}',
  'container': '{container}',
}

_RECIPE_TYPES = '{recipe_types}'

# Added to every affinity before rows are normalized, so no answer is impossible.
SMOOTHING = 0.05

_HEADER_RE = re.compile(r'^sous-questions\s+(\d+)\s*$')
_LINE_RE = re.compile(r'^([a-z_]+)\s*:\s*(.*)$')


@dataclass(frozen=True)
class Template:
  attribute: str
  text: str
  answers: Tuple[Tuple[str, str], ...] # (answer, phrase)

  def instantiate(self, value: str) -> Tuple[str, Tuple[Tuple[str, str], ...]]:
    placeholder = _PLACEHOLDER.get(self.attribute)
    if placeholder is None:
      return self.text, self.answers
    return (
      self.text.replace(placeholder, value),
      tuple((a.replace(placeholder, value), p.replace(placeholder, value)) for a, p in self.answers),
    )


def parse_questions(text: str, path: str = '<questions>') -> Dict[str, Template]:
  lines = [(i + 1, line.split('#', 1)[0].rstrip()) for i, line in enumerate(text.split('\n'))]
  lines = [(n, line) for n, line in lines if line.strip() != '']
  if len(lines) == 0:
    raise QuestionParseError(path, 1, 1, 'Empty question templates file')
  number, header = lines[0]
  match = _HEADER_RE.match(header)
  if match is None:
    raise QuestionParseError(path, number, 1, 'Expected header "sous-questions <version>"')
  if int(match.group(1)) != QUESTIONS_VERSION:
    raise QuestionParseError(path, number, 16, f'Unsupported templates version {match.group(1)}')

  templates: Dict[str, Template] = {}
  for number, line in lines[1:]:
    match = _LINE_RE.match(line)
    if match is None:
      raise QuestionParseError(path, number, 1, 'Expected "attribute: question | answer ..."')
    attribute = match.group(1)
    if attribute not in ATTRIBUTES:
      raise QuestionParseError(path, number, 1, f'Unknown attribute {attribute!r}')
    if attribute in templates:
      raise QuestionParseError(path, number, 1, f'Duplicate template for {attribute!r}')

    parts = [part.strip() for part in match.group(2).split('|')]
    question, answer_parts = parts[0], parts[1:]
    column = match.start(2) + 1
    if question == '':
      raise QuestionParseError(path, number, column, 'Missing question text')
    placeholder = _PLACEHOLDER.get(attribute)
    if placeholder is not None and placeholder not in question:
      raise QuestionParseError(path, number, column, f'Question for {attribute!r} must mention {placeholder}')

    answers: List[Tuple[str, str]] = []
    for part in answer_parts:
      if '=' in part:
        answer, phrase = (s.strip() for s in part.split('=', 1))
      else:
        answer, phrase = part, part
      if answer == '' or phrase == '':
        raise QuestionParseError(path, number, column, 'Empty answer')
      answers.append((answer, phrase))
    expands = [a for a, _ in answers] == [_RECIPE_TYPES]
    if not expands and attribute == 'recipe_type':
      raise QuestionParseError(path, number, column, f'recipe_type answers must be {_RECIPE_TYPES}')
    if not expands and len({a for a, _ in answers}) < 2:
      raise QuestionParseError(path, number, column, 'A question needs at least two distinct answers')
    templates[attribute] = Template(attribute, question, tuple(answers))

  return templates


def load_questions(path: str) -> Dict[str, Template]:
  with open(path, 'r') as f:
    return parse_questions(f.read(), path)


def make_question(
  question_id: str,
  category: str,
  text: str,
  answers: Sequence[Tuple[str, str]],
  affinity: Mapping[str, Mapping[str, float]],
) -> Question:
  """Build a question whose per-goal likelihoods are smoothed, normalized affinities."""
  likelihoods = {}
  for goal_id, row in affinity.items():
    smoothed = {answer: max(row.get(answer, 0.0), 0.0) + SMOOTHING for answer, _ in answers}
    total = sum(smoothed.values())
    likelihoods[goal_id] = {answer: value / total for answer, value in smoothed.items()}
  return Question(
    question_id,
    text,
    category,
    tuple(answer for answer, _ in answers),
    likelihoods,
    {answer: phrase for answer, phrase in answers},
  )


def discriminates(question: Question, goal_ids: Iterable[str]) -> bool:
  rows = [question.likelihoods[goal_id] for goal_id in goal_ids]
  return any(
    abs(row[answer] - rows[0][answer]) > 1e-9
      for row in rows[1:] for answer in question.answers
  )


def _expand_types(recipe_types: Sequence[str]) -> Tuple[Tuple[str, str], ...]:
  return tuple((t, t.lower()) for t in recipe_types)


class ClosedQuestions:
  """Every templated question over a known policy bank.

  Affinities are read off the stored sequences: how often a goal uses an
  item, switches on an appliance, serves in a container or cooks.
  """

  def __init__(self, templates: Mapping[str, Template], policy: PolicyBank, spec: DomainSpec) -> None:
    self.policy = policy
    goals = policy.goals
    recipe_types = sorted({goal.recipe_type for goal in goals})

    items: Dict[str, Dict[str, float]] = {}
    features: Dict[str, Dict[str, float]] = {}
    for goal in goals:
      freq = policy.frequency(goal.id)
      present: Dict[str, float] = {}
      for action, value in freq.items():
        if action.item is not None:
          present[action.item] = max(present.get(action.item, 0.0), value)
      items[goal.id] = present
      features[goal.id] = {
        'warm': max((v for a, v in freq.items() if a.verb == 'cook'), default=0.0),
      }
      for appliance in spec.appliances:
        features[goal.id]['appliance:' + appliance] = freq.get(ActionInstance('turn_on', appliance), 0.0)
      for container in spec.containers:
        features[goal.id]['container:' + container] = freq.get(ActionInstance('serve', container), 0.0)

    self.questions: List[Question] = []

    def add(question_id: str, template: Template, value: str, affinity: Callable[[Goal, str, str], float]) -> None:
      text, answers = template.instantiate(value)
      if template.attribute == 'recipe_type':
        answers = _expand_types(recipe_types)
      yes_answer = answers[0][0]
      table = {
        goal.id: {answer: affinity(goal, answer, yes_answer) for answer, _ in answers}
          for goal in goals
      }
      self.questions.append(make_question(question_id, template.attribute, text, answers, table))

    def binary(presence: Callable[[Goal], float]) -> Callable[[Goal, str, str], float]:
      return lambda goal, answer, yes: presence(goal) if answer == yes else 1.0 - presence(goal)

    def feature(key: str) -> Callable[[Goal], float]:
      return lambda goal: features[goal.id][key]

    def uses(item: str) -> Callable[[Goal], float]:
      return lambda goal: items[goal.id].get(item, 0.0)

    if 'recipe_type' in templates:
      add('recipe_type', templates['recipe_type'], '',
        lambda goal, answer, _: 1.0 if goal.recipe_type == answer else 0.0)
    if 'temperature' in templates:
      add('temperature', templates['temperature'], '',
        binary(feature('warm')))
    if 'appliance' in templates:
      for appliance in spec.appliances:
        key = 'appliance:' + appliance
        add(key, templates['appliance'], appliance,
          binary(feature(key)))
    if 'container' in templates:
      served = sorted({a.item for g in goals for a in policy.steps(g.id) if a.verb == 'serve' and a.item})
      for container in served:
        key = 'container:' + container
        add(key, templates['container'], container,
          binary(feature(key)))
    if 'ingredient' in templates:
      used = sorted({item for uses in items.values() for item in uses if item in spec.items})
      for item in used:
        add('ingredient:' + item, templates['ingredient'], item,
          binary(uses(item)))

  def candidates(self, goal_ids: Sequence[str]) -> List[Question]:
    """Questions that tell at least two of the goals apart."""
    if len(goal_ids) < 2:
      return []
    return [q for q in self.questions if discriminates(q, goal_ids)]


class OpenQuestions:
  """Questions over proposed goals, with likelihoods from judge affinity.

  Ingredient questions cover the items whose gather pull differs most
  across the current goals.
  """

  def __init__(
    self,
    templates: Mapping[str, Template],
    judge: Judge,
    spec: DomainSpec,
    recipe_types: Sequence[str],
    max_items: int = 8,
  ) -> None:
    self.templates = templates
    self.judge = judge
    self.spec = spec
    self.recipe_types = list(recipe_types)
    self.max_items = max_items

  def _items(self, goals: Sequence[Goal], goal_fields: Mapping[str, AttractorField]) -> List[str]:
    spread = []
    for item in self.spec.items:
      key = ActionInstance('gather', item).text()
      values = [goal_fields[goal.id][key] for goal in goals if goal.id in goal_fields]
      if len(values) > 0 and max(values) - min(values) > 0:
        spread.append((-(max(values) - min(values)), item))
    return [item for _, item in sorted(spread)[:self.max_items]]

  def _question(self, question_id: str, template: Template, value: str, goals: Sequence[Goal]) -> Question:
    text, answers = template.instantiate(value)
    if template.attribute == 'recipe_type':
      answers = _expand_types(self.recipe_types)
    names = [goal.name for goal in goals]
    table: Dict[str, Dict[str, float]] = {goal.id: {} for goal in goals}
    for answer, phrase in answers:
      scores = self.judge.score(phrase, names, text)
      for goal in goals:
        table[goal.id][answer] = scores[goal.name]
    return make_question(question_id, template.attribute, text, answers, table)

  def candidates(self, goals: Sequence[Goal], goal_fields: Mapping[str, AttractorField]) -> List[Question]:
    if len(goals) < 2:
      return []
    specs: List[Tuple[str, Template, str]] = []
    for attribute in ('recipe_type', 'temperature'):
      if attribute in self.templates:
        specs.append((attribute, self.templates[attribute], ''))
    if 'appliance' in self.templates:
      specs.extend(('appliance:' + a, self.templates['appliance'], a) for a in self.spec.appliances)
    if 'container' in self.templates:
      specs.extend(('container:' + c, self.templates['container'], c) for c in self.spec.containers)
    if 'ingredient' in self.templates:
      specs.extend(
        ('ingredient:' + item, self.templates['ingredient'], item)
          for item in self._items(goals, goal_fields)
      )
    questions = [self._question(question_id, template, value, goals) for question_id, template, value in specs]
    ids = [goal.id for goal in goals]
    return [q for q in questions if discriminates(q, ids)]


__all__ = [
  'QUESTIONS_VERSION',
  'ATTRIBUTES',
  'SMOOTHING',
  'Template',
  'parse_questions',
  'load_questions',
  'make_question',
  'discriminates',
  'ClosedQuestions',
  'OpenQuestions',
]
