"""Reader for goal bank files.

    sous-bank 1
    preferences:
      sweet savory warm ...
    goal honey_oatmeal "Honey Cinnamon Oatmeal" Oatmeal
      clique collect_water() turn_on(stove) gather(oats) gather(milk)
      clique pour(water,pot) pour(oats,pot) pour(milk,pot)
      chain cook(pot)
      ...
      prefs sweet warm breakfast
    end

Stage lines run in order: every step of one stage precedes every step of the
next. Steps on a `clique` line are unordered; steps on a `chain` line are
ordered left to right.
"""

from typing import *
import re

from sous.errors import BankParseError
from sous.goal_bank import Goal, GoalBank, PreferenceMap, Stage, TaskNetwork, RECIPE_TYPES
from sous.world import ActionInstance


BANK_VERSION = 1

_HEADER_RE = re.compile(r'^sous-bank\s+(\d+)\s*$')
_GOAL_RE = re.compile(r'^goal\s+([A-Za-z0-9_]+)\s+"([^"]*)"\s+([A-Za-z]+)\s*$')
_WORD_RE = re.compile(r'\S+')


def _words(line: str) -> List[Tuple[int, str]]:
  return [(m.start() + 1, m.group()) for m in _WORD_RE.finditer(line)]


def parse_bank(text: str, path: str = '<bank>') -> GoalBank:
  lines = [(i + 1, line.split('#', 1)[0].rstrip()) for i, line in enumerate(text.split('\n'))]
  lines = [(n, line) for n, line in lines if line.strip() != '']
  if len(lines) == 0:
    raise BankParseError(path, 1, 1, 'Empty goal bank')

  number, header = lines[0]
  match = _HEADER_RE.match(header)
  if match is None:
    raise BankParseError(path, number, 1, 'Expected header "sous-bank <version>"')
  if int(match.group(1)) != BANK_VERSION:
    raise BankParseError(path, number, 11, f'Unsupported bank version {match.group(1)}')

  preferences: List[str] = []
  goals: List[Goal] = []
  networks: Dict[str, TaskNetwork] = {}
  goal_prefs: Dict[str, FrozenSet[str]] = {}
  pref_refs: List[Tuple[int, int, str, str]] = []

  i = 1
  while i < len(lines):
    number, line = lines[i]
    if line.strip() == 'preferences:' and not line.startswith(' '):
      i += 1
      while i < len(lines) and lines[i][1].startswith((' ', '\t')):
        preferences.extend(word for _, word in _words(lines[i][1]))
        i += 1
      continue

    match = _GOAL_RE.match(line)
    if match is None:
      raise BankParseError(path, number, 1, f'Expected "goal" or "preferences:", found {line.strip()!r}')
    goal_id, name, recipe_type = match.groups()
    if recipe_type not in RECIPE_TYPES:
      raise BankParseError(path, number, match.start(3) + 1, f'Unknown recipe type {recipe_type!r}')
    if goal_id in networks:
      raise BankParseError(path, number, match.start(1) + 1, f'Duplicate goal {goal_id!r}')

    stages: List[Stage] = []
    prefs: Optional[List[str]] = None
    i += 1
    while True:
      if i >= len(lines):
        raise BankParseError(path, number, 1, f'Goal {goal_id} is missing "end"')
      n, body = lines[i]
      i += 1
      words = _words(body)
      keyword = words[0][1]
      if keyword == 'end':
        break
      if keyword in ('clique', 'chain'):
        actions = []
        for column, word in words[1:]:
          try:
            actions.append(ActionInstance.parse(word))
          except ValueError as e:
            raise BankParseError(path, n, column, str(e))
        if len(actions) == 0:
          raise BankParseError(path, n, 1, f'Empty {keyword}')
        stages.append(Stage(keyword, tuple(actions)))
      elif keyword == 'prefs':
        prefs = [word for _, word in words[1:]]
        pref_refs.extend((n, column, goal_id, word) for column, word in words[1:])
      else:
        raise BankParseError(path, n, words[0][0], f'Unknown keyword {keyword!r}')

    if len(stages) == 0:
      raise BankParseError(path, number, 1, f'Goal {goal_id} has no steps')
    if not prefs:
      raise BankParseError(path, number, 1, f'Goal {goal_id} has no preferences')
    try:
      network = TaskNetwork.from_stages(stages)
      network.validate()
    except ValueError as e:
      raise BankParseError(path, number, 1, f'Goal {goal_id}: {e}')
    goals.append(Goal(goal_id, name, recipe_type))
    networks[goal_id] = network
    goal_prefs[goal_id] = frozenset(prefs)

  declared = set(preferences)
  for n, column, goal_id, word in pref_refs:
    if word not in declared:
      raise BankParseError(path, n, column, f'Goal {goal_id} maps to undeclared preference {word!r}')

  pref_map = PreferenceMap(preferences, goal_prefs, {goal.id: goal for goal in goals})
  try:
    pref_map.validate()
  except ValueError as e:
    raise BankParseError(path, lines[-1][0], 1, str(e))
  return GoalBank(goals, networks, pref_map, BANK_VERSION)


def load_bank(path: str) -> GoalBank:
  with open(path, 'r') as f:
    return parse_bank(f.read(), path)


__all__ = ['BANK_VERSION', 'parse_bank', 'load_bank']
