from __future__ import annotations

from typing import *
from abc import abstractmethod
import json
import os
import re
import threading

import requests
from cryptography.hazmat.primitives import hashes

import sous.log as log
from sous.errors import JudgeUnavailableError, MalformedJudgeOutputError
from sous.goal_bank import GoalBank
from sous.world import VERBS


class Judge(Protocol):
  """Relevance scorer standing in for a language-model judge.

  `score` maps each target text to a relevance in [0, 1] given a source text
  and free-form context. `propose` suggests goal names for a context.
  """

  requests: int

  @abstractmethod
  def score(self, source: str, targets: List[str], context: str) -> Dict[str, float]: ...

  @abstractmethod
  def propose(self, context: str, limit: int) -> List[str]: ...


def clamp01(value: float) -> float:
  return min(max(float(value), 0.0), 1.0)


_TOKEN_RE = re.compile(r'[a-z0-9_\-]+')

_STOPWORDS = frozenset('''
  a an the and or with of in to for on at by i you we it is be are will was
  want something dish what kind should making make use include yes maybe
  likely phase items preferences answers recent unknown human robot none
'''.split())

_NEGATIONS = ('no ', 'without ', 'not ')


def normalize(token: str) -> str:
  if token.endswith('ies') and len(token) > 4:
    return token[:-3] + 'y'
  if token.endswith('s') and not token.endswith('ss') and len(token) > 3:
    return token[:-1]
  return token


def tokens(text: str) -> List[str]:
  return [normalize(t) for t in _TOKEN_RE.findall(text.lower()) if t not in _STOPWORDS]


def load_lexicon(path: str) -> Dict[str, List[str]]:
  lexicon: Dict[str, List[str]] = {}
  with open(path, 'r') as f:
    for number, line in enumerate(f, 1):
      line = line.split('#', 1)[0].strip()
      if line == '' or line.startswith('sous-lexicon'):
        continue
      if ':' not in line:
        raise ValueError(f'{path}:{number}: expected "word: related..."')
      word, related = line.split(':', 1)
      lexicon[normalize(word.strip())] = [normalize(r) for r in related.split()]
  return lexicon


Concept = Dict[str, float]

def _merge(into: Concept, token: str, weight: float) -> None:
  if weight > into.get(token, 0.0):
    into[token] = weight


class KeywordJudge:
  """Deterministic judge scoring by weighted keyword overlap.

  Goal ids, goal names, preferences and recipe types expand into the
  keywords of the goals they denote, so "sweet" pulls toward the
  ingredients of sweet recipes. Context is ignored.
  """

  def __init__(self, bank: GoalBank, lexicon: Optional[Dict[str, List[str]]] = None) -> None:
    self.bank = bank
    self.lexicon = lexicon or {}
    self.requests = 0
    self._verbs = frozenset(VERBS)

    self.goal_keywords: Dict[str, FrozenSet[str]] = {}
    self.name_to_goal: Dict[str, str] = {}
    for goal in bank.goals:
      words: Set[str] = {normalize(goal.id), normalize(goal.recipe_type.lower())}
      words.update(tokens(goal.name))
      for node in bank.networks[goal.id].nodes:
        words.update(normalize(a) for a in node.args)
      words.update(normalize(p) for p in bank.prefs.goal_to_prefs[goal.id])
      words -= self._verbs
      self.goal_keywords[goal.id] = frozenset(words)
      self.name_to_goal[goal.name.lower()] = goal.id
      self.name_to_goal[goal.id] = goal.id

    self.pooled: Dict[str, Concept] = {}
    for pref in bank.prefs.preferences:
      self.pooled[normalize(pref)] = self._pool(bank.prefs.goals_for(pref))
    for recipe_type in {goal.recipe_type for goal in bank.goals}:
      ids = [goal.id for goal in bank.goals if goal.recipe_type == recipe_type]
      self.pooled[normalize(recipe_type.lower())] = self._pool(ids)

  def _pool(self, goal_ids: List[str]) -> Concept:
    counts: Dict[str, int] = {}
    for goal_id in goal_ids:
      for word in self.goal_keywords[goal_id]:
        counts[word] = counts.get(word, 0) + 1
    return {word: count / len(goal_ids) for word, count in counts.items()}

  def concept(self, text: str) -> Concept:
    result: Concept = {}
    goal_id = self.name_to_goal.get(text.strip().lower())
    if goal_id is not None:
      for word in self.goal_keywords[goal_id]:
        result[word] = 1.0
    for token in tokens(text):
      if token not in self._verbs:
        _merge(result, token, 1.0)
      for related in self.lexicon.get(token, []):
        _merge(result, related, 1.0)
      for word, weight in self.pooled.get(token, {}).items():
        _merge(result, word, weight)
    return result

  def relevance(self, source: Concept, target: Concept) -> float:
    total = sum(target.values())
    if total == 0:
      return 0.0
    overlap = sum(min(source.get(word, 0.0), weight) for word, weight in target.items())
    return clamp01(overlap / total)

  def score(self, source: str, targets: List[str], context: str) -> Dict[str, float]:
    self.requests += 1
    negated = source.lower().startswith(_NEGATIONS)
    if negated:
      source = source.split(' ', 1)[1]
    source_concept = self.concept(source)
    result = {}
    for target in targets:
      value = self.relevance(source_concept, self.concept(target))
      result[target] = 1.0 - value if negated else value
    return result

  def propose(self, context: str, limit: int) -> List[str]:
    names = [goal.name for goal in self.bank.goals]
    scores = self.score(context, names, '')
    ranked = sorted(names, key=lambda name: (-scores[name], name))
    return [name for name in ranked if scores[name] > 0][:limit]


class HttpJudge:
  """Judge reached over HTTP.

  `POST <endpoint>` with {source, targets, context} returns {scores: {...}};
  `POST <endpoint>/propose` with {context, limit} returns {goals: [...]}.
  """

  def __init__(self, endpoint: str, timeout: float = 10.0, session: Optional[requests.Session] = None) -> None:
    self.endpoint = endpoint.rstrip('/')
    self.timeout = timeout
    self.session = session or requests.Session()
    self.requests = 0

  def _post(self, url: str, payload: Dict[str, Any]) -> Any:
    self.requests += 1
    try:
      response = self.session.post(url, json=payload, timeout=self.timeout)
      response.raise_for_status()
    except requests.exceptions.RequestException as e:
      log.error('Judge request to', url, 'failed:', e)
      raise JudgeUnavailableError(f'Judge at {url} is unavailable: {e}') from e
    try:
      return response.json()
    except ValueError as e:
      raise MalformedJudgeOutputError(f'Judge at {url} returned invalid JSON') from e

  def score(self, source: str, targets: List[str], context: str) -> Dict[str, float]:
    body = self._post(self.endpoint, {'source': source, 'targets': targets, 'context': context})
    scores = body.get('scores') if isinstance(body, dict) else None
    if not isinstance(scores, dict):
      raise MalformedJudgeOutputError('Judge response has no "scores" object')
    result = {}
    for target in targets:
      value = scores.get(target)
      if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedJudgeOutputError(f'Judge gave no numeric score for {target!r}')
      result[target] = clamp01(value)
    return result

  def propose(self, context: str, limit: int) -> List[str]:
    body = self._post(self.endpoint + '/propose', {'context': context, 'limit': limit})
    goals = body.get('goals') if isinstance(body, dict) else None
    if not isinstance(goals, list) or not all(isinstance(g, str) for g in goals):
      raise MalformedJudgeOutputError('Judge response has no "goals" list')
    return list(goals)[:limit]


def content_key(*parts: object) -> str:
  digest = hashes.Hash(hashes.SHA256())
  digest.update(json.dumps(parts, sort_keys=True).encode('utf-8'))
  return digest.finalize().hex()


class CachedJudge:
  """Wraps a judge so each distinct request reaches it once.

  Keys hash the request content, with targets treated as a set. Reads are
  lock-free; misses and writes are serialized.
  """

  def __init__(self, inner: Judge, path: Optional[str] = None) -> None:
    self.inner = inner
    self.path = path
    self.cache: Dict[str, Any] = {}
    self.lock = threading.Lock()
    self.dirty = False
    if path is not None and os.path.exists(path):
      with open(path, 'r') as f:
        self.cache = json.load(f)
      log.debug('Loaded', len(self.cache), 'judge cache entries from', path)

  @property
  def requests(self) -> int:
    return self.inner.requests

  def score(self, source: str, targets: List[str], context: str) -> Dict[str, float]:
    key = content_key('score', source, sorted(set(targets)), context)
    cached = self.cache.get(key)
    if cached is None:
      with self.lock:
        cached = self.cache.get(key)
        if cached is None:
          cached = self.inner.score(source, sorted(set(targets)), context)
          self.cache[key] = cached
          self.dirty = True
    return {target: cached[target] for target in targets}

  def propose(self, context: str, limit: int) -> List[str]:
    key = content_key('propose', context, limit)
    cached = self.cache.get(key)
    if cached is None:
      with self.lock:
        cached = self.cache.get(key)
        if cached is None:
          cached = self.inner.propose(context, limit)
          self.cache[key] = cached
          self.dirty = True
    return list(cached)

  def save(self) -> None:
    if self.path is None or not self.dirty:
      return
    with self.lock:
      directory = os.path.dirname(self.path)
      if directory:
        os.makedirs(directory, exist_ok=True)
      with open(self.path, 'w') as f:
        json.dump(self.cache, f, sort_keys=True)
      self.dirty = False
    log.debug('Saved', len(self.cache), 'judge cache entries to', self.path)


__all__ = [
  'Judge',
  'KeywordJudge',
  'HttpJudge',
  'CachedJudge',
  'content_key',
  'load_lexicon',
  'tokens',
  'normalize',
  'clamp01',
]
