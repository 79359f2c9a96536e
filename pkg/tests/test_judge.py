from typing import *
import json
import threading

import pytest
import requests

from sous.errors import JudgeUnavailableError, MalformedJudgeOutputError
from sous.judge import CachedJudge, HttpJudge, KeywordJudge, clamp01, content_key, tokens


class CountingJudge:
  def __init__(self) -> None:
    self.requests = 0
    self.lock = threading.Lock()

  def score(self, source: str, targets: List[str], context: str) -> Dict[str, float]:
    with self.lock:
      self.requests += 1
    return {t: 1.0 if source in t else 0.0 for t in targets}

  def propose(self, context: str, limit: int) -> List[str]:
    self.requests += 1
    return ['Soup', 'Salad'][:limit]


class FakeResponse:
  def __init__(self, body: Any, status: int = 200) -> None:
    self.body = body
    self.status = status

  def raise_for_status(self) -> None:
    if self.status >= 400:
      raise requests.exceptions.HTTPError(f'{self.status} error')

  def json(self) -> Any:
    if isinstance(self.body, Exception):
      raise self.body
    return self.body


class FakeSession:
  def __init__(self, response: Any) -> None:
    self.response = response
    self.calls: List[Tuple[str, Dict[str, Any]]] = []

  def post(self, url: str, json: Dict[str, Any], timeout: float) -> FakeResponse:
    self.calls.append((url, json))
    if isinstance(self.response, Exception):
      raise self.response
    return cast(FakeResponse, self.response)


def test_tokens_normalize_plurals() -> None:
  assert tokens('Berries and oats') == ['berry', 'oat']
  assert clamp01(1.7) == 1.0 and clamp01(-2) == 0.0


def test_keyword_judge_prefers_related_targets(judge: KeywordJudge) -> None:
  scores = judge.score('sweet', ['gather(strawberry)', 'gather(salt)'], '')
  assert scores['gather(strawberry)'] > scores['gather(salt)']
  assert all(0.0 <= v <= 1.0 for v in scores.values())
  assert judge.score('sweet', ['gather(strawberry)', 'gather(salt)'], '') == scores


def test_keyword_judge_negation(judge: KeywordJudge) -> None:
  plain = judge.score('strawberry', ['gather(strawberry)'], '')['gather(strawberry)']
  negated = judge.score('no strawberry', ['gather(strawberry)'], '')['gather(strawberry)']
  assert plain == 1.0
  assert negated == 0.0


def test_keyword_judge_proposes_matching_goals(judge: KeywordJudge) -> None:
  proposals = judge.propose('oats berries', 8)
  assert 'Berry Oatmeal' in proposals
  assert len(proposals) <= 8


def test_cached_judge_calls_inner_once() -> None:
  inner = CountingJudge()
  cached = CachedJudge(inner)
  first = cached.score('oat', ['gather(oats)', 'gather(salt)'], 'ctx')
  second = cached.score('oat', ['gather(salt)', 'gather(oats)'], 'ctx')
  assert first == second == {'gather(oats)': 1.0, 'gather(salt)': 0.0}
  assert inner.requests == 1
  cached.score('oat', ['gather(oats)'], 'other ctx')
  assert inner.requests == 2
  assert cached.propose('ctx', 2) == cached.propose('ctx', 2)
  assert inner.requests == 3


def test_cached_judge_is_safe_across_threads() -> None:
  inner = CountingJudge()
  cached = CachedJudge(inner)
  threads = [
    threading.Thread(target=cached.score, args=('oat', ['gather(oats)'], ''))
      for _ in range(16)
  ]
  for thread in threads:
    thread.start()
  for thread in threads:
    thread.join()
  assert inner.requests == 1


def test_cached_judge_persists(tmp_path: Any) -> None:
  path = str(tmp_path / 'cache' / 'judge.json')
  cached = CachedJudge(CountingJudge(), path)
  cached.score('oat', ['gather(oats)'], '')
  cached.save()
  with open(path, 'r') as f:
    assert len(json.load(f)) == 1

  inner = CountingJudge()
  reloaded = CachedJudge(inner, path)
  assert reloaded.score('oat', ['gather(oats)'], '') == {'gather(oats)': 1.0}
  assert inner.requests == 0


def test_content_key_is_stable() -> None:
  assert content_key('score', 'a', ['x'], '') == content_key('score', 'a', ['x'], '')
  assert content_key('score', 'a', ['x'], '') != content_key('score', 'b', ['x'], '')
  assert len(content_key('x')) == 64


def test_http_judge_scores_and_clamps() -> None:
  session = FakeSession(FakeResponse({'scores': {'a': 0.25, 'b': 3}}))
  judge = HttpJudge('http://judge.local/', session=cast(requests.Session, session))
  assert judge.score('src', ['a', 'b'], 'ctx') == {'a': 0.25, 'b': 1.0}
  assert session.calls == [('http://judge.local', {'source': 'src', 'targets': ['a', 'b'], 'context': 'ctx'})]
  assert judge.requests == 1


def test_http_judge_propose() -> None:
  session = FakeSession(FakeResponse({'goals': ['Soup', 'Stew', 'Salad']}))
  judge = HttpJudge('http://judge.local', session=cast(requests.Session, session))
  assert judge.propose('warm', 2) == ['Soup', 'Stew']
  assert session.calls[0][0] == 'http://judge.local/propose'


@pytest.mark.parametrize('response', [
  requests.exceptions.ConnectionError('refused'),
  requests.exceptions.Timeout('slow'),
  FakeResponse({}, status=503),
])
def test_http_judge_unavailable(response: Any) -> None:
  judge = HttpJudge('http://judge.local', session=cast(requests.Session, FakeSession(response)))
  with pytest.raises(JudgeUnavailableError):
    judge.score('src', ['a'], '')


@pytest.mark.parametrize('body', [
  ValueError('not json'),
  ['a list'],
  {'scores': {'a': 'high'}},
  {'scores': {'b': 0.5}},
  {'scores': {'a': True}},
])
def test_http_judge_malformed(body: Any) -> None:
  judge = HttpJudge('http://judge.local', session=cast(requests.Session, FakeSession(FakeResponse(body))))
  with pytest.raises(MalformedJudgeOutputError):
    judge.score('src', ['a'], '')
