from typing import *
import json

import pytest

from sous.episode import run_episode
from sous.errors import SousError
from sous.format_trace import TRACE_VERSION, load_trace, save_trace, trace_from_json, trace_to_json
from sous.goal_bank import ExperimentSpec
from sous.kitchen import Kitchen
from sous.methods import load_method
from sous.metrics import compute_metrics


@pytest.fixture(scope='module')
def episode_trace(kitchen: Kitchen) -> Any:
  a, b = sorted(kitchen.bank.prefs.goal_to_prefs['greek_salad'])[:2]
  exp = ExperimentSpec((a, b), kitchen.bank.goal('greek_salad'), 0)
  return run_episode(exp, load_method('known-goals-bank-ask'), kitchen)


def test_saved_trace_reloads(tmp_path: Any, episode_trace: Any) -> None:
  path = str(tmp_path / 'traces' / 'episode.json')
  save_trace(episode_trace, path)
  loaded = load_trace(path)
  assert loaded.experiment == episode_trace.experiment
  assert loaded.events == episode_trace.events
  assert loaded.stated_prefs == episode_trace.stated_prefs
  assert (loaded.completed, loaded.failure) == (episode_trace.completed, episode_trace.failure)
  assert compute_metrics(loaded) == compute_metrics(episode_trace)


def test_trace_json_layout(episode_trace: Any) -> None:
  data = trace_to_json(episode_trace)
  assert data['version'] == TRACE_VERSION
  assert data['experiment']['goal']['id'] == 'greek_salad'
  first = data['events'][0]
  assert first['agent'] == 'human' and first['kind'] == 'action'
  assert first['action'].endswith(',human)')
  json.dumps(data)


def test_unsupported_version(episode_trace: Any) -> None:
  data = trace_to_json(episode_trace)
  data['version'] = 99
  with pytest.raises(SousError):
    trace_from_json(data)


def test_unknown_event_kind(episode_trace: Any) -> None:
  data = trace_to_json(episode_trace)
  data['events'][0]['kind'] = 'dance'
  with pytest.raises(SousError):
    trace_from_json(data)


def test_malformed_file(tmp_path: Any) -> None:
  path = tmp_path / 'bad.json'
  path.write_text(json.dumps({'version': TRACE_VERSION, 'events': []}))
  with pytest.raises(SousError) as e:
    load_trace(str(path))
  assert 'malformed' in str(e.value)
