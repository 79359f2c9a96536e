from typing import *
import json
import os

from sous.errors import SousError
from sous.goal_bank import ExperimentSpec, Goal
from sous.trace import EpisodeTrace, TraceEvent, EVENT_KINDS
from sous.world import ActionInstance


TRACE_VERSION = 1


def _event_to_json(event: TraceEvent) -> Dict[str, Any]:
  data: Dict[str, Any] = {
    'timestep': event.timestep,
    'agent': event.agent,
    'kind': event.kind,
  }
  if event.action is not None:
    data['action'] = event.action.render()
  if event.question_id is not None:
    data['question_id'] = event.question_id
    data['question'] = event.question
    data['answer'] = event.answer
  data['belief'] = [[goal_id, p] for goal_id, p in event.belief]
  data['summary'] = event.summary
  if event.mistake:
    data['mistake'] = True
  return data


def _event_from_json(data: Dict[str, Any]) -> TraceEvent:
  if data['kind'] not in EVENT_KINDS:
    raise SousError(f'Unknown trace event kind {data["kind"]!r}')
  action = data.get('action')
  return TraceEvent(
    timestep=int(data['timestep']),
    agent=data['agent'],
    kind=data['kind'],
    action=ActionInstance.parse(action) if action is not None else None,
    question_id=data.get('question_id'),
    question=data.get('question'),
    answer=data.get('answer'),
    belief=tuple((str(goal_id), float(p)) for goal_id, p in data.get('belief', [])),
    summary=data.get('summary', ''),
    mistake=bool(data.get('mistake', False)),
  )


def trace_to_json(trace: EpisodeTrace) -> Dict[str, Any]:
  goal = trace.experiment.true_goal
  return {
    'version': TRACE_VERSION,
    'experiment': {
      'preferences': list(trace.experiment.preference_pair),
      'goal': {'id': goal.id, 'name': goal.name, 'type': goal.recipe_type},
      'seed': trace.experiment.seed,
    },
    'method': trace.method,
    'seed': trace.seed,
    'ground_truth_len': trace.ground_truth_len,
    'stated_prefs': list(trace.stated_prefs),
    'completed': trace.completed,
    'failure': trace.failure,
    'events': [_event_to_json(e) for e in trace.events],
  }


def trace_from_json(data: Dict[str, Any]) -> EpisodeTrace:
  if data.get('version') != TRACE_VERSION:
    raise SousError(f'Unsupported trace version {data.get("version")!r}')
  exp = data['experiment']
  goal = exp['goal']
  a, b = exp['preferences']
  trace = EpisodeTrace(
    ExperimentSpec((a, b), Goal(goal['id'], goal['name'], goal['type']), int(exp['seed'])),
    int(data['ground_truth_len']),
    data.get('method', ''),
    int(data.get('seed', 0)),
    list(data.get('stated_prefs', [])),
  )
  for event in data['events']:
    trace.add(_event_from_json(event))
  trace.completed = bool(data.get('completed', False))
  trace.failure = data.get('failure')
  return trace


def save_trace(trace: EpisodeTrace, path: str) -> None:
  directory = os.path.dirname(path)
  if directory:
    os.makedirs(directory, exist_ok=True)
  with open(path, 'w') as f:
    json.dump(trace_to_json(trace), f, indent=2)


def load_trace(path: str) -> EpisodeTrace:
  try:
    with open(path, 'r') as f:
      data = json.load(f)
  except OSError as e:
    raise SousError(f'Could not read trace {path}: {e.strerror}') from e
  except ValueError as e:
    raise SousError(f'{path}: malformed trace: {e}') from e
  try:
    return trace_from_json(data)
  except (KeyError, TypeError, ValueError) as e:
    raise SousError(f'{path}: malformed trace: {e}') from e


__all__ = [
  'TRACE_VERSION',
  'trace_to_json',
  'trace_from_json',
  'save_trace',
  'load_trace',
]
