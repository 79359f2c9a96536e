from __future__ import annotations

from typing import *
from dataclasses import dataclass, field

from sous.goal_bank import ExperimentSpec
from sous.world import ActionInstance, HUMAN, ROBOT


ACTION = 'action'
WAIT = 'wait'
QUESTION = 'question'
EVENT_KINDS = (ACTION, WAIT, QUESTION)


@dataclass(frozen=True)
class TraceEvent:
  timestep: int
  agent: str
  kind: str
  action: Optional[ActionInstance] = None
  question_id: Optional[str] = None
  question: Optional[str] = None
  answer: Optional[str] = None
  belief: Tuple[Tuple[str, float], ...] = ()
  summary: str = ''
  mistake: bool = False

  @property
  def prediction(self) -> Optional[str]:
    return self.belief[0][0] if len(self.belief) > 0 else None

  def top(self, k: int) -> List[str]:
    return [goal_id for goal_id, _ in self.belief[:k]]


@dataclass
class EpisodeTrace:
  experiment: ExperimentSpec
  ground_truth_len: int
  method: str = ''
  seed: int = 0
  stated_prefs: List[str] = field(default_factory=list)
  events: List[TraceEvent] = field(default_factory=list)
  completed: bool = False
  failure: Optional[str] = None

  def next_timestep(self) -> int:
    return self.events[-1].timestep + 1 if len(self.events) > 0 else 0

  def add(self, event: TraceEvent) -> None:
    if len(self.events) > 0 and event.timestep <= self.events[-1].timestep:
      raise ValueError('Trace timesteps must increase')
    self.events.append(event)

  def actions(self, agent: Optional[str] = None) -> List[ActionInstance]:
    return [
      e.action for e in self.events
        if e.kind == ACTION and e.action is not None and (agent is None or e.agent == agent)
    ]

  def human_actions(self) -> List[ActionInstance]:
    return self.actions(HUMAN)

  def robot_actions(self) -> List[ActionInstance]:
    return self.actions(ROBOT)

  def answers(self) -> List[Tuple[str, str]]:
    return [
      (e.question or '', e.answer or '') for e in self.events
        if e.kind == QUESTION
    ]

  def turn_events(self) -> List[TraceEvent]:
    """Events at which a move was made, the timesteps the metrics range over."""
    return [e for e in self.events if e.kind in (ACTION, WAIT)]


__all__ = [
  'ACTION',
  'WAIT',
  'QUESTION',
  'EVENT_KINDS',
  'TraceEvent',
  'EpisodeTrace',
]
