from __future__ import annotations

from typing import *
from enum import Enum
from datetime import datetime
from collections import deque
from dataclasses import dataclass
import time
import threading


class LogLevel(Enum):
  DEBUG = 0
  INFO = 1
  WARN = 2
  ERROR = 3

class LogMessage:
  def __init__(self, level: LogLevel, timestamp: datetime, message: str) -> None:
    self.level = level
    self.timestamp = timestamp
    self.message = message

  def __str__(self) -> str:
    timestamp = self.timestamp.isoformat(' ')
    return f'[{timestamp}] [{self.level.name}] {self.message}'


HISTORY_LIMIT = 10_000

history: Deque[LogMessage] = deque(maxlen=HISTORY_LIMIT)
_console_level = LogLevel.INFO
_lock = threading.Lock()


def set_console_level(level: LogLevel) -> None:
  global _console_level
  _console_level = level

def _print_console(message: LogMessage) -> None:
  if message.level.value >= _console_level.value:
    print(message)

subscribers: List[Callable[[LogMessage], None]] = [_print_console]

def subscribe(callback: Callable[[LogMessage], None]) -> None:
  with _lock:
    for message in history:
      callback(message)
    subscribers.append(callback)

def unsubscribe(callback: Callable[[LogMessage], None]) -> None:
  with _lock:
    if callback in subscribers:
      subscribers.remove(callback)


def log(message: LogMessage) -> None:
  with _lock:
    for callback in subscribers:
      callback(message)
    history.append(message)

def log_join(level: LogLevel, *words: object) -> None:
  message = ' '.join(map(str, words))
  log(LogMessage(level, datetime.now(), message))


def debug(*words: object) -> None:
  log_join(LogLevel.DEBUG, *words)

def info(*words: object) -> None:
  log_join(LogLevel.INFO, *words)

def warn(*words: object) -> None:
  log_join(LogLevel.WARN, *words)

def error(*words: object) -> None:
  log_join(LogLevel.ERROR, *words)



@dataclass
class Summary:
  time: float = 0.0
  requests: float = 0.0
  count: int = 0

  @staticmethod
  def average(samples: List[Summary]) -> Summary:
    if len(samples) == 0:
      return Summary()
    return Summary(
      time = sum(s.time for s in samples) / len(samples),
      requests = sum(s.requests for s in samples) / len(samples),
      count = len(samples),
    )


class Timer:
  """Nested phase timer for robot turns.

  Phases are identified by their path of names, e.g. ('turn', 'plan').
  `get_num_requests` is wired to the judge's request counter so each phase
  also records how many judge requests it issued.
  """

  def __init__(self) -> None:
    self.samples: Dict[Tuple[str, ...], List[Summary]] = {}
    self.get_num_requests: Callable[[], int] = lambda: 0
    self._local = threading.local()

  def _stack(self) -> List[str]:
    if not hasattr(self._local, 'stack'):
      self._local.stack = []
      self._local.active = {}
    return cast(List[str], self._local.stack)

  def _active(self) -> Dict[Tuple[str, ...], Summary]:
    self._stack()
    return cast(Dict[Tuple[str, ...], Summary], self._local.active)

  def begin(self, name: str) -> None:
    stack = self._stack()
    stack.append(name)
    path = tuple(stack)
    self._active()[path] = Summary(
      time = time.time(),
      requests = self.get_num_requests(),
    )

  def end(self) -> None:
    stack = self._stack()
    path = tuple(stack)
    stack.pop()
    sample = self._active().pop(path, None)
    if sample is None:
      return
    sample.time = (time.time() - sample.time) * 1000
    sample.requests = self.get_num_requests() - sample.requests
    with _lock:
      self.samples.setdefault(path, []).append(sample)

  def reset(self) -> None:
    self.samples.clear()

  def get_summaries(self) -> Dict[Tuple[str, ...], Summary]:
    return {
      path: Summary.average(samples)
        for path, samples in sorted(self.samples.items())
    }

  def format(self, summaries: Dict[Tuple[str, ...], Summary]) -> List[str]:
    from sous.util import format_align
    return format_align(
      '{0}%s%a - %s{1:.2f}%ams  %s{2:.1f}%a req  x%s{3}%a',
      [
        (
          '  ' * (len(path) - 1) + path[-1],
          s.time,
          s.requests,
          s.count,
        )
        for path, s in summaries.items()
      ],
    )


timer = Timer()


__all__ = [
  'LogLevel',
  'LogMessage',
  'set_console_level',
  'subscribe',
  'unsubscribe',
  'debug',
  'info',
  'warn',
  'error',
  'timer',
]
